//! Decode, section, and author EVM bytecode.
//!
//! Decoding is total: every byte of input is consumed, and bytes outside the
//! opcode table become one-byte INVALID-class pseudo-instructions. A PUSH
//! whose immediate runs off the end of the code is zero-padded to its full
//! width and flagged truncated.

pub mod asm;
pub mod opcode;

use std::collections::BTreeSet;
use std::fmt;

use sha3::{Digest, Keccak256};
use thiserror::Error;

use opcode::{immediate_len, is_push, mnemonic, op};

/// Keccak-256 (the pre-SHA3-standardization padding variant used by Ethereum).
pub fn keccak256(data: &[u8]) -> [u8; 32] {
    let mut hasher = Keccak256::new();
    hasher.update(data);
    hasher.finalize().into()
}

/// A single decoded instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    /// Byte index into the code this instruction starts at.
    pub offset: usize,
    /// The one-byte opcode as it appears in the code.
    pub opcode: u8,
    /// Immediate bytes (PUSH1..PUSH32 only), always the full PUSH width.
    pub immediate: Option<Vec<u8>>,
    /// Set on a final PUSH whose immediate ran past the end of the code.
    pub truncated: bool,
}

impl Instruction {
    /// Encoded size in bytes: 1 + immediate width.
    pub fn size(&self) -> usize {
        1 + self.immediate.as_ref().map_or(0, |imm| imm.len())
    }

    pub fn is_push(&self) -> bool {
        is_push(self.opcode)
    }

    /// Mnemonic, or `INVALID(0xNN)` for bytes outside the table.
    pub fn name(&self) -> String {
        match mnemonic(self.opcode) {
            Some(m) => m.to_string(),
            None => format!("INVALID(0x{:02x})", self.opcode),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#06x}: {}", self.offset, self.name())?;
        if let Some(imm) = &self.immediate {
            write!(f, " 0x{}", hex::encode(imm))?;
        }
        if self.truncated {
            write!(f, " (truncated)")?;
        }
        Ok(())
    }
}

/// Fully decoded bytecode with its valid jump targets.
#[derive(Debug, Clone, Default)]
pub struct InstructionStream {
    pub code: Vec<u8>,
    pub instructions: Vec<Instruction>,
    /// Offsets whose opcode is JUMPDEST; the only valid jump targets.
    pub jumpdests: BTreeSet<usize>,
}

impl InstructionStream {
    /// Instruction starting exactly at `offset`, if any.
    pub fn at(&self, offset: usize) -> Option<&Instruction> {
        let idx = self
            .instructions
            .binary_search_by_key(&offset, |i| i.offset)
            .ok()?;
        Some(&self.instructions[idx])
    }
}

/// Total, deterministic decoding of raw bytecode.
pub fn disassemble(code: &[u8]) -> InstructionStream {
    let mut instructions = Vec::new();
    let mut jumpdests = BTreeSet::new();
    let mut pos = 0usize;
    while pos < code.len() {
        let opcode = code[pos];
        let width = immediate_len(opcode);
        let (immediate, truncated) = if width > 0 {
            let end = pos + 1 + width;
            if end <= code.len() {
                (Some(code[pos + 1..end].to_vec()), false)
            } else {
                // Pad as written: keep the bytes that exist, zero-fill the rest.
                let mut imm = code[pos + 1..].to_vec();
                imm.resize(width, 0);
                (Some(imm), true)
            }
        } else {
            (None, false)
        };
        if opcode == op::JUMPDEST {
            jumpdests.insert(pos);
        }
        instructions.push(Instruction {
            offset: pos,
            opcode,
            immediate,
            truncated,
        });
        pos += 1 + width;
    }
    InstructionStream {
        code: code.to_vec(),
        instructions,
        jumpdests,
    }
}

/// A 4-byte function selector, optionally paired with its text signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Selector {
    pub value: [u8; 4],
    pub signature: Option<String>,
}

impl Selector {
    pub fn from_signature(signature: &str) -> Self {
        let digest = keccak256(signature.as_bytes());
        let mut value = [0u8; 4];
        value.copy_from_slice(&digest[..4]);
        Selector {
            value,
            signature: Some(signature.to_string()),
        }
    }

    pub fn from_bytes(value: [u8; 4]) -> Self {
        Selector {
            value,
            signature: None,
        }
    }

    pub fn as_u32(&self) -> u32 {
        u32::from_be_bytes(self.value)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.value))?;
        if let Some(sig) = &self.signature {
            write!(f, " ({sig})")?;
        }
        Ok(())
    }
}

/// Selector scan result; `heuristic` marks the PUSH4-prefix fallback.
#[derive(Debug, Clone, Default)]
pub struct SelectorScan {
    pub selectors: BTreeSet<Selector>,
    pub heuristic: bool,
}

/// Extract the dispatch surface of runtime code: every PUSH4 immediate that
/// flows into an EQ whose result feeds a JUMPI.
///
/// The scan runs a small abstract stack per basic block (reset at JUMPDEST),
/// which is exactly how dispatcher prologues are laid out. If the pattern is
/// never recognized but PUSH4s exist, all PUSH4 immediates before the first
/// JUMPDEST are returned and flagged heuristic.
pub fn extract_selectors(runtime: &[u8]) -> SelectorScan {
    let body = strip_metadata(runtime);
    let stream = disassemble(body);

    #[derive(Clone, PartialEq)]
    enum Abs {
        Other,
        Push4([u8; 4]),
        SelectorCmp([u8; 4]),
    }

    let mut found = BTreeSet::new();
    let mut stack: Vec<Abs> = Vec::new();
    for ins in &stream.instructions {
        match ins.opcode {
            op::JUMPDEST => stack.clear(),
            _ if is_push(ins.opcode) => {
                let imm = ins.immediate.as_deref().unwrap_or(&[]);
                if imm.len() == 4 {
                    let mut v = [0u8; 4];
                    v.copy_from_slice(imm);
                    stack.push(Abs::Push4(v));
                } else {
                    stack.push(Abs::Other);
                }
            }
            op::EQ => {
                let a = stack.pop();
                let b = stack.pop();
                let sel = match (&a, &b) {
                    (Some(Abs::Push4(v)), _) | (_, Some(Abs::Push4(v))) => Some(*v),
                    _ => None,
                };
                stack.push(match sel {
                    Some(v) => Abs::SelectorCmp(v),
                    None => Abs::Other,
                });
            }
            op::JUMPI => {
                let _dest = stack.pop();
                if let Some(Abs::SelectorCmp(v)) = stack.pop() {
                    found.insert(Selector::from_bytes(v));
                }
            }
            _ if (op::DUP1..=op::DUP16).contains(&ins.opcode) => {
                let depth = (ins.opcode - op::DUP1) as usize;
                if depth < stack.len() {
                    let dup = stack[stack.len() - 1 - depth].clone();
                    stack.push(dup);
                } else {
                    stack.clear();
                }
            }
            _ if (op::SWAP1..=op::SWAP16).contains(&ins.opcode) => {
                let depth = (ins.opcode - op::SWAP1) as usize + 1;
                let len = stack.len();
                if depth < len {
                    stack.swap(len - 1, len - 1 - depth);
                } else {
                    stack.clear();
                }
            }
            op::POP => {
                stack.pop();
            }
            // Any opcode we do not model invalidates the local abstraction
            // but keeps scanning; dispatcher prologues only use the ops above
            // plus the calldata shift, which lands in the Other bucket.
            _ => {
                stack.push(Abs::Other);
                if stack.len() > 64 {
                    stack.clear();
                }
            }
        }
    }

    if !found.is_empty() {
        return SelectorScan {
            selectors: found,
            heuristic: false,
        };
    }

    // Fallback: PUSH4 immediates ahead of the first function body.
    let mut fallback = BTreeSet::new();
    for ins in &stream.instructions {
        if ins.opcode == op::JUMPDEST {
            break;
        }
        if let Some(imm) = &ins.immediate {
            if imm.len() == 4 {
                let mut v = [0u8; 4];
                v.copy_from_slice(imm);
                fallback.insert(Selector::from_bytes(v));
            }
        }
    }
    SelectorScan {
        heuristic: !fallback.is_empty(),
        selectors: fallback,
    }
}

/// The sections of a deployment payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSections {
    /// Constructor logic: payload prefix ahead of the embedded runtime image.
    pub creation: Vec<u8>,
    /// On-chain code, as observed by executing the payload.
    pub runtime: Vec<u8>,
    /// Payload suffix after the embedded runtime image.
    pub constructor_args: Vec<u8>,
    /// Recognized content-hash trailer of the runtime, when present.
    pub metadata: Option<Vec<u8>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SectionError {
    #[error("observed runtime is not embedded in the deployment payload")]
    RuntimeNotEmbedded,
}

/// Split a deployment payload around the runtime image observed by executing
/// it. The caller obtains `runtime_observed` from the interpreter; execution
/// is authoritative, this is bookkeeping around it.
pub fn split_sections(
    deployment_payload: &[u8],
    runtime_observed: &[u8],
) -> Result<CodeSections, SectionError> {
    let start = if runtime_observed.is_empty() {
        // Degenerate deploy: everything is creation code, nothing trails.
        deployment_payload.len()
    } else {
        find_subslice(deployment_payload, runtime_observed).ok_or(SectionError::RuntimeNotEmbedded)?
    };
    let end = start + runtime_observed.len();
    Ok(CodeSections {
        creation: deployment_payload[..start].to_vec(),
        runtime: runtime_observed.to_vec(),
        constructor_args: deployment_payload[end..].to_vec(),
        metadata: metadata_trailer(runtime_observed).map(|m| m.to_vec()),
    })
}

/// Recognize the two common length-suffixed content-hash trailers
/// (`bzzr0`/`bzzr1` swarm hashes and CBOR `ipfs` framing). Unrecognized
/// trailers are left in place.
pub fn metadata_trailer(runtime: &[u8]) -> Option<&[u8]> {
    if runtime.len() < 2 {
        return None;
    }
    let n = runtime.len();
    let blob_len = u16::from_be_bytes([runtime[n - 2], runtime[n - 1]]) as usize;
    if blob_len == 0 || blob_len + 2 > n {
        return None;
    }
    let trailer = &runtime[n - 2 - blob_len..];
    let blob = &trailer[..blob_len];
    // CBOR map of 1-2 entries whose first key is "bzzrX" or "ipfs".
    let swarm = blob.len() > 7 && (blob[0] == 0xa1 || blob[0] == 0xa2) && &blob[1..7] == b"\x65bzzr";
    let ipfs = blob.len() > 6 && (blob[0] == 0xa1 || blob[0] == 0xa2) && &blob[1..6] == b"\x64ipfs";
    if swarm || ipfs {
        Some(trailer)
    } else {
        None
    }
}

/// Runtime code with any recognized metadata trailer removed; used for
/// selector scanning, never for execution.
pub fn strip_metadata(runtime: &[u8]) -> &[u8] {
    match metadata_trailer(runtime) {
        Some(trailer) => &runtime[..runtime.len() - trailer.len()],
        None => runtime,
    }
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    haystack.windows(needle.len()).position(|w| w == needle)
}

#[derive(Debug, Error)]
pub enum HexError {
    #[error("invalid hex input: {0}")]
    Invalid(#[from] hex::FromHexError),
}

/// Parse a bytecode hex string: lowercase or uppercase, optional `0x`
/// prefix, whitespace-tolerant.
pub fn parse_hex(input: &str) -> Result<Vec<u8>, HexError> {
    let cleaned: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let cleaned = cleaned.strip_prefix("0x").unwrap_or(&cleaned);
    Ok(hex::decode(cleaned)?)
}

/// Lowercase 0x-prefixed hex, the repo-wide convention for bytecode files.
pub fn to_hex(data: &[u8]) -> String {
    format!("0x{}", hex::encode(data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disassemble_minimal_arithmetic() {
        let stream = disassemble(&[0x60, 0x01, 0x60, 0x02, 0x01]);
        let names: Vec<String> = stream.instructions.iter().map(|i| i.name()).collect();
        assert_eq!(names, ["PUSH1", "PUSH1", "ADD"]);
        assert_eq!(stream.instructions[0].immediate, Some(vec![0x01]));
        assert_eq!(stream.instructions[1].offset, 2);
        assert_eq!(stream.instructions[2].offset, 4);
    }

    #[test]
    fn disassemble_sstore_byte() {
        let stream = disassemble(&[0x55]);
        assert_eq!(stream.instructions.len(), 1);
        assert_eq!(stream.instructions[0].name(), "SSTORE");
        assert_eq!(stream.instructions[0].offset, 0);
    }

    #[test]
    fn disassemble_truncated_push() {
        let stream = disassemble(&[0x60]);
        assert_eq!(stream.instructions.len(), 1);
        let ins = &stream.instructions[0];
        assert!(ins.truncated);
        assert_eq!(ins.immediate, Some(vec![0x00]));
    }

    #[test]
    fn truncated_push_pads_as_written() {
        // PUSH4 with only two immediate bytes available.
        let stream = disassemble(&[0x63, 0xaa, 0xbb]);
        let ins = &stream.instructions[0];
        assert!(ins.truncated);
        assert_eq!(ins.immediate, Some(vec![0xaa, 0xbb, 0x00, 0x00]));
    }

    #[test]
    fn jumpdests_only_at_0x5b() {
        let stream = disassemble(&[0x5b, 0x60, 0x5b, 0x5b]);
        // offset 0 is a JUMPDEST, offset 2 is a PUSH immediate (not decoded),
        // offset 3 is a JUMPDEST again.
        assert!(stream.jumpdests.contains(&0));
        assert!(!stream.jumpdests.contains(&2));
        assert!(stream.jumpdests.contains(&3));
    }

    #[test]
    fn keccak_known_vectors() {
        assert_eq!(
            hex::encode(keccak256(b"")),
            "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
        );
        assert_eq!(
            hex::encode(keccak256(b"abc")),
            "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"
        );
    }

    #[test]
    fn transfer_selector_value() {
        let sel = Selector::from_signature("transfer(address,uint256)");
        assert_eq!(sel.value, [0xa9, 0x05, 0x9c, 0xbb]);
    }

    #[test]
    fn keccak_deterministic() {
        let a = keccak256(b"determinism");
        let b = keccak256(b"determinism");
        assert_eq!(a, b);
    }

    #[test]
    fn no_push4_means_empty_scan() {
        let scan = extract_selectors(&[0x60, 0x01, 0x60, 0x02, 0x01, 0x00]);
        assert!(scan.selectors.is_empty());
        assert!(!scan.heuristic);
    }

    #[test]
    fn dispatcher_pattern_found() {
        // PUSH1 0 CALLDATALOAD PUSH1 0xe0 SHR DUP1 PUSH4 a9059cbb EQ PUSH2 dest JUMPI STOP
        let code = [
            0x60, 0x00, 0x35, 0x60, 0xe0, 0x1c, 0x80, 0x63, 0xa9, 0x05, 0x9c, 0xbb, 0x14, 0x61,
            0x00, 0x11, 0x57, 0x00, 0x5b, 0x00,
        ];
        let scan = extract_selectors(&code);
        assert!(!scan.heuristic);
        assert_eq!(scan.selectors.len(), 1);
        assert!(scan
            .selectors
            .contains(&Selector::from_bytes([0xa9, 0x05, 0x9c, 0xbb])));
    }

    #[test]
    fn push4_without_dispatch_uses_fallback() {
        // PUSH4 then POP, then a JUMPDEST body; no EQ/JUMPI anywhere.
        let code = [0x63, 0xde, 0xad, 0xbe, 0xef, 0x50, 0x5b, 0x00];
        let scan = extract_selectors(&code);
        assert!(scan.heuristic);
        assert_eq!(scan.selectors.len(), 1);
    }

    #[test]
    fn swarm_trailer_recognized() {
        let mut runtime = vec![0x60, 0x00, 0x00];
        let mut trailer = Vec::new();
        trailer.extend_from_slice(&[0xa1, 0x65]);
        trailer.extend_from_slice(b"bzzr0");
        trailer.extend_from_slice(&[0x58, 0x20]);
        trailer.extend_from_slice(&[0x11; 32]);
        let blob_len = trailer.len() as u16;
        runtime.extend_from_slice(&trailer);
        runtime.extend_from_slice(&blob_len.to_be_bytes());
        let meta = metadata_trailer(&runtime).expect("trailer");
        assert_eq!(meta.len(), trailer.len() + 2);
        assert_eq!(strip_metadata(&runtime), &[0x60, 0x00, 0x00][..]);
    }

    #[test]
    fn unrecognized_trailer_left_in_place() {
        let runtime = vec![0x60, 0x00, 0xde, 0xad, 0x00, 0x02];
        assert!(metadata_trailer(&runtime).is_none());
        assert_eq!(strip_metadata(&runtime), runtime.as_slice());
    }

    #[test]
    fn split_sections_layout() {
        let creation = vec![0x60, 0x0a];
        let runtime = vec![0x5b, 0x60, 0x01, 0x00];
        let args = vec![0xaa; 32];
        let mut payload = creation.clone();
        payload.extend_from_slice(&runtime);
        payload.extend_from_slice(&args);
        let sections = split_sections(&payload, &runtime).unwrap();
        assert_eq!(sections.creation, creation);
        assert_eq!(sections.constructor_args.len(), 32);
        assert!(sections.metadata.is_none());
    }

    #[test]
    fn split_sections_not_embedded() {
        let err = split_sections(&[0x60, 0x01], &[0x5b, 0x5b]).unwrap_err();
        assert_eq!(err, SectionError::RuntimeNotEmbedded);
    }

    #[test]
    fn split_sections_empty_runtime() {
        let sections = split_sections(&[0x60, 0x00, 0x80, 0xf3], &[]).unwrap();
        assert!(sections.runtime.is_empty());
        assert_eq!(sections.creation.len(), 4);
        assert!(sections.constructor_args.is_empty());
    }

    #[test]
    fn parse_hex_tolerant() {
        assert_eq!(parse_hex("0x6001").unwrap(), vec![0x60, 0x01]);
        assert_eq!(parse_hex(" 60 01\n").unwrap(), vec![0x60, 0x01]);
        assert!(parse_hex("0xzz").is_err());
    }
}
