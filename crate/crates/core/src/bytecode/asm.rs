//! Line-oriented assembler for authoring bytecode fixtures.
//!
//! Grammar (UTF-8 text):
//!   - one mnemonic per line, canonical uppercase names;
//!   - `#` starts a comment (full line or trailing);
//!   - PUSH immediates in hex: `PUSH1 0x01`, `PUSH4 0xa9059cbb`;
//!   - `name:` on its own line defines a label at the next instruction's
//!     offset (a trailing label resolves to the code length);
//!   - `PUSH @name` references a label and always assembles as PUSH2.
//!
//! No macros beyond labels.

use std::collections::HashMap;

use thiserror::Error;

use super::opcode::{self, immediate_len, op};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AsmError {
    #[error("line {line}: unknown mnemonic `{token}`")]
    UnknownMnemonic { line: usize, token: String },
    #[error("line {line}: `{mnemonic}` expects a {expected}-byte immediate, got {got} bytes")]
    ImmediateWidth {
        line: usize,
        mnemonic: String,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: bad immediate `{token}`")]
    BadImmediate { line: usize, token: String },
    #[error("line {line}: undefined label `@{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: label offset {offset} does not fit in a PUSH2")]
    LabelOutOfRange { line: usize, offset: usize },
    #[error("line {line}: `{mnemonic}` takes no operand")]
    UnexpectedOperand { line: usize, mnemonic: String },
    #[error("line {line}: `{mnemonic}` requires an immediate operand")]
    MissingImmediate { line: usize, mnemonic: String },
}

enum Item {
    Op { line: usize, opcode: u8, immediate: Vec<u8> },
    LabelRef { line: usize, label: String },
}

/// Assemble fixture source into bytecode.
pub fn assemble(source: &str) -> Result<Vec<u8>, AsmError> {
    let mut items = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut offset = 0usize;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_suffix(':') {
            let name = name.trim();
            if labels.insert(name.to_string(), offset).is_some() {
                return Err(AsmError::DuplicateLabel {
                    line: line_no,
                    label: name.to_string(),
                });
            }
            continue;
        }

        let mut parts = line.split_whitespace();
        let mnem = parts.next().expect("nonempty line");
        let operand = parts.next();
        let mnem_upper = mnem.to_ascii_uppercase();

        if mnem_upper == "PUSH" {
            // `PUSH @label` is the only PUSH without an explicit width.
            let operand = operand.ok_or_else(|| AsmError::MissingImmediate {
                line: line_no,
                mnemonic: mnem_upper.clone(),
            })?;
            let label = operand
                .strip_prefix('@')
                .ok_or_else(|| AsmError::UnknownMnemonic {
                    line: line_no,
                    token: mnem.to_string(),
                })?;
            items.push(Item::LabelRef {
                line: line_no,
                label: label.to_string(),
            });
            offset += 3; // PUSH2 + 2 bytes
            continue;
        }

        let opcode =
            opcode::from_mnemonic(&mnem_upper).ok_or_else(|| AsmError::UnknownMnemonic {
                line: line_no,
                token: mnem.to_string(),
            })?;
        let width = immediate_len(opcode);
        let immediate = match (width, operand) {
            (0, None) => Vec::new(),
            (0, Some(_)) => {
                return Err(AsmError::UnexpectedOperand {
                    line: line_no,
                    mnemonic: mnem_upper,
                })
            }
            (_, None) => {
                return Err(AsmError::MissingImmediate {
                    line: line_no,
                    mnemonic: mnem_upper,
                })
            }
            (_, Some(tok)) => {
                if let Some(label) = tok.strip_prefix('@') {
                    if width != 2 {
                        return Err(AsmError::ImmediateWidth {
                            line: line_no,
                            mnemonic: mnem_upper,
                            expected: width,
                            got: 2,
                        });
                    }
                    items.push(Item::LabelRef {
                        line: line_no,
                        label: label.to_string(),
                    });
                    offset += 3;
                    continue;
                }
                let digits = tok.strip_prefix("0x").unwrap_or(tok);
                let padded = if digits.len() % 2 == 1 {
                    format!("0{digits}")
                } else {
                    digits.to_string()
                };
                let bytes = hex::decode(&padded).map_err(|_| AsmError::BadImmediate {
                    line: line_no,
                    token: tok.to_string(),
                })?;
                if bytes.len() > width {
                    return Err(AsmError::ImmediateWidth {
                        line: line_no,
                        mnemonic: mnem_upper,
                        expected: width,
                        got: bytes.len(),
                    });
                }
                // Left-pad shorter immediates to the declared PUSH width.
                let mut imm = vec![0u8; width - bytes.len()];
                imm.extend_from_slice(&bytes);
                imm
            }
        };
        offset += 1 + width;
        items.push(Item::Op {
            line: line_no,
            opcode,
            immediate,
        });
    }

    let mut out = Vec::with_capacity(offset);
    for item in items {
        match item {
            Item::Op { opcode, immediate, .. } => {
                out.push(opcode);
                out.extend_from_slice(&immediate);
            }
            Item::LabelRef { line, label } => {
                let target = *labels.get(&label).ok_or(AsmError::UndefinedLabel {
                    line,
                    label: label.clone(),
                })?;
                if target > u16::MAX as usize {
                    return Err(AsmError::LabelOutOfRange { line, offset: target });
                }
                out.push(op::PUSH1 + 1); // PUSH2
                out.extend_from_slice(&(target as u16).to_be_bytes());
            }
        }
    }
    Ok(out)
}

/// Wrap an assembled constructor body and runtime image into a deployment
/// payload: `ctor ++ copy-return stub ++ runtime ++ args`.
///
/// The stub copies the runtime image out of the payload and returns it, so
/// executing the payload as creation code deploys exactly `runtime`.
pub fn build_deploy_payload(ctor: &[u8], runtime: &[u8], args: &[u8]) -> Vec<u8> {
    const STUB_LEN: usize = 15;
    let runtime_off = ctor.len() + STUB_LEN;
    assert!(runtime_off <= u16::MAX as usize && runtime.len() <= u16::MAX as usize);
    let mut payload = Vec::with_capacity(runtime_off + runtime.len() + args.len());
    payload.extend_from_slice(ctor);
    // PUSH2 len; PUSH2 off; PUSH1 0; CODECOPY; PUSH2 len; PUSH1 0; RETURN
    payload.push(0x61);
    payload.extend_from_slice(&(runtime.len() as u16).to_be_bytes());
    payload.push(0x61);
    payload.extend_from_slice(&(runtime_off as u16).to_be_bytes());
    payload.extend_from_slice(&[0x60, 0x00, 0x39]);
    payload.push(0x61);
    payload.extend_from_slice(&(runtime.len() as u16).to_be_bytes());
    payload.extend_from_slice(&[0x60, 0x00, 0xf3]);
    debug_assert_eq!(payload.len(), runtime_off);
    payload.extend_from_slice(runtime);
    payload.extend_from_slice(args);
    payload
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bytecode::disassemble;

    #[test]
    fn assemble_minimal_arithmetic() {
        let code = assemble("PUSH1 0x01\nPUSH1 0x02\nADD").unwrap();
        assert_eq!(code, vec![0x60, 0x01, 0x60, 0x02, 0x01]);
    }

    #[test]
    fn label_resolves_to_jumpdest_offset() {
        let src = "PUSH @end\nJUMP\nend:\nJUMPDEST\nSTOP\n";
        let code = assemble(src).unwrap();
        // PUSH2 0x0004 JUMP JUMPDEST STOP
        assert_eq!(code, vec![0x61, 0x00, 0x04, 0x56, 0x5b, 0x00]);
    }

    #[test]
    fn undefined_label_is_an_error() {
        let err = assemble("PUSH @nowhere\nSTOP").unwrap_err();
        assert!(matches!(err, AsmError::UndefinedLabel { line: 1, .. }));
    }

    #[test]
    fn unknown_mnemonic_reports_line() {
        let err = assemble("PUSH1 0x00\nBOGUS\n").unwrap_err();
        assert_eq!(
            err,
            AsmError::UnknownMnemonic {
                line: 2,
                token: "BOGUS".into()
            }
        );
    }

    #[test]
    fn oversized_immediate_rejected() {
        let err = assemble("PUSH1 0x0102").unwrap_err();
        assert!(matches!(err, AsmError::ImmediateWidth { line: 1, .. }));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let code = assemble("# header\n\nPUSH1 0x01 # trailing\nSTOP\n").unwrap();
        assert_eq!(code, vec![0x60, 0x01, 0x00]);
    }

    #[test]
    fn short_immediate_left_padded() {
        let code = assemble("PUSH4 0xff").unwrap();
        assert_eq!(code, vec![0x63, 0x00, 0x00, 0x00, 0xff]);
    }

    #[test]
    fn trailing_label_points_past_code() {
        let src = "PUSH @end\nPOP\nend:\n";
        let code = assemble(src).unwrap();
        assert_eq!(code, vec![0x61, 0x00, 0x04, 0x50]);
    }

    #[test]
    fn explicit_push2_label_ref_allowed() {
        let src = "PUSH2 @end\nJUMP\nend:\nJUMPDEST\nSTOP\n";
        let code = assemble(src).unwrap();
        assert_eq!(code, vec![0x61, 0x00, 0x04, 0x56, 0x5b, 0x00]);
    }

    #[test]
    fn round_trip_through_disassembler() {
        let src = "PUSH1 0x80\nPUSH1 0x40\nMSTORE\nCALLDATASIZE\nISZERO\nPUSH @halt\nJUMPI\nPUSH1 0x00\nDUP1\nREVERT\nhalt:\nJUMPDEST\nSTOP\n";
        let code = assemble(src).unwrap();
        let stream = disassemble(&code);
        let names: Vec<String> = stream.instructions.iter().map(|i| i.name()).collect();
        assert_eq!(
            names,
            [
                "PUSH1", "PUSH1", "MSTORE", "CALLDATASIZE", "ISZERO", "PUSH2", "JUMPI", "PUSH1",
                "DUP1", "REVERT", "JUMPDEST", "STOP"
            ]
        );
        assert!(stream.instructions.iter().all(|i| !i.truncated));
    }

    #[test]
    fn deploy_payload_layout() {
        let ctor = assemble("PUSH1 0x2a\nPUSH1 0x00\nSSTORE").unwrap();
        let runtime = assemble("PUSH1 0x00\nSLOAD\nPUSH1 0x00\nMSTORE\nPUSH1 0x20\nPUSH1 0x00\nRETURN").unwrap();
        let args = [0x07u8; 32];
        let payload = build_deploy_payload(&ctor, &runtime, &args);
        assert_eq!(&payload[..ctor.len()], ctor.as_slice());
        let rt_start = ctor.len() + 15;
        assert_eq!(&payload[rt_start..rt_start + runtime.len()], runtime.as_slice());
        assert_eq!(&payload[rt_start + runtime.len()..], &args);
    }
}
