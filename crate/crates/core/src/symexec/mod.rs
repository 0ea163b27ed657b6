//! Symbolic execution of runtime bytecode.
//!
//! `explore` enumerates paths through one public function: calldata word 0
//! is pinned to the entry selector, everything else (remaining calldata,
//! caller, storage) is an unconstrained input. There is no constraint
//! solver — at a JUMPI whose condition does not fold to a constant both
//! branches are explored and the condition is recorded in the path
//! condition. External calls are never followed: they produce a fresh
//! unconstrained result plus an unconstrained success flag.

mod term;

pub use term::{BinOpKind, SymValue, Term, UnOpKind};

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::bytecode::{disassemble, opcode::op, Instruction, InstructionStream, Selector};
use crate::U256;

/// Exploration bounds. Exploration always terminates under them; paths cut
/// short are retained with a `BudgetExceeded` terminator so downstream
/// analysis can stay conservative.
#[derive(Debug, Clone)]
pub struct ExploreConfig {
    /// Maximum number of completed paths per entry point.
    pub max_paths: usize,
    /// Maximum revisits of one jump target within a single path.
    pub loop_bound: u32,
    /// Maximum instructions recorded per path.
    pub max_trace: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            max_paths: 512,
            loop_bound: 3,
            max_trace: 50_000,
        }
    }
}

/// Which entry the exploration drives: a dispatcher selector or the
/// fallback (calldata word 0 left unconstrained).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryPoint {
    Selector(Selector),
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terminator {
    Stop,
    Return,
    Revert,
    Invalid,
    SelfDestruct,
    BudgetExceeded,
    UnsupportedOp,
}

impl Terminator {
    /// Normal termination per the throw-on-failure rule: STOP or RETURN.
    pub fn is_normal(self) -> bool {
        matches!(self, Terminator::Stop | Terminator::Return)
    }

    pub fn is_revert_class(self) -> bool {
        matches!(self, Terminator::Revert | Terminator::Invalid)
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, Terminator::BudgetExceeded | Terminator::UnsupportedOp)
    }
}

/// Machine snapshot recorded after each instruction.
#[derive(Debug, Clone)]
pub struct SymState {
    pub pc: usize,
    pub stack: Vec<SymValue>,
    pub memory: MemState,
    /// Every SLOAD executed so far: (key, instruction offset).
    pub storage_reads: Rc<Vec<(SymValue, usize)>>,
    /// Every SSTORE executed so far: (key, value, instruction offset).
    pub storage_writes: Rc<Vec<(SymValue, SymValue, usize)>>,
    /// JUMPI conditions assumed along the path: (condition, assumed truth).
    pub path_condition: Rc<Vec<(SymValue, bool)>>,
}

/// Symbolic memory: a write-list with structural-match reads.
#[derive(Debug, Clone, Default)]
pub struct MemState {
    writes: Rc<Vec<MemWrite>>,
    /// Set when an unmodelled bulk write may have touched anything.
    havocked: bool,
}

#[derive(Debug, Clone)]
struct MemWrite {
    offset: SymValue,
    value: SymValue,
    width: WriteWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WriteWidth {
    Word,
    Byte,
}

/// One enumerated execution path.
#[derive(Debug, Clone)]
pub struct Path {
    pub id: usize,
    pub entry: EntryPoint,
    /// Per-instruction trace: the state is the snapshot *after* executing
    /// the instruction.
    pub trace: Vec<(Instruction, SymState)>,
    pub terminator: Terminator,
}

impl Path {
    /// Final machine state of the path.
    pub fn last_state(&self) -> Option<&SymState> {
        self.trace.last().map(|(_, s)| s)
    }

    pub fn storage_reads(&self) -> &[(SymValue, usize)] {
        self.last_state().map_or(&[], |s| &s.storage_reads[..])
    }

    pub fn storage_writes(&self) -> &[(SymValue, SymValue, usize)] {
        self.last_state().map_or(&[], |s| &s.storage_writes[..])
    }

    /// Offsets of executed instructions, for concrete-replay matching.
    pub fn pc_sequence(&self) -> Vec<usize> {
        self.trace.iter().map(|(ins, _)| ins.offset).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error("runtime bytecode is empty")]
    EmptyRuntime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchEval {
    TakenOnly,
    NotTakenOnly,
    Both,
}

/// Feasibility policy for a JUMPI condition: concrete conditions imply one
/// branch, anything symbolic explores both.
pub fn eval_branch(condition: &SymValue) -> BranchEval {
    match condition.as_concrete() {
        Some(v) if v.is_zero() => BranchEval::NotTakenOnly,
        Some(_) => BranchEval::TakenOnly,
        None => BranchEval::Both,
    }
}

/// Hash a memory slice symbolically; see [`SymValue::sha3`] for the
/// concrete-collapse and identity rules.
pub fn sha3_term(len: SymValue, words: Vec<SymValue>) -> SymValue {
    SymValue::sha3(len, words)
}

struct Machine {
    pc: usize,
    stack: Vec<SymValue>,
    memory: MemState,
    storage_reads: Rc<Vec<(SymValue, usize)>>,
    storage_writes: Rc<Vec<(SymValue, SymValue, usize)>>,
    path_condition: Rc<Vec<(SymValue, bool)>>,
    /// Store-forwarding overlay for SLOAD after SSTORE along this path.
    storage_overlay: Vec<(SymValue, SymValue)>,
    trace: Vec<(Instruction, SymState)>,
    visits: HashMap<usize, u32>,
    fresh: u32,
}

impl Machine {
    fn snapshot(&self, pc: usize) -> SymState {
        SymState {
            pc,
            stack: self.stack.clone(),
            memory: self.memory.clone(),
            storage_reads: self.storage_reads.clone(),
            storage_writes: self.storage_writes.clone(),
            path_condition: self.path_condition.clone(),
        }
    }

    fn fork(&self) -> Machine {
        Machine {
            pc: self.pc,
            stack: self.stack.clone(),
            memory: self.memory.clone(),
            storage_reads: self.storage_reads.clone(),
            storage_writes: self.storage_writes.clone(),
            path_condition: self.path_condition.clone(),
            storage_overlay: self.storage_overlay.clone(),
            trace: self.trace.clone(),
            visits: self.visits.clone(),
            fresh: self.fresh,
        }
    }

    fn fresh_input(&mut self, tag: &str) -> SymValue {
        let n = self.fresh;
        self.fresh += 1;
        SymValue::input(format!("{tag}_{n}"))
    }

    fn mem_store(&mut self, offset: SymValue, value: SymValue, width: WriteWidth) {
        Rc::make_mut(&mut self.memory.writes).push(MemWrite {
            offset,
            value,
            width,
        });
    }

    /// Backward structural scan; a read with no matching write is a fresh
    /// input, as is any read that may overlap an unprovably-disjoint write.
    fn mem_load(&mut self, offset: &SymValue) -> SymValue {
        for write in self.memory.writes.iter().rev() {
            if write.width == WriteWidth::Word && &write.offset == offset {
                return write.value.clone();
            }
            match (write.offset.as_concrete(), offset.as_concrete()) {
                (Some(w), Some(r)) => {
                    let w_len = match write.width {
                        WriteWidth::Word => 32u64,
                        WriteWidth::Byte => 1,
                    };
                    let disjoint = w + U256::from(w_len) <= r || r + U256::from(32) <= w;
                    if disjoint {
                        continue;
                    }
                    break;
                }
                _ => break,
            }
        }
        self.fresh_input("mem")
    }

    fn havoc_memory(&mut self) {
        self.memory.writes = Rc::new(Vec::new());
        self.memory.havocked = true;
    }

    fn record_read(&mut self, key: SymValue, offset: usize) {
        Rc::make_mut(&mut self.storage_reads).push((key, offset));
    }

    fn record_write(&mut self, key: SymValue, value: SymValue, offset: usize) {
        Rc::make_mut(&mut self.storage_writes).push((key.clone(), value.clone(), offset));
        self.storage_overlay.push((key, value));
    }

    fn sload(&mut self, key: SymValue, offset: usize) -> SymValue {
        self.record_read(key.clone(), offset);
        for (k, v) in self.storage_overlay.iter().rev() {
            if k == &key {
                return v.clone();
            }
        }
        SymValue::storage_read(key)
    }

    fn assume(&mut self, condition: SymValue, truth: bool) {
        Rc::make_mut(&mut self.path_condition).push((condition, truth));
    }
}

enum StepResult {
    Continue,
    Terminated(Terminator),
    Fork {
        taken_pc: usize,
        condition: SymValue,
    },
}

/// Enumerate paths through `runtime` for one entry point.
pub fn explore(
    runtime: &[u8],
    entry: &EntryPoint,
    cfg: &ExploreConfig,
) -> Result<Vec<Path>, ExploreError> {
    if runtime.is_empty() {
        return Err(ExploreError::EmptyRuntime);
    }
    let stream = disassemble(runtime);
    let mut paths: Vec<Path> = Vec::new();
    let mut work: Vec<Machine> = vec![Machine {
        pc: 0,
        stack: Vec::new(),
        memory: MemState::default(),
        storage_reads: Rc::new(Vec::new()),
        storage_writes: Rc::new(Vec::new()),
        path_condition: Rc::new(Vec::new()),
        storage_overlay: Vec::new(),
        trace: Vec::new(),
        visits: HashMap::new(),
        fresh: 0,
    }];

    while let Some(mut machine) = work.pop() {
        let terminator = if paths.len() >= cfg.max_paths {
            // Path budget exhausted: close out remaining work conservatively.
            Terminator::BudgetExceeded
        } else {
            run_to_terminator(&mut machine, &stream, entry, cfg, &mut work)
        };
        paths.push(Path {
            id: paths.len(),
            entry: entry.clone(),
            trace: machine.trace,
            terminator,
        });
    }
    Ok(paths)
}

fn run_to_terminator(
    m: &mut Machine,
    stream: &InstructionStream,
    entry: &EntryPoint,
    cfg: &ExploreConfig,
    work: &mut Vec<Machine>,
) -> Terminator {
    loop {
        if m.trace.len() >= cfg.max_trace {
            return Terminator::BudgetExceeded;
        }
        let Some(ins) = stream.at(m.pc) else {
            // Past the end of code (implicit STOP) or into a push immediate
            // (cannot happen from valid jumps; treat as invalid).
            let stop = m.pc >= stream.code.len();
            let terminator = if stop { Terminator::Stop } else { Terminator::Invalid };
            return terminator;
        };
        let ins = ins.clone();
        let pc = m.pc;
        let result = step(m, &ins, stream, entry, cfg);
        match result {
            Ok(StepResult::Continue) => {
                m.trace.push((ins, m.snapshot(pc)));
            }
            Ok(StepResult::Terminated(t)) => {
                m.trace.push((ins, m.snapshot(pc)));
                return t;
            }
            Ok(StepResult::Fork { taken_pc, condition }) => {
                m.trace.push((ins.clone(), m.snapshot(pc)));
                // Not-taken branch goes to the worklist.
                let mut other = m.fork();
                other.pc = ins.offset + ins.size();
                other.assume(condition.clone(), false);
                // Re-snapshot so the forked trace carries its own assumption.
                if let Some(last) = other.trace.last_mut() {
                    last.1 = other.snapshot(pc);
                }
                work.push(other);
                // Taken branch continues here.
                m.assume(condition, true);
                if let Some(last) = m.trace.last_mut() {
                    last.1 = m.snapshot(pc);
                }
                let visits = m.visits.entry(taken_pc).or_insert(0);
                *visits += 1;
                if *visits > cfg.loop_bound {
                    return Terminator::BudgetExceeded;
                }
                if !stream.jumpdests.contains(&taken_pc) {
                    return Terminator::Invalid;
                }
                m.pc = taken_pc;
            }
            Err(t) => {
                m.trace.push((ins, m.snapshot(pc)));
                return t;
            }
        }
    }
}

fn step(
    m: &mut Machine,
    ins: &Instruction,
    stream: &InstructionStream,
    entry: &EntryPoint,
) -> Result<StepResult, Terminator> {
    use op::*;
    let opcode = ins.opcode;
    let next = ins.offset + ins.size();

    macro_rules! pop {
        () => {
            m.stack.pop().ok_or(Terminator::Invalid)?
        };
    }
    macro_rules! bin {
        ($kind:expr) => {{
            let a = pop!();
            let b = pop!();
            m.stack.push(SymValue::binop($kind, a, b));
        }};
    }

    match opcode {
        STOP => return Ok(StepResult::Terminated(Terminator::Stop)),
        ADD => bin!(BinOpKind::Add),
        MUL => bin!(BinOpKind::Mul),
        SUB => bin!(BinOpKind::Sub),
        DIV => bin!(BinOpKind::Div),
        SDIV => bin!(BinOpKind::SDiv),
        MOD => bin!(BinOpKind::Mod),
        SMOD => bin!(BinOpKind::SMod),
        ADDMOD | MULMOD => {
            let a = pop!();
            let b = pop!();
            let n = pop!();
            let value = match (a.as_concrete(), b.as_concrete(), n.as_concrete()) {
                (Some(x), Some(y), Some(z)) => SymValue::concrete(if opcode == ADDMOD {
                    crate::words::addmod(x, y, z)
                } else {
                    crate::words::mulmod(x, y, z)
                }),
                _ => m.fresh_input("modarith"),
            };
            m.stack.push(value);
        }
        EXP => bin!(BinOpKind::Exp),
        SIGNEXTEND => bin!(BinOpKind::SignExtend),
        LT => bin!(BinOpKind::Lt),
        GT => bin!(BinOpKind::Gt),
        SLT => bin!(BinOpKind::Slt),
        SGT => bin!(BinOpKind::Sgt),
        EQ => bin!(BinOpKind::Eq),
        ISZERO => {
            let a = pop!();
            m.stack.push(SymValue::unop(UnOpKind::IsZero, a));
        }
        AND => bin!(BinOpKind::And),
        OR => bin!(BinOpKind::Or),
        XOR => bin!(BinOpKind::Xor),
        NOT => {
            let a = pop!();
            m.stack.push(SymValue::unop(UnOpKind::Not, a));
        }
        BYTE => bin!(BinOpKind::Byte),
        SHL => bin!(BinOpKind::Shl),
        SHR => bin!(BinOpKind::Shr),
        SAR => bin!(BinOpKind::Sar),
        SHA3 => {
            let offset = pop!();
            let len = pop!();
            let value = match (offset.as_concrete(), len.as_concrete()) {
                (Some(off), Some(n)) if n <= U256::from(4096u32) => {
                    let n_words = n.as_usize().div_ceil(32);
                    let mut word_terms = Vec::with_capacity(n_words);
                    for i in 0..n_words {
                        let at = SymValue::concrete(off + U256::from(32 * i));
                        word_terms.push(m.mem_load(&at));
                    }
                    SymValue::sha3(len, word_terms)
                }
                _ => {
                    let salt = m.fresh_input("sha3_arg");
                    SymValue::sha3(len, vec![salt])
                }
            };
            m.stack.push(value);
        }
        ADDRESS => m.stack.push(SymValue::input("self_address")),
        CALLER => m.stack.push(SymValue::input("caller")),
        CALLVALUE => m.stack.push(SymValue::input("callvalue")),
        ORIGIN => m.stack.push(SymValue::input("origin")),
        CALLDATASIZE => m.stack.push(SymValue::input("calldatasize")),
        CALLDATALOAD => {
            let offset = pop!();
            let value = match offset.as_concrete() {
                Some(off) if off.is_zero() => match entry {
                    EntryPoint::Selector(sel) => {
                        SymValue::concrete(U256::from(sel.as_u32()) << 224)
                    }
                    EntryPoint::Fallback => SymValue::input("calldata_0"),
                },
                Some(off) if off <= U256::from(1 << 20) => {
                    SymValue::input(format!("calldata_{}", off.as_usize()))
                }
                _ => m.fresh_input("calldata_far"),
            };
            m.stack.push(value);
        }
        CALLDATACOPY => {
            let dest = pop!();
            let src = pop!();
            let len = pop!();
            copy_into_memory(m, dest, src, len, "calldata");
        }
        CODESIZE => m.stack.push(SymValue::concrete(U256::from(stream.code.len()))),
        CODECOPY => {
            let dest = pop!();
            let src = pop!();
            let len = pop!();
            match (dest.as_concrete(), src.as_concrete(), len.as_concrete()) {
                (Some(d), Some(s), Some(n)) if n <= U256::from(1 << 16) => {
                    let n_words = n.as_usize().div_ceil(32);
                    for i in 0..n_words {
                        let word =
                            crate::words::read_word(&stream.code, s.as_usize() + 32 * i);
                        m.mem_store(
                            SymValue::concrete(d + U256::from(32 * i)),
                            SymValue::concrete(word),
                            WriteWidth::Word,
                        );
                    }
                }
                _ => m.havoc_memory(),
            }
        }
        RETURNDATASIZE => {
            let value = m.fresh_input("returndatasize");
            m.stack.push(value);
        }
        RETURNDATACOPY => {
            let dest = pop!();
            let src = pop!();
            let len = pop!();
            let _ = src;
            copy_into_memory(m, dest, SymValue::concrete(U256::zero()), len, "returndata");
        }
        GAS => {
            let value = m.fresh_input("gas");
            m.stack.push(value);
        }
        BALANCE | EXTCODESIZE => {
            let _addr = pop!();
            let value = m.fresh_input("env");
            m.stack.push(value);
        }
        POP => {
            pop!();
        }
        MLOAD => {
            let offset = pop!();
            let value = m.mem_load(&offset);
            m.stack.push(value);
        }
        MSTORE => {
            let offset = pop!();
            let value = pop!();
            m.mem_store(offset, value, WriteWidth::Word);
        }
        MSTORE8 => {
            let offset = pop!();
            let value = pop!();
            m.mem_store(offset, value, WriteWidth::Byte);
        }
        SLOAD => {
            let key = pop!();
            let value = m.sload(key, ins.offset);
            m.stack.push(value);
        }
        SSTORE => {
            let key = pop!();
            let value = pop!();
            m.record_write(key, value, ins.offset);
        }
        JUMP => {
            let dest = pop!();
            let Some(d) = dest.as_concrete() else {
                return Err(Terminator::UnsupportedOp);
            };
            if d > U256::from(usize::MAX) {
                return Err(Terminator::Invalid);
            }
            let d = d.as_usize();
            let visits = m.visits.entry(d).or_insert(0);
            *visits += 1;
            if *visits > u32::MAX - 1 {
                return Err(Terminator::BudgetExceeded);
            }
            if !stream.jumpdests.contains(&d) {
                return Err(Terminator::Invalid);
            }
            m.pc = d;
            // Loop bound applies to unconditional jumps too.
            return Ok(StepResult::Continue);
        }
        JUMPI => {
            let dest = pop!();
            let condition = pop!();
            match eval_branch(&condition) {
                BranchEval::NotTakenOnly => {}
                BranchEval::TakenOnly => {
                    let Some(d) = dest.as_concrete() else {
                        return Err(Terminator::UnsupportedOp);
                    };
                    if d > U256::from(usize::MAX) || !stream.jumpdests.contains(&d.as_usize()) {
                        return Err(Terminator::Invalid);
                    }
                    m.pc = d.as_usize();
                    return Ok(StepResult::Continue);
                }
                BranchEval::Both => {
                    let Some(d) = dest.as_concrete() else {
                        return Err(Terminator::UnsupportedOp);
                    };
                    if d > U256::from(usize::MAX) {
                        return Err(Terminator::Invalid);
                    }
                    return Ok(StepResult::Fork {
                        taken_pc: d.as_usize(),
                        condition,
                    });
                }
            }
        }
        PC => m.stack.push(SymValue::concrete(U256::from(ins.offset))),
        MSIZE => {
            let value = m.fresh_input("msize");
            m.stack.push(value);
        }
        JUMPDEST => {}
        _ if (PUSH1..=PUSH32).contains(&opcode) => {
            let imm = ins.immediate.as_deref().unwrap_or(&[]);
            m.stack.push(SymValue::concrete(U256::from_big_endian(imm)));
        }
        _ if (DUP1..=DUP16).contains(&opcode) => {
            let depth = (opcode - DUP1) as usize;
            if depth >= m.stack.len() {
                return Err(Terminator::Invalid);
            }
            let value = m.stack[m.stack.len() - 1 - depth].clone();
            m.stack.push(value);
        }
        _ if (SWAP1..=SWAP16).contains(&opcode) => {
            let depth = (opcode - SWAP1) as usize + 1;
            let len = m.stack.len();
            if depth >= len {
                return Err(Terminator::Invalid);
            }
            m.stack.swap(len - 1, len - 1 - depth);
        }
        _ if (LOG0..=LOG4).contains(&opcode) => {
            let n = 2 + (opcode - LOG0) as usize;
            for _ in 0..n {
                pop!();
            }
        }
        CREATE => {
            for _ in 0..3 {
                pop!();
            }
            let value = m.fresh_input("create");
            m.stack.push(value);
        }
        CALL | CALLCODE => {
            call_policy(m, 7)?;
        }
        DELEGATECALL | STATICCALL => {
            call_policy(m, 6)?;
        }
        RETURN => {
            pop!();
            pop!();
            return Ok(StepResult::Terminated(Terminator::Return));
        }
        REVERT => {
            pop!();
            pop!();
            return Ok(StepResult::Terminated(Terminator::Revert));
        }
        INVALID => return Ok(StepResult::Terminated(Terminator::Invalid)),
        SELFDESTRUCT => {
            pop!();
            return Ok(StepResult::Terminated(Terminator::SelfDestruct));
        }
        _ => {
            // Known-but-unmodelled (block context etc.) and unknown bytes.
            let known = crate::bytecode::opcode::is_known(opcode);
            return Err(if known {
                Terminator::UnsupportedOp
            } else {
                Terminator::Invalid
            });
        }
    }
    m.pc = next;
    Ok(StepResult::Continue)
}

/// External calls are never followed: args are consumed, the declared
/// output region is filled with fresh inputs, and an unconstrained success
/// flag is pushed.
fn call_policy(m: &mut Machine, arity: usize) -> Result<(), Terminator> {
    let mut args = Vec::with_capacity(arity);
    for _ in 0..arity {
        args.push(m.stack.pop().ok_or(Terminator::Invalid)?);
    }
    let out_off = args[arity - 2].clone();
    let out_len = args[arity - 1].clone();
    match (out_off.as_concrete(), out_len.as_concrete()) {
        (Some(off), Some(n)) if n <= U256::from(4096u32) => {
            let n_words = n.as_usize().div_ceil(32);
            for i in 0..n_words {
                let value = m.fresh_input("call_ret");
                m.mem_store(
                    SymValue::concrete(off + U256::from(32 * i)),
                    value,
                    WriteWidth::Word,
                );
            }
        }
        _ => m.havoc_memory(),
    }
    let flag = m.fresh_input("call_success");
    m.stack.push(flag);
    Ok(())
}

fn copy_into_memory(m: &mut Machine, dest: SymValue, src: SymValue, len: SymValue, tag: &str) {
    match (dest.as_concrete(), src.as_concrete(), len.as_concrete()) {
        (Some(d), Some(s), Some(n)) if n <= U256::from(4096u32) => {
            let n_words = n.as_usize().div_ceil(32);
            for i in 0..n_words {
                let value = if tag == "calldata" {
                    // Align with CALLDATALOAD naming so repeated reads of the
                    // same word agree.
                    SymValue::input(format!("calldata_{}", s.as_usize() + 32 * i))
                } else {
                    m.fresh_input(tag)
                };
                m.mem_store(
                    SymValue::concrete(d + U256::from(32 * i)),
                    value,
                    WriteWidth::Word,
                );
            }
        }
        _ => m.havoc_memory(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bytecode::asm::assemble;

    fn transfer_selector() -> Selector {
        Selector::from_signature("transfer(address,uint256)")
    }

    /// Straight-line body behind a dispatcher: exactly one Return path.
    #[test]
    fn straight_line_single_path() {
        let src = "\
PUSH1 0x00
CALLDATALOAD
PUSH1 0xe0
SHR
PUSH4 0xa9059cbb
EQ
PUSH @body
JUMPI
PUSH1 0x00
DUP1
REVERT
body:
JUMPDEST
PUSH1 0x00
PUSH1 0x00
RETURN
";
        let code = assemble(src).unwrap();
        let paths = explore(
            &code,
            &EntryPoint::Selector(transfer_selector()),
            &ExploreConfig::default(),
        )
        .unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].terminator, Terminator::Return);
    }

    #[test]
    fn wrong_selector_takes_fallback() {
        let src = "\
PUSH1 0x00
CALLDATALOAD
PUSH1 0xe0
SHR
PUSH4 0xdeadbeef
EQ
PUSH @body
JUMPI
PUSH1 0x00
DUP1
REVERT
body:
JUMPDEST
STOP
";
        let code = assemble(src).unwrap();
        let paths = explore(
            &code,
            &EntryPoint::Selector(transfer_selector()),
            &ExploreConfig::default(),
        )
        .unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].terminator, Terminator::Revert);
    }

    #[test]
    fn symbolic_branch_forks_both_ways() {
        // if (calldata_4 != 0) STOP else REVERT — symbolic condition.
        let src = "\
PUSH1 0x04
CALLDATALOAD
PUSH @yes
JUMPI
PUSH1 0x00
DUP1
REVERT
yes:
JUMPDEST
STOP
";
        let code = assemble(src).unwrap();
        let paths = explore(&code, &EntryPoint::Fallback, &ExploreConfig::default()).unwrap();
        assert_eq!(paths.len(), 2);
        let mut terms: Vec<Terminator> = paths.iter().map(|p| p.terminator).collect();
        terms.sort_by_key(|t| format!("{t:?}"));
        assert!(terms.contains(&Terminator::Stop));
        assert!(terms.contains(&Terminator::Revert));
        for p in &paths {
            let state = p.last_state().unwrap();
            assert_eq!(state.path_condition.len(), 1);
        }
    }

    #[test]
    fn eval_branch_policy() {
        assert_eq!(
            eval_branch(&SymValue::concrete_u64(1)),
            BranchEval::TakenOnly
        );
        assert_eq!(
            eval_branch(&SymValue::concrete_u64(0)),
            BranchEval::NotTakenOnly
        );
        assert_eq!(eval_branch(&SymValue::input("calldata_1")), BranchEval::Both);
        // Constant folding happens before the policy sees the term.
        let folded = SymValue::binop(
            BinOpKind::Lt,
            SymValue::concrete_u64(3),
            SymValue::concrete_u64(5),
        );
        assert_eq!(eval_branch(&folded), BranchEval::TakenOnly);
    }

    #[test]
    fn mapping_key_reads_and_writes_align() {
        // balances[caller] -= v; the SLOAD key and SSTORE key must be the
        // same term.
        let src = "\
caller_key:
CALLER
PUSH1 0x00
MSTORE
PUSH1 0x01
PUSH1 0x20
MSTORE
PUSH1 0x40
PUSH1 0x00
SHA3
DUP1
SLOAD
PUSH1 0x01
SWAP1
SUB
SWAP1
SSTORE
STOP
";
        let code = assemble(src).unwrap();
        let paths = explore(&code, &EntryPoint::Fallback, &ExploreConfig::default()).unwrap();
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        let reads = p.storage_reads();
        let writes = p.storage_writes();
        assert_eq!(reads.len(), 1);
        assert_eq!(writes.len(), 1);
        assert_eq!(reads[0].0, writes[0].0);
    }

    #[test]
    fn loop_bound_cuts_infinite_loop() {
        let src = "\
top:
JUMPDEST
PUSH @top
JUMP
";
        let code = assemble(src).unwrap();
        let cfg = ExploreConfig {
            loop_bound: 3,
            ..ExploreConfig::default()
        };
        let paths = explore(&code, &EntryPoint::Fallback, &cfg).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].terminator, Terminator::BudgetExceeded);
    }

    #[test]
    fn unfollowed_call_yields_fresh_success_flag() {
        let src = "\
PUSH1 0x20
PUSH1 0x00
PUSH1 0x00
PUSH1 0x00
PUSH1 0x00
PUSH1 0xee
GAS
CALL
PUSH @ok
JUMPI
PUSH1 0x00
DUP1
REVERT
ok:
JUMPDEST
STOP
";
        let code = assemble(src).unwrap();
        let paths = explore(&code, &EntryPoint::Fallback, &ExploreConfig::default()).unwrap();
        assert_eq!(paths.len(), 2, "success flag is unconstrained: two paths");
    }

    #[test]
    fn empty_runtime_is_an_error() {
        assert_eq!(
            explore(&[], &EntryPoint::Fallback, &ExploreConfig::default()).unwrap_err(),
            ExploreError::EmptyRuntime
        );
    }

    #[test]
    fn sload_sstore_snapshot_completeness() {
        let src = "\
PUSH1 0x05
SLOAD
PUSH1 0x06
SSTORE
PUSH1 0x07
SLOAD
POP
STOP
";
        let code = assemble(src).unwrap();
        let paths = explore(&code, &EntryPoint::Fallback, &ExploreConfig::default()).unwrap();
        let p = &paths[0];
        let sloads: Vec<usize> = p
            .trace
            .iter()
            .filter(|(i, _)| i.opcode == op::SLOAD)
            .map(|(i, _)| i.offset)
            .collect();
        let read_offsets: Vec<usize> = p.storage_reads().iter().map(|(_, o)| *o).collect();
        assert_eq!(sloads, read_offsets);
        let sstores: Vec<usize> = p
            .trace
            .iter()
            .filter(|(i, _)| i.opcode == op::SSTORE)
            .map(|(i, _)| i.offset)
            .collect();
        let write_offsets: Vec<usize> = p.storage_writes().iter().map(|(_, _, o)| *o).collect();
        assert_eq!(sstores, write_offsets);
    }
}
