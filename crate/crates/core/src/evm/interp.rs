//! The bytecode interpreter: frame execution, nested calls, revert scoping.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::bytecode::{disassemble, keccak256, opcode::op};
use crate::words;
use crate::{Address, U256};

use super::native::{NativeEnv, NativeOutcome};
use super::{Account, HaltReason, Log, Receipt, Transaction, WorldState, NATIVE_CODE_MARKER};

/// `(depth, code address, pc)` of every executed instruction.
pub type TraceStep = (u32, Address, usize);

const MAX_STACK: usize = 1024;
const MAX_DEPTH: u32 = 1024;
/// Per-frame memory cap; exceeding it is an exceptional halt. Stands in for
/// the quadratic gas cost that bounds memory on a real chain.
const MEM_LIMIT: usize = 1 << 24;

pub(crate) struct TxCtx<'a> {
    pub world: &'a mut WorldState,
    pub steps: u64,
    pub logs: Vec<Log>,
    pub origin: Address,
    pub trace: Option<&'a mut Vec<TraceStep>>,
}

#[derive(Debug)]
pub(crate) struct Outcome {
    pub success: bool,
    pub returndata: Vec<u8>,
    pub halt: HaltReason,
}

impl Outcome {
    fn fail(halt: HaltReason) -> Self {
        Outcome {
            success: false,
            returndata: Vec::new(),
            halt,
        }
    }
}

pub(crate) struct MessageParams {
    pub caller: Address,
    pub address: Address,
    pub code_addr: Address,
    pub value: U256,
    pub transfer: Option<(Address, Address, U256)>,
    pub calldata: Vec<u8>,
    pub depth: u32,
    pub is_static: bool,
}

pub(crate) fn run_transaction(
    state: &mut WorldState,
    tx: &Transaction,
    trace: Option<&mut Vec<TraceStep>>,
) -> Receipt {
    let mut ctx = TxCtx {
        world: state,
        steps: tx.step_budget,
        logs: Vec::new(),
        origin: tx.from,
        trace,
    };
    let outcome = call_frame(
        &mut ctx,
        MessageParams {
            caller: tx.from,
            address: tx.to,
            code_addr: tx.to,
            value: tx.value,
            transfer: Some((tx.from, tx.to, tx.value)),
            calldata: tx.data.clone(),
            depth: 0,
            is_static: false,
        },
    );
    let steps_used = tx.step_budget - ctx.steps;
    let logs = if outcome.success { ctx.logs } else { Vec::new() };
    Receipt {
        status: outcome.success as u8,
        returndata: outcome.returndata,
        logs,
        steps_used,
        halt: outcome.halt,
    }
}

pub(crate) fn run_deploy(
    state: &mut WorldState,
    sender: Address,
    payload: &[u8],
    step_budget: u64,
) -> (Address, Receipt) {
    let mut ctx = TxCtx {
        world: state,
        steps: step_budget,
        logs: Vec::new(),
        origin: sender,
        trace: None,
    };
    let (created, outcome) = create_frame(&mut ctx, sender, U256::zero(), payload.to_vec(), 0, false);
    let steps_used = step_budget - ctx.steps;
    let logs = if outcome.success { ctx.logs } else { Vec::new() };
    let receipt = Receipt {
        status: outcome.success as u8,
        returndata: outcome.returndata,
        logs,
        steps_used,
        halt: outcome.halt,
    };
    (created.unwrap_or_default(), receipt)
}

/// Execute a message call with full revert scoping: the world, the log
/// journal, and any balance movement roll back together on failure.
pub(crate) fn call_frame(ctx: &mut TxCtx<'_>, p: MessageParams) -> Outcome {
    if p.depth > MAX_DEPTH {
        return Outcome::fail(HaltReason::Invalid);
    }
    let snapshot = ctx.world.clone();
    let logs_mark = ctx.logs.len();

    if let Some((from, to, value)) = p.transfer {
        if !value.is_zero() {
            if ctx.world.balance(&from) < value {
                return Outcome::fail(HaltReason::Invalid);
            }
            ctx.world.account_mut(from).balance -= value;
            ctx.world.account_mut(to).balance += value;
        }
    }

    let outcome = if let Some(handler) = ctx.world.natives.get(&p.code_addr).cloned() {
        if ctx.steps == 0 {
            Outcome::fail(HaltReason::OutOfSteps)
        } else {
            ctx.steps -= 1;
            let mut env = NativeEnv::new(ctx, &p);
            let NativeOutcome { success, returndata } = handler.call(&mut env);
            let violated = env.static_violation();
            if success && !violated {
                Outcome {
                    success: true,
                    returndata,
                    halt: HaltReason::Return,
                }
            } else {
                Outcome {
                    success: false,
                    returndata,
                    halt: if violated { HaltReason::Invalid } else { HaltReason::Revert },
                }
            }
        }
    } else {
        let code = ctx.world.code(&p.code_addr);
        if code.is_empty() {
            // Call to a code-less account: succeeds with empty returndata.
            Outcome {
                success: true,
                returndata: Vec::new(),
                halt: HaltReason::Stop,
            }
        } else {
            exec_code(ctx, code, &p)
        }
    };

    if !outcome.success {
        *ctx.world = snapshot;
        ctx.logs.truncate(logs_mark);
    }
    outcome
}

/// Run init code and, on success, install the returned bytes as the code of
/// a freshly derived account.
pub(crate) fn create_frame(
    ctx: &mut TxCtx<'_>,
    creator: Address,
    value: U256,
    init_code: Vec<u8>,
    depth: u32,
    is_static: bool,
) -> (Option<Address>, Outcome) {
    if depth > MAX_DEPTH {
        return (None, Outcome::fail(HaltReason::Invalid));
    }
    let snapshot = ctx.world.clone();
    let logs_mark = ctx.logs.len();

    let nonce = ctx.world.nonce(&creator);
    ctx.world.nonces.insert(creator, nonce + 1);
    let child = super::derive_address(&creator, nonce);

    let occupied = ctx.world.is_native(&child)
        || ctx
            .world
            .account(&child)
            .is_some_and(|account| account.is_contract());
    if occupied {
        *ctx.world = snapshot;
        return (None, Outcome::fail(HaltReason::Invalid));
    }

    if !value.is_zero() {
        if ctx.world.balance(&creator) < value {
            *ctx.world = snapshot;
            return (None, Outcome::fail(HaltReason::Invalid));
        }
        ctx.world.account_mut(creator).balance -= value;
        ctx.world.account_mut(child).balance += value;
    } else {
        ctx.world.accounts.entry(child).or_insert_with(Account::default);
    }

    let params = MessageParams {
        caller: creator,
        address: child,
        code_addr: child,
        value,
        transfer: None,
        calldata: Vec::new(),
        depth,
        is_static,
    };
    let outcome = exec_code(ctx, Arc::new(init_code), &params);

    if outcome.success {
        ctx.world.account_mut(child).code = Arc::new(outcome.returndata.clone());
        (Some(child), outcome)
    } else {
        *ctx.world = snapshot;
        ctx.logs.truncate(logs_mark);
        (None, outcome)
    }
}

struct Frame {
    stack: Vec<U256>,
    memory: Vec<u8>,
    pc: usize,
    returndata: Vec<u8>,
}

enum Step {
    Next(usize),
    Halt(Outcome),
}

impl Frame {
    fn pop(&mut self) -> Result<U256, ()> {
        self.stack.pop().ok_or(())
    }

    fn push(&mut self, value: U256) -> Result<(), ()> {
        if self.stack.len() >= MAX_STACK {
            return Err(());
        }
        self.stack.push(value);
        Ok(())
    }

    /// Grow memory to cover `[offset, offset+len)`, rounded up to a word.
    fn expand(&mut self, offset: U256, len: U256) -> Result<(usize, usize), ()> {
        if len.is_zero() {
            return Ok((0, 0));
        }
        let off = to_mem_size(offset).ok_or(())?;
        let l = to_mem_size(len).ok_or(())?;
        let end = off.checked_add(l).filter(|&e| e <= MEM_LIMIT).ok_or(())?;
        let rounded = end.div_ceil(32) * 32;
        if rounded > self.memory.len() {
            self.memory.resize(rounded, 0);
        }
        Ok((off, l))
    }

    fn mem_slice(&mut self, offset: U256, len: U256) -> Result<Vec<u8>, ()> {
        let (off, l) = self.expand(offset, len)?;
        Ok(self.memory[off..off + l].to_vec())
    }
}

fn to_mem_size(x: U256) -> Option<usize> {
    if x > U256::from(MEM_LIMIT) {
        None
    } else {
        Some(x.as_usize())
    }
}

fn word_to_address(x: U256) -> Address {
    Address::from_slice(&words::word_bytes(x)[12..])
}

pub(crate) fn address_word(addr: &Address) -> U256 {
    let mut buf = [0u8; 32];
    buf[12..].copy_from_slice(addr.as_bytes());
    U256::from_big_endian(&buf)
}

/// Copy `len` bytes of `src` starting at `src_off`, zero-padded past the end.
fn padded_copy(src: &[u8], src_off: U256, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    if src_off <= U256::from(usize::MAX) {
        let off = src_off.as_usize();
        if off < src.len() {
            let n = (src.len() - off).min(len);
            out[..n].copy_from_slice(&src[off..off + n]);
        }
    }
    out
}

fn exec_code(ctx: &mut TxCtx<'_>, code: Arc<Vec<u8>>, p: &MessageParams) -> Outcome {
    let jumpdests: BTreeSet<usize> = disassemble(&code).jumpdests;
    let mut f = Frame {
        stack: Vec::new(),
        memory: Vec::new(),
        pc: 0,
        returndata: Vec::new(),
    };

    loop {
        if f.pc >= code.len() {
            // Running off the end of the code is an implicit STOP.
            return Outcome {
                success: true,
                returndata: Vec::new(),
                halt: HaltReason::Stop,
            };
        }
        if ctx.steps == 0 {
            return Outcome::fail(HaltReason::OutOfSteps);
        }
        ctx.steps -= 1;
        if let Some(trace) = ctx.trace.as_deref_mut() {
            trace.push((p.depth, p.code_addr, f.pc));
        }
        let opcode = code[f.pc];
        match step(ctx, &mut f, &code, &jumpdests, p, opcode) {
            Ok(Step::Next(pc)) => f.pc = pc,
            Ok(Step::Halt(outcome)) => return outcome,
            Err(()) => return Outcome::fail(HaltReason::Invalid),
        }
    }
}

#[allow(clippy::too_many_lines)]
fn step(
    ctx: &mut TxCtx<'_>,
    f: &mut Frame,
    code: &Arc<Vec<u8>>,
    jumpdests: &BTreeSet<usize>,
    p: &MessageParams,
    opcode: u8,
) -> Result<Step, ()> {
    use op::*;
    let pc = f.pc;
    let next = pc + 1;

    macro_rules! bin {
        ($fn:path) => {{
            let a = f.pop()?;
            let b = f.pop()?;
            f.push($fn(a, b))?;
            Step::Next(next)
        }};
    }

    let step = match opcode {
        STOP => Step::Halt(Outcome {
            success: true,
            returndata: Vec::new(),
            halt: HaltReason::Stop,
        }),
        ADD => bin!(words::add),
        MUL => bin!(words::mul),
        SUB => bin!(words::sub),
        DIV => bin!(words::div),
        SDIV => bin!(words::sdiv),
        MOD => bin!(words::rem),
        SMOD => bin!(words::smod),
        ADDMOD => {
            let a = f.pop()?;
            let b = f.pop()?;
            let m = f.pop()?;
            f.push(words::addmod(a, b, m))?;
            Step::Next(next)
        }
        MULMOD => {
            let a = f.pop()?;
            let b = f.pop()?;
            let m = f.pop()?;
            f.push(words::mulmod(a, b, m))?;
            Step::Next(next)
        }
        EXP => bin!(words::exp),
        SIGNEXTEND => bin!(words::signextend),
        LT => bin!(words::lt),
        GT => bin!(words::gt),
        SLT => bin!(words::slt),
        SGT => bin!(words::sgt),
        EQ => bin!(words::eq),
        ISZERO => {
            let a = f.pop()?;
            f.push(words::iszero(a))?;
            Step::Next(next)
        }
        AND => bin!(|a, b| a & b),
        OR => bin!(|a, b| a | b),
        XOR => bin!(|a, b| a ^ b),
        NOT => {
            let a = f.pop()?;
            f.push(!a)?;
            Step::Next(next)
        }
        BYTE => bin!(words::byte),
        SHL => bin!(words::shl),
        SHR => bin!(words::shr),
        SAR => bin!(words::sar),
        SHA3 => {
            let offset = f.pop()?;
            let len = f.pop()?;
            let data = f.mem_slice(offset, len)?;
            f.push(U256::from_big_endian(&keccak256(&data)))?;
            Step::Next(next)
        }
        ADDRESS => {
            f.push(address_word(&p.address))?;
            Step::Next(next)
        }
        BALANCE => {
            let addr = word_to_address(f.pop()?);
            f.push(ctx.world.balance(&addr))?;
            Step::Next(next)
        }
        ORIGIN => {
            f.push(address_word(&ctx.origin))?;
            Step::Next(next)
        }
        CALLER => {
            f.push(address_word(&p.caller))?;
            Step::Next(next)
        }
        CALLVALUE => {
            f.push(p.value)?;
            Step::Next(next)
        }
        CALLDATALOAD => {
            let offset = f.pop()?;
            let word = if offset > U256::from(usize::MAX) {
                U256::zero()
            } else {
                words::read_word(&p.calldata, offset.as_usize())
            };
            f.push(word)?;
            Step::Next(next)
        }
        CALLDATASIZE => {
            f.push(U256::from(p.calldata.len()))?;
            Step::Next(next)
        }
        CALLDATACOPY => {
            let dest = f.pop()?;
            let src = f.pop()?;
            let len = f.pop()?;
            let (d, l) = f.expand(dest, len)?;
            let bytes = padded_copy(&p.calldata, src, l);
            f.memory[d..d + l].copy_from_slice(&bytes);
            Step::Next(next)
        }
        CODESIZE => {
            f.push(U256::from(code.len()))?;
            Step::Next(next)
        }
        CODECOPY => {
            let dest = f.pop()?;
            let src = f.pop()?;
            let len = f.pop()?;
            let (d, l) = f.expand(dest, len)?;
            let bytes = padded_copy(code, src, l);
            f.memory[d..d + l].copy_from_slice(&bytes);
            Step::Next(next)
        }
        EXTCODESIZE => {
            let addr = word_to_address(f.pop()?);
            f.push(U256::from(ctx.world.code(&addr).len()))?;
            Step::Next(next)
        }
        RETURNDATASIZE => {
            f.push(U256::from(f.returndata.len()))?;
            Step::Next(next)
        }
        RETURNDATACOPY => {
            let dest = f.pop()?;
            let src = f.pop()?;
            let len = f.pop()?;
            let (d, l) = f.expand(dest, len)?;
            // Post-Byzantium: reading past the return buffer is an error.
            let end = src.checked_add(U256::from(l)).ok_or(())?;
            if end > U256::from(f.returndata.len()) {
                return Err(());
            }
            let start = src.as_usize();
            let bytes = f.returndata[start..start + l].to_vec();
            f.memory[d..d + l].copy_from_slice(&bytes);
            Step::Next(next)
        }
        POP => {
            f.pop()?;
            Step::Next(next)
        }
        MLOAD => {
            let offset = f.pop()?;
            let (off, _) = f.expand(offset, U256::from(32u8))?;
            f.push(U256::from_big_endian(&f.memory[off..off + 32]))?;
            Step::Next(next)
        }
        MSTORE => {
            let offset = f.pop()?;
            let value = f.pop()?;
            let (off, _) = f.expand(offset, U256::from(32u8))?;
            f.memory[off..off + 32].copy_from_slice(&words::word_bytes(value));
            Step::Next(next)
        }
        MSTORE8 => {
            let offset = f.pop()?;
            let value = f.pop()?;
            let (off, _) = f.expand(offset, U256::one())?;
            f.memory[off] = value.byte(0);
            Step::Next(next)
        }
        SLOAD => {
            let key = f.pop()?;
            f.push(ctx.world.storage_get(&p.address, &key))?;
            Step::Next(next)
        }
        SSTORE => {
            if p.is_static {
                return Err(());
            }
            let key = f.pop()?;
            let value = f.pop()?;
            ctx.world.storage_set(p.address, key, value);
            Step::Next(next)
        }
        JUMP => {
            let dest = f.pop()?;
            jump_target(dest, jumpdests).map(Step::Next).ok_or(())?
        }
        JUMPI => {
            let dest = f.pop()?;
            let cond = f.pop()?;
            if cond.is_zero() {
                Step::Next(next)
            } else {
                jump_target(dest, jumpdests).map(Step::Next).ok_or(())?
            }
        }
        PC => {
            f.push(U256::from(pc))?;
            Step::Next(next)
        }
        MSIZE => {
            f.push(U256::from(f.memory.len()))?;
            Step::Next(next)
        }
        GAS => {
            f.push(U256::from(ctx.steps))?;
            Step::Next(next)
        }
        JUMPDEST => Step::Next(next),
        _ if (PUSH1..=PUSH32).contains(&opcode) => {
            let width = (opcode - PUSH1) as usize + 1;
            let mut buf = [0u8; 32];
            let avail = code.len().saturating_sub(pc + 1).min(width);
            buf[32 - width..32 - width + avail]
                .copy_from_slice(&code[pc + 1..pc + 1 + avail]);
            f.push(U256::from_big_endian(&buf))?;
            Step::Next(pc + 1 + width)
        }
        _ if (DUP1..=DUP16).contains(&opcode) => {
            let depth = (opcode - DUP1) as usize;
            if depth >= f.stack.len() {
                return Err(());
            }
            let value = f.stack[f.stack.len() - 1 - depth];
            f.push(value)?;
            Step::Next(next)
        }
        _ if (SWAP1..=SWAP16).contains(&opcode) => {
            let depth = (opcode - SWAP1) as usize + 1;
            let len = f.stack.len();
            if depth >= len {
                return Err(());
            }
            f.stack.swap(len - 1, len - 1 - depth);
            Step::Next(next)
        }
        _ if (LOG0..=LOG4).contains(&opcode) => {
            if p.is_static {
                return Err(());
            }
            let offset = f.pop()?;
            let len = f.pop()?;
            let n_topics = (opcode - LOG0) as usize;
            let mut topics = Vec::with_capacity(n_topics);
            for _ in 0..n_topics {
                topics.push(f.pop()?);
            }
            let data = f.mem_slice(offset, len)?;
            ctx.logs.push(Log {
                address: p.address,
                topics,
                data,
            });
            Step::Next(next)
        }
        CREATE => {
            if p.is_static {
                return Err(());
            }
            let value = f.pop()?;
            let offset = f.pop()?;
            let len = f.pop()?;
            let init = f.mem_slice(offset, len)?;
            if p.depth + 1 > MAX_DEPTH {
                f.returndata.clear();
                f.push(U256::zero())?;
                return Ok(Step::Next(next));
            }
            let (created, outcome) =
                create_frame(ctx, p.address, value, init, p.depth + 1, p.is_static);
            f.returndata = if outcome.success {
                Vec::new()
            } else {
                outcome.returndata
            };
            match created {
                Some(addr) => f.push(address_word(&addr))?,
                None => f.push(U256::zero())?,
            }
            Step::Next(next)
        }
        CALL | CALLCODE | DELEGATECALL | STATICCALL => {
            let _gas = f.pop()?;
            let to = word_to_address(f.pop()?);
            let value = if opcode == CALL || opcode == CALLCODE {
                f.pop()?
            } else {
                U256::zero()
            };
            if opcode == CALL && p.is_static && !value.is_zero() {
                return Err(());
            }
            let in_off = f.pop()?;
            let in_len = f.pop()?;
            let out_off = f.pop()?;
            let out_len = f.pop()?;
            let args = f.mem_slice(in_off, in_len)?;
            let (out_start, out_cap) = f.expand(out_off, out_len)?;

            if p.depth + 1 > MAX_DEPTH {
                f.returndata.clear();
                f.push(U256::zero())?;
                return Ok(Step::Next(next));
            }
            let params = match opcode {
                CALL => MessageParams {
                    caller: p.address,
                    address: to,
                    code_addr: to,
                    value,
                    transfer: Some((p.address, to, value)),
                    calldata: args,
                    depth: p.depth + 1,
                    is_static: p.is_static,
                },
                CALLCODE => MessageParams {
                    caller: p.address,
                    address: p.address,
                    code_addr: to,
                    value,
                    transfer: Some((p.address, p.address, value)),
                    calldata: args,
                    depth: p.depth + 1,
                    is_static: p.is_static,
                },
                DELEGATECALL => MessageParams {
                    caller: p.caller,
                    address: p.address,
                    code_addr: to,
                    value: p.value,
                    transfer: None,
                    calldata: args,
                    depth: p.depth + 1,
                    is_static: p.is_static,
                },
                _ => MessageParams {
                    caller: p.address,
                    address: to,
                    code_addr: to,
                    value: U256::zero(),
                    transfer: None,
                    calldata: args,
                    depth: p.depth + 1,
                    is_static: true,
                },
            };
            let outcome = call_frame(ctx, params);
            let n = outcome.returndata.len().min(out_cap);
            f.memory[out_start..out_start + n].copy_from_slice(&outcome.returndata[..n]);
            f.returndata = outcome.returndata;
            f.push(words::bool_word(outcome.success))?;
            Step::Next(next)
        }
        RETURN => {
            let offset = f.pop()?;
            let len = f.pop()?;
            let data = f.mem_slice(offset, len)?;
            Step::Halt(Outcome {
                success: true,
                returndata: data,
                halt: HaltReason::Return,
            })
        }
        REVERT => {
            let offset = f.pop()?;
            let len = f.pop()?;
            let data = f.mem_slice(offset, len)?;
            Step::Halt(Outcome {
                success: false,
                returndata: data,
                halt: HaltReason::Revert,
            })
        }
        SELFDESTRUCT => {
            if p.is_static {
                return Err(());
            }
            let beneficiary = word_to_address(f.pop()?);
            let balance = ctx.world.balance(&p.address);
            if beneficiary != p.address {
                ctx.world.account_mut(beneficiary).balance += balance;
            }
            ctx.world.accounts.remove(&p.address);
            Step::Halt(Outcome {
                success: true,
                returndata: Vec::new(),
                halt: HaltReason::SelfDestruct,
            })
        }
        // INVALID, unknown bytes, and unimplemented opcodes (block context,
        // GASPRICE, EXTCODECOPY/HASH, CREATE2) all halt the frame.
        _ => return Err(()),
    };
    Ok(step)
}

fn jump_target(dest: U256, jumpdests: &BTreeSet<usize>) -> Option<usize> {
    if dest > U256::from(usize::MAX) {
        return None;
    }
    let d = dest.as_usize();
    jumpdests.contains(&d).then_some(d)
}

pub(crate) use native_env_impl::*;

mod native_env_impl {
    use super::*;

    /// Host-side view of a call into a native contract.
    pub struct NativeEnvInner<'c, 'w> {
        pub(crate) ctx: &'c mut TxCtx<'w>,
        pub(crate) self_address: Address,
        pub(crate) caller: Address,
        pub(crate) value: U256,
        pub(crate) calldata: Vec<u8>,
        pub(crate) depth: u32,
        pub(crate) is_static: bool,
        pub(crate) violation: bool,
    }

    impl<'c, 'w> NativeEnvInner<'c, 'w> {
        pub(crate) fn new(ctx: &'c mut TxCtx<'w>, p: &MessageParams) -> Self {
            NativeEnvInner {
                self_address: p.address,
                caller: p.caller,
                value: p.value,
                calldata: p.calldata.clone(),
                depth: p.depth,
                is_static: p.is_static,
                violation: false,
                ctx,
            }
        }

        pub fn caller(&self) -> Address {
            self.caller
        }

        pub fn value(&self) -> U256 {
            self.value
        }

        pub fn calldata(&self) -> &[u8] {
            &self.calldata
        }

        pub fn self_address(&self) -> Address {
            self.self_address
        }

        pub fn balance(&self, addr: &Address) -> U256 {
            self.ctx.world.balance(addr)
        }

        /// Read the native account's own storage.
        pub fn sload(&self, key: U256) -> U256 {
            self.ctx.world.storage_get(&self.self_address, &key)
        }

        /// Write the native account's own storage (revert-scoped like any
        /// SSTORE). In a static context this marks the frame failed.
        pub fn sstore(&mut self, key: U256, value: U256) {
            if self.is_static {
                self.violation = true;
                return;
            }
            self.ctx.world.storage_set(self.self_address, key, value);
        }

        pub fn log(&mut self, topics: Vec<U256>, data: Vec<u8>) {
            if self.is_static {
                self.violation = true;
                return;
            }
            self.ctx.logs.push(Log {
                address: self.self_address,
                topics,
                data,
            });
        }

        /// Issue a nested EVM call from the native account.
        pub fn call(&mut self, to: Address, value: U256, data: &[u8]) -> (bool, Vec<u8>) {
            if self.is_static && !value.is_zero() {
                self.violation = true;
                return (false, Vec::new());
            }
            if self.depth + 1 > MAX_DEPTH {
                return (false, Vec::new());
            }
            let outcome = call_frame(
                self.ctx,
                MessageParams {
                    caller: self.self_address,
                    address: to,
                    code_addr: to,
                    value,
                    transfer: Some((self.self_address, to, value)),
                    calldata: data.to_vec(),
                    depth: self.depth + 1,
                    is_static: self.is_static,
                },
            );
            (outcome.success, outcome.returndata)
        }

        pub(crate) fn static_violation(&self) -> bool {
            self.violation
        }
    }
}

/// True when the account byte marker denotes a native handler.
pub(crate) fn is_native_marker(code: &[u8]) -> bool {
    code.len() == 1 && code[0] == NATIVE_CODE_MARKER
}
