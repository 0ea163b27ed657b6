//! Concrete EVM interpreter plus in-memory world state.
//!
//! Executes transactions with full revert semantics: any frame that halts on
//! REVERT, INVALID, a bad jump, stack misuse, or step exhaustion has every
//! state modification rolled back via per-frame snapshots. There is no gas
//! schedule; a flat per-instruction step budget bounds each transaction.

mod genesis;
mod interp;
mod native;

pub use genesis::{apply_genesis, parse_genesis, GenesisAccount, GenesisError};
pub use interp::TraceStep;
pub use native::{NativeContract, NativeEnv, NativeOutcome};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::bytecode::keccak256;
use crate::words::word_bytes;
use crate::{Address, U256};

/// Default per-transaction step budget standing in for gas.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Marker byte stored as the code of native-handler accounts so they look
/// like contracts (EXTCODESIZE > 0) and fail safe if ever run as bytecode.
pub(crate) const NATIVE_CODE_MARKER: u8 = 0xfe;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Account {
    pub balance: U256,
    /// Empty for an EOA; the account is a contract iff nonempty.
    pub code: Arc<Vec<u8>>,
    /// Absent keys read as zero; writes of zero delete the key.
    pub storage: BTreeMap<U256, U256>,
}

impl Account {
    pub fn eoa(balance: U256) -> Self {
        Account {
            balance,
            ..Account::default()
        }
    }

    pub fn is_contract(&self) -> bool {
        !self.code.is_empty()
    }
}

/// Concrete chain state: accounts plus per-address deployment counters.
#[derive(Clone, Default)]
pub struct WorldState {
    pub(crate) accounts: BTreeMap<Address, Account>,
    pub(crate) nonces: BTreeMap<Address, u64>,
    pub(crate) natives: BTreeMap<Address, Arc<dyn NativeContract>>,
}

impl std::fmt::Debug for WorldState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorldState")
            .field("accounts", &self.accounts)
            .field("nonces", &self.nonces)
            .field("natives", &self.natives.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl WorldState {
    pub fn new() -> Self {
        WorldState::default()
    }

    pub fn account(&self, addr: &Address) -> Option<&Account> {
        self.accounts.get(addr)
    }

    pub fn account_mut(&mut self, addr: Address) -> &mut Account {
        self.accounts.entry(addr).or_default()
    }

    pub fn insert_account(&mut self, addr: Address, account: Account) {
        self.accounts.insert(addr, account);
    }

    pub fn balance(&self, addr: &Address) -> U256 {
        self.accounts.get(addr).map_or(U256::zero(), |a| a.balance)
    }

    pub fn code(&self, addr: &Address) -> Arc<Vec<u8>> {
        self.accounts
            .get(addr)
            .map_or_else(|| Arc::new(Vec::new()), |a| a.code.clone())
    }

    pub fn storage_get(&self, addr: &Address, key: &U256) -> U256 {
        self.accounts
            .get(addr)
            .and_then(|a| a.storage.get(key).copied())
            .unwrap_or_default()
    }

    /// Zero-normalized storage write: storing zero deletes the key.
    pub fn storage_set(&mut self, addr: Address, key: U256, value: U256) {
        let account = self.account_mut(addr);
        if value.is_zero() {
            account.storage.remove(&key);
        } else {
            account.storage.insert(key, value);
        }
    }

    pub fn nonce(&self, addr: &Address) -> u64 {
        self.nonces.get(addr).copied().unwrap_or(0)
    }

    pub fn is_native(&self, addr: &Address) -> bool {
        self.natives.contains_key(addr)
    }

    /// Keccak-256 over a canonical serialization of the whole state; used by
    /// the revert-atomicity checks. Byte-identical states hash equal.
    pub fn state_hash(&self) -> [u8; 32] {
        let mut buf = Vec::new();
        for (addr, account) in &self.accounts {
            buf.extend_from_slice(addr.as_bytes());
            buf.extend_from_slice(&word_bytes(account.balance));
            buf.extend_from_slice(&(account.code.len() as u64).to_be_bytes());
            buf.extend_from_slice(&account.code);
            buf.extend_from_slice(&(account.storage.len() as u64).to_be_bytes());
            for (k, v) in &account.storage {
                buf.extend_from_slice(&word_bytes(*k));
                buf.extend_from_slice(&word_bytes(*v));
            }
        }
        for (addr, nonce) in &self.nonces {
            buf.extend_from_slice(addr.as_bytes());
            buf.extend_from_slice(&nonce.to_be_bytes());
        }
        for addr in self.natives.keys() {
            buf.extend_from_slice(addr.as_bytes());
        }
        keccak256(&buf)
    }
}

/// msg context of one call frame.
#[derive(Debug, Clone)]
pub struct CallContext {
    pub caller: Address,
    pub callee: Address,
    pub value: U256,
    pub calldata: Vec<u8>,
    pub depth: u32,
}

/// One emitted log record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Log {
    pub address: Address,
    pub topics: Vec<U256>,
    #[serde(with = "hex_bytes")]
    pub data: Vec<u8>,
}

mod hex_bytes {
    pub fn serialize<S: serde::Serializer>(data: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::bytecode::to_hex(data))
    }
}

/// How a transaction's outermost frame halted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HaltReason {
    Stop,
    Return,
    SelfDestruct,
    Revert,
    /// INVALID opcode, bad jump, stack misuse, unsupported opcode, or any
    /// other exceptional halt.
    Invalid,
    OutOfSteps,
}

impl HaltReason {
    pub fn is_success(self) -> bool {
        matches!(self, HaltReason::Stop | HaltReason::Return | HaltReason::SelfDestruct)
    }
}

/// Transaction outcome. `status == 0` guarantees the pre-state was restored.
#[derive(Debug, Clone)]
pub struct Receipt {
    pub status: u8,
    pub returndata: Vec<u8>,
    pub logs: Vec<Log>,
    pub steps_used: u64,
    pub halt: HaltReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub from: Address,
    pub to: Address,
    pub value: U256,
    pub data: Vec<u8>,
    pub step_budget: u64,
}

impl Transaction {
    pub fn call(from: Address, to: Address, data: Vec<u8>) -> Self {
        Transaction {
            from,
            to,
            value: U256::zero(),
            data,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvmError {
    #[error("unknown sender {0:?}")]
    UnknownSender(Address),
    #[error("unknown account {0:?}")]
    UnknownAccount(Address),
    #[error("step budget must be positive")]
    ZeroStepBudget,
    #[error("deployment payload is empty")]
    EmptyPayload,
    #[error("address {0:?} already occupied by a contract")]
    AddressCollision(Address),
}

/// Execute a transaction against `state`, committing on success and rolling
/// back on any failure. Execution failures are reported in-band via
/// `Receipt::status == 0`, never as errors.
pub fn execute_transaction(
    state: &mut WorldState,
    tx: &Transaction,
) -> Result<Receipt, EvmError> {
    execute_inner(state, tx, None)
}

/// As [`execute_transaction`], additionally recording every executed
/// instruction as `(depth, code address, pc)`.
pub fn execute_transaction_traced(
    state: &mut WorldState,
    tx: &Transaction,
) -> Result<(Receipt, Vec<TraceStep>), EvmError> {
    let mut trace = Vec::new();
    let receipt = execute_inner(state, tx, Some(&mut trace))?;
    Ok((receipt, trace))
}

fn execute_inner(
    state: &mut WorldState,
    tx: &Transaction,
    trace: Option<&mut Vec<TraceStep>>,
) -> Result<Receipt, EvmError> {
    if !state.accounts.contains_key(&tx.from) {
        return Err(EvmError::UnknownSender(tx.from));
    }
    if tx.step_budget == 0 {
        return Err(EvmError::ZeroStepBudget);
    }
    Ok(interp::run_transaction(state, tx, trace))
}

/// Run `payload` as creation code from `sender`; the RETURNed bytes become
/// the new account's code. A failed constructor creates nothing.
pub fn deploy(
    state: &mut WorldState,
    sender: Address,
    payload: &[u8],
    step_budget: u64,
) -> Result<(Address, Receipt), EvmError> {
    if payload.is_empty() {
        return Err(EvmError::EmptyPayload);
    }
    if !state.accounts.contains_key(&sender) {
        return Err(EvmError::UnknownSender(sender));
    }
    if step_budget == 0 {
        return Err(EvmError::ZeroStepBudget);
    }
    Ok(interp::run_deploy(state, sender, payload, step_budget))
}

/// Read-only probe: executes like a zero-value transaction and then discards
/// every state change regardless of status.
pub fn call_view(
    state: &WorldState,
    from: Address,
    to: Address,
    data: Vec<u8>,
) -> Result<Receipt, EvmError> {
    if !state.accounts.contains_key(&to) {
        return Err(EvmError::UnknownAccount(to));
    }
    let mut scratch = state.clone();
    execute_transaction(&mut scratch, &Transaction::call(from, to, data))
}

/// Install a host-side contract at `address`. From the EVM's perspective it
/// is a contract (nonzero code marker) participating in revert scoping.
pub fn register_native(
    state: &mut WorldState,
    address: Address,
    handler: Arc<dyn NativeContract>,
) -> Result<(), EvmError> {
    let occupied = state.is_native(&address)
        || state
            .account(&address)
            .is_some_and(|account| account.is_contract());
    if occupied {
        return Err(EvmError::AddressCollision(address));
    }
    let account = state.account_mut(address);
    account.code = Arc::new(vec![NATIVE_CODE_MARKER]);
    state.natives.insert(address, handler);
    Ok(())
}

/// Deterministic deployed-contract address: first 20 bytes of
/// keccak256(sender ++ nonce as minimal big-endian). Intra-harness scheme
/// only; not the mainnet RLP derivation.
pub fn derive_address(sender: &Address, nonce: u64) -> Address {
    let mut buf = Vec::with_capacity(28);
    buf.extend_from_slice(sender.as_bytes());
    let be = nonce.to_be_bytes();
    let first = be.iter().position(|&b| b != 0).unwrap_or(be.len());
    buf.extend_from_slice(&be[first..]);
    Address::from_slice(&keccak256(&buf)[..20])
}

/// One transcript line: the spec'd JSON shape for a transaction and its
/// receipt.
pub fn transcript_json(tx: &Transaction, receipt: &Receipt) -> serde_json::Value {
    serde_json::json!({
        "from": format!("{:#x}", tx.from),
        "to": format!("{:#x}", tx.to),
        "data": crate::bytecode::to_hex(&tx.data),
        "status": receipt.status,
        "returndata": crate::bytecode::to_hex(&receipt.returndata),
        "logs": receipt.logs.iter().map(|log| {
            serde_json::json!({
                "address": format!("{:#x}", log.address),
                "topics": log.topics.iter().map(|t| format!("0x{}", hex::encode(word_bytes(*t)))).collect::<Vec<_>>(),
                "data": crate::bytecode::to_hex(&log.data),
            })
        }).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(byte: u8) -> Address {
        Address::from([byte; 20])
    }

    #[test]
    fn storage_zero_write_deletes() {
        let mut state = WorldState::new();
        let a = addr(1);
        state.insert_account(a, Account::eoa(U256::zero()));
        let before = state.state_hash();
        state.storage_set(a, U256::from(7), U256::from(9));
        assert_ne!(state.state_hash(), before);
        state.storage_set(a, U256::from(7), U256::zero());
        assert_eq!(state.state_hash(), before);
        assert!(state.account(&a).unwrap().storage.is_empty());
    }

    #[test]
    fn derive_address_deterministic_and_nonce_sensitive() {
        let sender = addr(0xaa);
        let a0 = derive_address(&sender, 0);
        let a1 = derive_address(&sender, 1);
        assert_ne!(a0, a1);
        assert_eq!(a0, derive_address(&sender, 0));
    }

    #[test]
    fn unknown_sender_is_an_error() {
        let mut state = WorldState::new();
        let tx = Transaction::call(addr(1), addr(2), vec![]);
        assert_eq!(
            execute_transaction(&mut state, &tx).unwrap_err(),
            EvmError::UnknownSender(addr(1))
        );
    }

    #[test]
    fn register_native_collision() {
        struct Echo;
        impl NativeContract for Echo {
            fn call(&self, env: &mut NativeEnv<'_, '_>) -> NativeOutcome {
                NativeOutcome {
                    success: true,
                    returndata: env.calldata().to_vec(),
                }
            }
        }
        let mut state = WorldState::new();
        register_native(&mut state, addr(9), Arc::new(Echo)).unwrap();
        let err = register_native(&mut state, addr(9), Arc::new(Echo)).unwrap_err();
        assert_eq!(err, EvmError::AddressCollision(addr(9)));
    }
}
