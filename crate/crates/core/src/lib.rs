//! Bytecode-level analyzer and exploit harness for the ERC-20 fake-deposit
//! vulnerability.
//!
//! The pipeline has two halves: a symbolic-execution static detector that
//! flags tokens whose `transfer`/`transferFrom` can update balances without a
//! revert-guarded failure branch, and an embedded-EVM dynamic validator that
//! proves exploitability by replaying the Type-I (DEX `depositToken`) and
//! Type-II (CEX status-check) attacks against the deployed contract.

pub mod bytecode;
pub mod detector;
pub mod evm;
pub mod symexec;
pub mod validator;
pub mod words;

pub use primitive_types::{H160, U256};

/// 20-byte account address.
pub type Address = H160;
