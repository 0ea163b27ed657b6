//! Genesis file support: a JSON list of accounts seeding a world state.
//!
//! ```json
//! [
//!   {"address": "0x1111...", "balance": "0xde0b6b3a7640000"},
//!   {"address": "0x2222...", "balance": 1000, "code": "0x6001",
//!    "storage": {"0x00": "0x2a"}}
//! ]
//! ```
//!
//! Balances and storage words accept 0x-hex or decimal, as number or string.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bytecode::parse_hex;
use crate::{Address, U256};

use super::WorldState;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenesisAccount {
    pub address: String,
    pub balance: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Error)]
pub enum GenesisError {
    #[error("genesis is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad address `{0}`")]
    BadAddress(String),
    #[error("bad 256-bit value `{0}`")]
    BadWord(String),
}

pub fn parse_genesis(json: &str) -> Result<Vec<GenesisAccount>, GenesisError> {
    Ok(serde_json::from_str(json)?)
}

pub fn apply_genesis(
    state: &mut WorldState,
    entries: &[GenesisAccount],
) -> Result<(), GenesisError> {
    for entry in entries {
        let address = parse_address(&entry.address)?;
        let account = state.account_mut(address);
        account.balance = parse_word_value(&entry.balance)?;
        if let Some(code) = &entry.code {
            account.code = Arc::new(
                parse_hex(code).map_err(|_| GenesisError::BadWord(code.clone()))?,
            );
        }
        if let Some(storage) = &entry.storage {
            for (k, v) in storage {
                let key = parse_word_str(k)?;
                let value = parse_word_str(v)?;
                state.storage_set(address, key, value);
            }
        }
    }
    Ok(())
}

fn parse_address(s: &str) -> Result<Address, GenesisError> {
    let bytes = parse_hex(s).map_err(|_| GenesisError::BadAddress(s.to_string()))?;
    if bytes.len() != 20 {
        return Err(GenesisError::BadAddress(s.to_string()));
    }
    Ok(Address::from_slice(&bytes))
}

fn parse_word_value(v: &serde_json::Value) -> Result<U256, GenesisError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_u64()
            .map(U256::from)
            .ok_or_else(|| GenesisError::BadWord(n.to_string())),
        serde_json::Value::String(s) => parse_word_str(s),
        other => Err(GenesisError::BadWord(other.to_string())),
    }
}

fn parse_word_str(s: &str) -> Result<U256, GenesisError> {
    let trimmed = s.trim();
    let result = if let Some(hex_digits) = trimmed.strip_prefix("0x") {
        U256::from_str_radix(hex_digits, 16)
    } else {
        U256::from_str_radix(trimmed, 10)
    };
    result.map_err(|_| GenesisError::BadWord(s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_apply() {
        let json = r#"[
            {"address": "0x1111111111111111111111111111111111111111",
             "balance": "0xde0b6b3a7640000"},
            {"address": "0x2222222222222222222222222222222222222222",
             "balance": 1000,
             "code": "0x6001",
             "storage": {"0x00": "0x2a", "1": "7"}}
        ]"#;
        let entries = parse_genesis(json).unwrap();
        let mut state = WorldState::new();
        apply_genesis(&mut state, &entries).unwrap();

        let a1 = Address::from([0x11; 20]);
        let a2 = Address::from([0x22; 20]);
        assert_eq!(state.balance(&a1), U256::from(10u64).pow(18.into()));
        assert_eq!(state.balance(&a2), U256::from(1000));
        assert_eq!(state.code(&a2).as_slice(), &[0x60, 0x01]);
        assert_eq!(state.storage_get(&a2, &U256::zero()), U256::from(0x2a));
        assert_eq!(state.storage_get(&a2, &U256::one()), U256::from(7));
    }

    #[test]
    fn bad_address_rejected() {
        let json = r#"[{"address": "0x1234", "balance": 0}]"#;
        let entries = parse_genesis(json).unwrap();
        let mut state = WorldState::new();
        assert!(matches!(
            apply_genesis(&mut state, &entries),
            Err(GenesisError::BadAddress(_))
        ));
    }
}
