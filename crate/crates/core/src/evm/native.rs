//! Host-implemented contracts: accounts whose behavior is Rust code rather
//! than bytecode. They look like contracts to the EVM (nonzero code marker)
//! and participate in revert scoping because their state lives in their
//! account's storage.

pub use super::interp::NativeEnvInner as NativeEnv;

/// What a native call produced. `success == false` reverts the frame.
#[derive(Debug, Clone)]
pub struct NativeOutcome {
    pub success: bool,
    pub returndata: Vec<u8>,
}

impl NativeOutcome {
    pub fn ok(returndata: Vec<u8>) -> Self {
        NativeOutcome {
            success: true,
            returndata,
        }
    }

    pub fn revert() -> Self {
        NativeOutcome {
            success: false,
            returndata: Vec::new(),
        }
    }
}

pub trait NativeContract: Send + Sync {
    fn call(&self, env: &mut NativeEnv<'_, '_>) -> NativeOutcome;
}
