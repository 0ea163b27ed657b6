//! Symbolic 256-bit values: a term tree with structural identity and
//! aggressive constant folding. Two terms are the same value for analysis
//! purposes iff they are structurally equal; Sha3 terms compare equal iff
//! their operand terms compare equal.

use std::fmt;
use std::rc::Rc;

use crate::bytecode::keccak256;
use crate::words;
use crate::U256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOpKind {
    IsZero,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOpKind {
    Add,
    Sub,
    Mul,
    Div,
    SDiv,
    Mod,
    SMod,
    Exp,
    SignExtend,
    Lt,
    Gt,
    Slt,
    Sgt,
    Eq,
    And,
    Or,
    Xor,
    Byte,
    Shl,
    Shr,
    Sar,
}

impl BinOpKind {
    fn fold(self, a: U256, b: U256) -> U256 {
        match self {
            BinOpKind::Add => words::add(a, b),
            BinOpKind::Sub => words::sub(a, b),
            BinOpKind::Mul => words::mul(a, b),
            BinOpKind::Div => words::div(a, b),
            BinOpKind::SDiv => words::sdiv(a, b),
            BinOpKind::Mod => words::rem(a, b),
            BinOpKind::SMod => words::smod(a, b),
            BinOpKind::Exp => words::exp(a, b),
            BinOpKind::SignExtend => words::signextend(a, b),
            BinOpKind::Lt => words::lt(a, b),
            BinOpKind::Gt => words::gt(a, b),
            BinOpKind::Slt => words::slt(a, b),
            BinOpKind::Sgt => words::sgt(a, b),
            BinOpKind::Eq => words::eq(a, b),
            BinOpKind::And => a & b,
            BinOpKind::Or => a | b,
            BinOpKind::Xor => a ^ b,
            BinOpKind::Byte => words::byte(a, b),
            BinOpKind::Shl => words::shl(a, b),
            BinOpKind::Shr => words::shr(a, b),
            BinOpKind::Sar => words::sar(a, b),
        }
    }

    fn name(self) -> &'static str {
        match self {
            BinOpKind::Add => "add",
            BinOpKind::Sub => "sub",
            BinOpKind::Mul => "mul",
            BinOpKind::Div => "div",
            BinOpKind::SDiv => "sdiv",
            BinOpKind::Mod => "mod",
            BinOpKind::SMod => "smod",
            BinOpKind::Exp => "exp",
            BinOpKind::SignExtend => "signextend",
            BinOpKind::Lt => "lt",
            BinOpKind::Gt => "gt",
            BinOpKind::Slt => "slt",
            BinOpKind::Sgt => "sgt",
            BinOpKind::Eq => "eq",
            BinOpKind::And => "and",
            BinOpKind::Or => "or",
            BinOpKind::Xor => "xor",
            BinOpKind::Byte => "byte",
            BinOpKind::Shl => "shl",
            BinOpKind::Shr => "shr",
            BinOpKind::Sar => "sar",
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Concrete(U256),
    /// Named unconstrained input: calldata word, caller, callvalue, the
    /// result of an unfollowed external call, untracked memory, ...
    Input(String),
    UnOp(UnOpKind, SymValue),
    BinOp(BinOpKind, SymValue, SymValue),
    /// Keccak over a memory slice: hashed length plus the slice as 32-byte
    /// word terms. Fully concrete slices fold to a Concrete digest.
    Sha3 { len: SymValue, words: Vec<SymValue> },
    /// Value loaded from unconstrained storage at a (possibly symbolic) key.
    StorageRead(SymValue),
}

/// Shared handle to a term; clone is cheap and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymValue(Rc<Term>);

impl SymValue {
    pub fn concrete(value: U256) -> Self {
        SymValue(Rc::new(Term::Concrete(value)))
    }

    pub fn concrete_u64(value: u64) -> Self {
        Self::concrete(U256::from(value))
    }

    pub fn input(name: impl Into<String>) -> Self {
        SymValue(Rc::new(Term::Input(name.into())))
    }

    pub fn unop(kind: UnOpKind, x: SymValue) -> Self {
        if let Some(v) = x.as_concrete() {
            let folded = match kind {
                UnOpKind::IsZero => words::iszero(v),
                UnOpKind::Not => !v,
            };
            return Self::concrete(folded);
        }
        SymValue(Rc::new(Term::UnOp(kind, x)))
    }

    pub fn binop(kind: BinOpKind, a: SymValue, b: SymValue) -> Self {
        if let (Some(x), Some(y)) = (a.as_concrete(), b.as_concrete()) {
            return Self::concrete(kind.fold(x, y));
        }
        SymValue(Rc::new(Term::BinOp(kind, a, b)))
    }

    /// Keccak over a word sequence; collapses to a Concrete digest when the
    /// length and every word are concrete. Identical operand terms always
    /// yield the identical term.
    pub fn sha3(len: SymValue, word_terms: Vec<SymValue>) -> Self {
        if let Some(n) = len.as_concrete() {
            if n <= U256::from(word_terms.len() * 32) {
                let concrete: Option<Vec<U256>> =
                    word_terms.iter().map(SymValue::as_concrete).collect();
                if let Some(values) = concrete {
                    let mut buf = Vec::with_capacity(word_terms.len() * 32);
                    for v in values {
                        buf.extend_from_slice(&words::word_bytes(v));
                    }
                    buf.truncate(n.as_usize());
                    return Self::concrete(U256::from_big_endian(&keccak256(&buf)));
                }
            }
        }
        SymValue(Rc::new(Term::Sha3 {
            len,
            words: word_terms,
        }))
    }

    pub fn storage_read(key: SymValue) -> Self {
        SymValue(Rc::new(Term::StorageRead(key)))
    }

    pub fn term(&self) -> &Term {
        &self.0
    }

    pub fn as_concrete(&self) -> Option<U256> {
        match self.term() {
            Term::Concrete(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_concrete(&self) -> bool {
        self.as_concrete().is_some()
    }

    /// Structural subterm search: does `needle` occur anywhere in this tree?
    pub fn contains(&self, needle: &SymValue) -> bool {
        if self == needle {
            return true;
        }
        match self.term() {
            Term::Concrete(_) | Term::Input(_) => false,
            Term::UnOp(_, x) => x.contains(needle),
            Term::BinOp(_, a, b) => a.contains(needle) || b.contains(needle),
            Term::Sha3 { len, words } => {
                len.contains(needle) || words.iter().any(|w| w.contains(needle))
            }
            Term::StorageRead(key) => key.contains(needle),
        }
    }

    /// Does the tree contain any Sha3 node? Used to tell nested mapping
    /// lookups (allowance[a][b]) from single lookups (balance[a]).
    pub fn contains_sha3(&self) -> bool {
        match self.term() {
            Term::Sha3 { .. } => true,
            Term::Concrete(_) | Term::Input(_) => false,
            Term::UnOp(_, x) => x.contains_sha3(),
            Term::BinOp(_, a, b) => a.contains_sha3() || b.contains_sha3(),
            Term::StorageRead(key) => key.contains_sha3(),
        }
    }

    /// Does this term's derivation involve `key`, either directly or via a
    /// load from storage at `key`? Concrete keys only count through a
    /// StorageRead wrapper so that unrelated uses of the same constant do
    /// not match.
    pub fn derives_from_key(&self, key: &SymValue) -> bool {
        if self.contains(&SymValue::storage_read(key.clone())) {
            return true;
        }
        !key.is_concrete() && self.contains(key)
    }
}

impl fmt::Display for SymValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term() {
            Term::Concrete(v) => write!(f, "{v:#x}"),
            Term::Input(name) => write!(f, "{name}"),
            Term::UnOp(UnOpKind::IsZero, x) => write!(f, "iszero({x})"),
            Term::UnOp(UnOpKind::Not, x) => write!(f, "not({x})"),
            Term::BinOp(kind, a, b) => write!(f, "{}({a}, {b})", kind.name()),
            Term::Sha3 { len, words } => {
                write!(f, "sha3[{len}](")?;
                for (i, w) in words.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w}")?;
                }
                write!(f, ")")
            }
            Term::StorageRead(key) => write!(f, "sload({key})"),
        }
    }
}

impl fmt::Debug for SymValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u64) -> SymValue {
        SymValue::concrete_u64(x)
    }

    #[test]
    fn constant_folding_binop() {
        let v = SymValue::binop(BinOpKind::Lt, c(3), c(5));
        assert_eq!(v.as_concrete(), Some(U256::one()));
        let v = SymValue::binop(BinOpKind::Add, c(u64::MAX), c(1));
        assert!(v.is_concrete());
    }

    #[test]
    fn symbolic_binop_not_folded() {
        let v = SymValue::binop(BinOpKind::Add, SymValue::input("x"), c(1));
        assert!(!v.is_concrete());
    }

    #[test]
    fn structural_equality_of_sha3() {
        let caller = SymValue::input("caller");
        let a = SymValue::sha3(c(64), vec![caller.clone(), c(0)]);
        let b = SymValue::sha3(c(64), vec![caller.clone(), c(0)]);
        let other_slot = SymValue::sha3(c(64), vec![caller, c(1)]);
        assert_eq!(a, b);
        assert_ne!(a, other_slot);
    }

    #[test]
    fn concrete_sha3_collapses_to_keccak() {
        let a = SymValue::sha3(c(64), vec![c(7), c(1)]);
        let mut buf = [0u8; 64];
        buf[31] = 7;
        buf[63] = 1;
        let expected = U256::from_big_endian(&keccak256(&buf));
        assert_eq!(a.as_concrete(), Some(expected));
    }

    #[test]
    fn contains_finds_subterms() {
        let key = SymValue::sha3(c(64), vec![SymValue::input("caller"), c(1)]);
        let load = SymValue::storage_read(key.clone());
        let cmp = SymValue::binop(BinOpKind::Lt, load, SymValue::input("calldata_36"));
        let guard = SymValue::unop(UnOpKind::IsZero, cmp);
        assert!(guard.contains(&key));
        assert!(guard.derives_from_key(&key));
        let unrelated = SymValue::sha3(c(64), vec![SymValue::input("caller"), c(2)]);
        assert!(!guard.derives_from_key(&unrelated));
    }

    #[test]
    fn concrete_key_only_matches_through_storage_read() {
        let key = c(3);
        // A bare constant 3 somewhere in the term must not count...
        let bare = SymValue::binop(BinOpKind::Add, c(3), SymValue::input("x"));
        assert!(!bare.derives_from_key(&key));
        // ...but a load from slot 3 does.
        let loaded = SymValue::binop(
            BinOpKind::Lt,
            SymValue::storage_read(key.clone()),
            SymValue::input("x"),
        );
        assert!(loaded.derives_from_key(&key));
    }

    #[test]
    fn nested_sha3_detected() {
        let inner = SymValue::sha3(c(64), vec![SymValue::input("calldata_4"), c(2)]);
        let outer = SymValue::sha3(c(64), vec![SymValue::input("caller"), inner]);
        let Term::Sha3 { words, .. } = outer.term() else {
            panic!("expected sha3");
        };
        assert!(words.iter().any(SymValue::contains_sha3));
        let flat = SymValue::sha3(c(64), vec![SymValue::input("caller"), c(1)]);
        let Term::Sha3 { words, .. } = flat.term() else {
            panic!("expected sha3");
        };
        assert!(!words.iter().any(SymValue::contains_sha3));
    }
}
