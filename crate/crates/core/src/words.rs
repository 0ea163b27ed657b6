//! 256-bit word semantics shared by the concrete interpreter and the
//! symbolic engine's constant folding. All arithmetic wraps modulo 2^256.

use primitive_types::{U256, U512};

pub fn add(a: U256, b: U256) -> U256 {
    a.overflowing_add(b).0
}

pub fn sub(a: U256, b: U256) -> U256 {
    a.overflowing_sub(b).0
}

pub fn mul(a: U256, b: U256) -> U256 {
    a.overflowing_mul(b).0
}

pub fn div(a: U256, b: U256) -> U256 {
    if b.is_zero() {
        U256::zero()
    } else {
        a / b
    }
}

pub fn rem(a: U256, b: U256) -> U256 {
    if b.is_zero() {
        U256::zero()
    } else {
        a % b
    }
}

const SIGN_BIT: usize = 255;

fn is_negative(x: U256) -> bool {
    x.bit(SIGN_BIT)
}

fn twos_neg(x: U256) -> U256 {
    (!x).overflowing_add(U256::one()).0
}

pub fn sdiv(a: U256, b: U256) -> U256 {
    if b.is_zero() {
        return U256::zero();
    }
    let min = U256::one() << SIGN_BIT;
    if a == min && b == U256::MAX {
        // MIN / -1 overflows back to MIN.
        return min;
    }
    let (na, nb) = (is_negative(a), is_negative(b));
    let ua = if na { twos_neg(a) } else { a };
    let ub = if nb { twos_neg(b) } else { b };
    let q = ua / ub;
    if na ^ nb {
        twos_neg(q)
    } else {
        q
    }
}

pub fn smod(a: U256, b: U256) -> U256 {
    if b.is_zero() {
        return U256::zero();
    }
    let (na, nb) = (is_negative(a), is_negative(b));
    let ua = if na { twos_neg(a) } else { a };
    let ub = if nb { twos_neg(b) } else { b };
    let r = ua % ub;
    // Result takes the sign of the dividend.
    if na {
        twos_neg(r)
    } else {
        r
    }
}

pub fn addmod(a: U256, b: U256, m: U256) -> U256 {
    if m.is_zero() {
        return U256::zero();
    }
    let s = U512::from(a) + U512::from(b);
    u512_low(s % U512::from(m))
}

pub fn mulmod(a: U256, b: U256, m: U256) -> U256 {
    if m.is_zero() {
        return U256::zero();
    }
    u512_low(a.full_mul(b) % U512::from(m))
}

fn u512_low(x: U512) -> U256 {
    let mut bytes = [0u8; 64];
    x.to_big_endian(&mut bytes[..]);
    U256::from_big_endian(&bytes[32..])
}

pub fn exp(base: U256, exponent: U256) -> U256 {
    base.overflowing_pow(exponent).0
}

pub fn signextend(byte_pos: U256, x: U256) -> U256 {
    if byte_pos >= U256::from(31u8) {
        return x;
    }
    let bit = byte_pos.as_usize() * 8 + 7;
    let mask = (U256::one() << (bit + 1)) - 1;
    if x.bit(bit) {
        x | !mask
    } else {
        x & mask
    }
}

pub fn bool_word(b: bool) -> U256 {
    if b {
        U256::one()
    } else {
        U256::zero()
    }
}

pub fn lt(a: U256, b: U256) -> U256 {
    bool_word(a < b)
}

pub fn gt(a: U256, b: U256) -> U256 {
    bool_word(a > b)
}

pub fn slt(a: U256, b: U256) -> U256 {
    match (is_negative(a), is_negative(b)) {
        (true, false) => U256::one(),
        (false, true) => U256::zero(),
        _ => bool_word(a < b),
    }
}

pub fn sgt(a: U256, b: U256) -> U256 {
    slt(b, a)
}

pub fn eq(a: U256, b: U256) -> U256 {
    bool_word(a == b)
}

pub fn iszero(a: U256) -> U256 {
    bool_word(a.is_zero())
}

pub fn byte(index: U256, x: U256) -> U256 {
    if index >= U256::from(32u8) {
        return U256::zero();
    }
    let i = index.as_usize();
    U256::from(x.byte(31 - i))
}

pub fn shl(shift: U256, value: U256) -> U256 {
    if shift >= U256::from(256u32) {
        U256::zero()
    } else {
        value << shift.as_usize()
    }
}

pub fn shr(shift: U256, value: U256) -> U256 {
    if shift >= U256::from(256u32) {
        U256::zero()
    } else {
        value >> shift.as_usize()
    }
}

pub fn sar(shift: U256, value: U256) -> U256 {
    let neg = is_negative(value);
    if shift >= U256::from(256u32) {
        return if neg { U256::MAX } else { U256::zero() };
    }
    let s = shift.as_usize();
    if s == 0 {
        return value;
    }
    let shifted = value >> s;
    if neg {
        shifted | (U256::MAX << (256 - s))
    } else {
        shifted
    }
}

/// Word from a 32-byte big-endian slice read at `offset` of `data`,
/// zero-padded beyond the end (CALLDATALOAD semantics).
pub fn read_word(data: &[u8], offset: usize) -> U256 {
    let mut buf = [0u8; 32];
    if offset < data.len() {
        let n = (data.len() - offset).min(32);
        buf[..n].copy_from_slice(&data[offset..offset + n]);
    }
    U256::from_big_endian(&buf)
}

pub fn word_bytes(x: U256) -> [u8; 32] {
    let mut buf = [0u8; 32];
    x.to_big_endian(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: u64) -> U256 {
        U256::from(x)
    }

    #[test]
    fn wrapping_add_sub_mul() {
        assert_eq!(add(U256::MAX, u(1)), U256::zero());
        assert_eq!(sub(U256::zero(), u(1)), U256::MAX);
        assert_eq!(mul(U256::MAX, u(2)), U256::MAX - 1);
    }

    #[test]
    fn division_by_zero_yields_zero() {
        assert_eq!(div(u(10), U256::zero()), U256::zero());
        assert_eq!(rem(u(10), U256::zero()), U256::zero());
        assert_eq!(sdiv(u(10), U256::zero()), U256::zero());
        assert_eq!(smod(u(10), U256::zero()), U256::zero());
    }

    #[test]
    fn signed_ops() {
        let neg1 = U256::MAX;
        let neg2 = sub(U256::zero(), u(2));
        assert_eq!(sdiv(neg2, u(2)), neg1);
        assert_eq!(sdiv(neg2, neg1), u(2));
        assert_eq!(smod(sub(U256::zero(), u(5)), u(3)), sub(U256::zero(), u(2)));
        assert_eq!(slt(neg1, u(0)), u(1));
        assert_eq!(sgt(u(0), neg1), u(1));
    }

    #[test]
    fn sdiv_min_by_neg_one() {
        let min = U256::one() << 255;
        assert_eq!(sdiv(min, U256::MAX), min);
    }

    #[test]
    fn byte_indexing_is_big_endian() {
        let x = U256::from_big_endian(&{
            let mut b = [0u8; 32];
            b[0] = 0xab;
            b[31] = 0xcd;
            b
        });
        assert_eq!(byte(u(0), x), u(0xab));
        assert_eq!(byte(u(31), x), u(0xcd));
        assert_eq!(byte(u(32), x), U256::zero());
    }

    #[test]
    fn shifts() {
        assert_eq!(shl(u(4), u(1)), u(16));
        assert_eq!(shr(u(4), u(16)), u(1));
        assert_eq!(shl(u(256), u(1)), U256::zero());
        assert_eq!(sar(u(1), U256::MAX), U256::MAX);
        assert_eq!(sar(u(1), u(4)), u(2));
        assert_eq!(sar(u(300), U256::MAX), U256::MAX);
        assert_eq!(sar(u(300), u(7)), U256::zero());
    }

    #[test]
    fn signextend_cases() {
        assert_eq!(signextend(u(0), u(0xff)), U256::MAX);
        assert_eq!(signextend(u(0), u(0x7f)), u(0x7f));
        assert_eq!(signextend(u(1), u(0xff)), u(0xff));
        assert_eq!(signextend(u(40), u(0x1234)), u(0x1234));
    }

    #[test]
    fn modular_ops_use_wide_intermediate() {
        assert_eq!(addmod(U256::MAX, U256::MAX, u(10)), exp_addmod_oracle());
        assert_eq!(mulmod(U256::MAX, U256::MAX, u(12)), u(9));
        assert_eq!(addmod(u(5), u(5), U256::zero()), U256::zero());
    }

    // (2^256 - 1) * 2 mod 10: 2^256 mod 10 = 6, so (2*6 - 2) mod 10 = 0.
    fn exp_addmod_oracle() -> U256 {
        U256::zero()
    }

    #[test]
    fn exp_wraps() {
        assert_eq!(exp(u(2), u(256)), U256::zero());
        assert_eq!(exp(u(3), u(4)), u(81));
        assert_eq!(exp(u(0), u(0)), u(1));
    }

    #[test]
    fn read_word_zero_pads() {
        let data = [0x12u8, 0x34];
        let w = read_word(&data, 0);
        assert_eq!(w, U256::from_big_endian(&{
            let mut b = [0u8; 32];
            b[0] = 0x12;
            b[1] = 0x34;
            b
        }));
        assert_eq!(read_word(&data, 5), U256::zero());
    }
}
