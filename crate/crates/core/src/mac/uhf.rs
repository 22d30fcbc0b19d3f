//! Polynomial universal hash over a prime field.
//!
//! The message is cut into byte chunks, each chunk is read little-endian as
//! a field element (optionally with a 1 bit appended above its top byte, as
//! in Poly1305), and the polynomial is evaluated at the secret point with
//! Horner's rule: `h <- (h + m_i) * s mod p`.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PadRule {
    /// Add `2^(8 * chunk_len)` to every chunk value.
    AppendOneBit,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UhfParams {
    pub prime: BigUint,
    pub chunk_bits: u32,
    pub pad_rule: PadRule,
}

pub(crate) fn poly1305_prime() -> &'static BigUint {
    static P: OnceLock<BigUint> = OnceLock::new();
    P.get_or_init(|| (BigUint::one() << 130u32) - 5u32)
}

impl Default for UhfParams {
    fn default() -> Self {
        Self::poly1305()
    }
}

impl UhfParams {
    pub fn poly1305() -> Self {
        Self {
            prime: poly1305_prime().clone(),
            chunk_bits: 128,
            pad_rule: PadRule::AppendOneBit,
        }
    }

    pub fn is_poly1305(&self) -> bool {
        self.prime == *poly1305_prime()
            && self.chunk_bits == 128
            && self.pad_rule == PadRule::AppendOneBit
    }

    /// Checks the structural invariants, including a Miller-Rabin test of
    /// the modulus.
    pub fn validate(&self) -> Result<()> {
        if self.chunk_bits == 0 || !self.chunk_bits.is_multiple_of(8) {
            return Err(Error::InvalidParams(format!(
                "chunk_bits must be a positive multiple of 8, got {}",
                self.chunk_bits
            )));
        }
        let width = self.chunk_bits as u64 + u64::from(self.pad_rule == PadRule::AppendOneBit);
        if width >= self.prime.bits() {
            return Err(Error::InvalidParams(format!(
                "padded chunk width {width} must be below the {}-bit modulus",
                self.prime.bits()
            )));
        }
        // the default modulus is known prime; skip the costly test for it
        if self.prime != *poly1305_prime() && !is_probable_prime(&self.prime) {
            return Err(Error::InvalidParams("UHF modulus is not prime".into()));
        }
        Ok(())
    }

    /// Bytes needed to encode any field element.
    pub fn element_bytes(&self) -> usize {
        (self.prime.bits() as usize).div_ceil(8)
    }

    fn chunk_value(&self, chunk: &[u8]) -> BigUint {
        let mut v = BigUint::from_bytes_le(chunk);
        if self.pad_rule == PadRule::AppendOneBit {
            v.set_bit(8 * chunk.len() as u64, true);
        }
        v
    }
}

/// Evaluates the hash polynomial of `message` at `point`.
pub fn uhf_eval(message: &[u8], point: &BigUint, params: &UhfParams) -> Result<BigUint> {
    if *point >= params.prime {
        return Err(Error::Domain("secret point must lie in [0, prime)".into()));
    }
    if params.is_poly1305() {
        return Ok(p1305::eval(message, point));
    }
    let chunk = (params.chunk_bits / 8) as usize;
    let mut h = BigUint::zero();
    for c in message.chunks(chunk) {
        h = ((h + params.chunk_value(c)) * point) % &params.prime;
    }
    Ok(h)
}

/// Clamps a 16-byte little-endian value the way Poly1305 clamps `r`.
pub fn clamp_poly1305_point(bytes: &[u8; 16]) -> BigUint {
    let mut b = *bytes;
    for i in [3, 7, 11, 15] {
        b[i] &= 0x0f;
    }
    for i in [4, 8, 12] {
        b[i] &= 0xfc;
    }
    BigUint::from_bytes_le(&b)
}

/// Arithmetic modulo 2^130 - 5 on three 64-bit limbs.
mod p1305 {
    use num_bigint::BigUint;

    type Fe = [u64; 3];
    const MASK_130_TOP: u64 = 0x3;

    fn from_big(v: &BigUint) -> Fe {
        let digits = v.to_u64_digits();
        let mut out = [0u64; 3];
        for (o, d) in out.iter_mut().zip(digits) {
            *o = d;
        }
        out
    }

    fn to_big(v: Fe) -> BigUint {
        BigUint::from_slice(&[
            v[0] as u32,
            (v[0] >> 32) as u32,
            v[1] as u32,
            (v[1] >> 32) as u32,
            v[2] as u32,
        ])
    }

    fn add(a: Fe, b: Fe) -> Fe {
        let (l0, c0) = a[0].overflowing_add(b[0]);
        let (l1, c1a) = a[1].overflowing_add(b[1]);
        let (l1, c1b) = l1.overflowing_add(u64::from(c0));
        let l2 = a[2] + b[2] + u64::from(c1a) + u64::from(c1b);
        [l0, l1, l2]
    }

    /// Folds everything at or above bit 130 back in as `5 * hi`.
    fn fold(t: [u64; 6]) -> Fe {
        let lo = [t[0], t[1], t[2] & MASK_130_TOP];
        // hi = t >> 130
        let hi = [
            (t[2] >> 2) | (t[3] << 62),
            (t[3] >> 2) | (t[4] << 62),
            (t[4] >> 2) | (t[5] << 62),
            t[5] >> 2,
        ];
        // lo + 5 * hi, carried through u128
        let mut carry: u128 = 0;
        let mut acc = [0u64; 5];
        for i in 0..4 {
            let base = if i < 3 { lo[i] as u128 } else { 0 };
            let v = base + 5 * hi[i] as u128 + carry;
            acc[i] = v as u64;
            carry = v >> 64;
        }
        acc[4] = carry as u64;
        if acc[2] >> 2 == 0 && acc[3] == 0 && acc[4] == 0 {
            return [acc[0], acc[1], acc[2]];
        }
        fold([acc[0], acc[1], acc[2], acc[3], acc[4], 0])
    }

    fn mul(a: Fe, b: Fe) -> Fe {
        let mut t = [0u128; 6];
        for i in 0..3 {
            for j in 0..3 {
                let p = a[i] as u128 * b[j] as u128;
                t[i + j] += p & 0xffff_ffff_ffff_ffff;
                t[i + j + 1] += p >> 64;
            }
        }
        let mut out = [0u64; 6];
        let mut carry = 0u128;
        for k in 0..6 {
            let v = t[k] + carry;
            out[k] = v as u64;
            carry = v >> 64;
        }
        fold(out)
    }

    /// Fully reduces a value already below 2^130.
    fn finalize(v: Fe) -> Fe {
        // p = 2^130 - 5; v >= p iff v + 5 >= 2^130
        let g = add(v, [5, 0, 0]);
        if g[2] >> 2 != 0 {
            [g[0], g[1], g[2] & MASK_130_TOP]
        } else {
            v
        }
    }

    pub(super) fn eval(message: &[u8], point: &BigUint) -> BigUint {
        let s = from_big(point);
        let mut h: Fe = [0; 3];
        for chunk in message.chunks(16) {
            let mut block = [0u8; 17];
            block[..chunk.len()].copy_from_slice(chunk);
            block[chunk.len()] = 1;
            let m = [
                u64::from_le_bytes(block[0..8].try_into().unwrap()),
                u64::from_le_bytes(block[8..16].try_into().unwrap()),
                u64::from(block[16]),
            ];
            h = finalize(mul(add(h, m), s));
        }
        to_big(finalize(h))
    }
}

fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let tz = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> tz;
    // first 12 primes are a deterministic witness set below 3.3e24; above
    // that we add pseudo-random witnesses derived from n itself
    let mut witnesses: Vec<BigUint> = [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
        .iter()
        .map(|&w| BigUint::from(w))
        .collect();
    if n.bits() > 80 {
        let mut x = n.clone();
        for _ in 0..20 {
            x = (&x * &x + 0x9e37_79b9u32) % &n_minus_1;
            witnesses.push(&x % (n - 3u32) + &two);
        }
    }
    'outer: for a in witnesses {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..tz {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Naive oracle: sum of m_i * s^(l - i + 1) with each power computed by
    /// modpow, independent of the Horner loops above.
    fn oracle(message: &[u8], point: &BigUint, params: &UhfParams) -> BigUint {
        let chunk = (params.chunk_bits / 8) as usize;
        let chunks: Vec<&[u8]> = message.chunks(chunk).collect();
        let l = chunks.len() as u32;
        let mut acc = BigUint::zero();
        for (i, c) in chunks.iter().enumerate() {
            let mut m = BigUint::from_bytes_le(c);
            if params.pad_rule == PadRule::AppendOneBit {
                m += BigUint::one() << (8 * c.len());
            }
            let e = BigUint::from(l - i as u32);
            acc += m * point.modpow(&e, &params.prime);
        }
        acc % &params.prime
    }

    fn point_from(bytes: &[u8], params: &UhfParams) -> BigUint {
        BigUint::from_bytes_le(bytes) % &params.prime
    }

    #[test]
    fn empty_message_hashes_to_zero() {
        let p = UhfParams::poly1305();
        assert!(uhf_eval(&[], &BigUint::from(12345u32), &p).unwrap().is_zero());
    }

    #[test]
    fn unit_point_sums_padded_chunk() {
        let p = UhfParams::poly1305();
        let m = [0xabu8; 16];
        let expect = (BigUint::from_bytes_le(&m) + (BigUint::one() << 128u32)) % &p.prime;
        assert_eq!(uhf_eval(&m, &BigUint::one(), &p).unwrap(), expect);
    }

    #[test]
    fn three_chunks_match_oracle() {
        let p = UhfParams::poly1305();
        let msg: Vec<u8> = (0u8..45).map(|i| i.wrapping_mul(37).wrapping_add(11)).collect();
        let s = point_from(&[0xfe; 17], &p);
        assert_eq!(uhf_eval(&msg, &s, &p).unwrap(), oracle(&msg, &s, &p));
    }

    // RFC 8439 section 2.5.2: tag = (h + s) mod 2^128 with h the clamped
    // polynomial hash. Checks chunking, padding and clamping end to end.
    #[test]
    fn rfc8439_poly1305_vector() {
        let key = hex::decode("85d6be7857556d337f4452fe42d506a80103808afb0db2fd4abff6af4149f51b").unwrap();
        let msg = b"Cryptographic Forum Research Group";
        let point = clamp_poly1305_point(key[..16].try_into().unwrap());
        let h = uhf_eval(msg, &point, &UhfParams::poly1305()).unwrap();
        let s = BigUint::from_bytes_le(&key[16..]);
        let tag = (h + s) % (BigUint::one() << 128u32);
        let mut bytes = tag.to_bytes_le();
        bytes.resize(16, 0);
        assert_eq!(hex::encode(bytes), "a8061dc1305136c6c22b8baf0c0127a9");
    }

    #[test]
    fn generic_prime_path() {
        let p = UhfParams {
            prime: BigUint::from(4_294_967_311u64),
            chunk_bits: 24,
            pad_rule: PadRule::AppendOneBit,
        };
        p.validate().unwrap();
        let msg = b"seven bytes!";
        let s = BigUint::from(77_777u32);
        assert_eq!(uhf_eval(msg, &s, &p).unwrap(), oracle(msg, &s, &p));
    }

    #[test]
    fn validation_rejects_bad_params() {
        let mut p = UhfParams::poly1305();
        p.prime = (BigUint::one() << 130u32) - 3u32;
        assert!(p.validate().is_err());
        let wide = UhfParams {
            chunk_bits: 136,
            ..UhfParams::poly1305()
        };
        assert!(wide.validate().is_err());
        UhfParams::poly1305().validate().unwrap();
    }

    #[test]
    fn primality() {
        assert!(is_probable_prime(poly1305_prime()));
        assert!(is_probable_prime(&BigUint::from(4_294_967_311u64)));
        // Carmichael number and a product of two 64-bit primes
        assert!(!is_probable_prime(&BigUint::from(561u32)));
        let semi = BigUint::from(18_446_744_073_709_551_557u64) * BigUint::from(18_446_744_073_709_551_533u64);
        assert!(!is_probable_prime(&semi));
    }

    #[test]
    fn point_out_of_range_is_rejected() {
        let p = UhfParams::poly1305();
        assert!(uhf_eval(b"x", &p.prime, &p).is_err());
    }

    proptest! {
        #[test]
        fn fast_path_matches_oracle(msg in proptest::collection::vec(any::<u8>(), 0..80),
                                    seed in proptest::collection::vec(any::<u8>(), 17)) {
            let p = UhfParams::poly1305();
            let s = point_from(&seed, &p);
            prop_assert_eq!(uhf_eval(&msg, &s, &p).unwrap(), oracle(&msg, &s, &p));
        }

        // Without padding the hash is linear in the chunk values: for equal
        // chunk counts, H(m1) + H(m2) = H(chunks of m1 + m2) where the sum is
        // taken per chunk in the field.
        #[test]
        fn unpadded_hash_is_linear(a in proptest::collection::vec(0u8..128, 30),
                                   b in proptest::collection::vec(0u8..128, 30),
                                   seed in any::<u64>()) {
            let p = UhfParams { pad_rule: PadRule::None, ..UhfParams::poly1305() };
            let s = BigUint::from(seed) % &p.prime;
            // byte values below 128 never carry across chunk boundaries
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = (uhf_eval(&a, &s, &p).unwrap() + uhf_eval(&b, &s, &p).unwrap()) % &p.prime;
            prop_assert_eq!(lhs, uhf_eval(&sum, &s, &p).unwrap());
        }
    }
}
