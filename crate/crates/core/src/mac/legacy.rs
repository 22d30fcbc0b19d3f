//! Blockwise-hash primitives of the original (legacy) signing mode.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::bits::BitString;
use crate::error::Result;

/// SHAKE256 digest truncated to exactly `out_bits` bits.
pub fn legacy_digest(message: &[u8], out_bits: usize) -> BitString {
    let mut xof = Shake256::default();
    xof.update(message);
    let mut out = vec![0u8; out_bits.div_ceil(8)];
    xof.finalize_xof().read(&mut out);
    BitString::from_bytes(&out, out_bits).expect("buffer sized to out_bits")
}

/// One-time pad: bitwise XOR of equal-length strings.
pub fn otp(data: &BitString, key: &BitString) -> Result<BitString> {
    data.xor(key)
}
