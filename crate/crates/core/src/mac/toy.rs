//! Small-block keyed tag used for exhaustive forgery experiments.
//!
//! For a fixed message the tag is a pseudo-random permutation of the r-bit
//! key space (balanced Feistel network plus cycle walking), so every tag has
//! exactly one key preimage. A correct guess of a key block is therefore
//! recognisable from the tag alone, which is the oracle the trial-and-error
//! forger relies on.

use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::error::{Error, Result};

pub const TOY_MAX_BITS: u32 = 20;
const ROUNDS: usize = 8;

#[derive(Debug, Clone)]
pub struct ToyMac {
    r: u32,
    half: u32,
    round_keys: [u64; ROUNDS],
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ToyMac {
    pub fn new(message: &[u8], r: u32) -> Result<Self> {
        if r > TOY_MAX_BITS {
            return Err(Error::RTooLarge(r));
        }
        if r == 0 {
            return Err(Error::InvalidParams("toy block length must be positive".into()));
        }
        let digest = Sha256::new()
            .chain_update(b"gqads/toy/")
            .chain_update(r.to_le_bytes())
            .chain_update(message)
            .finalize();
        let mut round_keys = [0u64; ROUNDS];
        for (i, k) in round_keys.iter_mut().enumerate() {
            let word = u64::from_le_bytes(digest[(i % 4) * 8..(i % 4) * 8 + 8].try_into().unwrap());
            *k = mix(word ^ (i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
        }
        Ok(Self {
            r,
            half: r.div_ceil(2),
            round_keys,
        })
    }

    pub fn bits(&self) -> u32 {
        self.r
    }

    fn feistel(&self, x: u64) -> u64 {
        let mask = (1u64 << self.half) - 1;
        let (mut left, mut right) = (x >> self.half, x & mask);
        for k in &self.round_keys {
            let f = mix(k ^ right) & mask;
            (left, right) = (right, left ^ f);
        }
        (left << self.half) | right
    }

    /// Tag of the key value `key < 2^r`.
    pub fn tag(&self, key: u64) -> u64 {
        debug_assert!(key < 1 << self.r);
        let mut x = self.feistel(key);
        while x >> self.r != 0 {
            x = self.feistel(x);
        }
        x
    }
}

/// Toy tag of `message` under an r-bit key block.
pub fn toy_mac(message: &[u8], key_block: &BitString, r: u32) -> Result<BitString> {
    let toy = ToyMac::new(message, r)?;
    if key_block.len() != r as usize {
        return Err(Error::LengthMismatch {
            left: key_block.len(),
            right: r as usize,
        });
    }
    Ok(BitString::from_u64(toy.tag(key_block.to_u64()), r as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn deterministic() {
        let k = BitString::from_u64(0x3a, 8);
        assert_eq!(toy_mac(b"m", &k, 8).unwrap(), toy_mac(b"m", &k, 8).unwrap());
    }

    #[test]
    fn rejects_large_r() {
        assert_eq!(ToyMac::new(b"", 21).unwrap_err(), Error::RTooLarge(21));
        assert!(ToyMac::new(b"", 20).is_ok());
    }

    #[test]
    fn one_bit_keys() {
        let tags: Vec<_> = (0..2)
            .map(|k| toy_mac(b"x", &BitString::from_u64(k, 1), 1).unwrap())
            .collect();
        assert!(tags.iter().all(|t| t.len() == 1));
    }

    // Exhaustive sweep over every key: each r-bit value is hit exactly once,
    // so the chi-square statistic against the uniform model is 0.
    #[test]
    fn full_key_sweep_is_uniform() {
        for r in 1..=12u32 {
            let toy = ToyMac::new(b"fixed message", r).unwrap();
            let mut counts = vec![0u32; 1 << r];
            for k in 0..1u64 << r {
                counts[toy.tag(k) as usize] += 1;
            }
            let cells = counts.len() as f64;
            let chi2: f64 = counts.iter().map(|&c| (c as f64 - 1.0).powi(2)).sum();
            assert!(chi2 <= cells - 1.0 + 4.0 * (2.0 * (cells - 1.0)).sqrt());
            assert!(counts.iter().all(|&c| c == 1), "r = {r}");
        }
    }

    // Across messages the tags of one key behave like a random function:
    // colliding pairs among m = 4096 tags in 2^8 cells follow the birthday
    // count C(m, 2) / 256 with variance close to the mean.
    #[test]
    fn tags_across_messages_follow_birthday_statistics() {
        let r = 8;
        let m = 4096u64;
        let key = 0x5c;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for i in 0..m {
            let toy = ToyMac::new(&i.to_le_bytes(), r).unwrap();
            *counts.entry(toy.tag(key)).or_default() += 1;
        }
        let pairs: u64 = counts.values().map(|&c| c * (c.saturating_sub(1)) / 2).sum();
        let expected = (m * (m - 1) / 2) as f64 / 256.0;
        // pair indicators are pairwise uncorrelated under a uniform
        // function, so Var = C(m, 2) q (1 - q) with q = 1/256
        let q = 1.0 / 256.0;
        let sd = ((m * (m - 1) / 2) as f64 * q * (1.0 - q)).sqrt();
        let z = (pairs as f64 - expected) / sd;
        assert!(z.abs() < 4.0, "pairs {pairs}, expected {expected}, z {z}");
    }
}
