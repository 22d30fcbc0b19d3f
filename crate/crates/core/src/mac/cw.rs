//! Carter-Wegman MAC: `tag = truncate(PRF(prf_key, encode(UHF_s(m))))`.
//!
//! Each key block yields its own secret point `s` and PRF key.

use std::fmt;
use std::str::FromStr;

use hmac::{Hmac, Mac};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use super::uhf::{clamp_poly1305_point, uhf_eval, PadRule, UhfParams};
use crate::bits::BitString;
use crate::error::{Error, Result};

type HmacSha256 = Hmac<Sha256>;

/// Output width of every supported PRF.
pub const PRF_OUTPUT_BITS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrfId {
    HmacSha256,
}

impl PrfId {
    pub fn token(self) -> &'static str {
        match self {
            PrfId::HmacSha256 => "hmacsha256",
        }
    }

    fn eval(self, key: &[u8], input: &[u8]) -> [u8; 32] {
        match self {
            PrfId::HmacSha256 => {
                let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
                mac.update(input);
                mac.finalize().into_bytes().into()
            }
        }
    }
}

/// How one r-bit key block becomes the pair (secret point, PRF key).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeySplit {
    /// `Poly1305Clamp` for 256-bit blocks, `PrfExpand` otherwise.
    Auto,
    /// Low 16 bytes (little-endian, clamped) are the point, high 16 bytes
    /// the PRF key. Needs at least 256 bits.
    Poly1305Clamp,
    /// Counter-mode PRF expansion of the whole block.
    PrfExpand,
}

impl KeySplit {
    fn resolve(self, key_bits: usize) -> KeySplit {
        match self {
            KeySplit::Auto if key_bits == 256 => KeySplit::Poly1305Clamp,
            KeySplit::Auto => KeySplit::PrfExpand,
            other => other,
        }
    }

    fn token(self) -> &'static str {
        match self {
            KeySplit::Auto => "auto",
            KeySplit::Poly1305Clamp => "clamp",
            KeySplit::PrfExpand => "expand",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MacConfig {
    pub uhf: UhfParams,
    pub prf: PrfId,
    pub tag_len: u32,
    pub key_split: KeySplit,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            uhf: UhfParams::poly1305(),
            prf: PrfId::HmacSha256,
            tag_len: 128,
            key_split: KeySplit::Auto,
        }
    }
}

/// Per-block MAC key material.
#[derive(Debug, Clone)]
pub struct BlockKey {
    pub point: BigUint,
    pub prf_key: Vec<u8>,
}

impl MacConfig {
    pub fn with_tag_len(tag_len: u32) -> Self {
        Self {
            tag_len,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tag_len == 0 || self.tag_len > PRF_OUTPUT_BITS {
            return Err(Error::InvalidParams(format!(
                "tag length must be in 1..={PRF_OUTPUT_BITS}, got {}",
                self.tag_len
            )));
        }
        self.uhf.validate()
    }

    pub fn split_key(&self, key_block: &BitString) -> Result<BlockKey> {
        let bits = key_block.len();
        match self.key_split.resolve(bits) {
            KeySplit::Poly1305Clamp => {
                if bits < 256 {
                    return Err(Error::KeyTooShort { bits });
                }
                let bytes = key_block.as_bytes();
                let low: [u8; 16] = bytes[..16].try_into().unwrap();
                let mut point = clamp_poly1305_point(&low);
                if point >= self.uhf.prime {
                    point %= &self.uhf.prime;
                }
                Ok(BlockKey {
                    point,
                    prf_key: bytes[16..32].to_vec(),
                })
            }
            _ => {
                if bits == 0 {
                    return Err(Error::KeyTooShort { bits });
                }
                // the bit length is bound into the input so blocks that pad
                // to the same bytes still expand differently
                let mut input = Vec::with_capacity(32);
                input.extend_from_slice(b"gqads/cw-split/");
                input.extend_from_slice(&(bits as u64).to_le_bytes());
                input.push(0);
                let point_bytes = self.prf.eval(key_block.as_bytes(), &input);
                let last = input.len() - 1;
                input[last] = 1;
                let prf_key = self.prf.eval(key_block.as_bytes(), &input);
                Ok(BlockKey {
                    point: BigUint::from_bytes_le(&point_bytes) % &self.uhf.prime,
                    prf_key: prf_key.to_vec(),
                })
            }
        }
    }

    /// Tag of `message` under an already split block key.
    pub fn tag_with(&self, message: &[u8], key: &BlockKey) -> Result<BitString> {
        let h = uhf_eval(message, &key.point, &self.uhf)?;
        let mut encoded = h.to_bytes_le();
        encoded.resize(self.uhf.element_bytes(), 0);
        let out = self.prf.eval(&key.prf_key, &encoded);
        BitString::from_bytes(&out, self.tag_len as usize)
    }

    /// Short ASCII suite name, e.g. `poly1305-hmacsha256/t128`.
    pub fn suite(&self) -> String {
        let uhf = if self.uhf.is_poly1305() {
            "poly1305".to_string()
        } else {
            let pad = match self.uhf.pad_rule {
                PadRule::AppendOneBit => "pad1",
                PadRule::None => "nopad",
            };
            format!("uhf.{}.{}.{}", self.uhf.prime.to_str_radix(16), self.uhf.chunk_bits, pad)
        };
        let mut s = format!("{uhf}-{}/t{}", self.prf.token(), self.tag_len);
        if self.key_split != KeySplit::Auto {
            s.push_str("/split=");
            s.push_str(self.key_split.token());
        }
        s
    }
}

/// Carter-Wegman tag of `message` under one key block.
pub fn mac(message: &[u8], key_block: &BitString, cfg: &MacConfig) -> Result<BitString> {
    let key = cfg.split_key(key_block)?;
    cfg.tag_with(message, &key)
}

impl fmt::Display for MacConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.suite())
    }
}

impl FromStr for MacConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("unrecognised MAC suite `{s}`"));
        let mut parts = s.split('/');
        let head = parts.next().ok_or_else(bad)?;
        let tag = parts.next().ok_or_else(bad)?;
        let split = match parts.next() {
            None => KeySplit::Auto,
            Some("split=auto") => KeySplit::Auto,
            Some("split=clamp") => KeySplit::Poly1305Clamp,
            Some("split=expand") => KeySplit::PrfExpand,
            Some(_) => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        let tag_len = tag
            .strip_prefix('t')
            .and_then(|t| t.parse::<u32>().ok())
            .ok_or_else(bad)?;
        let (uhf_tok, prf_tok) = head.rsplit_once('-').ok_or_else(bad)?;
        let prf = match prf_tok {
            "hmacsha256" => PrfId::HmacSha256,
            _ => return Err(bad()),
        };
        let uhf = if uhf_tok == "poly1305" {
            UhfParams::poly1305()
        } else {
            let f: Vec<&str> = uhf_tok.split('.').collect();
            if f.len() != 4 || f[0] != "uhf" {
                return Err(bad());
            }
            UhfParams {
                prime: BigUint::parse_bytes(f[1].as_bytes(), 16).ok_or_else(bad)?,
                chunk_bits: f[2].parse().map_err(|_| bad())?,
                pad_rule: match f[3] {
                    "pad1" => PadRule::AppendOneBit,
                    "nopad" => PadRule::None,
                    _ => return Err(bad()),
                },
            }
        };
        let cfg = MacConfig {
            uhf,
            prf,
            tag_len,
            key_split: split,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn deterministic_and_exact_length() {
        let cfg = MacConfig::default();
        let key = BitString::from_bytes(&[7u8; 8], 64).unwrap();
        let a = mac(b"hello", &key, &cfg).unwrap();
        assert_eq!(a, mac(b"hello", &key, &cfg).unwrap());
        assert_eq!(a.len(), 128);
        let short = MacConfig::with_tag_len(40);
        assert_eq!(mac(b"", &key, &short).unwrap().len(), 40);
    }

    /// Schoolbook reference for the r = 256 split: clamp, evaluate the
    /// polynomial term by term with plain big integers, encode as 17 bytes
    /// and feed HMAC-SHA256.
    #[test]
    fn poly1305_split_matches_reference() {
        let key_bytes: Vec<u8> = (0u8..32).map(|i| i.wrapping_mul(29).wrapping_add(3)).collect();
        let key = BitString::from_bytes(&key_bytes, 256).unwrap();
        let msg = b"a fixed forty-one byte message for tests";

        let mut low = key_bytes[..16].to_vec();
        for i in [3, 7, 11, 15] {
            low[i] &= 15;
        }
        for i in [4, 8, 12] {
            low[i] &= 252;
        }
        let s = BigUint::from_bytes_le(&low);
        let p = (BigUint::one() << 130u32) - 5u32;
        let chunks: Vec<&[u8]> = msg.chunks(16).collect();
        let mut h = BigUint::zero();
        for (i, c) in chunks.iter().enumerate() {
            let m = BigUint::from_bytes_le(c) + (BigUint::one() << (8 * c.len()));
            let mut term = m;
            for _ in 0..(chunks.len() - i) {
                term = term * &s % &p;
            }
            h = (h + term) % &p;
        }
        let mut enc = h.to_bytes_le();
        enc.resize(17, 0);
        let mut prf = HmacSha256::new_from_slice(&key_bytes[16..]).unwrap();
        prf.update(&enc);
        let expect: [u8; 32] = prf.finalize().into_bytes().into();

        let tag = mac(msg, &key, &MacConfig::default()).unwrap();
        assert_eq!(tag.as_bytes(), &expect[..16]);
    }

    #[test]
    fn clamp_split_needs_256_bits() {
        let cfg = MacConfig {
            key_split: KeySplit::Poly1305Clamp,
            ..MacConfig::default()
        };
        let key = BitString::zeros(128);
        assert_eq!(mac(b"m", &key, &cfg).unwrap_err(), Error::KeyTooShort { bits: 128 });
    }

    // Flipping one message bit should flip about half of the 128 tag bits.
    // Over 10^4 keys the mean Hamming distance must be within 5% of 64.
    #[test]
    fn single_bit_avalanche() {
        let cfg = MacConfig::default();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let trials = 10_000;
        let mut total = 0usize;
        for _ in 0..trials {
            let key = BitString::random(&mut rng, 64);
            let mut msg = [0u8; 24];
            rng.fill(&mut msg);
            let a = mac(&msg, &key, &cfg).unwrap();
            let bit = rng.gen_range(0..msg.len() * 8);
            msg[bit / 8] ^= 1 << (bit % 8);
            let b = mac(&msg, &key, &cfg).unwrap();
            total += a.hamming(&b).unwrap();
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 64.0).abs() < 0.05 * 64.0, "mean flips {mean}");
    }

    #[test]
    fn suite_strings_roundtrip() {
        let default = MacConfig::default();
        assert_eq!(default.suite(), "poly1305-hmacsha256/t128");
        for cfg in [
            default.clone(),
            MacConfig::with_tag_len(64),
            MacConfig {
                key_split: KeySplit::PrfExpand,
                ..MacConfig::default()
            },
            MacConfig {
                uhf: UhfParams {
                    prime: BigUint::from(4_294_967_311u64),
                    chunk_bits: 24,
                    pad_rule: PadRule::None,
                },
                ..MacConfig::default()
            },
        ] {
            assert_eq!(cfg.suite().parse::<MacConfig>().unwrap(), cfg);
        }
        assert!("poly1305-md5/t128".parse::<MacConfig>().is_err());
        assert!("poly1305-hmacsha256/t999".parse::<MacConfig>().is_err());
    }
}
