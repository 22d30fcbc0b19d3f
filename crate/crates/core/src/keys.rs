//! Simulated QKD keys and each party's view of them.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::seed::Seed;

pub const KEY_FILE_MAGIC: &[u8; 8] = b"GQADSKEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Alice,
    Bob,
    Charlie,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "Alice",
            Role::Bob => "Bob",
            Role::Charlie => "Charlie",
        })
    }
}

/// An L = n r bit key viewed as n blocks of r bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QkdKey {
    n: u32,
    r: u32,
    bits: BitString,
}

impl QkdKey {
    pub fn new(n: u32, r: u32, bits: BitString) -> Result<Self> {
        let want = n as usize * r as usize;
        if bits.len() != want {
            return Err(Error::LengthMismatch {
                left: bits.len(),
                right: want,
            });
        }
        Ok(Self { n, r, bits })
    }

    /// Uniform key from a seeded CSPRNG, standing in for QKD output.
    pub fn generate(seed: &Seed, n: u32, r: u32) -> Self {
        let bits = BitString::random(&mut seed.rng(), n as usize * r as usize);
        Self { n, r, bits }
    }

    /// Key whose n blocks are pairwise distinct (needs n <= 2^r, r <= 32).
    ///
    /// Toy-scale experiments use this so that distinct private blocks are
    /// distinct search targets, as in the urn model of the forging cost.
    pub fn generate_distinct(seed: &Seed, n: u32, r: u32) -> Result<Self> {
        if r > 32 || u64::from(n) > 1u64 << r {
            return Err(Error::InvalidParams(format!(
                "cannot draw {n} distinct blocks of {r} bits"
            )));
        }
        let mut rng = seed.rng();
        let mut bits = BitString::default();
        if r <= 20 {
            let values = index::sample(&mut rng, 1usize << r, n as usize);
            for v in values.iter() {
                bits.extend(&BitString::from_u64(v as u64, r as usize));
            }
        } else {
            let mut seen = std::collections::HashSet::new();
            while seen.len() < n as usize {
                let block = BitString::random(&mut rng, r as usize);
                if seen.insert(block.clone()) {
                    bits.extend(&block);
                }
            }
        }
        Ok(Self { n, r, bits })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn block(&self, i: u32) -> BitString {
        assert!(i < self.n, "block {i} out of range");
        self.bits
            .slice(i as usize * self.r as usize, self.r as usize)
    }

    pub fn blocks(&self) -> Vec<BitString> {
        (0..self.n).map(|i| self.block(i)).collect()
    }

    /// Binary key file: magic, u32 n, u32 r (little-endian), packed bits.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.bits.as_bytes().len());
        out.extend_from_slice(KEY_FILE_MAGIC);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.r.to_le_bytes());
        out.extend_from_slice(self.bits.as_bytes());
        out
    }

    pub fn to_hex_text(&self) -> String {
        let mut s = hex::encode(self.to_file_bytes());
        s.push('\n');
        s
    }

    /// Parses either the binary layout or its hex text form.
    pub fn from_file_bytes(data: &[u8]) -> Result<Self> {
        if data.starts_with(KEY_FILE_MAGIC) {
            return Self::parse_binary(data);
        }
        let text = std::str::from_utf8(data)
            .map_err(|_| Error::Format("key file is neither binary nor hex text".into()))?;
        let compact: String = text.split_whitespace().collect();
        let bytes = hex::decode(compact).map_err(|e| Error::Format(format!("key hex: {e}")))?;
        if !bytes.starts_with(KEY_FILE_MAGIC) {
            return Err(Error::Format("missing GQADSKEY magic".into()));
        }
        Self::parse_binary(&bytes)
    }

    fn parse_binary(data: &[u8]) -> Result<Self> {
        if data.len() < 16 {
            return Err(Error::Format("truncated key header".into()));
        }
        let n = u32::from_le_bytes(data[8..12].try_into().unwrap());
        let r = u32::from_le_bytes(data[12..16].try_into().unwrap());
        let len = n as usize * r as usize;
        let body = &data[16..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "key body has {} bytes, expected {} for n = {n}, r = {r}",
                body.len(),
                len.div_ceil(8)
            )));
        }
        let bits = BitString::from_bytes(body, len)?;
        if bits.as_bytes() != body {
            return Err(Error::Format("non-zero padding bits in key body".into()));
        }
        Ok(Self { n, r, bits })
    }
}

/// What one party knows about the keys after distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaterial {
    pub role: Role,
    /// Alice: `[k1, k2]`; Bob: `[k1]`; Charlie: `[k2]`.
    pub own_keys: Vec<QkdKey>,
    /// Blocks of the peer verifier's key, by block index.
    pub received_blocks: BTreeMap<u32, BitString>,
}

impl KeyMaterial {
    /// The party's view of k1 || k2 with unknown blocks left empty.
    pub fn concatenated(&self) -> ConcatenatedKey {
        let n = self.own_keys[0].n();
        let mut blocks = vec![None; 2 * n as usize];
        let own_offset = |role: Role| match role {
            Role::Charlie => n as usize,
            _ => 0,
        };
        match self.role {
            Role::Alice => {
                for (k, key) in self.own_keys.iter().enumerate() {
                    for (i, b) in key.blocks().into_iter().enumerate() {
                        blocks[k * n as usize + i] = Some(b);
                    }
                }
            }
            role => {
                let base = own_offset(role);
                for (i, b) in self.own_keys[0].blocks().into_iter().enumerate() {
                    blocks[base + i] = Some(b);
                }
                let peer = n as usize - base;
                for (&i, b) in &self.received_blocks {
                    blocks[peer + i as usize] = Some(b.clone());
                }
            }
        }
        ConcatenatedKey { blocks }
    }
}

/// 2n block slots of k1 || k2; `None` marks a block the holder never saw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcatenatedKey {
    pub blocks: Vec<Option<BitString>>,
}

impl ConcatenatedKey {
    pub fn known_indices(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.as_ref().map(|_| i))
            .collect()
    }

    pub fn block(&self, i: usize) -> Option<&BitString> {
        self.blocks.get(i).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// All 2n blocks concatenated; fails if any block is unknown.
    pub fn to_bits(&self) -> Result<BitString> {
        let mut out = BitString::default();
        for (i, b) in self.blocks.iter().enumerate() {
            let b = b
                .as_ref()
                .ok_or_else(|| Error::InvalidParams(format!("block {i} of k_A is unknown")))?;
            out.extend(b);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn generated_keys_are_reproducible() {
        let s = Seed::from_u64(3);
        assert_eq!(QkdKey::generate(&s, 64, 64), QkdKey::generate(&s, 64, 64));
        assert_eq!(QkdKey::generate(&s, 64, 64).bits().len(), 4096);
    }

    #[test]
    fn distinct_blocks() {
        let k = QkdKey::generate_distinct(&Seed::from_u64(9), 256, 8).unwrap();
        let set: std::collections::HashSet<_> = k.blocks().into_iter().collect();
        assert_eq!(set.len(), 256);
        assert!(QkdKey::generate_distinct(&Seed::from_u64(9), 257, 8).is_err());
    }

    #[test]
    fn key_file_rejects_garbage() {
        assert!(QkdKey::from_file_bytes(b"GQADSKEY\x01\0\0\0").is_err());
        assert!(QkdKey::from_file_bytes(b"nonsense").is_err());
        let mut bytes = QkdKey::generate(&Seed::from_u64(1), 3, 3).to_file_bytes();
        bytes.push(0);
        assert!(QkdKey::from_file_bytes(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn key_file_roundtrip(n in 1u32..20, r in 1u32..70, seed in any::<u64>(), text in any::<bool>()) {
            let key = QkdKey::generate(&Seed::from_u64(seed), n, r);
            let data = if text { key.to_hex_text().into_bytes() } else { key.to_file_bytes() };
            prop_assert_eq!(QkdKey::from_file_bytes(&data).unwrap(), key);
        }
    }
}
