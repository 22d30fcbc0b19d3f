//! Three-party signing protocol: key distribution, signing, double-threshold
//! verification and the messaging phase.

mod messaging;
mod party;
mod signing;
mod wire;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use messaging::{deliver, run_messaging, Decision, TranscriptRecord};
pub use party::{distribute, distribute_with_keys, PartyState};
pub use signing::{sign, sign_with_key, verify, BlockTagger};
pub use wire::{decode_signed_message, encode_signed_message};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::keys::Role;
use crate::params::Mode;

/// 2n tags, one per block of k1 || k2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub tags: Vec<BitString>,
    pub tag_len: u64,
    pub mode: Mode,
}

impl Signature {
    pub fn bit_len(&self) -> u64 {
        self.tags.iter().map(|t| t.len() as u64).sum()
    }

    pub fn to_bits(&self) -> BitString {
        BitString::concat(&self.tags)
    }

    pub fn to_hex(&self) -> String {
        self.to_bits().to_hex()
    }

    pub fn from_hex(text: &str, count: usize, tag_len: u64, mode: Mode) -> Result<Self> {
        let bits = BitString::from_hex(text, count * tag_len as usize)?;
        Ok(Self {
            tags: bits.chunks(tag_len as usize),
            tag_len,
            mode,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedMessage {
    pub message: Vec<u8>,
    pub signature: Signature,
    pub params_fingerprint: [u8; 32],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Accept,
    Reject,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Accept => "ACC",
            Outcome::Reject => "REJ",
        })
    }
}

/// Result of one verifier's block-by-block comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verifier: Role,
    /// Indices into the 2n signature blocks this verifier can recompute.
    pub checkable: Vec<usize>,
    /// One entry per signature block; always false outside `checkable`.
    pub matches: Vec<bool>,
    pub match_count: u32,
    pub threshold: u32,
    pub outcome: Outcome,
}

impl VerificationReport {
    pub fn mismatches(&self) -> Vec<usize> {
        self.checkable
            .iter()
            .copied()
            .filter(|&i| !self.matches[i])
            .collect()
    }

    pub(crate) fn new(verifier: Role, checkable: Vec<usize>, matches: Vec<bool>, threshold: u32) -> Self {
        let match_count = checkable.iter().filter(|&&i| matches[i]).count() as u32;
        let outcome = if match_count >= threshold {
            Outcome::Accept
        } else {
            Outcome::Reject
        };
        Self {
            verifier,
            checkable,
            matches,
            match_count,
            threshold,
            outcome,
        }
    }
}

fn role_error(expected: &str, got: Role) -> Error {
    Error::InvalidParams(format!("expected {expected}, got {got}"))
}
