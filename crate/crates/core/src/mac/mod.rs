//! Message authentication primitives.
//!
//! [`cw`] is the Carter-Wegman MAC used by the GQaDS modes, [`toy`] the
//! exhaustively searchable tag used by forgery experiments, and [`legacy`]
//! the digest and one-time pad of the blockwise-hash mode.

pub mod cw;
pub mod legacy;
pub mod toy;
pub mod uhf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cw::{mac, BlockKey, KeySplit, MacConfig, PrfId};
pub use legacy::{legacy_digest, otp};
pub use toy::{toy_mac, ToyMac, TOY_MAX_BITS};
pub use uhf::{uhf_eval, PadRule, UhfParams};

use crate::error::{Error, Result};

/// Tag family used by the GQaDS modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagScheme {
    CarterWegman(MacConfig),
    /// r-bit toy tags; only valid for r <= 20.
    Toy,
}

impl Default for TagScheme {
    fn default() -> Self {
        TagScheme::CarterWegman(MacConfig::default())
    }
}

impl TagScheme {
    /// Tag width in bits for blocks of `r` bits.
    pub fn tag_len(&self, r: u32) -> u32 {
        match self {
            TagScheme::CarterWegman(cfg) => cfg.tag_len,
            TagScheme::Toy => r,
        }
    }

    pub fn suite(&self, r: u32) -> String {
        match self {
            TagScheme::CarterWegman(cfg) => cfg.suite(),
            TagScheme::Toy => format!("toy/t{r}"),
        }
    }
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagScheme::CarterWegman(cfg) => write!(f, "{cfg}"),
            TagScheme::Toy => f.write_str("toy"),
        }
    }
}

impl FromStr for TagScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "toy" || s.starts_with("toy/") {
            return Ok(TagScheme::Toy);
        }
        s.parse().map(TagScheme::CarterWegman)
    }
}
