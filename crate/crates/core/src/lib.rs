//! Generalized quantum-assisted digital signatures (GQaDS).
//!
//! Simulated QKD keys, Carter-Wegman MAC signing with double-threshold
//! verification, attack simulators, and exact and asymptotic security
//! analysis with the parameter optimizers built on it.

pub mod adversary;
pub mod analysis;
pub mod bits;
pub mod error;
pub mod keys;
pub mod mac;
pub mod params;
pub mod protocol;
pub mod seed;

pub use bits::BitString;
pub use error::{Error, Result};
pub use keys::{ConcatenatedKey, KeyMaterial, QkdKey, Role};
pub use mac::{MacConfig, TagScheme};
pub use params::{validate_params, Mode, ProtocolParams, ValidatedParams};
pub use protocol::{
    Outcome, PartyState, Signature, SignedMessage, TranscriptRecord, VerificationReport,
};
pub use seed::{derive_trial_seed, Seed};
