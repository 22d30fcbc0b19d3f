//! Protocol parameters and their validation.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mac::{TagScheme, TOY_MAX_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Digest, one-time pad, then a 2L-bit hash per block.
    LegacyQads,
    /// One MAC tag per key block, probabilistic double-threshold check.
    Gqads,
    /// Two blocks per key; Bob's acceptance waits for Charlie's.
    DeterministicGqads,
}

impl Mode {
    pub fn token(self) -> &'static str {
        match self {
            Mode::LegacyQads => "legacy",
            Mode::Gqads => "gqads",
            Mode::DeterministicGqads => "deterministic",
        }
    }

    pub fn is_deterministic(self) -> bool {
        self == Mode::DeterministicGqads
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legacy" | "qads" | "legacyqads" => Ok(Mode::LegacyQads),
            "gqads" => Ok(Mode::Gqads),
            "deterministic" | "deterministicgqads" => Ok(Mode::DeterministicGqads),
            other => Err(Error::Format(format!("unknown mode `{other}`"))),
        }
    }
}

/// Raw parameter tuple as supplied by a caller.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Blocks per QKD key.
    pub n: u32,
    /// Bits per block.
    pub r: u32,
    /// Blocks each verifier hands to the other (S).
    pub shared: u32,
    pub v_b: u32,
    pub v_c: u32,
    pub mode: Mode,
    pub scheme: TagScheme,
}

impl ProtocolParams {
    /// GQaDS parameters with Bob's threshold at its default n + S and the
    /// default Carter-Wegman suite.
    pub fn gqads(n: u32, r: u32, shared: u32, v_c: u32) -> Self {
        Self {
            n,
            r,
            shared,
            v_b: n + shared,
            v_c,
            mode: Mode::Gqads,
            scheme: TagScheme::default(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_scheme(mut self, scheme: TagScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_v_b(mut self, v_b: u32) -> Self {
        self.v_b = v_b;
        self
    }

    /// Two-block deterministic variant with full thresholds.
    pub fn deterministic(r: u32, shared: u32) -> Self {
        Self::gqads(2, r, shared, 2 + shared).with_mode(Mode::DeterministicGqads)
    }

    pub fn validate(&self) -> Result<ValidatedParams> {
        ValidatedParams::new(self.clone())
    }
}

/// Parameters that passed [`validate_params`], with derived quantities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ProtocolParams", into = "ProtocolParams")]
pub struct ValidatedParams {
    params: ProtocolParams,
    key_bits: u64,
    beta: Ratio<u64>,
    gamma: Ratio<u64>,
}

pub fn validate_params(p: &ProtocolParams) -> Result<ValidatedParams> {
    ValidatedParams::new(p.clone())
}

impl ValidatedParams {
    fn new(params: ProtocolParams) -> Result<Self> {
        let ProtocolParams {
            n,
            r,
            shared,
            v_b,
            v_c,
            mode,
            ref scheme,
        } = params;
        if n == 0 || r == 0 {
            return Err(Error::InvalidParams(format!(
                "n and r must be positive (n = {n}, r = {r})"
            )));
        }
        if shared > n {
            return Err(Error::InvalidShare { shared, n });
        }
        if mode == Mode::DeterministicGqads && n != 2 {
            return Err(Error::InvalidMode(format!(
                "deterministic mode uses exactly n = 2 blocks, got n = {n}"
            )));
        }
        let checkable = n + shared;
        if v_c <= 2 * shared {
            return Err(Error::InvalidThreshold(format!(
                "V_C = {v_c} must exceed 2S = {}; otherwise Charlie ignores his private blocks",
                2 * shared
            )));
        }
        if v_c > checkable {
            return Err(Error::InvalidThreshold(format!(
                "V_C = {v_c} exceeds the n + S = {checkable} blocks Charlie can check"
            )));
        }
        if v_b > checkable {
            return Err(Error::InvalidThreshold(format!(
                "V_B = {v_b} exceeds the n + S = {checkable} blocks Bob can check"
            )));
        }
        if mode != Mode::LegacyQads {
            match scheme {
                TagScheme::CarterWegman(cfg) => cfg.validate()?,
                TagScheme::Toy if r > TOY_MAX_BITS => return Err(Error::RTooLarge(r)),
                TagScheme::Toy => {}
            }
        }
        let key_bits = u64::from(n) * u64::from(r);
        Ok(Self {
            key_bits,
            beta: Ratio::new(u64::from(shared), u64::from(n)),
            // shared < n here because 2S < V_C <= n + S
            gamma: Ratio::new(u64::from(v_c - 2 * shared), u64::from(n - shared)),
            params,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn r(&self) -> u32 {
        self.params.r
    }

    pub fn shared(&self) -> u32 {
        self.params.shared
    }

    pub fn v_b(&self) -> u32 {
        self.params.v_b
    }

    pub fn v_c(&self) -> u32 {
        self.params.v_c
    }

    pub fn mode(&self) -> Mode {
        self.params.mode
    }

    pub fn scheme(&self) -> &TagScheme {
        &self.params.scheme
    }

    /// L = n r.
    pub fn key_bits(&self) -> u64 {
        self.key_bits
    }

    /// S / n.
    pub fn beta(&self) -> Ratio<u64> {
        self.beta
    }

    /// (V_C - 2S) / (n - S), the fraction of Charlie's private blocks that
    /// must match.
    pub fn gamma(&self) -> Ratio<u64> {
        self.gamma
    }

    /// Blocks each verifier can check.
    pub fn checkable_count(&self) -> u32 {
        self.n() + self.shared()
    }

    /// Charlie's blocks unknown to Bob.
    pub fn private_count(&self) -> u32 {
        self.n() - self.shared()
    }

    /// Private blocks a forger must recover, V_C - 2S.
    pub fn required_private(&self) -> u32 {
        self.v_c() - 2 * self.shared()
    }

    /// Fewest corrupted blocks that make Charlie reject, n + S - V_C + 1.
    pub fn e_star(&self) -> u32 {
        self.checkable_count() - self.v_c() + 1
    }

    /// Bits per signature tag.
    pub fn tag_len(&self) -> u64 {
        match self.mode() {
            Mode::LegacyQads => 2 * self.key_bits,
            _ => u64::from(self.scheme().tag_len(self.r())),
        }
    }

    /// Total signature length: 2n tags.
    pub fn signature_bits(&self) -> u64 {
        2 * u64::from(self.n()) * self.tag_len()
    }

    pub fn suite(&self) -> String {
        match self.mode() {
            Mode::LegacyQads => format!("shake256/t{}", 2 * self.key_bits),
            _ => self.scheme().suite(self.r()),
        }
    }

    /// Header line naming every parameter, as used by the signed-message file.
    pub fn header(&self) -> String {
        format!(
            "GQADS1 {} {} {} {} {} {} {}",
            self.mode(),
            self.n(),
            self.r(),
            self.shared(),
            self.v_b(),
            self.v_c(),
            self.suite()
        )
    }

    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.header().as_bytes()).into()
    }

    pub fn fingerprint_hex(&self) -> String {
        hex::encode(&self.fingerprint()[..8])
    }
}

impl TryFrom<ProtocolParams> for ValidatedParams {
    type Error = Error;

    fn try_from(p: ProtocolParams) -> Result<Self> {
        Self::new(p)
    }
}

impl From<ValidatedParams> for ProtocolParams {
    fn from(v: ValidatedParams) -> Self {
        v.params
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::MacConfig;
    use proptest::prelude::*;

    #[test]
    fn sixty_four_by_sixty_four() {
        let v = ProtocolParams::gqads(64, 64, 32, 65).with_v_b(96).validate().unwrap();
        assert_eq!(v.beta(), Ratio::new(1, 2));
        assert_eq!(v.gamma(), Ratio::new(1, 32));
        assert_eq!(v.key_bits(), 4096);
        assert_eq!(v.e_star(), 32);
    }

    #[test]
    fn threshold_at_twice_share_is_rejected() {
        let err = ProtocolParams::gqads(4, 8, 2, 4).with_v_b(6).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidThreshold(_)));
    }

    #[test]
    fn deterministic_two_blocks() {
        let v = ProtocolParams::deterministic(256, 1).validate().unwrap();
        assert_eq!((v.n(), v.v_b(), v.v_c()), (2, 3, 3));
        let bad = ProtocolParams::gqads(4, 256, 1, 5).with_mode(Mode::DeterministicGqads);
        assert!(matches!(bad.validate().unwrap_err(), Error::InvalidMode(_)));
    }

    #[test]
    fn other_rejections() {
        assert_eq!(
            ProtocolParams::gqads(4, 8, 5, 9).validate().unwrap_err(),
            Error::InvalidShare { shared: 5, n: 4 }
        );
        assert!(matches!(
            ProtocolParams::gqads(4, 8, 1, 6).validate().unwrap_err(),
            Error::InvalidThreshold(_)
        ));
        assert!(matches!(
            ProtocolParams::gqads(4, 8, 1, 5).with_v_b(6).validate().unwrap_err(),
            Error::InvalidThreshold(_)
        ));
        assert_eq!(
            ProtocolParams::gqads(4, 21, 1, 5).with_scheme(TagScheme::Toy).validate().unwrap_err(),
            Error::RTooLarge(21)
        );
        assert!(ProtocolParams::gqads(4, 8, 1, 5)
            .with_scheme(TagScheme::CarterWegman(MacConfig::with_tag_len(0)))
            .validate()
            .is_err());
        assert!(ProtocolParams::gqads(0, 8, 0, 1).validate().is_err());
    }

    #[test]
    fn signature_lengths() {
        let legacy = ProtocolParams::gqads(64, 64, 32, 65).with_mode(Mode::LegacyQads);
        assert_eq!(legacy.validate().unwrap().signature_bits(), 1 << 20);
        let gq = ProtocolParams::gqads(64, 64, 32, 65);
        assert_eq!(gq.validate().unwrap().signature_bits(), 1 << 14);
        let det = ProtocolParams::deterministic(256, 1);
        assert_eq!(det.validate().unwrap().signature_bits(), 512);
    }

    fn arb_params() -> impl Strategy<Value = ProtocolParams> {
        (1u32..40, 1u32..300).prop_flat_map(|(n, r)| {
            (0..n).prop_flat_map(move |s| {
                (2 * s + 1..=n + s, 0..=n + s, any::<bool>()).prop_map(move |(v_c, v_b, toy)| {
                    let mut p = ProtocolParams::gqads(n, r, s, v_c).with_v_b(v_b);
                    if toy && r <= 20 {
                        p = p.with_scheme(TagScheme::Toy);
                    }
                    p
                })
            })
        })
    }

    proptest! {
        #[test]
        fn validated_invariants(p in arb_params()) {
            let v = p.validate().unwrap();
            prop_assert!(2 * v.shared() < v.v_c() && v.v_c() <= v.n() + v.shared());
            prop_assert!(v.v_b() <= v.n() + v.shared());
            // gamma (1 - beta) n = V_C - 2S exactly
            let lhs = v.gamma() * (Ratio::from_integer(1) - v.beta()) * Ratio::from_integer(u64::from(v.n()));
            prop_assert_eq!(lhs, Ratio::from_integer(u64::from(v.v_c() - 2 * v.shared())));
        }

        #[test]
        fn serde_roundtrip(p in arb_params()) {
            let v = p.validate().unwrap();
            let json = serde_json::to_string(&v).unwrap();
            prop_assert_eq!(serde_json::from_str::<ValidatedParams>(&json).unwrap(), v);
        }
    }

    #[test]
    fn deserializing_invalid_params_fails() {
        let raw = serde_json::to_string(&ProtocolParams::gqads(4, 8, 2, 4)).unwrap();
        assert!(serde_json::from_str::<ValidatedParams>(&raw).is_err());
    }
}
