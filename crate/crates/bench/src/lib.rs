//! Shared fixtures for the criterion benches.

use gqads_core::{Mode, ProtocolParams, ValidatedParams};

/// Parameter sets timed by the protocol benches, with a short label each.
pub fn protocol_fixtures() -> Vec<(&'static str, ValidatedParams)> {
    [
        ("gqads_n64_r64", ProtocolParams::gqads(64, 64, 32, 65)),
        ("legacy_n64_r64", ProtocolParams::gqads(64, 64, 32, 65).with_mode(Mode::LegacyQads)),
        ("deterministic_r256", ProtocolParams::deterministic(256, 1)),
    ]
    .into_iter()
    .map(|(name, p)| (name, p.validate().expect("fixture parameters are valid")))
    .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_validate() {
        assert_eq!(super::protocol_fixtures().len(), 3);
    }
}
