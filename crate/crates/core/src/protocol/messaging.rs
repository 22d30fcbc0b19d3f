use std::fmt;

use serde::{Deserialize, Serialize};

use super::{sign, verify, Outcome, PartyState, SignedMessage, VerificationReport};
use crate::error::Result;
use crate::params::Mode;

/// A party's final word on a signed message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
    /// Deterministic mode only: Bob is still waiting for Charlie.
    Pending,
}

impl From<Outcome> for Decision {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Accept => Decision::Accept,
            Outcome::Reject => Decision::Reject,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "ACC",
            Decision::Reject => "REJ",
            Decision::Pending => "PENDING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub mode: Mode,
    pub bob: VerificationReport,
    /// Absent when nothing reached Charlie.
    pub charlie: Option<VerificationReport>,
    pub forwarded: bool,
    pub bob_decision: Decision,
    pub charlie_decision: Decision,
}

/// Messaging phase from the moment Bob receives `sm`.
///
/// `charlie = None` models Charlie being offline.
pub fn deliver(sm: &SignedMessage, bob: &PartyState, charlie: Option<&PartyState>) -> Result<TranscriptRecord> {
    let mode = bob.params.mode();
    if mode.is_deterministic() {
        // Bob forwards before checking anything himself.
        let charlie_report = charlie.map(|c| verify(c, sm)).transpose()?;
        let bob_report = verify(bob, sm)?;
        let charlie_decision = charlie_report
            .as_ref()
            .map_or(Decision::Pending, |r| r.outcome.into());
        let bob_decision = match (bob_report.outcome, charlie_decision) {
            (Outcome::Reject, _) => Decision::Reject,
            (Outcome::Accept, d) => d,
        };
        return Ok(TranscriptRecord {
            mode,
            bob: bob_report,
            forwarded: charlie_report.is_some(),
            charlie: charlie_report,
            bob_decision,
            charlie_decision,
        });
    }
    let bob_report = verify(bob, sm)?;
    let charlie_report = match (bob_report.outcome, charlie) {
        (Outcome::Accept, Some(c)) => Some(verify(c, sm)?),
        _ => None,
    };
    let charlie_decision = charlie_report
        .as_ref()
        .map_or(Decision::Pending, |r| r.outcome.into());
    Ok(TranscriptRecord {
        mode,
        bob_decision: bob_report.outcome.into(),
        bob: bob_report,
        forwarded: charlie_report.is_some(),
        charlie: charlie_report,
        charlie_decision,
    })
}

/// Honest signing followed by delivery to both verifiers.
pub fn run_messaging(
    alice: &PartyState,
    bob: &PartyState,
    charlie: &PartyState,
    message: &[u8],
) -> Result<TranscriptRecord> {
    let sm = sign(alice, message)?;
    deliver(&sm, bob, Some(charlie))
}
