//! Attack strategies and the seeded Monte Carlo campaign runner.

mod campaign;

use std::collections::HashMap;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use campaign::{run_campaign, run_campaign_with_progress, AttackSpec, CampaignResult};

use crate::analysis::c_forge;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mac::{TagScheme, TOY_MAX_BITS};
use crate::params::{Mode, ValidatedParams};
use crate::protocol::{
    deliver, distribute, sign, verify, BlockTagger, Decision, Outcome, Signature, SignedMessage,
};
use crate::seed::Seed;

pub const ATTACK_MESSAGE: &[u8] = b"transfer 100 to bob";
const FORGED_SUFFIX: &[u8] = b" (amended)";
const MAX_RESAMPLES: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub success: bool,
    pub bob_outcome: Decision,
    /// None when the signature never reached Charlie.
    pub charlie_outcome: Option<Outcome>,
    /// Forgery: candidate key values tested. Repudiation: blocks corrupted.
    pub cost: u64,
    /// Corruptions redrawn because the tag did not change.
    pub resamples: u64,
}

/// Alice corrupts `e` blocks of k2 at uniformly random positions and hopes
/// Bob accepts while Charlie rejects.
///
/// Positions come from one shuffle of 0..n, so runs that share a seed
/// corrupt nested sets as `e` grows.
pub fn repudiation_attack(seed: &Seed, params: &ValidatedParams, e: u32) -> Result<AttackOutcome> {
    repudiation_attack_with(seed, params, e, ATTACK_MESSAGE)
}

pub fn repudiation_attack_with(
    seed: &Seed,
    params: &ValidatedParams,
    e: u32,
    message: &[u8],
) -> Result<AttackOutcome> {
    if e == 0 {
        return Err(Error::EEqualsZero);
    }
    let n = params.n();
    if e > n {
        return Err(Error::InvalidParams(format!("cannot corrupt {e} of {n} blocks")));
    }
    let (alice, bob, charlie) = distribute(seed, params)?;
    let mut rng = alice.rng_seed.derive("attack/repudiation").rng();
    let mut order: Vec<u32> = (0..n).collect();
    order.shuffle(&mut rng);
    let flips: Vec<usize> = (0..n).map(|_| rng.gen_range(0..params.r() as usize)).collect();

    let mut sm = sign(&alice, message)?;
    let tagger = BlockTagger::new(params, message)?;
    let key = alice.concatenated_key();
    let mut resamples = 0;
    for &j in &order[..e as usize] {
        let idx = (n + j) as usize;
        let block = key.block(idx).expect("Alice knows every block");
        let mut bit = flips[j as usize];
        for attempt in 0.. {
            let mut bad = block.clone();
            bad.flip(bit);
            let tag = tagger.tag(idx, &bad)?;
            if tag != sm.signature.tags[idx] || attempt == MAX_RESAMPLES {
                sm.signature.tags[idx] = tag;
                break;
            }
            resamples += 1;
            bit = rng.gen_range(0..params.r() as usize);
        }
    }
    let t = deliver(&sm, &bob, Some(&charlie))?;
    let charlie_outcome = t.charlie.as_ref().map(|r| r.outcome);
    Ok(AttackOutcome {
        success: t.bob_decision == Decision::Accept && charlie_outcome == Some(Outcome::Reject),
        bob_outcome: t.bob_decision,
        charlie_outcome,
        cost: u64::from(e),
        resamples,
    })
}

/// Parameters of a forgery experiment: `params` with r replaced by `toy_r`
/// and toy tags.
pub fn toy_forgery_params(params: &ValidatedParams, toy_r: u32) -> Result<ValidatedParams> {
    if toy_r > TOY_MAX_BITS {
        return Err(Error::RTooLarge(toy_r));
    }
    let mut p = params.params().clone();
    p.r = toy_r;
    p.scheme = TagScheme::Toy;
    if p.mode == Mode::LegacyQads {
        p.mode = Mode::Gqads;
    }
    p.validate()
}

/// Bob searches the key space of Charlie's private blocks against Alice's
/// genuine tags until he holds k = V_C - 2S of them, then signs a new
/// message with every block he knows.
///
/// One uniform permutation of all 2^r values is walked per trial and every
/// candidate is checked against all still-unknown private tags, which is the
/// urn of the expected-cost formula: K marked values among M = 2^r.
pub fn forgery_attack(seed: &Seed, params: &ValidatedParams, toy_r: u32) -> Result<AttackOutcome> {
    let params = toy_forgery_params(params, toy_r)?;
    let (n, k) = (params.n(), params.required_private());
    let (alice, bob, charlie) = distribute(seed, &params)?;
    let genuine = sign(&alice, ATTACK_MESSAGE)?;

    let bob_key = bob.concatenated_key();
    let mut targets: HashMap<u64, usize> = (0..n as usize)
        .map(|j| n as usize + j)
        .filter(|&i| bob_key.block(i).is_none())
        .map(|i| (genuine.signature.tags[i].to_u64(), i))
        .collect();
    let tagger = BlockTagger::new(&params, ATTACK_MESSAGE)?;
    let BlockTagger::Toy(toy) = &tagger else {
        unreachable!("forgery runs on toy tags")
    };

    let mut rng = bob.rng_seed.derive("attack/forgery").rng();
    let mut values: Vec<u32> = (0..1u32 << toy_r).collect();
    let mut recovered: Vec<(usize, BitString)> = Vec::new();
    let mut cost = 0u64;
    // lazy Fisher-Yates: position t is fixed only once it is tested
    for t in 0..values.len() {
        if recovered.len() as u32 == k {
            break;
        }
        let pick = rng.gen_range(t..values.len());
        values.swap(t, pick);
        let candidate = u64::from(values[t]);
        cost += 1;
        if let Some(i) = targets.remove(&toy.tag(candidate)) {
            recovered.push((i, BitString::from_u64(candidate, toy_r as usize)));
        }
    }

    let mut forged_msg = ATTACK_MESSAGE.to_vec();
    forged_msg.extend_from_slice(FORGED_SUFFIX);
    let forged_tagger = BlockTagger::new(&params, &forged_msg)?;
    let mut known = bob_key.blocks.clone();
    for (i, b) in recovered {
        known[i] = Some(b);
    }
    let tags = known
        .iter()
        .enumerate()
        .map(|(i, b)| match b {
            Some(b) => forged_tagger.tag(i, b),
            None => Ok(genuine.signature.tags[i].clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    let forged = SignedMessage {
        message: forged_msg,
        signature: Signature {
            tags,
            tag_len: params.tag_len(),
            mode: params.mode(),
        },
        params_fingerprint: params.fingerprint(),
    };
    let charlie_report = verify(&charlie, &forged)?;
    let bob_report = verify(&bob, &forged)?;
    Ok(AttackOutcome {
        success: charlie_report.outcome == Outcome::Accept,
        bob_outcome: bob_report.outcome.into(),
        charlie_outcome: Some(charlie_report.outcome),
        cost,
        resamples: 0,
    })
}

/// Expected forging cost at full size, where simulation is out of reach.
pub fn forgery_analytical(params: &ValidatedParams) -> Result<BigRational> {
    c_forge(params.n(), params.shared(), params.v_c(), params.r())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProtocolParams;

    fn p(n: u32, r: u32, s: u32, v_c: u32) -> ValidatedParams {
        ProtocolParams::gqads(n, r, s, v_c).validate().unwrap()
    }

    #[test]
    fn zero_errors_is_rejected() {
        assert_eq!(repudiation_attack(&Seed::default(), &p(4, 64, 2, 5), 0).unwrap_err(), Error::EEqualsZero);
    }

    #[test]
    fn too_few_errors_never_succeed() {
        let params = p(8, 64, 2, 8);
        for e in 1..=params.e_star() - 1 {
            for t in 0..50 {
                let o = repudiation_attack(&Seed::from_u64(t), &params, e).unwrap();
                assert!(!o.success);
                if o.bob_outcome == Decision::Accept {
                    assert_eq!(o.charlie_outcome, Some(Outcome::Accept));
                }
            }
        }
    }

    #[test]
    fn no_sharing_means_certain_repudiation() {
        let params = p(6, 64, 0, 4);
        for t in 0..100 {
            assert!(repudiation_attack(&Seed::from_u64(t), &params, params.e_star()).unwrap().success);
        }
    }

    #[test]
    fn more_errors_never_help_on_coupled_seeds() {
        let params = p(10, 16, 3, 10);
        for t in 0..300 {
            let seed = Seed::from_u64(t);
            let mut last = true;
            for e in params.e_star()..=10 {
                let s = repudiation_attack(&seed, &params, e).unwrap().success;
                assert!(!s || last, "trial {t}, e {e}");
                last = s;
            }
        }
    }

    #[test]
    fn forgery_is_accepted_by_charlie() {
        let params = p(8, 64, 4, 9);
        for t in 0..50 {
            let o = forgery_attack(&Seed::from_u64(t), &params, 8).unwrap();
            assert!(o.success);
            assert_eq!(o.bob_outcome, Decision::Accept);
            assert!(o.cost >= 1 && o.cost <= 256);
        }
    }

    #[test]
    fn all_green_urn_costs_exactly_k() {
        // S = 0, n = 2^r: every value is one of Charlie's private blocks
        let params = p(4, 64, 0, 4);
        for t in 0..20 {
            assert_eq!(forgery_attack(&Seed::from_u64(t), &params, 2).unwrap().cost, 4);
        }
    }

    #[test]
    fn forgery_limits() {
        assert_eq!(forgery_attack(&Seed::default(), &p(8, 64, 4, 9), 21).unwrap_err(), Error::RTooLarge(21));
        assert_eq!(
            forgery_analytical(&p(8, 8, 4, 9)).unwrap(),
            BigRational::new(257.into(), 5.into())
        );
    }
}
