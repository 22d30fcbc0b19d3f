use std::collections::BTreeMap;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keys::{ConcatenatedKey, KeyMaterial, QkdKey, Role};
use crate::mac::TagScheme;
use crate::params::{Mode, ValidatedParams};
use crate::seed::Seed;

/// One party after the distribution phase. Immutable from then on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyState {
    pub role: Role,
    pub params: ValidatedParams,
    pub keys: KeyMaterial,
    /// Indices of the party's own key blocks sent to the peer verifier
    /// (sorted; empty for Alice).
    pub shared_out_indices: Vec<u32>,
    pub rng_seed: Seed,
}

impl PartyState {
    pub fn concatenated_key(&self) -> ConcatenatedKey {
        self.keys.concatenated()
    }

    /// Signature block indices this party can recompute.
    pub fn checkable(&self) -> Vec<usize> {
        self.concatenated_key().known_indices()
    }
}

/// Simulated QKD plus the verifier-to-verifier block exchange.
pub fn distribute(seed: &Seed, params: &ValidatedParams) -> Result<(PartyState, PartyState, PartyState)> {
    let (n, r) = (params.n(), params.r());
    // toy tags are searched exhaustively, so keep blocks distinct there
    let toy = params.mode() != Mode::LegacyQads && *params.scheme() == TagScheme::Toy;
    let gen = |label: &str| {
        let s = seed.derive(label);
        if toy {
            QkdKey::generate_distinct(&s, n, r)
        } else {
            Ok(QkdKey::generate(&s, n, r))
        }
    };
    let k1 = gen("qkd/k1")?;
    let k2 = gen("qkd/k2")?;
    distribute_with_keys(seed, params, k1, k2)
}

/// Distribution phase over caller-supplied QKD keys; `seed` drives only the
/// verifiers' share selections.
pub fn distribute_with_keys(
    seed: &Seed,
    params: &ValidatedParams,
    k1: QkdKey,
    k2: QkdKey,
) -> Result<(PartyState, PartyState, PartyState)> {
    let (n, r, s) = (params.n(), params.r(), params.shared());
    for k in [&k1, &k2] {
        if k.n() != n || k.r() != r {
            return Err(Error::InvalidParams(format!(
                "key has shape n = {}, r = {}, parameters need n = {n}, r = {r}",
                k.n(),
                k.r()
            )));
        }
    }
    let bob_seed = seed.derive("party/bob");
    let charlie_seed = seed.derive("party/charlie");
    let pick = |party: &Seed| {
        let mut idx: Vec<u32> = index::sample(&mut party.derive("share").rng(), n as usize, s as usize)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        idx.sort_unstable();
        idx
    };
    let bob_out = pick(&bob_seed);
    let charlie_out = pick(&charlie_seed);

    let bob_received: BTreeMap<u32, _> = charlie_out.iter().map(|&i| (i, k2.block(i))).collect();
    let charlie_received: BTreeMap<u32, _> = bob_out.iter().map(|&i| (i, k1.block(i))).collect();

    let alice = PartyState {
        role: Role::Alice,
        params: params.clone(),
        keys: KeyMaterial {
            role: Role::Alice,
            own_keys: vec![k1.clone(), k2.clone()],
            received_blocks: BTreeMap::new(),
        },
        shared_out_indices: Vec::new(),
        rng_seed: seed.derive("party/alice"),
    };
    let bob = PartyState {
        role: Role::Bob,
        params: params.clone(),
        keys: KeyMaterial {
            role: Role::Bob,
            own_keys: vec![k1],
            received_blocks: bob_received,
        },
        shared_out_indices: bob_out,
        rng_seed: bob_seed,
    };
    let charlie = PartyState {
        role: Role::Charlie,
        params: params.clone(),
        keys: KeyMaterial {
            role: Role::Charlie,
            own_keys: vec![k2],
            received_blocks: charlie_received,
        },
        shared_out_indices: charlie_out,
        rng_seed: charlie_seed,
    };
    Ok((alice, bob, charlie))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProtocolParams;
    use std::collections::BTreeSet;

    fn params(n: u32, s: u32) -> ValidatedParams {
        ProtocolParams::gqads(n, 16, s, 2 * s + 1).validate().unwrap()
    }

    #[test]
    fn block_counts_after_distribution() {
        let (alice, bob, charlie) = distribute(&Seed::from_u64(1), &params(4, 2)).unwrap();
        assert_eq!(alice.keys.own_keys.len(), 2);
        assert!(alice.keys.received_blocks.is_empty());
        assert_eq!(bob.keys.received_blocks.len(), 2);
        assert_eq!(charlie.keys.received_blocks.len(), 2);
        assert_eq!(bob.checkable().len(), 6);
        assert_eq!(charlie.checkable().len(), 6);
        assert_eq!(alice.checkable().len(), 8);
    }

    #[test]
    fn no_share_means_no_exchange() {
        let (_, bob, charlie) = distribute(&Seed::from_u64(2), &params(4, 0)).unwrap();
        assert!(bob.keys.received_blocks.is_empty());
        assert_eq!(bob.checkable(), vec![0, 1, 2, 3]);
        assert_eq!(charlie.checkable(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn checkable_sets_follow_the_exchange() {
        let p = params(16, 5);
        for seed in 0..50 {
            let (alice, bob, charlie) = distribute(&Seed::from_u64(seed), &p).unwrap();
            let bob_set: BTreeSet<usize> = bob.checkable().into_iter().collect();
            let charlie_set: BTreeSet<usize> = charlie.checkable().into_iter().collect();
            let expect_bob: BTreeSet<usize> = (0..16)
                .chain(charlie.shared_out_indices.iter().map(|&j| 16 + j as usize))
                .collect();
            assert_eq!(bob_set, expect_bob);
            assert_eq!(charlie_set.intersection(&bob_set).count(), 10);
            // received blocks agree with Alice's copy
            let ka = alice.concatenated_key();
            for i in bob_set {
                assert_eq!(bob.concatenated_key().block(i), ka.block(i));
            }
        }
    }

    // Each index of k2 lands in Bob's received set with probability S/n = 1/2.
    // Binomial(10^5, 1/2) has sd 158; allow 4 sd.
    #[test]
    fn share_selection_is_uniform() {
        let p = params(8, 4);
        let trials = 100_000u64;
        let mut counts = [0u64; 8];
        for t in 0..trials {
            let (_, bob, _) = distribute_with_keys(
                &Seed::from_u64(t),
                &p,
                QkdKey::generate(&Seed::default(), 8, 16),
                QkdKey::generate(&Seed::default(), 8, 16),
            )
            .unwrap();
            for &i in bob.keys.received_blocks.keys() {
                counts[i as usize] += 1;
            }
        }
        let sd = (trials as f64 * 0.25).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 / 2.0).abs() < 4.0 * sd, "count {c}");
        }
    }

    #[test]
    fn rejects_mis_shaped_keys() {
        let p = params(4, 1);
        let bad = QkdKey::generate(&Seed::default(), 4, 8);
        let good = QkdKey::generate(&Seed::default(), 4, 16);
        assert!(distribute_with_keys(&Seed::default(), &p, bad, good).is_err());
    }
}
