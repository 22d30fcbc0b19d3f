use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{forgery_attack, repudiation_attack, toy_forgery_params, AttackOutcome};
use crate::analysis::{c_forge, p_rep_given_e};
use crate::error::{Error, Result};
use crate::params::ValidatedParams;
use crate::seed::{derive_trial_seed, Seed};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackSpec {
    /// `errors` defaults to e*.
    Repudiation { params: ValidatedParams, errors: Option<u32> },
    /// `params` already carry the toy block length and toy tags.
    Forgery { params: ValidatedParams, toy_r: u32 },
}

impl AttackSpec {
    pub fn repudiation(params: ValidatedParams, errors: Option<u32>) -> Self {
        AttackSpec::Repudiation { params, errors }
    }

    pub fn forgery(params: &ValidatedParams, toy_r: u32) -> Result<Self> {
        Ok(AttackSpec::Forgery {
            params: toy_forgery_params(params, toy_r)?,
            toy_r,
        })
    }

    pub fn params(&self) -> &ValidatedParams {
        match self {
            AttackSpec::Repudiation { params, .. } | AttackSpec::Forgery { params, .. } => params,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::Repudiation { .. } => "repudiation",
            AttackSpec::Forgery { .. } => "forgery-toy",
        }
    }

    pub fn errors(&self) -> Option<u32> {
        match self {
            AttackSpec::Repudiation { params, errors } => Some(errors.unwrap_or_else(|| params.e_star())),
            AttackSpec::Forgery { .. } => None,
        }
    }

    /// Exact success probability of a repudiation campaign.
    pub fn expected_rate(&self) -> Result<Option<BigRational>> {
        match self {
            AttackSpec::Repudiation { params, .. } => Ok(Some(p_rep_given_e(
                params.n(),
                params.shared(),
                params.v_c(),
                self.errors().expect("repudiation"),
            )?)),
            AttackSpec::Forgery { .. } => Ok(None),
        }
    }

    /// Exact mean cost of a forgery campaign.
    pub fn expected_cost(&self) -> Result<Option<BigRational>> {
        match self {
            AttackSpec::Forgery { params, toy_r } => {
                Ok(Some(c_forge(params.n(), params.shared(), params.v_c(), *toy_r)?))
            }
            AttackSpec::Repudiation { .. } => Ok(None),
        }
    }

    pub fn run_trial(&self, seed: &Seed) -> Result<AttackOutcome> {
        match self {
            AttackSpec::Repudiation { params, .. } => repudiation_attack(seed, params, self.errors().expect("repudiation")),
            AttackSpec::Forgery { params, toy_r } => forgery_attack(seed, params, *toy_r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub attack: String,
    pub trials: u64,
    pub successes: u64,
    pub cost_sum: u128,
    pub cost_sq_sum: u128,
    pub resamples: u64,
    pub params_fingerprint: String,
}

fn z(observed: f64, expected: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        (observed - expected) / sd
    } else if observed == expected {
        0.0
    } else {
        f64::INFINITY.copysign(observed - expected)
    }
}

fn f64_of(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl CampaignResult {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Normal-approximation standard error of the empirical rate.
    pub fn stderr(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn mean_cost(&self) -> BigRational {
        BigRational::new(BigInt::from(self.cost_sum), BigInt::from(self.trials))
    }

    /// Standard error of the mean cost from the sample variance.
    pub fn cost_stderr(&self) -> f64 {
        let n = self.trials as f64;
        if self.trials < 2 {
            return 0.0;
        }
        let mean = self.cost_sum as f64 / n;
        let var = (self.cost_sq_sum as f64 - n * mean * mean) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }

    /// Deviation of the rate from `p` in units of sqrt(p(1-p)/trials).
    pub fn rate_z(&self, p: &BigRational) -> f64 {
        let p = f64_of(p);
        z(self.rate(), p, (p * (1.0 - p) / self.trials as f64).sqrt())
    }

    pub fn cost_z(&self, expected: &BigRational) -> f64 {
        z(f64_of(&self.mean_cost()), f64_of(expected), self.cost_stderr())
    }

    pub fn csv_header() -> &'static str {
        "trial_count,successes,rate,stderr,mean_cost,params_fingerprint"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.11e},{:.11e},{:.11e},{}",
            self.trials,
            self.successes,
            self.rate(),
            self.stderr(),
            f64_of(&self.mean_cost()),
            self.params_fingerprint
        )
    }
}

pub fn run_campaign(spec: &AttackSpec, trials: u64, master_seed: &Seed) -> Result<CampaignResult> {
    run_campaign_with_progress(spec, trials, master_seed, &mut |_, _| {})
}

/// Runs trial i on `derive_trial_seed(master_seed, i)`. `progress(done,
/// total)` is called roughly every 1% of trials.
pub fn run_campaign_with_progress(
    spec: &AttackSpec,
    trials: u64,
    master_seed: &Seed,
    progress: &mut dyn FnMut(u64, u64),
) -> Result<CampaignResult> {
    if trials == 0 {
        return Err(Error::InvalidParams("a campaign needs at least one trial".into()));
    }
    let step = (trials / 100).max(1);
    let mut out = CampaignResult {
        attack: spec.name().to_string(),
        trials,
        successes: 0,
        cost_sum: 0,
        cost_sq_sum: 0,
        resamples: 0,
        params_fingerprint: spec.params().fingerprint_hex(),
    };
    for i in 0..trials {
        let o = spec.run_trial(&derive_trial_seed(master_seed, i))?;
        out.successes += u64::from(o.success);
        out.cost_sum += u128::from(o.cost);
        out.cost_sq_sum += u128::from(o.cost) * u128::from(o.cost);
        out.resamples += o.resamples;
        if (i + 1) % step == 0 || i + 1 == trials {
            progress(i + 1, trials);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProtocolParams;

    fn spec() -> AttackSpec {
        AttackSpec::repudiation(ProtocolParams::gqads(4, 16, 2, 5).validate().unwrap(), None)
    }

    #[test]
    fn single_trial() {
        let r = run_campaign(&spec(), 1, &Seed::from_u64(1)).unwrap();
        assert!(r.successes <= 1);
        assert!(run_campaign(&spec(), 0, &Seed::from_u64(1)).is_err());
    }

    #[test]
    fn reproducible() {
        let a = run_campaign(&spec(), 200, &Seed::from_u64(9)).unwrap();
        let b = run_campaign(&spec(), 200, &Seed::from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.csv_row(), b.csv_row());
    }

    #[test]
    fn csv_row_matches_header() {
        let a = run_campaign(&spec(), 10, &Seed::from_u64(9)).unwrap();
        assert_eq!(
            a.csv_row().split(',').count(),
            CampaignResult::csv_header().split(',').count()
        );
    }

    #[test]
    fn repudiation_rate_matches_exact_value() {
        let s = AttackSpec::repudiation(ProtocolParams::gqads(8, 16, 4, 10).validate().unwrap(), None);
        let exact = s.expected_rate().unwrap().unwrap();
        let r = run_campaign(&s, 20_000, &Seed::from_u64(3)).unwrap();
        assert!(r.rate_z(&exact).abs() < 4.0, "rate {} vs {exact}", r.rate());
    }

    #[test]
    fn forgery_cost_matches_exact_value() {
        let base = ProtocolParams::gqads(8, 64, 4, 9).validate().unwrap();
        let s = AttackSpec::forgery(&base, 8).unwrap();
        let exact = s.expected_cost().unwrap().unwrap();
        assert_eq!(exact, BigRational::new(257.into(), 5.into()));
        let r = run_campaign(&s, 5_000, &Seed::from_u64(4)).unwrap();
        assert!(r.cost_z(&exact).abs() < 4.0);
        assert_eq!(r.successes, 5_000);
    }
}
