//! Threshold and block-count optimisation: γ*, n_opt, asymmetric targets.
//!
//! Every search runs over integer S and V_C, so γ moves in steps of
//! 1/(n-S). Ties go to the smaller V_C, then the smaller S, then the
//! smaller n.

use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::asymptotic::{beta_star, log2_p_forge_approx, log2_p_rep_approx, Regime};
use super::exact::{binomial, log2_rational, p_forge, p_rep_exact, SecurityFigures};
use crate::error::{Error, Result};

/// How the share count S is tied to n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BetaRule {
    /// S = floor(n/2).
    Half,
    /// Only pairs with S = round(β*(γ) n).
    BetaStar,
    /// Every S in [0, n).
    Free,
}

impl FromStr for BetaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" => Ok(BetaRule::Half),
            "beta-star" | "betastar" | "beta*" => Ok(BetaRule::BetaStar),
            "free" => Ok(BetaRule::Free),
            other => Err(Error::Format(format!("unknown beta rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for BetaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BetaRule::Half => "half",
            BetaRule::BetaStar => "beta-star",
            BetaRule::Free => "free",
        })
    }
}

/// One exactly evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub n: u32,
    pub r: u32,
    pub shared: u32,
    pub v_c: u32,
    pub gamma: Ratio<u64>,
    pub p_rep: BigRational,
    pub p_forge: BigRational,
    /// max{P_R, α P_F}; α = 1 unless weighted.
    pub objective: BigRational,
}

impl Candidate {
    pub fn beta(&self) -> f64 {
        f64::from(self.shared) / f64::from(self.n)
    }

    pub fn log2_objective(&self) -> f64 {
        log2_rational(&self.objective)
    }
}

/// The same search driven by the Stirling estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxCandidate {
    pub shared: u32,
    pub v_c: u32,
    pub gamma: Ratio<u64>,
    pub log2_p_rep: f64,
    pub log2_p_forge: f64,
}

impl ApproxCandidate {
    pub fn log2_max(&self) -> f64 {
        self.log2_p_rep.max(self.log2_p_forge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStar {
    pub rule: BetaRule,
    pub exact: Candidate,
    pub approx: ApproxCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub rule: BetaRule,
    pub key_bits: u64,
    pub n_opt: u32,
    pub r_opt: u32,
    pub shared: u32,
    pub v_c: u32,
    pub gamma_star: Ratio<u64>,
    /// S/n at the optimum.
    pub beta_star: f64,
    pub achieved: SecurityFigures,
    pub objective: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymOptimum {
    pub optimum: Optimum,
    pub b_r: u32,
    pub b_f: u32,
    /// r' = r - (b_F - b_R).
    pub r_aux: i64,
    /// L' = n r'.
    pub l_aux: i64,
}

struct Evaluator {
    n: u32,
    r: u32,
    alpha: BigRational,
}

impl Evaluator {
    fn new(n: u32, r: u32, alpha_bits: u32) -> Self {
        Self {
            n,
            r,
            alpha: BigRational::from_integer((BigUint::one() << alpha_bits).into()),
        }
    }

    fn eval(&self, s: u32, v_c: u32) -> Candidate {
        let p_rep = p_rep_exact(self.n, s, v_c).expect("grid point in domain");
        let p_f = p_forge(self.n, s, v_c, self.r).expect("grid point in domain");
        let weighted = &p_f * &self.alpha;
        let objective = if p_rep >= weighted { p_rep.clone() } else { weighted };
        Candidate {
            n: self.n,
            r: self.r,
            shared: s,
            v_c,
            gamma: Ratio::new(u64::from(v_c - 2 * s), u64::from(self.n - s)),
            p_rep,
            p_forge: p_f,
            objective,
        }
    }

    fn rep_dominates(&self, s: u32, v_c: u32) -> bool {
        let p_rep = p_rep_exact(self.n, s, v_c).expect("grid point in domain");
        let p_f = p_forge(self.n, s, v_c, self.r).expect("grid point in domain");
        p_rep >= p_f * &self.alpha
    }

    /// Best V_C in [lo, hi] for fixed S. P_R is non-decreasing and P_F
    /// non-increasing in V_C, so the objective falls, then rises.
    fn best_in(&self, s: u32, lo: u32, hi: u32) -> Candidate {
        let v0 = if self.rep_dominates(s, hi) {
            let (mut a, mut b) = (lo, hi);
            while a < b {
                let mid = a + (b - a) / 2;
                if self.rep_dominates(s, mid) {
                    b = mid;
                } else {
                    a = mid + 1;
                }
            }
            a
        } else {
            hi
        };
        let mut best = self.eval(s, v0);
        if v0 > lo {
            let left = self.eval(s, v0 - 1);
            if left.objective <= best.objective {
                best = left;
            }
        }
        // walk back over a plateau (only possible where P_F is clamped at 1)
        let (mut a, mut b) = (lo, best.v_c);
        while a < b {
            let mid = a + (b - a) / 2;
            if self.eval(s, mid).objective <= best.objective {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        if a < best.v_c {
            best = self.eval(s, a);
        }
        best
    }
}

/// Feasible (S, V_C range) pairs for a rule.
fn grid(n: u32, rule: BetaRule) -> Vec<(u32, u32, u32)> {
    let full = |s: u32| (s, 2 * s + 1, n + s);
    match rule {
        BetaRule::Half => {
            let s = n / 2;
            if s < n {
                vec![full(s)]
            } else {
                Vec::new()
            }
        }
        BetaRule::Free => (0..n).map(full).collect(),
        BetaRule::BetaStar => (0..n)
            .filter_map(|s| {
                let keep: Vec<u32> = (2 * s + 1..=n + s)
                    .filter(|&v| {
                        let gamma = f64::from(v - 2 * s) / f64::from(n - s);
                        let b = beta_star(gamma).expect("gamma in (0, 1]");
                        (b * f64::from(n)).round() as u32 == s
                    })
                    .collect();
                Some((s, *keep.first()?, *keep.last()?))
            })
            .collect(),
    }
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    (&a.objective, a.v_c, a.shared) < (&b.objective, b.v_c, b.shared)
}

fn exact_search(n: u32, r: u32, rule: BetaRule, alpha_bits: u32) -> Option<Candidate> {
    let ev = Evaluator::new(n, r, alpha_bits);
    let mut best: Option<Candidate> = None;
    for (s, lo, hi) in grid(n, rule) {
        if let Some(b) = &best {
            // over this S the objective is at least max(P_R at V_C = 2S+1, α P_F at V_C = n+S)
            let floor_rep = BigRational::new(BigUint::one().into(), binomial(u64::from(n), u64::from(s)).into());
            if floor_rep > b.objective {
                continue;
            }
        }
        let c = ev.best_in(s, lo, hi);
        if best.as_ref().is_none_or(|b| better(&c, b)) {
            best = Some(c);
        }
    }
    best
}

fn approx_search(n: u32, r: u32, rule: BetaRule) -> Option<ApproxCandidate> {
    let mut best: Option<ApproxCandidate> = None;
    for (s, lo, hi) in grid(n, rule) {
        let beta = f64::from(s) / f64::from(n);
        for v in lo..=hi {
            let gamma = Ratio::new(u64::from(v - 2 * s), u64::from(n - s));
            let g = *gamma.numer() as f64 / *gamma.denom() as f64;
            let c = ApproxCandidate {
                shared: s,
                v_c: v,
                gamma,
                log2_p_rep: log2_p_rep_approx(n, beta, g, Regime::Linear).expect("gamma > 0"),
                log2_p_forge: log2_p_forge_approx(n, beta, g, r, Regime::Linear),
            };
            let key = |a: &ApproxCandidate| (a.log2_max(), a.v_c, a.shared);
            if best.as_ref().is_none_or(|b| key(&c) < key(b)) {
                best = Some(c);
            }
        }
    }
    best
}

/// argmin over the rule's threshold grid of max{P_R, P_F}, exactly and under
/// the linear-regime approximations.
pub fn gamma_star(n: u32, r: u32, rule: BetaRule) -> Result<GammaStar> {
    if n == 0 || r == 0 {
        return Err(Error::EmptyFeasibleSet { n, r });
    }
    let exact = exact_search(n, r, rule, 0).ok_or(Error::EmptyFeasibleSet { n, r })?;
    let approx = approx_search(n, r, rule).ok_or(Error::EmptyFeasibleSet { n, r })?;
    Ok(GammaStar { rule, exact, approx })
}

pub fn divisors(l: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= l {
        if l.is_multiple_of(d) {
            small.push(d);
            if d * d != l {
                large.push(l / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn optimum_from(rule: BetaRule, l: u64, c: Candidate) -> Result<Optimum> {
    Ok(Optimum {
        rule,
        key_bits: l,
        n_opt: c.n,
        r_opt: c.r,
        shared: c.shared,
        v_c: c.v_c,
        gamma_star: c.gamma,
        beta_star: c.beta(),
        achieved: SecurityFigures::new(c.n, c.shared, c.v_c, c.r, Regime::Linear)?,
        objective: c.objective,
    })
}

fn search_divisors(l: u64, rule: BetaRule, alpha_bits: u32) -> Result<Optimum> {
    if l == 0 {
        return Err(Error::NoDivisors(l));
    }
    let mut ns: Vec<u64> = divisors(l)
        .into_iter()
        .filter(|&n| n <= u64::from(u32::MAX) && l / n <= u64::from(u32::MAX))
        .collect();
    if ns.is_empty() {
        return Err(Error::NoDivisors(l));
    }
    // balanced splits first so the bound below prunes early
    let root = (l as f64).sqrt();
    ns.sort_by(|a, b| {
        let da = ((*a as f64) / root).ln().abs();
        let db = ((*b as f64) / root).ln().abs();
        da.total_cmp(&db).then(a.cmp(b))
    });
    let alpha = BigRational::from_integer((BigUint::one() << alpha_bits).into());
    let mut best: Option<Candidate> = None;
    for n in ns {
        let r = (l / n) as u32;
        let n = n as u32;
        if let Some(b) = &best {
            let floor_rep = BigRational::new(BigUint::one().into(), binomial(u64::from(n), u64::from(n / 2)).into());
            let floor_forge = BigRational::new(BigUint::one().into(), ((BigUint::one() << r) + 1u32).into()) * &alpha;
            if floor_rep > b.objective || floor_forge > b.objective {
                continue;
            }
        }
        if let Some(c) = exact_search(n, r, rule, alpha_bits) {
            let wins = best.as_ref().is_none_or(|b| {
                (&c.objective, c.n, c.v_c, c.shared) < (&b.objective, b.n, b.v_c, b.shared)
            });
            if wins {
                best = Some(c);
            }
        }
    }
    let c = best.ok_or(Error::EmptyFeasibleSet { n: 0, r: 0 })?;
    optimum_from(rule, l, c)
}

/// Block count n | L minimising max{P_R, P_F} over every (S, V_C).
pub fn n_opt(l: u64) -> Result<Optimum> {
    search_divisors(l, BetaRule::Free, 0)
}

pub fn n_opt_with_rule(l: u64, rule: BetaRule) -> Result<Optimum> {
    search_divisors(l, rule, 0)
}

/// n | L minimising max{P_R, 2^(b_F - b_R) P_F}.
pub fn n_opt_asym(l: u64, b_r: u32, b_f: u32) -> Result<AsymOptimum> {
    if b_f < b_r {
        return Err(Error::Domain(format!("need b_F >= b_R, got {b_r}:{b_f}")));
    }
    let optimum = search_divisors(l, BetaRule::Free, b_f - b_r)?;
    let shift = i64::from(b_f - b_r);
    let r_aux = i64::from(optimum.r_opt) - shift;
    let l_aux = i64::from(optimum.n_opt) * r_aux;
    debug_assert_eq!(l as i64, l_aux + i64::from(optimum.n_opt) * shift);
    Ok(AsymOptimum {
        optimum,
        b_r,
        b_f,
        r_aux,
        l_aux,
    })
}

/// Smallest key meeting P_R < 2^-b_R and P_F < 2^-b_F.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetsReport {
    pub b_r: u32,
    pub b_f: u32,
    pub key_bits: u64,
    pub n: u32,
    pub r: u32,
    pub shared: u32,
    pub v_c: u32,
    pub achieved: SecurityFigures,
}

/// Exact search for the smallest L = n r with P_R < 2^-b_R and
/// P_F < 2^-b_F, over n <= `max_n`.
///
/// For fixed (n, S) the largest V_C meeting the repudiation target is best,
/// since it maximises k = V_C - 2S and so minimises the r forging needs.
pub fn min_key_for_targets(b_r: u32, b_f: u32, max_n: u32) -> Result<TargetsReport> {
    let below = |p: &BigRational, bits: u32| {
        p.numer().magnitude() << bits < *p.denom().magnitude()
    };
    let mut best: Option<(u64, u32, u32, u32, u32)> = None;
    for n in 1..=max_n {
        if let Some((l, ..)) = best {
            // forging alone forces r >= b_F
            if u64::from(n) * u64::from(b_f.max(1)) > l {
                break;
            }
        }
        for s in 0..n {
            let ok = |v: u32| below(&p_rep_exact(n, s, v).expect("grid"), b_r);
            if !ok(2 * s + 1) {
                continue;
            }
            let (mut a, mut b) = (2 * s + 1, n + s);
            while a < b {
                let mid = b - (b - a) / 2;
                if ok(mid) {
                    a = mid;
                } else {
                    b = mid - 1;
                }
            }
            let v_c = a;
            let k = BigUint::from(v_c - 2 * s);
            let need = BigUint::from(n - s + 1) << b_f;
            let mut r = b_f.max(1);
            while &k * ((BigUint::one() << r) + 1u32) <= need {
                r += 1;
            }
            let l = u64::from(n) * u64::from(r);
            if best.is_none_or(|(bl, bn, ..)| (l, n) < (bl, bn)) {
                best = Some((l, n, r, s, v_c));
            }
        }
    }
    let (key_bits, n, r, shared, v_c) = best.ok_or_else(|| {
        Error::InfeasibleTargets(format!("no n <= {max_n} meets P_R < 2^-{b_r} and P_F < 2^-{b_f}"))
    })?;
    Ok(TargetsReport {
        b_r,
        b_f,
        key_bits,
        n,
        r,
        shared,
        v_c,
        achieved: SecurityFigures::new(n, shared, v_c, r, Regime::Linear)?,
    })
}

/// Whether some (S, V_C) at this exact (n, r) meets both targets.
pub fn meets_targets(n: u32, r: u32, b_r: u32, b_f: u32) -> bool {
    let limit = |bits: u32| BigRational::new(BigUint::one().into(), (BigUint::one() << bits).into());
    (0..n).any(|s| {
        (2 * s + 1..=n + s).any(|v| {
            p_rep_exact(n, s, v).unwrap() < limit(b_r) && p_forge(n, s, v, r).unwrap() < limit(b_f)
        })
    })
}
