//! Exact big-rational security formulas.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::asymptotic::{log2_p_rep_approx, Regime};
use crate::error::{Error, Result};

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Product of `count` consecutive integers descending from `top`.
pub(crate) fn falling(top: u64, count: u64) -> BigUint {
    let mut out = BigUint::one();
    let mut acc: u128 = 1;
    for i in 0..count {
        let f = u128::from(top - i);
        match acc.checked_mul(f) {
            Some(v) if v < 1 << 100 => acc = v,
            _ => {
                out *= acc;
                acc = f;
            }
        }
    }
    out * acc
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    falling(n, k) / falling(k, k)
}

/// Hypergeometric pmf: `draws` items taken without replacement from
/// `population` items of which `marked` are marked; probability of exactly
/// `x` marked items.
pub fn hypergeom_pmf(population: u64, marked: u64, draws: u64, x: u64) -> Result<BigRational> {
    if marked > population || draws > population {
        return Err(Error::Domain(format!(
            "hypergeometric({population}, {marked}, {draws}) is not defined"
        )));
    }
    if x > marked || x > draws || draws - x > population - marked {
        return Ok(BigRational::zero());
    }
    Ok(ratio(
        binomial(marked, x) * binomial(population - marked, draws - x),
        binomial(population, draws),
    ))
}

fn check_rep_domain(n: u32, s: u32, v_c: u32) -> Result<()> {
    if s > n {
        return Err(Error::Domain(format!("S = {s} exceeds n = {n}")));
    }
    if v_c <= 2 * s || v_c > n + s {
        return Err(Error::Domain(format!(
            "V_C = {v_c} outside (2S, n + S] = ({}, {}]",
            2 * s,
            n + s
        )));
    }
    Ok(())
}

/// Probability that all of `e` uniformly placed errors among the n blocks of
/// k2 avoid the S blocks Charlie shared with Bob. Zero for e > n - S.
pub fn p_private_placement(n: u32, s: u32, e: u32) -> Result<BigRational> {
    if s > n || e > n {
        return Err(Error::Domain(format!("need S, e <= n (n = {n}, S = {s}, e = {e})")));
    }
    let k = u64::from(n - s);
    let e = u64::from(e);
    if e > k {
        return Ok(BigRational::zero());
    }
    Ok(ratio(falling(k, e), falling(u64::from(n), e)))
}

/// Success probability of repudiation with exactly `e` corrupted k2 blocks
/// (Bob at zero tolerance): Charlie must reject and Bob must see no error.
pub fn p_rep_given_e(n: u32, s: u32, v_c: u32, e: u32) -> Result<BigRational> {
    check_rep_domain(n, s, v_c)?;
    if e < n + s - v_c + 1 {
        return Ok(BigRational::zero());
    }
    p_private_placement(n, s, e)
}

/// Optimal repudiation probability, obtained with e* = n + S - V_C + 1 errors:
/// prod_{i=0}^{n+S-V_C} (n-S-i)/(n-i).
pub fn p_rep_exact(n: u32, s: u32, v_c: u32) -> Result<BigRational> {
    check_rep_domain(n, s, v_c)?;
    p_private_placement(n, s, n + s - v_c + 1)
}

/// Repudiation probability of the original scheme: half the blocks shared,
/// `e` errors, prod_{i<e} (n/2 - i)/(n - i).
pub fn p_rep_legacy(n: u32, e: u32) -> Result<BigRational> {
    if !n.is_multiple_of(2) || e > n / 2 {
        return Err(Error::Domain(format!("need even n and e <= n/2 (n = {n}, e = {e})")));
    }
    p_private_placement(n, n / 2, e)
}

fn check_forge_domain(n: u32, s: u32, v_c: u32, r: u32) -> Result<()> {
    check_rep_domain(n, s, v_c)?;
    if r == 0 {
        return Err(Error::Domain("r must be positive".into()));
    }
    Ok(())
}

/// Expected number of candidate values a forger tests, k (2^r + 1) / (n - S + 1)
/// with k = V_C - 2S.
pub fn c_forge(n: u32, s: u32, v_c: u32, r: u32) -> Result<BigRational> {
    check_forge_domain(n, s, v_c, r)?;
    let k = BigUint::from(v_c - 2 * s);
    let m = (BigUint::one() << r) + 1u32;
    Ok(ratio(k * m, BigUint::from(n - s + 1)))
}

/// Forging probability min(1, 1 / C_F).
pub fn p_forge(n: u32, s: u32, v_c: u32, r: u32) -> Result<BigRational> {
    let c = c_forge(n, s, v_c, r)?;
    Ok(if c <= BigRational::one() { BigRational::one() } else { c.recip() })
}

/// log2 of the coarse forging estimate 2^(-L/2) of the original scheme.
pub fn log2_p_forge_legacy(key_bits: u64) -> f64 {
    -(key_bits as f64) / 2.0
}

fn log2_uint(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    (x >> shift).to_f64().unwrap_or(f64::NAN).log2() + shift as f64
}

/// log2 of a positive rational without going through f64 (which would
/// underflow long before these probabilities do). -inf for zero.
pub fn log2_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    log2_uint(num) - log2_uint(den)
}

/// Security strength in bits, -log2 p.
pub fn security_bits(p: &BigRational) -> f64 {
    // 0.0 - x rather than -x, so p = 1 gives +0.0
    0.0 - log2_rational(p)
}

/// Closest f64, or 0 when the value underflows.
pub fn to_f64(x: &BigRational) -> f64 {
    let l = log2_rational(x);
    if l < -1070.0 {
        0.0
    } else {
        l.exp2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityFigures {
    pub n: u32,
    pub shared: u32,
    pub v_c: u32,
    pub r: u32,
    pub p_rep_exact: BigRational,
    /// Stirling estimate under `regime`, as log2.
    pub log2_p_rep_approx: f64,
    pub regime: Regime,
    pub c_forge: BigRational,
    pub p_forge: BigRational,
    pub security_bits_rep: f64,
    pub security_bits_forge: f64,
}

impl SecurityFigures {
    pub fn new(n: u32, s: u32, v_c: u32, r: u32, regime: Regime) -> Result<Self> {
        let p_rep = p_rep_exact(n, s, v_c)?;
        let c = c_forge(n, s, v_c, r)?;
        let p_f = p_forge(n, s, v_c, r)?;
        let beta = f64::from(s) / f64::from(n);
        let gamma = f64::from(v_c - 2 * s) / f64::from(n - s);
        Ok(Self {
            n,
            shared: s,
            v_c,
            r,
            log2_p_rep_approx: log2_p_rep_approx(n, beta, gamma, regime)?,
            regime,
            security_bits_rep: security_bits(&p_rep),
            security_bits_forge: security_bits(&p_f),
            p_rep_exact: p_rep,
            c_forge: c,
            p_forge: p_f,
        })
    }

    pub fn max_p(&self) -> &BigRational {
        std::cmp::max(&self.p_rep_exact, &self.p_forge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(4, 5), BigUint::zero());
        assert_eq!(binomial(100, 50).to_string(), "100891344545564193334812497256");
    }

    #[test]
    fn falling_handles_large_factors() {
        let big = u64::MAX / 3;
        let want = BigUint::from(big) * BigUint::from(big - 1) * BigUint::from(big - 2);
        assert_eq!(falling(big, 3), want);
        assert_eq!(falling(7, 0), BigUint::one());
    }

    #[test]
    fn hypergeometric_pmf_sums_to_one() {
        for n in 0..=30u64 {
            for k in 0..=n {
                for e in 0..=n {
                    let total: BigRational = (0..=e).map(|x| hypergeom_pmf(n, k, e, x).unwrap()).sum();
                    assert_eq!(total, BigRational::one(), "n {n} k {k} e {e}");
                }
            }
        }
    }

    #[test]
    fn repudiation_product_is_hypergeometric_zero() {
        for n in 1..=20u32 {
            for s in 0..n {
                for v_c in 2 * s + 1..=n + s {
                    let e = u64::from(n + s - v_c + 1);
                    let h0 = hypergeom_pmf(u64::from(n), u64::from(s), e, 0).unwrap();
                    assert_eq!(p_rep_exact(n, s, v_c).unwrap(), h0);
                }
            }
        }
    }

    #[test]
    fn repudiation_examples() {
        for n in 1..12 {
            for v_c in 1..=n {
                assert_eq!(p_rep_exact(n, 0, v_c).unwrap(), BigRational::one());
            }
        }
        // gamma = 1 leaves a single factor (n - S) / n
        assert_eq!(p_rep_exact(64, 48, 112).unwrap(), q(16, 64));
        let bits = -log2_rational(&p_rep_exact(64, 48, 97).unwrap()) * std::f64::consts::LOG10_2;
        assert!((bits - 14.69).abs() < 0.01, "{bits}");
        assert!(p_rep_exact(4, 2, 4).is_err());
        assert!(p_rep_exact(4, 2, 7).is_err());
        assert!(p_rep_exact(4, 5, 7).is_err());
    }

    #[test]
    fn legacy_repudiation() {
        assert_eq!(p_rep_legacy(4, 0).unwrap(), BigRational::one());
        assert_eq!(p_rep_legacy(4, 1).unwrap(), q(1, 2));
        assert_eq!(p_rep_legacy(4, 2).unwrap(), q(1, 6));
        assert_eq!(p_rep_legacy(4, 2).unwrap(), p_rep_exact(4, 2, 5).unwrap());
        assert!(p_rep_legacy(5, 1).is_err());
        assert!(p_rep_legacy(4, 3).is_err());
    }

    #[test]
    fn errors_below_e_star_never_succeed() {
        assert_eq!(p_rep_given_e(8, 2, 9, 1).unwrap(), BigRational::zero());
        assert!(p_rep_given_e(8, 2, 9, 2).unwrap() > BigRational::zero());
        // monotone decreasing above e*
        let mut last = BigRational::one();
        for e in 2..=6 {
            let p = p_rep_given_e(8, 2, 9, e).unwrap();
            assert!(p < last);
            last = p;
        }
        assert_eq!(p_rep_given_e(8, 2, 9, 7).unwrap(), BigRational::zero());
    }

    #[test]
    fn forging_examples() {
        assert_eq!(c_forge(8, 4, 9, 8).unwrap(), q(257, 5));
        // all-green urn: 2^r private values, all of them targets
        assert_eq!(c_forge(8, 4, 12, 2).unwrap(), q(4 * 5, 5));
        let bits = log2_rational(&c_forge(64, 32, 69, 128).unwrap());
        assert!((bits - 125.28).abs() < 0.01, "{bits}");
        assert_eq!(p_forge(8, 4, 9, 1).unwrap(), BigRational::one());
        assert_eq!(p_forge(8, 4, 9, 8).unwrap(), q(5, 257));
        for n in [64u32, 84, 128] {
            let s = n / 2;
            let p = p_forge(n, s, 2 * s + 1, 256).unwrap();
            assert!(log2_rational(&p) < -75.0 / std::f64::consts::LOG10_2);
        }
        assert_eq!(log2_p_forge_legacy(4096), -2048.0);
    }

    #[test]
    fn log2_of_tiny_rationals() {
        let x = BigRational::new(1.into(), (num_bigint::BigInt::one() << 3000u32) * 3);
        assert!((log2_rational(&x) + 3000.0 + 3f64.log2()).abs() < 1e-9);
        assert_eq!(to_f64(&x), 0.0);
        let y = BigRational::from_f64(0.1).unwrap();
        assert!((to_f64(&y) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn security_figures_are_consistent() {
        let f = SecurityFigures::new(64, 32, 69, 128, Regime::Linear).unwrap();
        assert_eq!(f.p_forge, f.c_forge.recip());
        assert!(f.max_p() >= &f.p_rep_exact);
        assert!(f.security_bits_forge > 120.0);
    }
}
