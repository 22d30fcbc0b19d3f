//! Large-n approximations of the repudiation and forging probabilities.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// How γ(1-β)n behaves as n grows. Always chosen by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// γ(1-β)n stays at a constant C.
    ConstantC,
    /// γ(1-β)n grows linearly in n.
    Linear,
}

/// h(β) in bits; NaN outside [0, 1].
pub fn binary_entropy(beta: f64) -> f64 {
    if !(0.0..=1.0).contains(&beta) {
        return f64::NAN;
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    term(beta) + term(1.0 - beta)
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} outside [0, 1]")))
    }
}

/// ln z_R(β, γ).
pub fn ln_z_r(beta: f64, gamma: f64) -> Result<f64> {
    check_unit("beta", beta)?;
    check_unit("gamma", gamma)?;
    let c = gamma * (1.0 - beta);
    Ok(xlnx(1.0 - beta) + xlnx(beta + c) - xlnx(c))
}

/// z_R(β, γ) = (1-β)^(1-β) (β+γ(1-β))^(β+γ(1-β)) / (γ(1-β))^(γ(1-β)).
pub fn z_r(beta: f64, gamma: f64) -> Result<f64> {
    ln_z_r(beta, gamma).map(f64::exp)
}

/// a = (1/γ)^(γ/(1-γ)), evaluated through ln_1p so it stays accurate near γ = 1.
fn a_of(gamma: f64) -> f64 {
    let t = 1.0 - gamma;
    (-gamma * (-t).ln_1p() / t).exp()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// β minimising z_R(·, γ); the endpoints are the limits 1/2 and 1 - 1/e.
pub fn beta_star(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok(0.5);
    }
    if gamma == 1.0 {
        return Ok(1.0 - (-1f64).exp());
    }
    let a = a_of(gamma);
    Ok((a - gamma) / (a - gamma + 1.0))
}

/// z_R(β*(γ), γ); the endpoints are the limits 1/2 and 1.
pub fn z_star(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok(0.5);
    }
    if gamma == 1.0 {
        return Ok(1.0);
    }
    let a = a_of(gamma);
    Ok(a / (a - gamma + 1.0))
}

/// log2 of the repudiation estimate.
///
/// ConstantC: 2^(-n h(β)) / (C-1)! with C = γ(1-β)n (Γ is used for
/// non-integral C). Linear: z_R^n γ(1-β) / (β + γ(1-β)).
pub fn log2_p_rep_approx(n: u32, beta: f64, gamma: f64, regime: Regime) -> Result<f64> {
    check_unit("beta", beta)?;
    check_gamma(gamma)?;
    let n = f64::from(n);
    let c = gamma * (1.0 - beta);
    match regime {
        Regime::ConstantC => {
            let big_c = c * n;
            if big_c <= 0.0 {
                return Err(Error::Domain("C = γ(1-β)n must be positive".into()));
            }
            Ok(-n * binary_entropy(beta) - ln_gamma(big_c) / std::f64::consts::LN_2)
        }
        Regime::Linear => {
            if gamma == 0.0 {
                return Err(Error::Domain("gamma = 0 has no linear-regime estimate".into()));
            }
            let ln = n * ln_z_r(beta, gamma)? + (c / (beta + c)).ln();
            Ok(ln / std::f64::consts::LN_2)
        }
    }
}

pub fn p_rep_approx(n: u32, beta: f64, gamma: f64, regime: Regime) -> Result<f64> {
    log2_p_rep_approx(n, beta, gamma, regime).map(f64::exp2)
}

/// log2 of the forging estimate, p = 2^-r.
///
/// ConstantC: min(1, (1-β)n p / C). Linear: min(1, p / γ).
pub fn log2_p_forge_approx(n: u32, beta: f64, gamma: f64, r: u32, regime: Regime) -> f64 {
    let log2_p = -f64::from(r);
    let v = match regime {
        Regime::ConstantC => {
            let k = (1.0 - beta) * f64::from(n);
            log2_p + k.log2() - (gamma * k).log2()
        }
        Regime::Linear => log2_p - gamma.log2(),
    };
    if v.is_nan() {
        0.0
    } else {
        v.min(0.0)
    }
}

pub fn p_forge_approx(n: u32, beta: f64, gamma: f64, r: u32, regime: Regime) -> f64 {
    log2_p_forge_approx(n, beta, gamma, r, regime).exp2()
}
