//! CSV tables behind the figures.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use super::asymptotic::{beta_star, z_star};
use super::exact::{log2_rational, p_forge, p_rep_exact};
use super::optimize::{gamma_star, n_opt_with_rule, BetaRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    BetaZVsGamma,
    GammaVsN,
    MaxpVsN,
    GammaVsNopt,
    PVsNopt,
    PVsThreshold,
    Poly1305VsN,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::BetaZVsGamma,
        FigureId::GammaVsN,
        FigureId::MaxpVsN,
        FigureId::GammaVsNopt,
        FigureId::PVsNopt,
        FigureId::PVsThreshold,
        FigureId::Poly1305VsN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::BetaZVsGamma => "beta_z_vs_gamma",
            FigureId::GammaVsN => "gamma_vs_n",
            FigureId::MaxpVsN => "maxp_vs_n",
            FigureId::GammaVsNopt => "gamma_vs_nopt",
            FigureId::PVsNopt => "p_vs_nopt",
            FigureId::PVsThreshold => "p_vs_threshold",
            FigureId::Poly1305VsN => "poly1305_vs_n",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// Sweep coordinates. Each figure reads only the fields it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureGrid {
    /// Intervals on [0, 1] for beta_z_vs_gamma.
    pub gamma_steps: u32,
    /// Block counts for the per-n figures.
    pub n_values: Vec<u32>,
    /// Block length for gamma_vs_n / maxp_vs_n.
    pub r: u32,
    /// Key lengths for the n_opt figures.
    pub key_bits: Vec<u64>,
    /// Fixed (n, S) for p_vs_threshold.
    pub n_fixed: u32,
    pub s_fixed: u32,
    /// Block lengths for p_vs_threshold.
    pub r_values: Vec<u32>,
    /// Share fractions for poly1305_vs_n (S = floor(β n)).
    pub betas: Vec<Ratio<u32>>,
    pub rules: Vec<BetaRule>,
}

impl FigureGrid {
    pub fn for_figure(id: FigureId) -> Self {
        let mut g = Self {
            gamma_steps: 100,
            n_values: (1..=32).map(|i| 4 * i).collect(),
            r: 82,
            key_bits: (4..=14).map(|i| 1u64 << i).collect(),
            n_fixed: 64,
            s_fixed: 48,
            r_values: vec![64, 128],
            betas: vec![Ratio::new(1, 4), Ratio::new(1, 2), Ratio::new(3, 4)],
            rules: vec![BetaRule::Half, BetaRule::BetaStar],
        };
        if id == FigureId::Poly1305VsN {
            g.n_values = (2..=128).collect();
            g.r = 256;
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Exact(BigRational),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// CSV with 12 significant digits; `exact` adds a `<col>_exact` column of
    /// "num/den" after every exact value.
    pub fn to_csv(&self, exact: bool) -> String {
        let exact_cols: Vec<bool> = (0..self.header.len())
            .map(|i| exact && self.rows.iter().any(|r| matches!(r[i], Cell::Exact(_))))
            .collect();
        let mut out = String::new();
        let mut head = Vec::new();
        for (h, &x) in self.header.iter().zip(&exact_cols) {
            head.push(h.clone());
            if x {
                head.push(format!("{h}_exact"));
            }
        }
        out.push_str(&head.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut cells = Vec::new();
            for (c, &x) in row.iter().zip(&exact_cols) {
                cells.push(match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(v) => format_float(*v),
                    Cell::Exact(q) => format_exact(q, 12),
                    Cell::Text(t) => t.clone(),
                });
                if x {
                    cells.push(match c {
                        Cell::Exact(q) => format!("{}/{}", q.numer(), q.denom()),
                        _ => String::new(),
                    });
                }
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Scientific notation with `digits` significant digits, rounded half up,
/// computed without passing through f64.
pub fn format_exact(q: &BigRational, digits: u32) -> String {
    if q.is_zero() {
        return format_float(0.0);
    }
    let sign = if q.is_negative() { "-" } else { "" };
    let x = q.abs();
    let pow10 = |k: i64| -> BigRational {
        let p = BigRational::from_integer(BigInt::from(10).pow(k.unsigned_abs() as u32));
        if k >= 0 {
            p
        } else {
            p.recip()
        }
    };
    let lo = BigInt::from(10).pow(digits - 1);
    let hi = &lo * 10;
    let mut e = (log2_rational(&x) * std::f64::consts::LOG10_2).floor() as i64;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mantissa = loop {
        let scaled = &x * pow10(i64::from(digits) - 1 - e);
        let m = (scaled + &half).floor().to_integer();
        if m >= hi {
            e += 1;
        } else if m < lo {
            e -= 1;
        } else {
            break m;
        }
    };
    let s = mantissa.to_string();
    format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
}

fn ratio_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn exact_pair(n: u32, s: u32, v_c: u32, r: u32) -> Result<(BigRational, BigRational)> {
    Ok((p_rep_exact(n, s, v_c)?, p_forge(n, s, v_c, r)?))
}

pub fn figure_data(id: FigureId, grid: &FigureGrid) -> Result<Table> {
    match id {
        FigureId::BetaZVsGamma => {
            let mut t = Table::new(&["gamma", "beta_star", "z_star"]);
            let steps = grid.gamma_steps.max(1);
            for i in 0..=steps {
                let g = f64::from(i) / f64::from(steps);
                t.rows.push(vec![Cell::Float(g), Cell::Float(beta_star(g)?), Cell::Float(z_star(g)?)]);
            }
            Ok(t)
        }
        FigureId::GammaVsN | FigureId::MaxpVsN => {
            let mut t = Table::new(&[
                "n",
                "r",
                "rule",
                "S",
                "V_C",
                "gamma_exact",
                "gamma_approx",
                "log2maxP_exact",
                "log2maxP_approx",
                "maxP_exact",
            ]);
            for &rule in &grid.rules {
                for &n in &grid.n_values {
                    let g = match gamma_star(n, grid.r, rule) {
                        Ok(g) => g,
                        Err(Error::EmptyFeasibleSet { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    t.rows.push(vec![
                        Cell::Int(n.into()),
                        Cell::Int(grid.r.into()),
                        Cell::Text(rule.to_string()),
                        Cell::Int(g.exact.shared.into()),
                        Cell::Int(g.exact.v_c.into()),
                        Cell::Float(ratio_f64(&g.exact.gamma)),
                        Cell::Float(ratio_f64(&g.approx.gamma)),
                        Cell::Float(g.exact.log2_objective()),
                        Cell::Float(g.approx.log2_max()),
                        Cell::Exact(g.exact.objective.clone()),
                    ]);
                }
            }
            Ok(t)
        }
        FigureId::GammaVsNopt | FigureId::PVsNopt => {
            let mut t = Table::new(&[
                "L", "rule", "n_opt", "r_opt", "S", "V_C", "gamma", "P_R", "P_F", "log2PR", "log2PF",
            ]);
            for &rule in &grid.rules {
                for &l in &grid.key_bits {
                    let o = match n_opt_with_rule(l, rule) {
                        Ok(o) => o,
                        Err(Error::EmptyFeasibleSet { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    let f = &o.achieved;
                    t.rows.push(vec![
                        Cell::Int(l.into()),
                        Cell::Text(rule.to_string()),
                        Cell::Int(o.n_opt.into()),
                        Cell::Int(o.r_opt.into()),
                        Cell::Int(o.shared.into()),
                        Cell::Int(o.v_c.into()),
                        Cell::Float(ratio_f64(&o.gamma_star)),
                        Cell::Exact(f.p_rep_exact.clone()),
                        Cell::Exact(f.p_forge.clone()),
                        Cell::Float(-f.security_bits_rep),
                        Cell::Float(-f.security_bits_forge),
                    ]);
                }
            }
            Ok(t)
        }
        FigureId::PVsThreshold => {
            let (n, s) = (grid.n_fixed, grid.s_fixed);
            let mut t = Table::new(&[
                "n", "S", "r", "V_C", "errors", "gamma", "P_R", "P_F", "log2PR", "log2PF",
            ]);
            for &r in &grid.r_values {
                // abscissa n + S - V_C from 0 up to n - S - 1 (V_C = 2S + 1)
                for v_c in (2 * s + 1..=n + s).rev() {
                    let (pr, pf) = exact_pair(n, s, v_c, r)?;
                    t.rows.push(vec![
                        Cell::Int(n.into()),
                        Cell::Int(s.into()),
                        Cell::Int(r.into()),
                        Cell::Int(v_c.into()),
                        Cell::Int((n + s - v_c).into()),
                        Cell::Float(f64::from(v_c - 2 * s) / f64::from(n - s)),
                        Cell::Exact(pr.clone()),
                        Cell::Exact(pf.clone()),
                        Cell::Float(log2_rational(&pr)),
                        Cell::Float(log2_rational(&pf)),
                    ]);
                }
            }
            Ok(t)
        }
        FigureId::Poly1305VsN => {
            let mut t = Table::new(&[
                "n", "beta", "S", "V_C", "gamma", "P_R", "P_F", "log2PR", "log2PF",
            ]);
            for beta in &grid.betas {
                for &n in &grid.n_values {
                    let s = (u64::from(n) * u64::from(*beta.numer()) / u64::from(*beta.denom())) as u32;
                    if s >= n {
                        continue;
                    }
                    let v_c = 2 * s + 1;
                    let (pr, pf) = exact_pair(n, s, v_c, grid.r)?;
                    t.rows.push(vec![
                        Cell::Int(n.into()),
                        Cell::Text(beta.to_string()),
                        Cell::Int(s.into()),
                        Cell::Int(v_c.into()),
                        Cell::Float(1.0 / f64::from(n - s)),
                        Cell::Exact(pr.clone()),
                        Cell::Exact(pf.clone()),
                        Cell::Float(log2_rational(&pr)),
                        Cell::Float(log2_rational(&pf)),
                    ]);
                }
            }
            Ok(t)
        }
    }
}
