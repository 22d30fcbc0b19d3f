//! Security analysis: exact formulas, large-n approximations, optimisers
//! and figure tables.

pub mod asymptotic;
pub mod exact;
pub mod figures;
pub mod optimize;

pub use asymptotic::{
    beta_star, binary_entropy, log2_p_forge_approx, log2_p_rep_approx, p_forge_approx, p_rep_approx, z_r, z_star,
    Regime,
};
pub use exact::{
    c_forge, hypergeom_pmf, log2_p_forge_legacy, log2_rational, p_forge, p_rep_exact, p_rep_given_e, p_rep_legacy,
    security_bits, SecurityFigures,
};
pub use figures::{figure_data, FigureGrid, FigureId, Table};
pub use optimize::{
    gamma_star, min_key_for_targets, n_opt, n_opt_asym, n_opt_with_rule, AsymOptimum, BetaRule, Candidate, GammaStar,
    Optimum, TargetsReport,
};
