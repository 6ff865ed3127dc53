//! Asymptotic expansions of the mean, variance and distribution of `X_n`,
//! and Poisson–Charlier de-Poissonization.

pub mod charlier;
pub mod density;
pub mod figures;
pub mod mean;
pub mod variance;

pub use charlier::{charlier_tau, depoissonize};
pub use density::{
    a_tilde_explicit, asympt_cdf, asympt_pmf, density_approx, hat_r, omega, omega_tail_bound,
    product_rep_pmf_half, DensityApprox, DAMPING_CUTOFF,
};
pub use figures::{
    max_gap, mean_fluctuation, variance_fluctuation, FigurePoint, FIG3_HARMONICS, FIG4_HARMONICS,
};
pub use mean::{
    asympt_mean, chi, f1_exact_formula, f1_remainder, mean_constant, mean_constant_with, phi_star,
    phi_star_at, FourierKind, FourierSeries, MeanExpansion, SeriesValue, DEFAULT_HARMONICS,
    DEFAULT_SERIES_CAP, EULER_GAMMA,
};
pub use variance::{
    asympt_variance, phi_v_star, phi_v_star_at, phi_v_star_checked, phi_v_star_quadrature,
    variance_series, variance_series_checked, EvaluationPath, PhiVCheck, PHI_V_AGREEMENT,
};
