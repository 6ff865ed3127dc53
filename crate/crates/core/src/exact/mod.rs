//! Exact laws and moment tables of the splitting process and its
//! equivalent models, plus their Poisson generating functions.

pub mod float;
pub mod moments;
pub mod params;
pub mod pmf;
pub mod poisson;

pub use float::{compensated_sum, float_moments, CompensatedSum, FloatPmfTable, SparsePmf};
pub use moments::{moment_table, ExactMoments, MomentTable};
pub use params::{ParamDomain, SplitParams};
pub use pmf::{
    exact_pgf_y, exact_pmf_w, exact_pmf_x, exact_pmf_x_table, exact_pmf_z, rational_string,
    split_pmf, ExactConfig, ExactPmf, Model, DEFAULT_EXACT_CEILING,
};
pub use poisson::{
    poisson_weights, poissonized_eval, truncation_index, Estimate, PoissonKind, PoissonSeries,
    Poissonizer, DEFAULT_TOLERANCE,
};
