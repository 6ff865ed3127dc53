//! Exact distribution, asymptotic expansions and Monte Carlo models of the
//! truncated binomial splitting process `X_n = X_{I_n} + 1`.
//!
//! * [`exact`]: rational laws of `X_n` and the equivalent parking, PATRICIA
//!   and geometric/urn models, moment tables, Poisson generating functions.
//! * [`special`]: complex Gamma, complex powers, Mellin-type quadrature.
//! * [`asymptotics`]: mean, variance and distribution asymptotics with their
//!   periodic fluctuations, plus Poisson–Charlier de-Poissonization.
//! * [`simulate`]: reproducible samplers for all four models and
//!   goodness-of-fit statistics.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
