//! Complex Gamma function, complex powers of positive reals, and adaptive
//! quadrature for Mellin-type integrals.

pub mod gamma;
pub mod mellin;
pub mod quadrature;

pub use gamma::{cpow, gamma, gamma_real, ComplexValue};
pub use mellin::{mellin_quadrature, upper_limit, MellinKernel};
pub use quadrature::{integrate, QuadratureConfig, QuadratureResult};
