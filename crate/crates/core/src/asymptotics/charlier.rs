//! Poisson–Charlier expansion: recovering `a_n` from the Poisson transform
//! `f̃(z) = e^{-z} Σ a_m z^m/m!` through derivatives at `z = n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::{Estimate, PoissonSeries};

/// `τ_j(n) = Σ_ℓ C(j,ℓ) (−1)^{j−ℓ} n^{j−ℓ} n!/(n−ℓ)!`.
pub fn charlier_tau(j: usize, n: u64) -> BigRational {
    let n_big = BigInt::from(n);
    let mut total = BigInt::from(0);
    let mut binom = BigInt::from(1);
    let mut falling = BigInt::from(1);
    for l in 0..=j {
        if l > 0 {
            binom = binom * BigInt::from(j - l + 1) / BigInt::from(l);
            falling *= BigInt::from(n as i64 - (l as i64 - 1));
        }
        let mut term = &binom * &falling * num_traits::pow(n_big.clone(), j - l);
        if (j - l) % 2 == 1 {
            term = -term;
        }
        total += term;
    }
    BigRational::from_integer(total)
}

/// `Σ_{0≤j<2·order} f̃^{(j)}(n) τ_j(n)/j!`, with the derivative of order `j`
/// evaluated to `tolerance`.
pub fn depoissonize(
    series: &PoissonSeries,
    n: u64,
    order: usize,
    tolerance: f64,
) -> Result<Estimate> {
    if order == 0 {
        return Err(Error::InvalidParameter(
            "de-Poissonization order must be >= 1".into(),
        ));
    }
    let x = n as f64;
    let mut value = 0.0;
    let mut bound = 0.0;
    let mut factorial = 1.0;
    for j in 0..2 * order {
        if j > 0 {
            factorial *= j as f64;
        }
        let tau = charlier_tau(j, n).to_f64().unwrap_or(f64::NAN);
        if tau == 0.0 {
            continue;
        }
        let d = series.derivative(j, x, tolerance)?;
        value += d.value * tau / factorial;
        bound += d.error_bound * tau.abs() / factorial;
    }
    Ok(Estimate {
        value,
        error_bound: bound,
    })
}
