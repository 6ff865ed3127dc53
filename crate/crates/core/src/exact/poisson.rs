//! Truncated-Taylor evaluation of Poisson generating functions
//! `f̃(x) = e^{-x} Σ a_n x^n / n!` with a certified tail bound.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use super::float::{CompensatedSum, FloatPmfTable};
use super::moments::MomentTable;
use super::params::SplitParams;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// A value together with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error_bound: f64,
}

/// Truncation index `M(x) = ⌈x + 12√x + 50⌉`.
pub fn truncation_index(x: f64) -> usize {
    (x + 12.0 * x.sqrt() + 50.0).ceil() as usize
}

/// Poisson weights `e^{-x} x^n / n!` for `n = 0..=m`, built outward from the
/// mode so nothing underflows before it has to.
pub fn poisson_weights(x: f64, m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    if x == 0.0 {
        w[0] = 1.0;
        return w;
    }
    let mode = (x.floor() as usize).min(m);
    w[mode] = (-x + mode as f64 * x.ln() - ln_gamma(mode as f64 + 1.0)).exp();
    for n in mode + 1..=m {
        w[n] = w[n - 1] * x / n as f64;
    }
    for n in (0..mode).rev() {
        w[n] = w[n + 1] * (n + 1) as f64 / x;
    }
    w
}

/// Bound on `Σ_{n>m} (n+shift)^degree · scale · e^{-x} x^n/n!` given the
/// weight at `m`.
fn tail_bound(x: f64, m: usize, weight_m: f64, degree: u32, shift: usize, scale: f64) -> f64 {
    let n1 = (m + 1) as f64;
    let w1 = weight_m * x / n1;
    let t1 = scale * (n1 + shift as f64).powi(degree as i32) * w1;
    let ratio =
        ((n1 + 1.0 + shift as f64) / (n1 + shift as f64)).powi(degree as i32) * x / (n1 + 1.0);
    if ratio < 1.0 {
        t1 / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

/// A Poisson generating function given by its Taylor coefficients, with the
/// coefficient growth bound `|a_n| <= max(1, n)^degree` used for the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSeries {
    coeffs: Vec<f64>,
    degree: u32,
}

impl PoissonSeries {
    pub fn new(coeffs: Vec<f64>, degree: u32) -> Self {
        Self { coeffs, degree }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64, tol: f64) -> Result<Estimate> {
        self.derivative(0, x, tol)
    }

    /// `f̃^{(order)}(x)`, using `d/dz e^{-z}Σ a_n z^n/n! = e^{-z} Σ (a_{n+1}-a_n) z^n/n!`.
    pub fn derivative(&self, order: usize, x: f64, tol: f64) -> Result<Estimate> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Poisson argument must be positive, got {x}"
            )));
        }
        let m = truncation_index(x);
        if m + order >= self.coeffs.len() {
            return Err(Error::Unattainable {
                requested: tol,
                reason: format!(
                    "truncation index {} exceeds table size {}",
                    m + order,
                    self.coeffs.len()
                ),
            });
        }
        let mut diffs: Vec<f64> = self.coeffs[..=m + order].to_vec();
        for _ in 0..order {
            for i in 0..diffs.len() - 1 {
                diffs[i] = diffs[i + 1] - diffs[i];
            }
            diffs.pop();
        }
        // the omitted weight mass is far below rounding at M(x), so
        // renormalizing removes the drift of the weight recurrence
        let mut w = poisson_weights(x, m);
        let total = w.iter().copied().collect::<CompensatedSum>().value();
        w.iter_mut().for_each(|v| *v /= total);
        let mut sum = CompensatedSum::new();
        let mut abs = 0.0;
        for (a, wn) in diffs.iter().zip(&w) {
            sum.add(a * wn);
            abs += (a * wn).abs();
        }
        let tail = tail_bound(
            x,
            m,
            w[m],
            self.degree,
            order,
            (1u64 << order.min(60)) as f64,
        );
        let rounding =
            4.0 * (m + order + 1) as f64 * f64::EPSILON * abs * (1u64 << order.min(60)) as f64;
        let est = Estimate {
            value: sum.value(),
            error_bound: tail + rounding,
        };
        if !est.value.is_finite() {
            return Err(Error::NonFinite("Poisson series"));
        }
        if est.error_bound > tol {
            return Err(Error::Unattainable {
                requested: tol,
                reason: format!("certified bound {:e} at x = {x}", est.error_bound),
            });
        }
        Ok(est)
    }
}

/// Which Poissonized quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonKind {
    /// `f̃_1`, mean.
    F1,
    /// `f̃_2`, second moment.
    F2,
    /// `Ṽ = f̃_2 - f̃_1^2`.
    V,
    /// `Ã_k`, Poissonized `P(X_n = k)`.
    A(usize),
    /// Poissonized `P(X_n <= k)`.
    S(usize),
}

/// Coefficient tables backing `poissonized_eval`. The PMF table is built on
/// first use.
#[derive(Debug)]
pub struct Poissonizer {
    params: SplitParams,
    moments: MomentTable,
    f1: PoissonSeries,
    f2: PoissonSeries,
    pmf_max: usize,
    pmf: OnceLock<FloatPmfTable>,
}

impl Poissonizer {
    pub fn new(params: &SplitParams, moment_max: usize, pmf_max: usize) -> Result<Self> {
        Ok(Self::from_moments(
            MomentTable::float(params, moment_max)?,
            pmf_max,
        ))
    }

    pub fn from_moments(moments: MomentTable, pmf_max: usize) -> Self {
        Self {
            params: moments.params().clone(),
            f1: PoissonSeries::new(moments.mu().to_vec(), 1),
            f2: PoissonSeries::new(moments.m2().to_vec(), 2),
            moments,
            pmf_max,
            pmf: OnceLock::new(),
        }
    }

    pub fn params(&self) -> &SplitParams {
        &self.params
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    pub fn pmf_table(&self) -> &FloatPmfTable {
        self.pmf
            .get_or_init(|| FloatPmfTable::new(&self.params, self.pmf_max))
    }

    /// The coefficient series behind `kind`. `Ṽ` is a difference of two
    /// series and has none of its own.
    pub fn series(&self, kind: PoissonKind) -> Result<PoissonSeries> {
        match kind {
            PoissonKind::F1 => Ok(self.f1.clone()),
            PoissonKind::F2 => Ok(self.f2.clone()),
            PoissonKind::A(k) => Ok(PoissonSeries::new(self.pmf_table().column(k), 0)),
            PoissonKind::S(k) => Ok(PoissonSeries::new(self.pmf_table().cdf_column(k), 0)),
            PoissonKind::V => Err(Error::InvalidParameter(
                "Ṽ is evaluated as f̃2 - f̃1², not as a single series".into(),
            )),
        }
    }

    pub fn eval(&self, kind: PoissonKind, x: f64, tol: f64) -> Result<Estimate> {
        match kind {
            PoissonKind::F1 => self.f1.eval(x, tol),
            PoissonKind::F2 => self.f2.eval(x, tol),
            PoissonKind::V => {
                let f1 = self.f1.eval(x, tol)?;
                let f2 = self.f2.eval(x, tol)?;
                let err = f2.error_bound
                    + 2.0 * f1.value.abs() * f1.error_bound
                    + f1.error_bound * f1.error_bound
                    + 8.0 * f64::EPSILON * f2.value.abs();
                if err > tol {
                    return Err(Error::Unattainable {
                        requested: tol,
                        reason: format!("variance bound {err:e} at x = {x}"),
                    });
                }
                Ok(Estimate {
                    value: f2.value - f1.value * f1.value,
                    error_bound: err,
                })
            }
            PoissonKind::A(k) => {
                if k == 0 {
                    return Ok(Estimate {
                        value: (-x).exp(),
                        error_bound: 0.0,
                    });
                }
                self.series(kind)?.eval(x, tol)
            }
            PoissonKind::S(_) => self.series(kind)?.eval(x, tol),
        }
    }
}

/// Evaluate a Poissonized quantity at `x > 0` to within `tol`.
pub fn poissonized_eval(
    tables: &Poissonizer,
    kind: PoissonKind,
    x: f64,
    tol: f64,
) -> Result<Estimate> {
    tables.eval(kind, x, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_closed_form(x: f64) -> f64 {
        (1..200).map(|k| 1.0 - (-x / 2f64.powi(k)).exp()).sum()
    }

    #[test]
    fn weights_sum_to_one() {
        for x in [0.5, 3.0, 40.0, 300.0] {
            let w = poisson_weights(x, truncation_index(x));
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "x = {x}: {s}");
        }
    }

    #[test]
    fn f1_half_closed_form() {
        let pz = Poissonizer::new(&SplitParams::half(), 600, 10).unwrap();
        for x in [1.0, 8.0, 10.0, 100.0] {
            let e = pz.eval(PoissonKind::F1, x, 1e-10).unwrap();
            assert!(e.error_bound <= 1e-10);
            assert!(
                (e.value - half_closed_form(x)).abs() <= e.error_bound.max(1e-12),
                "x = {x}: {} vs {}",
                e.value,
                half_closed_form(x)
            );
        }
    }

    #[test]
    fn variance_half_closed_form() {
        let pz = Poissonizer::new(&SplitParams::half(), 300, 10).unwrap();
        let e = pz.eval(PoissonKind::V, 5.0, 1e-10).unwrap();
        assert!((e.value - (1.0 - (-5f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn a0_is_exponential() {
        let pz = Poissonizer::new(&SplitParams::new(1, 3).unwrap(), 100, 100).unwrap();
        let e = pz.eval(PoissonKind::A(0), 3.0, 1e-12).unwrap();
        assert_eq!(e.value, (-3f64).exp());
        let series = pz
            .series(PoissonKind::A(0))
            .unwrap()
            .eval(3.0, 1e-12)
            .unwrap();
        assert!((series.value - (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn distribution_columns_sum_to_one() {
        let pz = Poissonizer::new(&SplitParams::new(1, 3).unwrap(), 100, 150).unwrap();
        let x = 12.0;
        let total: f64 = (0..=150)
            .map(|k| pz.eval(PoissonKind::A(k), x, 1e-12).unwrap().value)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        let s5 = pz.eval(PoissonKind::S(5), x, 1e-12).unwrap().value;
        let a: f64 = (0..=5)
            .map(|k| pz.eval(PoissonKind::A(k), x, 1e-12).unwrap().value)
            .sum();
        assert!((s5 - a).abs() < 1e-13);
    }

    #[test]
    fn table_too_short_is_unattainable() {
        let pz = Poissonizer::new(&SplitParams::half(), 60, 10).unwrap();
        assert!(matches!(
            pz.eval(PoissonKind::F1, 50.0, 1e-10),
            Err(Error::Unattainable { .. })
        ));
        assert!(pz.eval(PoissonKind::F1, 0.0, 1e-10).is_err());
    }

    #[test]
    fn derivative_of_half_closed_form() {
        let pz = Poissonizer::new(&SplitParams::half(), 400, 10).unwrap();
        let x = 30.0;
        // d/dx Σ(1 - e^{-x/2^k}) = Σ 2^{-k} e^{-x/2^k}
        let exact: f64 = (1..200)
            .map(|k| (-x / 2f64.powi(k)).exp() / 2f64.powi(k))
            .sum();
        let d = pz
            .series(PoissonKind::F1)
            .unwrap()
            .derivative(1, x, 1e-9)
            .unwrap();
        assert!((d.value - exact).abs() < 1e-11);
    }
}
