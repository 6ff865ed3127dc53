//! Variance of `X_n`: the coefficients `φ_V*(χ_k)` of the periodic
//! function `Q_V`, by series and by direct quadrature of their integral.

use num_complex::Complex64;
use serde::Serialize;

use super::mean::{
    chi, ser_complex, sum_series, FourierKind, FourierSeries, GammaRatios, SeriesValue,
};
use crate::error::{Error, Result};
use crate::exact::{MomentTable, Poissonizer, SplitParams};
use crate::special::{cpow, gamma, mellin_quadrature, MellinKernel, QuadratureResult};

/// `Γ(s)(1 − 2^{-s})`, continued to `ln 2` at `s = 0`.
fn gamma_half_difference(s: Complex64) -> Result<Complex64> {
    if s.norm() == 0.0 {
        return Ok(Complex64::new(std::f64::consts::LN_2, 0.0));
    }
    Ok(gamma(s)? * (1.0 - cpow(2.0, -s)?))
}

/// Series for `φ_V*(s)` built from `E X_j²`, `μ_j^[2]`, `μ_j` and `μ_j^[11]`.
pub fn phi_v_star_at(s: Complex64, moments: &MomentTable, cap: usize) -> Result<SeriesValue> {
    let params = moments.params();
    let (p, q) = (params.p_f64(), params.q_f64());
    let ps = cpow(p, s)?;
    let b2 = cpow(2.0, -s)?;
    let b3 = cpow(3.0, -s)?;
    let b4 = cpow(4.0, -s)?;
    let b1p = cpow(1.0 + p, -s)?;
    let b12p = cpow(1.0 + 2.0 * p, -s)?;
    let (m2, mu2, mu, mu11) = (
        moments.m2(),
        moments.mu2conv(),
        moments.mu(),
        moments.mu11conv(),
    );
    let mut ratios = GammaRatios::new(s)?;
    let rate = q.max(1.0 / (1.0 + p));
    let mut series = sum_series("φ_V* series", mu.len(), cap, rate, |j| {
        let (_, r) = ratios.next_ratio();
        let ji = j as i32;
        let qj = ps * q.powi(ji);
        let h2 = b2 * 0.5f64.powi(ji);
        let h3 = b3 * (1.0 / 3.0f64).powi(ji);
        let h4 = b4 * 0.25f64.powi(ji);
        let h1p = b1p * (1.0 + p).powi(-ji);
        let h12p = b12p * (1.0 + 2.0 * p).powi(-ji);
        let pieces = [
            m2[j] * (qj - h2),
            mu2[j] * (2.0 * h3 - h4 - qj * h2),
            2.0 * mu[j] * (h2 - h3 - qj + qj * h1p),
            -2.0 * mu11[j] * ps * (h1p - h12p),
        ];
        let sum: Complex64 = pieces.iter().sum();
        let bound = r.norm()
            * (m2[j] * (qj.norm() + h2.norm())
                + mu2[j] * (2.0 * h3.norm() + h4.norm() + qj.norm() * h2.norm())
                + 2.0 * mu[j] * (h2.norm() + h3.norm() + qj.norm() * (1.0 + h1p.norm()))
                + 2.0 * mu11[j] * ps.norm() * (h1p.norm() + h12p.norm()));
        if !bound.is_finite() {
            return Err(Error::NonFinite("φ_V* series term"));
        }
        Ok((r * sum, bound))
    })?;
    series.value += gamma_half_difference(s)?;
    Ok(series)
}

/// `φ_V*(χ_k)` by its series.
pub fn phi_v_star(k: i64, moments: &MomentTable, cap: usize) -> Result<SeriesValue> {
    let mut v = phi_v_star_at(chi(k, moments.params()), moments, cap)?;
    if k == 0 {
        v.value.im = 0.0;
    }
    Ok(v)
}

/// `φ_V*(χ_k)` by quadrature of its defining integral.
pub fn phi_v_star_quadrature(
    k: i64,
    tables: &Poissonizer,
    tolerance: f64,
) -> Result<QuadratureResult> {
    let mut r = mellin_quadrature(
        &MellinKernel::PhiV(tables),
        chi(k, tables.params()),
        tolerance,
    )?;
    if k == 0 {
        r.value.im = 0.0;
    }
    Ok(r)
}

/// Which evaluation of `φ_V*` was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvaluationPath {
    Series,
    Quadrature,
}

/// Series and quadrature values of `φ_V*(χ_k)` side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiVCheck {
    pub k: i64,
    pub series: SeriesValue,
    #[serde(serialize_with = "ser_complex")]
    pub quadrature: Complex64,
    pub quadrature_error: f64,
    pub discrepancy: f64,
    pub allowed: f64,
    pub path: EvaluationPath,
}

impl PhiVCheck {
    pub fn mismatch(&self) -> bool {
        self.path == EvaluationPath::Quadrature
    }

    /// The adjudicated value.
    pub fn value(&self) -> Complex64 {
        match self.path {
            EvaluationPath::Series => self.series.value,
            EvaluationPath::Quadrature => self.quadrature,
        }
    }
}

/// Slack allowed between series and quadrature on top of their own bounds.
pub const PHI_V_AGREEMENT: f64 = 1e-6;

/// Evaluates `φ_V*(χ_k)` both ways; the quadrature value wins (and a warning
/// is logged) when they disagree beyond their combined error.
pub fn phi_v_star_checked(
    k: i64,
    tables: &Poissonizer,
    cap: usize,
    tolerance: f64,
) -> Result<PhiVCheck> {
    let series = phi_v_star(k, tables.moments(), cap)?;
    let quad = phi_v_star_quadrature(k, tables, tolerance)?;
    let discrepancy = (series.value - quad.value).norm();
    let allowed = series.tail_bound + quad.error_estimate + PHI_V_AGREEMENT;
    let path = if discrepancy <= allowed {
        EvaluationPath::Series
    } else {
        log::warn!(
            "φ_V*(χ_{k}) at p = {}: series {} and quadrature {} differ by {discrepancy:e}; using quadrature",
            tables.params(),
            series.value,
            quad.value
        );
        EvaluationPath::Quadrature
    };
    Ok(PhiVCheck {
        k,
        series,
        quadrature: quad.value,
        quadrature_error: quad.error_estimate,
        discrepancy,
        allowed,
        path,
    })
}

/// `Q_V` with harmonics `|k| <= harmonics` from the series alone.
pub fn variance_series(moments: &MomentTable, harmonics: i64, cap: usize) -> Result<FourierSeries> {
    let l = moments.params().log_inv_p();
    let coeffs = (0..=harmonics)
        .map(|k| Ok((k, phi_v_star(k, moments, cap)?.value / l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FourierSeries::from_nonnegative(FourierKind::QV, &coeffs))
}

/// `Q_V` with every coefficient adjudicated by [`phi_v_star_checked`].
pub fn variance_series_checked(
    tables: &Poissonizer,
    harmonics: i64,
    cap: usize,
    tolerance: f64,
) -> Result<(FourierSeries, Vec<PhiVCheck>)> {
    let l = tables.params().log_inv_p();
    let checks = (0..=harmonics)
        .map(|k| phi_v_star_checked(k, tables, cap, tolerance))
        .collect::<Result<Vec<_>>>()?;
    let coeffs: Vec<_> = checks.iter().map(|c| (c.k, c.value() / l)).collect();
    Ok((
        FourierSeries::from_nonnegative(FourierKind::QV, &coeffs),
        checks,
    ))
}

/// `V(X_n) ≈ 1` at `p = 1/2` and `Q_V(log_{1/p} n)` otherwise.
pub fn asympt_variance(n: f64, params: &SplitParams, qv: &FourierSeries) -> f64 {
    if params.is_half() {
        1.0
    } else {
        qv.eval(params.log_base(n))
    }
}
