//! Data series for the two fluctuation plots: the periodic part of the mean
//! and of the variance, each estimated once from exact moments and once from
//! a truncated Fourier series.

use serde::Serialize;

use super::mean::{FourierSeries, MeanExpansion};
use crate::error::{Error, Result};
use crate::exact::{CompensatedSum, MomentTable};

/// Harmonics kept on the Fourier side of the mean plot.
pub const FIG3_HARMONICS: i64 = 5;
/// Oscillating harmonics kept on the Fourier side of the variance plot.
pub const FIG4_HARMONICS: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigurePoint {
    pub n: usize,
    /// `log_{1/p} n`.
    pub u: f64,
    pub approximation: f64,
    pub fourier: f64,
}

impl FigurePoint {
    pub fn gap(&self) -> f64 {
        (self.approximation - self.fourier).abs()
    }
}

pub fn max_gap(points: &[FigurePoint]) -> Option<&FigurePoint> {
    points.iter().max_by(|a, b| a.gap().total_cmp(&b.gap()))
}

fn check_range(moments: &MomentTable, n_lo: usize, n_hi: usize) -> Result<()> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::InvalidParameter(format!(
            "figure range {n_lo}..={n_hi} must satisfy 1 ≤ lo ≤ hi"
        )));
    }
    moments.require(n_hi)
}

/// `H_0, …, H_n` as a compensated running sum.
fn harmonic_numbers(n: usize) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    let mut out = vec![0.0];
    for i in 1..=n {
        acc.add(1.0 / i as f64);
        out.push(acc.value());
    }
    out
}

/// `μ_n − H_n/log(1/p) + 1/2 − φ*(0)/log(1/p)` against `Q` cut to
/// `harmonics` terms, for `n_lo <= n <= n_hi`.
pub fn mean_fluctuation(
    moments: &MomentTable,
    expansion: &MeanExpansion,
    n_lo: usize,
    n_hi: usize,
    harmonics: i64,
) -> Result<Vec<FigurePoint>> {
    check_range(moments, n_lo, n_hi)?;
    let params = &expansion.params;
    let l = params.log_inv_p();
    let h = harmonic_numbers(n_hi);
    let q = expansion.q.truncated(harmonics);
    Ok((n_lo..=n_hi)
        .map(|n| {
            let u = params.log_base(n as f64);
            FigurePoint {
                n,
                u,
                approximation: moments.mu()[n] - h[n] / l + 0.5 - expansion.phi_star_0 / l,
                fourier: q.eval(u),
            }
        })
        .collect())
}

/// `V(X_n) + c_0/n − c_0/(2n²)` with `c_0 = 1/log(1/p)²` against the
/// constant term of `Q_V` plus `harmonics` oscillating terms.
pub fn variance_fluctuation(
    moments: &MomentTable,
    qv: &FourierSeries,
    n_lo: usize,
    n_hi: usize,
    harmonics: i64,
) -> Result<Vec<FigurePoint>> {
    check_range(moments, n_lo, n_hi)?;
    let params = moments.params();
    let c0 = params.log_inv_p().powi(-2);
    let q = qv.truncated(harmonics);
    Ok((n_lo..=n_hi)
        .map(|n| {
            let nf = n as f64;
            let u = params.log_base(nf);
            FigurePoint {
                n,
                u,
                approximation: moments.variance(n) + c0 / nf - c0 / (2.0 * nf * nf),
                fourier: q.eval(u),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{chi, mean_constant, variance_series, DEFAULT_SERIES_CAP};
    use crate::exact::SplitParams;
    use crate::special::gamma;

    #[test]
    fn harmonic_numbers_match_digamma_expansion() {
        let h = harmonic_numbers(1000);
        assert_eq!(h[1], 1.0);
        assert!((h[4] - 25.0 / 12.0).abs() < 1e-15);
        let n = 1000.0f64;
        let approx = n.ln() + 0.577_215_664_901_532_9 + 0.5 / n - 1.0 / (12.0 * n * n);
        assert!((h[1000] - approx).abs() < 1e-13);
    }

    #[test]
    fn half_tracks_pure_gamma_coefficients() {
        let half = SplitParams::half();
        let m = MomentTable::float(&half, 2048).unwrap();
        let e = mean_constant(&half, &m).unwrap();
        let l = 2f64.ln();
        for k in 1..=5 {
            let expected = -gamma(chi(k, &half)).unwrap() / l;
            assert!((e.q.coefficient(k) - expected).norm() < 1e-15);
        }
        let pts = mean_fluctuation(&m, &e, 256, 2048, FIG3_HARMONICS).unwrap();
        assert!(max_gap(&pts).unwrap().gap() < 1e-3);
    }

    #[test]
    fn variance_curves_close_for_one_third() {
        let p = SplitParams::new(1, 3).unwrap();
        let m = MomentTable::float(&p, 2187).unwrap();
        let qv = variance_series(&m, 10, DEFAULT_SERIES_CAP).unwrap();
        let pts = variance_fluctuation(&m, &qv, 243, 2187, FIG4_HARMONICS).unwrap();
        assert_eq!(pts.len(), 2187 - 243 + 1);
        assert!(max_gap(&pts).unwrap().gap() < 5e-3);
    }

    #[test]
    fn rejects_bad_ranges() {
        let p = SplitParams::new(1, 3).unwrap();
        let m = MomentTable::float(&p, 100).unwrap();
        let e = mean_constant(&p, &m).unwrap();
        assert!(mean_fluctuation(&m, &e, 0, 10, 5).is_err());
        assert!(mean_fluctuation(&m, &e, 20, 10, 5).is_err());
        assert!(mean_fluctuation(&m, &e, 10, 101, 5).is_err());
    }
}
