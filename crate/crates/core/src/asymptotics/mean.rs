//! Mean of `X_n`: the Mellin-residue constants, the periodic fluctuation
//! `Q(u)` and the exact-plus-exponentially-small formula for `f̃1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{MomentTable, PoissonKind, Poissonizer, SplitParams};
use crate::special::{cpow, gamma};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Default number of Fourier harmonics kept on each side.
pub const DEFAULT_HARMONICS: i64 = 10;
/// Default cap on the number of series terms.
pub const DEFAULT_SERIES_CAP: usize = 400;
/// A series stops once this many consecutive terms are below `TERM_FLOOR`.
const QUIET_RUN: usize = 10;
const TERM_FLOOR: f64 = 1e-15;

/// `χ_k = 2kπi / log(1/p)`.
pub fn chi(k: i64, params: &SplitParams) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * k as f64 / params.log_inv_p())
}

/// A truncated series value with an estimate of the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: usize,
}

pub(crate) fn ser_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// `Γ(s+j)/j!` for `j = 1, 2, …`, by the ratio recurrence.
pub(crate) struct GammaRatios {
    s: Complex64,
    j: usize,
    current: Complex64,
}

impl GammaRatios {
    pub(crate) fn new(s: Complex64) -> Result<Self> {
        Ok(Self {
            s,
            j: 1,
            current: gamma(s + 1.0)?,
        })
    }

    /// Current `(j, Γ(s+j)/j!)`, then advance.
    pub(crate) fn next_ratio(&mut self) -> (usize, Complex64) {
        let out = (self.j, self.current);
        self.current *= (self.s + self.j as f64) / (self.j + 1) as f64;
        self.j += 1;
        out
    }
}

/// Sums `Σ_{j≥1} term(j)` with the quiet-run stopping rule. `term` returns
/// the term and an upper bound on its size; `rate` bounds the eventual ratio
/// of successive term bounds.
pub(crate) fn sum_series(
    what: &'static str,
    available: usize,
    cap: usize,
    rate: f64,
    mut term: impl FnMut(usize) -> Result<(Complex64, f64)>,
) -> Result<SeriesValue> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut quiet = 0;
    let mut last_bound = f64::INFINITY;
    for j in 1..=cap {
        if j >= available {
            return Err(Error::InsufficientMoments {
                available,
                needed: j + 1,
            });
        }
        let (t, bound) = term(j)?;
        // Kahan on both components
        let y = t - comp;
        let s = value + y;
        comp = (s - value) - y;
        value = s;
        last_bound = bound;
        quiet = if bound < TERM_FLOOR { quiet + 1 } else { 0 };
        if quiet >= QUIET_RUN {
            let growth = rate * (1.0 + 2.0 / j as f64);
            let tail_bound = if growth < 1.0 {
                last_bound * growth / (1.0 - growth)
            } else {
                f64::INFINITY
            };
            return Ok(SeriesValue {
                value,
                tail_bound,
                terms: j,
            });
        }
    }
    Err(Error::NonConvergence {
        what,
        evaluations: cap,
        error: last_bound,
    })
}

/// `φ*(s) = Σ_{j≥1} μ_j/j! Γ(s+j) (p^s q^j − 2^{-j-s})`. At `s = χ_k` the
/// factor `p^s` is 1.
pub fn phi_star_at(s: Complex64, moments: &MomentTable, cap: usize) -> Result<SeriesValue> {
    let params = moments.params();
    if params.is_half() {
        return Ok(SeriesValue {
            value: Complex64::new(0.0, 0.0),
            tail_bound: 0.0,
            terms: 0,
        });
    }
    let q = params.q_f64();
    let ps = cpow(params.p_f64(), s)?;
    let two_s = cpow(2.0, -s)?;
    let mu = moments.mu();
    let mut ratios = GammaRatios::new(s)?;
    sum_series("φ* series", mu.len(), cap, q.max(0.5), |j| {
        let (_, r) = ratios.next_ratio();
        let qj = q.powi(j as i32);
        let hj = 0.5f64.powi(j as i32);
        let t = r * mu[j] * (ps * qj - two_s * hj);
        let bound = r.norm() * mu[j] * (ps.norm() * qj + two_s.norm() * hj);
        Ok((t, bound))
    })
}

/// `φ*(χ_k)`.
pub fn phi_star(k: i64, moments: &MomentTable, cap: usize) -> Result<SeriesValue> {
    let s = chi(k, moments.params());
    let mut v = phi_star_at(s, moments, cap)?;
    if k == 0 {
        v.value.im = 0.0;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FourierKind {
    /// Mean fluctuation; no constant term.
    Q,
    /// Variance fluctuation; constant term included.
    QV,
}

/// A real-valued Fourier series `Σ c_k e^{-2kπiu}` stored by its
/// coefficients, with `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    kind: FourierKind,
    coefficients: BTreeMap<i64, Complex64>,
}

impl FourierSeries {
    /// Builds a series from the coefficients for `k >= 0`; negative indices
    /// are filled in by conjugation. A `Q` series drops `k = 0`.
    pub fn from_nonnegative(kind: FourierKind, coefficients: &[(i64, Complex64)]) -> Self {
        let mut map = BTreeMap::new();
        for &(k, c) in coefficients {
            debug_assert!(k >= 0);
            if k == 0 {
                if kind == FourierKind::QV {
                    map.insert(0, Complex64::new(c.re, 0.0));
                }
                continue;
            }
            map.insert(k, c);
            map.insert(-k, c.conj());
        }
        Self {
            kind,
            coefficients: map,
        }
    }

    /// Builds a series from explicit coefficients without symmetrizing.
    pub fn from_map(kind: FourierKind, coefficients: BTreeMap<i64, Complex64>) -> Self {
        Self { kind, coefficients }
    }

    pub fn kind(&self) -> FourierKind {
        self.kind
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, Complex64> {
        &self.coefficients
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        self.coefficients
            .get(&k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn max_harmonic(&self) -> i64 {
        self.coefficients.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// Keeps `|k| <= harmonics`.
    pub fn truncated(&self, harmonics: i64) -> Self {
        Self {
            kind: self.kind,
            coefficients: self
                .coefficients
                .iter()
                .filter(|(k, _)| k.abs() <= harmonics)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    /// `Σ_{|k| > harmonics} |c_k|` over the stored coefficients.
    pub fn tail_norm(&self, harmonics: i64) -> f64 {
        self.coefficients
            .iter()
            .filter(|(k, _)| k.abs() > harmonics)
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// Complex value at `u`; the imaginary part measures asymmetry.
    pub fn eval_complex(&self, u: f64) -> Complex64 {
        let frac = u - u.floor();
        self.coefficients
            .iter()
            .map(|(&k, &c)| c * Complex64::from_polar(1.0, -2.0 * PI * (k as f64) * frac))
            .sum()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval_complex(u).re
    }
}

impl Serialize for FourierSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coeffs: Vec<(i64, f64, f64)> = self
            .coefficients
            .iter()
            .map(|(k, c)| (*k, c.re, c.im))
            .collect();
        let mut st = s.serialize_struct("FourierSeries", 2)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("coefficients", &coeffs)?;
        st.end()
    }
}

/// Constants of the mean expansion `μ_n ≈ log_{1/p} n + C + Q(log_{1/p} n)`.
#[derive(Debug, Clone, Serialize)]
pub struct MeanExpansion {
    pub params: SplitParams,
    pub c: f64,
    pub phi_star_0: f64,
    pub q: FourierSeries,
}

/// `C` and `Q` with the default number of harmonics.
pub fn mean_constant(params: &SplitParams, moments: &MomentTable) -> Result<MeanExpansion> {
    mean_constant_with(params, moments, DEFAULT_HARMONICS, DEFAULT_SERIES_CAP)
}

pub fn mean_constant_with(
    params: &SplitParams,
    moments: &MomentTable,
    harmonics: i64,
    cap: usize,
) -> Result<MeanExpansion> {
    params.require_splitting()?;
    let l = params.log_inv_p();
    let phi0 = phi_star(0, moments, cap)?.value.re;
    let mut coeffs = Vec::new();
    for k in 1..=harmonics {
        let g = gamma(chi(k, params))?;
        let ph = phi_star(k, moments, cap)?.value;
        coeffs.push((k, -(g - ph) / l));
    }
    Ok(MeanExpansion {
        params: params.clone(),
        c: -0.5 + (EULER_GAMMA + phi0) / l,
        phi_star_0: phi0,
        q: FourierSeries::from_nonnegative(FourierKind::Q, &coeffs),
    })
}

/// `log_{1/p} n + C + Q(log_{1/p} n)`.
pub fn asympt_mean(n: f64, expansion: &MeanExpansion) -> f64 {
    let u = expansion.params.log_base(n);
    u + expansion.c + expansion.q.eval(u)
}

/// `f̃1(x)` from its Mellin representation: the asymptotic part plus the
/// exponentially small [`f1_remainder`].
pub fn f1_exact_formula(
    x: f64,
    expansion: &MeanExpansion,
    tables: &Poissonizer,
    tolerance: f64,
) -> Result<f64> {
    Ok(asympt_mean(x, expansion) + f1_remainder(x, &expansion.params, tables, tolerance)?)
}

/// `Σ_{k≥0} e^{-p^{-k}x}(1 − f̃1(q p^{-k-1} x) + f̃1(p^{-k} x))`, truncated once
/// the damping factor is far below `tolerance`.
pub fn f1_remainder(
    x: f64,
    params: &SplitParams,
    tables: &Poissonizer,
    tolerance: f64,
) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "f1 formula needs x > 0, got {x}"
        )));
    }
    let (p, q) = (params.p_f64(), params.q_f64());
    let mut rest = 0.0;
    let mut scale = x;
    loop {
        let damp = (-scale).exp();
        // f̃1 grows at most like its argument, so later terms are smaller still
        if damp * (1.0 + scale / p) < 1e-3 * tolerance {
            break;
        }
        // each evaluation error is damped by e^{-p^{-k}x}
        let inner = (tolerance / damp).clamp(1e-11, 1e-3);
        let a = tables.eval(PoissonKind::F1, q * scale / p, inner)?.value;
        let b = tables.eval(PoissonKind::F1, scale, inner)?.value;
        rest += damp * (1.0 - a + b);
        scale /= p;
    }
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{mellin_quadrature, MellinKernel};

    fn moments(p: &SplitParams) -> MomentTable {
        MomentTable::float(p, 600).unwrap()
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(0, &SplitParams::half()), Complex64::new(0.0, 0.0));
        let c1 = chi(1, &SplitParams::half());
        assert!((c1.im - 2.0 * PI / 2f64.ln()).abs() < 1e-14);
        let c2 = chi(2, &SplitParams::new(1, 3).unwrap());
        assert!((c2.im - 4.0 * PI / 3f64.ln()).abs() < 1e-14);
        assert_eq!(c2.re, 0.0);
    }

    #[test]
    fn gamma_ratios_at_zero_are_harmonic() {
        let mut r = GammaRatios::new(Complex64::new(0.0, 0.0)).unwrap();
        for _ in 0..50 {
            let (j, v) = r.next_ratio();
            assert!((v.re - 1.0 / j as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_star_zero_one_third() {
        let third = SplitParams::new(1, 3).unwrap();
        let v = phi_star(0, &moments(&third), DEFAULT_SERIES_CAP).unwrap();
        assert!((v.value.re - 0.581_309_808_352_813_440_19).abs() < 1e-12);
        assert!(v.tail_bound < 1e-12);
    }

    #[test]
    fn phi_star_independent_real_sum() {
        // at k = 0 the series is Σ μ_j/j (q^j − 2^{-j}); summed directly here
        let quarter = SplitParams::new(1, 4).unwrap();
        let m = moments(&quarter);
        let direct: f64 = (1..500)
            .map(|j| m.mu()[j] / j as f64 * (0.75f64.powi(j as i32) - 0.5f64.powi(j as i32)))
            .sum();
        let v = phi_star(0, &m, DEFAULT_SERIES_CAP).unwrap();
        assert!((v.value.re - direct).abs() < 1e-13);
    }

    #[test]
    fn phi_star_vanishes_at_half() {
        let m = moments(&SplitParams::half());
        for k in -3..=3 {
            assert_eq!(
                phi_star(k, &m, 400).unwrap().value,
                Complex64::new(0.0, 0.0)
            );
        }
    }

    #[test]
    fn phi_star_matches_quadrature() {
        for (a, b) in [(1, 3), (1, 4)] {
            let p = SplitParams::new(a, b).unwrap();
            let tables = Poissonizer::new(&p, 800, 0).unwrap();
            for k in 0..=3 {
                let series = phi_star(k, tables.moments(), 400).unwrap().value;
                let quad = mellin_quadrature(&MellinKernel::Phi(&tables), chi(k, &p), 1e-10)
                    .unwrap()
                    .value;
                assert!(
                    (series - quad).norm() < 1e-8,
                    "p={p} k={k}: {series} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn insufficient_moments_reported() {
        let third = SplitParams::new(1, 3).unwrap();
        let short = MomentTable::float(&third, 20).unwrap();
        assert!(matches!(
            phi_star(0, &short, 400),
            Err(Error::InsufficientMoments { .. })
        ));
    }

    #[test]
    fn mean_constant_one_third() {
        let third = SplitParams::new(1, 3).unwrap();
        let e = mean_constant(&third, &moments(&third)).unwrap();
        assert!((e.c - 0.554_535_330_802_526_966_05).abs() < 1e-10);
        assert_eq!(e.q.coefficient(0), Complex64::new(0.0, 0.0));
        assert_eq!(e.q.coefficient(-2), e.q.coefficient(2).conj());
    }

    #[test]
    fn mean_constant_half() {
        let half = SplitParams::half();
        let e = mean_constant(&half, &moments(&half)).unwrap();
        let l = 2f64.ln();
        assert!((e.c - (EULER_GAMMA / l - 0.5)).abs() < 1e-15);
        for k in 1..=5 {
            let want = -gamma(chi(k, &half)).unwrap() / l;
            assert!((e.q.coefficient(k) - want).norm() < 1e-16);
        }
    }

    #[test]
    fn fourier_is_real_and_periodic() {
        let third = SplitParams::new(1, 3).unwrap();
        let e = mean_constant(&third, &moments(&third)).unwrap();
        for i in 0..50 {
            let u = i as f64 / 50.0;
            assert!(e.q.eval_complex(u).im.abs() < 1e-12);
            assert!((e.q.eval(u + 1.0) - e.q.eval(u)).abs() < 1e-12);
        }
        assert!(e.q.tail_norm(5) < 1e-12);
        assert_eq!(e.q.truncated(5).max_harmonic(), 5);
    }

    #[test]
    fn mean_approximates_exact() {
        for (p, n) in [
            (SplitParams::new(1, 3).unwrap(), 6561usize),
            (SplitParams::half(), 1024),
        ] {
            let m = MomentTable::float(&p, n).unwrap();
            let e = mean_constant(&p, &m).unwrap();
            let err = (m.mu()[n] - asympt_mean(n as f64, &e)).abs();
            assert!(err < 2e-3, "p={p}: {err}");
        }
    }

    #[test]
    fn mean_shifts_by_one_per_period() {
        let third = SplitParams::new(1, 3).unwrap();
        let e = mean_constant(&third, &moments(&third)).unwrap();
        let d = asympt_mean(300.0, &e) - asympt_mean(100.0, &e);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f1_formula_matches_series() {
        let third = SplitParams::new(1, 3).unwrap();
        let tables = Poissonizer::new(&third, 800, 0).unwrap();
        let e = mean_constant(&third, tables.moments()).unwrap();
        let direct = tables.eval(PoissonKind::F1, 20.0, 1e-12).unwrap().value;
        let formula = f1_exact_formula(20.0, &e, &tables, 1e-12).unwrap();
        assert!((direct - formula).abs() < 1e-8, "{direct} vs {formula}");

        let half = SplitParams::half();
        let tables = Poissonizer::new(&half, 800, 0).unwrap();
        let e = mean_constant(&half, tables.moments()).unwrap();
        let closed: f64 = (1..200).map(|k| 1.0 - (-30.0 / 2f64.powi(k)).exp()).sum();
        let formula = f1_exact_formula(30.0, &e, &tables, 1e-12).unwrap();
        assert!((closed - formula).abs() < 1e-8);
    }

    #[test]
    fn f1_remainder_is_exponentially_small() {
        let third = SplitParams::new(1, 3).unwrap();
        let tables = Poissonizer::new(&third, 800, 0).unwrap();
        let rest = f1_remainder(50.0, &third, &tables, 1e-30).unwrap();
        assert!(rest != 0.0);
        assert!(rest.abs() <= (-50f64).exp() * 1.01);
    }
}
