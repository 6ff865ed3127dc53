//! Globally adaptive Gauss–Kronrod (7/15) integration of complex-valued
//! integrands over a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of a successful integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Refinement settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub tolerance: f64,
    /// Maximum number of integrand evaluations.
    pub budget: usize,
    /// Number of equal panels before adaptive refinement starts.
    pub initial_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            budget: 400_000,
            initial_panels: 32,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // largest error first; ties broken by position so refinement order is fixed
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(centre - dx)? + f(centre + dx)?;
        k += pair * WGK[i];
        if i % 2 == 1 {
            g += pair * WG[i / 2];
        }
    }
    let value = k * half;
    let error = ((k - g) * half).norm();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonFinite("quadrature integrand"));
    }
    Ok(Panel { a, b, value, error })
}

/// `∫_a^b f`, refining the panel with the largest error estimate until the
/// summed estimate is below `config.tolerance`.
pub fn integrate<F>(f: F, a: f64, b: f64, config: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{a}, {b}] is empty or unbounded"
        )));
    }
    let panels = config.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 4);
    let mut evaluations = 0;
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == panels { b } else { lo + width };
        heap.push(kronrod(&f, lo, hi)?);
        evaluations += 15;
    }
    loop {
        // sum in a fixed order so the result does not depend on heap layout
        let mut parts: Vec<Panel> = heap.iter().copied().collect();
        parts.sort_by(|x, y| x.a.total_cmp(&y.a));
        let value: Complex64 = parts.iter().map(|p| p.value).sum();
        let error: f64 = parts.iter().map(|p| p.error).sum();
        if error <= config.tolerance {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if evaluations + 30 > config.budget || mid <= worst.a || mid >= worst.b {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                evaluations,
                error,
            });
        }
        heap.push(kronrod(&f, worst.a, mid)?);
        heap.push(kronrod(&f, mid, worst.b)?);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<Complex64> {
        move |x| Ok(Complex64::new(f(x), 0.0))
    }

    #[test]
    fn polynomials_and_exponentials() {
        let cfg = QuadratureConfig::default();
        let r = integrate(real(|x| x * x), 0.0, 3.0, &cfg).unwrap();
        assert!((r.value.re - 9.0).abs() < 1e-13);
        assert!(r.error_estimate <= cfg.tolerance);
        let r = integrate(real(|x| (-x).exp()), 0.0, 40.0, &cfg).unwrap();
        assert!((r.value.re - (1.0 - (-40f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫_0^{2π·20} e^{ix} e^{-x/100} dx
        let f = |x: f64| Ok(Complex64::new(0.0, x).exp() * (-x / 100.0).exp());
        let b = 40.0 * std::f64::consts::PI;
        let r = integrate(f, 0.0, b, &QuadratureConfig::default()).unwrap();
        let c = Complex64::new(-0.01, 1.0);
        let exact = ((c * b).exp() - 1.0) / c;
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadratureConfig {
            tolerance: 1e-14,
            budget: 200,
            initial_panels: 1,
        };
        let err = integrate(real(|x: f64| x.sqrt()), 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn deterministic() {
        let f = real(|x: f64| (x * 7.0).sin() / (1.0 + x));
        let cfg = QuadratureConfig::default();
        let a = integrate(&f, 0.0, 30.0, &cfg).unwrap();
        let b = integrate(&f, 0.0, 30.0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(integrate(real(|x| x), 1.0, 1.0, &QuadratureConfig::default()).is_err());
    }
}
