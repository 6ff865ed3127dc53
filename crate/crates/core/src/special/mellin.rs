//! Mellin-type integrals `∫_0^∞ e^{-t} t^{s-1} g(t) dt`, computed on the
//! logarithmic scale `t = e^v`.

use std::fmt;

use num_complex::Complex64;

use super::gamma::cpow;
use super::quadrature::{integrate, QuadratureConfig, QuadratureResult};
use crate::error::{Error, Result};
use crate::exact::{PoissonKind, Poissonizer};

// accuracy requested from each Poisson evaluation inside the integrand
const INNER_TOLERANCE: f64 = 1e-11;

/// The factor `g` in the integrand `e^{-t} t^{s-1} g(t)`.
pub enum MellinKernel<'a> {
    /// `g(t) = f̃1(qt/p) - f̃1(t)`.
    Phi(&'a Poissonizer),
    /// `g(t) = Ṽ(qt/p) - Ṽ(t) + (1 - e^{-t})(1 + f̃1(t) - f̃1(qt/p))²`.
    PhiV(&'a Poissonizer),
    /// Any `g` with at most polynomial growth and `g(t) = O(t)` near 0.
    Custom(&'a (dyn Fn(f64) -> Result<f64> + Sync)),
}

impl fmt::Debug for MellinKernel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Phi(t) => write!(f, "Phi(p = {})", t.params()),
            Self::PhiV(t) => write!(f, "PhiV(p = {})", t.params()),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl MellinKernel<'_> {
    /// Ratio `q/p` for the built-in kernels.
    fn ratio(tables: &Poissonizer) -> f64 {
        let p = tables.params();
        p.q_f64() / p.p_f64()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        // the integrand carries e^{-t}, so larger t tolerates larger errors
        let tol = (INNER_TOLERANCE * t.exp().max(1.0)).min(1e-3);
        match self {
            Self::Phi(tables) => {
                let r = Self::ratio(tables);
                if r == 1.0 {
                    return Ok(0.0);
                }
                let a = tables.eval(PoissonKind::F1, r * t, tol)?;
                let b = tables.eval(PoissonKind::F1, t, tol)?;
                Ok(a.value - b.value)
            }
            Self::PhiV(tables) => {
                let r = Self::ratio(tables);
                let v_rt = tables.eval(PoissonKind::V, r * t, tol)?.value;
                let v_t = tables.eval(PoissonKind::V, t, tol)?.value;
                let f_t = tables.eval(PoissonKind::F1, t, tol)?.value;
                let f_rt = tables.eval(PoissonKind::F1, r * t, tol)?.value;
                let d = 1.0 + f_t - f_rt;
                Ok(v_rt - v_t + (-(-t).exp_m1()) * d * d)
            }
            Self::Custom(g) => g(t),
        }
    }
}

/// Upper limit `T = max(50, |s| + 50)`.
pub fn upper_limit(s: Complex64) -> f64 {
    (s.norm() + 50.0).max(50.0)
}

/// Lower limit below which `∫ t^{Re s} dt` (the kernel being `O(t)`) is
/// under half the tolerance.
fn lower_limit(s: Complex64, tolerance: f64) -> f64 {
    let e = s.re + 1.0;
    (0.5 * tolerance * e).powf(1.0 / e).clamp(1e-300, 1e-20)
}

/// `∫_0^∞ e^{-t} t^{s-1} g(t) dt` for `Re s > -1`.
pub fn mellin_quadrature(
    kernel: &MellinKernel<'_>,
    s: Complex64,
    tolerance: f64,
) -> Result<QuadratureResult> {
    if !(s.re > -1.0) || !s.im.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Mellin quadrature needs Re s > -1, got {s}"
        )));
    }
    let lo = lower_limit(s, tolerance).ln();
    let hi = upper_limit(s).ln();
    // dt/t = dv, so the integrand on the v-scale is e^{-t} t^s g(t)
    let f = |v: f64| -> Result<Complex64> {
        let t = v.exp();
        let g = kernel.eval(t)?;
        if g == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(cpow(t, s)? * ((-t).exp() * g))
    };
    let config = QuadratureConfig {
        tolerance: 0.5 * tolerance,
        ..QuadratureConfig::default()
    };
    let mut r = integrate(f, lo, hi, &config)?;
    // the discarded e^{-T} tail
    r.error_estimate += (-upper_limit(s)).exp() * upper_limit(s).powf(s.re + 2.0);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::SplitParams;
    use crate::special::gamma::gamma;

    #[test]
    fn custom_kernel_recovers_gamma() {
        // g(t) = t gives Γ(s+1)
        let g = |t: f64| Ok(t);
        let k = MellinKernel::Custom(&g);
        for s in [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 3.0),
            Complex64::new(2.0, -7.0),
        ] {
            let r = mellin_quadrature(&k, s, 1e-11).unwrap();
            let exact = gamma(s + 1.0).unwrap();
            assert!((r.value - exact).norm() < 1e-10, "s = {s}");
            assert!(r.error_estimate <= 1e-11);
        }
    }

    #[test]
    fn phi_vanishes_at_half() {
        let tables = Poissonizer::new(&SplitParams::half(), 300, 0).unwrap();
        let r = mellin_quadrature(&MellinKernel::Phi(&tables), Complex64::new(0.0, 9.0), 1e-10)
            .unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn phi_at_zero_for_one_third() {
        let tables = Poissonizer::new(&SplitParams::new(1, 3).unwrap(), 600, 0).unwrap();
        let r = mellin_quadrature(&MellinKernel::Phi(&tables), Complex64::new(0.0, 0.0), 1e-11)
            .unwrap();
        assert!(
            (r.value.re - 0.581_309_808_352_813_44).abs() < 1e-9,
            "{}",
            r.value
        );
        assert!(r.value.im.abs() < 1e-15);
    }

    #[test]
    fn rejects_left_of_strip() {
        let g = |t: f64| Ok(t);
        let k = MellinKernel::Custom(&g);
        assert!(mellin_quadrature(&k, Complex64::new(-1.5, 0.0), 1e-8).is_err());
    }
}
