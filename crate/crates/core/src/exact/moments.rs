use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use super::float::{compensated_sum, float_moments, ln_factorials};
use super::params::SplitParams;
use super::pmf::{binomial_row, powers, rational_string, scaled_moments, ExactConfig};
use crate::error::{Error, Result};

/// Exact moment sequences of `X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    /// `μ_n = E(X_n)`.
    pub mu: Vec<BigRational>,
    /// `E(X_n^2)`.
    pub m2: Vec<BigRational>,
    /// `μ_n^[2] = Σ_k C(n,k) μ_k μ_{n-k}`.
    pub mu2conv: Vec<BigRational>,
    /// `μ_n^[11] = Σ_k C(n,k) p^k q^{n-k} μ_k μ_{n-k}`.
    pub mu11conv: Vec<BigRational>,
}

/// Moment sequences of `X_n` for `n = 0..=max_n`.
///
/// Entries up to `exact_upto` come from exact rational arithmetic; every
/// entry is also available as `f64` (converted from the exact value where one
/// exists, from the compensated floating-point recurrence otherwise).
#[derive(Debug, Clone)]
pub struct MomentTable {
    params: SplitParams,
    exact: ExactMoments,
    mu: Vec<f64>,
    m2: Vec<f64>,
    mu2conv: Vec<f64>,
    mu11conv: Vec<f64>,
}

/// Exact moments up to `min(n, ceiling)` and floats for the rest.
pub fn moment_table(params: &SplitParams, n: usize, config: &ExactConfig) -> Result<MomentTable> {
    MomentTable::new(params, n, n.min(config.ceiling))
}

impl MomentTable {
    pub fn new(params: &SplitParams, max_n: usize, exact_upto: usize) -> Result<Self> {
        params.require_splitting()?;
        let exact_upto = exact_upto.min(max_n);
        let exact = exact_moments(params, exact_upto);
        let (mut mu, mut m2) = float_moments(params, max_n);
        for n in 0..=exact_upto {
            mu[n] = SplitParams::as_ratio_f64(&exact.mu[n]);
            m2[n] = SplitParams::as_ratio_f64(&exact.m2[n]);
        }
        let (mut mu2conv, mut mu11conv) = float_convolutions(params, &mu);
        for n in 0..=exact_upto {
            mu2conv[n] = SplitParams::as_ratio_f64(&exact.mu2conv[n]);
            mu11conv[n] = SplitParams::as_ratio_f64(&exact.mu11conv[n]);
        }
        Ok(Self {
            params: params.clone(),
            exact,
            mu,
            m2,
            mu2conv,
            mu11conv,
        })
    }

    /// Floating-point table only; used by the numeric layers.
    pub fn float(params: &SplitParams, max_n: usize) -> Result<Self> {
        Self::new(params, max_n, 0)
    }

    pub fn params(&self) -> &SplitParams {
        &self.params
    }

    pub fn max_n(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn exact_upto(&self) -> usize {
        self.exact.mu.len() - 1
    }

    pub fn exact(&self) -> &ExactMoments {
        &self.exact
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn m2(&self) -> &[f64] {
        &self.m2
    }

    /// `μ_n^[2]`; overflows to infinity past `n ≈ 1020`.
    pub fn mu2conv(&self) -> &[f64] {
        &self.mu2conv
    }

    pub fn mu11conv(&self) -> &[f64] {
        &self.mu11conv
    }

    pub fn variance(&self, n: usize) -> f64 {
        self.m2[n] - self.mu[n] * self.mu[n]
    }

    pub(crate) fn require(&self, needed: usize) -> Result<()> {
        if needed > self.max_n() {
            Err(Error::InsufficientMoments {
                available: self.max_n() + 1,
                needed: needed + 1,
            })
        } else {
            Ok(())
        }
    }
}

fn exact_moments(params: &SplitParams, n_max: usize) -> ExactMoments {
    let sm = scaled_moments(params, n_max);
    let ratio = |num: &BigInt, den: &BigInt| BigRational::new(num.clone(), den.clone());
    let mu = (0..=n_max)
        .map(|n| ratio(&sm.mu[n], &sm.scale[n]))
        .collect();
    let m2 = (0..=n_max)
        .map(|n| ratio(&sm.m2[n], &sm.scale[n]))
        .collect();

    let a = params.numer() as i64;
    let b = params.denom() as i64;
    let pa = powers(a, n_max);
    let pqa = powers(b - a, n_max);
    let pb = powers(b, n_max);
    let mut mu2conv = Vec::with_capacity(n_max + 1);
    let mut mu11conv = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        // lift every μ_k (k ≤ n) to the common scale E_n
        let mut lifted = vec![BigInt::default(); n + 1];
        let mut carry = BigInt::from(1);
        for k in (0..=n).rev() {
            lifted[k] = &sm.mu[k] * &carry;
            carry *= &sm.factor[k];
        }
        let binom = binomial_row(n);
        let mut s2 = BigInt::default();
        let mut s11 = BigInt::default();
        for k in 0..=n {
            let prod = &binom[k] * &lifted[k] * &lifted[n - k];
            s11 += &prod * &pa[k] * &pqa[n - k];
            s2 += prod;
        }
        let scale2 = &sm.scale[n] * &sm.scale[n];
        mu11conv.push(BigRational::new(s11, &scale2 * &pb[n]));
        mu2conv.push(BigRational::new(s2, scale2));
    }
    ExactMoments {
        mu,
        m2,
        mu2conv,
        mu11conv,
    }
}

fn float_convolutions(params: &SplitParams, mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n_max = mu.len() - 1;
    let lf = ln_factorials(n_max);
    let (lnp, lnq) = (params.p_f64().ln(), params.q_f64().ln());
    let mut c2 = Vec::with_capacity(n_max + 1);
    let mut c11 = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let lnc = |k: usize| lf[n] - lf[k] - lf[n - k];
        c2.push(compensated_sum(
            (0..=n).map(|k| lnc(k).exp() * mu[k] * mu[n - k]),
        ));
        c11.push(compensated_sum((0..=n).map(|k| {
            (lnc(k) + k as f64 * lnp + (n - k) as f64 * lnq).exp() * mu[k] * mu[n - k]
        })));
    }
    (c2, c11)
}

impl Serialize for MomentTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let strings =
            |v: &[BigRational]| -> Vec<String> { v.iter().map(rational_string).collect() };
        let mut s = serializer.serialize_struct("MomentTable", 6)?;
        s.serialize_field("p", &self.params)?;
        s.serialize_field("max_n", &self.max_n())?;
        s.serialize_field("mu", &strings(&self.exact.mu))?;
        s.serialize_field("m2", &strings(&self.exact.m2))?;
        s.serialize_field("mu2conv", &strings(&self.exact.mu2conv))?;
        s.serialize_field("mu11conv", &strings(&self.exact.mu11conv))?;
        s.end()
    }
}
