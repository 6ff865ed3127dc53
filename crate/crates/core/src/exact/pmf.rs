//! Exact laws of the four equivalent models.
//!
//! Every recurrence here has the shape
//! `P(M_n = j) = Σ_c w(n, c) P(M_c = j - 1) / d_n` with integer weights once
//! `p = a/b` is cleared of denominators. Probabilities are carried as
//! integers over the running product `E_n = d_1 ⋯ d_n`, so the inner loops
//! never take a gcd; fractions are reduced once, on output.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::params::SplitParams;
use crate::error::{Error, Result};

/// Default largest `n` served by exact rational arithmetic.
pub const DEFAULT_EXACT_CEILING: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactConfig {
    pub ceiling: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            ceiling: DEFAULT_EXACT_CEILING,
        }
    }
}

impl ExactConfig {
    pub(crate) fn check(&self, n: usize) -> Result<()> {
        if n > self.ceiling {
            Err(Error::ResourceCeiling {
                n,
                ceiling: self.ceiling,
            })
        } else {
            Ok(())
        }
    }
}

/// Which random variable a law describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Model {
    /// The splitting process `X_n = X_{I_n} + 1`.
    X,
    /// Cars parked after the first one in corner-preference parking.
    Y,
    /// Depth of a random key in a PATRICIA trie.
    Z,
    /// Left arm / distinct geometric values / occupied urns.
    W,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An exact probability mass function on the nonnegative integers.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPmf {
    pub n: usize,
    pub model: Model,
    probs: BTreeMap<usize, BigRational>,
}

impl ExactPmf {
    pub fn point_mass(n: usize, model: Model, value: usize) -> Self {
        Self {
            n,
            model,
            probs: BTreeMap::from([(value, BigRational::one())]),
        }
    }

    /// Builds a law from `(value, probability)` pairs, dropping zeros.
    pub fn from_pairs(
        n: usize,
        model: Model,
        pairs: impl IntoIterator<Item = (usize, BigRational)>,
    ) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (k, p) in pairs {
            if p.is_negative() {
                return Err(Error::InvalidParameter(format!(
                    "negative probability at {k}"
                )));
            }
            if !p.is_zero() {
                *probs.entry(k).or_insert_with(BigRational::zero) += p;
            }
        }
        Ok(Self { n, model, probs })
    }

    pub fn prob(&self, k: usize) -> BigRational {
        self.probs
            .get(&k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn prob_f64(&self, k: usize) -> f64 {
        self.probs
            .get(&k)
            .map(SplitParams::as_ratio_f64)
            .unwrap_or(0.0)
    }

    /// Nonzero entries in increasing order of value.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.probs.iter().map(|(&k, p)| (k, p))
    }

    pub fn support(&self) -> Option<(usize, usize)> {
        Some((*self.probs.keys().next()?, *self.probs.keys().next_back()?))
    }

    pub fn total(&self) -> BigRational {
        self.probs
            .values()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn mean(&self) -> BigRational {
        self.probs.iter().fold(BigRational::zero(), |acc, (&k, p)| {
            acc + p * BigInt::from(k)
        })
    }

    pub fn to_f64_vec(&self) -> Vec<(usize, f64)> {
        self.iter()
            .map(|(k, p)| (k, SplitParams::as_ratio_f64(p)))
            .collect()
    }

    /// Same distribution, ignoring `n` and the model tag.
    pub fn same_law(&self, other: &ExactPmf) -> bool {
        self.probs == other.probs
    }
}

impl Serialize for ExactPmf {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Probs<'a>(&'a BTreeMap<usize, BigRational>);
        impl Serialize for Probs<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (k, p) in self.0 {
                    map.serialize_entry(&k.to_string(), &rational_string(p))?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("n", &self.n)?;
        map.serialize_entry("model", &self.model)?;
        map.serialize_entry("probs", &Probs(&self.probs))?;
        map.end()
    }
}

/// `"num/den"`, the wire format for exact rationals.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigInt::one();
    for k in 0..=n {
        row.push(c.clone());
        c = c * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    row
}

pub(crate) fn powers(base: i64, n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigInt::one();
    for _ in 0..=n {
        out.push(acc.clone());
        acc *= base;
    }
    out
}

/// `z^e` with `0^0 = 1`, the convention needed when `p = 1/2` makes `q - p = 0`.
fn pow_zero_safe(powers: &[BigInt], base_is_zero: bool, e: usize) -> BigInt {
    if base_is_zero {
        if e == 0 {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    } else {
        powers[e].clone()
    }
}

/// One step of a splitting recurrence in integer form.
pub(crate) struct Step {
    /// `weights[c]` is the total weight sent to child size `c < n`.
    pub weights: Vec<BigInt>,
    pub denominator: BigInt,
}

/// Integer weights of `P(I_n = k)`, `k = 0..n-1`, over `b^n - (b-a)^n`.
pub(crate) fn x_step(params: &SplitParams, n: usize) -> Step {
    let a = params.numer() as i64;
    let b = params.denom() as i64;
    let binom = binomial_row(n);
    let pa = powers(a, n);
    let pqa = powers(b - a, n);
    let diff = b - 2 * a;
    let pd = powers(diff, n);
    let weights = (0..n)
        .map(|k| {
            let tail = &pqa[n - k] - pow_zero_safe(&pd, diff == 0, n - k);
            &binom[k] * &pa[k] * tail
        })
        .collect();
    Step {
        weights,
        denominator: powers(b, n)[n].clone() - &pqa[n],
    }
}

fn y_step(m: usize, n: usize) -> Step {
    let binom = binomial_row(n);
    let pm = powers(m as i64, n);
    let pm1 = powers(m as i64 - 1, n);
    let mut weights = vec![BigInt::zero(); n];
    for k in 1..=n {
        weights[n - k] = &binom[k] * (&pm[k] - pow_zero_safe(&pm1, m == 1, k));
    }
    Step {
        weights,
        denominator: powers(m as i64 + 1, n)[n].clone() - &pm[n],
    }
}

fn w_step(params: &SplitParams, n: usize) -> Step {
    let a = params.numer() as i64;
    let b = params.denom() as i64;
    let binom = binomial_row(n);
    let pa = powers(a, n);
    let pqa = powers(b - a, n);
    let mut weights = vec![BigInt::zero(); n];
    for k in 1..=n {
        weights[n - k] = &binom[k] * &pa[k] * &pqa[n - k];
    }
    Step {
        weights,
        denominator: powers(b, n)[n].clone() - &pqa[n],
    }
}

fn z_step(params: &SplitParams, n: usize) -> Step {
    let a = params.numer() as i64;
    let b = params.denom() as i64;
    let binom = binomial_row(n);
    let pa = powers(a, n);
    let pqa = powers(b - a, n);
    let mut weights = vec![BigInt::zero(); n];
    for k in 1..n {
        let v = &binom[k] * &pa[k] * &pqa[n - k];
        weights[k] += &v * BigInt::from(k);
        weights[n - k] += v * BigInt::from(n - k);
    }
    Step {
        weights,
        denominator: BigInt::from(n) * (powers(b, n)[n].clone() - &pa[n] - &pqa[n]),
    }
}

/// Law of `M_n` as integers over `scale = E_n`, for values `lo..lo+nums.len()`.
struct ScaledLaw {
    factor: BigInt,
    scale: BigInt,
    lo: usize,
    nums: Vec<BigInt>,
}

impl ScaledLaw {
    fn get(&self, j: usize) -> Option<&BigInt> {
        j.checked_sub(self.lo).and_then(|i| self.nums.get(i))
    }

    fn hi(&self) -> usize {
        self.lo + self.nums.len() - 1
    }
}

/// Runs a splitting recurrence for all sizes up to `n_max`. `base(n)` gives
/// the fixed value for sizes outside the recurrence.
fn run_recurrence(
    n_max: usize,
    base: impl Fn(usize) -> Option<usize>,
    step: impl Fn(usize) -> Step,
) -> Vec<ScaledLaw> {
    let mut laws: Vec<ScaledLaw> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let prev_scale = laws.last().map_or_else(BigInt::one, |l| l.scale.clone());
        if let Some(v) = base(n) {
            laws.push(ScaledLaw {
                factor: BigInt::one(),
                nums: vec![prev_scale.clone()],
                scale: prev_scale,
                lo: v,
            });
            continue;
        }
        let Step {
            weights,
            denominator,
        } = step(n);
        debug_assert_eq!(
            weights.iter().fold(BigInt::zero(), |a, w| a + w),
            denominator
        );
        let children: Vec<usize> = (0..n).filter(|&c| !weights[c].is_zero()).collect();
        let lo = children.iter().map(|&c| laws[c].lo).min().unwrap_or(0) + 1;
        let hi = children.iter().map(|&c| laws[c].hi()).max().unwrap_or(0) + 1;
        let mut nums = Vec::with_capacity(hi - lo + 1);
        for j in lo..=hi {
            let mut acc = BigInt::zero();
            for (c, law) in laws.iter().enumerate() {
                if c > 0 && !acc.is_zero() {
                    acc *= &law.factor;
                }
                if weights[c].is_zero() {
                    continue;
                }
                if let Some(x) = law.get(j - 1) {
                    acc += &weights[c] * x;
                }
            }
            nums.push(acc);
        }
        laws.push(ScaledLaw {
            scale: prev_scale * &denominator,
            factor: denominator,
            lo,
            nums,
        });
    }
    laws
}

fn to_pmf(n: usize, model: Model, law: &ScaledLaw) -> ExactPmf {
    let probs = law
        .nums
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (law.lo + i, BigRational::new(x.clone(), law.scale.clone())))
        .collect();
    ExactPmf { n, model, probs }
}

/// `P(I_n = k)` for `k = 0..n-1`.
pub fn split_pmf(params: &SplitParams, n: usize) -> Result<Vec<BigRational>> {
    params.require_splitting()?;
    if n == 0 {
        return Err(Error::InvalidParameter("split_pmf needs n ≥ 1".into()));
    }
    let Step {
        weights,
        denominator,
    } = x_step(params, n);
    Ok(weights
        .into_iter()
        .map(|w| BigRational::new(w, denominator.clone()))
        .collect())
}

/// Exact laws of `X_0, …, X_{n_max}`.
pub fn exact_pmf_x_table(
    params: &SplitParams,
    n_max: usize,
    config: &ExactConfig,
) -> Result<Vec<ExactPmf>> {
    params.require_splitting()?;
    config.check(n_max)?;
    let laws = run_recurrence(n_max, |n| (n == 0).then_some(0), |n| x_step(params, n));
    Ok(laws
        .iter()
        .enumerate()
        .map(|(n, l)| to_pmf(n, Model::X, l))
        .collect())
}

pub fn exact_pmf_x(params: &SplitParams, n: usize, config: &ExactConfig) -> Result<ExactPmf> {
    Ok(exact_pmf_x_table(params, n, config)?
        .pop()
        .expect("non-empty"))
}

/// Law of `Y_n` straight from the parking enumeration, with cars `[0,m]^n`.
pub fn exact_pgf_y(m: usize, n: usize, config: &ExactConfig) -> Result<ExactPmf> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    config.check(n)?;
    let laws = run_recurrence(n, |n| (n == 0).then_some(0), |n| y_step(m, n));
    Ok(to_pmf(n, Model::Y, &laws[n]))
}

/// Depth of a random key in a PATRICIA trie on `n` Bernoulli(p) keys.
pub fn exact_pmf_z(params: &SplitParams, n: usize, config: &ExactConfig) -> Result<ExactPmf> {
    config.check(n)?;
    let laws = run_recurrence(n, |n| (n <= 1).then_some(0), |n| z_step(params, n));
    Ok(to_pmf(n, Model::Z, &laws[n]))
}

/// Left arm length `W_n`, equivalently distinct values among `n` geometrics.
pub fn exact_pmf_w(params: &SplitParams, n: usize, config: &ExactConfig) -> Result<ExactPmf> {
    config.check(n)?;
    let laws = run_recurrence(n, |n| (n == 0).then_some(0), |n| w_step(params, n));
    Ok(to_pmf(n, Model::W, &laws[n]))
}

/// Scaled running numerators for the mean and second moment of `X_n`.
pub(crate) struct ScaledMoments {
    pub scale: Vec<BigInt>,
    pub factor: Vec<BigInt>,
    pub mu: Vec<BigInt>,
    pub m2: Vec<BigInt>,
}

/// `E(X_n)` and `E(X_n^2)` over the common scale `E_n`, by the first-step
/// recurrences `μ_n = 1 + Σ P(I_n=k) μ_k` and
/// `E X_n^2 = 1 + Σ P(I_n=k)(2μ_k + E X_k^2)`.
pub(crate) fn scaled_moments(params: &SplitParams, n_max: usize) -> ScaledMoments {
    let mut out = ScaledMoments {
        scale: vec![BigInt::one()],
        factor: vec![BigInt::one()],
        mu: vec![BigInt::zero()],
        m2: vec![BigInt::zero()],
    };
    for n in 1..=n_max {
        let Step {
            weights,
            denominator,
        } = x_step(params, n);
        let (mut acc1, mut acc2) = (BigInt::zero(), BigInt::zero());
        for c in 0..n {
            if c > 0 {
                acc1 *= &out.factor[c];
                acc2 *= &out.factor[c];
            }
            acc1 += &weights[c] * &out.mu[c];
            acc2 += &weights[c] * (&out.mu[c] * 2 + &out.m2[c]);
        }
        let scale = &out.scale[n - 1] * &denominator;
        out.mu.push(acc1 + &scale);
        out.m2.push(acc2 + &scale);
        out.scale.push(scale);
        out.factor.push(denominator);
    }
    out
}
