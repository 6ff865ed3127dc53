//! Asymptotic distribution of `X_n`: the normalizer `Ω`, the functions
//! `R̂_j`, and the fluctuating density and distribution function.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{
    poisson_weights, truncation_index, CompensatedSum, FloatPmfTable, Poissonizer, SplitParams,
};

/// Terms with `p·z` above this are dropped from the density sum.
pub const DAMPING_CUTOFF: f64 = 45.0;
/// Factors `1 − e^{-y}` with `e^{-y}` below this are taken as 1.
const OMEGA_CUTOFF: f64 = 1e-18;

/// `Ω(x) = Π_{j≥0} (1 − e^{-p^{-j} x})`.
pub fn omega(x: f64, params: &SplitParams) -> f64 {
    omega_factors(x, params).iter().product()
}

fn omega_factors(x: f64, params: &SplitParams) -> Vec<f64> {
    let inv_p = 1.0 / params.p_f64();
    let mut y = x;
    let mut out = Vec::new();
    while (-y).exp() >= OMEGA_CUTOFF {
        out.push(-(-y).exp_m1());
        y *= inv_p;
    }
    out
}

/// Bound on `1 − Ω(x)/Ω_truncated(x)`: the omitted `Σ e^{-p^{-j}x}`.
pub fn omega_tail_bound(x: f64, params: &SplitParams) -> f64 {
    let inv_p = 1.0 / params.p_f64();
    let mut y = x;
    while (-y).exp() >= OMEGA_CUTOFF {
        y *= inv_p;
    }
    let mut tail = 0.0;
    while (-y).exp() > 0.0 {
        tail += (-y).exp();
        y *= inv_p;
    }
    tail
}

fn require_table(table: &FloatPmfTable, x: f64) -> Result<usize> {
    let m = truncation_index(x);
    if m > table.max_n() {
        return Err(Error::Unattainable {
            requested: 0.0,
            reason: format!(
                "Poisson argument {x} needs the law of X_n up to n = {m}, table holds {}",
                table.max_n()
            ),
        });
    }
    Ok(m)
}

/// `Ã_j(x)` and `S̃_j(x)` for all `j` at one argument.
struct PoissonizedLaws {
    weights: Vec<f64>,
}

impl PoissonizedLaws {
    fn new(table: &FloatPmfTable, x: f64) -> Result<Self> {
        let m = require_table(table, x)?;
        let mut weights = poisson_weights(x, m);
        let total: f64 = weights.iter().copied().collect::<CompensatedSum>().value();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { weights })
    }

    fn a(&self, table: &FloatPmfTable, j: usize) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * table.law(n).prob(j))
            .collect::<CompensatedSum>()
            .value()
    }

    fn s(&self, table: &FloatPmfTable, j: usize) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * table.law(n).cdf(j))
            .collect::<CompensatedSum>()
            .value()
    }
}

/// `R̂_j(x) = Ω(x) e^{-px} Ã_j(qx)`.
pub fn hat_r(j: usize, x: f64, tables: &Poissonizer) -> Result<f64> {
    let params = tables.params();
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("R̂ needs x > 0, got {x}")));
    }
    let front = omega(x, params) * (-params.p_f64() * x).exp();
    if j == 0 {
        return Ok(front * (-params.q_f64() * x).exp());
    }
    let table = tables.pmf_table();
    let laws = PoissonizedLaws::new(table, params.q_f64() * x)?;
    Ok(front * laws.a(table, j))
}

/// Approximate law of `X_n − ⌊log_{1/p} n⌋` over a window of offsets.
#[derive(Debug, Clone, Serialize)]
pub struct DensityApprox {
    pub n: u64,
    pub floor: u64,
    pub eta: f64,
    /// Offset `k` to approximate `P(X_n = floor + k)`.
    pub terms: BTreeMap<i64, f64>,
    /// Offset `k` to approximate `P(X_n <= floor + k)`.
    pub cumulative: BTreeMap<i64, f64>,
    /// Terms with `p·z` above this were dropped (each is below `e^{-p z}`).
    pub damping_cutoff: f64,
}

impl DensityApprox {
    pub fn total(&self) -> f64 {
        self.terms
            .values()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn prob(&self, k: i64) -> f64 {
        self.terms.get(&k).copied().unwrap_or(0.0)
    }

    /// Approximate `P(X_n = value)`.
    pub fn prob_value(&self, value: u64) -> f64 {
        self.prob(value as i64 - self.floor as i64)
    }

    pub fn cdf(&self, k: i64) -> f64 {
        self.cumulative.get(&k).copied().unwrap_or(0.0)
    }

    pub fn min_term(&self) -> f64 {
        self.terms.values().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Σ_{j≥0} R̂_j(p^{-η+k-j})` and `Σ_{j≥0} Ŝ_j(p^{-η+k-j})` for
/// `k in k_lo..=k_hi`.
pub fn density_approx(n: u64, k_lo: i64, k_hi: i64, tables: &Poissonizer) -> Result<DensityApprox> {
    let params = tables.params();
    params.require_splitting()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "density needs n >= 2, got {n}"
        )));
    }
    if k_lo > k_hi {
        return Err(Error::InvalidParameter(format!(
            "empty offset range {k_lo}..={k_hi}"
        )));
    }
    let (floor, eta) = params.log_split(n)?;
    let (p, q) = (params.p_f64(), params.q_f64());
    let table = tables.pmf_table();
    // z_m = p^{m-η}, with m = k − j; m runs down from k_hi until R̂ is negligible
    let mut per_m: Vec<(i64, f64, PoissonizedLaws)> = Vec::new();
    let mut m = k_hi;
    loop {
        let z = p.powf(m as f64 - eta);
        if p * z > DAMPING_CUTOFF {
            break;
        }
        let front = omega(z, params) * (-p * z).exp();
        per_m.push((m, front, PoissonizedLaws::new(table, q * z)?));
        m -= 1;
    }
    let mut terms = BTreeMap::new();
    let mut cumulative = BTreeMap::new();
    for k in k_lo..=k_hi {
        let mut pmf = CompensatedSum::new();
        let mut cdf = CompensatedSum::new();
        for (m, front, laws) in &per_m {
            if *m > k || *front == 0.0 {
                continue;
            }
            let j = (k - m) as usize;
            pmf.add(front * laws.a(table, j));
            cdf.add(front * laws.s(table, j));
        }
        terms.insert(k, pmf.value());
        cumulative.insert(k, cdf.value());
    }
    Ok(DensityApprox {
        n,
        floor,
        eta,
        terms,
        cumulative,
        damping_cutoff: DAMPING_CUTOFF,
    })
}

/// Approximate `P(X_n = ⌊log_{1/p} n⌋ + k)`.
pub fn asympt_pmf(n: u64, k: i64, tables: &Poissonizer) -> Result<f64> {
    Ok(density_approx(n, k, k, tables)?.prob(k))
}

/// Approximate `P(X_n <= ⌊log_{1/p} n⌋ + k)`.
pub fn asympt_cdf(n: u64, k: i64, tables: &Poissonizer) -> Result<f64> {
    Ok(density_approx(n, k, k, tables)?.cdf(k))
}

/// Coefficients of `Π_{j=1}^{J} (1 + (u−1)(1 − e^{-x/2^j}))` in `u`, the
/// values `Ã_k(x)` at `p = 1/2`. `J` is taken large enough that the omitted
/// factors differ from 1 by less than `1e-16`.
pub fn product_rep_pmf_half(x: f64, params: &SplitParams) -> Result<Vec<f64>> {
    if !params.is_half() {
        return Err(Error::InvalidParameter(format!(
            "product representation holds only for p = 1/2, got {params}"
        )));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "argument must be positive, got {x}"
        )));
    }
    let mut coeffs = vec![1.0];
    let mut y = x / 2.0;
    while y >= 1e-16 {
        let a = -(-y).exp_m1();
        let b = (-y).exp();
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c * b;
            next[i + 1] += c * a;
        }
        coeffs = next;
        y /= 2.0;
    }
    Ok(coeffs)
}

/// `Ã_k(z)` from the explicit nested sum, evaluated by iterating
/// `Ã_{k+1}(z) = Σ_j e^{-(1−q^j)z}(1 − e^{-pq^j z}) Ã_k(pq^j z)`. The work
/// grows geometrically with `k`, so only `k <= 3` is accepted.
pub fn a_tilde_explicit(k: usize, z: f64, params: &SplitParams) -> Result<f64> {
    if k > 3 {
        return Err(Error::InvalidParameter(format!(
            "explicit sum limited to k <= 3, got {k}"
        )));
    }
    Ok(iterate_a(k, z, params.p_f64(), params.q_f64()))
}

fn iterate_a(k: usize, z: f64, p: f64, q: f64) -> f64 {
    if k == 0 {
        return (-z).exp();
    }
    let mut sum = CompensatedSum::new();
    let mut qj = 1.0;
    // remaining terms are below Σ p q^j z = z q^J
    while z * qj > 1e-18 {
        let w = (-(1.0 - qj) * z).exp() * -(-p * qj * z).exp_m1();
        sum.add(w * iterate_a(k - 1, p * qj * z, p, q));
        qj *= q;
    }
    sum.value()
}
