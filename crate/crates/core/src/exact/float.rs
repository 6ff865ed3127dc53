//! Floating-point mirror of the exact recurrences, for sizes beyond the
//! exact-arithmetic ceiling. All sums are compensated and run in a fixed
//! order so results do not depend on scheduling.

use super::params::SplitParams;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        out.push(acc.value());
    }
    out
}

// below this log-weight a term is exactly zero in f64
const LN_UNDERFLOW: f64 = -745.0;

/// `P(I_n = k)` in floating point: the first entry is for `k = first`,
/// earlier entries underflow. Renormalized to sum to one.
pub fn split_probs_f64(params: &SplitParams, n: usize, lnfact: &[f64]) -> (usize, Vec<f64>) {
    assert!(n >= 1 && lnfact.len() > n);
    let (p, q) = (params.p_f64(), params.q_f64());
    let (lnp, lnq) = (p.ln(), q.ln());
    let r = params.q_minus_p_f64() / q;
    let lnr = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
    let norm = -(n as f64 * lnq).exp_m1();
    let mut first = None;
    let mut probs = Vec::new();
    for k in 0..n {
        let lw = lnfact[n] - lnfact[k] - lnfact[n - k] + k as f64 * lnp + (n - k) as f64 * lnq;
        if lw < LN_UNDERFLOW {
            if first.is_some() {
                probs.push(0.0);
            }
            continue;
        }
        let tail = if lnr.is_finite() {
            -((n - k) as f64 * lnr).exp_m1()
        } else {
            1.0
        };
        first.get_or_insert(k);
        probs.push(lw.exp() * tail / norm);
    }
    while probs.last() == Some(&0.0) {
        probs.pop();
    }
    let total = compensated_sum(probs.iter().copied());
    probs.iter_mut().for_each(|x| *x /= total);
    (first.unwrap_or(0), probs)
}

/// `(E X_n, E X_n^2)` for `n = 0..=n_max` by the first-step recurrences.
pub fn float_moments(params: &SplitParams, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let lnfact = ln_factorials(n_max);
    let mut mu = vec![0.0; n_max + 1];
    let mut m2 = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let (first, probs) = split_probs_f64(params, n, &lnfact);
        let mut s1 = CompensatedSum::new();
        let mut s2 = CompensatedSum::new();
        s1.add(1.0);
        s2.add(1.0);
        for (i, w) in probs.iter().enumerate() {
            let k = first + i;
            s1.add(w * mu[k]);
            s2.add(w * (2.0 * mu[k] + m2[k]));
        }
        mu[n] = s1.value();
        m2[n] = s2.value();
    }
    (mu, m2)
}

/// A floating-point law stored on the band `lo..lo+probs.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePmf {
    pub lo: usize,
    pub probs: Vec<f64>,
}

impl SparsePmf {
    pub fn prob(&self, k: usize) -> f64 {
        k.checked_sub(self.lo)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn hi(&self) -> usize {
        self.lo + self.probs.len().saturating_sub(1)
    }

    pub fn cdf(&self, k: usize) -> f64 {
        if k < self.lo {
            return 0.0;
        }
        compensated_sum(self.probs.iter().take(k - self.lo + 1).copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(
            self.probs
                .iter()
                .enumerate()
                .map(|(i, p)| (self.lo + i) as f64 * p),
        )
    }
}

// entries below this are dropped from the band edges
const BAND_CUTOFF: f64 = 1e-300;

/// Laws of `X_0, …, X_{n_max}` in floating point.
#[derive(Debug, Clone)]
pub struct FloatPmfTable {
    params: SplitParams,
    laws: Vec<SparsePmf>,
}

impl FloatPmfTable {
    pub fn new(params: &SplitParams, n_max: usize) -> Self {
        let lnfact = ln_factorials(n_max);
        let mut laws = vec![SparsePmf {
            lo: 0,
            probs: vec![1.0],
        }];
        for n in 1..=n_max {
            let (first, weights) = split_probs_f64(params, n, &lnfact);
            let lo = (first..first + weights.len())
                .map(|k| laws[k].lo)
                .min()
                .unwrap_or(0)
                + 1;
            let hi = (first..first + weights.len())
                .map(|k| laws[k].hi())
                .max()
                .unwrap_or(0)
                + 1;
            let mut acc = vec![CompensatedSum::new(); hi - lo + 1];
            for (i, w) in weights.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let child = &laws[first + i];
                for (t, x) in child.probs.iter().enumerate() {
                    acc[child.lo + 1 + t - lo].add(w * x);
                }
            }
            let mut probs: Vec<f64> = acc.iter().map(CompensatedSum::value).collect();
            let mut lo = lo;
            let lead = probs.iter().take_while(|&&x| x < BAND_CUTOFF).count();
            if lead < probs.len() {
                probs.drain(..lead);
                lo += lead;
            }
            while probs.len() > 1 && probs.last().is_some_and(|&x| x < BAND_CUTOFF) {
                probs.pop();
            }
            laws.push(SparsePmf { lo, probs });
        }
        Self {
            params: params.clone(),
            laws,
        }
    }

    pub fn params(&self) -> &SplitParams {
        &self.params
    }

    pub fn max_n(&self) -> usize {
        self.laws.len() - 1
    }

    pub fn law(&self, n: usize) -> &SparsePmf {
        &self.laws[n]
    }

    /// `P(X_n = k)` as a sequence in `n`, the Taylor coefficients of `Ã_k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.laws.iter().map(|l| l.prob(k)).collect()
    }

    /// `P(X_n <= k)` as a sequence in `n`.
    pub fn cdf_column(&self, k: usize) -> Vec<f64> {
        self.laws.iter().map(|l| l.cdf(k)).collect()
    }
}
