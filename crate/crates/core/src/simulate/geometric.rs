//! Distinct values among geometric samples and occupied urns.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::histogram::TrialRng;
use crate::error::{Error, Result};

fn check(n: usize, p: f64) -> Result<()> {
    if n == 0 || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "needs n >= 1 and 0 < p < 1, got n = {n}, p = {p}"
        )));
    }
    Ok(())
}

/// Number of distinct values among `n` iid geometric variables with
/// `P(j) = p q^j`, `j = 0, 1, …`.
pub fn geometric_distinct(n: usize, p: f64, rng: &mut TrialRng) -> Result<usize> {
    check(n, p)?;
    let geo = Geometric::new(p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let values: BTreeSet<u64> = (0..n).map(|_| geo.sample(rng)).collect();
    Ok(values.len())
}

/// Number of occupied urns after `n` balls, urn `j` having probability
/// `p q^j`; the urn is found by inverting the distribution function.
pub fn urn_occupancy(n: usize, p: f64, rng: &mut TrialRng) -> Result<usize> {
    check(n, p)?;
    let lnq = (1.0 - p).ln();
    let urns: BTreeSet<u64> = (0..n)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            (u.ln() / lnq).floor() as u64
        })
        .collect();
    Ok(urns.len())
}
