//! Corner-preference parking in `[0, 2m]^n` with cubes of side `m`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use super::histogram::TrialRng;
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_THRESHOLD: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParkingConfig {
    /// Dimension.
    pub n: usize,
    /// Cube side; positions live in `{0, …, m}` per coordinate.
    pub m: u64,
    /// Enumerate the candidate box when it has at most this many points,
    /// otherwise rejection-sample it.
    pub enumeration_threshold: u64,
}

impl ParkingConfig {
    pub fn new(n: usize, m: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "parking needs n >= 1 and m >= 1, got n = {n}, m = {m}"
            )));
        }
        Ok(Self {
            n,
            m,
            enumeration_threshold: DEFAULT_ENUMERATION_THRESHOLD,
        })
    }
}

fn is_valid(x: &[u64], a: &[u64], m: u64) -> bool {
    x.iter().zip(a).all(|(xi, ai)| xi <= ai) && x.iter().zip(a).any(|(xi, ai)| ai - xi >= m)
}

/// Steps through the box `Π [0, a_j]` in lexicographic order.
fn advance(x: &mut [u64], a: &[u64]) -> bool {
    for j in (0..x.len()).rev() {
        if x[j] < a[j] {
            x[j] += 1;
            return true;
        }
        x[j] = 0;
    }
    false
}

fn box_size(a: &[u64]) -> u64 {
    a.iter()
        .try_fold(1u64, |acc, ai| acc.checked_mul(ai + 1))
        .unwrap_or(u64::MAX)
}

fn enumerate_choice(a: &[u64], m: u64, rng: &mut TrialRng) -> Vec<u64> {
    let mut x = vec![0; a.len()];
    let mut valid = 0u64;
    loop {
        if is_valid(&x, a, m) {
            valid += 1;
        }
        if !advance(&mut x, a) {
            break;
        }
    }
    let mut target = rng.random_range(0..valid);
    let mut x = vec![0; a.len()];
    loop {
        if is_valid(&x, a, m) {
            if target == 0 {
                return x;
            }
            target -= 1;
        }
        advance(&mut x, a);
    }
}

fn rejection_choice(a: &[u64], m: u64, rng: &mut TrialRng) -> Vec<u64> {
    loop {
        let x: Vec<u64> = a.iter().map(|&ai| rng.random_range(0..=ai)).collect();
        if is_valid(&x, a, m) {
            return x;
        }
    }
}

/// The literal parking process: starting from the car at corner `(m,…,m)`,
/// each new car takes a uniform position closer to the origin that does not
/// overlap the previous car, until no room is left. Returns the number of
/// cars after the first.
pub fn park_direct(config: &ParkingConfig, rng: &mut TrialRng) -> usize {
    let m = config.m;
    let mut a = vec![m; config.n];
    let mut history = vec![a.clone()];
    let mut cars = 0;
    while a.contains(&m) {
        let x = if box_size(&a) <= config.enumeration_threshold {
            enumerate_choice(&a, m, rng)
        } else {
            rejection_choice(&a, m, rng)
        };
        if cfg!(debug_assertions) {
            for prev in &history {
                assert!(
                    x.iter().zip(prev).any(|(xi, pi)| xi.abs_diff(*pi) >= m),
                    "car at {x:?} overlaps earlier car at {prev:?}"
                );
            }
            history.push(x.clone());
        }
        a = x;
        cars += 1;
    }
    cars
}

/// The same count through the splitting law: from `r` free coordinates,
/// `k` of them are used up with probability `C(r,k)(m^k − (m−1)^k)/((m+1)^r − m^r)`.
pub fn park_split(config: &ParkingConfig, rng: &mut TrialRng) -> usize {
    let m = config.m as f64;
    let mut remaining = config.n;
    let mut rounds = 0;
    while remaining > 0 {
        let r = remaining;
        let mut binom = 1.0;
        let weights: Vec<f64> = (1..=r)
            .map(|k| {
                binom = binom * (r - k + 1) as f64 / k as f64;
                binom * (m.powi(k as i32) - (m - 1.0).powi(k as i32))
            })
            .collect();
        let k = WeightedIndex::new(&weights)
            .expect("positive splitting weights")
            .sample(rng)
            + 1;
        remaining -= k;
        rounds += 1;
    }
    rounds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::histogram::trial_rng;

    #[test]
    fn one_dimension_always_one() {
        for m in 1..5 {
            let c = ParkingConfig::new(1, m).unwrap();
            for t in 0..50 {
                assert_eq!(park_direct(&c, &mut trial_rng(1, t)), 1);
                assert_eq!(park_split(&c, &mut trial_rng(1, t)), 1);
            }
        }
    }

    #[test]
    fn valid_positions_from_full_corner() {
        // from (2,2) with m = 2: x1 = 0 or x2 = 0, five positions
        let a = [2, 2];
        let mut x = vec![0, 0];
        let mut count = 0;
        loop {
            if is_valid(&x, &a, 2) {
                count += 1;
            }
            if !advance(&mut x, &a) {
                break;
            }
        }
        assert_eq!(count, 5);
    }

    #[test]
    fn rejection_and_enumeration_agree_in_law() {
        let mut c = ParkingConfig::new(2, 2).unwrap();
        let mut twos = [0u32; 2];
        for (i, threshold) in [u64::MAX, 0].into_iter().enumerate() {
            c.enumeration_threshold = threshold;
            for t in 0..20_000 {
                if park_direct(&c, &mut trial_rng(3, t)) == 2 {
                    twos[i] += 1;
                }
            }
        }
        // both near 0.4 · 20000 = 8000, standard error ≈ 69
        for t in twos {
            assert!((t as f64 - 8000.0).abs() < 350.0, "{twos:?}");
        }
    }

    #[test]
    fn rejects_degenerate_config() {
        assert!(ParkingConfig::new(0, 2).is_err());
        assert!(ParkingConfig::new(2, 0).is_err());
    }
}
