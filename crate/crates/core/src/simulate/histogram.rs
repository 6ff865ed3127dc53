use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

pub type TrialRng = ChaCha8Rng;

/// The generator for trial `trial` under master seed `seed`: the seed picks
/// the key, the trial index picks the stream, so every trial is reproducible
/// on its own.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleModel {
    ParkingDirect,
    ParkingSplit,
    PatriciaDepth,
    PatriciaLeftArm,
    GeometricDistinct,
    UrnOccupancy,
}

impl fmt::Display for SampleModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::ParkingDirect => "parking-direct",
            Self::ParkingSplit => "parking-split",
            Self::PatriciaDepth => "patricia-depth",
            Self::PatriciaLeftArm => "patricia-left-arm",
            Self::GeometricDistinct => "geometric-distinct",
            Self::UrnOccupancy => "urn-occupancy",
        };
        f.write_str(s)
    }
}

/// Outcome counts of a batch of trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialHistogram {
    pub model: SampleModel,
    pub seed: u64,
    pub trials: u64,
    pub counts: BTreeMap<usize, u64>,
}

impl TrialHistogram {
    pub fn new(model: SampleModel, seed: u64) -> Self {
        Self {
            model,
            seed,
            trials: 0,
            counts: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, value: usize) {
        *self.counts.entry(value).or_default() += 1;
        self.trials += 1;
    }

    pub fn merge(&mut self, other: &TrialHistogram) {
        for (k, c) in &other.counts {
            *self.counts.entry(*k).or_default() += c;
        }
        self.trials += other.trials;
    }

    pub fn count(&self, value: usize) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn frequency(&self, value: usize) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.count(value) as f64 / self.trials as f64
        }
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self.counts.iter().map(|(k, c)| *k as f64 * *c as f64).sum();
        s / self.trials as f64
    }
}

/// Runs `trials` independent trials in parallel. Trial `i` draws from
/// `trial_rng(seed, i)`, so the histogram does not depend on the thread
/// count or scheduling.
pub fn run_trials<F>(
    model: SampleModel,
    trials: u64,
    seed: u64,
    sampler: F,
) -> Result<TrialHistogram>
where
    F: Fn(&mut TrialRng) -> Result<usize> + Sync,
{
    (0..trials)
        .into_par_iter()
        .try_fold(
            || TrialHistogram::new(model, seed),
            |mut h, i| {
                h.record(sampler(&mut trial_rng(seed, i))?);
                Ok(h)
            },
        )
        .try_reduce(
            || TrialHistogram::new(model, seed),
            |mut a, b| {
                a.merge(&b);
                Ok(a)
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_of_order() {
        let a: u64 = trial_rng(7, 3).random();
        let _ = trial_rng(7, 2).random::<u64>();
        let b: u64 = trial_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, trial_rng(7, 4).random::<u64>());
        assert_ne!(a, trial_rng(8, 3).random::<u64>());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let sampler = |rng: &mut TrialRng| Ok(rng.random_range(0..10usize));
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let h1 = one
            .install(|| run_trials(SampleModel::UrnOccupancy, 5000, 11, sampler))
            .unwrap();
        let h4 = four
            .install(|| run_trials(SampleModel::UrnOccupancy, 5000, 11, sampler))
            .unwrap();
        assert_eq!(h1, h4);
        assert_eq!(h1.counts.values().sum::<u64>(), 5000);
        assert_eq!(h1.trials, 5000);
    }
}
