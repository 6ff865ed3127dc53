//! Chi-square goodness of fit and total-variation distance between
//! simulated histograms and exact laws.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::histogram::TrialHistogram;
use crate::exact::ExactPmf;

/// Below this many trials a fit report is flagged as under-powered.
pub const TRIAL_FLOOR: u64 = 1000;
/// Minimum expected count per pooled cell.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub total_variation: f64,
    pub trials: u64,
    /// Pooled cells as `(first value, last value, observed, expected)`.
    pub cells: Vec<(usize, usize, f64, f64)>,
    pub underpowered: bool,
}

impl FitReport {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Merges adjacent cells left to right until each has expected count at
/// least `MIN_EXPECTED`; a short remainder joins the last full cell.
fn pool(cells: &[(usize, f64, f64)]) -> Vec<(usize, usize, f64, f64)> {
    let mut out: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut open: Option<(usize, usize, f64, f64)> = None;
    for &(k, obs, exp) in cells {
        let c = match open.take() {
            Some((lo, _, o, e)) => (lo, k, o + obs, e + exp),
            None => (k, k, obs, exp),
        };
        if c.3 >= MIN_EXPECTED {
            out.push(c);
        } else {
            open = Some(c);
        }
    }
    if let Some(rest) = open {
        match out.last_mut() {
            Some(last) => {
                last.1 = rest.1;
                last.2 += rest.2;
                last.3 += rest.3;
            }
            None => out.push(rest),
        }
    }
    out
}

fn p_value(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return if stat == 0.0 { 1.0 } else { 0.0 };
    }
    if !stat.is_finite() {
        return 0.0;
    }
    ChiSquared::new(dof as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(0.0)
}

/// Pearson chi-square of `hist` against `exact`, plus total variation.
pub fn goodness_of_fit(hist: &TrialHistogram, exact: &ExactPmf) -> FitReport {
    let n = hist.trials as f64;
    let law = exact.to_f64_vec();
    let mut keys: Vec<usize> = law.iter().map(|(k, _)| *k).collect();
    keys.extend(hist.counts.keys().copied());
    keys.sort_unstable();
    keys.dedup();
    let cells: Vec<(usize, f64, f64)> = keys
        .iter()
        .map(|&k| (k, hist.count(k) as f64, exact.prob_f64(k) * n))
        .collect();
    let total_variation = 0.5
        * keys
            .iter()
            .map(|&k| (hist.frequency(k) - exact.prob_f64(k)).abs())
            .sum::<f64>();
    let pooled = pool(&cells);
    let chi_square: f64 = pooled
        .iter()
        .map(|&(_, _, o, e)| {
            if e > 0.0 {
                (o - e) * (o - e) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = pooled.len().saturating_sub(1);
    let underpowered = hist.trials < TRIAL_FLOOR;
    if underpowered {
        log::warn!(
            "goodness of fit on {} trials is under-powered (floor {TRIAL_FLOOR})",
            hist.trials
        );
    }
    FitReport {
        chi_square,
        degrees_of_freedom: dof,
        p_value: p_value(chi_square, dof),
        total_variation,
        trials: hist.trials,
        cells: pooled,
        underpowered,
    }
}

/// Chi-square test of homogeneity between two histograms (2 × c table).
pub fn two_sample_test(a: &TrialHistogram, b: &TrialHistogram) -> FitReport {
    let (na, nb) = (a.trials as f64, b.trials as f64);
    let total = na + nb;
    let mut keys: Vec<usize> = a.counts.keys().chain(b.counts.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    // pool on the smaller expected count of the two rows
    let share = na.min(nb) / total;
    let cells: Vec<(usize, f64, f64)> = keys
        .iter()
        .map(|&k| {
            let col = (a.count(k) + b.count(k)) as f64;
            (k, a.count(k) as f64, col * share)
        })
        .collect();
    let pooled = pool(&cells);
    let mut chi_square = 0.0;
    for &(lo, hi, _, _) in &pooled {
        let oa: f64 = (lo..=hi).map(|k| a.count(k) as f64).sum();
        let ob: f64 = (lo..=hi).map(|k| b.count(k) as f64).sum();
        let col = oa + ob;
        if col == 0.0 {
            continue;
        }
        let ea = col * na / total;
        let eb = col * nb / total;
        chi_square += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let total_variation = 0.5
        * keys
            .iter()
            .map(|&k| (a.frequency(k) - b.frequency(k)).abs())
            .sum::<f64>();
    let dof = pooled.len().saturating_sub(1);
    FitReport {
        chi_square,
        degrees_of_freedom: dof,
        p_value: p_value(chi_square, dof),
        total_variation,
        trials: a.trials.min(b.trials),
        cells: pooled,
        underpowered: a.trials.min(b.trials) < TRIAL_FLOOR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_pmf_x, ExactConfig, Model, SplitParams};
    use crate::simulate::histogram::{run_trials, SampleModel};
    use num_rational::BigRational;
    use rand::distr::weighted::WeightedIndex;
    use rand::distr::Distribution;

    fn sample_from(pmf: &ExactPmf, trials: u64, seed: u64) -> TrialHistogram {
        let law = pmf.to_f64_vec();
        let values: Vec<usize> = law.iter().map(|(k, _)| *k).collect();
        let dist = WeightedIndex::new(law.iter().map(|(_, p)| *p)).unwrap();
        run_trials(SampleModel::UrnOccupancy, trials, seed, |rng| {
            Ok(values[dist.sample(rng)])
        })
        .unwrap()
    }

    #[test]
    fn pooling_reaches_minimum() {
        let cells = [(0, 1.0, 1.0), (1, 2.0, 2.0), (2, 10.0, 9.0), (3, 0.0, 0.5)];
        let p = pool(&cells);
        assert_eq!(p, vec![(0, 3, 13.0, 12.5)]);
        let cells = [(0, 6.0, 6.0), (1, 6.0, 6.0), (2, 1.0, 1.0)];
        assert_eq!(pool(&cells), vec![(0, 0, 6.0, 6.0), (1, 2, 7.0, 7.0)]);
    }

    #[test]
    fn exact_samples_pass_and_p_values_spread() {
        let pmf = exact_pmf_x(&SplitParams::half(), 16, &ExactConfig::default()).unwrap();
        let ps: Vec<f64> = (0..40)
            .map(|seed| goodness_of_fit(&sample_from(&pmf, 5000, seed), &pmf).p_value)
            .collect();
        // roughly uniform: not all tiny, not all large
        let small = ps.iter().filter(|&&p| p < 0.5).count();
        assert!((8..=32).contains(&small), "{ps:?}");
        assert!(ps.iter().filter(|&&p| p < 0.01).count() <= 3);
    }

    #[test]
    fn perturbed_law_is_rejected() {
        let third = SplitParams::new(1, 3).unwrap();
        let pmf = exact_pmf_x(&third, 2, &ExactConfig::default()).unwrap();
        let shifted = ExactPmf::from_pairs(
            2,
            Model::X,
            [
                (1, BigRational::new(59.into(), 100.into())),
                (2, BigRational::new(41.into(), 100.into())),
            ],
        )
        .unwrap();
        let h = sample_from(&pmf, 100_000, 3);
        assert!(goodness_of_fit(&h, &pmf).passes(0.01));
        assert!(!goodness_of_fit(&h, &shifted).passes(0.01));
        let tv = goodness_of_fit(&h, &pmf).total_variation;
        assert!(tv < 0.01);
    }

    #[test]
    fn two_sample_homogeneity() {
        let pmf = exact_pmf_x(&SplitParams::half(), 10, &ExactConfig::default()).unwrap();
        let a = sample_from(&pmf, 20_000, 1);
        let b = sample_from(&pmf, 20_000, 2);
        assert!(two_sample_test(&a, &b).passes(0.01));
        let other = exact_pmf_x(
            &SplitParams::new(1, 3).unwrap(),
            10,
            &ExactConfig::default(),
        )
        .unwrap();
        let c = sample_from(&other, 20_000, 3);
        assert!(!two_sample_test(&a, &c).passes(0.01));
    }

    #[test]
    fn small_runs_are_flagged() {
        let pmf = exact_pmf_x(&SplitParams::half(), 1, &ExactConfig::default()).unwrap();
        let h = sample_from(&pmf, 10, 0);
        let r = goodness_of_fit(&h, &pmf);
        assert!(r.underpowered);
        assert_eq!(r.degrees_of_freedom, 0);
        assert_eq!(r.p_value, 1.0);
    }
}
