use std::collections::BTreeSet;

use binsplit::exact::{exact_pgf_y, exact_pmf_w, exact_pmf_z, ExactConfig, ExactPmf, SplitParams};
use binsplit::simulate::{
    geometric_distinct, goodness_of_fit, park_direct, park_split, patricia_sample, run_trials,
    urn_occupancy, FitReport, ParkingConfig, SampleModel, TrialHistogram,
};
use serde_json::json;

use super::bernoulli;
use crate::args::{SimModel, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Report};
use crate::Outcome;

pub fn params_for(model: SimModel, p: &str, m: u64) -> CliResult<SplitParams> {
    Ok(match model {
        SimModel::Parking | SimModel::ParkingSplit => SplitParams::parking(m)?,
        _ => bernoulli(p)?,
    })
}

pub fn exact_law(model: SimModel, params: &SplitParams, n: usize, m: u64) -> CliResult<ExactPmf> {
    let config = ExactConfig::default();
    Ok(match model {
        SimModel::Parking | SimModel::ParkingSplit => exact_pgf_y(m as usize, n, &config)?,
        SimModel::Patricia => exact_pmf_z(params, n, &config)?,
        SimModel::PatriciaArm | SimModel::Geometric | SimModel::Urn => {
            exact_pmf_w(params, n, &config)?
        }
    })
}

/// Histogram of `trials` samples; trial `i` uses stream `i` of `seed`.
pub fn histogram(
    model: SimModel,
    params: &SplitParams,
    n: usize,
    m: u64,
    trials: u64,
    seed: u64,
) -> CliResult<TrialHistogram> {
    let p = params.p_f64();
    let h = match model {
        SimModel::Parking => {
            let cfg = ParkingConfig::new(n, m)?;
            run_trials(SampleModel::ParkingDirect, trials, seed, |rng| {
                Ok(park_direct(&cfg, rng))
            })?
        }
        SimModel::ParkingSplit => {
            let cfg = ParkingConfig::new(n, m)?;
            run_trials(SampleModel::ParkingSplit, trials, seed, |rng| {
                Ok(park_split(&cfg, rng))
            })?
        }
        SimModel::Patricia => run_trials(SampleModel::PatriciaDepth, trials, seed, |rng| {
            Ok(patricia_sample(n, p, rng)?.depth)
        })?,
        SimModel::PatriciaArm => run_trials(SampleModel::PatriciaLeftArm, trials, seed, |rng| {
            Ok(patricia_sample(n, p, rng)?.left_arm)
        })?,
        SimModel::Geometric => run_trials(SampleModel::GeometricDistinct, trials, seed, |rng| {
            geometric_distinct(n, p, rng)
        })?,
        SimModel::Urn => run_trials(SampleModel::UrnOccupancy, trials, seed, |rng| {
            urn_occupancy(n, p, rng)
        })?,
    };
    Ok(h)
}

pub fn fit(
    args: &SimulateArgs,
) -> CliResult<(TrialHistogram, Option<ExactPmf>, Option<FitReport>)> {
    if args.trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    let params = params_for(args.model, &args.p, args.m)?;
    let hist = histogram(args.model, &params, args.n, args.m, args.trials, args.seed)?;
    let exact = match exact_law(args.model, &params, args.n, args.m) {
        Ok(law) => Some(law),
        Err(e) if args.assert_fit => return Err(e),
        Err(e) => {
            log::warn!("no exact law to compare against: {e}");
            None
        }
    };
    let report = exact.as_ref().map(|law| goodness_of_fit(&hist, law));
    Ok((hist, exact, report))
}

pub fn run(args: &SimulateArgs) -> CliResult<Outcome> {
    let (hist, exact, fit) = fit(args)?;
    let params = params_for(args.model, &args.p, args.m)?;
    let mut report = Report::new("simulate", &["value", "count", "frequency", "exact"]);
    let mut values: BTreeSet<usize> = hist.counts.keys().copied().collect();
    if let Some(law) = &exact {
        values.extend(law.iter().map(|(k, _)| k));
    }
    for v in values {
        report.push(vec![
            v.into(),
            Cell::Int(hist.count(v) as i64),
            hist.frequency(v).into(),
            Cell::opt(exact.as_ref().map(|law| law.prob_f64(v))),
        ]);
    }
    report.meta("model", hist.model.to_string())?;
    report.meta("p", params.to_string())?;
    report.meta("n", args.n)?;
    report.meta("seed", args.seed)?;
    report.meta("trials", args.trials)?;
    report.meta("tolerances", json!({ "alpha": args.alpha }))?;
    report.meta("truncation", json!({ "min_expected_per_cell": 5.0 }))?;
    report.meta("fit", &fit)?;

    let mut failure = None;
    if let Some(f) = &fit {
        if args.assert_fit && !f.passes(args.alpha) {
            failure = Some(CliError::Fit(format!(
                "{}: chi-square {:.3} on {} dof, p-value {:.3e} < {}",
                hist.model, f.chi_square, f.degrees_of_freedom, f.p_value, args.alpha
            )));
        }
    }
    Ok(Outcome { report, failure })
}
