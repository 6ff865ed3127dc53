use binsplit::asymptotics::{
    asympt_mean, asympt_variance, max_gap, mean_constant_with, mean_fluctuation,
    variance_fluctuation, variance_series_checked, FigurePoint, FIG3_HARMONICS, FIG4_HARMONICS,
};
use binsplit::exact::{MomentTable, Poissonizer};
use serde::Serialize;
use serde_json::json;

use super::splitting;
use crate::args::{parse_range, FigureArgs, Which};
use crate::error::{CliError, CliResult};
use crate::report::Report;

const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// How far the two curves drift apart, against what the expansion allows.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapSummary {
    pub max_gap: f64,
    pub max_gap_n: usize,
    /// `|exact − asymptotic|` at the first `n`, with the reference series.
    pub residual_at_start: f64,
    /// `Σ |c_k|` over the harmonics dropped from the reference series.
    pub truncation_bound: f64,
    pub envelope: f64,
    pub within_envelope: bool,
}

fn harmonics(args: &FigureArgs) -> i64 {
    args.harmonics.unwrap_or(match args.which {
        Which::Fig3 => FIG3_HARMONICS,
        Which::Fig4 => FIG4_HARMONICS,
    })
}

pub fn curves(args: &FigureArgs) -> CliResult<(Vec<FigurePoint>, GapSummary)> {
    let params = splitting(&args.p)?;
    let (lo, hi) = parse_range(&args.n)?;
    if lo == 0 {
        return Err(CliError::Usage("figures need n ≥ 1".into()));
    }
    let harmonics = harmonics(args);
    if harmonics < 0 || harmonics > args.reference_harmonics {
        return Err(CliError::Usage(format!(
            "harmonics must lie in 0..={}",
            args.reference_harmonics
        )));
    }
    let cap = binsplit::asymptotics::DEFAULT_SERIES_CAP;
    let moments = MomentTable::float(&params, hi.max(cap))?;
    let (points, residual, tail) = match args.which {
        Which::Fig3 => {
            let e = mean_constant_with(&params, &moments, args.reference_harmonics, cap)?;
            let pts = mean_fluctuation(&moments, &e, lo, hi, harmonics)?;
            let r = (moments.mu()[lo] - asympt_mean(lo as f64, &e)).abs();
            (pts, r, e.q.tail_norm(harmonics))
        }
        Which::Fig4 => {
            let tables = Poissonizer::from_moments(moments.clone(), 0);
            let (qv, _) = variance_series_checked(
                &tables,
                args.reference_harmonics,
                cap,
                QUADRATURE_TOLERANCE,
            )?;
            let pts = variance_fluctuation(&moments, &qv, lo, hi, harmonics)?;
            let r = (moments.variance(lo) - asympt_variance(lo as f64, &params, &qv)).abs();
            (pts, r, qv.tail_norm(harmonics))
        }
    };
    let worst = max_gap(&points).expect("range is nonempty");
    let envelope = residual + tail;
    let summary = GapSummary {
        max_gap: worst.gap(),
        max_gap_n: worst.n,
        residual_at_start: residual,
        truncation_bound: tail,
        envelope,
        within_envelope: worst.gap() <= envelope,
    };
    Ok((points, summary))
}

pub fn run(args: &FigureArgs) -> CliResult<Report> {
    let (points, summary) = curves(args)?;
    let mut report = Report::new("figure", &["n", "u", "approximation", "fourier"]);
    for pt in &points {
        report.push(vec![
            pt.n.into(),
            pt.u.into(),
            pt.approximation.into(),
            pt.fourier.into(),
        ]);
    }
    let which = match args.which {
        Which::Fig3 => "fig3",
        Which::Fig4 => "fig4",
    };
    log::info!(
        "{which}: max gap {:e} at n = {}, envelope {:e}",
        summary.max_gap,
        summary.max_gap_n,
        summary.envelope
    );
    report.meta("figure", which)?;
    report.meta("p", splitting(&args.p)?.to_string())?;
    report.meta("seed", serde_json::Value::Null)?;
    report.meta("tolerances", json!({ "quadrature": QUADRATURE_TOLERANCE }))?;
    report.meta(
        "truncation",
        json!({
            "harmonics": harmonics(args),
            "reference_harmonics": args.reference_harmonics,
        }),
    )?;
    report.meta("summary", summary)?;
    Ok(report)
}
