use binsplit::asymptotics::{
    asympt_mean, asympt_variance, density_approx, mean_constant_with, variance_series_checked,
    EvaluationPath, DAMPING_CUTOFF, PHI_V_AGREEMENT,
};
use binsplit::exact::{truncation_index, FloatPmfTable, MomentTable, Poissonizer, SplitParams};
use serde_json::json;

use super::splitting;
use crate::args::{parse_range, AsymptArgs, Quantity};
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Report};

/// PMF table length that covers every Poisson sum the density needs.
pub fn density_table_size(params: &SplitParams) -> usize {
    let reach = DAMPING_CUTOFF * params.q_f64() / params.p_f64();
    (truncation_index(reach) + 50).max(400)
}

pub fn run(args: &AsymptArgs) -> CliResult<Report> {
    let params = splitting(&args.p)?;
    let (lo, hi) = parse_range(&args.n)?;
    if lo == 0 {
        return Err(CliError::Usage("asymptotics need n ≥ 1".into()));
    }
    if args.harmonics < 0 || args.window < 0 {
        return Err(CliError::Usage(
            "harmonics and window must be nonnegative".into(),
        ));
    }
    let oracle_hi = hi.min(args.oracle_max);
    let in_oracle = |n: usize| n <= args.oracle_max;
    let mut report = match args.quantity {
        Quantity::Mean | Quantity::Var => Report::new(
            "asympt",
            &["n", "u", "exact", "asymptotic", "residual", "constant"],
        ),
        Quantity::Pmf | Quantity::Cdf => Report::new(
            "asympt",
            &["n", "k", "offset", "exact", "asymptotic", "residual"],
        ),
    };
    report.meta("p", params.to_string())?;
    report.meta("seed", serde_json::Value::Null)?;
    report.meta("quantity", format!("{:?}", args.quantity).to_lowercase())?;

    match args.quantity {
        Quantity::Mean => {
            let moments = MomentTable::float(&params, oracle_hi.max(args.series_cap))?;
            let e = mean_constant_with(&params, &moments, args.harmonics, args.series_cap)?;
            for n in lo..=hi {
                let a = asympt_mean(n as f64, &e);
                let exact = in_oracle(n).then(|| moments.mu()[n]);
                report.push(vec![
                    n.into(),
                    params.log_base(n as f64).into(),
                    Cell::opt(exact),
                    a.into(),
                    Cell::opt(exact.map(|x| x - a)),
                    e.c.into(),
                ]);
            }
            report.meta("constants", json!({ "C": e.c, "phi_star_0": e.phi_star_0 }))?;
            report.meta("tolerances", json!({ "series_term": 1e-15 }))?;
            report.meta(
                "truncation",
                json!({ "harmonics": args.harmonics, "series_cap": args.series_cap }),
            )?;
        }
        Quantity::Var => {
            let moments = MomentTable::float(&params, oracle_hi.max(args.series_cap))?;
            let (qv, path) = if params.is_half() {
                (None, "closed form")
            } else {
                let tables = Poissonizer::from_moments(moments.clone(), 0);
                let (qv, checks) = variance_series_checked(
                    &tables,
                    args.harmonics,
                    args.series_cap,
                    args.tolerance,
                )?;
                let path = if checks.iter().any(|c| c.path == EvaluationPath::Quadrature) {
                    "quadrature"
                } else {
                    "series"
                };
                report.meta("coefficient_checks", &checks)?;
                (Some(qv), path)
            };
            let level = qv.as_ref().map_or(1.0, |q| q.coefficient(0).re);
            for n in lo..=hi {
                let a = qv
                    .as_ref()
                    .map_or(1.0, |q| asympt_variance(n as f64, &params, q));
                let exact = in_oracle(n).then(|| moments.variance(n));
                report.push(vec![
                    n.into(),
                    params.log_base(n as f64).into(),
                    Cell::opt(exact),
                    a.into(),
                    Cell::opt(exact.map(|x| x - a)),
                    level.into(),
                ]);
            }
            report.meta("evaluation_path", path)?;
            report.meta(
                "tolerances",
                json!({ "quadrature": args.tolerance, "series_vs_quadrature": PHI_V_AGREEMENT }),
            )?;
            report.meta(
                "truncation",
                json!({ "harmonics": args.harmonics, "series_cap": args.series_cap }),
            )?;
        }
        Quantity::Pmf | Quantity::Cdf => {
            if lo < 2 {
                return Err(CliError::Usage("the density expansion needs n ≥ 2".into()));
            }
            let tables = Poissonizer::new(&params, 1, density_table_size(&params))?;
            let exact = (oracle_hi >= lo).then(|| FloatPmfTable::new(&params, oracle_hi));
            let cdf = args.quantity == Quantity::Cdf;
            let mut totals = Vec::new();
            let mut cutoff = 0.0;
            for n in lo..=hi {
                let d = density_approx(n as u64, -args.window, args.window, &tables)?;
                cutoff = d.damping_cutoff;
                totals.push(json!({ "n": n, "total": d.total() }));
                for k in -args.window..=args.window {
                    let value = d.floor as i64 + k;
                    if value < 0 {
                        continue;
                    }
                    let a = if cdf { d.cdf(k) } else { d.prob(k) };
                    let e = exact.as_ref().filter(|_| in_oracle(n)).map(|t| {
                        let law = t.law(n);
                        if cdf {
                            law.cdf(value as usize)
                        } else {
                            law.prob(value as usize)
                        }
                    });
                    report.push(vec![
                        n.into(),
                        value.into(),
                        k.into(),
                        Cell::opt(e),
                        a.into(),
                        Cell::opt(e.map(|x| x - a)),
                    ]);
                }
            }
            report.meta("summary", json!({ "totals": totals }))?;
            report.meta("tolerances", json!({ "damping_cutoff": cutoff }))?;
            report.meta(
                "truncation",
                json!({ "window": args.window, "pmf_table": density_table_size(&params) }),
            )?;
        }
    }
    Ok(report)
}
