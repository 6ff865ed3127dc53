use binsplit::exact::{
    exact_pgf_y, exact_pmf_w, exact_pmf_x_table, exact_pmf_z, rational_string, ExactConfig,
    ExactPmf, SplitParams,
};
use serde_json::json;

use super::{bernoulli, splitting};
use crate::args::{parse_range, ExactArgs, ModelArg};
use crate::error::CliResult;
use crate::report::{Cell, Report};

pub fn laws(args: &ExactArgs) -> CliResult<(SplitParams, Vec<ExactPmf>)> {
    let (lo, hi) = parse_range(&args.n)?;
    let config = ExactConfig {
        ceiling: args.ceiling,
    };
    let params = match args.model {
        ModelArg::X => splitting(&args.p)?,
        ModelArg::Y => SplitParams::parking(args.m)?,
        ModelArg::Z | ModelArg::W => bernoulli(&args.p)?,
    };
    let laws = match args.model {
        ModelArg::X => exact_pmf_x_table(&params, hi, &config)?.split_off(lo),
        ModelArg::Y => (lo..=hi)
            .map(|n| exact_pgf_y(args.m as usize, n, &config))
            .collect::<Result<_, _>>()?,
        ModelArg::Z => (lo..=hi)
            .map(|n| exact_pmf_z(&params, n, &config))
            .collect::<Result<_, _>>()?,
        ModelArg::W => (lo..=hi)
            .map(|n| exact_pmf_w(&params, n, &config))
            .collect::<Result<_, _>>()?,
    };
    Ok((params, laws))
}

pub fn run(args: &ExactArgs) -> CliResult<Report> {
    let (params, laws) = laws(args)?;
    let mut report = Report::new("exact", &["n", "k", "probability"]);
    for law in &laws {
        for (k, prob) in law.iter() {
            report.push(vec![
                law.n.into(),
                k.into(),
                Cell::Rational {
                    text: rational_string(prob),
                    value: law.prob_f64(k),
                },
            ]);
        }
    }
    report.meta("p", params.to_string())?;
    report.meta("model", format!("{:?}", args.model))?;
    if args.model == ModelArg::Y {
        report.meta("m", args.m)?;
    }
    report.meta("seed", serde_json::Value::Null)?;
    report.meta("tolerances", json!({ "exact": 0.0 }))?;
    report.meta("truncation", json!({ "exact_ceiling": args.ceiling }))?;
    Ok(report)
}
