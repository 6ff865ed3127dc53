use std::collections::BTreeMap;

use binsplit::asymptotics::{
    asympt_mean, asympt_variance, chi, density_approx, depoissonize, max_gap, mean_constant,
    mean_fluctuation, phi_star, phi_v_star_checked, variance_series, FourierKind, FourierSeries,
    DEFAULT_SERIES_CAP, FIG3_HARMONICS,
};
use binsplit::exact::{
    exact_pgf_y, exact_pmf_w, exact_pmf_x_table, exact_pmf_z, moment_table, poissonized_eval,
    ExactConfig, FloatPmfTable, MomentTable, PoissonKind, PoissonSeries, Poissonizer, SplitParams,
};
use binsplit::simulate::{
    goodness_of_fit, patricia_trie, trial_rng, two_sample_test, FitReport, TrialHistogram,
};
use binsplit::special::{cpow, gamma, mellin_quadrature, ComplexValue, MellinKernel};
use num_traits::{One, Signed};
use serde_json::json;

use super::asympt::density_table_size;
use super::simulate::{exact_law, histogram};
use super::splitting;
use crate::args::{Fault, SimModel, ValidateArgs};
use crate::error::{CliError, CliResult, EXIT_FIT, EXIT_NUMERIC};
use crate::report::Report;
use crate::Outcome;

const SERIES_VS_QUADRATURE: f64 = 1e-8;
const QUADRATURE_TOLERANCE: f64 = 1e-10;
const FOURIER_REAL: f64 = 1e-12;
const CPOW_UNIT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
struct Check {
    name: String,
    p: Option<String>,
    status: Status,
    detail: String,
    code: i32,
}

type Verdict = CliResult<(bool, String)>;

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: &str, p: Option<&SplitParams>, code: i32, verdict: Verdict) {
        let (status, detail) = match verdict {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(e) => (Status::Fail, format!("error: {e}")),
        };
        if status == Status::Fail {
            log::warn!("{name}: {detail}");
        }
        self.checks.push(Check {
            name: name.to_owned(),
            p: p.map(|p| p.to_string()),
            status,
            detail,
            code,
        });
    }

    fn skip(&mut self, name: &str, p: &SplitParams, why: &str) {
        self.checks.push(Check {
            name: name.to_owned(),
            p: Some(p.to_string()),
            status: Status::Skip,
            detail: why.to_owned(),
            code: 0,
        });
    }
}

/// `1/p` when it is an integer, so that powers of it share a fractional part.
fn period_base(params: &SplitParams) -> Option<usize> {
    (params.numer() == 1).then_some(params.denom() as usize)
}

fn powers_between(base: usize, lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |x| x.checked_mul(base))
        .skip_while(|&x| x < lo)
        .take_while(|&x| x <= hi)
        .collect()
}

fn exact_normalization(params: &SplitParams, n_cap: usize) -> Verdict {
    let config = ExactConfig {
        ceiling: n_cap.max(1),
    };
    let xs = exact_pmf_x_table(params, n_cap, &config)?;
    for law in &xs {
        if !law.total().is_one() {
            return Ok((false, format!("X_{} sums to {}", law.n, law.total())));
        }
    }
    for n in 0..=n_cap {
        for law in [
            exact_pmf_z(params, n, &config)?,
            exact_pmf_w(params, n, &config)?,
        ] {
            if !law.total().is_one() {
                return Ok((false, format!("{}_{n} does not sum to 1", law.model)));
            }
        }
    }
    Ok((true, format!("X, Z, W for n ≤ {n_cap}")))
}

fn parking_equivalence(n_cap: usize) -> Verdict {
    let top = n_cap.min(30);
    let config = ExactConfig::default();
    for m in 1..=3u64 {
        let xs = exact_pmf_x_table(&SplitParams::parking(m)?, top, &config)?;
        for n in 0..=top {
            let y = exact_pgf_y(m as usize, n, &config)?;
            if !y.same_law(&xs[n]) {
                return Ok((false, format!("Y(m={m}) differs from X at n = {n}")));
            }
        }
    }
    Ok((true, format!("m ∈ {{1,2,3}}, n ≤ {top}")))
}

fn half_equivalences(n_cap: usize) -> Verdict {
    let top = n_cap.min(30);
    let half = SplitParams::half();
    let config = ExactConfig::default();
    let xs = exact_pmf_x_table(&half, top, &config)?;
    for n in 0..=top {
        if !exact_pmf_z(&half, n + 1, &config)?.same_law(&xs[n]) {
            return Ok((false, format!("Z_{} differs from X_{n}", n + 1)));
        }
        if !exact_pmf_w(&half, n, &config)?.same_law(&xs[n]) {
            return Ok((false, format!("W_{n} differs from X_{n}")));
        }
    }
    Ok((true, format!("n ≤ {top}")))
}

fn mean_monotone(moments: &MomentTable) -> Verdict {
    let mu = &moments.mu()[..=200];
    match mu.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Ok((false, format!("μ_{} < μ_{i}", i + 1))),
        None => Ok((true, "n ≤ 200".into())),
    }
}

fn variance_nonnegative(params: &SplitParams, moments: &MomentTable, n_cap: usize) -> Verdict {
    let exact = moment_table(params, n_cap, &ExactConfig::default())?;
    let e = exact.exact();
    for n in 0..e.mu.len() {
        let v = &e.m2[n] - &e.mu[n] * &e.mu[n];
        if v.is_negative() {
            return Ok((false, format!("exact V(X_{n}) < 0")));
        }
    }
    for n in 0..=moments.max_n() {
        if moments.variance(n) < -1e-12 * moments.m2()[n] {
            return Ok((false, format!("V(X_{n}) = {:e}", moments.variance(n))));
        }
    }
    Ok((
        true,
        format!("exact n ≤ {n_cap}, float n ≤ {}", moments.max_n()),
    ))
}

fn poissonized_half(tables: &Poissonizer) -> Verdict {
    let closed = |x: f64| -> f64 { (1..200).map(|k| 1.0 - (-x / 2f64.powi(k)).exp()).sum() };
    let mut worst: f64 = 0.0;
    for x in [1.0, 10.0, 100.0] {
        let e = poissonized_eval(tables, PoissonKind::F1, x, 1e-10)?;
        let diff = (e.value - closed(x)).abs();
        if diff > e.error_bound.max(1e-12) {
            return Ok((
                false,
                format!("x = {x}: off by {diff:e}, bound {:e}", e.error_bound),
            ));
        }
        worst = worst.max(diff);
    }
    Ok((true, format!("x ∈ {{1,10,100}}, max diff {worst:e}")))
}

fn gamma_grid() -> impl Iterator<Item = ComplexValue> {
    [-4.3, -0.7, 0.2, 1.0, 3.5, 17.0, 60.0]
        .into_iter()
        .flat_map(|re| {
            [-30.0, -1.0, 0.3, 7.0, 45.0]
                .into_iter()
                .map(move |im| ComplexValue::new(re, im))
        })
}

fn gamma_conjugate() -> Verdict {
    let mut worst: f64 = 0.0;
    for z in gamma_grid() {
        let g = gamma(z)?;
        worst = worst.max((gamma(z.conj())? - g.conj()).norm() / g.norm());
    }
    Ok((
        worst <= 4.0 * f64::EPSILON,
        format!("max relative {worst:e}"),
    ))
}

fn gamma_recurrence() -> Verdict {
    let mut worst: f64 = 0.0;
    for z in gamma_grid() {
        let g = gamma(z)?;
        worst = worst.max((gamma(z + 1.0)? - z * g).norm() / (z * g).norm());
    }
    Ok((worst <= 1e-12, format!("max relative {worst:e}")))
}

fn quadrature_deterministic(tables: &Poissonizer) -> Verdict {
    let s = chi(1, tables.params());
    let a = mellin_quadrature(&MellinKernel::Phi(tables), s, QUADRATURE_TOLERANCE)?;
    let b = mellin_quadrature(&MellinKernel::Phi(tables), s, QUADRATURE_TOLERANCE)?;
    Ok((a == b, format!("{} evaluations", a.evaluations)))
}

fn cpow_unit(params: &SplitParams) -> Verdict {
    let mut worst: f64 = 0.0;
    for k in -10..=10 {
        worst = worst.max((cpow(params.p_f64(), chi(k, params))? - 1.0).norm());
    }
    Ok((worst <= CPOW_UNIT, format!("|k| ≤ 10, max {worst:e}")))
}

fn real_valued(series: &FourierSeries) -> Verdict {
    let worst = (0..256)
        .map(|i| series.eval_complex(i as f64 / 256.0).im.abs())
        .fold(0.0, f64::max);
    Ok((worst <= FOURIER_REAL, format!("max |Im| {worst:e}")))
}

fn periodic(series: &FourierSeries) -> Verdict {
    let worst = (0..64)
        .map(|i| {
            let u = i as f64 / 64.0 - 3.0;
            (series.eval(u + 1.0) - series.eval(u)).abs()
        })
        .fold(0.0, f64::max);
    Ok((worst <= FOURIER_REAL, format!("max {worst:e}")))
}

fn series_vs_quadrature(tables: &Poissonizer) -> Verdict {
    let params = tables.params();
    let mut worst: f64 = 0.0;
    for k in -3..=3 {
        let s = phi_star(k, tables.moments(), DEFAULT_SERIES_CAP)?.value;
        let q = mellin_quadrature(
            &MellinKernel::Phi(tables),
            chi(k, params),
            QUADRATURE_TOLERANCE,
        )?
        .value;
        if params.is_half() && (s.norm() > 1e-10 || q.norm() > 1e-10) {
            return Ok((
                false,
                format!("k = {k}: series {s}, quadrature {q}, expected 0"),
            ));
        }
        worst = worst.max((s - q).norm());
    }
    Ok((
        worst <= SERIES_VS_QUADRATURE,
        format!("|k| ≤ 3, max {worst:e}"),
    ))
}

fn variance_coefficients(tables: &Poissonizer) -> Verdict {
    let mut worst: f64 = 0.0;
    for k in 0..=3 {
        let c = phi_v_star_checked(k, tables, DEFAULT_SERIES_CAP, QUADRATURE_TOLERANCE)?;
        if c.mismatch() {
            return Ok((false, format!("k = {k}: discrepancy {:e}", c.discrepancy)));
        }
        worst = worst.max(c.discrepancy);
    }
    Ok((true, format!("0 ≤ k ≤ 3, max {worst:e}")))
}

fn mean_residual(moments: &MomentTable, ns: &[usize]) -> Verdict {
    let e = mean_constant(moments.params(), moments)?;
    let res: Vec<f64> = ns
        .iter()
        .map(|&n| (moments.mu()[n] - asympt_mean(n as f64, &e)).abs())
        .collect();
    let c = ns
        .iter()
        .zip(&res)
        .map(|(&n, r)| r * n as f64)
        .fold(0.0, f64::max);
    let decreasing = res.windows(2).all(|w| w[1] < w[0]);
    Ok((decreasing, format!("n ∈ {ns:?}, max n·e_n = {c:.4}")))
}

fn variance_residual(moments: &MomentTable, ns: &[usize]) -> Verdict {
    let params = moments.params();
    let qv = if params.is_half() {
        None
    } else {
        Some(variance_series(moments, 10, DEFAULT_SERIES_CAP)?)
    };
    let mut worst: f64 = 0.0;
    for &n in ns {
        let (a, allowed) = match &qv {
            None => (1.0, 5.0 / n as f64),
            Some(q) => (asympt_variance(n as f64, params, q), 0.01),
        };
        let r = (moments.variance(n) - a).abs();
        if r > allowed {
            return Ok((false, format!("n = {n}: residual {r:e} > {allowed:e}")));
        }
        worst = worst.max(r);
    }
    Ok((true, format!("n ∈ {ns:?}, max {worst:e}")))
}

fn density_residual(params: &SplitParams, ns: &[usize]) -> Verdict {
    let tables = Poissonizer::new(params, 1, density_table_size(params))?;
    let top = *ns.last().expect("nonempty");
    let exact = FloatPmfTable::new(params, top);
    let mut worst = Vec::new();
    for &n in ns {
        let d = density_approx(n as u64, -12, 12, &tables)?;
        let law = exact.law(n);
        let w = (-12..=12i64)
            .filter(|k| d.floor as i64 + k >= 0)
            .map(|k| (law.prob((d.floor as i64 + k) as usize) - d.prob(k)).abs())
            .fold(0.0, f64::max);
        worst.push(w);
    }
    let decreasing = worst.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = worst.iter().map(|w| format!("{w:.3e}")).collect();
    Ok((
        decreasing,
        format!("n ∈ {ns:?}, max errors [{}]", shown.join(", ")),
    ))
}

fn figure3_envelope(moments: &MomentTable, lo: usize, hi: usize) -> Verdict {
    let e = mean_constant(moments.params(), moments)?;
    let pts = mean_fluctuation(moments, &e, lo, hi, FIG3_HARMONICS)?;
    let worst = max_gap(&pts).expect("nonempty");
    let envelope =
        (moments.mu()[lo] - asympt_mean(lo as f64, &e)).abs() + e.q.tail_norm(FIG3_HARMONICS);
    Ok((
        worst.gap() <= envelope,
        format!(
            "n ∈ [{lo}, {hi}], max gap {:e} at n = {}, envelope {envelope:e}",
            worst.gap(),
            worst.n
        ),
    ))
}

fn depoissonization(moments: &MomentTable) -> Verdict {
    let s = PoissonSeries::new(moments.mu().to_vec(), 1);
    let target = moments.mu()[512];
    let e1 = (depoissonize(&s, 512, 1, 1e-9)?.value - target).abs();
    let e2 = (depoissonize(&s, 512, 2, 1e-9)?.value - target).abs();
    Ok((
        e2 < e1 && e1 < 0.01,
        format!("n = 512: order 1 {e1:e}, order 2 {e2:e}"),
    ))
}

fn fit_verdict(what: &str, f: &FitReport, alpha: f64) -> (bool, String) {
    (
        f.passes(alpha),
        format!(
            "{what}: chi-square {:.3} on {} dof, p-value {:.4}, TV {:.4}",
            f.chi_square, f.degrees_of_freedom, f.p_value, f.total_variation
        ),
    )
}

fn parking_split_check(trials: u64, seed: u64, alpha: f64) -> Verdict {
    // twelve tests share one family-wise level
    let alpha = alpha / 12.0;
    let mut details = Vec::new();
    for n in 1..=4 {
        for m in 1..=3u64 {
            let params = SplitParams::parking(m)?;
            let a = histogram(SimModel::Parking, &params, n, m, trials, seed)?;
            let b = histogram(SimModel::ParkingSplit, &params, n, m, trials, seed ^ 0x9e37)?;
            let f = two_sample_test(&a, &b);
            if !f.passes(alpha) {
                return Ok(fit_verdict(&format!("(n, m) = ({n}, {m})"), &f, alpha));
            }
            details.push(f.p_value);
        }
    }
    let min = details.iter().copied().fold(1.0, f64::min);
    Ok((
        true,
        format!("n ≤ 4, m ≤ 3, smallest p-value {min:.4}, level {alpha:.2e}"),
    ))
}

fn seed_determinism(trials: u64, seed: u64) -> Verdict {
    let half = SplitParams::half();
    let run = |threads: usize| -> CliResult<TrialHistogram> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| histogram(SimModel::Patricia, &half, 16, 1, trials, seed))
    };
    let one = run(1)?;
    let four = run(4)?;
    Ok((one == four, format!("{trials} trials on 1 and 4 threads")))
}

fn patricia_structure(seed: u64) -> Verdict {
    for p in [0.5, 1.0 / 3.0] {
        for t in 0..200 {
            let trie = patricia_trie(16, p, &mut trial_rng(seed, t))?;
            if trie.internal_nodes() != 15 {
                return Ok((
                    false,
                    format!(
                        "p = {p}, trial {t}: {} internal nodes",
                        trie.internal_nodes()
                    ),
                ));
            }
        }
    }
    Ok((true, "n = 16, 200 tries at p = 1/2 and 1/3".into()))
}

fn sampler_fits(trials: u64, seed: u64, alpha: f64) -> Verdict {
    let half = SplitParams::half();
    let config = ExactConfig::default();
    let xs = exact_pmf_x_table(&half, 16, &config)?;
    let x3 = exact_pmf_x_table(&SplitParams::parking(2)?, 3, &config)?;
    let cases = [
        (SimModel::Patricia, 16, &xs[15]),
        (SimModel::PatriciaArm, 16, &xs[16]),
        (SimModel::Geometric, 16, &xs[16]),
        (SimModel::Urn, 16, &xs[16]),
        (SimModel::Parking, 3, &x3[3]),
    ];
    let alpha = alpha / cases.len() as f64;
    let mut worst = 1.0f64;
    for (model, n, law) in cases {
        let (params, m) = match model {
            SimModel::Parking => (SplitParams::parking(2)?, 2),
            _ => (half.clone(), 1),
        };
        let h = histogram(model, &params, n, m, trials, seed)?;
        let f = goodness_of_fit(&h, law);
        if !f.passes(alpha) {
            return Ok(fit_verdict(&h.model.to_string(), &f, alpha));
        }
        // the law used must also be the model's own exact law
        if !exact_law(model, &params, n, m)?.same_law(law) {
            return Ok((false, format!("{model:?}: exact law differs from X")));
        }
        worst = worst.min(f.p_value);
    }
    Ok((true, format!("depth, arm, geometric, urn at n = 16; parking (3, 2); smallest p-value {worst:.4}, level {alpha:.2e}")))
}

fn corrupt(series: &FourierSeries) -> FourierSeries {
    let mut coeffs: BTreeMap<i64, ComplexValue> = series.coefficients().clone();
    if let Some(c) = coeffs.get_mut(&1) {
        *c = -*c;
    }
    FourierSeries::from_map(FourierKind::Q, coeffs)
}

pub fn run(args: &ValidateArgs) -> CliResult<Outcome> {
    let mut ps: Vec<SplitParams> = Vec::new();
    for text in &args.p {
        let p = splitting(text)?;
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    if ps.is_empty() {
        return Err(CliError::Usage("no p values given".into()));
    }
    if args.trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    let mut suite = Suite { checks: Vec::new() };
    let num = EXIT_NUMERIC;

    suite.record(
        "parking equivalence",
        None,
        num,
        parking_equivalence(args.n_cap),
    );
    suite.record(
        "half-process equivalences",
        None,
        num,
        half_equivalences(args.n_cap),
    );
    suite.record("gamma conjugate symmetry", None, num, gamma_conjugate());
    suite.record("gamma recurrence", None, num, gamma_recurrence());

    for params in &ps {
        let p = Some(params);
        let base = period_base(params);
        let cap_hi = if params.is_half() { 8192 } else { 6600 };
        let moments = MomentTable::float(params, cap_hi)?;
        let tables = Poissonizer::from_moments(moments.clone(), 0);

        suite.record(
            "exact normalization",
            p,
            num,
            exact_normalization(params, args.n_cap),
        );
        suite.record("mean monotonicity", p, num, mean_monotone(&moments));
        suite.record(
            "variance nonnegativity",
            p,
            num,
            variance_nonnegative(params, &moments, args.n_cap),
        );
        if params.is_half() {
            suite.record("poissonized closed form", p, num, poissonized_half(&tables));
        }
        suite.record(
            "quadrature determinism",
            p,
            num,
            quadrature_deterministic(&tables),
        );
        suite.record("p^chi_k = 1", p, num, cpow_unit(params));

        let q = mean_constant(params, &moments).map(|e| e.q);
        let q = match (q, args.inject_fault) {
            (Ok(q), Some(Fault::Q1Sign)) => Ok(corrupt(&q)),
            (q, _) => q,
        };
        let qv = variance_series(&moments, 10, DEFAULT_SERIES_CAP);
        match (&q, &qv) {
            (Ok(q), Ok(qv)) => {
                suite.record("Q real-valuedness", p, num, real_valued(q));
                suite.record("Q periodicity", p, num, periodic(q));
                suite.record("Q_V real-valuedness", p, num, real_valued(qv));
                suite.record("Q_V periodicity", p, num, periodic(qv));
            }
            _ => {
                let e = q.err().or(qv.err()).expect("one failed");
                suite.record("Fourier coefficients", p, num, Err(e.into()));
            }
        }
        suite.record(
            "series vs quadrature",
            p,
            num,
            series_vs_quadrature(&tables),
        );
        if !params.is_half() {
            suite.record(
                "Q_V series vs quadrature",
                p,
                num,
                variance_coefficients(&tables),
            );
        }

        let b = base.unwrap_or(2);
        suite.record(
            "mean residual",
            p,
            num,
            mean_residual(&moments, &powers_between(b, 100, 6600)),
        );
        let var_ns = if params.is_half() {
            powers_between(2, 512, 8192)
        } else {
            match base {
                Some(b) => powers_between(b, 700, 2200),
                None => vec![1000, 2000],
            }
        };
        suite.record(
            "variance residual",
            p,
            num,
            variance_residual(&moments, &var_ns),
        );
        match base {
            Some(b) => {
                let ns = powers_between(b, 200, 1100);
                let ns = &ns[ns.len().saturating_sub(2)..];
                suite.record("density residual", p, num, density_residual(params, ns));
            }
            None => suite.skip("density residual", params, "1/p is not an integer"),
        }
        let (lo, hi) = match base {
            Some(b) => {
                let ns = powers_between(b, 64, 2200);
                (ns[0], *ns.last().expect("nonempty"))
            }
            None => (81, 2187),
        };
        suite.record(
            "Figure 3 envelope",
            p,
            num,
            figure3_envelope(&moments, lo, hi),
        );
        if params.is_half() {
            suite.record("de-Poissonization", p, num, depoissonization(&moments));
        }
    }

    suite.record(
        "parking direct vs split",
        None,
        EXIT_FIT,
        parking_split_check(args.trials, args.seed, args.alpha),
    );
    suite.record(
        "seed determinism",
        None,
        EXIT_FIT,
        seed_determinism(args.trials.min(20_000), args.seed),
    );
    suite.record(
        "PATRICIA structure",
        None,
        EXIT_FIT,
        patricia_structure(args.seed),
    );
    suite.record(
        "sampler fits at p = 1/2",
        None,
        EXIT_FIT,
        sampler_fits(args.trials, args.seed, args.alpha),
    );

    let mut report = Report::new("validate", &["check", "p", "status", "detail"]);
    for c in &suite.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        };
        report.push(vec![
            c.name.clone().into(),
            c.p.clone().unwrap_or_default().into(),
            status.into(),
            c.detail.clone().into(),
        ]);
    }
    let failed: Vec<&Check> = suite
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .collect();
    report.meta("p", ps.iter().map(|p| p.to_string()).collect::<Vec<_>>())?;
    report.meta("seed", args.seed)?;
    report.meta(
        "tolerances",
        json!({
            "series_vs_quadrature": SERIES_VS_QUADRATURE,
            "quadrature": QUADRATURE_TOLERANCE,
            "fourier_imaginary": FOURIER_REAL,
            "cpow_unit": CPOW_UNIT,
            "alpha": args.alpha,
        }),
    )?;
    report.meta(
        "truncation",
        json!({ "n_cap": args.n_cap, "trials": args.trials, "series_cap": DEFAULT_SERIES_CAP }),
    )?;
    report.meta(
        "summary",
        json!({
            "checks": suite.checks.len(),
            "failed": failed.len(),
            "first_failure": failed.first().map(|c| c.name.clone()),
            "fault": args.inject_fault.map(|f| format!("{f:?}")),
        }),
    )?;
    let failure = failed.first().map(|c| CliError::Invariant {
        name: c.name.clone(),
        detail: match &c.p {
            Some(p) => format!("p = {p}: {}", c.detail),
            None => c.detail.clone(),
        },
        code: c.code,
    });
    Ok(Outcome { report, failure })
}
