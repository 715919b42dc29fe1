//! One function per scenario. Each returns the summary `results` object and
//! the rendered output files; nothing touches the filesystem here.

use serde_json::{json, Map, Value};

use super::config::{AxisName, AxisScale, Scenario, ScenarioConfig};
use super::output::{svg_line_chart, time_series_table, Cell, Table};
use crate::error::Result;
use crate::exec::Execution;
use crate::integrator::{integrate_to, Sample, StepControl};
use crate::mch::{self, ReadoutModel, DEFAULT_ZENO_THRESHOLD};
use crate::projective::{self, MeasurementSchedule};
use crate::stats::{binomial_sigma, chi_square};
use crate::system::{
    classify_regime, complex_rabi_rate, evolve_closed_form, survival_probability, zeno_asymptote, Amplitudes,
    SystemParams,
};
use crate::trajectories::{jump_time_bin_masses, run_damped_rabi_variant, run_ensemble, EnsembleConfig};

/// Rendered scenario output.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub results: Value,
    pub files: Vec<(String, String)>,
}

pub fn run_scenario(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    match config.scenario {
        Scenario::Evolve => evolve(config),
        Scenario::Trajectories => trajectories(config, exec),
        Scenario::DampedRabi => damped_rabi(config, exec),
        Scenario::Projective => projective_scenario(config, exec),
        Scenario::Mch => mch_scenario(config),
        Scenario::Compare => compare(config),
        Scenario::Sweep => sweep(config),
    }
}

fn params_of(config: &ScenarioConfig) -> Result<SystemParams> {
    SystemParams::with_splitting(config.omega, config.gamma, config.delta_omega)
}

fn sample_times(t_final: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_final * k as f64 / (n - 1) as f64).collect()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

fn closed_form_series(params: &SystemParams, t_final: f64, n: usize) -> Result<Vec<Sample>> {
    sample_times(t_final, n)
        .into_iter()
        .map(|t| evolve_closed_form(params, &Amplitudes::ground(), t).map(|state| Sample { t, state }))
        .collect()
}

fn evolve(config: &ScenarioConfig) -> Result<Report> {
    let params = params_of(config)?;
    let series = closed_form_series(&params, config.time, config.sample_points)?;
    let end = series.last().expect("at least two samples").state;
    let rate = complex_rabi_rate(&params);
    let results = json!({
        "p1": end.p1(),
        "p2": end.p2(),
        "norm2": end.norm2(),
        "p_emit": end.p_emit,
        "regime": classify_regime(&params, params.default_regime_tolerance()),
        "complex_rabi_rate": { "re": rate.re, "im": rate.im },
        "zeno_asymptote": opt(zeno_asymptote(&params, config.time).ok()),
    });
    let table = time_series_table(&series);
    let mut files = vec![("evolve.csv".to_string(), table.to_csv())];
    if config.svg {
        let chart = svg_line_chart("survival on level 1", "t", "p1", &table.column(0), &table.column(5), false);
        files.push(("evolve_p1.svg".into(), chart));
    }
    Ok(Report { results, files })
}

fn trajectories(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    let params = params_of(config)?;
    let mut ens = EnsembleConfig::new(config.time, config.n_traj, config.master_seed).with_exec(exec);
    ens.bins = config.bins;
    let res = run_ensemble(&params, &ens)?;

    let end = evolve_closed_form(&params, &Amplitudes::ground(), config.time)?;
    let expected = end.norm2();
    let sigma = binomial_sigma(expected, res.n_traj);
    let masses = jump_time_bin_masses(&params, &Amplitudes::ground(), config.time, config.bins)?;
    let chi = chi_square(&res.jump_time_histogram.counts, &masses);

    let n_jumps = res.jump_times.len() as f64;
    let mut hist = Table::new(&["bin_lo", "bin_hi", "count", "expected"]);
    let edges = res.jump_time_histogram.edges();
    for (i, &count) in res.jump_time_histogram.counts.iter().enumerate() {
        hist.push(vec![Cell::Num(edges[i]), Cell::Num(edges[i + 1]), Cell::Int(count), Cell::Num(masses[i] * n_jumps)]);
    }
    let series = closed_form_series(&params, config.time, config.sample_points)?;

    let results = json!({
        "n_traj": res.n_traj,
        "n_survived": res.n_survived,
        "survival_fraction": res.survival_fraction,
        "norm2_closed_form": expected,
        "binomial_sigma": sigma,
        "deviation_sigmas": if sigma > 0.0 { json!((res.survival_fraction - expected) / sigma) } else { Value::Null },
        "conditional_p1": opt(res.conditional_p1),
        "conditional_p1_closed_form": end.p1() / end.norm2(),
        "jump_time_chi_square": chi.map_or(Value::Null, |c| json!({
            "statistic": c.statistic, "dof": c.dof, "p_value": c.p_value,
        })),
    });
    Ok(Report {
        results,
        files: vec![
            ("trajectories.csv".into(), time_series_table(&series).to_csv()),
            ("jump_times.csv".into(), hist.to_csv()),
        ],
    })
}

fn damped_rabi(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    let params = params_of(config)?;
    let ens = EnsembleConfig::new(config.time, config.n_traj, config.master_seed).with_exec(exec);
    let res = run_damped_rabi_variant(&params, &ens)?;
    let mut table = Table::new(&["jumps", "count"]);
    for (k, &count) in res.jump_count_distribution.iter().enumerate() {
        table.push(vec![Cell::Int(k as u64), Cell::Int(count)]);
    }
    let results = json!({
        "n_traj": res.n_traj,
        "mean_p1": res.mean_p1,
        "total_jumps": res.total_jumps,
        "mean_jumps": res.mean_jumps,
        "survival_exact_without_reset": survival_probability(&params, config.time)?,
    });
    Ok(Report { results, files: vec![("damped_rabi.csv".into(), table.to_csv())] })
}

fn schedule_of(config: &ScenarioConfig, tau: f64) -> Result<MeasurementSchedule> {
    match config.n_measurements {
        Some(n) => MeasurementSchedule::new(tau, n),
        None => MeasurementSchedule::covering(config.time, tau),
    }
}

fn default_tau(config: &ScenarioConfig) -> Result<f64> {
    match config.tau {
        Some(tau) => Ok(tau),
        None => projective::tau_from_gamma(config.gamma),
    }
}

fn projective_scenario(config: &ScenarioConfig, exec: Execution) -> Result<Report> {
    let omega = config.omega;
    let tau = default_tau(config)?;
    let sched = schedule_of(config, tau)?;
    let probs = projective::interval_probs(omega, tau);

    let mut table = Table::new(&["k", "t", "permanent_survival", "return_probability", "rapid_limit"]);
    for k in 1..=sched.n {
        let partial = MeasurementSchedule::new(tau, k)?;
        table.push(vec![
            Cell::Int(k),
            Cell::Num(partial.total_time()),
            Cell::Num(projective::permanent_survival(&partial, omega)),
            Cell::Num(projective::return_probability(&partial, &probs)),
            Cell::Num(projective::rapid_repetition_limit(omega, tau, partial.total_time())?),
        ]);
    }

    let mut results = Map::new();
    results.insert("tau".into(), json!(tau));
    results.insert("n_measurements".into(), json!(sched.n));
    results.insert("total_time".into(), json!(sched.total_time()));
    results.insert("p".into(), json!(probs.p));
    results.insert("q".into(), json!(probs.q));
    results.insert("permanent_survival".into(), json!(projective::permanent_survival(&sched, omega)));
    results.insert("return_probability".into(), json!(projective::return_probability(&sched, &probs)));
    results.insert("rapid_limit".into(), json!(projective::rapid_repetition_limit(omega, tau, sched.total_time())?));
    results.insert("rapid_limit_valid".into(), json!(projective::rapid_limit_valid(omega, tau)));
    if config.n_traj > 0 {
        let stats = projective::chain_statistics(&sched, &probs, config.n_traj, config.master_seed, exec)?;
        results.insert(
            "chains".into(),
            json!({
                "n_chains": stats.n_chains,
                "return_frequency": stats.return_frequency(),
                "permanent_frequency": stats.permanent_frequency(),
            }),
        );
    }
    Ok(Report { results: Value::Object(results), files: vec![("projective.csv".into(), table.to_csv())] })
}

fn mch_scenario(config: &ScenarioConfig) -> Result<Report> {
    let params = params_of(config)?;
    let model = ReadoutModel::null_readout(config.gamma, config.delta_omega)?;
    let gen = mch::build_effective_generator(&model, config.omega);
    let ctrl = StepControl::auto(&params);
    let series = integrate_to(&gen, &Amplitudes::ground(), &sample_times(config.time, config.sample_points), &ctrl)?;
    let readout = mch::readout_probability(&model, config.omega, config.time, &ctrl)?;
    let exact = survival_probability(&params, config.time)?;
    let diagnostics = mch::level_resolution_time(&model, config.omega, DEFAULT_ZENO_THRESHOLD).ok();
    let results = json!({
        "kappa": model.kappa,
        "t_lr": opt(diagnostics.map(|d| d.t_lr)),
        "zeno_regime": diagnostics.map_or(Value::Null, |d| json!(d.zeno_regime)),
        "readout_probability": readout,
        "survival_exact": exact,
        "abs_difference": (readout - exact).abs(),
    });
    Ok(Report { results, files: vec![("mch.csv".into(), time_series_table(&series).to_csv())] })
}

/// Headline numbers of the three models at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub survival_exact: f64,
    pub zeno_asymptote: f64,
    pub projective_tau_identified: f64,
    pub projective_permanent_survival: f64,
    pub projective_return_probability: f64,
    pub mch_readout_prob: f64,
    pub tau: f64,
    pub n_measurements: u64,
}

pub fn compare_models(params: &SystemParams, t_final: f64, tau: Option<f64>) -> Result<Comparison> {
    let tau = match tau {
        Some(tau) => tau,
        None => projective::tau_from_gamma(params.gamma)?,
    };
    let sched = MeasurementSchedule::covering(t_final, tau)?;
    let model = ReadoutModel::null_readout(params.gamma, params.delta_omega)?;
    let ctrl = StepControl::auto(params);
    Ok(Comparison {
        survival_exact: survival_probability(params, t_final)?,
        zeno_asymptote: zeno_asymptote(params, t_final)?,
        projective_tau_identified: projective::rapid_repetition_limit(params.omega, tau, t_final)?,
        projective_permanent_survival: projective::permanent_survival(&sched, params.omega),
        projective_return_probability: projective::return_probability(&sched, &projective::interval_probs(params.omega, tau)),
        mch_readout_prob: mch::readout_probability(&model, params.omega, t_final, &ctrl)?,
        tau,
        n_measurements: sched.n,
    })
}

fn compare(config: &ScenarioConfig) -> Result<Report> {
    let params = params_of(config)?;
    // The identification τ = 2/γ is the point of the comparison; --tau is
    // ignored here.
    let c = compare_models(&params, config.time, None)?;
    let named = [
        ("survival_exact", c.survival_exact),
        ("zeno_asymptote", c.zeno_asymptote),
        ("projective_tau_identified", c.projective_tau_identified),
        ("mch_readout_prob", c.mch_readout_prob),
    ];
    let mut diffs = Map::new();
    for (i, &(a, va)) in named.iter().enumerate() {
        for &(b, vb) in &named[i + 1..] {
            diffs.insert(format!("{a}_vs_{b}"), json!(rel_diff(va, vb)));
        }
    }
    let mut table = Table::new(&named.map(|(name, _)| name));
    table.push(named.iter().map(|&(_, v)| Cell::Num(v)).collect());
    let mut results = Map::new();
    for &(name, v) in &named {
        results.insert(name.into(), json!(v));
    }
    results.insert("projective_permanent_survival".into(), json!(c.projective_permanent_survival));
    results.insert("tau".into(), json!(c.tau));
    results.insert("n_measurements".into(), json!(c.n_measurements));
    results.insert("relative_differences".into(), Value::Object(diffs));
    Ok(Report { results: Value::Object(results), files: vec![("compare.csv".into(), table.to_csv())] })
}

pub const SWEEP_QUANTITIES: [&str; 6] = [
    "survival_exact",
    "zeno_asymptote",
    "projective_rapid",
    "projective_permanent",
    "projective_return",
    "mch_readout_prob",
];

fn sweep(config: &ScenarioConfig) -> Result<Report> {
    let axis = config.axis.expect("validated: sweep has an axis");
    let mut header = vec!["value", "omega", "gamma", "time", "tau", "n_measurements"];
    header.extend(SWEEP_QUANTITIES);
    let mut table = Table::new(&header);

    for value in axis.points() {
        let (mut omega, mut gamma, mut time, mut tau) = (config.omega, config.gamma, config.time, config.tau);
        match axis.name {
            AxisName::Omega => omega = value,
            AxisName::Gamma => gamma = value,
            AxisName::Time => time = value,
            AxisName::Tau => tau = Some(value),
        }
        let params = SystemParams::with_splitting(omega, gamma, config.delta_omega)?;
        let tau = tau.or_else(|| projective::tau_from_gamma(gamma).ok());
        let sched = tau.map(|tau| MeasurementSchedule::covering(time, tau)).transpose()?;
        let model = ReadoutModel::null_readout(gamma, config.delta_omega)?;
        let nan = f64::NAN;

        let survival = survival_probability(&params, time)?;
        let asymptote = zeno_asymptote(&params, time).unwrap_or(nan);
        let (rapid, permanent, ret) = match (tau, sched) {
            (Some(tau), Some(s)) => (
                projective::rapid_repetition_limit(omega, tau, time)?,
                projective::permanent_survival(&s, omega),
                projective::return_probability(&s, &projective::interval_probs(omega, tau)),
            ),
            _ => (nan, nan, nan),
        };
        let readout = mch::readout_probability(&model, omega, time, &StepControl::auto(&params))?;
        table.push(vec![
            Cell::Num(value),
            Cell::Num(omega),
            Cell::Num(gamma),
            Cell::Num(time),
            Cell::Num(tau.unwrap_or(nan)),
            Cell::Int(sched.map_or(0, |s| s.n)),
            Cell::Num(survival),
            Cell::Num(asymptote),
            Cell::Num(rapid),
            Cell::Num(permanent),
            Cell::Num(ret),
            Cell::Num(readout),
        ]);
    }

    let mut files = vec![("sweep.csv".to_string(), table.to_csv())];
    let first_quantity = header.len() - SWEEP_QUANTITIES.len();
    let xs = table.column(0);
    for (i, name) in SWEEP_QUANTITIES.iter().enumerate() {
        files.push((format!("sweep_{name}.dat"), table.two_column(0, first_quantity + i)));
        if config.svg {
            let ys = table.column(first_quantity + i);
            let log_x = axis.scale == AxisScale::Log;
            files.push((format!("sweep_{name}.svg"), svg_line_chart(name, axis.name.name(), name, &xs, &ys, log_x)));
        }
    }
    let results = json!({
        "points": axis.count,
        "columns": header,
        "files": files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    });
    Ok(Report { results, files })
}
