use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use achlioptas::analysis::{
    compare as compare_traces, empirical_gelation, gelation_window, martingale_diagnostic, onestep_consistency,
    unique_giant, EmpiricalConfig, GelationConfig, GelationThresholds, OneStepConfig,
};
use achlioptas::io::{write_artifact, Row};
use achlioptas::kinetics::{integrate, GelMode, Integrator, KernelChoice, KineticsConfig, OdeSeries};
use achlioptas::process::{run_many, step_at, uniform_grid, ProcessConfig, ProcessState, Sampling, Trace};
use achlioptas::rng::SimRng;
use achlioptas::rules::{builtin, catalogue, RuleSpec};
use serde::Serialize;
use serde_json::Value;

use crate::args::{self, CompareArgs, DiagnoseArgs, GelationArgs, SimulateArgs, SolveArgs};
use crate::{CliError, Global};

type Result<T> = std::result::Result<T, CliError>;

fn rule_of(name: &Option<String>, params: &BTreeMap<String, String>) -> Result<RuleSpec> {
    Ok(builtin(name.as_deref().unwrap_or("erdos_renyi"), params)?)
}

fn sampling(s: &Option<String>) -> Result<Sampling> {
    match s.as_deref().unwrap_or("iid") {
        "iid" => Ok(Sampling::Iid),
        "distinct" => Ok(Sampling::Distinct),
        other => Err(CliError::Usage(format!("sampling must be `iid` or `distinct`, got `{other}`"))),
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x).map_err(achlioptas::error::Error::from)?)
}

/// Metadata for a report artifact: the report itself plus `kind` and the
/// configuration that produced it.
fn report_meta<T: Serialize, C: Serialize>(kind: &str, report: &T, config: &C) -> Result<Value> {
    let mut v = to_value(report)?;
    if let Value::Object(m) = &mut v {
        m.insert("kind".into(), Value::String(kind.into()));
        m.insert("config".into(), to_value(config)?);
    }
    Ok(v)
}

fn print_report<T: Serialize + std::fmt::Display>(report: &T, g: &Global) -> Result<()> {
    if g.json {
        println!("{}", serde_json::to_string_pretty(report).map_err(achlioptas::error::Error::from)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

/// Drop a `.json` or `.csv` suffix.
fn stem_of(p: &Path) -> PathBuf {
    match p.extension().and_then(|e| e.to_str()) {
        Some("json" | "csv") => p.with_extension(""),
        _ => p.to_path_buf(),
    }
}

pub fn simulate(mut a: SimulateArgs, g: &Global) -> Result<()> {
    a.overlay(&args::load(g.config.as_deref(), "simulate")?)?;
    let rule = rule_of(&a.rule, &a.params)?;
    let n = a.n.unwrap();
    let t_max = a.t_max.unwrap();
    let times = match &a.times {
        Some(t) => t.clone(),
        None => {
            let dt = a.dt.unwrap();
            if !(dt > 0.0) {
                return Err(CliError::Usage(format!("dt must be positive, got {dt}")));
            }
            uniform_grid(t_max, dt)
        }
    };
    let seeds = a.seeds.unwrap();
    if seeds == 0 {
        return Err(CliError::Usage("seeds must be at least 1".into()));
    }
    let base_seed = a.seed.unwrap();
    let mut base = ProcessConfig::new(n, rule, t_max, base_seed).with_snapshots(times);
    base.k_report = a.k_report.unwrap();
    base.sampling = sampling(&a.sampling)?;
    base.check_every = a.check_every.unwrap();
    let configs: Vec<ProcessConfig> = if seeds == 1 {
        vec![base]
    } else {
        (0..seeds as u64)
            .map(|i| ProcessConfig {
                seed: SimRng::stream_seed(base_seed, i),
                ..base.clone()
            })
            .collect()
    };
    for c in &configs {
        c.validate()?;
    }
    let out = a.out.clone().unwrap();
    let results = run_many(&configs);
    for (c, r) in configs.iter().zip(results) {
        let mut trace = r?;
        let mut own = a.clone();
        own.seed = Some(c.seed);
        own.seeds = Some(1);
        trace.meta.config = Some(to_value(&own)?);
        let stem = out.join(format!("{}-n{}-seed{}", trace.meta.rule, n, c.seed));
        trace.drift = None;
        trace.write(&stem, g.force)?;
        let last = trace.snapshots.last();
        println!(
            "{}  t = {}  L1/n = {}",
            stem.display(),
            last.map_or(0.0, |s| s.t),
            last.map_or(0.0, |s| s.l1)
        );
    }
    Ok(())
}

pub fn solve(mut a: SolveArgs, g: &Global) -> Result<()> {
    a.overlay(&args::load(g.config.as_deref(), "solve")?)?;
    let rule = rule_of(&a.rule, &a.params)?;
    let t_end = a.t_end.unwrap();
    let mut kc = KineticsConfig::new(rule, a.k_max.unwrap(), t_end);
    kc.gel_mode = a.gel.as_deref().unwrap().parse::<GelMode>()?;
    kc.integrator = match a.integrator.as_deref().unwrap() {
        "rk4" => Integrator::Rk4 { h: a.h.unwrap() },
        "rk45" => Integrator::Rk45 {
            atol: a.atol.unwrap(),
            rtol: a.rtol.unwrap(),
        },
        other => return Err(CliError::Usage(format!("integrator must be `rk45` or `rk4`, got `{other}`"))),
    };
    let dt = a.dt.unwrap();
    if !(dt > 0.0) {
        return Err(CliError::Usage(format!("dt must be positive, got {dt}")));
    }
    kc.grid = uniform_grid(t_end, dt);
    kc.k_report = a.k_report.unwrap();
    kc.kernel = a.kernel.as_deref().unwrap().parse::<KernelChoice>()?;
    let mut series = integrate(&kc)?;
    series.meta.config = Some(to_value(&a)?);
    let stem = a.out.clone().unwrap();
    series.write(&stem, g.force)?;
    let i = series.times.len() - 1;
    println!(
        "{}  t = {}  M = {}  gel = {}  steps {}",
        stem.display(),
        series.times[i],
        series.mass[i],
        series.gel[i],
        series.meta.steps
    );
    Ok(())
}

/// A trace stem, or every trace in a directory (sorted by file name).
fn read_traces(path: &Path) -> Result<Vec<Trace>> {
    if !path.is_dir() {
        return Ok(vec![Trace::read(&stem_of(path))?]);
    }
    let mut stems: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(achlioptas::error::Error::from)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| p.with_extension(""))
        .collect();
    stems.sort();
    let mut traces = Vec::new();
    for s in stems {
        match Trace::read(&s) {
            Ok(t) => traces.push(t),
            // Other artifacts may share the directory.
            Err(achlioptas::error::Error::Format(_) | achlioptas::error::Error::Json(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if traces.is_empty() {
        return Err(CliError::Usage(format!("no traces in {}", path.display())));
    }
    Ok(traces)
}

pub fn compare(mut a: CompareArgs, g: &Global) -> Result<()> {
    a.overlay(&args::load(g.config.as_deref(), "compare")?)?;
    let traces = read_traces(a.trace.as_ref().unwrap())?;
    let series = OdeSeries::read(&stem_of(a.series.as_ref().unwrap()))?;
    let k_report = traces.iter().map(|t| t.meta.k_report as usize).min().unwrap_or(0);
    let k_max = a.k_max.unwrap_or(10.min(k_report).min(series.meta.k_report));
    let times = match &a.times {
        Some(t) => t.clone(),
        None => traces[0]
            .snapshots
            .iter()
            .map(|s| s.t)
            .filter(|&t| traces.iter().all(|tr| tr.at(t).is_some()) && series.index_of(t).is_some())
            .collect(),
    };
    if times.is_empty() {
        return Err(CliError::Usage("traces and series share no times".into()));
    }
    let report = compare_traces(&traces, &series, k_max, &times)?;
    if let Some(stem) = &a.out {
        write_artifact(stem, &report_meta("deviation_report", &report, &a)?, &report.to_rows(), g.force)?;
    }
    print_report(&report, g)
}

#[derive(Serialize)]
struct GelationReport {
    window: achlioptas::analysis::GelationWindow,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<achlioptas::analysis::EmpiricalGelation>,
    /// Every empirical crossing lies in the window widened by 0.05.
    #[serde(skip_serializing_if = "Option::is_none")]
    consistent: Option<bool>,
}

impl std::fmt::Display for GelationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.window)?;
        if let Some(e) = &self.empirical {
            write!(f, "{e}")?;
        }
        if let Some(c) = self.consistent {
            writeln!(f, "crossings within window ± 0.05: {}", if c { "yes" } else { "no" })?;
        }
        Ok(())
    }
}

impl GelationReport {
    fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        let mut bounds = vec![&self.window.bounds];
        bounds.extend(self.window.sensitivity.as_ref());
        for b in bounds {
            rows.push(Row::new(b.t_lower, b.k_max as u64, b.leakage_at_lower, "t_lower"));
            if let Some(t) = b.t_upper {
                rows.push(Row::new(t, b.k_max as u64, 0.0, "t_upper"));
            }
        }
        if let Some(e) = &self.empirical {
            for p in &e.points {
                for (&t, &l) in p.times.iter().zip(&p.median_l1) {
                    rows.push(Row::new(t, p.n, l, "median_l1"));
                }
            }
        }
        rows
    }
}

pub fn gelation(mut a: GelationArgs, g: &Global) -> Result<()> {
    a.overlay(&args::load(g.config.as_deref(), "gelation")?)?;
    let rule = rule_of(&a.rule, &a.params)?;
    let mut cfg = GelationConfig::new(rule.clone(), a.k_max.unwrap());
    cfg.t_probe = a.t_probe.unwrap();
    cfg.dt = a.dt.unwrap();
    cfg.thresholds = GelationThresholds {
        delta_mass: a.delta_mass.unwrap(),
        delta_gel: a.delta_gel.unwrap(),
    };
    cfg.integrator = Integrator::Rk45 {
        atol: a.atol.unwrap(),
        rtol: a.rtol.unwrap(),
    };
    cfg.sensitivity = !a.no_sensitivity.unwrap();
    let window = gelation_window(&cfg)?;
    let ladder = a.ladder.clone().unwrap();
    let empirical = if ladder.is_empty() {
        None
    } else {
        let mut ec = EmpiricalConfig::new(rule, ladder, a.eps.unwrap());
        ec.seeds = a.seeds.unwrap();
        ec.base_seed = a.seed.unwrap();
        ec.t_max = a.t_max.unwrap();
        Some(empirical_gelation(&ec)?)
    };
    let consistent = empirical.as_ref().map(|e| {
        e.crossings()
            .iter()
            .all(|c| c.is_some_and(|t| window.contains(t, 0.05)))
    });
    let report = GelationReport {
        window,
        empirical,
        consistent,
    };
    if let Some(stem) = &a.out {
        write_artifact(stem, &report_meta("gelation_window", &report, &a)?, &report.rows(), g.force)?;
    }
    print_report(&report, g)
}

#[derive(Serialize)]
struct DiagnoseReport {
    martingale: achlioptas::analysis::MartingaleDiagnostic,
    unique_giant: achlioptas::analysis::UniqueGiantReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    onestep: Option<achlioptas::analysis::OneStepReport>,
}

impl std::fmt::Display for DiagnoseReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.martingale, self.unique_giant)?;
        if let Some(o) = &self.onestep {
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

impl DiagnoseReport {
    fn rows(&self) -> Vec<Row> {
        let mut rows: Vec<Row> = self
            .martingale
            .runs
            .iter()
            .map(|r| Row::new(0.0, r.k, r.max_deviation, "max_deviation"))
            .collect();
        for v in &self.unique_giant.violations {
            rows.push(Row::new(v.t, v.seed, v.count as f64, "giant_violation"));
        }
        if let Some(o) = &self.onestep {
            for e in &o.entries {
                rows.push(Row::new(0.0, e.k, e.residual, "onestep_residual"));
            }
        }
        rows
    }
}

pub fn diagnose(mut a: DiagnoseArgs, g: &Global) -> Result<()> {
    a.overlay(&args::load(g.config.as_deref(), "diagnose")?)?;
    let rule = rule_of(&a.rule, &a.params)?;
    let n = a.n.unwrap();
    let t_max = a.t_max.unwrap();
    let ks = a.ks.clone().unwrap();
    let seeds = a.seeds.unwrap();
    let dt = a.dt.unwrap();
    if seeds == 0 || !(dt > 0.0) {
        return Err(CliError::Usage("need seeds ≥ 1 and dt > 0".into()));
    }
    let mut base = ProcessConfig::new(n, rule.clone(), t_max, 0).with_snapshots(uniform_grid(t_max, dt));
    base.k_report = 1;
    base.drift_k = ks.clone();
    base.sampling = sampling(&a.sampling)?;
    let configs: Vec<ProcessConfig> = (0..seeds as u64)
        .map(|i| ProcessConfig {
            seed: SimRng::stream_seed(a.seed.unwrap(), i),
            ..base.clone()
        })
        .collect();
    let traces = run_many(&configs).into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    let martingale = martingale_diagnostic(&traces, &ks, a.lambda.unwrap())?;
    let giant = unique_giant(&traces, a.eta.unwrap())?;
    let onestep = match a.onestep_t {
        Some(t) => {
            let mut state = ProcessState::new(n, rule.clone(), configs[0].seed)?.with_sampling(base.sampling);
            for _ in 0..step_at(t, n) {
                state.advance();
            }
            let cfg = OneStepConfig {
                gamma: a.gamma.unwrap(),
                s_cut: a.s_cut.unwrap(),
            };
            Some(onestep_consistency(state.census(), &rule, &ks, &cfg)?)
        }
        None => None,
    };
    let report = DiagnoseReport {
        martingale,
        unique_giant: giant,
        onestep,
    };
    if let Some(stem) = &a.out {
        write_artifact(stem, &report_meta("diagnostic", &report, &a)?, &report.rows(), g.force)?;
    }
    print_report(&report, g)
}

pub fn rules_list(g: &Global) -> Result<()> {
    let cat = catalogue();
    if g.json {
        println!("{}", serde_json::to_string_pretty(&cat).map_err(achlioptas::error::Error::from)?);
        return Ok(());
    }
    let w = cat.iter().map(|e| e.name.len()).max().unwrap_or(4);
    println!("{:w$}  ell  {:10}  {:20}  summary", "name", "g(s)", "params");
    for e in &cat {
        println!("{:w$}  {:>3}  {:10}  {:20}  {}", e.name, e.ell, e.g, e.params, e.summary);
    }
    Ok(())
}
