//! Command arguments. Each struct doubles as the schema of the config file
//! for its command: every field may come from the file, and a flag given
//! on the command line wins over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fill unset fields of `$flags` from `$file`.
macro_rules! overlay {
    ($flags:expr, $file:expr; $($f:ident),* $(,)?) => {
        $( if $flags.$f.is_none() { $flags.$f = $file.$f.clone(); } )*
    };
}

/// Parameters from the file, overridden key by key by `--param` flags.
fn merge_params(flags: &mut Vec<String>, own: &mut BTreeMap<String, String>, file: &BTreeMap<String, String>) -> Result<(), CliError> {
    let mut params = file.clone();
    params.extend(std::mem::take(own));
    for kv in flags.drain(..) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--param expects KEY=VALUE, got `{kv}`")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    *own = params;
    Ok(())
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Rule name (see `rules-list`).
    #[arg(long)]
    pub rule: Option<String>,
    /// Rule parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    #[serde(skip)]
    pub param: Vec<String>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    /// Number of vertices.
    #[arg(long)]
    pub n: Option<u64>,
    /// Final time (steps = ⌊t·n⌋).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Snapshot spacing, used when no explicit times are given.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Explicit snapshot times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Base seed; with several runs each gets its own derived stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of runs.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Sizes 1..=k_report are written per snapshot.
    #[arg(long)]
    pub k_report: Option<u64>,
    /// `iid` or `distinct`.
    #[arg(long)]
    pub sampling: Option<String>,
    /// Check all invariants every this many steps (0: never).
    #[arg(long)]
    pub check_every: Option<u64>,
    /// Output directory.
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn overlay(&mut self, file: &SimulateArgs) -> Result<(), CliError> {
        merge_params(&mut self.param, &mut self.params, &file.params)?;
        overlay!(self, file; rule);
        overlay!(self, file; n, t_max, dt, times, seed, seeds, k_report, sampling, check_every, out);
        self.n.get_or_insert(10_000);
        self.t_max.get_or_insert(1.0);
        self.dt.get_or_insert(0.05);
        self.seed.get_or_insert(1);
        self.seeds.get_or_insert(1);
        self.k_report.get_or_insert(50);
        self.sampling.get_or_insert_with(|| "iid".into());
        self.check_every.get_or_insert(0);
        self.out.get_or_insert_with(|| PathBuf::from("traces"));
        self.rule.get_or_insert_with(|| "erdos_renyi".into());
        self.command = Some("simulate".into());
        Ok(())
    }
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Rule name (see `rules-list`).
    #[arg(long)]
    pub rule: Option<String>,
    /// Rule parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    #[serde(skip)]
    pub param: Vec<String>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    /// Truncation order K.
    #[arg(long = "K", alias = "k-max")]
    #[serde(alias = "K")]
    pub k_max: Option<usize>,
    /// `with` or `no` sol–gel interaction.
    #[arg(long)]
    pub gel: Option<String>,
    /// `rk45` (adaptive) or `rk4` (fixed step).
    #[arg(long)]
    pub integrator: Option<String>,
    /// Step for rk4.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Output grid spacing.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub k_report: Option<usize>,
    /// `auto`, `pair`, `generic` or `er_closed`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Output stem (writes STEM.json and STEM.csv).
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl SolveArgs {
    pub fn overlay(&mut self, file: &SolveArgs) -> Result<(), CliError> {
        merge_params(&mut self.param, &mut self.params, &file.params)?;
        overlay!(self, file; rule);
        overlay!(self, file; k_max, gel, integrator, h, atol, rtol, t_end, dt, k_report, kernel, out);
        self.rule.get_or_insert_with(|| "erdos_renyi".into());
        let k = *self.k_max.get_or_insert(500);
        self.gel.get_or_insert_with(|| "with".into());
        let method = self.integrator.get_or_insert_with(|| "rk45".into()).clone();
        if method == "rk4" {
            self.h.get_or_insert(5e-4);
        } else {
            self.atol.get_or_insert(1e-9);
            self.rtol.get_or_insert(1e-7);
        }
        self.t_end.get_or_insert(1.0);
        self.dt.get_or_insert(0.01);
        self.k_report.get_or_insert(k.min(50));
        self.kernel.get_or_insert_with(|| "auto".into());
        let stem = format!("{}-K{}-{}", self.rule.as_deref().unwrap_or("erdos_renyi"), k, self.gel.as_deref().unwrap_or("with"));
        self.out.get_or_insert_with(|| PathBuf::from(stem));
        self.command = Some("solve".into());
        Ok(())
    }
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareArgs {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Trace stem, or a directory whose traces are averaged.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Series stem (a `.csv` or `.json` suffix is ignored).
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Comparison times; default: every time present in all inputs.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Also write the report as STEM.json and STEM.csv.
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl CompareArgs {
    pub fn overlay(&mut self, file: &CompareArgs) -> Result<(), CliError> {
        overlay!(self, file; trace, series, k_max, times, out);
        if self.trace.is_none() || self.series.is_none() {
            return Err(CliError::Usage("compare needs --trace and --series".into()));
        }
        self.command = Some("compare".into());
        Ok(())
    }
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GelationArgs {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Rule name (see `rules-list`).
    #[arg(long)]
    pub rule: Option<String>,
    /// Rule parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    #[serde(skip)]
    pub param: Vec<String>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[arg(long = "K", alias = "k-max")]
    #[serde(alias = "K")]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub t_probe: Option<f64>,
    /// Spacing of probed times.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub delta_mass: Option<f64>,
    #[arg(long)]
    pub delta_gel: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Skip the K/2 sensitivity run.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_sensitivity: Option<bool>,
    /// System sizes for the empirical crossing, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<u64>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Final time of the empirical runs.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Write the report to this JSON file.
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl GelationArgs {
    pub fn overlay(&mut self, file: &GelationArgs) -> Result<(), CliError> {
        merge_params(&mut self.param, &mut self.params, &file.params)?;
        overlay!(self, file; rule);
        overlay!(self, file; k_max, t_probe, dt, delta_mass, delta_gel, atol, rtol, no_sensitivity,
            ladder, eps, seeds, seed, t_max, out);
        self.rule.get_or_insert_with(|| "erdos_renyi".into());
        self.k_max.get_or_insert(1000);
        self.t_probe.get_or_insert(1.5);
        self.dt.get_or_insert(0.005);
        self.delta_mass.get_or_insert(1e-2);
        self.delta_gel.get_or_insert(1e-2);
        self.atol.get_or_insert(1e-9);
        self.rtol.get_or_insert(1e-7);
        self.no_sensitivity.get_or_insert(false);
        self.ladder.get_or_insert_with(Vec::new);
        self.eps.get_or_insert(0.05);
        self.seeds.get_or_insert(5);
        self.seed.get_or_insert(1);
        self.t_max.get_or_insert(1.5);
        self.command = Some("gelation".into());
        Ok(())
    }
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseArgs {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Rule name (see `rules-list`).
    #[arg(long)]
    pub rule: Option<String>,
    /// Rule parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    #[serde(skip)]
    pub param: Vec<String>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sizes whose drift is tracked, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<u64>>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Size threshold, as a fraction of n, for the unique-giant check.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Snapshot spacing for the unique-giant check.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Also compare the one-step drift with the rate function at this time.
    #[arg(long)]
    pub onestep_t: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub s_cut: Option<u64>,
    #[arg(long)]
    pub sampling: Option<String>,
    /// Write the report to this JSON file.
    #[arg(long)]
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl DiagnoseArgs {
    pub fn overlay(&mut self, file: &DiagnoseArgs) -> Result<(), CliError> {
        merge_params(&mut self.param, &mut self.params, &file.params)?;
        overlay!(self, file; rule);
        overlay!(self, file; n, t_max, seeds, seed, ks, lambda, eta, dt, onestep_t, gamma, s_cut, sampling, out);
        self.rule.get_or_insert_with(|| "erdos_renyi".into());
        self.n.get_or_insert(10_000);
        self.t_max.get_or_insert(1.0);
        self.seeds.get_or_insert(10);
        self.seed.get_or_insert(1);
        self.ks.get_or_insert_with(|| vec![1]);
        self.lambda.get_or_insert(0.125);
        self.eta.get_or_insert(0.01);
        self.dt.get_or_insert(0.05);
        self.gamma.get_or_insert(0.01);
        self.s_cut.get_or_insert(100);
        self.sampling.get_or_insert_with(|| "iid".into());
        self.command = Some("diagnose".into());
        Ok(())
    }
}

/// Read a config file for `command`: TOML, or JSON. A JSON artifact
/// metadata file contributes the configuration embedded in it.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>, command: &str) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    // Either half of an artifact names its metadata.
    let json_half;
    let path = if path.extension().is_some_and(|e| e == "csv") {
        json_half = path.with_extension("json");
        json_half.as_path()
    } else {
        path
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
        if let Some(c) = v.get("config").filter(|c| c.is_object()) {
            check_command(c.get("command").and_then(|c| c.as_str()), command, path)?;
            return serde_json::from_value(c.clone()).map_err(|e| bad(&e));
        }
        if v.get("kind").is_some() {
            return Err(CliError::Usage(format!("{} carries no embedded configuration", path.display())));
        }
        check_command(v.get("command").and_then(|c| c.as_str()), command, path)?;
        return serde_json::from_str(&text).map_err(|e| bad(&e));
    }
    // Parse straight into the target type so unknown keys are reported
    // with their line.
    let table: toml::Table = toml::from_str(&text).map_err(|e| bad(&e))?;
    check_command(table.get("command").and_then(|c| c.as_str()), command, path)?;
    toml::from_str(&text).map_err(|e| bad(&e))
}

fn check_command(found: Option<&str>, expected: &str, path: &Path) -> Result<(), CliError> {
    match found {
        Some(c) if c != expected => Err(CliError::Usage(format!(
            "{} is a `{c}` configuration, not `{expected}`",
            path.display()
        ))),
        _ => Ok(()),
    }
}
