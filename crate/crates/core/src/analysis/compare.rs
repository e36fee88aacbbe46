use std::fmt;

use serde::Serialize;

use super::table;
use crate::error::{Error, Result};
use crate::io::Row;
use crate::kinetics::OdeSeries;
use crate::process::Trace;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationEntry {
    pub t: f64,
    pub k: usize,
    /// Mean of `N_k/n` over the runs.
    pub empirical: f64,
    pub ode: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GiantDeviation {
    pub t: f64,
    /// Mean `L₁/n`.
    pub l1: f64,
    /// `1 − M(t)`.
    pub gel: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationReport {
    pub rule: String,
    pub n: u64,
    pub seeds: Vec<u64>,
    pub k_max: usize,
    pub t_grid: Vec<f64>,
    pub ode_k_max: usize,
    pub entries: Vec<DeviationEntry>,
    pub giant: Vec<GiantDeviation>,
    pub sup_deviation: f64,
    pub sup_giant_deviation: f64,
    pub version: String,
}

/// Compare run snapshots (averaged over `traces`) with an ODE series at
/// times `t_grid` and sizes `1..=k_max`.
pub fn compare(traces: &[Trace], series: &OdeSeries, k_max: usize, t_grid: &[f64]) -> Result<DeviationReport> {
    let first = traces.first().ok_or_else(|| Error::invalid("no traces to compare"))?;
    let n = first.meta.n;
    for tr in traces {
        if tr.meta.n != n || tr.meta.rule != first.meta.rule {
            return Err(Error::invalid("traces differ in n or rule"));
        }
    }
    if first.meta.rule != series.meta.rule {
        return Err(Error::invalid(format!(
            "trace rule `{}` differs from series rule `{}`",
            first.meta.rule, series.meta.rule
        )));
    }
    if k_max == 0 || k_max as u64 > first.meta.k_report || k_max > series.meta.k_report {
        return Err(Error::invalid(format!(
            "k_max = {k_max} must be in 1..=min(trace k_report {}, series k_report {})",
            first.meta.k_report, series.meta.k_report
        )));
    }
    let mut missing = Vec::new();
    for &t in t_grid {
        for tr in traces {
            if tr.at(t).is_none() {
                missing.push(format!("trace seed {} at t = {t}", tr.meta.seed));
            }
        }
        if series.index_of(t).is_none() {
            missing.push(format!("series at t = {t}"));
        }
    }
    if !missing.is_empty() {
        return Err(Error::invalid(format!("grid points missing: {}", missing.join("; "))));
    }
    let runs = traces.len() as f64;
    let mut entries = Vec::new();
    let mut giant = Vec::new();
    for &t in t_grid {
        let i = series.index_of(t).expect("checked");
        let snaps: Vec<_> = traces.iter().map(|tr| tr.at(t).expect("checked")).collect();
        for k in 1..=k_max {
            let empirical = snaps.iter().map(|s| s.fraction(k as u64)).sum::<f64>() / runs;
            let ode = series.rho[i][k - 1];
            entries.push(DeviationEntry {
                t,
                k,
                empirical,
                ode,
                deviation: (empirical - ode).abs(),
            });
        }
        let l1 = snaps.iter().map(|s| s.l1).sum::<f64>() / runs;
        let gel = 1.0 - series.mass[i];
        giant.push(GiantDeviation {
            t,
            l1,
            gel,
            deviation: (l1 - gel).abs(),
        });
    }
    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    Ok(DeviationReport {
        rule: first.meta.rule.clone(),
        n,
        seeds: traces.iter().map(|t| t.meta.seed).collect(),
        k_max,
        t_grid: t_grid.to_vec(),
        ode_k_max: series.meta.k_max,
        sup_deviation: sup(&mut entries.iter().map(|e| e.deviation)),
        sup_giant_deviation: sup(&mut giant.iter().map(|e| e.deviation)),
        entries,
        giant,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

impl DeviationReport {
    /// Rows with kinds `empirical`, `ode`, `deviation`, plus `l1` and `gel`.
    pub fn to_rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        for e in &self.entries {
            rows.push(Row::new(e.t, e.k as u64, e.empirical, "empirical"));
            rows.push(Row::new(e.t, e.k as u64, e.ode, "ode"));
            rows.push(Row::new(e.t, e.k as u64, e.deviation, "deviation"));
        }
        for g in &self.giant {
            rows.push(Row::new(g.t, 0, g.l1, "l1"));
            rows.push(Row::new(g.t, 0, g.gel, "gel"));
        }
        rows
    }
}

impl fmt::Display for DeviationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rule {}  n = {}  runs = {}  K = {}",
            self.rule,
            self.n,
            self.seeds.len(),
            self.ode_k_max
        )?;
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    format!("{:.4}", e.t),
                    e.k.to_string(),
                    format!("{:.6}", e.empirical),
                    format!("{:.6}", e.ode),
                    format!("{:.2e}", e.deviation),
                ]
            })
            .collect();
        f.write_str(&table(&["t", "k", "N_k/n", "rho_k", "|dev|"], &rows))?;
        let rows: Vec<Vec<String>> = self
            .giant
            .iter()
            .map(|g| {
                vec![
                    format!("{:.4}", g.t),
                    format!("{:.6}", g.l1),
                    format!("{:.6}", g.gel),
                    format!("{:.2e}", g.deviation),
                ]
            })
            .collect();
        f.write_str(&table(&["t", "L1/n", "1-M", "|dev|"], &rows))?;
        writeln!(f, "sup deviation {:.3e}  (giant {:.3e})", self.sup_deviation, self.sup_giant_deviation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{integrate, KineticsConfig};
    use crate::process::{step_at, Snapshot, TraceMeta};
    use crate::rules::builtin;
    use std::collections::BTreeMap;

    fn series() -> OdeSeries {
        let mut c = KineticsConfig::new(builtin("erdos_renyi", &BTreeMap::new()).unwrap(), 100, 0.4);
        c.k_report = 10;
        c.grid = vec![0.1, 0.2, 0.3, 0.4];
        integrate(&c).unwrap()
    }

    /// The series reshaped as a trace.
    fn as_trace(s: &OdeSeries, n: u64) -> Trace {
        let meta = TraceMeta {
            kind: "trace".into(),
            n,
            rule: s.meta.rule.clone(),
            params: BTreeMap::new(),
            seed: 0,
            t_max: s.meta.t_end,
            k_report: s.meta.k_report as u64,
            snapshot_times: s.times.clone(),
            sampling: Default::default(),
            version: String::new(),
            config: None,
        };
        let snapshots = s
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| Snapshot {
                t,
                m: step_at(t, n),
                nk: s.rho[i].clone(),
                tail: 0.0,
                l1: s.gel[i],
                chi: s.chi[i],
                chi_nolargest: s.chi[i],
                top: vec![],
            })
            .collect();
        Trace {
            meta,
            snapshots,
            drift: None,
        }
    }

    #[test]
    fn identical_inputs_have_zero_deviation() {
        let s = series();
        let r = compare(&[as_trace(&s, 1000)], &s, 10, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(r.sup_deviation, 0.0);
        assert_eq!(r.sup_giant_deviation, 0.0);
        assert_eq!(r.entries.len(), 40);
        assert!(r.to_string().contains("sup deviation 0.000e0"));
    }

    #[test]
    fn missing_points_are_listed() {
        let s = series();
        let err = compare(&[as_trace(&s, 1000)], &s, 10, &[0.1, 0.25]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t = 0.25") && msg.contains("series"), "{msg}");
        assert!(compare(&[as_trace(&s, 1000)], &s, 11, &[0.1]).is_err());
        assert!(compare(&[], &s, 1, &[0.1]).is_err());
    }
}
