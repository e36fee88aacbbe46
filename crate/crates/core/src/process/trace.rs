use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{step_at, Census, ProcessConfig, Sampling};
use crate::error::{Error, Result};
use crate::io::{self, Row};

/// Component statistics at one snapshot time, as fractions of `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub m: u64,
    /// `N_k/n` for `k = 1..=k_report`.
    pub nk: Vec<f64>,
    /// `N_{>k_report}/n`.
    pub tail: f64,
    /// `L₁/n`.
    pub l1: f64,
    pub chi: f64,
    pub chi_nolargest: f64,
    /// Largest component sizes, descending (not serialized).
    pub top: Vec<u64>,
}

impl Snapshot {
    pub fn capture(census: &Census, t: f64, m: u64, k_report: u64, top: usize) -> Self {
        let n = census.n() as f64;
        let mut reported = 0u64;
        let nk = (1..=k_report)
            .map(|k| {
                let v = census.vertices_in(k);
                reported += v;
                v as f64 / n
            })
            .collect();
        Snapshot {
            t,
            m,
            nk,
            tail: (census.n() - reported) as f64 / n,
            l1: census.largest() as f64 / n,
            chi: census.susceptibility(false),
            chi_nolargest: census.susceptibility(true),
            top: census.top(top),
        }
    }

    /// `N_k/n`, zero beyond the reported range.
    pub fn fraction(&self, k: u64) -> f64 {
        self.nk.get((k as usize).wrapping_sub(1)).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub kind: String,
    pub n: u64,
    pub rule: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub t_max: f64,
    pub k_report: u64,
    pub snapshot_times: Vec<f64>,
    pub sampling: Sampling,
    pub version: String,
    /// Free-form experiment configuration embedded by front-ends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl TraceMeta {
    pub fn from_config(c: &ProcessConfig) -> Self {
        TraceMeta {
            kind: "trace".into(),
            n: c.n,
            rule: c.rule.name().to_string(),
            params: c.rule.params().clone(),
            seed: c.seed,
            t_max: c.t_max,
            k_report: c.k_report,
            snapshot_times: c.snapshot_times.clone(),
            sampling: c.sampling,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: None,
        }
    }
}

/// Per-step drift records for a fixed set of sizes.
///
/// For step `m` and tracked size `k`: the realized `ΔN_k`, the conditional
/// mean `E(ΔN_k | graph before the step)`, the mean given the sampled
/// vertices, and whether the sampled vertices were in distinct components.
#[derive(Clone, Debug, Default)]
pub struct DriftLog {
    /// Vertices sampled per step.
    pub ell: usize,
    pub ks: Vec<u64>,
    pub realized: Vec<Vec<i64>>,
    pub conditional: Vec<Vec<f64>>,
    pub given_sample: Vec<Vec<f64>>,
    pub distinct: Vec<bool>,
}

impl DriftLog {
    pub fn new(ell: usize, ks: Vec<u64>, steps: u64) -> Self {
        let cap = steps as usize;
        DriftLog {
            ell,
            realized: ks.iter().map(|_| Vec::with_capacity(cap)).collect(),
            conditional: ks.iter().map(|_| Vec::with_capacity(cap)).collect(),
            given_sample: ks.iter().map(|_| Vec::with_capacity(cap)).collect(),
            distinct: Vec::with_capacity(cap),
            ks,
        }
    }

    pub(crate) fn push(&mut self, i: usize, realized: i64, conditional: f64, given: f64, distinct: bool) {
        self.realized[i].push(realized);
        self.conditional[i].push(conditional);
        self.given_sample[i].push(given);
        if i == 0 {
            self.distinct.push(distinct);
        }
    }

    pub fn steps(&self) -> usize {
        self.distinct.len()
    }

    pub fn index_of(&self, k: u64) -> Option<usize> {
        self.ks.iter().position(|&x| x == k)
    }
}

/// The output of one run.
#[derive(Clone, Debug)]
pub struct Trace {
    pub meta: TraceMeta,
    pub snapshots: Vec<Snapshot>,
    pub drift: Option<DriftLog>,
}

impl Trace {
    /// Snapshot taken at time `t` (matched by step index `⌊t·n⌋`).
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        let m = step_at(t, self.meta.n);
        self.snapshots.iter().find(|s| s.m == m)
    }

    pub fn to_rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        for s in &self.snapshots {
            for (i, &v) in s.nk.iter().enumerate() {
                rows.push(Row::new(s.t, i as u64 + 1, v, "nk"));
            }
            rows.push(Row::new(s.t, self.meta.k_report, s.tail, "tail"));
            rows.push(Row::new(s.t, 0, s.l1, "l1"));
            rows.push(Row::new(s.t, 0, s.chi, "chi"));
            rows.push(Row::new(s.t, 0, s.chi_nolargest, "chi_nolargest"));
        }
        rows
    }

    pub fn from_rows(meta: TraceMeta, rows: &[Row]) -> Result<Self> {
        let mut snapshots = Vec::new();
        for (t, group) in io::group_by_time(rows) {
            let mut nk = vec![0.0; meta.k_report as usize];
            let mut snap = Snapshot {
                t,
                m: step_at(t, meta.n),
                nk: Vec::new(),
                tail: 0.0,
                l1: 0.0,
                chi: 0.0,
                chi_nolargest: 0.0,
                top: Vec::new(),
            };
            for r in group {
                match r.kind.as_str() {
                    "nk" => {
                        if r.k == 0 || r.k > meta.k_report {
                            return Err(Error::Format(format!("nk row with k = {} outside 1..={}", r.k, meta.k_report)));
                        }
                        nk[(r.k - 1) as usize] = r.value;
                    }
                    "tail" => snap.tail = r.value,
                    "l1" => snap.l1 = r.value,
                    "chi" => snap.chi = r.value,
                    "chi_nolargest" => snap.chi_nolargest = r.value,
                    other => return Err(Error::Format(format!("unknown trace kind `{other}`"))),
                }
            }
            snap.nk = nk;
            snapshots.push(snap);
        }
        Ok(Trace {
            meta,
            snapshots,
            drift: None,
        })
    }

    pub fn write(&self, stem: &Path, force: bool) -> Result<()> {
        io::write_artifact(stem, &self.meta, &self.to_rows(), force)
    }

    pub fn read(stem: &Path) -> Result<Self> {
        let (meta, rows): (TraceMeta, _) = io::read_artifact(stem)?;
        if meta.kind != "trace" {
            return Err(Error::Format(format!("{} is a `{}` artifact, not a trace", stem.display(), meta.kind)));
        }
        Self::from_rows(meta, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::run;
    use crate::rules::builtin;

    #[test]
    fn rows_roundtrip() {
        let rule = builtin("product", &BTreeMap::new()).unwrap();
        let mut cfg = ProcessConfig::new(300, rule, 1.0, 4);
        cfg.k_report = 5;
        let tr = run(&cfg).unwrap();
        let back = Trace::from_rows(tr.meta.clone(), &tr.to_rows()).unwrap();
        assert_eq!(back.snapshots.len(), tr.snapshots.len());
        for (a, b) in tr.snapshots.iter().zip(&back.snapshots) {
            assert_eq!(a.nk, b.nk);
            assert_eq!(a.m, b.m);
            assert_eq!((a.tail, a.l1, a.chi, a.chi_nolargest), (b.tail, b.l1, b.chi, b.chi_nolargest));
        }
    }

    #[test]
    fn fractions_in_unit_interval_and_prefix_monotone() {
        let rule = builtin("erdos_renyi", &BTreeMap::new()).unwrap();
        let mut cfg = ProcessConfig::new(2000, rule, 1.5, 8);
        cfg.k_report = 20;
        let tr = run(&cfg).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for s in &tr.snapshots {
            for &v in s.nk.iter().chain([s.tail, s.l1].iter()) {
                assert!((0.0..=1.0).contains(&v));
            }
            let prefix: Vec<f64> = s
                .nk
                .iter()
                .scan(0.0, |acc, &v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect();
            if let Some(p) = &prev {
                for (a, b) in prefix.iter().zip(p) {
                    assert!(a <= &(b + 1e-15));
                }
            }
            prev = Some(prefix);
        }
    }
}
