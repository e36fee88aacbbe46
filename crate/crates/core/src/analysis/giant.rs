use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::Trace;

#[derive(Clone, Debug, Serialize)]
pub struct GiantViolation {
    pub seed: u64,
    pub t: f64,
    /// Components of size at least `ηn` (capped at the number tracked).
    pub count: usize,
    pub sizes: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniqueGiantReport {
    pub eta: f64,
    pub n: u64,
    pub runs: usize,
    /// Runs with at most one component of size `≥ ηn` at every snapshot.
    pub passing_runs: usize,
    pub pass_fraction: f64,
    pub violations: Vec<GiantViolation>,
}

/// Count, per run, snapshots with two or more components of size `≥ ηn`.
/// Needs at least the two largest sizes per snapshot.
pub fn unique_giant(traces: &[Trace], eta: f64) -> Result<UniqueGiantReport> {
    let first = traces.first().ok_or_else(|| Error::invalid("no traces"))?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("eta must be in (0, 1], got {eta}")));
    }
    let n = first.meta.n;
    let threshold = eta * n as f64;
    let mut violations = Vec::new();
    let mut passing = 0;
    for tr in traces {
        if tr.meta.n != n {
            return Err(Error::invalid("traces differ in n"));
        }
        let mut ok = true;
        for s in &tr.snapshots {
            if s.top.len() < 2.min(n as usize) {
                return Err(Error::invalid("snapshots lack the two largest component sizes"));
            }
            let count = s.top.iter().filter(|&&c| c as f64 >= threshold).count();
            if count > 1 {
                ok = false;
                violations.push(GiantViolation {
                    seed: tr.meta.seed,
                    t: s.t,
                    count,
                    sizes: s.top.clone(),
                });
            }
        }
        passing += ok as usize;
    }
    Ok(UniqueGiantReport {
        eta,
        n,
        runs: traces.len(),
        passing_runs: passing,
        pass_fraction: passing as f64 / traces.len() as f64,
        violations,
    })
}

impl fmt::Display for UniqueGiantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "unique giant (eta = {}, n = {}): {}/{} runs pass ({:.3})",
            self.eta, self.n, self.passing_runs, self.runs, self.pass_fraction
        )?;
        for v in self.violations.iter().take(10) {
            writeln!(f, "  seed {} t = {:.4}: sizes {:?}", v.seed, v.t, v.sizes)?;
        }
        if self.violations.len() > 10 {
            writeln!(f, "  ... {} more", self.violations.len() - 10)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    /// Sizes at least this count as the tail (`k_report + 1`).
    pub k_tail: u64,
    pub gamma: f64,
    pub runs: usize,
    /// Runs with `N_{≥k_tail} < L₁ + γn` at every snapshot.
    pub passing_runs: usize,
    /// Largest `(N_{≥k_tail} − L₁)/n` seen.
    pub worst_excess: f64,
}

/// Checks that, apart from the largest component, little mass sits in
/// components of size above `k_report`, at every snapshot.
pub fn tail_event(traces: &[Trace], gamma: f64) -> Result<TailReport> {
    let first = traces.first().ok_or_else(|| Error::invalid("no traces"))?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must be in (0, 1), got {gamma}")));
    }
    let k_report = first.meta.k_report;
    let mut passing = 0;
    let mut worst = f64::NEG_INFINITY;
    for tr in traces {
        if tr.meta.k_report != k_report {
            return Err(Error::invalid("traces differ in k_report"));
        }
        let mut ok = true;
        for s in &tr.snapshots {
            // The largest component is in the tail once it outgrows k_report.
            let excess = s.tail - s.l1;
            worst = worst.max(excess);
            ok &= excess < gamma;
        }
        passing += ok as usize;
    }
    Ok(TailReport {
        k_tail: k_report + 1,
        gamma,
        runs: traces.len(),
        passing_runs: passing,
        worst_excess: worst,
    })
}
