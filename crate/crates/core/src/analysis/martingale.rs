use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use super::table;
use crate::error::{Error, Result};
use crate::process::Trace;

#[derive(Clone, Debug, Serialize)]
pub struct RunDiagnostic {
    pub seed: u64,
    pub k: u64,
    pub steps: usize,
    /// `max |Z_{m₂} − Z_{m₁}|` over windows with `0 ≤ m₂ − m₁ ≤ W`.
    pub max_deviation: f64,
    pub pass: bool,
    pub max_increment: f64,
    pub increments_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleDiagnostic {
    pub lambda: f64,
    pub n: u64,
    pub ell: usize,
    /// `n^{1/2 + 2λ}`.
    pub bound: f64,
    /// Longest window, `⌊n^{1+λ}⌋` steps.
    pub window: u64,
    pub ks: Vec<u64>,
    pub runs: Vec<RunDiagnostic>,
    /// Per tracked size, the fraction of runs within the bound.
    pub pass_fraction: Vec<f64>,
    /// Per tracked size, the fraction of runs with every `|Y| ≤ 2ℓk`.
    pub increment_fraction: Vec<f64>,
    pub version: String,
}

/// `max |z[j] − z[i]|` over `0 ≤ j − i ≤ window`, by monotone deques.
pub fn max_window_deviation(z: &[f64], window: usize) -> f64 {
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for (j, &v) in z.iter().enumerate() {
        while lo.back().is_some_and(|&i| z[i] >= v) {
            lo.pop_back();
        }
        lo.push_back(j);
        while hi.back().is_some_and(|&i| z[i] <= v) {
            hi.pop_back();
        }
        hi.push_back(j);
        while lo.front().is_some_and(|&i| j - i > window) {
            lo.pop_front();
        }
        while hi.front().is_some_and(|&i| j - i > window) {
            hi.pop_front();
        }
        best = best.max(v - z[lo[0]]).max(z[hi[0]] - v);
    }
    best
}

/// Windowed deviations of `Z_m = Σ_{i<m} (ΔN_k − E(ΔN_k | graph))`.
pub fn martingale_diagnostic(traces: &[Trace], ks: &[u64], lambda: f64) -> Result<MartingaleDiagnostic> {
    let first = traces.first().ok_or_else(|| Error::invalid("no traces"))?;
    if !(lambda > 0.0 && lambda < 0.25) {
        return Err(Error::invalid(format!("lambda must be in (0, 1/4), got {lambda}")));
    }
    let n = first.meta.n;
    let nf = n as f64;
    let bound = nf.powf(0.5 + 2.0 * lambda);
    let window = nf.powf(1.0 + lambda).floor() as u64;
    let mut ell = 0;
    let mut runs = Vec::new();
    for tr in traces {
        if tr.meta.n != n {
            return Err(Error::invalid("traces differ in n"));
        }
        let log = tr.drift.as_ref().ok_or_else(|| {
            Error::invalid(format!("trace with seed {} has no drift records", tr.meta.seed))
        })?;
        ell = log.ell;
        for &k in ks {
            let i = log.index_of(k).ok_or_else(|| {
                Error::invalid(format!("trace with seed {} did not record k = {k}", tr.meta.seed))
            })?;
            let y_bound = 2.0 * log.ell as f64 * k as f64;
            let mut z = Vec::with_capacity(log.steps() + 1);
            z.push(0.0);
            let mut acc = 0.0;
            let mut max_increment: f64 = 0.0;
            for (&r, &c) in log.realized[i].iter().zip(&log.conditional[i]) {
                let y = r as f64 - c;
                max_increment = max_increment.max(y.abs());
                acc += y;
                z.push(acc);
            }
            let max_deviation = max_window_deviation(&z, window as usize);
            runs.push(RunDiagnostic {
                seed: tr.meta.seed,
                k,
                steps: log.steps(),
                max_deviation,
                pass: max_deviation < bound,
                max_increment,
                increments_ok: max_increment <= y_bound,
            });
        }
    }
    let frac = |k: u64, f: &dyn Fn(&RunDiagnostic) -> bool| {
        let of_k: Vec<_> = runs.iter().filter(|r| r.k == k).collect();
        of_k.iter().filter(|r| f(r)).count() as f64 / of_k.len() as f64
    };
    Ok(MartingaleDiagnostic {
        lambda,
        n,
        ell,
        bound,
        window,
        ks: ks.to_vec(),
        pass_fraction: ks.iter().map(|&k| frac(k, &|r| r.pass)).collect(),
        increment_fraction: ks.iter().map(|&k| frac(k, &|r| r.increments_ok)).collect(),
        runs,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

impl fmt::Display for MartingaleDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n = {}  lambda = {}  bound n^(1/2+2λ) = {:.1}  window {} steps  runs {}",
            self.n,
            self.lambda,
            self.bound,
            self.window,
            self.runs.len() / self.ks.len().max(1)
        )?;
        let rows: Vec<Vec<String>> = self
            .ks
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let worst = self
                    .runs
                    .iter()
                    .filter(|r| r.k == k)
                    .map(|r| r.max_deviation)
                    .fold(0.0, f64::max);
                vec![
                    k.to_string(),
                    format!("{worst:.1}"),
                    format!("{:.3}", self.pass_fraction[i]),
                    format!("{:.3}", self.increment_fraction[i]),
                ]
            })
            .collect();
        f.write_str(&table(&["k", "worst |dZ|", "pass", "|Y|<=2lk"], &rows))
    }
}
