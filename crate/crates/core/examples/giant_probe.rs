//! Unique-giant pass rate: `giant_probe RULE N RUNS`.
use std::collections::BTreeMap;

use achlioptas::analysis::unique_giant;
use achlioptas::process::{run_many, seed_sweep, uniform_grid, ProcessConfig};
use achlioptas::rules::builtin;

fn main() {
    let a: Vec<String> = std::env::args().collect();
    let rule = builtin(&a[1], &BTreeMap::new()).unwrap();
    let n: u64 = a[2].parse().unwrap();
    let runs: usize = a[3].parse().unwrap();
    let mut base = ProcessConfig::new(n, rule, 1.5, 0).with_snapshots(uniform_grid(1.5, 0.05));
    base.k_report = 1;
    let t = std::time::Instant::now();
    let traces: Vec<_> = run_many(&seed_sweep(&base, 1, runs)).into_iter().map(|r| r.unwrap()).collect();
    let rep = unique_giant(&traces, 0.01).unwrap();
    let mut ts: Vec<f64> = rep.violations.iter().map(|v| v.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    println!("{} {}/{} violating times {:?} ({:.1?})", a[1], rep.passing_runs, runs, ts, t.elapsed());
}
