use std::collections::BTreeMap;

use achlioptas::process::{run, seed_sweep, ProcessConfig, Sampling, Trace};
use achlioptas::rules::{builtin, RuleSpec};

fn rule(name: &str) -> RuleSpec {
    builtin(name, &BTreeMap::new()).unwrap()
}

#[test]
fn same_seed_same_trace() {
    for name in ["erdos_renyi", "bohman_frieze", "product", "adjacent_edge"] {
        let cfg = ProcessConfig::new(3000, rule(name), 1.2, 42);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_rows(), b.to_rows(), "{name}");
        let c = run(&ProcessConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.to_rows(), c.to_rows(), "{name}");
    }
}

#[test]
fn snapshots_are_consistent() {
    let mut cfg = ProcessConfig::new(5000, rule("sum"), 1.5, 3);
    cfg.k_report = 20;
    cfg.check_every = 101;
    let tr = run(&cfg).unwrap();
    assert_eq!(tr.snapshots.len(), cfg.snapshot_times.len());
    for s in &tr.snapshots {
        let listed: f64 = s.nk.iter().sum();
        assert!((listed + s.tail - 1.0).abs() < 1e-12);
        assert!(s.l1 >= s.top.iter().skip(1).map(|&c| c as f64 / 5000.0).fold(0.0, f64::max));
        assert!(s.chi >= s.chi_nolargest);
    }
    // The giant only grows.
    for w in tr.snapshots.windows(2) {
        assert!(w[1].l1 >= w[0].l1);
    }
}

#[test]
fn trace_files_roundtrip() {
    let d = tempdir();
    let tr = run(&ProcessConfig::new(2000, rule("dcdgm"), 1.0, 8)).unwrap();
    let stem = d.join("t");
    tr.write(&stem, false).unwrap();
    assert!(tr.write(&stem, false).is_err());
    let back = Trace::read(&stem).unwrap();
    assert_eq!(back.meta, tr.meta);
    assert_eq!(back.to_rows(), tr.to_rows());
    std::fs::remove_dir_all(d).unwrap();
}

#[test]
fn distinct_sampling_runs() {
    let mut cfg = ProcessConfig::new(50, rule("product"), 2.0, 1);
    cfg.sampling = Sampling::Distinct;
    cfg.check_every = 1;
    let tr = run(&cfg).unwrap();
    assert!(tr.snapshots.last().unwrap().l1 > 0.5);
}

#[test]
fn sweep_seeds_are_distinct() {
    let base = ProcessConfig::new(10, rule("erdos_renyi"), 0.5, 0);
    let cfgs = seed_sweep(&base, 1, 50);
    let mut seeds: Vec<u64> = cfgs.iter().map(|c| c.seed).collect();
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds.len(), 50);
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("achlioptas-process-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn grid_ends_exactly_at_t_max() {
    use achlioptas::process::uniform_grid;
    for (t, dt) in [(1.2, 0.05), (1.5, 0.005), (1.0, 0.3), (0.7, 0.1)] {
        let g = uniform_grid(t, dt);
        assert_eq!(*g.last().unwrap(), t, "{t} {dt}");
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
