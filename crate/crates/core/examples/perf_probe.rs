use std::collections::BTreeMap;
use std::time::Instant;

use achlioptas::process::{run, ProcessConfig};
use achlioptas::rules::builtin;

fn main() {
    for (name, n, t) in [("erdos_renyi", 10_000_000u64, 1.0), ("product", 1_000_000, 1.5)] {
        let rule = builtin(name, &BTreeMap::new()).unwrap();
        let cfg = ProcessConfig::new(n, rule, t, 1).with_snapshots(vec![t]);
        let start = Instant::now();
        let tr = run(&cfg).unwrap();
        println!("{name} n={n} t={t}: {:?}, L1/n = {:.4}", start.elapsed(), tr.snapshots[0].l1);
    }
}
