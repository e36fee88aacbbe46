use std::collections::BTreeMap;
use std::time::Instant;

use achlioptas::kinetics::{integrate, GelMode, KineticsConfig};
use achlioptas::rules::builtin;

fn main() {
    for (name, t_end) in [("erdos_renyi", 1.0), ("product", 1.2), ("bohman_frieze", 1.5)] {
        for (k, mode) in [(1000, GelMode::WithGel), (1000, GelMode::NoGel), (500, GelMode::NoGel)] {
            let mut c = KineticsConfig::new(builtin(name, &BTreeMap::new()).unwrap(), k, t_end);
            c.gel_mode = mode;
            let start = Instant::now();
            let s = integrate(&c).unwrap();
            let first = |d: f64| s.times.iter().zip(&s.mass).find(|(_, &m)| m < 1.0 - d).map(|(t, _)| *t);
            println!(
                "{name} K={k} {mode:?}: {:?} steps={} evals={} proj={:e} M(end)={:.4} first M<1-1e-3: {:?} leak_max={:e}",
                start.elapsed(), s.meta.steps, s.meta.rhs_evals, s.meta.max_projection,
                s.mass.last().unwrap(), first(1e-3),
                s.meta.leakage.iter().cloned().fold(0.0, f64::max)
            );
        }
    }
}
