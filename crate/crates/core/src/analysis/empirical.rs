use std::fmt;

use serde::Serialize;

use super::{opt, table};
use crate::error::{Error, Result};
use crate::process::{run_many, seed_sweep, uniform_grid, ProcessConfig, Sampling};
use crate::rng::SimRng;
use crate::rules::RuleSpec;

#[derive(Clone, Debug)]
pub struct EmpiricalConfig {
    pub rule: RuleSpec,
    /// Increasing system sizes.
    pub n_ladder: Vec<u64>,
    /// Giant fraction that counts as crossed.
    pub eps: f64,
    pub seeds: usize,
    pub base_seed: u64,
    pub t_max: f64,
    /// Snapshot spacing.
    pub dt: f64,
    pub sampling: Sampling,
}

impl EmpiricalConfig {
    pub fn new(rule: RuleSpec, n_ladder: Vec<u64>, eps: f64) -> Self {
        EmpiricalConfig {
            rule,
            n_ladder,
            eps,
            seeds: 5,
            base_seed: 1,
            t_max: 1.5,
            dt: 0.005,
            sampling: Sampling::Iid,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint {
    pub n: u64,
    pub seeds: Vec<u64>,
    /// First snapshot time with median `L₁/n ≥ ε`; `None` means beyond `t_max`.
    pub crossing: Option<f64>,
    pub times: Vec<f64>,
    pub median_l1: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalGelation {
    pub rule: String,
    pub eps: f64,
    pub t_max: f64,
    pub base_seed: u64,
    pub points: Vec<LadderPoint>,
    pub version: String,
}

impl EmpiricalGelation {
    pub fn crossings(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.crossing).collect()
    }

    /// All runs crossed and the crossings move in one direction along the ladder.
    pub fn monotone(&self) -> bool {
        let c: Option<Vec<f64>> = self.crossings().into_iter().collect();
        match c {
            Some(c) => {
                c.windows(2).all(|p| p[0] <= p[1]) || c.windows(2).all(|p| p[0] >= p[1])
            }
            None => false,
        }
    }

    /// Range of the crossings that were found.
    pub fn spread(&self) -> Option<f64> {
        let c: Vec<f64> = self.crossings().into_iter().flatten().collect();
        if c.is_empty() {
            return None;
        }
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(hi - lo)
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Per system size, the first time the median giant fraction reaches `eps`.
pub fn empirical_gelation(cfg: &EmpiricalConfig) -> Result<EmpiricalGelation> {
    if cfg.n_ladder.is_empty() || cfg.n_ladder.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::invalid("n_ladder must be non-empty and strictly increasing"));
    }
    if !(cfg.eps > 0.0 && cfg.eps <= 1.0) {
        return Err(Error::invalid(format!("eps must be in (0, 1], got {}", cfg.eps)));
    }
    if cfg.seeds == 0 {
        return Err(Error::invalid("need at least one seed"));
    }
    let times = uniform_grid(cfg.t_max, cfg.dt);
    let mut points = Vec::new();
    for &n in &cfg.n_ladder {
        let mut base = ProcessConfig::new(n, cfg.rule.clone(), cfg.t_max, 0).with_snapshots(times.clone());
        base.k_report = 1;
        base.top_tracked = 1;
        base.sampling = cfg.sampling;
        let configs = seed_sweep(&base, SimRng::stream_seed(cfg.base_seed, n), cfg.seeds);
        let traces = run_many(&configs).into_iter().collect::<Result<Vec<_>>>()?;
        let median_l1: Vec<f64> = (0..times.len())
            .map(|i| median(&mut traces.iter().map(|t| t.snapshots[i].l1).collect::<Vec<_>>()))
            .collect();
        let crossing = times
            .iter()
            .zip(&median_l1)
            .find(|(_, &l)| l >= cfg.eps)
            .map(|(&t, _)| t);
        points.push(LadderPoint {
            n,
            seeds: configs.iter().map(|c| c.seed).collect(),
            crossing,
            times: times.clone(),
            median_l1,
        });
    }
    Ok(EmpiricalGelation {
        rule: cfg.rule.name().to_string(),
        eps: cfg.eps,
        t_max: cfg.t_max,
        base_seed: cfg.base_seed,
        points,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

impl fmt::Display for EmpiricalGelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {}  eps {}  t_max {}", self.rule, self.eps, self.t_max)?;
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                let c = match p.crossing {
                    Some(_) => opt(p.crossing),
                    None => format!("> {}", self.t_max),
                };
                vec![p.n.to_string(), p.seeds.len().to_string(), c]
            })
            .collect();
        f.write_str(&table(&["n", "runs", "crossing"], &rows))?;
        writeln!(f, "monotone {}  spread {}", self.monotone(), opt(self.spread()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::builtin;
    use std::collections::BTreeMap;

    fn er() -> RuleSpec {
        builtin("erdos_renyi", &BTreeMap::new()).unwrap()
    }

    #[test]
    fn er_small_ladder() {
        let mut cfg = EmpiricalConfig::new(er(), vec![2000, 20000], 0.05);
        cfg.t_max = 1.0;
        cfg.dt = 0.01;
        let r = empirical_gelation(&cfg).unwrap();
        for c in r.crossings() {
            let c = c.unwrap();
            assert!(c > 0.4 && c < 0.6, "{c}");
        }
        assert!(r.spread().unwrap() < 0.1);
        assert!(r.to_string().contains("crossing"));
    }

    #[test]
    fn full_fraction_never_crosses() {
        let mut cfg = EmpiricalConfig::new(er(), vec![5000], 1.0);
        cfg.t_max = 1.0;
        cfg.seeds = 3;
        let r = empirical_gelation(&cfg).unwrap();
        assert_eq!(r.crossings(), vec![None]);
        assert!(!r.monotone());
        assert!(r.to_string().contains("> 1"));
    }

    #[test]
    fn validation() {
        assert!(empirical_gelation(&EmpiricalConfig::new(er(), vec![100, 100], 0.1)).is_err());
        assert!(empirical_gelation(&EmpiricalConfig::new(er(), vec![100], 0.0)).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
