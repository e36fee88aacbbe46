//! Simulation of one run of an ℓ-vertex process on `n` vertices.
//!
//! Each step draws `ℓ` vertices, asks the rule which pairs to join, and
//! applies the joins to a [`DisjointSetForest`] while keeping an exact
//! [`Census`] of component sizes. Time is `t = m/n`; snapshots are taken
//! at step `⌊t·n⌋`.

mod census;
mod drift;
mod forest;
mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use census::{Census, DEFAULT_DENSE_LIMIT};
pub use drift::{conditional_drift, conditional_drift_generic, er_drift, GENERIC_DRIFT_BUDGET};
pub use forest::DisjointSetForest;
pub use trace::{DriftLog, Snapshot, Trace, TraceMeta};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::rules::{expected_delta_in, Choices, ExtSize, Partition, RuleSpec, MAX_ELL};

/// How the `ℓ` vertices of a step are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Independent and uniform, with replacement.
    #[default]
    Iid,
    /// Uniform over tuples of distinct vertices.
    Distinct,
}

/// Step index for time `t`: `⌊t·n⌋`, with a tiny allowance so that decimal
/// grid points such as `0.29 · 100` land on the intended integer.
pub fn step_at(t: f64, n: u64) -> u64 {
    (t * n as f64 * (1.0 + 1e-12)).floor() as u64
}

/// `Σ_k k²·count(k)/n`, optionally without the largest component.
pub fn susceptibility(census: &Census, exclude_largest: bool) -> f64 {
    census.susceptibility(exclude_largest)
}

/// Evenly spaced grid `0, dt, 2dt, …` up to and including `t_max`.
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let steps = (t_max / dt + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| (i as f64 * dt).min(t_max)).collect();
    if t_max - grid[grid.len() - 1] > 1e-12 {
        grid.push(t_max);
    }
    grid
}

#[derive(Clone, Debug)]
pub struct ProcessConfig {
    pub n: u64,
    pub rule: RuleSpec,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
    /// Sizes `1..=k_report` are stored per snapshot; larger ones are lumped.
    pub k_report: u64,
    /// Sizes for which per-step drift is recorded (empty: none).
    pub drift_k: Vec<u64>,
    pub sampling: Sampling,
    /// Full census and forest check every this many steps (0: never).
    pub check_every: u64,
    /// How many of the largest component sizes each snapshot keeps.
    pub top_tracked: usize,
}

impl ProcessConfig {
    /// Snapshots every 0.05 up to `t_max`, `k_report = 50`.
    pub fn new(n: u64, rule: RuleSpec, t_max: f64, seed: u64) -> Self {
        ProcessConfig {
            n,
            rule,
            t_max,
            snapshot_times: uniform_grid(t_max, 0.05),
            seed,
            k_report: 50,
            drift_k: Vec::new(),
            sampling: Sampling::Iid,
            check_every: 0,
            top_tracked: 4,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::invalid(format!("t_max must be finite and ≥ 0, got {}", self.t_max)));
        }
        if self.k_report == 0 {
            return Err(Error::invalid("k_report must be at least 1"));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("snapshot times must be strictly increasing"));
            }
        }
        if let Some(&t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.t_max).contains(&t))
        {
            return Err(Error::invalid(format!("snapshot time {t} outside [0, {}]", self.t_max)));
        }
        if self.drift_k.contains(&0) {
            return Err(Error::invalid("drift sizes must be at least 1"));
        }
        if self.sampling == Sampling::Distinct && self.n < self.rule.ell() as u64 {
            return Err(Error::invalid("distinct sampling needs n ≥ ell"));
        }
        Ok(())
    }
}

/// What happened in one step.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub vertices: SmallVec<[u32; MAX_ELL]>,
    pub sizes: SmallVec<[ExtSize; MAX_ELL]>,
    pub partition: Partition,
    pub choices: Choices,
    /// Index into `choices` of the sampled outcome.
    pub chosen: usize,
    /// `(size a, size b)` for each join that actually merged two components.
    pub merges: SmallVec<[(u64, u64); 2]>,
}

impl StepRecord {
    /// Realized `ΔN_k` of this step.
    pub fn delta(&self, k: u64) -> i64 {
        let k = k as i64;
        self.merges
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (a as i64, b as i64);
                let mut d = 0;
                if a == k {
                    d -= k;
                }
                if b == k {
                    d -= k;
                }
                if a + b == k {
                    d += k;
                }
                d
            })
            .sum()
    }
}

/// Forest, census and generator of one run.
#[derive(Clone, Debug)]
pub struct ProcessState {
    rule: RuleSpec,
    forest: DisjointSetForest,
    census: Census,
    rng: SimRng,
    sampling: Sampling,
    m: u64,
}

impl ProcessState {
    pub fn new(n: u64, rule: RuleSpec, seed: u64) -> Result<Self> {
        Ok(ProcessState {
            forest: DisjointSetForest::new(n as usize)?,
            census: Census::new(n),
            rule,
            rng: SimRng::new(seed),
            sampling: Sampling::Iid,
            m: 0,
        })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn census(&self) -> &Census {
        &self.census
    }

    pub fn forest(&self) -> &DisjointSetForest {
        &self.forest
    }

    pub fn rule(&self) -> &RuleSpec {
        &self.rule
    }

    /// Steps taken so far.
    pub fn steps(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.census.n()
    }

    #[inline]
    fn draw(&mut self, roots: &mut [u32; MAX_ELL], vertices: &mut [u32; MAX_ELL]) {
        let ell = self.rule.ell();
        let n = self.census.n();
        loop {
            for j in 0..ell {
                let v = self.rng.below(n) as u32;
                vertices[j] = v;
                roots[j] = self.forest.find(v);
            }
            if self.sampling == Sampling::Iid
                || (0..ell).all(|i| (i + 1..ell).all(|j| vertices[i] != vertices[j]))
            {
                return;
            }
        }
    }

    #[inline]
    fn pick(&mut self, choices: &Choices) -> usize {
        if choices.len() == 1 {
            return 0;
        }
        let u = self.rng.unit();
        let mut acc = 0.0;
        for (i, c) in choices.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        choices.len() - 1
    }

    #[inline]
    fn join(&mut self, a: u32, b: u32) -> Option<(u64, u64)> {
        let ra = self.forest.find(a);
        let rb = self.forest.find(b);
        if ra == rb {
            return None;
        }
        let (sa, sb) = (self.forest.root_size(ra), self.forest.root_size(rb));
        self.census.merge(sa, sb);
        self.forest.union_roots(ra, rb);
        Some((sa, sb))
    }

    /// One step, returning the full record.
    pub fn step(&mut self) -> StepRecord {
        let ell = self.rule.ell();
        let mut roots = [0u32; MAX_ELL];
        let mut vertices = [0u32; MAX_ELL];
        self.draw(&mut roots, &mut vertices);
        let sizes: SmallVec<[ExtSize; MAX_ELL]> = roots[..ell]
            .iter()
            .map(|&r| ExtSize::Finite(self.forest.root_size(r)))
            .collect();
        let partition = Partition::from_labels(&roots[..ell]);
        let choices = self.rule.decide_unchecked(&sizes, &partition);
        let chosen = self.pick(&choices);
        let mut merges = SmallVec::new();
        for &(i, j) in &choices[chosen].edges {
            if let Some(m) = self.join(roots[i as usize], roots[j as usize]) {
                merges.push(m);
            }
        }
        self.m += 1;
        StepRecord {
            vertices: SmallVec::from_slice(&vertices[..ell]),
            sizes,
            partition,
            choices,
            chosen,
            merges,
        }
    }

    /// One step without building a record.
    #[inline]
    pub fn advance(&mut self) {
        let ell = self.rule.ell();
        let mut roots = [0u32; MAX_ELL];
        let mut vertices = [0u32; MAX_ELL];
        self.draw(&mut roots, &mut vertices);
        let mut sizes = [ExtSize::Giant; MAX_ELL];
        for j in 0..ell {
            sizes[j] = ExtSize::Finite(self.forest.root_size(roots[j]));
        }
        let partition = Partition::from_labels(&roots[..ell]);
        let choices = self.rule.decide_unchecked(&sizes[..ell], &partition);
        let chosen = self.pick(&choices);
        for &(i, j) in &choices[chosen].edges {
            self.join(roots[i as usize], roots[j as usize]);
        }
        self.m += 1;
    }

    pub fn check(&self) -> Result<()> {
        self.census.check()?;
        self.forest.check()
    }
}

/// Drive one run and collect its trace. Identical configurations give
/// bit-identical traces.
pub fn run(config: &ProcessConfig) -> Result<Trace> {
    config.validate()?;
    let mut state =
        ProcessState::new(config.n, config.rule.clone(), config.seed)?.with_sampling(config.sampling);
    let n = config.n;
    let total_steps = step_at(config.t_max, n);
    let marks: Vec<u64> = config.snapshot_times.iter().map(|&t| step_at(t, n)).collect();
    let mut snapshots = Vec::with_capacity(marks.len());
    let mut next = 0;
    let recording = !config.drift_k.is_empty();
    let mut drift = recording.then(|| DriftLog::new(config.rule.ell(), config.drift_k.clone(), total_steps));
    let mut prefix_floor: Option<Vec<u64>> = None;

    for m in 0..=total_steps {
        while next < marks.len() && marks[next] == m {
            let snap = Snapshot::capture(
                state.census(),
                config.snapshot_times[next],
                m,
                config.k_report,
                config.top_tracked,
            );
            snapshots.push(snap);
            next += 1;
        }
        if config.check_every > 0 && m % config.check_every == 0 {
            state.check()?;
            check_prefix_monotone(state.census(), config.k_report, &mut prefix_floor)?;
        }
        if m == total_steps {
            break;
        }
        if let Some(log) = drift.as_mut() {
            let mut conditional: SmallVec<[f64; 4]> = SmallVec::new();
            for &k in &config.drift_k {
                conditional.push(conditional_drift(state.census(), &config.rule, k)?);
            }
            let rec = state.step();
            for (i, &k) in config.drift_k.iter().enumerate() {
                let given = expected_delta_in(&config.rule, k, &rec.sizes, &rec.partition)?;
                log.push(i, rec.delta(k), conditional[i], given, rec.partition.all_distinct());
            }
        } else {
            state.advance();
        }
    }
    Ok(Trace {
        meta: TraceMeta::from_config(config),
        snapshots,
        drift,
    })
}

/// `N_{≤k}` may never increase; `floor` keeps the last observed prefix sums.
fn check_prefix_monotone(census: &Census, k_report: u64, floor: &mut Option<Vec<u64>>) -> Result<()> {
    let mut acc = 0;
    let prefix: Vec<u64> = (1..=k_report)
        .map(|k| {
            acc += census.vertices_in(k);
            acc
        })
        .collect();
    if let Some(prev) = floor.as_ref() {
        if let Some(k) = (0..prefix.len()).find(|&i| prefix[i] > prev[i]) {
            return Err(Error::Invariant(format!(
                "N_≤{} increased from {} to {}",
                k + 1,
                prev[k],
                prefix[k]
            )));
        }
    }
    *floor = Some(prefix);
    Ok(())
}

/// Run several configurations on the current rayon pool; results keep the
/// input order.
pub fn run_many(configs: &[ProcessConfig]) -> Vec<Result<Trace>> {
    configs.par_iter().map(run).collect()
}

/// `count` configurations differing only in seed, derived from `seed` by
/// stream splitting.
pub fn seed_sweep(base: &ProcessConfig, seed: u64, count: usize) -> Vec<ProcessConfig> {
    (0..count as u64)
        .map(|i| ProcessConfig {
            seed: SimRng::stream_seed(seed, i),
            ..base.clone()
        })
        .collect()
}
