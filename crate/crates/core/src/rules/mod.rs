//! ℓ-vertex rules as pure decision functions over component sizes.
//!
//! A rule sees the sizes of the components containing `ℓ` sampled vertices,
//! together with the [`Partition`] telling which sampled vertices already
//! share a component, and returns a probability distribution over sets of
//! pairs to add ([`EdgeChoice`]). Deterministic rules return a single choice
//! with weight one.
//!
//! The same rule objects drive the simulator (with actual finite sizes) and
//! the rate equations (with [`ExtSize::Giant`] standing for the linear-size
//! component), through [`expected_delta`].

mod builtin;
mod delta;
mod size;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

pub use builtin::{builtin, catalogue, BoundedTable, Builtin, CatalogueEntry};
pub use delta::{
    accumulate_deltas, expected_delta, expected_delta_in, merge_delta,
};
pub use size::{ExtSize, Magnitude};

use crate::error::{Error, Result};

/// Maximum `ℓ` supported by the fixed-size buffers used in the hot path.
pub const MAX_ELL: usize = 8;

pub type Choices = SmallVec<[EdgeChoice; 2]>;

/// Which sampled vertices lie in the same component.
///
/// Blocks are numbered in order of first appearance, so two partitions of
/// the same grouping compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: SmallVec<[u8; MAX_ELL]>,
    blocks: u8,
}

impl Partition {
    /// Every index in its own block.
    pub fn discrete(ell: usize) -> Self {
        Partition {
            block_of: (0..ell as u8).collect(),
            blocks: ell as u8,
        }
    }

    /// Build from arbitrary labels; indices with equal labels share a block.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut block_of = SmallVec::new();
        let mut firsts: SmallVec<[usize; MAX_ELL]> = SmallVec::new();
        for (i, label) in labels.iter().enumerate() {
            match firsts.iter().position(|&j| labels[j] == *label) {
                Some(b) => block_of.push(b as u8),
                None => {
                    block_of.push(firsts.len() as u8);
                    firsts.push(i);
                }
            }
        }
        Partition {
            block_of,
            blocks: firsts.len() as u8,
        }
    }

    /// From explicit blocks of 0-based indices, e.g. `[[0, 2], [1], [3]]`.
    pub fn from_blocks(ell: usize, blocks: &[&[usize]]) -> Result<Self> {
        let mut labels = vec![usize::MAX; ell];
        for (b, block) in blocks.iter().enumerate() {
            for &i in *block {
                if i >= ell {
                    return Err(Error::invalid(format!("index {i} out of range for ell = {ell}")));
                }
                if labels[i] != usize::MAX {
                    return Err(Error::invalid(format!("index {i} appears in two blocks")));
                }
                labels[i] = b;
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::invalid(format!("index {i} belongs to no block")));
        }
        Ok(Self::from_labels(&labels))
    }

    /// Limit convention used for the kernels: finite entries are pairwise
    /// distinct components, all giant entries are one shared component.
    pub fn limit_convention(sizes: &[ExtSize]) -> Self {
        let labels: SmallVec<[usize; MAX_ELL]> = sizes
            .iter()
            .enumerate()
            .map(|(i, s)| if s.is_giant() { usize::MAX } else { i })
            .collect();
        Self::from_labels(&labels)
    }

    pub fn ell(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks as usize
    }

    pub fn block_of(&self, index: usize) -> usize {
        self.block_of[index] as usize
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    pub fn all_distinct(&self) -> bool {
        self.block_count() == self.ell()
    }

    /// Sizes must agree within a block.
    pub fn check_sizes(&self, sizes: &[ExtSize]) -> Result<()> {
        if sizes.len() != self.ell() {
            return Err(Error::Dimension {
                expected: self.ell(),
                got: sizes.len(),
            });
        }
        for i in 0..sizes.len() {
            for j in (i + 1)..sizes.len() {
                if self.same_block(i, j) && sizes[i] != sizes[j] {
                    return Err(Error::invalid(format!(
                        "indices {} and {} share a component but have sizes {} and {}",
                        i + 1,
                        j + 1,
                        sizes[i],
                        sizes[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One possible outcome of a decision: a set of pairs to add, and its
/// probability. Pairs hold 0-based positions into the sampled tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeChoice {
    pub edges: SmallVec<[(u8, u8); 2]>,
    pub weight: f64,
}

impl EdgeChoice {
    /// A single pair added with probability one.
    pub fn single(i: usize, j: usize) -> Self {
        debug_assert_ne!(i, j);
        let mut edges = SmallVec::new();
        edges.push((i.min(j) as u8, i.max(j) as u8));
        EdgeChoice { edges, weight: 1.0 }
    }

    pub fn new(edges: &[(usize, usize)], weight: f64) -> Self {
        EdgeChoice {
            edges: edges
                .iter()
                .map(|&(i, j)| (i.min(j) as u8, i.max(j) as u8))
                .collect(),
            weight,
        }
    }
}

/// Hook for rules defined in code outside the built-in catalogue.
///
/// Implementations must be deterministic functions of their inputs.
pub trait DecisionRule: Send + Sync + fmt::Debug {
    fn decide(&self, sizes: &[ExtSize], partition: &Partition) -> Choices;
}

/// The well-behavedness threshold `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    /// `g(s) = s`
    Identity,
    /// `g(s) = s²`
    Square,
    /// `g(s) = 2s`
    Double,
    /// `g(s) = max(B, s)`
    AtLeast(u64),
}

impl Threshold {
    pub fn apply(self, s: u64) -> u64 {
        match self {
            Threshold::Identity => s,
            Threshold::Square => s.saturating_mul(s),
            Threshold::Double => s.saturating_mul(2),
            Threshold::AtLeast(b) => b.max(s),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Decision {
    Builtin(Builtin),
    Custom(Arc<dyn DecisionRule>),
}

/// A fully specified ℓ-vertex rule.
#[derive(Clone, Debug)]
pub struct RuleSpec {
    name: String,
    params: BTreeMap<String, String>,
    ell: usize,
    threshold: Threshold,
    is_achlioptas: bool,
    is_merging: bool,
    bounded_size: Option<u64>,
    exchangeable: Vec<(usize, usize)>,
    decision: Decision,
}

impl RuleSpec {
    /// Wrap a custom decision function. `exchangeable` lists position pairs
    /// whose swap never changes the merge outcome in the limit convention;
    /// it is only used to shrink kernel enumeration and may be empty.
    pub fn custom(
        name: impl Into<String>,
        ell: usize,
        threshold: Threshold,
        is_merging: bool,
        exchangeable: Vec<(usize, usize)>,
        rule: Arc<dyn DecisionRule>,
    ) -> Result<Self> {
        if !(2..=MAX_ELL).contains(&ell) {
            return Err(Error::invalid(format!("ell must be in 2..={MAX_ELL}, got {ell}")));
        }
        if exchangeable.iter().any(|&(i, j)| i >= ell || j >= ell || i == j) {
            return Err(Error::invalid("exchangeable pair out of range"));
        }
        let mut seen = [false; MAX_ELL];
        for &(i, j) in &exchangeable {
            if seen[i] || seen[j] {
                return Err(Error::invalid("exchangeable pairs must not share a position"));
            }
            seen[i] = true;
            seen[j] = true;
        }
        Ok(RuleSpec {
            name: name.into(),
            params: BTreeMap::new(),
            ell,
            threshold,
            is_achlioptas: false,
            is_merging,
            bounded_size: None,
            exchangeable,
            decision: Decision::Custom(rule),
        })
    }

    pub(crate) fn from_builtin(
        name: &str,
        params: BTreeMap<String, String>,
        kind: Builtin,
    ) -> Self {
        RuleSpec {
            name: name.to_string(),
            params,
            ell: kind.ell(),
            threshold: kind.threshold(),
            is_achlioptas: kind.is_achlioptas(),
            is_merging: true,
            bounded_size: kind.bound(),
            exchangeable: kind.exchangeable(),
            decision: Decision::Builtin(kind),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, String> {
        &self.params
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn g(&self, s: u64) -> u64 {
        self.threshold.apply(s)
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn is_achlioptas(&self) -> bool {
        self.is_achlioptas
    }

    pub fn is_merging(&self) -> bool {
        self.is_merging
    }

    pub fn bounded_size(&self) -> Option<u64> {
        self.bounded_size
    }

    pub fn exchangeable(&self) -> &[(usize, usize)] {
        &self.exchangeable
    }

    /// The built-in kind, if this is a catalogue rule.
    pub fn builtin_kind(&self) -> Option<&Builtin> {
        match &self.decision {
            Decision::Builtin(b) => Some(b),
            Decision::Custom(_) => None,
        }
    }

    /// Validated decision.
    pub fn decide(&self, sizes: &[ExtSize], partition: &Partition) -> Result<Choices> {
        if sizes.len() != self.ell {
            return Err(Error::Dimension {
                expected: self.ell,
                got: sizes.len(),
            });
        }
        partition.check_sizes(sizes)?;
        let choices = self.decide_unchecked(sizes, partition);
        debug_assert!(valid_choices(&choices, self.ell, partition));
        Ok(choices)
    }

    /// Decision without input validation, for the simulator's inner loop.
    #[inline]
    pub fn decide_unchecked(&self, sizes: &[ExtSize], partition: &Partition) -> Choices {
        match &self.decision {
            Decision::Builtin(b) => b.decide(sizes),
            Decision::Custom(rule) => rule.decide(sizes, partition),
        }
    }
}

/// Weights sum to one, pairs are in range, and a rule facing `ℓ` distinct
/// components adds at least one edge with positive probability.
pub fn valid_choices(choices: &[EdgeChoice], ell: usize, partition: &Partition) -> bool {
    let total: f64 = choices.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > 1e-12 || choices.iter().any(|c| !(0.0..=1.0).contains(&c.weight)) {
        return false;
    }
    let in_range = choices.iter().all(|c| {
        c.edges
            .iter()
            .all(|&(i, j)| i != j && (i as usize) < ell && (j as usize) < ell)
    });
    let nontrivial = !partition.all_distinct()
        || choices.iter().any(|c| c.weight > 0.0 && !c.edges.is_empty());
    in_range && nontrivial
}
