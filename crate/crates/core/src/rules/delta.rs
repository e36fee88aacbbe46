use smallvec::SmallVec;

use super::{EdgeChoice, ExtSize, Partition, RuleSpec, MAX_ELL};
use crate::error::{Error, Result};

/// Merge groups induced by a set of edges: for each group of at least two
/// blocks, its total size and the sizes of its member blocks.
fn merge_groups(
    sizes: &[ExtSize],
    partition: &Partition,
    choice: &EdgeChoice,
    mut visit: impl FnMut(ExtSize, &[ExtSize]),
) {
    let nb = partition.block_count();
    let mut parent: [u8; MAX_ELL] = [0, 1, 2, 3, 4, 5, 6, 7];
    fn root(parent: &mut [u8; MAX_ELL], mut x: u8) -> u8 {
        while parent[x as usize] != x {
            x = parent[x as usize];
        }
        x
    }
    for &(i, j) in &choice.edges {
        let a = root(&mut parent, partition.block_of(i as usize) as u8);
        let b = root(&mut parent, partition.block_of(j as usize) as u8);
        if a != b {
            parent[a.max(b) as usize] = a.min(b);
        }
    }
    let mut block_size: SmallVec<[ExtSize; MAX_ELL]> = SmallVec::from_elem(ExtSize::Giant, nb);
    for (i, &s) in sizes.iter().enumerate() {
        block_size[partition.block_of(i)] = s;
    }
    for r in 0..nb as u8 {
        if root(&mut parent, r) != r {
            continue;
        }
        let members: SmallVec<[ExtSize; MAX_ELL]> = (0..nb as u8)
            .filter(|&b| root(&mut parent, b) == r)
            .map(|b| block_size[b as usize])
            .collect();
        if members.len() < 2 {
            continue;
        }
        let total = members.iter().fold(ExtSize::Finite(0), |acc, &s| acc.add(s));
        visit(total, &members);
    }
}

/// Change in the number of vertices in size-`k` components when the edges
/// of `choice` are added between the sampled components.
pub fn merge_delta(k: u64, sizes: &[ExtSize], partition: &Partition, choice: &EdgeChoice) -> f64 {
    let mut delta: i64 = 0;
    let target = ExtSize::Finite(k);
    merge_groups(sizes, partition, choice, |total, members| {
        if total == target {
            delta += k as i64;
        }
        delta -= k as i64 * members.iter().filter(|&&s| s == target).count() as i64;
    });
    delta as f64
}

/// Expected change of `N_k` given the sampled sizes and the actual
/// partition, averaged over the rule's choice distribution.
pub fn expected_delta_in(
    rule: &RuleSpec,
    k: u64,
    sizes: &[ExtSize],
    partition: &Partition,
) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let choices = rule.decide(sizes, partition)?;
    Ok(choices
        .iter()
        .map(|c| c.weight * merge_delta(k, sizes, partition, c))
        .sum())
}

/// The kernel `d_k(c_1, …, c_ℓ)`: expected change of `N_k` with finite
/// entries in distinct components and all giant entries in one component.
///
/// ```
/// use achlioptas::rules::{builtin, expected_delta, ExtSize};
/// let er = builtin("erdos_renyi", &Default::default()).unwrap();
/// let d = expected_delta(&er, 3, &[ExtSize::Finite(3), ExtSize::Finite(3)]).unwrap();
/// assert_eq!(d, -6.0);
/// ```
pub fn expected_delta(rule: &RuleSpec, k: u64, sizes: &[ExtSize]) -> Result<f64> {
    expected_delta_in(rule, k, sizes, &Partition::limit_convention(sizes))
}

/// Adds `scale · E[ΔN_k]` to `out[k-1]` for every `k ≤ out.len()` at once.
/// Mass merged into sizes beyond `out.len()` leaves the window silently.
pub fn accumulate_deltas(
    rule: &RuleSpec,
    sizes: &[ExtSize],
    partition: &Partition,
    scale: f64,
    out: &mut [f64],
) {
    let kmax = out.len() as u64;
    for choice in rule.decide_unchecked(sizes, partition) {
        let w = scale * choice.weight;
        if w == 0.0 {
            continue;
        }
        merge_groups(sizes, partition, &choice, |total, members| {
            if let ExtSize::Finite(t) = total {
                if t <= kmax {
                    out[(t - 1) as usize] += w * t as f64;
                }
            }
            for &m in members {
                if let ExtSize::Finite(s) = m {
                    if s <= kmax {
                        out[(s - 1) as usize] -= w * s as f64;
                    }
                }
            }
        });
    }
}
