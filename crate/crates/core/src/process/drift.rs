//! Exact one-step conditional drift `E(ΔN_k | current graph)`, averaging
//! over the `ℓ` iid uniform vertex draws, including draws that land in the
//! same component.

use smallvec::SmallVec;

use super::Census;
use crate::error::{Error, Result};
use crate::rules::{merge_delta, Builtin, ExtSize, Partition, RuleSpec, MAX_ELL};

/// Upper limit on `(partition, size tuple)` evaluations for the generic path.
pub const GENERIC_DRIFT_BUDGET: u64 = 20_000_000;

/// `E(ΔN_k | graph)` for one step of `rule` from the graph described by
/// `census`. Uses a closed form for Erdős–Rényi and exact enumeration
/// over coincidence patterns and size tuples otherwise.
pub fn conditional_drift(census: &Census, rule: &RuleSpec, k: u64) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    match rule.builtin_kind() {
        Some(Builtin::ErdosRenyi) => Ok(er_drift(census, k)),
        _ => conditional_drift_generic(census, rule, k),
    }
}

/// Closed form for two iid vertices joined unconditionally:
/// `k Σ_{a+b=k} p_a p_b − [k even] k p_{k/2} (k/2)/n − 2k p_k (1 − k/n)`,
/// with `p_s = N_s/n`.
pub fn er_drift(census: &Census, k: u64) -> f64 {
    let n = census.n() as f64;
    let p = |s: u64| census.vertices_in(s) as f64 / n;
    let kf = k as f64;
    let mut gain = 0.0;
    for a in 1..k {
        gain += p(a) * p(k - a);
    }
    let mut drift = kf * gain - 2.0 * kf * p(k) * (1.0 - kf / n);
    if k % 2 == 0 {
        let h = k / 2;
        drift -= kf * p(h) * (h as f64) / n;
    }
    drift
}

/// Set partitions of `0..ell` as restricted growth strings.
pub(crate) fn set_partitions(ell: usize) -> Vec<SmallVec<[u8; MAX_ELL]>> {
    let mut out = Vec::new();
    let mut cur: SmallVec<[u8; MAX_ELL]> = SmallVec::new();
    fn rec(ell: usize, cur: &mut SmallVec<[u8; MAX_ELL]>, out: &mut Vec<SmallVec<[u8; MAX_ELL]>>) {
        if cur.len() == ell {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().copied().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            cur.push(b);
            rec(ell, cur, out);
            cur.pop();
        }
    }
    rec(ell, &mut cur, &mut out);
    out
}

/// Generic exact drift; errors when the enumeration would exceed
/// [`GENERIC_DRIFT_BUDGET`].
pub fn conditional_drift_generic(census: &Census, rule: &RuleSpec, k: u64) -> Result<f64> {
    let ell = rule.ell();
    let classes: Vec<(u64, u64)> = census.iter().collect();
    let d = classes.len() as u64;
    let partitions = set_partitions(ell);
    let work: u64 = partitions
        .iter()
        .map(|p| {
            let r = p.iter().copied().max().unwrap() as u32 + 1;
            d.saturating_pow(r)
        })
        .fold(0u64, |a, b| a.saturating_add(b));
    if work > GENERIC_DRIFT_BUDGET {
        return Err(Error::Resource(format!(
            "exact drift needs {work} evaluations for {d} distinct sizes and ell = {ell}; \
             only the erdos_renyi closed form is available at this scale"
        )));
    }
    let n = census.n() as f64;
    let mut total = 0.0;
    for labels in &partitions {
        let r = labels.iter().copied().max().unwrap() as usize + 1;
        let mut block_len: SmallVec<[i32; MAX_ELL]> = SmallVec::from_elem(0, r);
        for &b in labels {
            block_len[b as usize] += 1;
        }
        let partition = Partition::from_labels(labels);
        let mut pick: SmallVec<[usize; MAX_ELL]> = SmallVec::from_elem(0, r);
        'tuples: loop {
            // Ordered choices of distinct components with the picked sizes.
            let mut weight = 1.0;
            for b in 0..r {
                let (s, count) = classes[pick[b]];
                let earlier = pick[..b].iter().filter(|&&q| q == pick[b]).count() as u64;
                if earlier >= count {
                    weight = 0.0;
                    break;
                }
                weight *= (count - earlier) as f64 * (s as f64 / n).powi(block_len[b]);
            }
            if weight > 0.0 {
                let sizes: SmallVec<[ExtSize; MAX_ELL]> = labels
                    .iter()
                    .map(|&b| ExtSize::Finite(classes[pick[b as usize]].0))
                    .collect();
                let expected: f64 = rule
                    .decide_unchecked(&sizes, &partition)
                    .iter()
                    .map(|c| c.weight * merge_delta(k, &sizes, &partition, c))
                    .sum();
                total += weight * expected;
            }
            for b in (0..r).rev() {
                pick[b] += 1;
                if pick[b] < classes.len() {
                    continue 'tuples;
                }
                pick[b] = 0;
            }
            break;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::DisjointSetForest;
    use crate::rules::builtin;
    use std::collections::BTreeMap;

    /// Brute force over all `n^ℓ` vertex tuples of a concrete forest.
    fn brute_force(forest: &mut DisjointSetForest, rule: &RuleSpec, k: u64) -> f64 {
        let n = forest.len() as u64;
        let ell = rule.ell();
        let mut total = 0.0;
        let tuples = n.pow(ell as u32);
        for code in 0..tuples {
            let mut c = code;
            let mut roots: SmallVec<[u32; MAX_ELL]> = SmallVec::new();
            for _ in 0..ell {
                roots.push(forest.find((c % n) as u32));
                c /= n;
            }
            let sizes: SmallVec<[ExtSize; MAX_ELL]> =
                roots.iter().map(|&r| ExtSize::Finite(forest.root_size(r))).collect();
            let partition = Partition::from_labels(&roots);
            let e: f64 = rule
                .decide(&sizes, &partition)
                .unwrap()
                .iter()
                .map(|ch| ch.weight * merge_delta(k, &sizes, &partition, ch))
                .sum();
            total += e;
        }
        total / tuples as f64
    }

    fn sample_forest() -> (DisjointSetForest, Census) {
        // Components {0,1,2}, {3,4}, {5,6}, {7}, {8}
        let mut f = DisjointSetForest::new(9).unwrap();
        let mut census = Census::new(9);
        for (a, b) in [(0, 1), (1, 2), (3, 4), (5, 6)] {
            let (ra, rb) = (f.find(a), f.find(b));
            census.merge(f.root_size(ra), f.root_size(rb));
            f.union_roots(ra, rb);
        }
        (f, census)
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(set_partitions(2).len(), 2);
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(set_partitions(4).len(), 15);
    }

    #[test]
    fn er_closed_form_matches_brute_force() {
        let (mut f, census) = sample_forest();
        let er = builtin("erdos_renyi", &BTreeMap::new()).unwrap();
        for k in 1..=6 {
            let bf = brute_force(&mut f, &er, k);
            assert!((er_drift(&census, k) - bf).abs() < 1e-12, "k={k}");
            let g = conditional_drift_generic(&census, &er, k).unwrap();
            assert!((g - bf).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn generic_matches_brute_force_for_four_vertex_rules() {
        let (mut f, census) = sample_forest();
        for name in ["product", "sum", "bohman_frieze", "dcdgm", "adjacent_edge"] {
            let rule = builtin(name, &BTreeMap::new()).unwrap();
            for k in [1, 2, 3, 5] {
                let bf = brute_force(&mut f, &rule, k);
                let g = conditional_drift_generic(&census, &rule, k).unwrap();
                assert!((g - bf).abs() < 1e-12, "{name} k={k}: {g} vs {bf}");
            }
        }
    }

    #[test]
    fn isolated_start_er_k1() {
        let census = Census::new(100);
        // −2 N₁(n−1)/n²
        assert!((er_drift(&census, 1) + 2.0 * 99.0 / 100.0).abs() < 1e-15);
    }
}
