use smallvec::SmallVec;

use super::{GelMode, StateVector};
use crate::error::{Error, Result};
use crate::rules::{accumulate_deltas, ExtSize, Partition, RuleSpec, MAX_ELL};

/// Largest number of canonical tuples [`rhs_generic`] will enumerate.
pub const GENERIC_TUPLE_BUDGET: u128 = 20_000_000;

/// Number of canonical tuples over `classes` size classes: an exchangeable
/// pair contributes `c(c+1)/2`, every other position `c`.
pub fn generic_tuple_count(ell: usize, exchangeable: &[(usize, usize)], classes: usize) -> u128 {
    let c = classes as u128;
    let paired = 2 * exchangeable.len();
    let free = ell.saturating_sub(paired) as u32;
    (c * (c + 1) / 2).pow(exchangeable.len() as u32) * c.pow(free)
}

/// `ρ_k' = Σ_c d_k(c) Π_j w(c_j)` by enumeration over `([K] ∪ {giant})^ℓ`.
///
/// Tuples related by a swap of an exchangeable pair share a kernel value,
/// so only tuples with `c_i ≤ c_j` on each such pair are visited and the
/// strict ones count twice. Tuples with zero weight are pruned.
pub fn rhs_generic(rule: &RuleSpec, state: &StateVector, mode: GelMode) -> Result<Vec<f64>> {
    let k = state.order();
    let ell = rule.ell();
    let classes = match mode {
        GelMode::WithGel => k + 1,
        GelMode::NoGel => k,
    };
    let count = generic_tuple_count(ell, rule.exchangeable(), classes);
    if count > GENERIC_TUPLE_BUDGET {
        return Err(Error::Resource(format!(
            "generic kernel needs {count} tuples for ell = {ell}, K = {k} (budget {GENERIC_TUPLE_BUDGET}); \
             use the pair kernel of a built-in rule or lower K"
        )));
    }
    let w = state.weights(mode);
    let mut partner: [Option<usize>; MAX_ELL] = [None; MAX_ELL];
    for &(i, j) in rule.exchangeable() {
        partner[i.max(j)] = Some(i.min(j));
    }
    let mut walk = Walk {
        rule,
        w: &w,
        classes,
        k,
        partner,
        idx: SmallVec::from_elem(0, ell),
        out: vec![0.0; k],
    };
    walk.visit(0, 1.0);
    Ok(walk.out)
}

struct Walk<'a> {
    rule: &'a RuleSpec,
    w: &'a [f64],
    classes: usize,
    k: usize,
    partner: [Option<usize>; MAX_ELL],
    idx: SmallVec<[usize; MAX_ELL]>,
    out: Vec<f64>,
}

impl Walk<'_> {
    fn visit(&mut self, pos: usize, weight: f64) {
        if pos == self.idx.len() {
            let sizes: SmallVec<[ExtSize; MAX_ELL]> = self
                .idx
                .iter()
                .map(|&c| if c == self.k { ExtSize::Giant } else { ExtSize::Finite(c as u64 + 1) })
                .collect();
            let partition = Partition::limit_convention(&sizes);
            accumulate_deltas(self.rule, &sizes, &partition, weight, &mut self.out);
            return;
        }
        let lo = self.partner[pos].map_or(0, |p| self.idx[p]);
        for c in lo..self.classes {
            let wc = self.w[c];
            if wc == 0.0 {
                continue;
            }
            let mult = if self.partner[pos].is_some() && c > lo { 2.0 } else { 1.0 };
            self.idx[pos] = c;
            self.visit(pos + 1, weight * wc * mult);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::rhs_er_closed;
    use crate::rules::{builtin, Choices, DecisionRule, EdgeChoice, Threshold};
    use smallvec::smallvec;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn rule(name: &str) -> RuleSpec {
        builtin(name, &BTreeMap::new()).unwrap()
    }

    fn sample_state(k: usize) -> StateVector {
        let raw: Vec<f64> = (1..=k).map(|i| 1.0 / (i * i) as f64).collect();
        let s: f64 = raw.iter().sum();
        StateVector::new(raw.iter().map(|v| 0.9 * v / s).collect()).unwrap()
    }

    #[test]
    fn er_initial_condition() {
        let d = rhs_generic(&rule("erdos_renyi"), &StateVector::initial(4), GelMode::WithGel).unwrap();
        assert_eq!(d, vec![-2.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn er_matches_closed_form_with_gel() {
        let s = sample_state(12);
        let a = rhs_generic(&rule("erdos_renyi"), &s, GelMode::WithGel).unwrap();
        let b = rhs_er_closed(&s);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14, "{x} vs {y}");
        }
    }

    #[test]
    fn er_without_gel_loses_sol_gel_term() {
        let s = sample_state(12);
        let a = rhs_generic(&rule("erdos_renyi"), &s, GelMode::NoGel).unwrap();
        let b = rhs_er_closed(&s);
        let m = s.mass();
        for (i, (x, y)) in a.iter().zip(&b).enumerate() {
            let k = (i + 1) as f64;
            // Difference is the −2kρ_kρ_∞ sol–gel loss.
            let expect = y + 2.0 * k * s.rho[i] * (1.0 - m);
            assert!((x - expect).abs() < 1e-14);
        }
    }

    #[derive(Debug)]
    struct Asymmetric;
    impl DecisionRule for Asymmetric {
        fn decide(&self, s: &[ExtSize], _: &Partition) -> Choices {
            if s[0] < s[1] {
                smallvec![EdgeChoice::single(0, 2)]
            } else {
                smallvec![EdgeChoice::single(1, 2)]
            }
        }
    }

    #[test]
    fn reduction_agrees_with_full_enumeration() {
        // The same symmetric rule with and without the declared reduction.
        let s = sample_state(7);
        for name in ["product", "sum", "dcdgm", "bohman_frieze", "adjacent_edge"] {
            let r = rule(name);
            let kind = r.builtin_kind().unwrap().clone();
            let plain = RuleSpec::custom(name, r.ell(), r.threshold(), true, vec![], Arc::new(BuiltinAsCustom(kind))).unwrap();
            for mode in [GelMode::WithGel, GelMode::NoGel] {
                let a = rhs_generic(&r, &s, mode).unwrap();
                let b = rhs_generic(&plain, &s, mode).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-13, "{name}: {x} vs {y}");
                }
            }
        }
        // An asymmetric rule declared without pairs still conserves nothing
        // in particular but must run.
        let r = RuleSpec::custom("asym", 3, Threshold::Identity, true, vec![], Arc::new(Asymmetric)).unwrap();
        rhs_generic(&r, &s, GelMode::WithGel).unwrap();
    }

    #[derive(Debug)]
    struct BuiltinAsCustom(crate::rules::Builtin);
    impl DecisionRule for BuiltinAsCustom {
        fn decide(&self, s: &[ExtSize], _: &Partition) -> Choices {
            self.0.decide(s)
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = StateVector::initial(1000);
        let err = rhs_generic(&rule("product"), &s, GelMode::WithGel).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert_eq!(generic_tuple_count(4, &[(0, 1), (2, 3)], 3), 36);
        assert_eq!(generic_tuple_count(3, &[(1, 2)], 3), 18);
    }

    #[test]
    fn overlapping_pairs_rejected() {
        let r = RuleSpec::custom("x", 3, Threshold::Identity, true, vec![(0, 1), (1, 2)], Arc::new(Asymmetric));
        assert!(r.is_err());
    }
}
