use std::collections::BTreeMap;

use achlioptas::kinetics::{rhs_generic, rhs_pair, GelMode, PairWorkspace, StateVector};
use achlioptas::rules::{builtin, expected_delta, ExtSize, RuleSpec};
use proptest::prelude::*;

const RULES: [&str; 6] = ["erdos_renyi", "bohman_frieze", "product", "sum", "dcdgm", "adjacent_edge"];

fn rule(name: &str) -> RuleSpec {
    builtin(name, &BTreeMap::new()).unwrap()
}

fn ext(s: u64) -> ExtSize {
    if s == 0 {
        ExtSize::Giant
    } else {
        ExtSize::Finite(s)
    }
}

/// Weights over `1..=K`, rescaled to total mass `mass`.
fn state(raw: &[f64], mass: f64) -> StateVector {
    let total: f64 = raw.iter().sum::<f64>().max(1e-300);
    StateVector {
        rho: raw.iter().map(|r| r / total * mass).collect(),
        t: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// One step moves at most `ℓ` vertices in or out of size `k`, each
    /// carrying `k`.
    #[test]
    fn delta_is_bounded(r in 0..RULES.len(), k in 1u64..12, sizes in prop::collection::vec(0u64..14, 4)) {
        let rule = rule(RULES[r]);
        let sizes: Vec<ExtSize> = sizes[..rule.ell()].iter().map(|&s| ext(s)).collect();
        let d = expected_delta(&rule, k, &sizes).unwrap();
        prop_assert!(d.abs() <= (rule.ell() as u64 * k) as f64 + 1e-12, "{d}");
    }

    #[test]
    fn rate_is_bounded(
        r in 0..RULES.len(),
        raw in prop::collection::vec(0.0f64..1.0, 1..24),
        mass in 0.0f64..=1.0,
        gel in any::<bool>(),
    ) {
        let rule = rule(RULES[r]);
        let s = state(&raw, mass);
        let mode = if gel { GelMode::WithGel } else { GelMode::NoGel };
        let f = rhs_pair(&rule, &s, mode, &mut PairWorkspace::new()).unwrap();
        for (i, v) in f.iter().enumerate() {
            prop_assert!(v.abs() <= (rule.ell() * (i + 1)) as f64 + 1e-12);
        }
    }

    /// With no gel and support below `K/2`, merges stay inside `[K]`, so
    /// no mass is lost.
    #[test]
    fn no_gel_conserves_mass(r in 0..RULES.len(), raw in prop::collection::vec(0.0f64..1.0, 1..10)) {
        let rule = rule(RULES[r]);
        let mut s = state(&raw, 1.0);
        s.rho.resize(2 * raw.len(), 0.0);
        for mode in [GelMode::NoGel, GelMode::WithGel] {
            let flux: f64 = rhs_pair(&rule, &s, mode, &mut PairWorkspace::new()).unwrap().iter().sum();
            prop_assert!(flux.abs() < 1e-12, "{flux}");
        }
    }

    #[test]
    fn pair_matches_enumeration(
        r in 0..RULES.len(),
        raw in prop::collection::vec(0.0f64..1.0, 1..7),
        mass in 0.0f64..=1.0,
    ) {
        let rule = rule(RULES[r]);
        let s = state(&raw, mass);
        for mode in [GelMode::NoGel, GelMode::WithGel] {
            let a = rhs_pair(&rule, &s, mode, &mut PairWorkspace::new()).unwrap();
            let b = rhs_generic(&rule, &s, mode).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-13);
            }
        }
    }

    /// The gel-free system differs from the full one only through
    /// sol–gel merges, which can only remove finite mass.
    #[test]
    fn sol_gel_merges_remove_mass(r in 0..RULES.len(), raw in prop::collection::vec(0.0f64..1.0, 2..12), mass in 0.1f64..0.9) {
        let rule = rule(RULES[r]);
        let s = state(&raw, mass);
        let mut ws = PairWorkspace::new();
        let with: f64 = rhs_pair(&rule, &s, GelMode::WithGel, &mut ws).unwrap().iter().sum();
        let without: f64 = rhs_pair(&rule, &s, GelMode::NoGel, &mut ws).unwrap().iter().sum();
        prop_assert!(with <= 1e-12 && without <= 1e-12);
        if RULES[r] == "erdos_renyi" {
            prop_assert!(with <= without + 1e-12);
        }
    }
}

#[test]
fn every_builtin_is_merging() {
    for name in RULES {
        assert!(rule(name).is_merging(), "{name}");
    }
}
