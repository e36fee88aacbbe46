use std::collections::BTreeMap;

use achlioptas::analysis::{gelation_window, GelationConfig};
use achlioptas::kinetics::{er_analytic, integrate, GelMode, Integrator, KineticsConfig, OdeSeries};
use achlioptas::rules::{builtin, RuleSpec};

fn rule(name: &str) -> RuleSpec {
    builtin(name, &BTreeMap::new()).unwrap()
}

fn solve(name: &str, k_max: usize, t_end: f64) -> OdeSeries {
    let mut kc = KineticsConfig::new(rule(name), k_max, t_end);
    kc.grid = vec![t_end];
    kc.k_report = 10;
    integrate(&kc).unwrap()
}

#[test]
fn truncation_error_shrinks_with_k() {
    // Past the ER gelation time the truncation matters; compare against a
    // large-K reference.
    let reference = solve("erdos_renyi", 1600, 0.6);
    let mut errors = Vec::new();
    for k in [200, 400, 800] {
        let s = solve("erdos_renyi", k, 0.6);
        let e = (0..10)
            .map(|i| (s.rho[0][i] - reference.rho[0][i]).abs())
            .fold(0.0, f64::max);
        errors.push(e);
    }
    // Allow a floor at the integrator tolerance.
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] || w[1] < 1e-7, "{errors:?}");
    }
    assert!(errors[2] < errors[0] || errors[0] < 1e-7, "{errors:?}");
}

#[test]
fn pre_gel_solution_matches_closed_form() {
    let s = solve("erdos_renyi", 400, 0.4);
    for k in 1..=10 {
        let exact = er_analytic(k as u64, 0.4);
        assert!((s.rho[0][k - 1] - exact).abs() < 1e-6, "k = {k}");
    }
    assert!((s.mass[0] - 1.0).abs() < 1e-6);
}

#[test]
fn fixed_step_is_reproducible() {
    let mut kc = KineticsConfig::new(rule("product"), 100, 1.0);
    kc.integrator = Integrator::Rk4 { h: 1e-3 };
    let a = integrate(&kc).unwrap();
    let b = integrate(&kc).unwrap();
    assert_eq!(a.rho, b.rho);
    assert_eq!(a.mass, b.mass);
}

#[test]
fn gel_free_mass_never_exceeds_full_mass_loss() {
    // Without sol–gel merges finite clusters are not absorbed, so the
    // finite mass stays at least that of the full system.
    for name in ["erdos_renyi", "bohman_frieze", "product"] {
        let mut kc = KineticsConfig::new(rule(name), 200, 1.2);
        let full = integrate(&kc).unwrap();
        kc.gel_mode = GelMode::NoGel;
        let free = integrate(&kc).unwrap();
        for (f, g) in free.mass.iter().zip(&full.mass) {
            assert!(f + 1e-7 >= *g, "{name}");
        }
    }
}

#[test]
fn windows_are_ordered_across_catalogue() {
    for k_max in [250, 500] {
        for name in ["erdos_renyi", "bohman_frieze", "product", "sum", "dcdgm", "adjacent_edge"] {
            let mut cfg = GelationConfig::new(rule(name), k_max);
            cfg.t_probe = 1.2;
            cfg.dt = 0.01;
            cfg.sensitivity = false;
            let w = gelation_window(&cfg).unwrap();
            let up = w.t_upper.expect(name);
            assert!(w.t_lower <= up, "{name} K = {k_max}: {w}");
            assert!(!w.one_sided, "{name}");
        }
    }
}
