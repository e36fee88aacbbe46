use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{opt, table};
use crate::error::{Error, Result};
use crate::kinetics::{integrate_until, GelMode, Integrator, KineticsConfig};
use crate::process::uniform_grid;
use crate::rules::RuleSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GelationThresholds {
    /// Allowed mass loss (and twice the allowed leakage) below `t_lower`.
    pub delta_mass: f64,
    /// Gel-free mass defect that fixes `t_upper`.
    pub delta_gel: f64,
}

impl Default for GelationThresholds {
    fn default() -> Self {
        GelationThresholds {
            delta_mass: 1e-2,
            delta_gel: 1e-2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GelationConfig {
    pub rule: RuleSpec,
    pub k_max: usize,
    /// Last time examined.
    pub t_probe: f64,
    /// Spacing of the examined times.
    pub dt: f64,
    pub thresholds: GelationThresholds,
    pub integrator: Integrator,
    /// Also compute the window at `K/2`.
    pub sensitivity: bool,
}

impl GelationConfig {
    pub fn new(rule: RuleSpec, k_max: usize) -> Self {
        GelationConfig {
            rule,
            k_max,
            t_probe: 1.5,
            dt: 0.005,
            thresholds: GelationThresholds::default(),
            integrator: Integrator::default(),
            sensitivity: true,
        }
    }
}

/// Window bounds for one truncation order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowBounds {
    pub k_max: usize,
    /// Largest probed time up to which the full system kept its mass.
    pub t_lower: f64,
    /// Whether the full system kept its mass through `t_probe`.
    pub lower_open: bool,
    /// Leakage proxy at `t_lower`.
    pub leakage_at_lower: f64,
    /// First probed time at which the gel-free system lost `δ_gel`.
    pub t_upper: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GelationWindow {
    pub rule: String,
    pub params: BTreeMap<String, String>,
    pub thresholds: GelationThresholds,
    pub t_probe: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub k_max: usize,
    pub t_lower: f64,
    pub t_upper: Option<f64>,
    /// Only one side of the window was found on the probed interval.
    pub one_sided: bool,
    pub bounds: WindowBounds,
    /// The same window at `K/2`.
    pub sensitivity: Option<WindowBounds>,
    pub version: String,
}

impl GelationWindow {
    pub fn midpoint(&self) -> Option<f64> {
        self.t_upper.map(|u| 0.5 * (self.t_lower + u))
    }

    pub fn contains(&self, t: f64, slack: f64) -> bool {
        t >= self.t_lower - slack && self.t_upper.map_or(true, |u| t <= u + slack)
    }
}

/// Window bounds at truncation order `k_max`.
pub fn window_bounds(cfg: &GelationConfig, k_max: usize) -> Result<WindowBounds> {
    let th = cfg.thresholds;
    let mut kc = KineticsConfig::new(cfg.rule.clone(), k_max, cfg.t_probe);
    kc.grid = uniform_grid(cfg.t_probe, cfg.dt);
    kc.k_report = 1;
    kc.integrator = cfg.integrator;

    let holds = |mass: f64, leak: f64| mass >= 1.0 - th.delta_mass && leak < th.delta_mass / 2.0;
    let full = integrate_until(&kc, |s| !holds(s.mass(), s.leakage_proxy()))?;
    let good = full
        .mass
        .iter()
        .zip(&full.meta.leakage)
        .take_while(|(&m, &l)| holds(m, l))
        .count();
    let (t_lower, leakage_at_lower) = if good == 0 {
        (0.0, full.meta.leakage.first().copied().unwrap_or(0.0))
    } else {
        (full.times[good - 1], full.meta.leakage[good - 1])
    };
    let lower_open = good == kc.grid.len();

    kc.gel_mode = GelMode::NoGel;
    let free = integrate_until(&kc, |s| 1.0 - s.mass() > th.delta_gel)?;
    let t_upper = free
        .times
        .iter()
        .zip(&free.mass)
        .find(|(_, &m)| 1.0 - m > th.delta_gel)
        .map(|(&t, _)| t);
    Ok(WindowBounds {
        k_max,
        t_lower,
        lower_open,
        leakage_at_lower,
        t_upper,
    })
}

/// Bracket the gelation time: below `t_lower` the full system keeps its
/// mass, by `t_upper` the gel-free system has visibly lost mass.
pub fn gelation_window(cfg: &GelationConfig) -> Result<GelationWindow> {
    if !(cfg.dt > 0.0 && cfg.t_probe > 0.0 && cfg.dt <= cfg.t_probe) {
        return Err(Error::invalid("need 0 < dt ≤ t_probe"));
    }
    let th = cfg.thresholds;
    if !(th.delta_mass > 0.0 && th.delta_mass < 1.0 && th.delta_gel > 0.0 && th.delta_gel < 1.0) {
        return Err(Error::invalid("thresholds must lie in (0, 1)"));
    }
    let bounds = window_bounds(cfg, cfg.k_max)?;
    let sensitivity = if cfg.sensitivity && cfg.k_max >= 2 {
        Some(window_bounds(cfg, cfg.k_max / 2)?)
    } else {
        None
    };
    Ok(GelationWindow {
        rule: cfg.rule.name().to_string(),
        params: cfg.rule.params().clone(),
        thresholds: th,
        t_probe: cfg.t_probe,
        dt: cfg.dt,
        integrator: cfg.integrator,
        k_max: cfg.k_max,
        t_lower: bounds.t_lower,
        t_upper: bounds.t_upper,
        one_sided: bounds.t_upper.is_none() || bounds.lower_open,
        bounds,
        sensitivity,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

impl fmt::Display for GelationWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rule {}  probe [0, {}] step {}  delta_mass {}  delta_gel {}",
            self.rule, self.t_probe, self.dt, self.thresholds.delta_mass, self.thresholds.delta_gel
        )?;
        let row = |b: &WindowBounds| {
            vec![
                b.k_max.to_string(),
                format!("{:.4}{}", b.t_lower, if b.lower_open { "+" } else { "" }),
                format!("{:.2e}", b.leakage_at_lower),
                opt(b.t_upper),
            ]
        };
        let mut rows = vec![row(&self.bounds)];
        rows.extend(self.sensitivity.iter().map(row));
        f.write_str(&table(&["K", "t_lower", "leakage", "t_upper"], &rows))?;
        if self.one_sided {
            writeln!(f, "one-sided: the window did not close on the probed interval")?;
        }
        Ok(())
    }
}
