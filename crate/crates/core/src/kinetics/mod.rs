//! Truncated rate equations for the size fractions `ρ_k(t)`.
//!
//! The state keeps `ρ_1..ρ_K`; everything else, `ρ_∞ = 1 − Σ_{k≤K} ρ_k`,
//! plays the part of the giant component. In [`GelMode::WithGel`] the
//! giant takes part in the sampled tuples with weight `ρ_∞`; in
//! [`GelMode::NoGel`] every tuple touching the giant is dropped.
//!
//! Right-hand sides:
//! - [`rhs_generic`] enumerates tuples and works for any rule;
//! - [`rhs_pair`] uses an `O(K²)` pair distribution for each built-in rule;
//! - [`rhs_er_closed`] is the classical coagulation form for Erdős–Rényi.

mod closed;
mod generic;
mod integrate;
mod pair;
mod series;

use serde::{Deserialize, Serialize};

pub use closed::{er_analytic, er_analytic_derivative, ln_factorial, rhs_er_closed};
pub use generic::{generic_tuple_count, rhs_generic, GENERIC_TUPLE_BUDGET};
pub use integrate::{integrate, integrate_until, Integrator, KernelChoice, KineticsConfig};
pub use pair::{rhs_pair, PairWorkspace};
pub use series::{OdeSeries, SeriesMeta};

use crate::error::{Error, Result};
use crate::rules::RuleSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GelMode {
    /// Sol–gel interaction included: giant entries have weight `ρ_∞`.
    WithGel,
    /// Tuples containing a giant entry contribute nothing.
    NoGel,
}

impl std::str::FromStr for GelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with" | "with_gel" => Ok(GelMode::WithGel),
            "no" | "none" | "no_gel" | "without" => Ok(GelMode::NoGel),
            other => Err(Error::invalid(format!("gel mode must be `with` or `no`, got `{other}`"))),
        }
    }
}

/// `ρ_1..ρ_K` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub rho: Vec<f64>,
    pub t: f64,
}

impl StateVector {
    /// `ρ_1 = 1`, all else zero.
    pub fn initial(k: usize) -> Self {
        let mut rho = vec![0.0; k];
        rho[0] = 1.0;
        StateVector { rho, t: 0.0 }
    }

    pub fn new(rho: Vec<f64>) -> Result<Self> {
        let s = StateVector { rho, t: 0.0 };
        s.validate()?;
        Ok(s)
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.rho.len()
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum()
    }

    /// `ρ_∞ = 1 − Σ_{k≤K} ρ_k`, never negative.
    pub fn gel(&self) -> f64 {
        (1.0 - self.mass()).max(0.0)
    }

    /// Mass in sizes `K/2..=K`; large values mean the truncation is biting.
    pub fn leakage_proxy(&self) -> f64 {
        let k = self.rho.len();
        let from = (k / 2).max(1);
        self.rho[from - 1..].iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.is_empty() {
            return Err(Error::invalid("truncation order K must be at least 1"));
        }
        const SLACK: f64 = 1e-12;
        if let Some((i, v)) = self
            .rho
            .iter()
            .enumerate()
            .find(|(_, v)| !(-SLACK..=1.0 + SLACK).contains(*v))
        {
            return Err(Error::invalid(format!("rho_{} = {v} outside [0, 1]", i + 1)));
        }
        let m = self.mass();
        if m > 1.0 + SLACK {
            return Err(Error::invalid(format!("total mass {m} exceeds 1")));
        }
        Ok(())
    }

    /// Clip negatives and rescale if the mass exceeds one; returns the
    /// largest change made to any single entry.
    pub fn project(&mut self) -> f64 {
        let mut moved: f64 = 0.0;
        for v in self.rho.iter_mut() {
            if *v < 0.0 {
                moved = moved.max(-*v);
                *v = 0.0;
            }
        }
        let m = self.mass();
        if m > 1.0 {
            let scale = 1.0 / m;
            for v in self.rho.iter_mut() {
                let before = *v;
                *v *= scale;
                moved = moved.max(before - *v);
            }
        }
        moved
    }

    /// Weights over `[K] ∪ {giant}` (giant last).
    pub fn weights(&self, mode: GelMode) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.rho.len() + 1);
        w.extend_from_slice(&self.rho);
        w.push(match mode {
            GelMode::WithGel => self.gel(),
            GelMode::NoGel => 0.0,
        });
        w
    }
}

/// `χ = Σ_{k≤K} k·ρ_k`.
///
/// ```
/// use achlioptas::kinetics::{ode_susceptibility, StateVector};
/// assert_eq!(ode_susceptibility(&StateVector::initial(10)), 1.0);
/// ```
pub fn ode_susceptibility(state: &StateVector) -> f64 {
    state
        .rho
        .iter()
        .enumerate()
        .map(|(i, &r)| (i + 1) as f64 * r)
        .sum()
}

/// Whether [`rhs_pair`] covers this rule.
pub fn has_pair_kernel(rule: &RuleSpec) -> bool {
    rule.builtin_kind().is_some()
}
