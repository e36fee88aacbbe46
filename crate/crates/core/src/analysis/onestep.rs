use std::fmt;

use serde::Serialize;

use super::{opt, table};
use crate::error::{Error, Result};
use crate::kinetics::{rhs_generic, rhs_pair, GelMode, PairWorkspace, StateVector};
use crate::process::{conditional_drift, Census};
use crate::rules::RuleSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OneStepConfig {
    /// Components of size at least `γn` count as giant.
    pub gamma: f64,
    /// Sizes above `S` are lumped into the giant for the rate function.
    pub s_cut: u64,
}

impl Default for OneStepConfig {
    fn default() -> Self {
        OneStepConfig {
            gamma: 0.01,
            s_cut: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OneStepEntry {
    pub k: u64,
    /// `E(ΔN_k)` with sizes below `γn` exact and the large components as giant.
    pub y_drift: f64,
    /// The rate function on fractions truncated at `S`.
    pub f_k: f64,
    /// `|y_drift − f_k|`.
    pub residual: f64,
    /// Exact finite-`n` drift over the actual forest, when affordable.
    pub exact_drift: Option<f64>,
    /// `2ℓk(ℓ²S/n + 2ℓγ)`.
    pub budget: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OneStepReport {
    pub rule: String,
    pub n: u64,
    pub ell: usize,
    pub config: OneStepConfig,
    /// Components of size at least `γn`.
    pub large_components: u64,
    pub entries: Vec<OneStepEntry>,
}

fn fractions(census: &Census, upto: u64) -> Vec<f64> {
    let n = census.n() as f64;
    let mut rho = vec![0.0; upto as usize];
    for (s, c) in census.iter() {
        if s > upto {
            break;
        }
        rho[(s - 1) as usize] = (s * c) as f64 / n;
    }
    rho
}

fn rhs(rule: &RuleSpec, rho: Vec<f64>) -> Result<Vec<f64>> {
    let state = StateVector { rho, t: 0.0 };
    if rule.builtin_kind().is_some() {
        rhs_pair(rule, &state, GelMode::WithGel, &mut PairWorkspace::new())
    } else {
        rhs_generic(rule, &state, GelMode::WithGel)
    }
}

/// Compare the one-step drift of a census with the rate function evaluated
/// on its size fractions.
pub fn onestep_consistency(census: &Census, rule: &RuleSpec, ks: &[u64], cfg: &OneStepConfig) -> Result<OneStepReport> {
    let n = census.n();
    if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) || cfg.s_cut == 0 {
        return Err(Error::invalid("need 0 < gamma ≤ 1 and S ≥ 1"));
    }
    let limit = ((cfg.gamma * n as f64).ceil() as u64).max(1);
    let large = census.components_at_least(limit);
    let ell = rule.ell();
    if large > ell as u64 - 1 {
        return Err(Error::invalid(format!(
            "{large} components of size ≥ {limit}; at most {} allowed",
            ell - 1
        )));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k >= limit || k > cfg.s_cut) {
        return Err(Error::invalid(format!("k = {k} must be in 1..min(γn, S + 1)")));
    }
    let y = rhs(rule, fractions(census, limit.saturating_sub(1).max(1)))?;
    let f = rhs(rule, fractions(census, cfg.s_cut))?;
    let nf = n as f64;
    let l = ell as f64;
    let mut entries = Vec::new();
    for &k in ks {
        let exact = match conditional_drift(census, rule, k) {
            Ok(d) => Some(d),
            Err(Error::Resource(_)) => None,
            Err(e) => return Err(e),
        };
        let y_drift = y[(k - 1) as usize];
        let f_k = f[(k - 1) as usize];
        entries.push(OneStepEntry {
            k,
            y_drift,
            f_k,
            residual: (y_drift - f_k).abs(),
            exact_drift: exact,
            budget: 2.0 * l * k as f64 * (l * l * cfg.s_cut as f64 / nf + 2.0 * l * cfg.gamma),
        });
    }
    Ok(OneStepReport {
        rule: rule.name().to_string(),
        n,
        ell,
        config: *cfg,
        large_components: large,
        entries,
    })
}

impl fmt::Display for OneStepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rule {}  n = {}  gamma = {}  S = {}  large components {}",
            self.rule, self.n, self.config.gamma, self.config.s_cut, self.large_components
        )?;
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.k.to_string(),
                    format!("{:.6}", e.y_drift),
                    format!("{:.6}", e.f_k),
                    format!("{:.2e}", e.residual),
                    opt(e.exact_drift),
                    format!("{:.3}", e.budget),
                ]
            })
            .collect();
        f.write_str(&table(&["k", "drift_Y", "f_k", "residual", "exact", "budget"], &rows))
    }
}
