//! Cross-checks between the process and the rate equations.
//!
//! - [`compare`]: empirical `N_k/n` against `ρ_k(t)`, and `L₁/n` against `1 − M(t)`.
//! - [`gelation_window`]: brackets the gelation time from the two ODE systems.
//! - [`empirical_gelation`]: first time the median `L₁/n` reaches `ε`, per `n`.
//! - [`martingale_diagnostic`]: windowed deviations of the compensated `N_k`.
//! - [`onestep_consistency`]: exact one-step drift against the rate function.
//! - [`unique_giant`]: how often more than one component exceeds `ηn`.
//!
//! Every report serializes to JSON and prints as an aligned text table.

mod compare;
mod empirical;
mod gelation;
mod giant;
mod martingale;
mod onestep;

pub use compare::{compare, DeviationEntry, DeviationReport, GiantDeviation};
pub use empirical::{empirical_gelation, EmpiricalConfig, EmpiricalGelation, LadderPoint};
pub use gelation::{gelation_window, window_bounds, GelationConfig, GelationThresholds, GelationWindow, WindowBounds};
pub use giant::{tail_event, unique_giant, GiantViolation, TailReport, UniqueGiantReport};
pub use martingale::{martingale_diagnostic, max_window_deviation, MartingaleDiagnostic, RunDiagnostic};
pub use onestep::{onestep_consistency, OneStepConfig, OneStepEntry, OneStepReport};

/// Left-aligned first column, right-aligned rest.
pub(crate) fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = width[i])
                } else {
                    format!("{c:>w$}", w = width[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(headers.to_vec());
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub(crate) fn opt(t: Option<f64>) -> String {
    t.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}
