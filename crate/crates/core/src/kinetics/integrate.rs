use serde::{Deserialize, Serialize};

use super::series::{OdeSeries, SeriesMeta};
use super::{
    has_pair_kernel, ode_susceptibility, rhs_er_closed, rhs_generic, rhs_pair, GelMode, PairWorkspace,
    StateVector,
};
use crate::error::{Error, Result};
use crate::rules::{Builtin, RuleSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { h: f64 },
    /// Dormand–Prince 5(4) with per-component error control.
    Rk45 { atol: f64, rtol: f64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Rk45 {
            atol: 1e-9,
            rtol: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    /// Pair kernel for built-in rules, enumeration otherwise.
    #[default]
    Auto,
    Generic,
    Pair,
    /// Erdős–Rényi convolution form (with gel only).
    ErClosed,
}

impl std::str::FromStr for KernelChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(KernelChoice::Auto),
            "generic" => Ok(KernelChoice::Generic),
            "pair" => Ok(KernelChoice::Pair),
            "er_closed" => Ok(KernelChoice::ErClosed),
            other => Err(Error::invalid(format!("unknown kernel `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KineticsConfig {
    pub rule: RuleSpec,
    /// Truncation order `K`.
    pub k_max: usize,
    pub gel_mode: GelMode,
    pub integrator: Integrator,
    pub t_end: f64,
    /// Output times, ascending, within `[0, t_end]`.
    pub grid: Vec<f64>,
    /// Sizes `1..=k_report` are kept in the output.
    pub k_report: usize,
    pub kernel: KernelChoice,
}

impl KineticsConfig {
    /// Defaults: with gel, adaptive integrator, a grid of step 0.01.
    pub fn new(rule: RuleSpec, k_max: usize, t_end: f64) -> Self {
        KineticsConfig {
            rule,
            k_max,
            gel_mode: GelMode::WithGel,
            integrator: Integrator::default(),
            t_end,
            grid: crate::process::uniform_grid(t_end, 0.01),
            k_report: k_max.min(50),
            kernel: KernelChoice::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::invalid("truncation order K must be at least 1"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("output grid is empty"));
        }
        if self.grid.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::invalid("output grid must be strictly increasing"));
        }
        if self.grid[0] < 0.0 || *self.grid.last().unwrap() > self.t_end * (1.0 + 1e-12) {
            return Err(Error::invalid("output grid must lie within [0, t_end]"));
        }
        if self.k_report == 0 || self.k_report > self.k_max {
            return Err(Error::invalid(format!("k_report must be in 1..={}", self.k_max)));
        }
        match self.integrator {
            Integrator::Rk4 { h } if !(h > 0.0 && h.is_finite()) => {
                return Err(Error::invalid(format!("step h must be positive, got {h}")));
            }
            Integrator::Rk45 { atol, rtol } if !(atol > 0.0 && rtol > 0.0) => {
                return Err(Error::invalid("tolerances must be positive"));
            }
            _ => {}
        }
        match self.kernel {
            KernelChoice::Pair if !has_pair_kernel(&self.rule) => {
                Err(Error::invalid(format!("rule `{}` has no pair kernel", self.rule.name())))
            }
            KernelChoice::ErClosed
                if self.rule.builtin_kind() != Some(&Builtin::ErdosRenyi) || self.gel_mode != GelMode::WithGel =>
            {
                Err(Error::invalid("the closed kernel covers erdos_renyi with gel only"))
            }
            _ => Ok(()),
        }
    }

    fn resolved_kernel(&self) -> KernelChoice {
        match self.kernel {
            KernelChoice::Auto if has_pair_kernel(&self.rule) => KernelChoice::Pair,
            KernelChoice::Auto => KernelChoice::Generic,
            k => k,
        }
    }
}

/// The right-hand side with its scratch space.
struct Rhs<'a> {
    rule: &'a RuleSpec,
    mode: GelMode,
    kernel: KernelChoice,
    ws: PairWorkspace,
    evals: u64,
}

impl Rhs<'_> {
    fn eval(&mut self, s: &StateVector) -> Result<Vec<f64>> {
        self.evals += 1;
        match self.kernel {
            KernelChoice::Pair => rhs_pair(self.rule, s, self.mode, &mut self.ws),
            KernelChoice::ErClosed => Ok(rhs_er_closed(s)),
            _ => rhs_generic(self.rule, s, self.mode),
        }
    }
}

fn axpy(y: &[f64], terms: &[(f64, &[f64])], h: f64) -> Vec<f64> {
    let mut out = y.to_vec();
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        let hc = h * c;
        for (o, v) in out.iter_mut().zip(k) {
            *o += hc * v;
        }
    }
    out
}

struct Stepper {
    state: StateVector,
    deriv: Option<Vec<f64>>,
    h: f64,
    steps: u64,
    max_projection: f64,
}

const MIN_STEP: f64 = 1e-13;

impl Stepper {
    fn finish_step(&mut self, rho: Vec<f64>, t: f64, fsal: Option<Vec<f64>>) -> Result<()> {
        if rho.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                last_good_t: self.state.t,
                reason: "non-finite value in state".into(),
            });
        }
        self.state.rho = rho;
        self.state.t = t;
        let moved = self.state.project();
        self.max_projection = self.max_projection.max(moved);
        self.deriv = if moved == 0.0 { fsal } else { None };
        self.steps += 1;
        Ok(())
    }

    fn rk4(&mut self, f: &mut Rhs, h: f64) -> Result<()> {
        let y = &self.state.rho;
        let t = self.state.t;
        let k1 = match self.deriv.take() {
            Some(d) => d,
            None => f.eval(&self.state)?,
        };
        let at = |rho: Vec<f64>| StateVector { rho, t };
        let k2 = f.eval(&at(axpy(y, &[(0.5, &k1)], h)))?;
        let k3 = f.eval(&at(axpy(y, &[(0.5, &k2)], h)))?;
        let k4 = f.eval(&at(axpy(y, &[(1.0, &k3)], h)))?;
        let next = axpy(y, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)], h);
        self.finish_step(next, t + h, None)
    }

    /// One attempted Dormand–Prince step of size `h`; returns whether it was
    /// accepted and the suggested next step.
    fn dopri(&mut self, f: &mut Rhs, h: f64, atol: f64, rtol: f64) -> Result<(bool, f64)> {
        const A2: [f64; 1] = [1.0 / 5.0];
        const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
        const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
        const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
        const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
        const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
        // Fifth- minus fourth-order weights.
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let t = self.state.t;
        let y = self.state.rho.clone();
        let k1 = match self.deriv.take() {
            Some(d) => d,
            None => f.eval(&self.state)?,
        };
        let at = |rho: Vec<f64>| StateVector { rho, t };
        let k2 = f.eval(&at(axpy(&y, &[(A2[0], &k1)], h)))?;
        let k3 = f.eval(&at(axpy(&y, &[(A3[0], &k1), (A3[1], &k2)], h)))?;
        let k4 = f.eval(&at(axpy(&y, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)], h)))?;
        let k5 = f.eval(&at(axpy(&y, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)], h)))?;
        let k6 = f.eval(&at(axpy(
            &y,
            &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)],
            h,
        )))?;
        let next = axpy(
            &y,
            &[(B[0], &k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)],
            h,
        );
        let k7 = f.eval(&at(next.clone()))?;
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let e = h
                * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
            let scale = atol + rtol * y[i].abs().max(next[i].abs());
            err = err.max(e.abs() / scale);
        }
        if !err.is_finite() {
            self.deriv = Some(k1);
            return Ok((false, h * 0.2));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            self.finish_step(next, t + h, Some(k7))?;
            Ok((true, h * factor))
        } else {
            self.deriv = Some(k1);
            Ok((false, h * factor.min(1.0)))
        }
    }

    fn advance_to(&mut self, f: &mut Rhs, target: f64, method: Integrator) -> Result<()> {
        while self.state.t < target {
            let left = target - self.state.t;
            if left <= 1e-14 * target.max(1.0) {
                self.state.t = target;
                break;
            }
            match method {
                Integrator::Rk4 { h } => {
                    let step = if h >= left * (1.0 - 1e-12) { left } else { h };
                    self.rk4(f, step)?;
                    if step == left {
                        self.state.t = target;
                    }
                }
                Integrator::Rk45 { atol, rtol } => {
                    let step = self.h.min(left);
                    if step < MIN_STEP {
                        return Err(Error::Integration {
                            last_good_t: self.state.t,
                            reason: format!("step size underflow (h = {step:e})"),
                        });
                    }
                    let (accepted, suggested) = self.dopri(f, step, atol, rtol)?;
                    if accepted && step == left {
                        self.state.t = target;
                    }
                    // A step shortened to hit the grid says little about the
                    // next one; keep the larger of the two.
                    self.h = if accepted && step < self.h { self.h.max(suggested) } else { suggested };
                }
            }
        }
        Ok(())
    }
}

/// Integrate from `ρ_1 = 1` and record the state at every grid time.
pub fn integrate(config: &KineticsConfig) -> Result<OdeSeries> {
    integrate_until(config, |_| false)
}

/// As [`integrate`], but stops after the first grid point at which `stop`
/// returns true; the series then ends at that point.
pub fn integrate_until(config: &KineticsConfig, mut stop: impl FnMut(&StateVector) -> bool) -> Result<OdeSeries> {
    config.validate()?;
    let kernel = config.resolved_kernel();
    let mut f = Rhs {
        rule: &config.rule,
        mode: config.gel_mode,
        kernel,
        ws: PairWorkspace::new(),
        evals: 0,
    };
    let mut st = Stepper {
        state: StateVector::initial(config.k_max),
        deriv: None,
        h: 1e-4,
        steps: 0,
        max_projection: 0.0,
    };
    // Fail fast on an infeasible kernel before any stepping.
    st.deriv = Some(f.eval(&st.state)?);
    let mut series = OdeSeries::empty(SeriesMeta::from_config(config, kernel));
    for &t in &config.grid {
        st.advance_to(&mut f, t, config.integrator)?;
        let s = &st.state;
        series.push(
            t,
            s.rho[..config.k_report].to_vec(),
            s.mass(),
            s.gel(),
            ode_susceptibility(s),
            s.leakage_proxy(),
        );
        if stop(s) {
            break;
        }
    }
    series.meta.steps = st.steps;
    series.meta.rhs_evals = f.evals;
    series.meta.max_projection = st.max_projection;
    Ok(series)
}
