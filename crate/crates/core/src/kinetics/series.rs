use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GelMode, Integrator, KernelChoice, KineticsConfig};
use crate::error::{Error, Result};
use crate::io::{self, Row};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub kind: String,
    pub rule: String,
    pub params: BTreeMap<String, String>,
    pub k_max: usize,
    pub k_report: usize,
    pub gel_mode: GelMode,
    pub integrator: Integrator,
    pub kernel: KernelChoice,
    pub t_end: f64,
    pub version: String,
    pub steps: u64,
    pub rhs_evals: u64,
    /// Largest L1 correction applied by the positivity projection.
    pub max_projection: f64,
    /// Mass in sizes `K/2..=K` at each grid time.
    pub leakage: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl SeriesMeta {
    pub(crate) fn from_config(c: &KineticsConfig, kernel: KernelChoice) -> Self {
        SeriesMeta {
            kind: "ode".into(),
            rule: c.rule.name().to_string(),
            params: c.rule.params().clone(),
            k_max: c.k_max,
            k_report: c.k_report,
            gel_mode: c.gel_mode,
            integrator: c.integrator,
            kernel,
            t_end: c.t_end,
            version: env!("CARGO_PKG_VERSION").to_string(),
            steps: 0,
            rhs_evals: 0,
            max_projection: 0.0,
            leakage: Vec::new(),
            config: None,
        }
    }
}

/// A solved trajectory on its output grid.
#[derive(Clone, Debug)]
pub struct OdeSeries {
    pub meta: SeriesMeta,
    pub times: Vec<f64>,
    /// `ρ_1..ρ_{k_report}` at each time.
    pub rho: Vec<Vec<f64>>,
    /// `M(t) = Σ_{k≤K} ρ_k`.
    pub mass: Vec<f64>,
    pub gel: Vec<f64>,
    pub chi: Vec<f64>,
}

impl OdeSeries {
    pub(crate) fn empty(meta: SeriesMeta) -> Self {
        OdeSeries {
            meta,
            times: Vec::new(),
            rho: Vec::new(),
            mass: Vec::new(),
            gel: Vec::new(),
            chi: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, rho: Vec<f64>, mass: f64, gel: f64, chi: f64, leakage: f64) {
        self.times.push(t);
        self.rho.push(rho);
        self.mass.push(mass);
        self.gel.push(gel);
        self.chi.push(chi);
        self.meta.leakage.push(leakage);
    }

    /// Index of grid time `t` (to within `1e-9`).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    pub fn rho_at(&self, t: f64, k: usize) -> Option<f64> {
        let i = self.index_of(t)?;
        self.rho[i].get(k.checked_sub(1)?).copied()
    }

    pub fn to_rows(&self) -> Vec<Row> {
        let mut rows = Vec::with_capacity(self.times.len() * (self.meta.k_report + 3));
        for (i, &t) in self.times.iter().enumerate() {
            for (k, &v) in self.rho[i].iter().enumerate() {
                rows.push(Row::new(t, k as u64 + 1, v, "rhok"));
            }
            rows.push(Row::new(t, 0, self.mass[i], "mass"));
            rows.push(Row::new(t, 0, self.gel[i], "gel"));
            rows.push(Row::new(t, 0, self.chi[i], "chi"));
        }
        rows
    }

    pub fn from_rows(meta: SeriesMeta, rows: &[Row]) -> Result<Self> {
        let mut s = OdeSeries::empty(meta);
        let leakage = std::mem::take(&mut s.meta.leakage);
        for (t, group) in io::group_by_time(rows) {
            let mut rho = vec![0.0; s.meta.k_report];
            let (mut mass, mut gel, mut chi) = (f64::NAN, f64::NAN, f64::NAN);
            for r in group {
                match r.kind.as_str() {
                    "rhok" => {
                        if r.k == 0 || r.k as usize > s.meta.k_report {
                            return Err(Error::Format(format!(
                                "rhok row with k = {} outside 1..={}",
                                r.k, s.meta.k_report
                            )));
                        }
                        rho[r.k as usize - 1] = r.value;
                    }
                    "mass" => mass = r.value,
                    "gel" => gel = r.value,
                    "chi" => chi = r.value,
                    other => return Err(Error::Format(format!("unknown ode kind `{other}`"))),
                }
            }
            s.times.push(t);
            s.rho.push(rho);
            s.mass.push(mass);
            s.gel.push(gel);
            s.chi.push(chi);
        }
        s.meta.leakage = leakage;
        Ok(s)
    }

    pub fn write(&self, stem: &Path, force: bool) -> Result<()> {
        io::write_artifact(stem, &self.meta, &self.to_rows(), force)
    }

    pub fn read(stem: &Path) -> Result<Self> {
        let (meta, rows): (SeriesMeta, _) = io::read_artifact(stem)?;
        if meta.kind != "ode" {
            return Err(Error::Format(format!("{} is a `{}` artifact, not an ode series", stem.display(), meta.kind)));
        }
        Self::from_rows(meta, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::integrate;
    use crate::rules::builtin;

    #[test]
    fn rows_roundtrip_exactly() {
        let mut c = KineticsConfig::new(builtin("sum", &BTreeMap::new()).unwrap(), 30, 0.5);
        c.k_report = 10;
        c.grid = vec![0.0, 0.25, 0.5];
        let s = integrate(&c).unwrap();
        let back = OdeSeries::from_rows(s.meta.clone(), &s.to_rows()).unwrap();
        assert_eq!(back.times, s.times);
        assert_eq!(back.rho, s.rho);
        assert_eq!(back.mass, s.mass);
        assert_eq!(back.chi, s.chi);
        assert_eq!(back.meta, s.meta);
    }

    #[test]
    fn write_and_read() {
        let dir = std::env::temp_dir().join(format!("achlioptas-series-{}", std::process::id()));
        let stem = dir.join("er");
        let mut c = KineticsConfig::new(builtin("erdos_renyi", &BTreeMap::new()).unwrap(), 20, 0.2);
        c.grid = vec![0.1, 0.2];
        let s = integrate(&c).unwrap();
        s.write(&stem, false).unwrap();
        assert!(s.write(&stem, false).is_err());
        let back = OdeSeries::read(&stem).unwrap();
        assert_eq!(back.rho, s.rho);
        std::fs::remove_dir_all(dir).ok();
    }
}
