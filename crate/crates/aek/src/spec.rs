//! JSON surface specifications.

use std::collections::BTreeMap;
use std::path::Path;

use aek_core::evolute::{RegularityOptions, RootOptions, TraceOptions};
use aek_core::frames::{Height, Patch};
use aek_core::{Jet2, Mode, Scalar, SurfaceModel};
use serde::Deserialize;

use crate::CliError;

/// A coefficient: a JSON number or a `"p/q"` / decimal string.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Coefficient {
    Number(serde_json::Number),
    Text(String),
}

impl Coefficient {
    /// Numbers are read from their shortest decimal form, so `0.1` is
    /// exactly `1/10` in rational mode.
    pub fn to_scalar(&self, mode: Mode) -> Result<Scalar, CliError> {
        let text = match self {
            Coefficient::Number(n) => n.to_string(),
            Coefficient::Text(t) => t.clone(),
        };
        Scalar::parse(mode, &text).map_err(|e| CliError::Usage(format!("coefficient {text:?}: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Default for PatchSpec {
    fn default() -> Self {
        PatchSpec {
            u: [-0.5, 0.5],
            v: [-0.5, 0.5],
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub center: [Coefficient; 3],
    pub radius: Coefficient,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub match_threshold: f64,
    pub fd_step: f64,
    pub residual: f64,
    pub multiplicity: f64,
    pub zero: f64,
    pub solve: f64,
    pub pick: f64,
    pub mu: f64,
    pub check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let roots = RootOptions::default();
        let reg = RegularityOptions::default();
        let trace = TraceOptions::default();
        Tolerances {
            match_threshold: trace.match_threshold,
            fd_step: reg.fd_step,
            residual: roots.residual_tol,
            multiplicity: roots.multiplicity_tol,
            zero: roots.zero_tol,
            solve: trace.solve_tol,
            pick: reg.pick_tol,
            mu: reg.mu_tol,
            check: 1e-12,
        }
    }
}

fn default_grid() -> usize {
    41
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    /// `"i,j"` → coefficient of `u^i v^j` in `z = φ(u, v)`.
    #[serde(default)]
    pub coefficients: BTreeMap<String, Coefficient>,
    /// Lower cap of a sphere instead of a polynomial.
    #[serde(default)]
    pub sphere: Option<SphereSpec>,
    #[serde(default)]
    pub patch: PatchSpec,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Skip the load-time convexity check.
    #[serde(default)]
    pub allow_nonconvex: bool,
}

impl SurfaceSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn mode(&self, flag: Option<Mode>) -> Result<Mode, CliError> {
        if let Some(m) = flag {
            return Ok(m);
        }
        match &self.mode {
            None => Ok(Mode::Rational),
            Some(s) => s.parse().map_err(|_| CliError::Usage(format!("unknown mode {s:?}"))),
        }
    }

    pub fn patch(&self) -> Result<Patch, CliError> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(self.patch.u) || !ok(self.patch.v) {
            return Err(CliError::Usage("patch bounds must be finite with min < max".into()));
        }
        Ok(Patch::new((self.patch.u[0], self.patch.u[1]), (self.patch.v[0], self.patch.v[1])))
    }

    pub fn height(&self, mode: Mode) -> Result<Height, CliError> {
        match (&self.sphere, self.coefficients.is_empty()) {
            (Some(_), false) => Err(CliError::Usage("give either coefficients or sphere, not both".into())),
            (None, true) => Err(CliError::Usage("spec has no coefficients".into())),
            (Some(s), true) => Ok(Height::SphereCap {
                center: [
                    s.center[0].to_scalar(mode)?,
                    s.center[1].to_scalar(mode)?,
                    s.center[2].to_scalar(mode)?,
                ],
                radius: s.radius.to_scalar(mode)?,
            }),
            (None, false) => {
                let mut terms = Vec::with_capacity(self.coefficients.len());
                for (key, c) in &self.coefficients {
                    terms.push((parse_exponent(key)?, c.to_scalar(mode)?));
                }
                let degree = terms.iter().map(|(e, _)| (e[0] + e[1]) as usize).max().unwrap_or(2).max(2);
                let jet = Jet2::from_terms(degree, mode, terms).map_err(|e| CliError::Usage(e.to_string()))?;
                Ok(Height::Polynomial(jet))
            }
        }
    }

    pub fn surface(&self, mode: Mode) -> Result<SurfaceModel, CliError> {
        let height = self.height(mode)?;
        let patch = self.patch()?;
        if self.allow_nonconvex {
            Ok(SurfaceModel::new_unchecked(height, patch))
        } else {
            SurfaceModel::new(height, patch).map_err(|e| CliError::Geometry(format!("surface: {e}")))
        }
    }

    pub fn root_options(&self) -> RootOptions {
        RootOptions {
            residual_tol: self.tolerances.residual,
            multiplicity_tol: self.tolerances.multiplicity,
            zero_tol: self.tolerances.zero,
        }
    }

    pub fn trace_options(&self, grid: Option<usize>, regularity: bool) -> TraceOptions {
        let n = grid.unwrap_or(self.grid);
        TraceOptions {
            nu: n,
            nv: n,
            match_threshold: self.tolerances.match_threshold,
            roots: self.root_options(),
            solve_tol: self.tolerances.solve,
            regularity: regularity.then_some(RegularityOptions {
                fd_step: self.tolerances.fd_step,
                pick_tol: self.tolerances.pick,
                mu_tol: self.tolerances.mu,
            }),
        }
    }
}

fn parse_exponent(key: &str) -> Result<[u8; 2], CliError> {
    let bad = || CliError::Usage(format!("coefficient key {key:?} is not \"i,j\""));
    let (i, j) = key.split_once(',').ok_or_else(bad)?;
    Ok([i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?])
}
