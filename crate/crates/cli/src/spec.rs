use std::path::Path;

use anyhow::{bail, Context, Result};
use cxbox::directions::DirectionSet;
use cxbox::multivariate::DegreeVector;
use cxbox::spectral::FrequencyGrid;
use serde::Deserialize;

/// A scalar applied to every axis, or one value per axis.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    fn expand(&self, d: usize) -> Result<Vec<T>> {
        match self {
            PerAxis::All(v) => Ok(vec![*v; d]),
            PerAxis::Each(v) if v.len() == d => Ok(v.clone()),
            PerAxis::Each(v) => bail!(SpecError(format!("expected {d} per-axis values, found {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub omega_max: PerAxis<f64>,
    pub bins: PerAxis<usize>,
    #[serde(default)]
    pub tail_budget: Option<f64>,
    #[serde(default)]
    pub alias_copies: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Function {
    #[default]
    BoxSpline,
    TruncatedPower,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default = "default_range")]
    pub omega_range: (f64, f64),
}

fn default_rays() -> usize {
    2
}

fn default_range() -> (f64, f64) {
    (1e2, 1e4)
}

impl Default for DecaySpec {
    fn default() -> Self {
        Self { rays: default_rays(), omega_range: default_range() }
    }
}

/// Problem description read from `--spec`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub degrees: DegreeVector,
    pub directions: DirectionSet,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub function: Function,
    #[serde(default)]
    pub decay: DecaySpec,
}

/// Marks an input that fails validation (exit code 2).
#[derive(Debug)]
pub struct SpecError(pub String);

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

impl ProblemSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
        let spec: ProblemSpec = serde_json::from_str(&text).map_err(|e| SpecError(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let n = self.directions.n_plus_1();
        if self.degrees.len() != n {
            bail!(SpecError(format!("{} degrees for {n} direction columns", self.degrees.len())));
        }
        let d = self.directions.d();
        if let Some(o) = &self.origin {
            if o.len() != d || o.iter().any(|x| !x.is_finite()) {
                bail!(SpecError(format!("origin must hold {d} finite values")));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 1.0) {
                bail!(SpecError(format!("eps must lie in (0, 1), got {eps}")));
            }
        }
        if let Some(g) = &self.grid {
            self.frequency_grid_of(g)?;
            if let Some(b) = g.tail_budget {
                if !(b > 0.0) {
                    bail!(SpecError(format!("tail_budget must be positive, got {b}")));
                }
            }
        }
        let (lo, hi) = self.decay.omega_range;
        if !(lo > 0.0 && hi >= 2.0 * lo) {
            bail!(SpecError("decay.omega_range must satisfy 0 < lo and hi >= 2 lo".into()));
        }
        Ok(())
    }

    fn frequency_grid_of(&self, g: &GridSpec) -> Result<FrequencyGrid> {
        let d = self.directions.d();
        FrequencyGrid::new(g.omega_max.expand(d)?, g.bins.expand(d)?).map_err(|e| SpecError(e.to_string()).into())
    }

    pub fn grid(&self) -> Result<(FrequencyGrid, &GridSpec)> {
        let g = self.grid.as_ref().ok_or_else(|| SpecError("this command needs a \"grid\" entry".into()))?;
        Ok((self.frequency_grid_of(g)?, g))
    }
}
