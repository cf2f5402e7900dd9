//! JSON run configurations for the surface commands.

use serde::Deserialize;

use bhe_core::solver::SolverConfig;
use bhe_core::toric::{SphereProfile, MIN_GRID};

use crate::error::CliError;

/// One surface factor.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FactorConfig {
    /// Sphere of half-length `c`; the initial profile is round.
    Sphere { c: f64 },
    /// Flat torus of half-length `c` with constant `Θ = theta`.
    FlatTorus {
        c: f64,
        #[serde(default = "one")]
        theta: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_grid() -> usize {
    SolverConfig::default().grid
}

fn default_tolerance() -> f64 {
    SolverConfig::default().tolerance
}

fn default_grids() -> Vec<usize> {
    vec![64, 128, 256]
}

/// Optional overrides of the Gauss-Newton settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub max_iterations: Option<usize>,
    pub backtrack: Option<f64>,
    pub min_step: Option<f64>,
    pub fd_step: Option<f64>,
}

/// Surface specification shared by `pde solve`, `pde residual` and `converge`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub factors: [FactorConfig; 2],
    /// Class datum `a` of the anti-self-dual form.
    #[serde(default)]
    pub a: f64,
    /// Intervals per factor.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Amplitude `ε` of the sphere perturbation `ε(c² - z²)² sin z`.
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default)]
    pub solver: SolverOverrides,
    /// Grids of a refinement study.
    #[serde(default = "default_grids")]
    pub grids: Vec<usize>,
}

impl SurfaceConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for f in &self.factors {
            let (c, theta) = match *f {
                FactorConfig::Sphere { c } => (c, 1.0),
                FactorConfig::FlatTorus { c, theta } => (c, theta),
            };
            if !(c > 0.0 && c.is_finite() && theta > 0.0 && theta.is_finite()) {
                return bad(format!("factor sizes must be positive, got c = {c}, theta = {theta}"));
            }
        }
        if !self.a.is_finite() || !self.perturbation.is_finite() {
            return bad("a and perturbation must be finite".into());
        }
        if self.grids.is_empty() || self.grids.iter().chain([&self.grid]).any(|n| *n < MIN_GRID) {
            return bad(format!("grid sizes must be at least {MIN_GRID}"));
        }
        self.solver_config().validate()?;
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            max_iterations: self.solver.max_iterations.unwrap_or(d.max_iterations),
            tolerance: self.tolerance,
            backtrack: self.solver.backtrack.unwrap_or(d.backtrack),
            min_step: self.solver.min_step.unwrap_or(d.min_step),
            fd_step: self.solver.fd_step.unwrap_or(d.fd_step),
            grid: self.grid,
        }
    }

    /// Factor profiles on `n` intervals, spheres perturbed by `ε(c² - z²)² sin z`.
    pub fn profiles(&self, n: usize) -> Result<(SphereProfile, SphereProfile), CliError> {
        let eps = self.perturbation;
        let build = |f: &FactorConfig| -> Result<SphereProfile, CliError> {
            Ok(match *f {
                FactorConfig::Sphere { c } if eps == 0.0 => SphereProfile::round(c, n)?,
                FactorConfig::Sphere { c } => {
                    SphereProfile::from_fn(c, n, |z| (c * c - z * z) / c + eps * (c * c - z * z).powi(2) * z.sin())?
                }
                FactorConfig::FlatTorus { c, theta } => SphereProfile::flat_torus(c, n, theta)?,
            })
        };
        Ok((build(&self.factors[0])?, build(&self.factors[1])?))
    }
}
