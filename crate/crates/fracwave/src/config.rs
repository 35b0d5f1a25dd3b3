//! Run configuration: one TOML file, fully parsed and validated before any
//! compute starts; unknown keys are rejected.

use crate::expr::{Expr, ExprError};
use crate::forward::{ProblemSpec, SeparableSource, Source};
use crate::fracops::{TimeGrid, TimeSeries};
use crate::spatial::{Coefficients, MeshField, Side, SpatialError, SpatialMesh};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("key '{key}': {source}")]
    Expression { key: &'static str, source: ExprError },
    #[error("key '{key}': {message}")]
    Invalid { key: &'static str, message: String },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub task: TaskConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    #[serde(default)]
    pub x_left: f64,
    #[serde(default = "one")]
    pub x_right: f64,
    pub n_interior: usize,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub t_end: f64,
    /// a(x); must stay at or above `ellipticity_bound`
    pub diffusion: String,
    #[serde(default = "zero_expr")]
    pub advection: String,
    #[serde(default = "zero_expr")]
    pub reaction: String,
    #[serde(default = "one")]
    pub ellipticity_bound: f64,
    #[serde(default = "zero_expr")]
    pub init_pos: String,
    #[serde(default = "zero_expr")]
    pub init_vel: String,
    /// spatial factor f(x) of the separable source; empty string disables
    #[serde(default)]
    pub source_f: String,
    /// time factor g(t)
    #[serde(default)]
    pub source_g: String,
    /// g(0), supplied exactly rather than read off the grid
    pub source_g0: Option<f64>,
    /// g'(t), optional exact derivative
    #[serde(default)]
    pub source_g_prime: String,
    #[serde(default = "right_side")]
    pub observe: Vec<Side>,
    pub n_modes: Option<usize>,
}

fn one() -> f64 {
    1.0
}
fn zero_expr() -> String {
    "0".to_string()
}
fn right_side() -> Vec<Side> {
    vec![Side::Right]
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    /// RNG seed for anything stochastic (noise draws)
    pub seed: Option<u64>,
    pub lambda_reg: Option<f64>,
    /// sweep grid for the regularization parameter
    pub lambda_grid: Option<Vec<f64>>,
    pub noise_level: Option<f64>,
    pub method: Option<crate::inverse::ReconstructionMethod>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    /// probe dictionary size for adjoint sweeps
    pub probe_count: Option<usize>,
    pub probe_side: Option<Side>,
    /// Laplace abscissae and horizon
    pub s_values: Option<Vec<f64>>,
    pub t_long: Option<f64>,
    /// implicit-Euler refinement of the parabolic companion
    pub parabolic_divisor: Option<usize>,
    /// path to the measurement CSV (t,side,flux)
    pub data: Option<String>,
}

impl RunConfig {
    pub fn from_path(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.problem.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.task.seed.unwrap_or(42)
    }
}

impl ProblemConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(ConfigError::Invalid {
                key: "problem.alpha",
                message: format!("{} outside (1, 2)", self.alpha),
            });
        }
        if self.x_right <= self.x_left {
            return Err(ConfigError::Invalid {
                key: "problem.x_right",
                message: "domain is empty".into(),
            });
        }
        if self.n_interior < 2 || self.n_steps < 2 {
            return Err(ConfigError::Invalid {
                key: "problem.n_interior",
                message: "grids need at least two cells".into(),
            });
        }
        if self.t_end <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "problem.t_end",
                message: "horizon must be positive".into(),
            });
        }
        if !self.source_g.is_empty() && self.source_g0.is_none() {
            return Err(ConfigError::Invalid {
                key: "problem.source_g0",
                message: "a separable source needs its exact g(0)".into(),
            });
        }
        if self.observe.is_empty() {
            return Err(ConfigError::Invalid {
                key: "problem.observe",
                message: "at least one observed side".into(),
            });
        }
        Ok(())
    }

    fn expr(&self, key: &'static str, text: &str, var: &str) -> Result<Expr, ConfigError> {
        Expr::parse(text, var).map_err(|source| ConfigError::Expression { key, source })
    }

    /// Assemble grids, coefficients, data and source into a solver-ready
    /// problem. All expressions are parsed and sampled here.
    pub fn build(&self) -> Result<ProblemSpec, ConfigError> {
        let mesh = SpatialMesh::new(self.x_left, self.x_right, self.n_interior);
        let grid = TimeGrid::new(self.t_end, self.n_steps);
        let a = self.expr("problem.diffusion", &self.diffusion, "x")?;
        let b = self.expr("problem.advection", &self.advection, "x")?;
        let c = self.expr("problem.reaction", &self.reaction, "x")?;
        let coeff = Coefficients::from_fns(
            &mesh,
            |x| a.eval(x),
            |x| b.eval(x),
            |x| c.eval(x),
            self.ellipticity_bound,
        )?;
        let init_pos_expr = self.expr("problem.init_pos", &self.init_pos, "x")?;
        let init_vel_expr = self.expr("problem.init_vel", &self.init_vel, "x")?;
        let source = if self.source_f.is_empty() && self.source_g.is_empty() {
            Source::None
        } else {
            let f_expr = self.expr("problem.source_f", &self.source_f, "x")?;
            let g_expr = self.expr("problem.source_g", &self.source_g, "t")?;
            let g_prime = if self.source_g_prime.is_empty() {
                None
            } else {
                let gp = self.expr("problem.source_g_prime", &self.source_g_prime, "t")?;
                Some(TimeSeries::sample(grid, |t| gp.eval(t)))
            };
            Source::Separable(SeparableSource {
                f: MeshField::sample(mesh, |x| f_expr.eval(x)),
                g: TimeSeries::sample(grid, |t| g_expr.eval(t)),
                g0: self.source_g0.expect("validated"),
                g_prime,
            })
        };
        Ok(ProblemSpec {
            alpha: self.alpha,
            mesh,
            coeff,
            grid,
            init_pos: MeshField::sample(mesh, |x| init_pos_expr.eval(x)),
            init_vel: MeshField::sample(mesh, |x| init_vel_expr.eval(x)),
            source,
            observe: self.observe.clone(),
            n_modes: self.n_modes,
        })
    }
}
