//! Reconstruction of the spatial source factor from boundary flux data: the
//! linear source-to-flux map (dense or matrix-free), Tikhonov-regularized
//! least squares by normal equations or CGLS, the flux deconvolution that
//! carries the uniqueness argument, and the stability-ratio experiment.

use crate::adjoint::{adjoint_state, AdjointError};
use crate::forward::{measure_flux, ForwardError, FluxTrace, ProblemSpec, Propagator, Source};
use crate::fracops::{
    differentiate, rl_integral, FracopsError, TimeGrid, TimeSeries,
};
use crate::linalg::{cholesky_solve, jacobi_eigen, LinalgError};
use crate::spatial::{MeshField, Side};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("forward-map template must have zero initial data")]
    TemplateData,
    #[error("forward-map template needs a separable source (the known g)")]
    TemplateSource,
    #[error("data grid {0:?} does not match the template grid {1:?}")]
    GridMismatch(TimeGrid, TimeGrid),
    #[error("data observes different sides than the template")]
    SideMismatch,
    #[error("|g(0)| = {0:.3e} is too small to deconvolve")]
    GZeroVanishes(f64),
    #[error("dense matrix required for the normal-equations method")]
    NeedDense,
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Adjoint(#[from] AdjointError),
    #[error(transparent)]
    Fracops(#[from] FracopsError),
    #[error(transparent)]
    Spatial(#[from] crate::spatial::SpatialError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The linear map f -> conormal flux trace, for a fixed separable-in-time
/// source g, fixed coefficients and grids, zero initial data.
pub struct ForwardMap {
    pub prop: Propagator,
    pub g: TimeSeries,
    pub g0: f64,
    pub observe: Vec<Side>,
    /// dense rows indexed (side-major, then time node); column j is the
    /// response to the unit hat at interior node j
    dense: Option<Vec<Vec<f64>>>,
}

impl ForwardMap {
    /// Wrap the template; `dense` assembles the full matrix column by
    /// column (parallel over columns).
    pub fn assemble(template: &ProblemSpec, dense: bool) -> Result<Self, InverseError> {
        if template.init_pos.values.iter().any(|v| *v != 0.0)
            || template.init_vel.values.iter().any(|v| *v != 0.0)
        {
            return Err(InverseError::TemplateData);
        }
        let (g, g0) = match &template.source {
            Source::Separable(s) => (s.g.clone(), s.g0),
            _ => return Err(InverseError::TemplateSource),
        };
        let prop = Propagator::new(template)?;
        let mut map = Self {
            prop,
            g,
            g0,
            observe: template.observe.clone(),
            dense: None,
        };
        if dense {
            let n = map.prop.mesh.n_interior;
            let cols: Result<Vec<Vec<f64>>, InverseError> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let mut hat = MeshField::zeros(map.prop.mesh);
                    hat.values[j] = 1.0;
                    let trace = map.apply_matrix_free(&hat)?;
                    Ok(stack_trace(&trace))
                })
                .collect();
            let cols = cols?;
            let rows = cols[0].len();
            let mut mat = vec![vec![0.0f64; n]; rows];
            for (j, col) in cols.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    mat[r][j] = *v;
                }
            }
            map.dense = Some(mat);
        }
        Ok(map)
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn data_len(&self) -> usize {
        self.observe.len() * self.prop.grid.n_nodes()
    }

    fn apply_matrix_free(&self, f: &MeshField) -> Result<FluxTrace, InverseError> {
        let zero = MeshField::zeros(self.prop.mesh);
        let src = Source::separable(f.clone(), self.g.clone(), self.g0);
        let u = self.prop.solve_general(&zero, &zero, &src)?;
        Ok(measure_flux(&u, &self.prop.coeff, &self.observe)?)
    }

    /// K f: from the dense matrix when assembled, one solve otherwise.
    pub fn apply(&self, f: &MeshField) -> Result<FluxTrace, InverseError> {
        match &self.dense {
            Some(mat) => {
                let vals: Vec<f64> = mat
                    .iter()
                    .map(|row| row.iter().zip(&f.values).map(|(a, b)| a * b).sum())
                    .collect();
                Ok(self.unstack(&vals))
            }
            None => self.apply_matrix_free(f),
        }
    }

    /// K* psi in the h-weighted sense: one adjoint solve per observed side,
    /// paired with g in time.
    pub fn apply_adjoint(&self, data: &FluxTrace) -> Result<MeshField, InverseError> {
        self.check_data(data)?;
        let mut out = MeshField::zeros(self.prop.mesh);
        for (side, vals) in &data.traces {
            let psi = TimeSeries::new(self.prop.grid, vals.clone());
            let v = adjoint_state(&self.prop, *side, &psi)?;
            let dt = self.prop.grid.dt();
            let nt = self.prop.grid.n_nodes();
            for m in 0..nt {
                let w = if m == 0 || m == nt - 1 { 0.5 } else { 1.0 };
                let scale = w * dt * self.g.values[m];
                for (o, vi) in out.values.iter_mut().zip(v.interior(m)) {
                    *o += scale * vi;
                }
            }
        }
        Ok(out)
    }

    /// Dense transpose route for K*, with the data and h weights in place;
    /// used as the exact adjoint inside the dense solvers.
    pub fn apply_transpose_weighted(&self, data: &FluxTrace) -> Result<Vec<f64>, InverseError> {
        let mat = self.dense.as_ref().ok_or(InverseError::NeedDense)?;
        self.check_data(data)?;
        let d = stack_trace(data);
        let tau = self.data_weights();
        let n = self.prop.mesh.n_interior;
        let h = self.prop.mesh.h();
        let mut out = vec![0.0f64; n];
        for (r, row) in mat.iter().enumerate() {
            let w = tau[r] * d[r] / h;
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        Ok(out)
    }

    fn unstack(&self, vals: &[f64]) -> FluxTrace {
        let nt = self.prop.grid.n_nodes();
        FluxTrace {
            grid: self.prop.grid,
            traces: self
                .observe
                .iter()
                .enumerate()
                .map(|(s, side)| (*side, vals[s * nt..(s + 1) * nt].to_vec()))
                .collect(),
        }
    }

    /// Trapezoid dt weights for the stacked data vector.
    fn data_weights(&self) -> Vec<f64> {
        let nt = self.prop.grid.n_nodes();
        let dt = self.prop.grid.dt();
        let mut w = Vec::with_capacity(self.data_len());
        for _ in &self.observe {
            for m in 0..nt {
                w.push(if m == 0 || m == nt - 1 { 0.5 * dt } else { dt });
            }
        }
        w
    }

    pub fn check_data(&self, data: &FluxTrace) -> Result<(), InverseError> {
        if data.grid != self.prop.grid {
            return Err(InverseError::GridMismatch(data.grid, self.prop.grid));
        }
        if data.traces.len() != self.observe.len()
            || data
                .traces
                .iter()
                .zip(&self.observe)
                .any(|((s, _), o)| s != o)
        {
            return Err(InverseError::SideMismatch);
        }
        Ok(())
    }
}

fn stack_trace(trace: &FluxTrace) -> Vec<f64> {
    trace
        .traces
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionMethod {
    NormalEquations,
    Cgls,
}

/// Outcome of one regularized reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub f_hat: MeshField,
    pub lambda_reg: f64,
    pub iterations: usize,
    /// ||K f - d||_data at the returned iterate
    pub data_residual: f64,
    /// ||f||_h
    pub solution_norm: f64,
    /// objective ||Kf-d||^2 + lambda ||f||^2 per CGLS iteration
    pub objective_history: Vec<f64>,
    /// set when the normal matrix was singular and a spectral cutoff
    /// produced the smallest-norm solution
    pub rank_deficient: bool,
    pub relative_error: Option<f64>,
}

/// Minimize ||K f - data||^2_data + lambda ||f||^2_h.
pub fn reconstruct(
    map: &ForwardMap,
    data: &FluxTrace,
    lambda_reg: f64,
    method: ReconstructionMethod,
    max_iters: usize,
    tol: f64,
    truth: Option<&MeshField>,
) -> Result<ReconstructionReport, InverseError> {
    map.check_data(data)?;
    let mut report = match method {
        ReconstructionMethod::NormalEquations => normal_equations(map, data, lambda_reg)?,
        ReconstructionMethod::Cgls => cgls(map, data, lambda_reg, max_iters, tol)?,
    };
    if let Some(t) = truth {
        let diff = MeshField::new(
            map.prop.mesh,
            report
                .f_hat
                .values
                .iter()
                .zip(&t.values)
                .map(|(a, b)| a - b)
                .collect(),
        );
        report.relative_error = Some(diff.norm() / t.norm().max(1e-300));
    }
    Ok(report)
}

fn normal_equations(
    map: &ForwardMap,
    data: &FluxTrace,
    lambda: f64,
) -> Result<ReconstructionReport, InverseError> {
    let mat = map.dense.as_ref().ok_or(InverseError::NeedDense)?;
    let n = map.prop.mesh.n_interior;
    let h = map.prop.mesh.h();
    let tau = map.data_weights();
    // M = (1/h) K^T D K + lambda I, rhs = (1/h) K^T D d
    let mut m = vec![vec![0.0f64; n]; n];
    for (r, row) in mat.iter().enumerate() {
        let w = tau[r] / h;
        for j in 0..n {
            let wj = w * row[j];
            for k in j..n {
                m[j][k] += wj * row[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            m[j][k] = m[k][j];
        }
        m[j][j] += lambda;
    }
    let rhs = map.apply_transpose_weighted(data)?;
    let (f_vals, rank_deficient) = match cholesky_solve(&m, &rhs) {
        Ok(x) => (x, false),
        Err(_) => {
            // smallest-norm solution through a spectral cutoff
            let (evals, evecs) = jacobi_eigen(&m)?;
            let cut = 1e-12 * evals.last().copied().unwrap_or(1.0).max(1e-300);
            let mut x = vec![0.0f64; n];
            for (l, v) in evals.iter().zip(&evecs) {
                if *l <= cut {
                    continue;
                }
                let c: f64 = v.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() / l;
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += c * vi;
                }
            }
            (x, true)
        }
    };
    let f_hat = MeshField::new(map.prop.mesh, f_vals);
    let resid = residual_norm_of(map, data, &f_hat)?;
    Ok(ReconstructionReport {
        solution_norm: f_hat.norm(),
        f_hat,
        lambda_reg: lambda,
        iterations: 0,
        data_residual: resid,
        objective_history: Vec::new(),
        rank_deficient,
        relative_error: None,
    })
}

fn residual_norm_of(
    map: &ForwardMap,
    data: &FluxTrace,
    f: &MeshField,
) -> Result<f64, InverseError> {
    let kf = map.apply(f)?;
    let mut diff = kf.clone();
    for ((_, dv), (_, ov)) in diff.traces.iter_mut().zip(&data.traces) {
        for (a, b) in dv.iter_mut().zip(ov) {
            *a -= b;
        }
    }
    Ok(diff.data_norm())
}

fn cgls(
    map: &ForwardMap,
    data: &FluxTrace,
    lambda: f64,
    max_iters: usize,
    tol: f64,
) -> Result<ReconstructionReport, InverseError> {
    let mesh = map.prop.mesh;
    let h = mesh.h();
    let inner_h = |a: &[f64], b: &[f64]| -> f64 {
        h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    };
    let mut f = vec![0.0f64; mesh.n_interior];
    let mut r = data.clone();
    let apply_adj = |trace: &FluxTrace| -> Result<Vec<f64>, InverseError> {
        if map.is_dense() {
            map.apply_transpose_weighted(trace)
        } else {
            Ok(map.apply_adjoint(trace)?.values)
        }
    };
    let mut s: Vec<f64> = apply_adj(&r)?
        .iter()
        .zip(&f)
        .map(|(a, b)| a - lambda * b)
        .collect();
    let mut p = s.clone();
    let mut gamma = inner_h(&s, &s);
    let s0 = gamma.sqrt();
    let mut history = Vec::new();
    let mut iters = 0;
    for _ in 0..max_iters {
        let q = map.apply(&MeshField::new(mesh, p.clone()))?;
        let denom = q.data_inner(&q) + lambda * inner_h(&p, &p);
        if denom <= 0.0 {
            break;
        }
        let alpha = gamma / denom;
        for (fi, pi) in f.iter_mut().zip(&p) {
            *fi += alpha * pi;
        }
        for ((_, rv), (_, qv)) in r.traces.iter_mut().zip(&q.traces) {
            for (a, b) in rv.iter_mut().zip(qv) {
                *a -= alpha * b;
            }
        }
        iters += 1;
        let obj = r.data_norm().powi(2) + lambda * inner_h(&f, &f);
        history.push(obj);
        s = apply_adj(&r)?
            .iter()
            .zip(&f)
            .map(|(a, b)| a - lambda * b)
            .collect();
        let gamma_new = inner_h(&s, &s);
        if gamma_new.sqrt() <= tol * s0 {
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    let f_hat = MeshField::new(mesh, f);
    let resid = residual_norm_of(map, data, &f_hat)?;
    Ok(ReconstructionReport {
        solution_norm: f_hat.norm(),
        f_hat,
        lambda_reg: lambda,
        iterations: iters,
        data_residual: resid,
        objective_history: history,
        rank_deficient: false,
        relative_error: None,
    })
}

/// One row of a regularization sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub data_residual: f64,
    pub solution_norm: f64,
}

/// Sweep lambda over a grid (L-curve data) and pick the value whose
/// residual best matches the noise level (discrepancy principle). The
/// chosen lambda is returned explicitly; nothing is selected silently.
pub fn discrepancy_sweep(
    map: &ForwardMap,
    data: &FluxTrace,
    lambdas: &[f64],
    noise_norm: f64,
    method: ReconstructionMethod,
) -> Result<(f64, Vec<SweepRow>), InverseError> {
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut best = (f64::INFINITY, lambdas[0]);
    for &l in lambdas {
        let rep = reconstruct(map, data, l, method, 200, 1e-9, None)?;
        let gap = (rep.data_residual - noise_norm).abs();
        if gap < best.0 {
            best = (gap, l);
        }
        rows.push(SweepRow {
            lambda: l,
            data_residual: rep.data_residual,
            solution_norm: rep.solution_norm,
        });
    }
    Ok((best.1, rows))
}

/// Additive Gaussian noise scaled so the perturbation's data norm is
/// exactly `level` times the trace's data norm. Seeded and reproducible.
pub fn add_noise(trace: &FluxTrace, level: f64, seed: u64) -> FluxTrace {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = trace.clone();
    let mut noise: Vec<Vec<f64>> = Vec::new();
    for (_, vals) in &trace.traces {
        noise.push(
            (0..vals.len())
                .map(|_| {
                    // Box-Muller from two uniforms keeps the dependency surface small
                    let u1: f64 = rng.random::<f64>().max(1e-16);
                    let u2: f64 = rng.random();
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect(),
        );
    }
    let noise_trace = FluxTrace {
        grid: trace.grid,
        traces: trace
            .traces
            .iter()
            .zip(&noise)
            .map(|((s, _), n)| (*s, n.clone()))
            .collect(),
    };
    let scale = level * trace.data_norm() / noise_trace.data_norm().max(1e-300);
    for ((_, nv), n) in noisy.traces.iter_mut().zip(&noise) {
        for (a, b) in nv.iter_mut().zip(n) {
            *a += scale * b;
        }
    }
    noisy
}

/// Keep every `factor`-th time sample, mapping a fine-grid trace onto the
/// coarse grid (the fine grid must be a refinement by `factor`).
pub fn restrict_trace(fine: &FluxTrace, factor: usize) -> FluxTrace {
    assert!(factor >= 1 && fine.grid.n_steps % factor == 0);
    let grid = TimeGrid::new(fine.grid.t_end, fine.grid.n_steps / factor);
    FluxTrace {
        grid,
        traces: fine
            .traces
            .iter()
            .map(|(s, v)| (*s, v.iter().step_by(factor).copied().collect()))
            .collect(),
    }
}

/// w solving g(0) w(t) + (g' * w)(t) = d/dt J^{2-alpha}[flux](t), marched
/// with trapezoid weights; w is the flux of the velocity-driven companion
/// problem, which is how vanishing data forces a vanishing source.
pub fn deconvolve_flux(
    flux: &FluxTrace,
    g: &TimeSeries,
    g0: f64,
    g_prime: Option<&TimeSeries>,
    alpha: f64,
) -> Result<FluxTrace, InverseError> {
    if g0.abs() < 1e-12 {
        return Err(InverseError::GZeroVanishes(g0));
    }
    let derived;
    let gp = match g_prime {
        Some(p) => p,
        None => {
            derived = differentiate(g)?;
            &derived
        }
    };
    let grid = flux.grid;
    let dt = grid.dt();
    let mut traces = Vec::with_capacity(flux.traces.len());
    for (side, vals) in &flux.traces {
        let series = TimeSeries::new(grid, vals.clone());
        let psi = differentiate(&rl_integral(2.0 - alpha, &series)?)?;
        let mut w = vec![0.0f64; grid.n_nodes()];
        w[0] = psi.values[0] / g0;
        for m in 1..grid.n_nodes() {
            // trapezoid convolution with the newest node split off
            let mut hist = 0.5 * gp.values[m] * w[0];
            for j in 1..m {
                hist += gp.values[m - j] * w[j];
            }
            hist *= dt;
            w[m] = (psi.values[m] - hist) / (g0 + 0.5 * dt * gp.values[0]);
        }
        traces.push((*side, w));
    }
    Ok(FluxTrace { grid, traces })
}

/// One stability-ratio row: the source-space distance in the flux-data norm
/// against the distance of the measured data.
#[derive(Debug, Clone)]
pub struct StabilityRow {
    pub b_norm_diff: f64,
    pub data_norm_diff: f64,
    pub ratio: f64,
}

/// For each pair, ||f1 - f2|| in the direct flux norm and ||K f1 - K f2||
/// computed from two separate solves; the two routes must agree.
pub fn stability_experiment(
    map: &ForwardMap,
    pairs: &[(MeshField, MeshField)],
) -> Result<Vec<StabilityRow>, InverseError> {
    pairs
        .par_iter()
        .map(|(f1, f2)| {
            let diff = MeshField::new(
                map.prop.mesh,
                f1.values.iter().zip(&f2.values).map(|(a, b)| a - b).collect(),
            );
            let b_norm_diff = map.apply_matrix_free(&diff)?.data_norm();
            let k1 = map.apply_matrix_free(f1)?;
            let k2 = map.apply_matrix_free(f2)?;
            let mut d = k1.clone();
            for ((_, dv), (_, ov)) in d.traces.iter_mut().zip(&k2.traces) {
                for (a, b) in dv.iter_mut().zip(ov) {
                    *a -= b;
                }
            }
            let data_norm_diff = d.data_norm();
            Ok(StabilityRow {
                b_norm_diff,
                data_norm_diff,
                ratio: if data_norm_diff == 0.0 && b_norm_diff == 0.0 {
                    1.0
                } else {
                    b_norm_diff / data_norm_diff
                },
            })
        })
        .collect()
}
