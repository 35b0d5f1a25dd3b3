//! Laplace-domain correspondence checks: the transform of the fractional
//! velocity-driven solution against the elliptic resolvent, and against the
//! transform of a parabolic companion run evaluated at eta = s^alpha. These
//! are the computable faces of the unique-continuation argument; transforms
//! are only ever compared forward (no inversion), each with an attached
//! truncation budget estimated from the computed solution's own tail.

use crate::forward::{ForwardError, ProblemSpec, Propagator, Source};
use crate::fracops::TimeSeries;
use crate::linalg::{thomas_solve, LinalgError};
use crate::spatial::{conormal_flux, Coefficients, MeshField, Side, SpatialError, SpatialMesh};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UcpError {
    #[error("Laplace parameter s={0} must be positive")]
    BadParameter(f64),
    #[error("s_min * t_long = {0:.2} is below the truncation budget floor 10")]
    ShortHorizon(f64),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Transform abscissae and the finite horizon they are honest for.
#[derive(Debug, Clone)]
pub struct LaplaceGrid {
    pub s_values: Vec<f64>,
    pub t_long: f64,
}

impl LaplaceGrid {
    pub fn new(s_values: Vec<f64>, t_long: f64) -> Result<Self, UcpError> {
        let mut sorted = s_values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s_min = *sorted.first().ok_or(UcpError::BadParameter(0.0))?;
        if s_min <= 0.0 {
            return Err(UcpError::BadParameter(s_min));
        }
        if s_min * t_long < 10.0 {
            return Err(UcpError::ShortHorizon(s_min * t_long));
        }
        Ok(Self {
            s_values: sorted,
            t_long,
        })
    }

    pub fn default_grid() -> Self {
        Self::new(vec![2.0, 3.0, 5.0, 8.0, 10.0], 20.0).expect("static grid is valid")
    }
}

/// Trapezoid transform of sampled data with its truncation estimate: the
/// dropped tail is bounded by the late-time magnitude times e^{-sT}/s.
pub fn laplace_transform(series: &TimeSeries, s: f64) -> Result<(f64, f64), UcpError> {
    if s <= 0.0 {
        return Err(UcpError::BadParameter(s));
    }
    let n = series.values.len();
    let dt = series.grid.dt();
    let mut acc = 0.0;
    for (m, v) in series.values.iter().enumerate() {
        let w = if m == 0 || m == n - 1 { 0.5 } else { 1.0 };
        acc += w * (-s * series.grid.node(m)).exp() * v;
    }
    let tail = series.values[(3 * n) / 4..]
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let budget = tail * (-s * series.grid.t_end).exp() / s;
    Ok((acc * dt, budget))
}

/// Solve (A + s^alpha) w = s^{alpha-2} b with Dirichlet rows;
/// A = A0 + B d/dx + c keeps bandwidth three. Returns the solution and the
/// back-substitution residual (max-norm, relative).
pub fn resolvent_solve(
    mesh: &SpatialMesh,
    coeff: &Coefficients,
    alpha: f64,
    s: f64,
    b: &MeshField,
) -> Result<(MeshField, f64), UcpError> {
    if s <= 0.0 {
        return Err(UcpError::BadParameter(s));
    }
    let (sub, diag, sup) = resolvent_bands(mesh, coeff, s.powf(alpha));
    let scale = s.powf(alpha - 2.0);
    let rhs: Vec<f64> = b.values.iter().map(|v| scale * v).collect();
    let x = thomas_solve(&sub, &diag, &sup, &rhs)?;
    let n = mesh.n_interior;
    let mut resid = 0.0f64;
    let mut rhs_scale = 0.0f64;
    for i in 0..n {
        let mut ax = diag[i] * x[i];
        if i > 0 {
            ax += sub[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            ax += sup[i] * x[i + 1];
        }
        resid = resid.max((ax - rhs[i]).abs());
        rhs_scale = rhs_scale.max(rhs[i].abs());
    }
    Ok((
        MeshField::new(*mesh, x),
        resid / rhs_scale.max(1e-300),
    ))
}

fn resolvent_bands(
    mesh: &SpatialMesh,
    coeff: &Coefficients,
    shift: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = mesh.n_interior;
    let h = mesh.h();
    let h2 = h * h;
    let mut sub = Vec::with_capacity(n - 1);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n - 1);
    for i in 0..n {
        diag.push((coeff.a_half[i] + coeff.a_half[i + 1]) / h2 + coeff.c_nodes[i] + shift);
        if i + 1 < n {
            sup.push(-coeff.a_half[i + 1] / h2 + coeff.b_nodes[i] / (2.0 * h));
            sub.push(-coeff.a_half[i + 1] / h2 - coeff.b_nodes[i + 1] / (2.0 * h));
        }
    }
    (sub, diag, sup)
}

/// Correspondence numbers at one abscissa.
#[derive(Debug, Clone)]
pub struct UcpRow {
    pub s: f64,
    /// max-x relative mismatch, transform of the fractional run vs resolvent
    pub fractional_vs_resolvent: f64,
    /// max-x relative mismatch, s^{2-alpha} * transform vs parabolic transform
    pub parabolic_vs_fractional: f64,
    /// conormal flux of the two elliptic descriptions, relative
    pub flux_mismatch: f64,
    /// attached truncation estimate, relative to the field scale
    pub truncation_budget: f64,
}

#[derive(Debug, Clone)]
pub struct UcpReport {
    pub rows: Vec<UcpRow>,
    pub resolvent_residual: f64,
}

/// Velocity-driven homogeneous problem (a = 0, F = 0): solve to the long
/// horizon, transform, and compare against the resolvent and against an
/// implicit-Euler parabolic companion transformed at eta = s^alpha.
pub fn ucp_correspondence_report(
    spec: &ProblemSpec,
    lgrid: &LaplaceGrid,
    dt_par_divisor: usize,
) -> Result<UcpReport, UcpError> {
    assert!(
        (spec.grid.t_end - lgrid.t_long).abs() < 1e-12,
        "spec grid must cover the Laplace horizon"
    );
    let prop = Propagator::new(spec)?;
    let zero = MeshField::zeros(spec.mesh);
    let u = prop.solve_general(&zero, &spec.init_vel, &Source::None)?;
    let n = spec.mesh.n_interior;

    // parabolic companion on a finer implicit-Euler grid, transforms
    // accumulated on the fly at eta = s^alpha
    let dt_par = spec.grid.dt() / dt_par_divisor as f64;
    let steps = (lgrid.t_long / dt_par).round() as usize;
    let (sub, diag, sup) = {
        // (I + dt A) p_next = p
        let (s0, d0, p0) = resolvent_bands(&spec.mesh, &spec.coeff, 0.0);
        (
            s0.iter().map(|v| v * dt_par).collect::<Vec<_>>(),
            d0.iter().map(|v| 1.0 + v * dt_par).collect::<Vec<_>>(),
            p0.iter().map(|v| v * dt_par).collect::<Vec<_>>(),
        )
    };
    let etas: Vec<f64> = lgrid.s_values.iter().map(|s| s.powf(spec.alpha)).collect();
    let mut par_hat = vec![vec![0.0f64; n]; etas.len()];
    let mut par_tail = vec![0.0f64; etas.len()];
    {
        let mut p = spec.init_vel.values.clone();
        for (k, eta) in etas.iter().enumerate() {
            // half-weight first node of the trapezoid accumulation
            for i in 0..n {
                par_hat[k][i] += 0.5 * dt_par * p[i];
                let _ = eta;
            }
        }
        for step in 1..=steps {
            p = thomas_solve(&sub, &diag, &sup, &p)?;
            let t = step as f64 * dt_par;
            let w = if step == steps { 0.5 } else { 1.0 };
            for (k, eta) in etas.iter().enumerate() {
                let e = (-eta * t).exp();
                for i in 0..n {
                    par_hat[k][i] += w * dt_par * e * p[i];
                }
                if step == steps {
                    let pmax = p.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                    par_tail[k] = pmax * e / eta;
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(lgrid.s_values.len());
    let mut worst_resid = 0.0f64;
    for (k, &s) in lgrid.s_values.iter().enumerate() {
        // route A: transform of the fractional run, node by node
        let mut u_hat = vec![0.0f64; n];
        let mut budget = 0.0f64;
        for i in 0..n {
            let (v, b) = laplace_transform(&u.node_series(i), s)?;
            u_hat[i] = v;
            budget = budget.max(b);
        }
        // route B: elliptic resolvent
        let (w, resid) = resolvent_solve(&spec.mesh, &spec.coeff, spec.alpha, s, &spec.init_vel)?;
        worst_resid = worst_resid.max(resid);
        let scale = w
            .values
            .iter()
            .fold(0.0f64, |a, b| a.max(b.abs()))
            .max(1e-300);
        let mm_res = u_hat
            .iter()
            .zip(&w.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            / scale;
        // route C: parabolic companion at eta = s^alpha, compared with
        // s^{2-alpha} * u_hat
        let lift = s.powf(2.0 - spec.alpha);
        let mm_par = par_hat[k]
            .iter()
            .zip(&u_hat)
            .map(|(p, uh)| (p - lift * uh).abs())
            .fold(0.0f64, f64::max)
            / (lift * scale);
        // flux face of the same comparison
        let fu = conormal_flux(
            &spec.mesh,
            &spec.coeff,
            &u_hat,
            *spec.observe.first().unwrap_or(&Side::Right),
        )?;
        let fw = conormal_flux(
            &spec.mesh,
            &spec.coeff,
            &w.values,
            *spec.observe.first().unwrap_or(&Side::Right),
        )?;
        let flux_mismatch = (fu - fw).abs() / fw.abs().max(1e-300);
        rows.push(UcpRow {
            s,
            fractional_vs_resolvent: mm_res,
            parabolic_vs_fractional: mm_par,
            flux_mismatch,
            truncation_budget: (budget + par_tail[k] / lift) / scale,
        });
    }
    Ok(UcpReport {
        rows,
        resolvent_residual: worst_resid,
    })
}
