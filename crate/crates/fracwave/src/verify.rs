//! Named verification suites: every acceptance check lives here once, so the
//! CLI `verify` subcommand and the acceptance test target run the same code.
//!
//! Each check compares a measured quantity against a frozen tolerance and
//! reports one line. Grids are fixed at the smallest sizes where the
//! discretization budgets leave honest margin.

use crate::adjoint::{
    b_norm, bilinear_form, integral_identity_residual, probe_dictionary, BNormMode,
};
use crate::forward::{
    measure_flux, growth_sanity, solve_general, Propagator, ProblemSpec, SeparableSource, Source,
};
use crate::fracops::{rl_integral, rl_integral_backward, trapezoid_inner, TimeGrid, TimeSeries};
use crate::inverse::{
    add_noise, deconvolve_flux, discrepancy_sweep, reconstruct, restrict_trace, ForwardMap,
    ReconstructionMethod,
};
use crate::mlf::{mlf_eval, MlfParams};
use crate::spatial::{Coefficients, MeshField, Side, SpatialMesh};
use crate::special::{gamma, recip_gamma};
use crate::ucp::{ucp_correspondence_report, LaplaceGrid};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite '{0}'; valid: mlf, fracops, duhamel, identity, stability, ucp, all")]
    UnknownSuite(String),
}

/// One verification line: measured value against its frozen tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
        }
    }

    pub fn pass(&self) -> bool {
        self.measured <= self.tolerance && self.measured.is_finite()
    }
}

pub const SUITES: &[&str] = &[
    "mlf", "fracops", "duhamel", "identity", "stability", "ucp", "all",
];

pub fn run_suite(name: &str) -> Result<Vec<Check>, VerifyError> {
    match name {
        "mlf" => Ok(mlf_suite()),
        "fracops" => Ok(fracops_suite()),
        "duhamel" => Ok(forward_suite()),
        "identity" => Ok(identity_suite()),
        "stability" => Ok(stability_suite()),
        "ucp" => Ok(ucp_suite()),
        "all" => {
            let mut all = mlf_suite();
            all.extend(fracops_suite());
            all.extend(forward_suite());
            all.extend(identity_suite());
            all.extend(stability_suite());
            all.extend(ucp_suite());
            Ok(all)
        }
        other => Err(VerifyError::UnknownSuite(other.to_string())),
    }
}

fn ml(alpha: f64, beta: f64, z: f64) -> f64 {
    mlf_eval(MlfParams { alpha, beta }, z).unwrap()
}

// ---------------------------------------------------------------- A1: mlf

/// Frozen oracle table (alpha, beta, z, value, digits).
pub const MLF_ORACLE_CSV: &str = include_str!("../tests/data/mlf_oracle.csv");

pub fn mlf_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    // A1: certified evaluation against the extended-precision table
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for line in MLF_ORACLE_CSV.lines().skip(1) {
        let mut cols = line.split(',');
        let alpha: f64 = cols.next().unwrap().parse().unwrap();
        let beta: f64 = cols.next().unwrap().parse().unwrap();
        let z: f64 = cols.next().unwrap().parse().unwrap();
        let value: f64 = cols.next().unwrap().parse().unwrap();
        let got = ml(alpha, beta, z);
        let rel = if value != 0.0 {
            ((got - value) / value).abs()
        } else {
            got.abs()
        };
        worst = worst.max(rel);
        count += 1;
    }
    assert!(count >= 200, "oracle table shrank to {count} rows");
    checks.push(Check::new(
        format!("A1 kernel vs extended-precision oracle ({count} points)"),
        worst,
        1e-10,
    ));

    // recurrence identity across methods, scaled by the identity's terms
    let mut worst_rec = 0.0f64;
    for &alpha in &[1.1, 1.5, 1.9] {
        for &beta in &[1.0, 2.0, alpha] {
            for &x in &[0.5, 2.0, 7.0, 30.0, 300.0, 2e4] {
                let lhs = ml(alpha, beta, -x);
                let tail = ml(alpha, beta + alpha, -x);
                let rhs = -x * tail + recip_gamma(beta);
                let scale = lhs.abs().max(x * tail.abs()).max(recip_gamma(beta));
                worst_rec = worst_rec.max(((lhs - rhs) / scale).abs());
            }
        }
    }
    checks.push(Check::new("A1 recurrence identity", worst_rec, 1e-10));

    // decay envelope regression
    let mut worst_decay = 0.0f64;
    for &alpha in &[1.1, 1.5, 1.9] {
        let mut x = 1.0f64;
        while x <= 1e6 {
            worst_decay = worst_decay.max(ml(alpha, 1.0, -x).abs() * (1.0 + x));
            x *= 1.45;
        }
    }
    checks.push(Check::new(
        "A1 decay bound |E(z)|(1+|z|) (frozen sweep constant)",
        worst_decay,
        64.0,
    ));
    checks
}

// ------------------------------------------------------------ A2: fracops

pub fn fracops_suite() -> Vec<Check> {
    let grid = TimeGrid::new(1.0, 512);
    let dt = grid.dt();
    let tol = 10.0 * dt * dt;
    let mut checks = Vec::new();

    // semigroup J^a J^b = J^{a+b}; data vanishing at 0 so the intermediate
    // result stays representable by piecewise-linear nodes
    let f = TimeSeries::sample(grid, |t| (1.3 * t).sin() + t * t);
    let mut worst = 0.0f64;
    for &(p, q) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.6)] {
        let lhs = rl_integral(p, &rl_integral(q, &f).unwrap()).unwrap();
        let rhs = rl_integral(p + q, &f).unwrap();
        for (a, b) in lhs.values.iter().zip(&rhs.values) {
            worst = worst.max((a - b).abs());
        }
    }
    checks.push(Check::new("A2 semigroup composition", worst, tol));

    // duality between the forward and backward integrals
    let g = TimeSeries::sample(grid, |t| (2.0 * t).sin() + 0.5);
    let h = TimeSeries::sample(grid, |t| (t * t - 0.3).cos());
    let mut worst_dual = 0.0f64;
    for &a in &[0.5, 0.8, 1.4] {
        let lhs = trapezoid_inner(&rl_integral(a, &g).unwrap(), &h);
        let rhs = trapezoid_inner(&g, &rl_integral_backward(a, &h).unwrap());
        worst_dual = worst_dual.max((lhs - rhs).abs());
    }
    checks.push(Check::new("A2 forward/backward duality", worst_dual, tol));

    // convolution interchange J^a(g*h) = g*(J^a h)
    let conv = |p: &TimeSeries, q: &TimeSeries| -> TimeSeries {
        let n = grid.n_nodes();
        let mut out = vec![0.0; n];
        for m in 0..n {
            let mut acc = 0.0;
            for j in 0..=m {
                let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                acc += w * p.values[j] * q.values[m - j];
            }
            out[m] = acc * dt;
        }
        TimeSeries::new(grid, out)
    };
    let gs = TimeSeries::sample(grid, |t| 1.0 + t);
    let hs = TimeSeries::sample(grid, |t| (3.0 * t).sin());
    let mut worst_conv = 0.0f64;
    for &a in &[0.6, 1.5] {
        let lhs = rl_integral(a, &conv(&gs, &hs)).unwrap();
        let rhs = conv(&gs, &rl_integral(a, &hs).unwrap());
        for (x, y) in lhs.values.iter().zip(&rhs.values) {
            worst_conv = worst_conv.max((x - y).abs());
        }
    }
    checks.push(Check::new("A2 convolution interchange", worst_conv, tol));
    checks
}

// -------------------------------------------- A3..A6: evolution solvers

fn spec_with(
    n: usize,
    nt: usize,
    alpha: f64,
    b: impl Fn(f64) -> f64,
    c: impl Fn(f64) -> f64,
    t_end: f64,
) -> ProblemSpec {
    let mesh = SpatialMesh::new(0.0, 1.0, n);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, b, c, 1.0).unwrap();
    ProblemSpec {
        alpha,
        mesh,
        coeff,
        grid: TimeGrid::new(t_end, nt),
        init_pos: MeshField::zeros(mesh),
        init_vel: MeshField::zeros(mesh),
        source: Source::None,
        observe: vec![Side::Right],
        n_modes: None,
    }
}

pub fn forward_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    // A3: spectral solver against the kernel closed forms, space-time L2
    {
        let spec = spec_with(63, 256, 1.5, |_| 0.0, |_| 0.0, 1.0);
        let prop = Propagator::new(&spec).unwrap();
        let l1 = prop.basis.lambdas[0];
        let phi1 = MeshField::new(spec.mesh, prop.basis.phis[0].clone());
        let zero = MeshField::zeros(spec.mesh);
        let rel_l2 = |got: &crate::forward::SpaceTimeField, want: &dyn Fn(f64) -> f64| -> f64 {
            let mut num = 0.0;
            let mut den = 0.0;
            for m in 0..spec.grid.n_nodes() {
                let w = want(spec.grid.node(m));
                for (i, phi) in prop.basis.phis[0].iter().enumerate() {
                    num += (got.rows[m][i + 1] - w * phi).powi(2);
                    den += (w * phi).powi(2);
                }
            }
            (num / den.max(1e-300)).sqrt()
        };
        let u_pos = prop.solve_symmetric(&phi1, &zero, &Source::None).unwrap();
        let e_pos = rel_l2(&u_pos, &|t: f64| ml(1.5, 1.0, -l1 * t.powf(1.5)));
        checks.push(Check::new("A3 single-mode initial position", e_pos, 1e-4));

        let u_vel = prop.solve_symmetric(&zero, &phi1, &Source::None).unwrap();
        let e_vel = rel_l2(&u_vel, &|t: f64| t * ml(1.5, 2.0, -l1 * t.powf(1.5)));
        checks.push(Check::new("A3 single-mode initial velocity", e_vel, 1e-4));

        let src = Source::separable(
            phi1.clone(),
            TimeSeries::sample(spec.grid, |_| 1.0),
            1.0,
        );
        let u_src = prop.solve_symmetric(&zero, &zero, &src).unwrap();
        let e_src = rel_l2(&u_src, &|t: f64| {
            (1.0 - ml(1.5, 1.0, -l1 * t.powf(1.5))) / l1
        });
        checks.push(Check::new("A3 single-mode constant source", e_src, 1e-4));
    }

    // A4: manufactured nonsymmetric solution, refinement factor
    {
        let err_at = |n: usize, nt: usize| -> f64 {
            let mesh = SpatialMesh::new(0.0, 1.0, n);
            let coeff =
                Coefficients::from_fns(&mesh, |_| 1.0, |x| 0.3 + 0.1 * x, |_| 0.2, 1.0).unwrap();
            let grid = TimeGrid::new(1.0, nt);
            let alpha = 1.5;
            let rows: Vec<Vec<f64>> = (0..grid.n_nodes())
                .map(|m| {
                    let t = grid.node(m);
                    (1..=n)
                        .map(|i| {
                            let x = mesh.node(i);
                            let sin = (PI * x).sin();
                            let cos = (PI * x).cos();
                            2.0 * t.powf(2.0 - alpha) / gamma(3.0 - alpha) * sin
                                + t * t * (PI * PI * sin + (0.3 + 0.1 * x) * PI * cos + 0.2 * sin)
                        })
                        .collect()
                })
                .collect();
            let spec = ProblemSpec {
                alpha,
                mesh,
                coeff,
                grid,
                init_pos: MeshField::zeros(mesh),
                init_vel: MeshField::zeros(mesh),
                source: Source::General(rows),
                observe: vec![Side::Right],
                n_modes: None,
            };
            let u = solve_general(&spec).unwrap();
            let mut num = 0.0;
            let mut den = 0.0;
            for m in 0..grid.n_nodes() {
                let t = grid.node(m);
                for i in 1..=n {
                    let want = t * t * (PI * mesh.node(i)).sin();
                    num += (u.rows[m][i] - want).powi(2);
                    den += want * want;
                }
            }
            (num / den).sqrt()
        };
        let (e0, e1, e2) = (err_at(31, 64), err_at(63, 128), err_at(127, 256));
        checks.push(Check::new("A4 manufactured-solution coarse error", e0, 2e-3));
        // refinement factors as inverted measures: pass when >= 1.7
        checks.push(Check::new(
            format!("A4 refinement factor 1 (observed {:.2})", e0 / e1),
            1.7 / (e0 / e1),
            1.0,
        ));
        checks.push(Check::new(
            format!("A4 refinement factor 2 (observed {:.2})", e1 / e2),
            1.7 / (e1 / e2),
            1.0,
        ));
    }

    // A5: the global fixed point against the marching sweep
    {
        let mut spec = spec_with(21, 96, 1.5, |_| 0.5, |_| 0.0, 1.0);
        spec.init_pos = MeshField::sample(spec.mesh, |x| (PI * x).sin());
        let prop = Propagator::new(&spec).unwrap();
        let marched = prop
            .solve_general(&spec.init_pos, &spec.init_vel, &spec.source)
            .unwrap();
        let picard = prop
            .picard(&spec.init_pos, &spec.init_vel, &spec.source, 80, 1e-10)
            .unwrap();
        assert!(picard.converged);
        checks.push(Check::new(
            "A5 fixed-point vs marching agreement",
            marched.sup_distance(&picard.field),
            1e-8,
        ));

        // ratio decay with reaction coupling (real iteration spectrum)
        let mut spec2 = spec_with(21, 96, 1.5, |_| 0.0, |_| 5.0, 0.75);
        spec2.init_pos = MeshField::sample(spec2.mesh, |x| (PI * x).sin());
        let prop2 = Propagator::new(&spec2).unwrap();
        let r = prop2
            .picard(&spec2.init_pos, &spec2.init_vel, &spec2.source, 80, 1e-10)
            .unwrap();
        let ratios: Vec<f64> = r.deltas.windows(2).map(|w| w[1] / w[0]).collect();
        let mut worst_rise = 0.0f64;
        for k in 3..ratios.len() {
            worst_rise = worst_rise.max(ratios[k] / ratios[k - 1]);
        }
        checks.push(Check::new(
            "A5 step-ratio decay after iteration 3 (max rise)",
            worst_rise,
            1.0,
        ));
    }

    // A6: Duhamel route vs the direct solve, three time factors,
    // symmetric and nonsymmetric coefficients
    {
        let gs: [(&str, fn(f64) -> f64, fn(f64) -> f64, f64); 3] = [
            ("g=1", |_| 1.0, |_| 0.0, 1.0),
            ("g=1+t", |t| 1.0 + t, |_| 1.0, 1.0),
            ("g=2+sin t", |t| 2.0 + t.sin(), |t| t.cos(), 2.0),
        ];
        for (sym, bv, cv) in [(true, 0.0, 0.0), (false, 0.3, 0.1)] {
            let spec = spec_with(31, 192, 1.5, move |_| bv, move |_| cv, 1.0);
            let prop = Propagator::new(&spec).unwrap();
            let f = MeshField::sample(spec.mesh, |x| {
                (PI * x).sin() + 0.2 * (2.0 * PI * x).sin()
            });
            for (label, gfun, gpfun, g0) in gs {
                let src = SeparableSource {
                    f: f.clone(),
                    g: TimeSeries::sample(spec.grid, gfun),
                    g0,
                    g_prime: Some(TimeSeries::sample(spec.grid, gpfun)),
                };
                let via_duhamel = prop.duhamel_solve(&src).unwrap();
                let direct = prop
                    .solve_general(
                        &MeshField::zeros(spec.mesh),
                        &MeshField::zeros(spec.mesh),
                        &Source::Separable(src),
                    )
                    .unwrap();
                let mut num = 0.0;
                let mut den = 0.0;
                for m in 0..spec.grid.n_nodes() {
                    for i in 1..=spec.mesh.n_interior {
                        num += (via_duhamel.rows[m][i] - direct.rows[m][i]).powi(2);
                        den += direct.rows[m][i].powi(2);
                    }
                }
                checks.push(Check::new(
                    format!(
                        "A6 Duhamel route {} ({})",
                        label,
                        if sym { "symmetric" } else { "nonsymmetric" }
                    ),
                    (num / den.max(1e-300)).sqrt(),
                    1e-3,
                ));
            }
        }
    }

    // growth envelope stays a sanity gate on the long-horizon solver
    {
        let mut spec = spec_with(15, 400, 1.5, |_| 0.3, |_| -0.2, 10.0);
        spec.init_pos = MeshField::sample(spec.mesh, |x| (PI * x).sin());
        let r = growth_sanity(&spec).unwrap();
        checks.push(Check::new(
            "A- growth envelope (advection/reaction case)",
            r.max_ratio,
            3.0,
        ));
    }
    checks
}

// ------------------------------------------- A7, A8: adjoint machinery

fn two_sided_probes(grid: TimeGrid, k_max: usize) -> Vec<crate::adjoint::Probe> {
    let mut probes = probe_dictionary(Side::Right, k_max, grid);
    probes.extend(probe_dictionary(Side::Left, k_max, grid));
    probes
}

pub fn identity_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    // A7: flux pairing vs bilinear pairing over the (alpha x coefficients)
    // matrix with 8 probes (4 per endpoint)
    {
        let mut worst_sym = 0.0f64;
        let mut worst_nonsym = 0.0f64;
        for &alpha in &[1.2, 1.35, 1.5] {
            for &(bv, cv) in &[(0.0, 0.0), (0.5, 0.2), (-0.4, 0.3)] {
                let mesh = SpatialMesh::new(0.0, 1.0, 119);
                let coeff = Coefficients::from_fns(
                    &mesh,
                    |_| 1.0,
                    move |x| bv * (1.0 + 0.2 * x),
                    move |_| cv,
                    1.0,
                )
                .unwrap();
                let spec = ProblemSpec {
                    alpha,
                    mesh,
                    coeff,
                    grid: TimeGrid::new(1.0, 1024),
                    init_pos: MeshField::zeros(mesh),
                    init_vel: MeshField::zeros(mesh),
                    source: Source::None,
                    observe: vec![Side::Left, Side::Right],
                    n_modes: None,
                };
                let prop = Propagator::new(&spec).unwrap();
                let f = MeshField::new(
                    mesh,
                    prop.basis.phis[0]
                        .iter()
                        .zip(&prop.basis.phis[1])
                        .map(|(a, q)| a + 0.3 * q)
                        .collect(),
                );
                let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
                use rayon::prelude::*;
                let worst = two_sided_probes(spec.grid, 4)
                    .par_iter()
                    .map(|probe| {
                        integral_identity_residual(&prop, &f, &g, 1.0, probe)
                            .unwrap()
                            .rel_residual
                    })
                    .reduce(|| 0.0, f64::max);
                if bv == 0.0 && cv == 0.0 {
                    worst_sym = worst_sym.max(worst);
                } else {
                    worst_nonsym = worst_nonsym.max(worst);
                }
            }
        }
        checks.push(Check::new(
            "A7 integral identity, symmetric cells",
            worst_sym,
            1e-3,
        ));
        checks.push(Check::new(
            "A7 integral identity, nonsymmetric cells",
            worst_nonsym,
            5e-3,
        ));
    }

    // A8: norm axioms in the direct (flux-data) evaluation
    {
        let spec = spec_with(21, 128, 1.5, |_| 0.3, |_| 0.1, 1.0);
        let prop = Propagator::new(&spec).unwrap();
        let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
        let norm_of = |f: &MeshField| -> f64 {
            b_norm(&prop, f, &g, 1.0, BNormMode::Direct).unwrap()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut rand_field = || -> MeshField {
            let coeffs: Vec<f64> = (0..6).map(|_| rng.random::<f64>() - 0.5).collect();
            MeshField::new(
                spec.mesh,
                (1..=spec.mesh.n_interior)
                    .map(|i| {
                        let x = spec.mesh.node(i);
                        coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, c)| c * ((k + 1) as f64 * PI * x).sin())
                            .sum()
                    })
                    .collect(),
            )
        };

        // absolute homogeneity
        let f0 = rand_field();
        let n1 = norm_of(&f0);
        let scaled = MeshField::new(spec.mesh, f0.values.iter().map(|v| -2.5 * v).collect());
        checks.push(Check::new(
            "A8 absolute homogeneity",
            (norm_of(&scaled) - 2.5 * n1).abs() / (2.5 * n1),
            1e-10,
        ));

        // triangle inequality over 50 random pairs
        let mut worst_tri = f64::NEG_INFINITY;
        for _ in 0..50 {
            let fa = rand_field();
            let fb = rand_field();
            let sum = MeshField::new(
                spec.mesh,
                fa.values.iter().zip(&fb.values).map(|(a, b)| a + b).collect(),
            );
            let excess = norm_of(&sum) - norm_of(&fa) - norm_of(&fb);
            worst_tri = worst_tri.max(excess);
        }
        checks.push(Check::new(
            "A8 triangle inequality (max excess)",
            worst_tri.max(0.0),
            1e-10,
        ));

        // positivity witness: 20 random nonzero sources
        let mut min_norm = f64::INFINITY;
        for _ in 0..20 {
            let f = rand_field();
            min_norm = min_norm.min(norm_of(&f) / f.norm().max(1e-300));
        }
        checks.push(Check::new(
            format!("A8 positivity witness (min scaled norm {min_norm:.2e})"),
            if min_norm > 1e-6 { 0.0 } else { 1.0 },
            0.5,
        ));

        // dictionary mode stays below the direct norm and tightens
        let f = rand_field();
        let direct = norm_of(&f);
        let d4 = b_norm(&prop, &f, &g, 1.0, BNormMode::Dictionary(&probe_dictionary(Side::Right, 4, spec.grid))).unwrap();
        let d16 = b_norm(&prop, &f, &g, 1.0, BNormMode::Dictionary(&probe_dictionary(Side::Right, 16, spec.grid))).unwrap();
        checks.push(Check::new(
            "A8 dictionary below direct",
            (d4.max(d16) - direct * (1.0 + 5e-3)).max(0.0),
            0.0,
        ));
        checks.push(Check::new(
            "A8 dictionary tightening",
            (d4 - d16).max(0.0),
            1e-12,
        ));
        // bilinear pairing itself is exactly homogeneous
        let probe = &probe_dictionary(Side::Right, 1, spec.grid)[0];
        let b1 = bilinear_form(&prop, &f0, &g, probe).unwrap();
        let b2 = bilinear_form(&prop, &scaled, &g, probe).unwrap();
        checks.push(Check::new(
            "A8 bilinear homogeneity",
            (b2 + 2.5 * b1).abs() / b1.abs().max(1e-300),
            1e-12,
        ));
    }
    checks
}

// ----------------------------- A9, A10, A11: inverse-problem machinery

fn inverse_template(n: usize, nt: usize) -> ProblemSpec {
    let mesh = SpatialMesh::new(0.0, 1.0, n);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.3, |_| 0.1, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, nt);
    ProblemSpec {
        alpha: 1.5,
        mesh,
        coeff,
        grid,
        init_pos: MeshField::zeros(mesh),
        init_vel: MeshField::zeros(mesh),
        source: Source::Separable(SeparableSource {
            f: MeshField::zeros(mesh),
            g: TimeSeries::sample(grid, |t| 1.0 + t),
            g0: 1.0,
            g_prime: Some(TimeSeries::sample(grid, |_| 1.0)),
        }),
        observe: vec![Side::Right],
        n_modes: None,
    }
}

pub fn stability_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    // A9: the two routes to the source distance coincide
    {
        let map = ForwardMap::assemble(&inverse_template(31, 128), false).unwrap();
        let prop = &map.prop;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut pairs = vec![(
            MeshField::new(prop.mesh, prop.basis.phis[0].clone()),
            MeshField::new(prop.mesh, prop.basis.phis[1].clone()),
        )];
        for _ in 0..19 {
            let mut field = || {
                let c: Vec<f64> = (0..5).map(|_| rng.random::<f64>() - 0.5).collect();
                MeshField::new(
                    prop.mesh,
                    (1..=prop.mesh.n_interior)
                        .map(|i| {
                            let x = prop.mesh.node(i);
                            c.iter()
                                .enumerate()
                                .map(|(k, ck)| ck * ((k + 1) as f64 * PI * x).sin())
                                .sum()
                        })
                        .collect(),
                )
            };
            pairs.push((field(), field()));
        }
        let rows = crate::inverse::stability_experiment(&map, &pairs).unwrap();
        let worst = rows
            .iter()
            .map(|r| (r.ratio - 1.0).abs())
            .fold(0.0f64, f64::max);
        checks.push(Check::new(
            "A9 stability ratio across 20 pairs (max |ratio-1|)",
            worst,
            5e-3,
        ));
    }

    // A10: flux deconvolution round trip and the zero-data witness
    {
        let template = inverse_template(31, 256);
        let prop = Propagator::new(&template).unwrap();
        let f = MeshField::new(template.mesh, prop.basis.phis[0].clone());
        let zero = MeshField::zeros(template.mesh);
        let gs: [(&str, fn(f64) -> f64, fn(f64) -> f64, f64); 3] = [
            ("g=1", |_| 1.0, |_| 0.0, 1.0),
            ("g=1+t", |t| 1.0 + t, |_| 1.0, 1.0),
            ("g=2+sin t", |t| 2.0 + t.sin(), |t| t.cos(), 2.0),
        ];
        for (label, gfun, gpfun, g0) in gs {
            let g = TimeSeries::sample(template.grid, gfun);
            let gp = TimeSeries::sample(template.grid, gpfun);
            let src = Source::Separable(SeparableSource {
                f: f.clone(),
                g: g.clone(),
                g0,
                g_prime: Some(gp.clone()),
            });
            let u = prop.solve_general(&zero, &zero, &src).unwrap();
            let flux_u = measure_flux(&u, &template.coeff, &[Side::Right]).unwrap();
            let w = deconvolve_flux(&flux_u, &g, g0, Some(&gp), template.alpha).unwrap();
            let v = prop.solve_general(&zero, &f, &Source::None).unwrap();
            let flux_v = measure_flux(&v, &template.coeff, &[Side::Right]).unwrap();
            let mut num = 0.0;
            let nt = template.grid.n_nodes();
            for ((_, wv), (_, vv)) in w.traces.iter().zip(&flux_v.traces) {
                for m in 0..nt {
                    let wt = if m == 0 || m == nt - 1 { 0.5 } else { 1.0 };
                    num += wt * (wv[m] - vv[m]).powi(2);
                }
            }
            let err = (num * template.grid.dt()).sqrt() / flux_v.data_norm();
            checks.push(Check::new(
                format!("A10 flux deconvolution round trip, {label}"),
                err,
                5e-3,
            ));
        }

        // vanishing data forces a vanishing reconstruction
        let map = ForwardMap::assemble(&inverse_template(15, 64), true).unwrap();
        let zero_data = crate::forward::FluxTrace {
            grid: map.prop.grid,
            traces: vec![(Side::Right, vec![0.0; map.prop.grid.n_nodes()])],
        };
        let rep = reconstruct(
            &map,
            &zero_data,
            1e-12,
            ReconstructionMethod::NormalEquations,
            0,
            0.0,
            None,
        )
        .unwrap();
        checks.push(Check::new(
            "A10 zero-data reconstruction norm",
            rep.f_hat.norm(),
            1e-8,
        ));
    }

    // A11: reconstruction quality, noiseless and at 1% noise
    {
        let coarse = inverse_template(63, 256);
        let fine = inverse_template(127, 512);
        let map = ForwardMap::assemble(&coarse, true).unwrap();
        let fine_map = ForwardMap::assemble(&fine, false).unwrap();
        let truth_fine = MeshField::sample(fine.mesh, |x| (PI * x).sin());
        let truth = MeshField::sample(coarse.mesh, |x| (PI * x).sin());
        let data = restrict_trace(&fine_map.apply(&truth_fine).unwrap(), 2);
        let rep = reconstruct(
            &map,
            &data,
            1e-7,
            ReconstructionMethod::NormalEquations,
            0,
            0.0,
            Some(&truth),
        )
        .unwrap();
        checks.push(Check::new(
            "A11 noiseless reconstruction (2x-finer data)",
            rep.relative_error.unwrap(),
            1e-2,
        ));

        let noisy = add_noise(&data, 0.01, 42);
        let noise_norm = 0.01 * data.data_norm();
        let lambdas: Vec<f64> = (0..=10).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect();
        let (lam, sweep) = discrepancy_sweep(
            &map,
            &noisy,
            &lambdas,
            noise_norm,
            ReconstructionMethod::NormalEquations,
        )
        .unwrap();
        assert_eq!(sweep.len(), lambdas.len());
        let rep_noisy = reconstruct(
            &map,
            &noisy,
            lam,
            ReconstructionMethod::NormalEquations,
            0,
            0.0,
            Some(&truth),
        )
        .unwrap();
        checks.push(Check::new(
            format!("A11 1%-noise reconstruction (discrepancy lambda {lam:.1e})"),
            rep_noisy.relative_error.unwrap(),
            0.15,
        ));
    }
    checks
}

// ------------------------------------------------------------- A12: ucp

pub fn ucp_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    let mesh = SpatialMesh::new(0.0, 1.0, 31);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.3, |_| 0.1, 1.0).unwrap();
    let spec = ProblemSpec {
        alpha: 1.5,
        mesh,
        coeff,
        grid: TimeGrid::new(20.0, 2000),
        init_pos: MeshField::zeros(mesh),
        init_vel: MeshField::sample(mesh, |x| {
            (PI * x).sin() + 0.4 * (2.0 * PI * x).sin() - 0.2 * (3.0 * PI * x).sin()
        }),
        source: Source::None,
        observe: vec![Side::Right],
        n_modes: None,
    };
    let lgrid = LaplaceGrid::default_grid();
    let rep = ucp_correspondence_report(&spec, &lgrid, 4).unwrap();
    for row in &rep.rows {
        checks.push(Check::new(
            format!("A12 transform vs resolvent at s={}", row.s),
            (row.fractional_vs_resolvent - row.truncation_budget).max(0.0),
            2e-2,
        ));
        checks.push(Check::new(
            format!("A12 parabolic companion at s={}", row.s),
            (row.parabolic_vs_fractional - row.truncation_budget).max(0.0),
            2e-2,
        ));
        checks.push(Check::new(
            format!("A12 flux correspondence at s={}", row.s),
            (row.flux_mismatch - row.truncation_budget).max(0.0),
            2e-2,
        ));
    }
    checks.push(Check::new(
        "A12 resolvent back-substitution residual",
        rep.resolvent_residual,
        1e-12,
    ));
    checks
}
