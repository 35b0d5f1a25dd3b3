//! 1-D spatial discretization on an interval with homogeneous Dirichlet
//! conditions: the conservative flux-form stencil for the symmetric part
//! (coefficient sampled at half-nodes so the matrix is exactly symmetric),
//! central first-order terms, the full eigenbasis, fractional powers, and
//! second-order one-sided conormal fluxes at the endpoints.

use crate::eigen::{symmetric_tridiagonal_eigen, EigenError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpatialError {
    #[error("diffusion coefficient {value} at x={x} below the ellipticity bound {a0}")]
    EllipticityViolated { x: f64, value: f64, a0: f64 },
    #[error("mesh needs at least {needed} interior nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Uniform interior mesh of (x_left, x_right): nodes x_i = x_left + i h,
/// i = 1..=n_interior, h = (x_right - x_left)/(n_interior + 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMesh {
    pub x_left: f64,
    pub x_right: f64,
    pub n_interior: usize,
}

/// Observation side(s) for boundary fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl SpatialMesh {
    pub fn new(x_left: f64, x_right: f64, n_interior: usize) -> Self {
        assert!(x_right > x_left && n_interior > 0, "degenerate mesh");
        Self {
            x_left,
            x_right,
            n_interior,
        }
    }

    pub fn h(&self) -> f64 {
        (self.x_right - self.x_left) / (self.n_interior + 1) as f64
    }

    /// Interior node x_i for i in 1..=n_interior.
    pub fn node(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.h()
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..=self.n_interior).map(|i| self.node(i)).collect()
    }
}

/// Interior values of a field with implicit zero Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshField {
    pub mesh: SpatialMesh,
    pub values: Vec<f64>,
}

impl MeshField {
    pub fn new(mesh: SpatialMesh, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), mesh.n_interior);
        Self { mesh, values }
    }

    pub fn zeros(mesh: SpatialMesh) -> Self {
        Self::new(mesh, vec![0.0; mesh.n_interior])
    }

    pub fn sample(mesh: SpatialMesh, f: impl Fn(f64) -> f64) -> Self {
        Self::new(mesh, (1..=mesh.n_interior).map(|i| f(mesh.node(i))).collect())
    }

    /// h-weighted L2 inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mesh.h()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

/// Sampled coefficients of A = A0 + B d/dx + c on one mesh.
#[derive(Debug, Clone)]
pub struct Coefficients {
    /// a at the half-nodes x_{i+1/2}, i = 0..=n_interior
    pub a_half: Vec<f64>,
    /// a at the two boundary points (for conormal fluxes)
    pub a_left: f64,
    pub a_right: f64,
    /// B, c, and B' at the interior nodes
    pub b_nodes: Vec<f64>,
    pub c_nodes: Vec<f64>,
    pub b_prime_nodes: Vec<f64>,
    /// B at the boundary points (for divergence-form stencils)
    pub b_left: f64,
    pub b_right: f64,
    /// ellipticity lower bound
    pub a0: f64,
}

impl Coefficients {
    /// Sample closed-form coefficients; B' by a tight central difference.
    pub fn from_fns(
        mesh: &SpatialMesh,
        a: impl Fn(f64) -> f64,
        b: impl Fn(f64) -> f64,
        c: impl Fn(f64) -> f64,
        a0: f64,
    ) -> Result<Self, SpatialError> {
        let h = mesh.h();
        let mut a_half = Vec::with_capacity(mesh.n_interior + 1);
        for i in 0..=mesh.n_interior {
            let x = mesh.x_left + (i as f64 + 0.5) * h;
            let v = a(x);
            if !(v >= a0) || a0 <= 0.0 {
                return Err(SpatialError::EllipticityViolated { x, value: v, a0 });
            }
            a_half.push(v);
        }
        let delta = (mesh.x_right - mesh.x_left) * 1e-6;
        let xs = mesh.interior_nodes();
        Ok(Self {
            a_half,
            a_left: a(mesh.x_left),
            a_right: a(mesh.x_right),
            b_nodes: xs.iter().map(|&x| b(x)).collect(),
            c_nodes: xs.iter().map(|&x| c(x)).collect(),
            b_prime_nodes: xs
                .iter()
                .map(|&x| (b(x + delta) - b(x - delta)) / (2.0 * delta))
                .collect(),
            b_left: b(mesh.x_left),
            b_right: b(mesh.x_right),
            a0,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.b_nodes.iter().all(|&b| b == 0.0) && self.c_nodes.iter().all(|&c| c == 0.0)
    }
}

/// Symmetric tridiagonal operator (the discrete A0).
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// couplings to the two boundary points, used when a lifting carries
    /// nonzero Dirichlet data
    bdy: (f64, f64),
}

impl TridiagonalOperator {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.apply_with_boundary(u, 0.0, 0.0)
    }

    /// Apply the stencil with explicit boundary values (used by liftings).
    pub fn apply_with_boundary(&self, u: &[f64], left: f64, right: f64) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * u[i];
            if i > 0 {
                v += self.off[i - 1] * u[i - 1];
            } else {
                v += self.off_boundary_left() * left;
            }
            if i + 1 < n {
                v += self.off[i] * u[i + 1];
            } else {
                v += self.off_boundary_right() * right;
            }
            out[i] = v;
        }
        out
    }

    fn off_boundary_left(&self) -> f64 {
        self.bdy.0
    }
    fn off_boundary_right(&self) -> f64 {
        self.bdy.1
    }
}

/// A0 in conservative form: (A0 u)_i =
/// -(a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1}))/h^2, Dirichlet rows.
pub fn assemble_a0(mesh: &SpatialMesh, coeff: &Coefficients) -> TridiagonalOperator {
    let n = mesh.n_interior;
    let h2 = mesh.h() * mesh.h();
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n {
        diag.push((coeff.a_half[i] + coeff.a_half[i + 1]) / h2);
        if i + 1 < n {
            off.push(-coeff.a_half[i + 1] / h2);
        }
    }
    TridiagonalOperator {
        bdy: (-coeff.a_half[0] / h2, -coeff.a_half[n] / h2),
        diag,
        off,
    }
}

/// Full eigensystem of the discrete A0, orthonormal in the h-weighted inner
/// product, signs fixed so each first interior value is positive.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub lambdas: Vec<f64>,
    pub phis: Vec<Vec<f64>>,
    pub h: f64,
}

impl EigenBasis {
    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    /// Modal coordinates <u, phi_n>_h.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        self.phis
            .iter()
            .map(|phi| self.h * phi.iter().zip(u).map(|(p, v)| p * v).sum::<f64>())
            .collect()
    }

    /// Nodal field from modal coordinates.
    pub fn synthesize(&self, coords: &[f64]) -> Vec<f64> {
        let n = self.phis[0].len();
        let mut out = vec![0.0; n];
        for (c, phi) in coords.iter().zip(&self.phis) {
            for (o, p) in out.iter_mut().zip(phi) {
                *o += c * p;
            }
        }
        out
    }
}

pub fn eigendecompose(op: &TridiagonalOperator, h: f64) -> Result<EigenBasis, SpatialError> {
    let (lambdas, mut vectors) = symmetric_tridiagonal_eigen(&op.diag, &op.off)?;
    let scale = 1.0 / h.sqrt();
    for v in &mut vectors {
        let flip = if v[0] < 0.0 { -scale } else { scale };
        for x in v.iter_mut() {
            *x *= flip;
        }
    }
    Ok(EigenBasis {
        lambdas,
        phis: vectors,
        h,
    })
}

/// B u' + c u with central differences and explicit boundary values.
pub fn first_order_with(
    mesh: &SpatialMesh,
    b: &[f64],
    c: &[f64],
    u: &[f64],
    left: f64,
    right: f64,
) -> Vec<f64> {
    let n = mesh.n_interior;
    let two_h = 2.0 * mesh.h();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let um = if i > 0 { u[i - 1] } else { left };
        let up = if i + 1 < n { u[i + 1] } else { right };
        out[i] = b[i] * (up - um) / two_h + c[i] * u[i];
    }
    out
}

/// B u' + c u for a zero-boundary field.
pub fn apply_first_order(mesh: &SpatialMesh, coeff: &Coefficients, u: &MeshField) -> MeshField {
    MeshField::new(
        *mesh,
        first_order_with(mesh, &coeff.b_nodes, &coeff.c_nodes, &u.values, 0.0, 0.0),
    )
}

/// -(d/dx)(B u) by the central divergence stencil; boundary neighbors zero.
pub fn apply_divergence_form(mesh: &SpatialMesh, coeff: &Coefficients, u: &MeshField) -> MeshField {
    let n = mesh.n_interior;
    let two_h = 2.0 * mesh.h();
    let b = &coeff.b_nodes;
    let v = &u.values;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let lo = if i > 0 { b[i - 1] * v[i - 1] } else { 0.0 };
        let hi = if i + 1 < n { b[i + 1] * v[i + 1] } else { 0.0 };
        out[i] = -(hi - lo) / two_h;
    }
    MeshField::new(*mesh, out)
}

/// Conormal derivative a u_x nu at one endpoint of a zero-boundary field,
/// one-sided second-order stencil through the boundary zero.
pub fn conormal_flux(
    mesh: &SpatialMesh,
    coeff: &Coefficients,
    u: &[f64],
    side: Side,
) -> Result<f64, SpatialError> {
    let n = mesh.n_interior;
    if n < 2 {
        return Err(SpatialError::TooFewNodes { needed: 2, got: n });
    }
    let two_h = 2.0 * mesh.h();
    Ok(match side {
        // u_x(x_R) ~ (u_{N-1} - 4 u_N + 3*0)/(2h), outward normal +1
        Side::Right => coeff.a_right * (u[n - 2] - 4.0 * u[n - 1]) / two_h,
        // mirrored with outward normal -1
        Side::Left => -coeff.a_left * (4.0 * u[0] - u[1]) / two_h,
    })
}

/// A0^gamma u through the eigenexpansion.
pub fn fractional_power_apply(basis: &EigenBasis, gamma: f64, u: &MeshField) -> MeshField {
    let mut coords = basis.project(&u.values);
    for (c, l) in coords.iter_mut().zip(&basis.lambdas) {
        *c *= l.powf(gamma);
    }
    MeshField::new(u.mesh, basis.synthesize(&coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_mesh(n: usize) -> SpatialMesh {
        SpatialMesh::new(0.0, 1.0, n)
    }

    fn unit_coeff(mesh: &SpatialMesh) -> Coefficients {
        Coefficients::from_fns(mesh, |_| 1.0, |_| 0.0, |_| 0.0, 1.0).unwrap()
    }

    #[test]
    fn stencil_matches_hand_arithmetic() {
        // a=1, n=3 on (0,1): h=1/4, diagonal 32, off-diagonal -16
        let mesh = unit_mesh(3);
        let op = assemble_a0(&mesh, &unit_coeff(&mesh));
        for d in &op.diag {
            assert!((d - 32.0).abs() < 1e-12);
        }
        for o in &op.off {
            assert!((o + 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_elliptic_coefficient() {
        let mesh = unit_mesh(15);
        let r = Coefficients::from_fns(&mesh, |x| 1.0 - 2.0 * x, |_| 0.0, |_| 0.0, 0.5);
        assert!(matches!(r, Err(SpatialError::EllipticityViolated { .. })));
    }

    #[test]
    fn laplacian_eigenpairs_closed_form() {
        let mesh = unit_mesh(24);
        let h = mesh.h();
        let basis = eigendecompose(&assemble_a0(&mesh, &unit_coeff(&mesh)), h).unwrap();
        for k in 1..=mesh.n_interior {
            let want = 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
            let got = basis.lambdas[k - 1];
            assert!(((got - want) / want).abs() < 1e-10, "k={k}");
        }
        // Gram matrix within 1e-12
        for a in 0..basis.n_modes() {
            for b in a..basis.n_modes() {
                let dot = h * basis.phis[a]
                    .iter()
                    .zip(&basis.phis[b])
                    .map(|(x, y)| x * y)
                    .sum::<f64>();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "a={a} b={b}: {dot}");
            }
        }
        // sign convention
        for phi in &basis.phis {
            assert!(phi[0] > 0.0);
        }
    }

    #[test]
    fn lambda1_richardson_extrapolates_to_pi_squared() {
        let l1 = |n: usize| -> f64 {
            let mesh = unit_mesh(n);
            let basis =
                eigendecompose(&assemble_a0(&mesh, &unit_coeff(&mesh)), mesh.h()).unwrap();
            basis.lambdas[0]
        };
        let (a, b) = (l1(99), l1(199));
        let extrap = (4.0 * b - a) / 3.0;
        assert!(
            (extrap - PI * PI).abs() < 1e-3,
            "extrapolated {extrap} vs {}",
            PI * PI
        );
    }

    #[test]
    fn variable_coefficient_spectrum_bounded_below() {
        // smallest eigenvalue of A0 with a(x)=1+x^2/2 >= a0 * lambda_1(Laplacian)
        let mesh = unit_mesh(40);
        let coeff = Coefficients::from_fns(&mesh, |x| 1.0 + 0.5 * x * x, |_| 0.0, |_| 0.0, 1.0)
            .unwrap();
        let basis = eigendecompose(&assemble_a0(&mesh, &coeff), mesh.h()).unwrap();
        let lap = eigendecompose(&assemble_a0(&mesh, &unit_coeff(&mesh)), mesh.h()).unwrap();
        assert!(basis.lambdas[0] >= 1.0 * lap.lambdas[0] - 1e-9);
    }

    #[test]
    fn first_order_identity_map() {
        let mesh = unit_mesh(17);
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.0, |_| 1.0, 1.0).unwrap();
        let u = MeshField::sample(mesh, |x| x * (1.0 - x));
        let out = apply_first_order(&mesh, &coeff, &u);
        for (a, b) in out.values.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn first_order_derivative_accuracy() {
        let mesh = unit_mesh(63);
        let h = mesh.h();
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 1.0, |_| 0.0, 1.0).unwrap();
        let u = MeshField::sample(mesh, |x| (PI * x).sin());
        let out = apply_first_order(&mesh, &coeff, &u);
        for (i, v) in out.values.iter().enumerate() {
            let x = mesh.node(i + 1);
            let want = PI * (PI * x).cos();
            // central stencil reaches the boundary zeros exactly, so the
            // estimate is uniform O(h^2)
            assert!((v - want).abs() < 2.0 * PI * h * h + 1e-12, "x={x}");
        }
    }

    #[test]
    fn divergence_form_product_rule() {
        // -d/dx(B u) = -B u' - B' u for B = 1+x, u = x(1-x):
        // exact: -(d/dx)[(1+x)x(1-x)] = -(1 + 2x - 3x^2 - ... ) worked out
        // via the polynomial p(x) = x + x^2 - x^2 - x^3 ... = x - x^3 + ...
        let mesh = unit_mesh(127);
        let h = mesh.h();
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |x| 1.0 + x, |_| 0.0, 1.0).unwrap();
        let u = MeshField::sample(mesh, |x| x * (1.0 - x));
        let got = apply_divergence_form(&mesh, &coeff, &u);
        for (i, v) in got.values.iter().enumerate() {
            let x = mesh.node(i + 1);
            if i == 0 || i + 1 == mesh.n_interior {
                continue; // stencil truncates Bu at the boundary neighbors
            }
            let want = -((1.0 + x) * (1.0 - 2.0 * x) + x * (1.0 - x));
            assert!((v - want).abs() < 10.0 * h * h, "x={x}: {v} vs {want}");
        }
        // and it agrees with the expanded form -B u' - B' u
        let expanded = first_order_with(
            &mesh,
            &coeff.b_nodes.iter().map(|b| -b).collect::<Vec<_>>(),
            &coeff.b_prime_nodes.iter().map(|b| -b).collect::<Vec<_>>(),
            &u.values,
            0.0,
            0.0,
        );
        for i in 1..mesh.n_interior - 1 {
            assert!((got.values[i] - expanded[i]).abs() < 10.0 * h * h);
        }
    }

    #[test]
    fn flux_of_zero_field() {
        let mesh = unit_mesh(9);
        let coeff = unit_coeff(&mesh);
        let u = MeshField::zeros(mesh);
        assert_eq!(conormal_flux(&mesh, &coeff, &u.values, Side::Right).unwrap(), 0.0);
        assert_eq!(conormal_flux(&mesh, &coeff, &u.values, Side::Left).unwrap(), 0.0);
    }

    #[test]
    fn flux_analytic_profiles() {
        for &n in &[31usize, 63, 127] {
            let mesh = unit_mesh(n);
            let h = mesh.h();
            let coeff = unit_coeff(&mesh);
            let u = MeshField::sample(mesh, |x| (PI * x).sin());
            let f = conormal_flux(&mesh, &coeff, &u.values, Side::Right).unwrap();
            assert!((f + PI).abs() < 4.0 * h * h * PI.powi(3) / 3.0 + 1e-12, "n={n}: {f}");
            // left side: outward derivative of sin(pi x) at 0 is -pi... the
            // conormal is -a u_x(0) = -pi
            let fl = conormal_flux(&mesh, &coeff, &u.values, Side::Left).unwrap();
            assert!((fl + PI).abs() < 4.0 * h * h * PI.powi(3) / 3.0 + 1e-12, "n={n}: {fl}");

            let coeff2 =
                Coefficients::from_fns(&mesh, |x| 1.0 + x, |_| 0.0, |_| 0.0, 1.0).unwrap();
            let v = MeshField::sample(mesh, |x| x * (1.0 - x));
            let f2 = conormal_flux(&mesh, &coeff2, &v.values, Side::Right).unwrap();
            assert!((f2 + 2.0).abs() < 8.0 * h * h + 1e-12, "n={n}: {f2}");
        }
    }

    #[test]
    fn flux_converges_second_order() {
        let err = |n: usize| -> f64 {
            let mesh = unit_mesh(n);
            let coeff = unit_coeff(&mesh);
            let u = MeshField::sample(mesh, |x| (PI * x).sin());
            (conormal_flux(&mesh, &coeff, &u.values, Side::Right).unwrap() + PI).abs()
        };
        let (e1, e2) = (err(32), err(64));
        let rate = (e1 / e2).log2();
        assert!(rate > 1.8, "observed order {rate}");
    }

    #[test]
    fn fractional_power_basics() {
        let mesh = unit_mesh(20);
        let basis = eigendecompose(&assemble_a0(&mesh, &unit_coeff(&mesh)), mesh.h()).unwrap();
        let u = MeshField::sample(mesh, |x| x * x * (1.0 - x));
        // gamma = 0 is the identity
        let id = fractional_power_apply(&basis, 0.0, &u);
        for (a, b) in id.values.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-10);
        }
        // gamma = 1 on an eigenvector scales by its eigenvalue
        let phi2 = MeshField::new(mesh, basis.phis[1].clone());
        let a_phi2 = fractional_power_apply(&basis, 1.0, &phi2);
        for (a, b) in a_phi2.values.iter().zip(&basis.phis[1]) {
            assert!((a - basis.lambdas[1] * b).abs() < 1e-9);
        }
        // half power applied twice is the full power
        let half_twice = fractional_power_apply(
            &basis,
            0.5,
            &fractional_power_apply(&basis, 0.5, &u),
        );
        let full = fractional_power_apply(&basis, 1.0, &u);
        for (a, b) in half_twice.values.iter().zip(&full.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_completeness() {
        let mesh = unit_mesh(33);
        let basis = eigendecompose(&assemble_a0(&mesh, &unit_coeff(&mesh)), mesh.h()).unwrap();
        let u = MeshField::sample(mesh, |x| (3.0 * x).sin() + x.exp() * 0.1 - 0.1);
        let back = basis.synthesize(&basis.project(&u.values));
        for (a, b) in back.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn discrete_ellipticity() {
        // <A0 u, u>_h >= a0 <Du, Du>_h with D the forward difference through
        // the boundary zeros
        let mesh = unit_mesh(25);
        let h = mesh.h();
        let coeff =
            Coefficients::from_fns(&mesh, |x| 1.0 + 0.5 * x * x, |_| 0.0, |_| 0.0, 1.0).unwrap();
        let op = assemble_a0(&mesh, &coeff);
        let mut state = 123456789u64;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..100 {
            let u: Vec<f64> = (0..mesh.n_interior).map(|_| rng()).collect();
            let au = op.apply(&u);
            let quad: f64 = h * au.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
            let mut dd = 0.0;
            for i in 0..=mesh.n_interior {
                let lo = if i == 0 { 0.0 } else { u[i - 1] };
                let hi = if i == mesh.n_interior { 0.0 } else { u[i] };
                dd += ((hi - lo) / h).powi(2);
            }
            dd *= h;
            assert!(quad >= coeff.a0 * dd - 1e-9 * dd.max(1.0));
        }
    }
}
