use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::inverse::*;
use fracwave::spatial::*;
use std::f64::consts::PI;

fn main() {
    let n = 21; let nt = 128;
    let mesh = SpatialMesh::new(0.0, 1.0, n);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.3, |_| 0.1, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, nt);
    let template = ProblemSpec {
        alpha: 1.5, mesh, coeff, grid,
        init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
        source: Source::Separable(SeparableSource {
            f: MeshField::zeros(mesh),
            g: TimeSeries::sample(grid, |t| 1.0 + t),
            g0: 1.0,
            g_prime: Some(TimeSeries::sample(grid, |_| 1.0)),
        }),
        observe: vec![Side::Right], n_modes: None,
    };
    let map = ForwardMap::assemble(&template, true).unwrap();
    let psi_profile = TimeSeries::sample(grid, |t| (2.0 * PI * t).sin().powi(2));
    let psi = FluxTrace { grid, traces: vec![(Side::Right, psi_profile.values.clone())] };
    let adj = map.apply_adjoint(&psi).unwrap();
    let tra = map.apply_transpose_weighted(&psi).unwrap();
    for i in (0..n).step_by(2) {
        println!("x={:.3}: adjoint {:+.6e}  transpose {:+.6e}", mesh.node(i+1), adj.values[i], tra[i]);
    }
    // weak pairings on the first eigenmodes
    let prop = &map.prop;
    for k in 0..6 {
        let f = MeshField::new(mesh, prop.basis.phis[k].clone());
        let a: f64 = f.inner(&adj);
        let t: f64 = mesh.h() * f.values.iter().zip(&tra).map(|(x, y)| x * y).sum::<f64>();
        println!("mode {k}: <phi,K*adj>={a:+.6e} <phi,K*dense>={t:+.6e} rel={:.2e}", ((a-t)/t).abs());
    }
}
