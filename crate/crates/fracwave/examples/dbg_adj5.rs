use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn run(n: usize, nt: usize, alpha: f64, b: f64, c: f64) {
    let mesh = SpatialMesh::new(0.0, 1.0, n);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| b, |_| c, 1.0).unwrap();
    let spec = ProblemSpec {
        alpha, mesh, coeff, grid: TimeGrid::new(1.0, nt),
        init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
        source: Source::None, observe: vec![Side::Right], n_modes: None,
    };
    let prop = Propagator::new(&spec).unwrap();
    let f = MeshField::new(mesh, prop.basis.phis[0].clone());
    let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
    let mut worst = 0.0f64;
    for probe in &probe_dictionary(Side::Right, 8, spec.grid) {
        let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
        worst = worst.max(r.rel_residual);
    }
    println!("n={n} nt={nt} alpha={alpha} B={b} c={c}: worst rel={worst:.3e}");
}

fn main() {
    run(47, 768, 1.6, 0.0, 0.0);
    run(47, 1024, 1.6, 0.0, 0.0);
    run(47, 1024, 1.2, 0.0, 0.0);
    run(47, 1024, 1.4, 0.0, 0.0);
    run(47, 1024, 1.6, 0.5, 0.2);
    run(63, 1024, 1.6, 0.0, 0.0);
}
