use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;
use std::f64::consts::PI;

fn run(n: usize, nt: usize, b: f64, c: f64, k: usize, gfun: fn(f64)->f64, label: &str) {
    let mesh = SpatialMesh::new(0.0, 1.0, n);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| b, |_| c, 1.0).unwrap();
    let spec = ProblemSpec {
        alpha: 1.5, mesh, coeff, grid: TimeGrid::new(1.0, nt),
        init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
        source: Source::None, observe: vec![Side::Right], n_modes: None,
    };
    let prop = Propagator::new(&spec).unwrap();
    let f = MeshField::new(mesh, prop.basis.phis[0].clone());
    let g = TimeSeries::sample(spec.grid, gfun);
    let probe = &probe_dictionary(Side::Right, k, spec.grid)[k-1];
    let r = integral_identity_residual(&prop, &f, &g, gfun(0.0), probe).unwrap();
    println!("{label} (n={n} nt={nt}): flux={:+.6e} bil={:+.6e} rel={:.2e}", r.flux_side, r.bilinear_side, r.rel_residual);
}

fn main() {
    for (n, nt) in [(31usize,160usize),(47,256),(63,384)] {
        run(n, nt, 0.0, 0.0, 1, |_| 1.0, "sym k=1 g=1");
    }
    run(31, 160, 0.0, 0.0, 2, |t| 1.0+t, "sym k=2 g=1+t");
    run(47, 256, 0.5, 0.2, 1, |t| 1.0+t, "nonsym k=1");
    run(47, 384, 0.0, 0.0, 1, |_| 1.0, "sym k=1 fine-t");
    run(63, 160, 0.0, 0.0, 1, |_| 1.0, "sym k=1 fine-x");
}
