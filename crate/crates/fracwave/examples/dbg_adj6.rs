use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn main() {
    for &nt in &[512usize, 1024, 2048] {
        let n = 47;
        let mesh = SpatialMesh::new(0.0, 1.0, n);
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.0, |_| 0.0, 1.0).unwrap();
        let spec = ProblemSpec {
            alpha: 1.2, mesh, coeff, grid: TimeGrid::new(1.0, nt),
            init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
            source: Source::None, observe: vec![Side::Right], n_modes: None,
        };
        let prop = Propagator::new(&spec).unwrap();
        let f = MeshField::new(mesh, prop.basis.phis[0].clone());
        let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
        for &k in &[1usize, 4, 8] {
            let probe = &probe_dictionary(Side::Right, 8, spec.grid)[k-1];
            let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
            println!("nt={nt} k={k}: flux={:+.8e} bil={:+.8e} rel={:.3e}", r.flux_side, r.bilinear_side, r.rel_residual);
        }
    }
}
