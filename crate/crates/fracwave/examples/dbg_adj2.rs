use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn main() {
    for (n, nt) in [(15usize,160usize),(31,160),(47,384)] {
        let mesh = SpatialMesh::new(0.0, 1.0, n);
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.3, |_| 0.1, 1.0).unwrap();
        let spec = ProblemSpec {
            alpha: 1.5, mesh, coeff, grid: TimeGrid::new(1.0, nt),
            init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
            source: Source::None, observe: vec![Side::Right], n_modes: None,
        };
        let prop = Propagator::new(&spec).unwrap();
        let f = MeshField::new(mesh, prop.basis.phis[0].iter().zip(&prop.basis.phis[1])
            .map(|(a,b)| a + 0.3*b).collect::<Vec<_>>());
        let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
        let probe = &probe_dictionary(Side::Right, 2, spec.grid)[1];
        let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
        println!("prototype replica (n={n} nt={nt}): rel={:.3e}", r.rel_residual);
    }
}
