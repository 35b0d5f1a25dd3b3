use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn main() {
    for &(n, nt) in &[(119usize, 512usize), (119, 1024), (159, 512)] {
        let alpha = 1.5;
        let mesh = SpatialMesh::new(0.0, 1.0, n);
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.0, |_| 0.0, 1.0).unwrap();
        let spec = ProblemSpec {
            alpha, mesh, coeff, grid: TimeGrid::new(1.0, nt),
            init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
            source: Source::None, observe: vec![Side::Left, Side::Right], n_modes: None,
        };
        let prop = Propagator::new(&spec).unwrap();
        let f = MeshField::new(mesh, prop.basis.phis[0].iter().zip(&prop.basis.phis[1])
            .map(|(a, q)| a + 0.3 * q).collect::<Vec<_>>());
        let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
        let mut probes = probe_dictionary(Side::Right, 4, spec.grid);
        probes.extend(probe_dictionary(Side::Left, 4, spec.grid));
        for (i, probe) in probes.iter().enumerate() {
            let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
            println!("(n={n},nt={nt}) probe {} ({:?}): rel={:.3e}", i % 4 + 1, probe.side, r.rel_residual);
        }
    }
}
