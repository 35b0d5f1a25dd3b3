use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn main() {
    let (n, nt) = (47usize, 384usize);
    for &alpha in &[1.2f64, 1.5, 1.8] {
        for &(b, c) in &[(0.0, 0.0), (0.5, 0.2), (-0.4, 0.3)] {
            let mesh = SpatialMesh::new(0.0, 1.0, n);
            let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |x| b * (1.0 + 0.2*x), |_| c, 1.0).unwrap();
            let spec = ProblemSpec {
                alpha, mesh, coeff, grid: TimeGrid::new(1.0, nt),
                init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
                source: Source::None, observe: vec![Side::Right], n_modes: None,
            };
            let prop = Propagator::new(&spec).unwrap();
            let f = MeshField::new(mesh, prop.basis.phis[0].iter().zip(&prop.basis.phis[1])
                .map(|(a,q)| a + 0.3*q).collect::<Vec<_>>());
            let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
            let mut worst = 0.0f64;
            let mut worst_k = 0;
            for (i, probe) in probe_dictionary(Side::Right, 8, spec.grid).iter().enumerate() {
                let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
                if r.rel_residual > worst { worst = r.rel_residual; worst_k = i+1; }
            }
            println!("alpha={alpha} B={b} c={c}: worst rel={:.3e} (k={worst_k})", worst);
        }
    }
}
