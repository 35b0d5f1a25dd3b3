use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn main() {
    let (n, nt) = (47usize, 384usize);
    for &alpha in &[1.5f64, 1.8] {
        let mesh = SpatialMesh::new(0.0, 1.0, n);
        let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.5, |_| 0.2, 1.0).unwrap();
        let spec = ProblemSpec {
            alpha, mesh, coeff, grid: TimeGrid::new(1.0, nt),
            init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
            source: Source::None, observe: vec![Side::Right], n_modes: None,
        };
        let prop = Propagator::new(&spec).unwrap();
        let f = MeshField::new(mesh, prop.basis.phis[0].clone());
        let g = TimeSeries::sample(spec.grid, |t| 1.0 + t);
        let src = Source::separable(f.clone(), g.clone(), 1.0);
        let zero = MeshField::zeros(mesh);
        let u = prop.solve_general(&zero, &zero, &src).unwrap();
        let flux = measure_flux(&u, &prop.coeff, &[Side::Right]).unwrap();
        let phi_norm = flux.data_norm();
        let mut num = 0.0; let mut den = 0.0;
        for (i, probe) in probe_dictionary(Side::Right, 8, spec.grid).iter().enumerate() {
            let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
            num += r.abs_residual.powi(2);
            den += r.flux_side.powi(2);
            println!("  alpha={alpha} k={} flux={:+.4e} abs_res={:.2e} rel={:.2e} vs_CS={:.2e}",
                i+1, r.flux_side, r.abs_residual, r.rel_residual, r.abs_residual/phi_norm);
        }
        println!("alpha={alpha}: ||flux||={phi_norm:.4e} aggregate rel={:.3e}", (num/den).sqrt());
    }
}
