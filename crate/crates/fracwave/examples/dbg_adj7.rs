use fracwave::adjoint::*;
use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::spatial::*;

fn main() {
    let (n, nt) = (119usize, 512usize);
    let mut worst_sym = 0.0f64;
    let mut worst_nonsym = 0.0f64;
    for &alpha in &[1.2f64, 1.35, 1.5] {
        for &(b, c) in &[(0.0, 0.0), (0.5, 0.2), (-0.4, 0.3)] {
            let mesh = SpatialMesh::new(0.0, 1.0, n);
            let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |x| b * (1.0 + 0.2 * x), |_| c, 1.0).unwrap();
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
            let mut worst = 0.0f64;
            for probe in &probes {
                let r = integral_identity_residual(&prop, &f, &g, 1.0, probe).unwrap();
                worst = worst.max(r.rel_residual);
            }
            println!("alpha={alpha} B={b} c={c}: worst rel={worst:.3e}");
            if b == 0.0 && c == 0.0 { worst_sym = worst_sym.max(worst); } else { worst_nonsym = worst_nonsym.max(worst); }
        }
    }
    println!("SYM worst {worst_sym:.3e} (tol 1e-3) | NONSYM worst {worst_nonsym:.3e} (tol 5e-3)");
}
