use fracwave::forward::*;
use fracwave::fracops::{TimeGrid, TimeSeries};
use fracwave::inverse::*;
use fracwave::spatial::*;
use std::f64::consts::PI;

fn template(n: usize, nt: usize) -> ProblemSpec {
    let mesh = SpatialMesh::new(0.0, 1.0, n);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.3, |_| 0.1, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, nt);
    ProblemSpec {
        alpha: 1.5, mesh, coeff, grid,
        init_pos: MeshField::zeros(mesh), init_vel: MeshField::zeros(mesh),
        source: Source::Separable(SeparableSource {
            f: MeshField::zeros(mesh),
            g: TimeSeries::sample(grid, |t| 1.0 + t),
            g0: 1.0,
            g_prime: Some(TimeSeries::sample(grid, |_| 1.0)),
        }),
        observe: vec![Side::Right], n_modes: None,
    }
}

fn main() {
    for (nc, ntc) in [(31usize, 96usize), (63, 256)] {
        let coarse = template(nc, ntc);
        let fine = template(2 * nc + 1, 2 * ntc);
        let map = ForwardMap::assemble(&coarse, true).unwrap();
        let fine_map = ForwardMap::assemble(&fine, false).unwrap();
        let truth_fine = MeshField::sample(fine.mesh, |x| (PI * x).sin());
        let truth = MeshField::sample(coarse.mesh, |x| (PI * x).sin());
        let data = restrict_trace(&fine_map.apply(&truth_fine).unwrap(), 2);
        // model-mismatch magnitude
        let kd = map.apply(&truth).unwrap();
        let mut dd = kd.clone();
        for ((_, a), (_, b)) in dd.traces.iter_mut().zip(&data.traces) {
            for (x, y) in a.iter_mut().zip(b) { *x -= y; }
        }
        println!("(n={nc},nt={ntc}) mismatch/|d| = {:.3e}", dd.data_norm() / data.data_norm());
        for lam in [1e-10, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4] {
            let rep = reconstruct(&map, &data, lam, ReconstructionMethod::NormalEquations, 0, 0.0, Some(&truth)).unwrap();
            println!("  lambda={lam:.0e}: rel err {:.3e}, resid {:.3e}", rep.relative_error.unwrap(), rep.data_residual);
        }
    }
}
