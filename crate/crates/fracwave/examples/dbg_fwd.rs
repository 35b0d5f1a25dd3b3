use fracwave::forward::*;
use fracwave::fracops::TimeGrid;
use fracwave::spatial::*;
use std::f64::consts::PI;

fn deltas_for(cval: f64, t_end: f64, nt: usize) {
    let mesh = SpatialMesh::new(0.0, 1.0, 21);
    let coeff = Coefficients::from_fns(&mesh, |_| 1.0, |_| 0.0, |_| cval, 1.0).unwrap();
    let spec = ProblemSpec {
        alpha: 1.5, mesh, coeff, grid: TimeGrid::new(t_end, nt),
        init_pos: MeshField::sample(mesh, |x| (PI * x).sin()),
        init_vel: MeshField::zeros(mesh),
        source: Source::None, observe: vec![Side::Right], n_modes: None,
    };
    let prop = Propagator::new(&spec).unwrap();
    let r = prop.picard(&spec.init_pos, &spec.init_vel, &spec.source, 80, 1e-10).unwrap();
    let ratios: Vec<String> = r.deltas.windows(2).map(|w| format!("{:.4}", w[1]/w[0])).collect();
    println!("c={cval} T={t_end}: {} iters conv={} ratios={:?}", r.deltas.len(), r.converged, ratios);
}

fn main() {
    deltas_for(3.0, 1.0, 96);
    deltas_for(4.0, 1.0, 96);
    deltas_for(5.0, 0.75, 96);
    deltas_for(6.0, 1.0, 96);
}
