use fracwave::fracops::{rl_integral, TimeGrid, TimeSeries};
fn main() {
    for &n in &[256usize, 512, 1024] {
        let g = TimeGrid::new(1.0, n);
        let dt = g.dt();
        let f = TimeSeries::sample(g, |t| (1.3 * t).sin() + t * t);
        for &(p, q) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.6)] {
            let lhs = rl_integral(p, &rl_integral(q, &f).unwrap()).unwrap();
            let rhs = rl_integral(p + q, &f).unwrap();
            let mut worst = (0.0f64, 0usize);
            for m in 0..g.n_nodes() {
                let e = (lhs.values[m] - rhs.values[m]).abs();
                if e > worst.0 { worst = (e, m); }
            }
            println!("n={n} p={p} q={q}: max err {:.3e} at m={} ({}x dt^2), err@m1 {:.2e}, err@m8 {:.2e}",
                worst.0, worst.1, (worst.0/(dt*dt)) as i64,
                (lhs.values[1]-rhs.values[1]).abs(), (lhs.values[8]-rhs.values[8]).abs());
        }
    }
}
