use fracwave::mlf::{series, asymptotic};
fn main() {
    for &(a, b, x) in &[(1.1, 1.1, 40.0), (1.1, 2.2, 40.0)] {
        let (s, cond) = series(a, b, -x);
        let (v, fl) = asymptotic(a, b, -x);
        println!("a={a} b={b} x={x}: series={s:.15e} cond={cond:.2e} | asym={v:.15e} floor_rel={fl:.2e}");
        println!("   |s-a| = {:.2e}, 1e-9*max = {:.2e}", (s-v).abs(), 1e-9*s.abs().max(v.abs()));
    }
}
