use fracwave::mlf::{mlf_eval, MlfParams};
fn main() {
    for &a in &[1.1f64, 1.5, 1.9] {
        let mut best = (0.0f64, 0.0f64);
        let mut x = 1.0f64;
        while x <= 1e6 {
            let v = mlf_eval(MlfParams::new(a, 1.0).unwrap(), -x).unwrap();
            let q = v.abs() * (1.0 + x);
            if q > best.0 { best = (q, x); }
            x *= 1.02;
        }
        println!("alpha={a}: max |E|(1+x) = {:.4} at x = {:.1}", best.0, best.1);
    }
}
