use fracwave::mlf::{mlf_eval, MlfParams};
fn ml(a: f64, b: f64, z: f64) -> f64 { mlf_eval(MlfParams::new(a,b).unwrap(), z).unwrap() }
fn main() {
    let pi2 = std::f64::consts::PI.powi(2);
    println!("E(1.5,1)(-pi2)   = {:.17e}  want -0.11527434844270770233", ml(1.5,1.0,-pi2));
    println!("E(1.5,2)(-pi2)   = {:.17e}  want 0.047280700116898284526", ml(1.5,2.0,-pi2));
    println!("E(1.5,1.5)(-pi2) = {:.17e}  want -0.064553960955387570156", ml(1.5,1.5,-pi2));
    for &(a,b,x) in &[(1.1,1.0,4.0),(1.1,1.0,40.0),(1.5,2.0,9.0),(1.9,1.9,200.0),(1.1,0.1,40.0)] {
        let lhs = ml(a,b,-x);
        let rhs = -x*ml(a,b+a,-x) + fracwave::special::recip_gamma(b);
        println!("recur a={a} b={b} x={x}: lhs={lhs:.15e} rhs={rhs:.15e} rel={:.2e}", ((lhs-rhs)/lhs).abs());
    }
    for &x in &[1.0, 2.1, 4.4, 9.3, 28.0, 60.0, 125.0] {
        let v = ml(1.9,1.0,-x);
        println!("decay a=1.9 x={x}: |E|(1+x) = {:.3}", v.abs()*(1.0+x));
    }
}
