fn main() {
    // half-integer exact values
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let cases: &[(f64, f64)] = &[
        (5.5, 945.0/32.0*sqrt_pi),
        (2.5, 3.0/4.0*sqrt_pi),
        (10.5, 9.5*8.5*7.5*6.5*5.5*4.5*3.5*2.5*1.5*0.5*sqrt_pi),
        (1.5, 0.5*sqrt_pi),
        (20.0, 121645100408832000.0),
        (7.0, 720.0),
    ];
    for &(x, want) in cases {
        let got = statrs::function::gamma::gamma(x);
        println!("gamma({x:5}) statrs rel err = {:9.2e}", ((got-want)/want).abs());
    }
    for &x in &[5.5f64, 10.5, 30.5, 100.25] {
        let lg = statrs::function::gamma::ln_gamma(x);
        let gg = statrs::function::gamma::gamma(x);
        println!("ln_gamma({x}) vs ln(gamma): {:9.2e}", (lg - gg.ln()).abs()/lg.abs());
    }
}
