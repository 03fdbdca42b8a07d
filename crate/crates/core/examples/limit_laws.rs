//! Tabulates the GUE Tracy-Widom law and BBP deformations.
//!
//! Usage: `cargo run --release --example limit_laws`

use lgpoly::asymptotics::*;

fn main() -> lgpoly::Result<()> {
    let spec = FredholmSpec::default();
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "t", "GUE", "BBP(-8)", "BBP(0)", "normal");
    for k in 0..=12 {
        let t = -5.0 + 0.5 * k as f64;
        println!(
            "{t:>5.1} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
            f_gue(t, &spec)?,
            f_bbp(t, &[-8.0], &spec)?,
            f_bbp(t, &[0.0], &spec)?,
            gaussian_cdf(t)
        );
    }
    let c = phase_constants(&AsymptoticConfig { theta: 2.0, theta0: 0.3, n: 100, m: 100 })?;
    println!("theta=2, p=1: theta_c={:.6} f={:.6} f_bar={:?} sigma={:.6}", c.theta_c, c.f, c.f_bar, c.sigma);
    Ok(())
}
