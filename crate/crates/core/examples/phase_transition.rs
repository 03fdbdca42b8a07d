//! Standardized free energy of the boundary-perturbed trapezoid in both
//! phases, with KS distances to each limit law.
//!
//! Usage: `cargo run --release --example phase_transition -- [replicas] [n...]`

use lgpoly::asymptotics::gaussian_cdf;
use lgpoly::harness::*;

fn main() -> lgpoly::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let replicas = args.first().copied().unwrap_or(2000);
    let ns = if args.len() > 1 { args[1..].to_vec() } else { vec![16, 32, 64] };
    let gue = TabulatedCdf::gue()?;
    for theta0 in [0.3, 2.0] {
        let cfg = PhaseConfig { theta: 2.0, theta0, p: 1.0, ns: ns.clone(), replicas, phase: None };
        for (row, res) in run_phase(&cfg, 2024, &gue)? {
            let d = res.distribution()?;
            let vs_gue = ks_one_sample(&d, |t| gue.eval(t), KsLevel::P01)?.statistic;
            let vs_normal = ks_one_sample(&d, gaussian_cdf, KsLevel::P01)?.statistic;
            println!(
                "theta0={theta0} n={:4} phase={:?} mean={:+.4} sd={:.4} D_gue={:.4} D_normal={:.4}",
                row.n, row.phase, row.mean, row.std_dev, vs_gue, vs_normal
            );
        }
    }
    Ok(())
}
