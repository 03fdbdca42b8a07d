//! Compares the contour formula for `E[exp(-rZ)]` with Monte Carlo on both
//! samplers.
//!
//! Usage: `cargo run --release --example laplace_transform -- [replicas]`

use lgpoly::harness::derive_seed;
use lgpoly::laplace::*;
use lgpoly::polymer::{Model, ParameterSet};

fn main() -> lgpoly::Result<()> {
    let replicas = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let params = ParameterSet::new(0.45, vec![0.7, 1.05], vec![0.55])?;
    let grid = ContourGrid::default();
    for r in [0.1, 1.0, 10.0] {
        let q = LaplaceQuery { r, mu: None, params: params.clone(), variant: ContourVariant::Trapezoid };
        let trap = laplace_contour(&q, &grid)?;
        let full = laplace_contour(&LaplaceQuery { variant: ContourVariant::Fullspace, ..q }, &grid)?;
        let mc_t = laplace_mc(&Model::trapezoid(&params)?, r, replicas, &mut derive_seed(11, 0))?;
        let mc_f = laplace_mc(&Model::full(&params)?, r, replicas, &mut derive_seed(11, 1))?;
        println!(
            "r={r:<4} contour={:.8} (variants differ by {:.1e})  MC trapezoid={:.6}±{:.1e}  MC full={:.6}±{:.1e}",
            trap.value,
            ((trap.value - full.value) / full.value).abs(),
            mc_t.estimate,
            mc_t.stderr,
            mc_f.estimate,
            mc_f.stderr
        );
    }
    Ok(())
}
