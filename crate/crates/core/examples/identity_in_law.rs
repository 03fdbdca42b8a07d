//! Two-sample KS test of the trapezoidal point-to-line free energy against
//! the full-space point-to-point one.
//!
//! Usage: `cargo run --release --example identity_in_law -- [replicas]`

use lgpoly::harness::{identity_test, KsLevel};
use lgpoly::suites::generic_params;

fn main() -> lgpoly::Result<()> {
    let replicas = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    for (n, m) in [(2, 0), (2, 1), (3, 0), (3, 2)] {
        let rep = identity_test(&generic_params(n, m)?, replicas, 5, KsLevel::P01)?;
        println!(
            "(n, m) = ({n}, {m}): mean {:.4} vs {:.4}, D = {:.5}, critical {:.5}, {}",
            rep.mean_trapezoid,
            rep.mean_full,
            rep.ks.statistic,
            rep.ks.critical_value,
            if rep.ks.pass { "same law" } else { "rejected" }
        );
    }
    Ok(())
}
