//! Evaluates Whittaker functions by tensor quadrature and checks the
//! transform identities and the translation property.
//!
//! Usage: `cargo run --release --example whittaker_transforms`

use lgpoly::suites::{whittaker_suite, WhittakerSelection};
use lgpoly::whittaker::{whittaker_gl, whittaker_so, QuadratureSpec};

fn main() -> lgpoly::Result<()> {
    let spec = QuadratureSpec::tensor(64);
    let psi = whittaker_gl(&[0.4, -0.2], &[0.8, 1.9], &spec)?;
    println!(
        "gl2 Psi(0.8, 1.9) = {:.10e} (rel. error {:.1e}, {} evaluations)",
        psi.value.value(),
        psi.rel_error,
        psi.evaluations
    );
    let so = whittaker_so(&[0.3], &[1.0], &spec)?;
    println!("so3 Psi(1.0) = {:.10e}", so.value.value());

    let rep = whittaker_suite(WhittakerSelection::All)?;
    for c in &rep.checks {
        println!("{:<22} lhs={:.10e} rhs={:.10e} gap={:.1e}", c.name, c.lhs, c.rhs, c.discrepancy);
    }
    Ok(())
}
