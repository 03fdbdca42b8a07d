//! Runs geometric RSK on a random array and prints every identity check,
//! then the same for a symmetric array on a symmetric union.
//!
//! Usage: `cargo run --release --example grsk_identities`

use lgpoly::grsk::*;
use lgpoly::harness::derive_seed;
use lgpoly::polymer::PolygonalDomain;

fn show(label: &str, rep: &GrskReport) {
    println!("{label}: {} cells", rep.cells);
    for c in &rep.checks {
        let state = if c.skipped {
            "skipped"
        } else if c.pass {
            "pass"
        } else {
            "FAIL"
        };
        println!("  {:<18} {:>10.2e}  {state}", c.name, c.error);
    }
}

fn main() -> lgpoly::Result<()> {
    let mut rng = derive_seed(3, 0);
    let tol = GrskTolerances::default();

    let a = random_array(&PolygonalDomain::rectangle(4, 6)?, 1.0, &mut rng)?;
    let out = grsk(&a)?;
    println!("t(4, 6) = {:.6}, tau_2 = {:.6}", out.t.get(4, 6).unwrap(), out.tau[&2].log_value.exp());
    show("rectangle 4x6", &verify_grsk_properties(&a, &tol)?);

    let s = random_symmetric_array(&PolygonalDomain::symmetric_union(2, 1)?, 1.0, &mut rng)?;
    show("symmetric union (2, 1)", &verify_grsk_properties(&s, &tol)?);
    println!("diagonal of t: {:.5?}", diagonal(&grsk_symmetric(&s)?.t));
    Ok(())
}
