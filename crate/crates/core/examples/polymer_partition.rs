//! Samples one weight array on each domain family and prints its partition
//! functions, then the mean free energy of the stationary model.
//!
//! Usage: `cargo run --release --example polymer_partition -- [seed]`

use lgpoly::harness::derive_seed;
use lgpoly::polymer::*;

fn main() -> lgpoly::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = derive_seed(seed, 0);
    let params = ParameterSet::new(0.4, vec![0.9, 1.2, 0.7], vec![0.8])?;
    let (n, m) = (params.n(), params.m());

    let full = PolygonalDomain::rectangle(n, n + m + 1)?;
    let w = sample_weights(&assign_parameters(&full, &Scheme::Full { params: params.clone() })?, &mut rng)?;
    let z = partition_point_to_point(&w, (n, n + m + 1))?;
    println!("rectangle {}x{}: log Z = {:.6} over {:?} paths", n, n + m + 1, z.log_z.log_value, z.path_count);

    let trap = PolygonalDomain::trapezoid(n, m)?;
    let w = sample_weights(&assign_parameters(&trap, &Scheme::Hal { params: params.clone() })?, &mut rng)?;
    let z = partition_point_to_line(&w, n, m)?;
    println!("trapezoid ({n}, {m}), {} cells: point-to-line log Z = {:.6}", trap.len(), z.log_z.log_value);

    let sym = PolygonalDomain::symmetric_union(n, m)?;
    let w = sample_weights(&assign_parameters(&sym, &Scheme::Symmetrized { params })?, &mut rng)?;
    let z = partition_symmetrized(&w, n, m)?;
    println!("symmetric union, {} cells: log Z = {:.6}", sym.len(), z.log_z.log_value);

    let (theta, theta0, size) = (2.0, 0.8, 40);
    let reps = 2000;
    let mean: f64 = (0..reps)
        .map(|k| {
            partition_stationary(theta, theta0, size, size, &mut derive_seed(seed, k + 1)).unwrap().log_z.log_value
        })
        .sum::<f64>()
        / reps as f64;
    println!("stationary {size}x{size} (theta={theta}, theta0={theta0}): mean log Z = {mean:.4} over {reps} replicas");
    Ok(())
}
