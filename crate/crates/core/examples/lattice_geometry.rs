//! Periodic inclusion families in the unit cube.
//!
//! Counts, volume fraction and separation of `ε`-lattices with
//! `ε^α`-scaled spheres, and the convergence of lattice sums `ε³Σf(xᵢ)` to
//! `∫f`.

use nematic_homog::homogenization::{ParticleShape, RotationField};
use nematic_homog::lattice::{
    check_separation, measure_convergence_check, periodic_volume_fraction, standard_test_functions, BoxDomain,
    InclusionConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = BoxDomain::unit_cube();
    let alpha = 1.25;
    println!("{:>7} {:>6} {:>10} {:>10} {:>9}", "eps", "N", "phi", "lambda", "disjoint");
    for eps in [0.25, 0.125, 0.0625, 0.03125] {
        let config = InclusionConfig::periodic(&domain, eps, alpha, ParticleShape::Sphere, &RotationField::Identity)?;
        let phi = periodic_volume_fraction(&domain, eps, alpha, &ParticleShape::Sphere)?;
        let lambda = check_separation(&config, &domain)?;
        println!("{eps:>7.4} {:>6} {phi:>10.4} {lambda:>10.4} {:>9}", config.len(), config.pairwise_disjoint(1.0));
    }
    println!();
    let rows = measure_convergence_check(&domain, &[0.1, 0.05, 0.025], &standard_test_functions(), 64)?;
    for r in rows {
        println!(
            "{:>8} eps {:>6.3}  sum {:>10.6}  integral {:>10.6}  error {:.2e}",
            r.function, r.eps, r.lattice_sum, r.integral, r.error
        );
    }
    Ok(())
}
