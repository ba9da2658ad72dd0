//! Minimisers of `F_ε` against the minimiser of `F₀` as `ε` shrinks.
//!
//! Spheres carry a surface energy designed to move the quartic bulk from
//! `(a, b, c) = (−1, 1, 1)` to `(−0.5, 1, 1)`; the boundary datum is the
//! uniaxial minimiser of the target potential, so `Q₀ = g`. The last two
//! columns show why the trend is slow at these `ε`: the spheres fill most
//! of the cube, and `Nε³` is well below one. Pass `--quick` for `ε = 1/4`
//! only.

use std::time::Instant;

use nematic_homog::lattice::{periodic_count, periodic_volume_fraction};
use nematic_homog::solver::{convergence_experiment, ExperimentSetup};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quick = std::env::args().any(|a| a == "--quick");
    let setup =
        ExperimentSetup { eps: if quick { vec![0.25] } else { vec![0.25, 0.125] }, ..ExperimentSetup::default() };
    let t = Instant::now();
    let report = convergence_experiment(&setup)?;
    println!(
        "{:>6} {:>5} {:>5} {:>10} {:>11} {:>11} {:>6} {:>6} {:>6}",
        "eps", "N", "cells", "H1 dist", "F_eps", "F_0", "iters", "phi", "N eps3"
    );
    for r in &report.rows {
        let phi = periodic_volume_fraction(&setup.domain, r.eps, setup.alpha, &setup.shape)?;
        let filling = periodic_count(&setup.domain, r.eps)? as f64 * r.eps.powi(3) / setup.domain.volume();
        println!(
            "{:>6.3} {:>5} {:>5} {:>10.4e} {:>11.4e} {:>11.4e} {:>6} {:>6.3} {:>6.3}",
            r.eps, r.n_inclusions, r.cells, r.distance, r.f_eps.total, r.f_zero.total, r.iterations, phi, filling
        );
        if let Some(flag) = &r.flag {
            println!("       flagged: {flag}");
        }
    }
    println!("distances non-increasing: {}", report.distances_nonincreasing(0.0));
    println!("energy gap shrinks: {}", report.energy_gap_shrinks());
    eprintln!("elapsed {:.1}s", t.elapsed().as_secs_f64());
    Ok(())
}
