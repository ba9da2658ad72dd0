//! Hypothesis gates on a default configuration and three broken ones.

use nematic_homog::cli::{run_checks, CheckConfig};
use nematic_homog::energies::ElasticSpec;

fn report(name: &str, cfg: &CheckConfig) -> Result<(), Box<dyn std::error::Error>> {
    println!("{name}");
    for g in run_checks(cfg, 5)? {
        let verdict = if g.pass { "pass" } else { "FAIL" };
        println!("  {:<3} {verdict:<5} {:<12.4e} {} ({})", g.hypothesis, g.value, g.gate, g.detail);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = CheckConfig { measure_eps: vec![0.1, 0.05], measure_grid: 32, samples: 300, ..Default::default() };
    report("defaults", &base)?;
    report("alpha = 1.6", &CheckConfig { alpha: 1.6, ..base.clone() })?;
    report(
        "overlapping centres",
        &CheckConfig { centers: Some(vec![[0.5, 0.5, 0.5], [0.52, 0.5, 0.5]]), ..base.clone() },
    )?;
    report("L3 = 2 L1", &CheckConfig { elastic: ElasticSpec::FullLdg { l1: 1.0, l2: 0.0, l3: 2.0 }, ..base })?;
    Ok(())
}
