//! Model problems where the surface term wins.
//!
//! Each probe evaluates the scalar energy on an explicit competitor family
//! and reports whether it diverges (or, for the last one, fails lower
//! semicontinuity), followed by the trace-inequality constants on shells.

use nematic_homog::probes::{
    lemma35_probe, lemma36_probe, lemma37_probe, lemma39_probe, trace_inequality_check, Lemma35Params, Lemma36Params,
    Lemma37Params, LscParams, ProbeReport, TraceParams,
};

fn show(rep: &ProbeReport) {
    println!("{}: verdict {}", rep.probe, rep.verdict);
    for r in &rep.rows {
        println!("  {} = {:<10.3e} total {:>12.4e}", rep.parameter, r.parameter, r.total);
    }
    for c in &rep.checks {
        println!("  check {} = {:.4} ({})", c.name, c.value, if c.pass { "ok" } else { "fails" });
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show(&lemma35_probe(&Lemma35Params::default())?);
    show(&lemma36_probe(&Lemma36Params::default())?);
    show(&lemma37_probe(&Lemma37Params::default())?);
    show(&lemma39_probe(&LscParams::default())?);
    // out of range: p = 2 makes the surface term subcritical
    match lemma36_probe(&Lemma36Params { p: 2.0, ..Default::default() }) {
        Err(e) => println!("p = 2 refused: {e}"),
        Ok(r) => println!("p = 2 verdict {}", r.verdict),
    }
    let trace = trace_inequality_check(&TraceParams::default())?;
    for (a, b, c) in &trace.family_max {
        println!("trace a = {a:<4} b = {b:<4} family max C = {c:.4}");
    }
    println!("spread across scales {:.4}", trace.spread);
    Ok(())
}
