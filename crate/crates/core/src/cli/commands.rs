use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use super::check::{run_checks, write_check_csv};
use super::config::{Command, ProbeConfig, RunConfig};
use crate::error::{Error, Result};
use crate::homogenization::design::random_q_in_ball;
use crate::homogenization::design::write_design_csv;
use crate::homogenization::{
    build_mesh, design_surface, f_hom, identity_ladder, sphere_f_hom_closed_form, verify_design, ParticleShape,
};
use crate::lattice::InclusionConfig;
use crate::numerics::rng;
use crate::probes::{
    lemma35_probe, lemma36_probe, lemma37_probe, lemma39_probe, trace_inequality_check, ProbeReport, TraceReport,
};
use crate::solver::io::{write_experiment_csv, write_iterations_csv, write_snapshot};
use crate::solver::{convergence_experiment, minimize, EnergySpecs, EpsAssembly, Grid, ZeroAssembly};
use crate::solver::{DiscreteField, MinimizeResult};

/// What a command produced, before the manifest is written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Files written to the output directory, in manifest order.
    pub files: Vec<String>,
    pub summary: Value,
    /// Pass/fail claim of the run, when it makes one.
    pub verdict: Option<bool>,
    /// One-line result for the terminal.
    pub message: Option<String>,
}

impl Outcome {
    fn write(&mut self, dir: &Path, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        fs::write(dir.join(name), buf)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn block<T>(b: &Option<T>, c: Command) -> Result<&T> {
    b.as_ref().ok_or_else(|| Error::Config(format!("missing [{}] block", c.name())))
}

pub(crate) fn dispatch(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    match cfg.command {
        Some(Command::Design) => design(cfg, dir),
        Some(Command::Hom) => hom(cfg, dir),
        Some(Command::Identities) => identities(cfg, dir),
        Some(Command::Minimize) => minimize_cmd(cfg, dir),
        Some(Command::Converge) => converge(cfg, dir),
        Some(Command::Probe) => probe(cfg, dir),
        Some(Command::Check) => check(cfg, dir),
        None => Err(Error::Config("unresolved config".into())),
    }
}

fn design(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let d = block(&cfg.design, Command::Design)?;
    let spec = design_surface(d.host, d.target, d.variant)?;
    let mesh = build_mesh(&ParticleShape::Sphere, d.mesh_resolution)?;
    let rows = verify_design(d.host, d.target, &spec, &mesh, d.samples, d.max_norm, cfg.seed);
    let max_dev = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.write(dir, "surface_spec.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &spec).map_err(|e| Error::Io(e.to_string()))?;
        Ok(writeln!(w)?)
    })?;
    out.write(dir, "design.csv", |w| write_design_csv(&rows, w))?;
    let ok = max_dev <= d.tolerance;
    out.summary = json!({ "surface": spec, "max_deviation": max_dev, "tolerance": d.tolerance });
    out.verdict = Some(ok);
    out.message = Some(format!("max deviation {max_dev:.3e} (tolerance {:.1e})", d.tolerance));
    Ok(out)
}

fn hom(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let h = block(&cfg.hom, Command::Hom)?;
    h.shape.validate()?;
    h.rotation.validate()?;
    h.surface.validate()?;
    let meshes = h.mesh_resolutions.iter().map(|&r| build_mesh(&h.shape, r)).collect::<Result<Vec<_>>>()?;
    let x = nalgebra::Vector3::from(h.point);
    let mut r = rng(cfg.seed);
    let mut lines = Vec::new();
    let mut worst: Option<f64> = None;
    for s in 0..h.samples {
        let q = random_q_in_ball(&mut r, h.max_norm);
        let closed = if h.shape == ParticleShape::Sphere { sphere_f_hom_closed_form(&h.surface, &q) } else { None };
        for (&res, mesh) in h.mesh_resolutions.iter().zip(&meshes) {
            let v = f_hom(&q, &x, &h.surface, &h.rotation, mesh);
            let [q0, q1, q2, q3, q4] = q.0;
            let (c, d) = match closed {
                Some(c) => {
                    let d = (v - c).abs();
                    worst = Some(worst.unwrap_or(0.0).max(d));
                    (c.to_string(), d.to_string())
                }
                None => (String::new(), String::new()),
            };
            lines.push(format!("{s},{res},{q0},{q1},{q2},{q3},{q4},{v},{c},{d}"));
        }
    }
    let mut out = Outcome::default();
    out.write(dir, "hom.csv", |w| {
        writeln!(w, "sample,resolution,q0,q1,q2,q3,q4,f_hom,closed_form,deviation")?;
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    out.summary = json!({ "max_deviation_from_closed_form": worst });
    out.message = Some(match worst {
        Some(d) => format!("max deviation from the sphere closed form {d:.3e}"),
        None => "no closed form for this shape".into(),
    });
    Ok(out)
}

fn identities(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let c = block(&cfg.identities, Command::Identities)?;
    if c.resolutions.windows(2).any(|w| w[1] <= w[0]) || c.resolutions.is_empty() {
        return Err(Error::Config("resolutions must be a non-empty ascending ladder".into()));
    }
    let mut r = rng(cfg.seed);
    let mut lines = Vec::new();
    let mut orders: std::collections::BTreeMap<&str, (f64, f64)> = Default::default();
    for s in 0..c.samples {
        let q = random_q_in_ball(&mut r, c.max_norm);
        for row in identity_ladder(&q, &c.resolutions, c.mesh)? {
            let order = row.order.map_or(String::new(), |o| o.to_string());
            if let Some(o) = row.order {
                let e = orders.entry(row.kind.name()).or_insert((f64::INFINITY, f64::NEG_INFINITY));
                *e = (e.0.min(o), e.1.max(o));
            }
            for ((res, quad), err) in row.resolutions.iter().zip(&row.quadrature).zip(&row.errors) {
                lines.push(format!("{s},{},{},{res},{quad},{err},{order}", row.kind.name(), row.closed_form));
            }
        }
    }
    let mut out = Outcome::default();
    out.write(dir, "identities.csv", |w| {
        writeln!(w, "sample,moment,closed_form,resolution,quadrature,error,order")?;
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    let summary: serde_json::Map<String, Value> =
        orders.iter().map(|(k, (lo, hi))| (k.to_string(), json!({ "min_order": lo, "max_order": hi }))).collect();
    out.summary = Value::Object(summary);
    Ok(out)
}

fn minimize_cmd(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let m = block(&cfg.minimize, Command::Minimize)?;
    m.boundary.validate()?;
    let specs = EnergySpecs { bulk: m.bulk, elastic: m.elastic, surface: m.surface.clone() };
    let (result, n_inclusions): (MinimizeResult, usize) = match m.eps {
        None => {
            let e = m.domain.edges();
            let cells = e.map(|l| ((l * m.cells as f64).round() as usize).max(2));
            let grid = Grid::new(m.domain, cells)?;
            let init = DiscreteField::from_fn(grid, |x| m.boundary.eval(x));
            let mesh = build_mesh(&m.shape, m.limit_mesh_resolution)?;
            let asm = ZeroAssembly::new(&init, &specs, &m.rotation, &mesh)?;
            (minimize(&init, &asm, &m.options)?, 0)
        }
        Some(eps) => {
            let grid = Grid::with_max_spacing(m.domain, m.h_factor * eps.powf(m.alpha))?;
            let config = InclusionConfig::periodic(&m.domain, eps, m.alpha, m.shape, &m.rotation)?;
            let mut init = DiscreteField::from_fn(grid, |x| m.boundary.eval(x));
            init.mask_inclusions(&config);
            let mesh = build_mesh(&m.shape, m.mesh_resolution)?;
            let asm = EpsAssembly::new(&init, &config, &specs, &mesh, m.assembly)?;
            (minimize(&init, &asm, &m.options)?, config.len())
        }
    };
    let mut out = Outcome::default();
    out.write(dir, "iterations.csv", |w| write_iterations_csv(&result.log, w))?;
    write_snapshot(&result.field, dir, "field")?;
    out.files.push("field.json".into());
    out.files.push("field.csv".into());
    out.summary = json!({
        "functional": if m.eps.is_some() { "F_eps" } else { "F_0" },
        "status": result.status,
        "iterations": result.iterations(),
        "n_inclusions": n_inclusions,
        "cells": result.field.grid.cells,
        "energy": result.energy,
    });
    out.message = Some(format!(
        "{:?} after {} iterations, energy {:.10e}",
        result.status,
        result.iterations(),
        result.energy.total
    ));
    Ok(out)
}

fn converge(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let setup = block(&cfg.converge, Command::Converge)?;
    let rep = convergence_experiment(setup)?;
    let mut out = Outcome::default();
    out.write(dir, "experiment.csv", |w| write_experiment_csv(&rep.rows, w))?;
    let distances = rep.distances_nonincreasing(0.0);
    let gap = rep.energy_gap_shrinks();
    out.summary = json!({
        "distances_nonincreasing": distances,
        "energy_gap_shrinks": gap,
        "status_zero": rep.rows.iter().map(|r| r.status_zero).collect::<Vec<_>>(),
        "status_eps": rep.rows.iter().map(|r| r.status_eps).collect::<Vec<_>>(),
        "flags": rep.rows.iter().map(|r| r.flag.clone()).collect::<Vec<_>>(),
    });
    out.message = Some(format!("distance non-increasing: {distances}; energy gap shrinks: {gap}"));
    Ok(out)
}

fn write_probe(out: &mut Outcome, dir: &Path, rep: &ProbeReport) -> Result<()> {
    out.write(dir, "probe.csv", |w| {
        writeln!(w, "{},gradient,potential,surface,total", rep.parameter)?;
        for r in &rep.rows {
            writeln!(w, "{},{},{},{},{}", r.parameter, r.gradient, r.potential, r.surface, r.total)?;
        }
        Ok(())
    })?;
    out.write(dir, "checks.csv", |w| {
        writeln!(w, "name,value,pass")?;
        for c in &rep.checks {
            writeln!(w, "{},{},{}", c.name, c.value, c.pass)?;
        }
        Ok(())
    })?;
    out.summary = json!({ "probe": rep.probe, "verdict": rep.verdict, "checks": rep.checks });
    out.verdict = Some(rep.verdict);
    out.message = Some(format!("{}: verdict {}", rep.probe, rep.verdict));
    Ok(())
}

fn write_trace(out: &mut Outcome, dir: &Path, rep: &TraceReport) -> Result<()> {
    out.write(dir, "trace.csv", |w| {
        writeln!(w, "a,b,function,lhs,gradient,power,volume,constant,amplitude")?;
        for r in &rep.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.a,
                r.b,
                r.function.replace(',', ";"),
                r.lhs,
                r.gradient,
                r.power,
                r.volume,
                r.constant,
                r.amplitude
            )?;
        }
        Ok(())
    })?;
    out.write(dir, "trace_family.csv", |w| {
        writeln!(w, "a,b,family_max")?;
        for (a, b, c) in &rep.family_max {
            writeln!(w, "{a},{b},{c}")?;
        }
        Ok(())
    })?;
    let ok = rep.all_finite() && rep.spread < 2.0;
    out.summary = json!({ "p": rep.p, "spread": rep.spread, "all_finite": rep.all_finite(), "verdict": ok });
    out.verdict = Some(ok);
    out.message = Some(format!("trace: family-max spread {:.4}, verdict {ok}", rep.spread));
    Ok(())
}

fn probe(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let p = block(&cfg.probe, Command::Probe)?;
    let mut out = Outcome::default();
    match p {
        ProbeConfig::Lemma35(x) => write_probe(&mut out, dir, &lemma35_probe(x)?)?,
        ProbeConfig::Lemma36(x) => write_probe(&mut out, dir, &lemma36_probe(x)?)?,
        ProbeConfig::Lemma37(x) => write_probe(&mut out, dir, &lemma37_probe(x)?)?,
        ProbeConfig::Lemma39(x) => write_probe(&mut out, dir, &lemma39_probe(x)?)?,
        ProbeConfig::Trace(x) => write_trace(&mut out, dir, &trace_inequality_check(x)?)?,
    }
    Ok(out)
}

fn check(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let c = block(&cfg.check, Command::Check)?;
    let rows = run_checks(c, cfg.seed)?;
    let mut out = Outcome::default();
    out.write(dir, "check.csv", |w| write_check_csv(&rows, w))?;
    let failed: Vec<String> =
        rows.iter().filter(|r| !r.pass).map(|r| format!("{} ({}): {}", r.hypothesis, r.gate, r.detail)).collect();
    let summary: serde_json::Map<String, Value> = rows.iter().map(|r| (r.hypothesis.clone(), json!(r.pass))).collect();
    out.summary = Value::Object(summary);
    out.verdict = Some(failed.is_empty());
    out.message =
        Some(if failed.is_empty() { "all hypotheses hold".into() } else { format!("violated: {}", failed.join("; ")) });
    Ok(out)
}
