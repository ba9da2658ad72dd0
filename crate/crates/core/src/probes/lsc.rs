//! Concentration at the centre of a cube face: `u_j = M j^{1/2} φ(j(x − y))`
//! tends weakly to zero while its surface energy does not vanish.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bump::{mollifier, mollifier_derivative};
use super::unbounded::radial;
use super::{ProbeReport, ProbeRow};
use crate::error::{Error, Result};
use crate::numerics::loglog_slope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LscParams {
    pub k: f64,
    pub delta: f64,
    pub q: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Amplitude; twice the measured threshold when absent.
    pub m: Option<f64>,
    /// Increasing concentration parameters.
    pub j_values: Vec<f64>,
}

impl Default for LscParams {
    fn default() -> Self {
        LscParams { k: 1.0, delta: 1.0, q: 3.0, alpha: 1.1, eps: 1.0, m: None, j_values: vec![4.0, 8.0, 16.0, 32.0] }
    }
}

/// `∫_{B₁⁺} |∇φ|²` (half ball) and `∫_{B₁⁰} φ⁴ dσ` (equatorial disk).
pub fn lsc_constants() -> (f64, f64) {
    let a = 2.0 * PI * radial(0.0, 1.0, |r| mollifier_derivative(r).powi(2) * r * r);
    let b = 2.0 * PI * radial(0.0, 1.0, |r| mollifier(r).powi(4) * r);
    (a, b)
}

pub fn lemma39_probe(params: &LscParams) -> Result<ProbeReport> {
    let &LscParams { k, delta, q, alpha, eps, .. } = params;
    for (name, v) in [("k", k), ("delta", delta), ("q", q), ("eps", eps)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("{name} must be positive")));
        }
    }
    if !(q < 6.0) {
        return Err(Error::gate("weak lower semicontinuity", "q < 6"));
    }
    if !(alpha > 1.0) {
        return Err(Error::gate("weak lower semicontinuity", "alpha > 1"));
    }
    let js = &params.j_values;
    if js.len() < 2 || js.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("j values must be increasing, at least two".into()));
    }
    // the disk of radius 1/j has to fit inside the face of half-width ε^α
    if 1.0 / js[0] > eps.powf(alpha) {
        return Err(Error::Precondition(format!(
            "1/j = {} exceeds the cube half-width eps^alpha = {}",
            1.0 / js[0],
            eps.powf(alpha)
        )));
    }
    let (a, b) = lsc_constants();
    let weight = delta * eps.powf(3.0 - 2.0 * alpha);
    let threshold = (a / (weight * b)).sqrt();
    let m = params.m.unwrap_or(2.0 * threshold);

    let mut report = ProbeReport {
        probe: "lemma39".into(),
        parameter: "j".into(),
        rows: Vec::new(),
        checks: Vec::new(),
        verdict: false,
    };
    for &j in js {
        // physical-scale quadrature over the half ball / disk of radius 1/j
        let r1 = 1.0 / j;
        let amp = m * j.sqrt();
        let grad = 2.0 * PI * radial(0.0, r1, |r| (amp * j * mollifier_derivative(j * r)).powi(2) * r * r);
        let pot = 2.0 * PI * k * radial(0.0, r1, |r| (amp * mollifier(j * r)).powf(q) * r * r);
        let surf = 2.0 * PI * radial(0.0, r1, |r| (amp * mollifier(j * r)).powi(4) * r);
        report.rows.push(ProbeRow::new(j, grad, pot, -weight * surf));
    }
    let col = |f: fn(&ProbeRow) -> f64| report.rows.iter().map(f).collect::<Vec<f64>>();
    let pot_slope = loglog_slope(js, &col(|r| r.potential));
    let grad_slope = loglog_slope(js, &col(|r| r.gradient));
    let surf_slope = loglog_slope(js, &col(|r| r.surface));
    let limit = m * m * a - weight * m.powi(4) * b;
    report.check("amplitude", m, true);
    report.check("threshold", threshold, m > threshold);
    report.check("potential_slope", pot_slope, (pot_slope - (q / 2.0 - 3.0)).abs() < 0.05);
    report.check("gradient_slope", grad_slope, grad_slope.abs() < 0.05);
    report.check("surface_slope", surf_slope, surf_slope.abs() < 0.05);
    // liminf of the energy along u_j against the energy of the weak limit 0
    report.check("liminf_energy", limit, limit < 0.0);
    report.verdict = report.recompute_verdict();
    Ok(report)
}
