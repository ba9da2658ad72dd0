//! Competitors whose model energy is unbounded below: growing amplitude at
//! fixed `ε`, and concentrating profiles as `ε → 0` (with or without an `H¹`
//! bound).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bump::{cutoff, cutoff_derivative};
use super::{ProbeReport, ProbeRow};
use crate::error::{Error, Result};
use crate::numerics::{composite_gauss, gauss_legendre, loglog_slope, pairwise_sum};

/// `∫_lo^hi f` by a 64-panel, 10-point Gauss rule.
pub(crate) fn radial(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let vals: Vec<f64> = composite_gauss(lo, hi, 64, 10).into_iter().map(|(x, w)| w * f(x)).collect();
    pairwise_sum(&vals)
}

/// `∫_0^1 t^n (2 − t)² dt`, i.e. `∫_1^2 (2 − ρ)^n ρ² dρ`. With `u = 1 − t`
/// the mass sits within `1/n` of `u = 0` for large `n`; Gauss panels double
/// in width away from there up to `u = 1/2`, then halve towards `t = 0`
/// where `t^n` is singular for fractional `n`.
pub fn shell_power_integral(n: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let f = |u: f64| (1.0 - u).powf(n) * (1.0 + u) * (1.0 + u);
    let mut panels = Vec::new();
    let mut lo = 0.0;
    let mut width = (1.0 / (n + 1.0)).min(0.5);
    while lo < 0.5 {
        let hi = (lo + width).min(0.5);
        panels.push((lo, hi));
        lo = hi;
        width *= 2.0;
    }
    for k in 1..64 {
        let t_hi = 0.5f64.powi(k);
        panels.push((1.0 - t_hi, 1.0 - 0.5 * t_hi));
    }
    panels.push((1.0 - 0.5f64.powi(64), 1.0));
    let mut vals = Vec::new();
    for (lo, hi) in panels {
        for (xi, wi) in x.iter().zip(&w) {
            vals.push(0.5 * (hi - lo) * wi * f(lo + 0.5 * (hi - lo) * (xi + 1.0)));
        }
    }
    pairwise_sum(&vals)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive")))
    }
}

fn sweep(values: &[f64], name: &str) -> Result<()> {
    if values.len() < 2 || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Precondition(format!("{name} sweep needs at least two positive values")));
    }
    Ok(())
}

/// Amplitude sweep at fixed `ε` for `v = M(2 − |x|)^γ`, `γ = M^β`, on the
/// shell around one spherical inclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma35Params {
    pub k: f64,
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Exponent of `γ = M^β`; the window midpoint when absent.
    pub beta: Option<f64>,
    pub m_values: Vec<f64>,
}

impl Default for Lemma35Params {
    fn default() -> Self {
        Lemma35Params {
            k: 1.0,
            delta: 1.0,
            p: 3.0,
            q: 3.0,
            alpha: 1.2,
            eps: 0.1,
            beta: Some(0.5),
            m_values: (0..=6).map(|i| 10f64.powi(i)).collect(),
        }
    }
}

pub fn lemma35_probe(params: &Lemma35Params) -> Result<ProbeReport> {
    let &Lemma35Params { k, delta, p, q, alpha, eps, .. } = params;
    positive("k", k)?;
    positive("delta", delta)?;
    positive("q", q)?;
    positive("eps", eps)?;
    sweep(&params.m_values, "M")?;
    if params.m_values.iter().any(|&m| m < 1.0) || params.m_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("M values must be increasing and at least 1".into()));
    }
    if !(p > 2.0) {
        return Err(Error::gate("unbounded surface term", "p > 2"));
    }
    if !(q < 2.0 * p - 2.0) {
        return Err(Error::gate("unbounded surface term", "q < 2p - 2"));
    }
    if !(alpha > 1.0) {
        return Err(Error::gate("unbounded surface term", "alpha > 1"));
    }
    let (lo, hi) = ((q - p).max(0.0), p - 2.0);
    let beta = params.beta.unwrap_or(0.5 * (lo + hi));
    if !(beta > lo && beta < hi) {
        return Err(Error::gate(
            "unbounded surface term",
            &format!("max{{2 + beta, q - beta}} < p needs beta in ({lo}, {hi}), got {beta}"),
        ));
    }

    let mut report = ProbeReport {
        probe: "lemma35".into(),
        parameter: "M".into(),
        rows: Vec::new(),
        checks: Vec::new(),
        verdict: false,
    };
    let mut bound_ok = true;
    for &m in &params.m_values {
        let gamma = m.powf(beta);
        let grad_shell = 4.0 * PI * gamma * gamma * m * m * shell_power_integral(2.0 * gamma - 2.0);
        bound_ok &= grad_shell <= 16.0 * PI * gamma * gamma * m * m / (2.0 * gamma - 1.0);
        let pot_shell = 4.0 * PI * m.powf(q) * shell_power_integral(q * gamma);
        let surface_sphere = 4.0 * PI * m.powf(p);
        report.rows.push(ProbeRow::new(
            m,
            eps.powf(alpha) * grad_shell,
            k * eps.powf(3.0 * alpha) * pot_shell,
            -delta * eps.powi(3) * surface_sphere,
        ));
    }
    report.check("beta", beta, true);
    report.check("beta_window_lo", lo, true);
    report.check("beta_window_hi", hi, true);
    report.check("gradient_below_bound", if bound_ok { 1.0 } else { 0.0 }, bound_ok);
    report.verdict = report.recompute_verdict();
    Ok(report)
}

/// Concentrating competitor `ε^{−α/2−β} φ(ε^{−α}(x − x¹))` along a
/// decreasing `ε` sequence, for `α` above the critical `3/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma36Params {
    pub k: f64,
    pub delta: f64,
    pub p: f64,
    pub alpha: f64,
    /// Decreasing.
    pub eps: Vec<f64>,
}

impl Default for Lemma36Params {
    fn default() -> Self {
        Lemma36Params { k: 1.0, delta: 1.0, p: 3.0, alpha: 1.8, eps: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 1e-3, 1e-4] }
    }
}

/// Open window for `β` making the surface term dominate.
pub fn lemma36_window(p: f64, alpha: f64) -> (f64, f64) {
    ((6.0 - alpha * p) / (2.0 * p - 4.0), (-alpha * p + 8.0 * alpha - 6.0) / (2.0 * p - 4.0))
}

/// `∫_{B₂∖B₁} |∇φ|²` and `∫_{B₂∖B₁} φ^s` for the cutoff profile.
fn cutoff_integrals(s: f64) -> (f64, f64) {
    let grad = 4.0 * PI * radial(1.0, 2.0, |r| cutoff_derivative(r).powi(2) * r * r);
    let pow = 4.0 * PI * radial(1.0, 2.0, |r| cutoff(r).powf(s) * r * r);
    (grad, pow)
}

fn check_eps_sweep(eps: &[f64]) -> Result<()> {
    sweep(eps, "eps")?;
    if eps.windows(2).any(|w| w[1] >= w[0]) || eps[0] > 1.0 {
        return Err(Error::Precondition("eps values must decrease from at most 1".into()));
    }
    Ok(())
}

pub fn lemma36_probe(params: &Lemma36Params) -> Result<ProbeReport> {
    let &Lemma36Params { k, delta, p, alpha, .. } = params;
    positive("k", k)?;
    positive("delta", delta)?;
    check_eps_sweep(&params.eps)?;
    if !(p > 2.0 && p < 4.0) {
        return Err(Error::gate("loss of equicoercivity", "2 < p < 4"));
    }
    if !(alpha > 1.5 && alpha < 6.0 / p) {
        return Err(Error::gate("loss of equicoercivity", "3/2 < alpha < 6/p"));
    }
    let (lo, hi) = lemma36_window(p, alpha);
    let lo = lo.max(0.0);
    if !(lo < hi) {
        return Err(Error::gate("loss of equicoercivity", "nonempty beta window"));
    }
    let beta = 0.5 * (lo + hi);
    let (grad, pow) = cutoff_integrals(2.0 * p - 2.0);
    let surface_sphere = 4.0 * PI * cutoff(1.0).powf(p);

    let mut report = ProbeReport {
        probe: "lemma36".into(),
        parameter: "eps".into(),
        rows: Vec::new(),
        checks: Vec::new(),
        verdict: false,
    };
    for &e in &params.eps {
        report.rows.push(ProbeRow::new(
            e,
            e.powf(-2.0 * beta) * grad,
            k * e.powf(-beta * (2.0 * p - 2.0) + alpha * (4.0 - p)) * pow,
            -delta * e.powf(3.0 - alpha * p / 2.0 - beta * p) * surface_sphere,
        ));
    }
    report.check("beta", beta, true);
    report.check("beta_window_lo", lo, true);
    report.check("beta_window_hi", hi, true);
    report.check("surface_exponent", 3.0 - alpha * p / 2.0 - beta * p, true);
    report.verdict = report.recompute_verdict();
    Ok(report)
}

/// As [`lemma36_probe`] with amplitude `η ε^{−α/2}`, `η` fixed by an `H¹`
/// budget `M`, and a sextic potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma37Params {
    pub k: f64,
    pub delta: f64,
    pub p: f64,
    pub alpha: f64,
    /// Bound on `‖E_ε u_ε‖_{H¹}`.
    pub m: f64,
    /// Decreasing.
    pub eps: Vec<f64>,
}

impl Default for Lemma37Params {
    fn default() -> Self {
        Lemma37Params {
            k: 1.0,
            delta: 1.0,
            p: 4.0,
            alpha: 1.6,
            m: 1.0,
            eps: (1..=9).map(|i| 10f64.powi(-5 * i + 4)).collect(),
        }
    }
}

pub fn lemma37_probe(params: &Lemma37Params) -> Result<ProbeReport> {
    let &Lemma37Params { k, delta, p, alpha, m, .. } = params;
    positive("k", k)?;
    positive("delta", delta)?;
    positive("M", m)?;
    check_eps_sweep(&params.eps)?;
    if !(p > 2.0 && p <= 4.0) {
        return Err(Error::gate("bounded-energy blow-up", "2 < p <= 4"));
    }
    if !(alpha > 6.0 / p) {
        return Err(Error::gate("bounded-energy blow-up", "alpha > 6/p"));
    }
    // u = η ε^{−α/2} φ(ε^{−α}x) on the shell, extended by its constant
    // boundary value into the ball, so ‖∇Eu‖² = η²‖∇φ‖² and
    // ‖Eu‖² = η² ε^{2α} ∫_{B₂} φ².
    let (grad_ref, _) = cutoff_integrals(2.0);
    let mass_ref = 4.0 * PI / 3.0 + 4.0 * PI * radial(1.0, 2.0, |r| cutoff(r).powi(2) * r * r);
    let eta = m / (grad_ref + mass_ref).sqrt();

    let mut report = ProbeReport {
        probe: "lemma37".into(),
        parameter: "eps".into(),
        rows: Vec::new(),
        checks: Vec::new(),
        verdict: false,
    };
    let mut grads = Vec::new();
    let mut h1_max: f64 = 0.0;
    for &e in &params.eps {
        // physical-scale quadrature on the shell ε^α < |x| < 2ε^α
        let s = e.powf(alpha);
        let amp = eta * e.powf(-alpha / 2.0);
        let grad = 4.0 * PI * radial(s, 2.0 * s, |r| (amp / s * cutoff_derivative(r / s)).powi(2) * r * r);
        let pot = 4.0 * PI * k * radial(s, 2.0 * s, |r| (amp * cutoff(r / s)).powi(6) * r * r);
        let surface = -delta * e.powf(3.0 - 2.0 * alpha) * 4.0 * PI * s * s * (amp * cutoff(1.0)).powf(p);
        h1_max = h1_max.max(eta * (grad_ref + e.powf(2.0 * alpha) * mass_ref).sqrt());
        grads.push(grad);
        report.rows.push(ProbeRow::new(e, grad, pot, surface));
    }
    let spread = grads.iter().fold(0.0f64, |a, g| a.max((g / (eta * eta * grad_ref) - 1.0).abs()));
    let eps: Vec<f64> = report.rows.iter().map(|r| r.parameter).collect();
    let surf: Vec<f64> = report.rows.iter().map(|r| r.surface).collect();
    let slope = loglog_slope(&eps, &surf);
    let expected = 3.0 - alpha * p / 2.0;
    report.check("eta", eta, true);
    report.check("h1_norm_max", h1_max, h1_max <= m * (1.0 + 1e-12));
    report.check("gradient_relative_spread", spread, spread < 1e-8);
    report.check("surface_slope", slope, (slope - expected).abs() < 0.05);
    report.check("surface_slope_expected", expected, expected < 0.0);
    report.verdict = report.recompute_verdict();
    Ok(report)
}
