use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::config::default_surface;
use crate::energies::{
    bulk_energy, elastic_convexity_check, elastic_min_eigenvalue, growth_constants_estimate, invariance_test, BulkSpec,
    ElasticSpec, SurfaceSpec,
};
use crate::error::{Error, Result};
use crate::homogenization::design::random_q_in_ball;
use crate::homogenization::rotation::check_rotation;
use crate::homogenization::{ParticleShape, RotationField};
use crate::lattice::{
    check_alpha, check_separation, measure_convergence_check, standard_test_functions, BoxDomain, InclusionConfig,
};
use crate::numerics::rng;

/// Inputs of the hypothesis checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub domain: BoxDomain,
    pub eps: f64,
    pub alpha: f64,
    pub shape: ParticleShape,
    pub rotation: RotationField,
    /// Explicit inclusion centres; the periodic lattice when absent.
    pub centers: Option<Vec<[f64; 3]>>,
    /// Required separation constant.
    pub lambda_min: f64,
    /// Decreasing lattice spacings of the measure-convergence ladder.
    pub measure_eps: Vec<f64>,
    /// Midpoint cells per axis for the reference integrals.
    pub measure_grid: usize,
    pub bulk: BulkSpec,
    pub elastic: ElasticSpec,
    pub surface: SurfaceSpec,
    /// Random samples for the growth and invariance estimates.
    pub samples: usize,
    /// Largest `|Q|` sampled by the growth estimates.
    pub growth_radius: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            domain: BoxDomain::unit_cube(),
            eps: 0.05,
            alpha: 1.25,
            shape: ParticleShape::Sphere,
            rotation: RotationField::Identity,
            centers: None,
            lambda_min: 0.25,
            measure_eps: vec![0.05, 0.025, 0.0125],
            measure_grid: 64,
            bulk: BulkSpec::quartic(-1.0, 1.0, 1.0),
            elastic: ElasticSpec::Dirichlet,
            surface: default_surface(),
            samples: 1000,
            growth_radius: 2.0,
        }
    }
}

/// Outcome of one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateResult {
    pub hypothesis: String,
    pub gate: String,
    pub pass: bool,
    pub value: f64,
    pub detail: String,
}

impl GateResult {
    fn new(hypothesis: &str, gate: &str, pass: bool, value: f64, detail: String) -> Self {
        GateResult { hypothesis: hypothesis.to_string(), gate: gate.to_string(), pass, value, detail }
    }
}

/// Evaluates H1 to H8 on `cfg`. Violations are reported in the rows;
/// `Err` is reserved for inputs the checks cannot run on.
pub fn run_checks(cfg: &CheckConfig, seed: u64) -> Result<Vec<GateResult>> {
    cfg.domain.validate()?;
    if !(cfg.eps > 0.0) || cfg.samples == 0 || !(cfg.growth_radius > 0.0) {
        return Err(Error::Config("check needs eps > 0, samples > 0 and growth_radius > 0".into()));
    }
    if cfg.measure_eps.is_empty() || cfg.measure_eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("measure_eps must be a non-empty decreasing sequence".into()));
    }
    let mut out = Vec::with_capacity(8);

    out.push(match check_alpha(cfg.alpha) {
        Ok(()) => GateResult::new("H1", "1 < alpha < 3/2", true, cfg.alpha, String::new()),
        Err(e) => GateResult::new("H1", "1 < alpha < 3/2", false, cfg.alpha, e.to_string()),
    });

    let shape_ok = cfg.shape.validate();
    let rotation_ok = cfg.rotation.validate();
    let config = match (&shape_ok, &rotation_ok) {
        (Ok(()), Ok(())) => Some(inclusions(cfg)?),
        _ => None,
    };
    out.push(match &config {
        Some(c) => separation(c, cfg),
        None => GateResult::new("H2", "separation", false, f64::NAN, "shape or rotation invalid".into()),
    });
    out.push(measure(cfg)?);
    out.push(match (&rotation_ok, &config) {
        (Ok(()), Some(c)) => rotations(c),
        (Err(e), _) => GateResult::new("H4", "continuous rotation field", false, f64::NAN, e.to_string()),
        (Ok(()), None) => GateResult::new("H4", "continuous rotation field", true, 0.0, String::new()),
    });
    out.push(match shape_ok {
        Ok(()) => {
            let ratio = cfg.shape.inner_radius() / cfg.shape.bounding_radius();
            GateResult::new(
                "H5",
                "compact convex shape around the origin",
                ratio > 0.0 && ratio.is_finite(),
                ratio,
                "value: inner over bounding radius".into(),
            )
        }
        Err(e) => GateResult::new("H5", "compact convex shape around the origin", false, f64::NAN, e.to_string()),
    });
    out.push(elastic(&cfg.elastic));
    out.push(bulk(cfg, seed));
    out.push(surface(cfg, seed));
    Ok(out)
}

fn inclusions(cfg: &CheckConfig) -> Result<InclusionConfig> {
    match &cfg.centers {
        Some(c) => InclusionConfig::from_centers(
            c.iter().map(|&x| Vector3::from(x)).collect(),
            cfg.eps,
            cfg.alpha,
            cfg.shape,
            &cfg.rotation,
        ),
        None => InclusionConfig::periodic(&cfg.domain, cfg.eps, cfg.alpha, cfg.shape, &cfg.rotation),
    }
}

/// `min_i min(dist(xᵢ, ∂Ω), ½ min_{j≠i}|xⱼ − xᵢ|) / ε`: the largest `λ` for
/// which the balls `B(xᵢ, λε)` lie in `Ω` and are pairwise disjoint.
fn ball_separation(config: &InclusionConfig, domain: &BoxDomain) -> f64 {
    let c = &config.centers;
    let mut best = f64::INFINITY;
    for i in 0..c.len() {
        let mut m = domain.dist_to_boundary(&c[i]);
        for j in 0..c.len() {
            if j != i {
                m = m.min(0.5 * (c[j] - c[i]).norm());
            }
        }
        best = best.min(m / config.eps);
    }
    best
}

fn separation(config: &InclusionConfig, cfg: &CheckConfig) -> GateResult {
    const GATE: &str = "separation lambda >= lambda_min";
    if config.is_empty() {
        return GateResult::new("H2", GATE, false, f64::NAN, "no inclusion centres".into());
    }
    let lambda = ball_separation(config, &cfg.domain);
    let additive = check_separation(config, &cfg.domain).unwrap_or(f64::NAN);
    let reach = config.scale() * config.shape.bounding_radius();
    let inside = config.centers.iter().all(|x| cfg.domain.contains(x) && cfg.domain.dist_to_boundary(x) > reach);
    let disjoint = config.pairwise_disjoint(1.0);
    let pass = lambda >= cfg.lambda_min && inside && disjoint;
    let mut detail = format!("N = {}; additive form {additive:.4}", config.len());
    if !disjoint {
        detail.push_str("; inclusions overlap");
    }
    if !inside {
        detail.push_str("; an inclusion leaves the domain");
    }
    if lambda < cfg.lambda_min {
        detail.push_str(&format!("; lambda {lambda:.4} < {}", cfg.lambda_min));
    }
    GateResult::new("H2", GATE, pass, lambda, detail)
}

fn measure(cfg: &CheckConfig) -> Result<GateResult> {
    let rows = measure_convergence_check(&cfg.domain, &cfg.measure_eps, &standard_test_functions(), cfg.measure_grid)?;
    let k = cfg.measure_eps.len();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut stalled = Vec::new();
    for chunk in rows.chunks(k) {
        if chunk.windows(2).any(|w| !(w[1].error < w[0].error)) {
            pass = false;
            stalled.push(chunk[0].function.clone());
        }
        worst = worst.max(chunk[k - 1].error);
    }
    let detail = if stalled.is_empty() {
        format!("value: largest error at eps = {}", cfg.measure_eps[k - 1])
    } else {
        format!("error not decreasing for {}", stalled.join(" "))
    };
    Ok(GateResult::new("H3", "lattice measures converge weakly", pass, worst, detail))
}

fn rotations(config: &InclusionConfig) -> GateResult {
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for r in &config.rotations {
        worst = worst.max((r.transpose() * r - Matrix3::identity()).abs().max());
        if let Err(e) = check_rotation(r) {
            failure.get_or_insert(e.to_string());
        }
    }
    GateResult::new(
        "H4",
        "continuous rotation field",
        failure.is_none(),
        worst,
        failure.unwrap_or_else(|| "value: largest orthogonality defect".into()),
    )
}

fn elastic(spec: &ElasticSpec) -> GateResult {
    let (l1, l2, l3) = spec.constants();
    let lambda = elastic_min_eigenvalue(spec);
    match elastic_convexity_check(l1, l2, l3) {
        Ok(()) => GateResult::new("H6", "elastic convexity", true, lambda, "value: smallest eigenvalue".into()),
        Err(e) => GateResult::new("H6", "elastic convexity", false, lambda, e.to_string()),
    }
}

fn bulk(cfg: &CheckConfig, seed: u64) -> GateResult {
    const GATE: &str = "bulk continuous, bounded below, sextic growth";
    if let Err(e) = cfg.bulk.validate() {
        return GateResult::new("H7", GATE, false, f64::NAN, e.to_string());
    }
    let bounded_below = match cfg.bulk {
        BulkSpec::Quartic { a, b, c } => c > 0.0 || (c == 0.0 && b == 0.0 && a >= 0.0),
        BulkSpec::Sextic { .. } => true,
    };
    let mut r = rng(seed);
    let mut lambda: f64 = 0.0;
    for _ in 0..cfg.samples {
        let q = random_q_in_ball(&mut r, cfg.growth_radius);
        lambda = lambda.max(bulk_energy(&cfg.bulk, &q).abs() / (q.norm().powi(6) + 1.0));
    }
    let mut detail = format!("value: sampled lambda_b; sextic coercivity rate {}", cfg.bulk.sextic_growth_rate());
    if !bounded_below {
        detail = "not bounded below".into();
    }
    GateResult::new("H7", GATE, bounded_below && lambda.is_finite(), lambda, detail)
}

fn surface(cfg: &CheckConfig, seed: u64) -> GateResult {
    const GATE: &str = "surface frame-indifferent with cubic local Lipschitz growth";
    if let Err(e) = cfg.surface.validate() {
        return GateResult::new("H8", GATE, false, f64::NAN, e.to_string());
    }
    let lambda = growth_constants_estimate(&cfg.surface, cfg.samples, cfg.growth_radius, seed);
    let invariance = invariance_test(&cfg.surface, cfg.samples, seed);
    let pass = lambda.is_finite() && invariance <= 1e-10;
    GateResult::new("H8", GATE, pass, lambda, format!("value: sampled lambda_s; O(3) deviation {invariance:.3e}"))
}

pub(crate) fn write_check_csv<W: Write>(rows: &[GateResult], mut w: W) -> Result<()> {
    writeln!(w, "hypothesis,gate,pass,value,detail")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.hypothesis,
            r.gate.replace(',', ";"),
            r.pass,
            r.value,
            r.detail.replace(',', ";")
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failing(cfg: &CheckConfig) -> Vec<String> {
        run_checks(cfg, 0).unwrap().into_iter().filter(|r| !r.pass).map(|r| r.hypothesis).collect()
    }

    fn quick() -> CheckConfig {
        CheckConfig {
            eps: 0.1,
            alpha: 1.4,
            measure_eps: vec![0.1, 0.05],
            measure_grid: 32,
            samples: 200,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn defaults_pass() {
        assert!(failing(&quick()).is_empty(), "{:?}", run_checks(&quick(), 0));
    }

    #[test]
    fn each_broken_input_flags_its_hypothesis() {
        let cfg = CheckConfig { alpha: 1.6, ..quick() };
        assert_eq!(failing(&cfg), ["H1"]);
        let cfg = CheckConfig { centers: Some(vec![[0.5, 0.5, 0.5], [0.52, 0.5, 0.5]]), ..quick() };
        assert_eq!(failing(&cfg), ["H2"]);
        let cfg = CheckConfig { elastic: ElasticSpec::FullLdg { l1: 1.0, l2: 0.0, l3: 2.0 }, ..quick() };
        let rows = run_checks(&cfg, 0).unwrap();
        let h6 = rows.iter().find(|r| r.hypothesis == "H6").unwrap();
        assert!(!h6.pass && h6.detail.contains("elastic convexity"), "{h6:?}");
        let cfg = CheckConfig { bulk: BulkSpec::quartic(1.0, 1.0, -1.0), ..quick() };
        assert_eq!(failing(&cfg), ["H7"]);
        let cfg = CheckConfig { shape: ParticleShape::Cube { half_side: 0.0 }, ..quick() };
        assert_eq!(failing(&cfg), ["H2", "H5"]);
    }

    #[test]
    fn ball_separation_of_two_centres() {
        let cfg = InclusionConfig::from_centers(
            vec![Vector3::new(0.3, 0.5, 0.5), Vector3::new(0.7, 0.5, 0.5)],
            0.1,
            1.2,
            ParticleShape::Sphere,
            &RotationField::Identity,
        )
        .unwrap();
        // half the pair distance (0.2) beats the boundary distance (0.3)
        assert!((ball_separation(&cfg, &BoxDomain::unit_cube()) - 2.0).abs() < 1e-12);
    }
}
