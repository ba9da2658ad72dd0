//! Radial profiles used by the probes.
//!
//! * [`cutoff`]: `φ(ρ) = ψ(2 − ρ) / (ψ(2 − ρ) + ψ(ρ − 1))` with
//!   `ψ(t) = e^{−1/t}` for `t > 0` and `0` otherwise. Smooth, equal to one on
//!   `B̄₁` and supported in `B̄₂`.
//! * [`mollifier`]: `φ(ρ) = exp(1 − 1/(1 − ρ²))` on `B₁`, zero outside, with
//!   `φ(0) = 1`.

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn psi_prime(t: f64) -> f64 {
    if t > 0.0 {
        psi(t) / (t * t)
    } else {
        0.0
    }
}

pub fn cutoff(rho: f64) -> f64 {
    if rho <= 1.0 {
        return 1.0;
    }
    if rho >= 2.0 {
        return 0.0;
    }
    let (p, q) = (psi(2.0 - rho), psi(rho - 1.0));
    p / (p + q)
}

pub fn cutoff_derivative(rho: f64) -> f64 {
    if rho <= 1.0 || rho >= 2.0 {
        return 0.0;
    }
    let (p, q) = (psi(2.0 - rho), psi(rho - 1.0));
    let (dp, dq) = (-psi_prime(2.0 - rho), psi_prime(rho - 1.0));
    (dp * q - p * dq) / ((p + q) * (p + q))
}

pub fn mollifier(rho: f64) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - rho * rho)).exp()
}

pub fn mollifier_derivative(rho: f64) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let d = 1.0 - rho * rho;
    -2.0 * rho / (d * d) * mollifier(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.0), 1.0);
        assert_eq!(cutoff(2.0), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        assert!(cutoff(1.1) < 1.0 && cutoff(1.9) > 0.0);
        let mut prev = 1.0;
        for i in 1..100 {
            let v = cutoff(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-6;
        for i in 1..40 {
            let r = 1.0 + i as f64 / 40.0;
            let fd = (cutoff(r + h) - cutoff(r - h)) / (2.0 * h);
            assert!((fd - cutoff_derivative(r)).abs() < 1e-7, "{r}");
            let s = i as f64 / 40.0 - 0.01;
            let fd = (mollifier(s + h) - mollifier(s - h)) / (2.0 * h);
            assert!((fd - mollifier_derivative(s)).abs() < 1e-7, "{s}");
        }
        assert_eq!(mollifier(0.0), 1.0);
        assert_eq!(mollifier(1.0), 0.0);
    }
}
