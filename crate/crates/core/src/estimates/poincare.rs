//! Sharp Poincaré inequality on a subinterval:
//! ∫_δ^{π−δ} f′² ≥ (π/L)² ∫_δ^{π−δ} f², L = π − 2δ, for f vanishing at both
//! ends, with equality for the first sine mode.

use super::{EstimateReport, Verdict};
use crate::domain::{tanh_sinh, EndpointExponents, QuadOptions};
use crate::error::{Error, Result};

fn check_delta(delta: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&delta) {
        return Err(Error::Precondition(format!("δ = {delta} outside [0, π/2)")));
    }
    Ok(std::f64::consts::PI - 2.0 * delta)
}

/// Slack of f = Σ a_k sin(kπ(θ − δ)/L) from orthogonality:
/// Σ (k² − 1)(π/L)² a_k² L/2.
pub fn poincare_oracle(coefficients: &[f64], delta: f64) -> Result<f64> {
    let len = check_delta(delta)?;
    let w = std::f64::consts::PI / len;
    Ok(coefficients
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let k = (j + 1) as f64;
            (k * k - 1.0) * w * w * a * a * 0.5 * len
        })
        .sum())
}

/// Both integrals by quadrature; the slack must be ≥ −`tolerance` and match
/// the orthogonality oracle to `tolerance`·max(1, |oracle|).
pub fn check_poincare(coefficients: &[f64], delta: f64, tolerance: f64) -> Result<EstimateReport> {
    let len = check_delta(delta)?;
    let w = std::f64::consts::PI / len;
    let f = |s: f64| -> (f64, f64) {
        coefficients.iter().enumerate().fold((0.0, 0.0), |(v, d), (j, a)| {
            let k = (j + 1) as f64 * w;
            (v + a * (k * s).sin(), d + a * k * (k * s).cos())
        })
    };
    let opts = QuadOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        max_levels: 12,
    };
    let b = std::f64::consts::PI - delta;
    let grad = tanh_sinh(|_, s, _| f(s).1.powi(2), delta, b, EndpointExponents::SMOOTH, opts)?;
    let mass = tanh_sinh(|_, s, _| f(s).0.powi(2), delta, b, EndpointExponents::SMOOTH, opts)?;
    let slack = grad - w * w * mass;
    let oracle = poincare_oracle(coefficients, delta)?;
    let mismatch = (slack - oracle).abs();
    let ok = slack >= -tolerance && mismatch <= tolerance * oracle.abs().max(1.0);
    Ok(
        EstimateReport::new("poincare", if ok { Verdict::Pass } else { Verdict::Fail }, tolerance)
            .with("slack", slack)
            .with("oracle", oracle)
            .with("mismatch", mismatch)
            .with("norm_squared", mass),
    )
}
