//! Boundary decay of the speed and its arclength derivatives near the ends
//! θ → 0, π.
//!
//! Each check forms a ratio that must stay bounded as the end is approached
//! (u/θ^{2/3}, |u_s|/u^β, |u_ss|/u^{β'}). A finite grid cannot see "bounded"
//! directly, so the verdict uses the log-log slope of the ratio against the
//! end distance over the outermost nodes: a ratio that blows up like θ^{−q}
//! has slope −q, a bounded one has slope ≥ 0 up to discretization noise.

use serde::{Deserialize, Serialize};

use super::{log_log_slope, EstimateReport, Location, Verdict};
use crate::domain::{first_derivative, BoundaryClosure, Power, SpeedProfile};
use crate::flow::rhs_u;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayOptions {
    /// Nodes with end distance ≤ this enter the sup.
    pub theta_max: f64,
    /// Outermost nodes per end used for the slope.
    pub slope_nodes: usize,
    /// A slope ≥ −slope_tolerance counts as bounded.
    pub slope_tolerance: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            theta_max: 0.3,
            slope_nodes: 8,
            slope_tolerance: 0.05,
        }
    }
}

/// Sup of `ratio` near both ends and the smaller of the two end slopes.
fn bounded_ratio(name: &str, u: &SpeedProfile, ratio: &[f64], opts: &DecayOptions) -> EstimateReport {
    let grid = u.grid();
    let n = grid.len();
    let mut sup = (0.0f64, 0usize);
    for i in 0..n {
        if grid.end_distance(i) <= opts.theta_max && ratio[i] > sup.0 {
            sup = (ratio[i], i);
        }
    }
    let k = opts.slope_nodes.clamp(2, n / 2);
    let left = log_log_slope((0..k).map(|i| (grid.end_distance(i), ratio[i])));
    let right = log_log_slope((n - k..n).map(|i| (grid.end_distance(i), ratio[i])));
    let slope = match (left, right) {
        (Some(l), Some(r)) => l.min(r),
        (Some(s), None) | (None, Some(s)) => s,
        // Ratio identically zero at the ends: trivially bounded.
        (None, None) => 0.0,
    };
    let bounded = sup.0.is_finite() && slope >= -opts.slope_tolerance;
    EstimateReport::new(name, if bounded { Verdict::Pass } else { Verdict::Fail }, opts.slope_tolerance)
        .with("sup", sup.0)
        .with("end_slope", slope)
        .at(Location::at(grid.theta(sup.1), u.time()))
}

/// u ≤ C θ^{2/3} near the ends; reports C_meas = sup u/θ^{2/3}.
pub fn check_decay(u: &SpeedProfile, opts: &DecayOptions) -> EstimateReport {
    check_decay_rate(u, 2.0 / 3.0, opts)
}

/// u ≤ C θ^{rate}; [`check_decay`] with a configurable exponent.
pub fn check_decay_rate(u: &SpeedProfile, rate: f64, opts: &DecayOptions) -> EstimateReport {
    let grid = u.grid();
    let ratio: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v / grid.end_distance(i).powf(rate))
        .collect();
    bounded_ratio("decay", u, &ratio, opts).with("rate", rate)
}

/// u_s = κ·u_θ = u^{1/α}u_θ.
fn arclength_derivative(values: &[f64], u: &SpeedProfile, alpha: f64) -> Vec<f64> {
    let curv = Power::new(1.0 / alpha);
    first_derivative(values, u.grid(), BoundaryClosure::OddGhost)
        .iter()
        .zip(u.values())
        .map(|(d, v)| curv.apply(*v) * d)
        .collect()
}

/// |u_s| ≤ C u^β near the ends.
pub fn check_gradient_decay(u: &SpeedProfile, alpha: f64, beta: f64, opts: &DecayOptions) -> EstimateReport {
    let us = arclength_derivative(u.values(), u, alpha);
    let ratio: Vec<f64> = us.iter().zip(u.values()).map(|(d, v)| d.abs() / v.powf(beta)).collect();
    bounded_ratio("gradient_decay", u, &ratio, opts).with("beta", beta)
}

/// |u_ss| ≤ C u^{min(β, 2β−1) − ε} near the ends.
pub fn check_second_derivative_decay(
    u: &SpeedProfile,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    opts: &DecayOptions,
) -> EstimateReport {
    let us = arclength_derivative(u.values(), u, alpha);
    // u_s vanishes at the ends like κ, so its odd extension is the natural one.
    let uss = arclength_derivative(&us, u, alpha);
    let exponent = beta.min(2.0 * beta - 1.0) - epsilon;
    let ratio: Vec<f64> = uss.iter().zip(u.values()).map(|(d, v)| d.abs() / v.powf(exponent)).collect();
    bounded_ratio("second_derivative_decay", u, &ratio, opts)
        .with("beta", beta)
        .with("exponent", exponent)
}

/// The boundary flux P = |u_θ u_t| must vanish at the ends. The check
/// passes when P at the outermost node is below `abs_tolerance` or below the
/// sup of P over the outer `outer_fraction` of the θ-range. The decay
/// exponent e in P ~ u^e is not known a priori; it is fitted over the
/// `fit_nodes` outermost nodes of each end and reported, not asserted.
pub fn check_flux_decay(
    u: &SpeedProfile,
    alpha: f64,
    outer_fraction: f64,
    fit_nodes: usize,
    abs_tolerance: f64,
) -> EstimateReport {
    let grid = u.grid();
    let n = grid.len();
    let flux = boundary_flux(u, alpha);
    let reach = 0.5 * outer_fraction * std::f64::consts::PI;
    let sup = (0..n)
        .filter(|&i| grid.end_distance(i) <= reach)
        .map(|i| flux[i])
        .fold(0.0, f64::max);
    let at_end = flux[0].max(flux[n - 1]);
    let k = fit_nodes.clamp(2, n / 2);
    let v = u.values();
    let left = log_log_slope((0..k).map(|i| (v[i], flux[i])));
    let right = log_log_slope((n - k..n).map(|i| (v[i], flux[i])));
    let exponent = match (left, right) {
        (Some(l), Some(r)) => l.min(r),
        (Some(s), None) | (None, Some(s)) => s,
        (None, None) => f64::NAN,
    };
    let pass = at_end <= abs_tolerance || at_end < sup;
    EstimateReport::new("flux_decay", if pass { Verdict::Pass } else { Verdict::Fail }, abs_tolerance)
        .with("flux_at_end", at_end)
        .with("flux_sup_outer", sup)
        .with("exponent", exponent)
        .at(Location::at(grid.theta(0), u.time()))
}

/// |u_θ·u_t| at every node, u_t from the equation.
pub fn boundary_flux(u: &SpeedProfile, alpha: f64) -> Vec<f64> {
    let du = first_derivative(u.values(), u.grid(), BoundaryClosure::OddGhost);
    du.iter().zip(rhs_u(u, alpha)).map(|(a, b)| (a * b).abs()).collect()
}
