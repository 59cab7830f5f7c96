//! Run-level monitors: curvature bounds, convergence to the translator,
//! conserved width, support-function consistency and ordering.

use serde::{Deserialize, Serialize};

use super::{integrate_samples, EstimateReport, Location, Verdict};
use crate::domain::{Power, SpeedProfile};
use crate::error::Result;
use crate::flow::Trace;
use crate::geometry::{tip_from_support, CurveIntegrator};
use crate::soliton::translator_speed;

fn skipped(name: &str, tolerance: f64, why: &str) -> EstimateReport {
    EstimateReport::new(name, Verdict::Trend, tolerance).note(why)
}

/// Uniform upper bound and interior lower bound in the last quartile of the
/// run. The lower bound must exceed c(δ) = ¼·m·δ^{1+α/(1+α)} on the nodes
/// with sin θ ≥ δ.
pub fn check_curvature_bounds(trace: &Trace, delta: f64) -> Result<EstimateReport> {
    let name = "curvature_bounds";
    let (alpha, grid) = (trace.alpha, trace.grid);
    let Some((first, last)) = trace.samples.first().zip(trace.samples.last()) else {
        return Ok(skipped(name, 0.0, "empty trace"));
    };
    let m = translator_speed(alpha)?;
    let threshold = 0.25 * m * delta.powf(1.0 + alpha / (1.0 + alpha));
    let from = first.t + 0.75 * (last.t - first.t);
    let mut sup = 0.0f64;
    let mut inf = (f64::INFINITY, Location::default());
    for s in trace.samples.iter().filter(|s| s.t >= from) {
        for (i, &u) in s.u.iter().enumerate() {
            sup = sup.max(u);
            if grid.sin(i) >= delta && u < inf.0 {
                inf = (u, Location::at(grid.theta(i), s.t));
            }
        }
    }
    let ok = sup.is_finite() && inf.0.is_finite() && inf.0 >= threshold;
    Ok(EstimateReport::new(name, if ok { Verdict::Pass } else { Verdict::Fail }, threshold)
        .with("sup", sup)
        .with("interior_inf", inf.0)
        .with("threshold", threshold)
        .with("inf_over_m_delta", inf.0 / (m * delta))
        .with("from_time", from)
        .at(inf.1))
}

/// |X|²κ^{1−α}/t on the part of the curve with |X| ≥ `radius`, relative to
/// 2α(1+α)/(1−α). The statement is a liminf, so the result is a trend.
pub fn check_fd_lower_bound(trace: &Trace, radius: f64) -> Result<EstimateReport> {
    let name = "fd_lower_bound";
    let alpha = trace.alpha;
    if !(alpha > 0.5 && alpha < 1.0) {
        return Ok(skipped(name, 0.0, "applies to 1/2 < α < 1 only"));
    }
    let target = 2.0 * alpha * (1.0 + alpha) / (1.0 - alpha);
    let integrator = CurveIntegrator::new(trace.grid, alpha)?;
    let curv = Power::new(1.0 / alpha - 1.0);
    let mut worst = (f64::INFINITY, Location::default());
    let mut last_floor = f64::NAN;
    for k in 0..trace.len() {
        let s = &trace.samples[k];
        if s.t <= 0.0 {
            continue;
        }
        let anchor = tip_from_support(&trace.support(k)?);
        let curve = integrator.reconstruct(&s.u, anchor)?;
        let mut floor = f64::INFINITY;
        for i in 0..curve.len() {
            let r2 = curve.x1[i].powi(2) + curve.x2[i].powi(2);
            if r2 < radius * radius {
                continue;
            }
            // κ^{1−α} = u^{(1−α)/α}.
            let q = r2 * curv.apply(s.u[i]);
            floor = floor.min(q);
            if q / s.t < worst.0 {
                worst = (q / s.t, Location::at(curve.theta[i], s.t));
            }
        }
        last_floor = floor;
    }
    let mut report = EstimateReport::new(name, Verdict::Trend, 0.0)
        .with("target", target)
        .with("ratio", worst.0 / target)
        .with("final_floor", last_floor)
        .at(worst.1)
        .note("liminf statement: reported against 2α(1+α)/(1−α) without the ε deduction");
    if !worst.0.is_finite() {
        report = report.note(format!("no curve point reaches |X| ≥ {radius}"));
    }
    Ok(report)
}

/// Sup over nodes of |u(t_end) − u(t_0)|/u(t_0).
pub fn check_stationarity(trace: &Trace, tolerance: f64) -> EstimateReport {
    let name = "stationarity";
    let Some((first, last)) = trace.samples.first().zip(trace.samples.last()) else {
        return skipped(name, tolerance, "empty trace");
    };
    let mut worst = (0.0f64, 0usize);
    for (i, (a, b)) in first.u.iter().zip(&last.u).enumerate() {
        let d = (b - a).abs() / a;
        if d > worst.0 {
            worst = (d, i);
        }
    }
    let verdict = if worst.0 <= tolerance { Verdict::Pass } else { Verdict::Fail };
    EstimateReport::new(name, verdict, tolerance)
        .with("drift", worst.0)
        .at(Location::at(trace.grid.theta(worst.1), last.t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceOptions {
    /// Window [θ_lo, θ_hi] for the sup.
    pub theta_range: (f64, f64),
    /// Bound on the final relative error.
    pub tolerance: f64,
    /// Monotonicity is required from this time on.
    pub monotone_after: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            theta_range: (PI / 6.0, 5.0 * PI / 6.0),
            tolerance: 0.02,
            monotone_after: 2.0,
        }
    }
}

/// Sup of |u − m sin θ|/(m sin θ) over the window at every sample.
pub fn translator_errors(trace: &Trace, theta_range: (f64, f64)) -> Result<Vec<f64>> {
    let m = translator_speed(trace.alpha)?;
    let grid = trace.grid;
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| (theta_range.0..=theta_range.1).contains(&grid.theta(i)))
        .collect();
    Ok(trace
        .samples
        .iter()
        .map(|s| {
            nodes
                .iter()
                .map(|&i| {
                    let exact = m * grid.sin(i);
                    (s.u[i] - exact).abs() / exact
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Final error ≤ tolerance, and after `monotone_after` the error never
/// increases unless it is already below the scheme's translator drift
/// α·m^{1+1/α}·(1 − c_h)·t, c_h = (sin(Δθ/2)/(Δθ/2))² — the accumulated
/// consistency error of the u-form on the exact translator.
pub fn check_convergence(trace: &Trace, opts: &ConvergenceOptions) -> Result<EstimateReport> {
    let name = "convergence";
    if trace.is_empty() {
        return Ok(skipped(name, opts.tolerance, "empty trace"));
    }
    let errors = translator_errors(trace, opts.theta_range)?;
    let alpha = trace.alpha;
    let m = translator_speed(alpha)?;
    let half = 0.5 * trace.grid.spacing();
    let drift_rate = alpha * m.powf(1.0 + 1.0 / alpha) * (1.0 - (half.sin() / half).powi(2));
    let times = trace.times();
    let mut strict_until = f64::NAN;
    let mut violation: Option<(f64, f64)> = None;
    for k in 1..times.len() {
        if times[k - 1] < opts.monotone_after {
            continue;
        }
        if errors[k] > errors[k - 1] {
            if strict_until.is_nan() {
                strict_until = times[k - 1];
            }
            let floor = drift_rate * times[k];
            if errors[k] > floor && violation.is_none() {
                violation = Some((times[k], errors[k] - errors[k - 1]));
            }
        }
    }
    let last = errors.len() - 1;
    if strict_until.is_nan() {
        strict_until = times[last];
    }
    let final_ok = errors[last] <= opts.tolerance;
    let verdict = if final_ok && violation.is_none() { Verdict::Pass } else { Verdict::Fail };
    let mut r = EstimateReport::new(name, verdict, opts.tolerance)
        .with("final_error", errors[last])
        .with("strict_monotone_until", strict_until)
        .with("drift_floor_at_end", drift_rate * times[last])
        .at(Location::time(times[last]));
    if let Some((t, jump)) = violation {
        r = r.with("violation_increase", jump).at(Location::time(t));
    }
    Ok(r)
}

/// max_t |width(t) − target|.
pub fn check_width(trace: &Trace, target: f64, tolerance: f64) -> Result<EstimateReport> {
    let integrator = CurveIntegrator::new(trace.grid, trace.alpha)?;
    let mut worst = (0.0f64, Location::default());
    for s in &trace.samples {
        let d = (integrator.width(&s.u)? - target).abs();
        if d >= worst.0 {
            worst = (d, Location::time(s.t));
        }
    }
    let verdict = if worst.0 <= tolerance { Verdict::Pass } else { Verdict::Fail };
    Ok(EstimateReport::new("width", verdict, tolerance)
        .with("max_deviation", worst.0)
        .with("target", target)
        .at(worst.1))
}

/// Max over samples of the residual of S_θθ + S = u^{−1/α} on nodes with
/// sin θ ≥ `min_sin`, relative to Δθ²; passes when ≤ `coefficient`.
///
/// The truncation error of the second difference is Δθ²·S/12 and S
/// grows like sin^{−3}θ toward the ends, so `min_sin` should stay away from 0.
pub fn check_support_compatibility(trace: &Trace, min_sin: f64, coefficient: f64) -> Result<EstimateReport> {
    let h2 = trace.grid.spacing().powi(2);
    let mut worst = (0.0f64, Location::default());
    for k in 0..trace.len() {
        let u = trace.speed(k)?;
        let (r, i) = trace.support(k)?.compatibility_residual(&u, trace.alpha, min_sin);
        if r >= worst.0 {
            worst = (r, Location::at(trace.grid.theta(i), u.time()));
        }
    }
    let c = worst.0 / h2;
    let verdict = if c <= coefficient { Verdict::Pass } else { Verdict::Fail };
    Ok(EstimateReport::new("support_compatibility", verdict, coefficient)
        .with("max_residual", worst.0)
        .with("residual_over_h2", c)
        .at(worst.1))
}

/// The tip rises at speed u(π/2): −ΔS(π/2) = ∫u(π/2) dt between samples,
/// compared relative to the rise.
pub fn check_tip_kinematics(trace: &Trace, tolerance: f64) -> Result<EstimateReport> {
    let name = "tip_kinematics";
    if trace.len() < 2 {
        return Ok(skipped(name, tolerance, "fewer than two samples"));
    }
    let times = trace.times();
    let mut speed = Vec::with_capacity(trace.len());
    let mut height = Vec::with_capacity(trace.len());
    for k in 0..trace.len() {
        speed.push(trace.speed(k)?.tip_value());
        height.push(-trace.support(k)?.tip_value());
    }
    let rise = height[height.len() - 1] - height[0];
    let integral = integrate_samples(&times, &speed);
    let rel = (rise - integral).abs() / rise.abs().max(f64::MIN_POSITIVE);
    let verdict = if rel <= tolerance { Verdict::Pass } else { Verdict::Fail };
    Ok(EstimateReport::new(name, verdict, tolerance)
        .with("relative_error", rel)
        .with("rise", rise)
        .with("integral", integral))
}

/// Comparison principle: `upper` stays above `lower` node by node at every
/// common sample time, up to `tolerance`.
pub fn check_ordering(lower: &Trace, upper: &Trace, tolerance: f64) -> EstimateReport {
    let mut worst = (f64::INFINITY, Location::default());
    let mut pairs = 0usize;
    for a in &lower.samples {
        let Some(b) = upper.samples.iter().find(|b| (b.t - a.t).abs() <= 1e-12 * a.t.abs().max(1.0)) else {
            continue;
        };
        pairs += 1;
        for (i, (x, y)) in a.u.iter().zip(&b.u).enumerate() {
            if y - x < worst.0 {
                worst = (y - x, Location::at(lower.grid.theta(i), a.t));
            }
        }
    }
    if pairs == 0 {
        return skipped("ordering", tolerance, "no common sample times");
    }
    EstimateReport::from_slack("ordering", worst.0, tolerance)
        .with("pairs", pairs as f64)
        .at(worst.1)
}

/// Relative sup distance of a profile to the translator on `theta_range`.
pub fn translator_distance(u: &SpeedProfile, alpha: f64, theta_range: (f64, f64)) -> Result<f64> {
    let m = translator_speed(alpha)?;
    let grid = u.grid();
    Ok((0..grid.len())
        .filter(|&i| (theta_range.0..=theta_range.1).contains(&grid.theta(i)))
        .map(|i| (u.values()[i] - m * grid.sin(i)).abs() / (m * grid.sin(i)))
        .fold(0.0, f64::max))
}
