//! Localized entropy J^ε(u) = c∫_ε^{π−ε}(u_θ² − u²) dθ, c = (α+1)²/α², and
//! its evolution identity dJ/dt = −D + B.
//!
//! The collar is snapped to grid nodes: a is the first node with θ ≥ ε and b
//! the last with θ ≤ π − ε. With that choice the discrete identity is exact
//! for the semi-discrete u-form: summation by parts of the forward
//! differences produces the dissipation
//!   D = 2cα Σ_{a<i<b} u^{1+1/α}(D²u + u)² Δθ
//! and the boundary term
//!   B = 2c [u_t(b)·(u_b − u_{b−1}) − u_t(a)·(u_{a+1} − u_a)] / Δθ.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{integrate_samples, EstimateReport, Location, Verdict};
use crate::domain::calculus::second_derivative_into;
use crate::domain::{AngularGrid, BoundaryClosure, Power, SpeedProfile};
use crate::error::{Error, Result};
use crate::flow::Trace;

fn prefactor(alpha: f64) -> f64 {
    ((alpha + 1.0) / alpha).powi(2)
}

/// Node indices (a, b) bounding the collar [ε, π − ε].
fn collar(grid: AngularGrid, epsilon: f64) -> Result<(usize, usize)> {
    if !(epsilon > 0.0 && epsilon < std::f64::consts::FRAC_PI_4) {
        return Err(Error::Precondition(format!("collar ε = {epsilon} outside (0, π/4)")));
    }
    let n = grid.len();
    let a = (0..n)
        .find(|&i| grid.theta(i) >= epsilon)
        .ok_or_else(|| Error::Precondition("collar is empty".into()))?;
    let b = n - 1 - a;
    if b < a + 2 {
        return Err(Error::Precondition("collar holds fewer than three nodes".into()));
    }
    Ok((a, b))
}

pub fn entropy(u: &SpeedProfile, alpha: f64, epsilon: f64) -> Result<f64> {
    let grid = u.grid();
    let (a, b) = collar(grid, epsilon)?;
    let h = grid.spacing();
    let v = u.values();
    let grad: f64 = (a..b).map(|f| (v[f + 1] - v[f]).powi(2)).sum::<f64>() / h;
    let mass: f64 = v[a + 1..b].iter().map(|x| x * x).sum::<f64>() * h;
    Ok(prefactor(alpha) * (grad - mass))
}

struct Terms {
    d: f64,
    b: f64,
}

fn terms(u: &SpeedProfile, alpha: f64, epsilon: f64) -> Result<Terms> {
    let grid = u.grid();
    let (a, b) = collar(grid, epsilon)?;
    let h = grid.spacing();
    let v = u.values();
    let mut d2 = vec![0.0; v.len()];
    second_derivative_into(v, h, BoundaryClosure::OddGhost, &mut d2);
    let curv = Power::new(1.0 / alpha);
    let lap = |i: usize| d2[i] + v[i];
    let rate = |i: usize| alpha * v[i] * curv.apply(v[i]) * lap(i);
    let c = prefactor(alpha);
    let d = 2.0 * c * alpha * h * (a + 1..b).map(|i| v[i] * curv.apply(v[i]) * lap(i).powi(2)).sum::<f64>();
    let bt = 2.0 * c * (rate(b) * (v[b] - v[b - 1]) - rate(a) * (v[a + 1] - v[a])) / h;
    Ok(Terms { d, b: bt })
}

/// Dissipation D ≥ 0.
pub fn dissipation(u: &SpeedProfile, alpha: f64, epsilon: f64) -> Result<f64> {
    Ok(terms(u, alpha, epsilon)?.d)
}

/// Collar boundary term B.
pub fn boundary_term(u: &SpeedProfile, alpha: f64, epsilon: f64) -> Result<f64> {
    Ok(terms(u, alpha, epsilon)?.b)
}

/// J, D and B at every sample of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub j: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
}

impl EntropyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,J,D,B`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,J,D,B")?;
        for k in 0..self.len() {
            writeln!(out, "{},{},{},{}", self.times[k], self.j[k], self.d[k], self.b[k])?;
        }
        Ok(())
    }

    fn range(&self, from: f64, to: f64) -> std::ops::Range<usize> {
        let lo = self.times.iter().position(|&t| t >= from).unwrap_or(self.len());
        let hi = self.times.iter().rposition(|&t| t <= to).map_or(lo, |k| k + 1);
        lo..hi.max(lo)
    }
}

pub fn entropy_trace(trace: &Trace, epsilon: f64) -> Result<EntropyTrace> {
    let mut out = EntropyTrace {
        epsilon,
        times: Vec::with_capacity(trace.len()),
        j: Vec::with_capacity(trace.len()),
        d: Vec::with_capacity(trace.len()),
        b: Vec::with_capacity(trace.len()),
    };
    for k in 0..trace.len() {
        let u = trace.speed(k)?;
        let t = terms(&u, trace.alpha, epsilon)?;
        out.times.push(u.time());
        out.j.push(entropy(&u, trace.alpha, epsilon)?);
        out.d.push(t.d);
        out.b.push(t.b);
    }
    Ok(out)
}

/// Relative residual of J(t₁) − J(t₀) = ∫(B − D) dt over all samples in
/// [t₀, t₁], scaled by max(|ΔJ|, floor).
fn window_residual(e: &EntropyTrace, from: f64, to: f64, floor: f64) -> Option<(f64, f64, f64)> {
    let r = e.range(from, to);
    if r.len() < 2 {
        return None;
    }
    let times = &e.times[r.clone()];
    let rate: Vec<f64> = r.clone().map(|k| e.b[k] - e.d[k]).collect();
    let dj = e.j[r.end - 1] - e.j[r.start];
    let integral = integrate_samples(times, &rate);
    let scale = dj.abs().max(floor);
    Some(((dj - integral).abs() / scale, dj, integral))
}

/// Identity J(t₁) − J(t₀) = ∫(B − D) over the whole trace.
pub fn entropy_identity(e: &EntropyTrace, tolerance: f64) -> EstimateReport {
    let Some((&t0, &t1)) = e.times.first().zip(e.times.last()) else {
        return EstimateReport::new("entropy_identity", Verdict::Trend, tolerance).note("empty trace");
    };
    entropy_identity_windows(e, t1 - t0 + 1.0, 0.0, tolerance)
}

/// Identity checked on consecutive windows of length `window`, each residual
/// relative to max(|ΔJ|, `floor`). The worst window decides.
pub fn entropy_identity_windows(e: &EntropyTrace, window: f64, floor: f64, tolerance: f64) -> EstimateReport {
    let name = "entropy_identity";
    if e.len() < 2 || window <= 0.0 {
        return EstimateReport::new(name, Verdict::Trend, tolerance).note("fewer than two samples");
    }
    let (t0, t_last) = (e.times[0], e.times[e.len() - 1]);
    let floor = floor.max(f64::MIN_POSITIVE);
    let mut worst = (0.0f64, Location::default(), 0.0, 0.0);
    let mut windows = 0usize;
    let mut start = t0;
    while start < t_last - 1e-12 * window {
        let end = (start + window).min(t_last);
        if let Some((res, dj, integral)) = window_residual(e, start, end + 1e-12 * window, floor) {
            windows += 1;
            if res >= worst.0 {
                worst = (res, Location::time(start), dj, integral);
            }
        }
        start = end;
    }
    let verdict = if worst.0 <= tolerance { Verdict::Pass } else { Verdict::Fail };
    EstimateReport::new(name, verdict, tolerance)
        .with("relative_residual", worst.0)
        .with("delta_j", worst.2)
        .with("integral", worst.3)
        .with("windows", windows as f64)
        .with("epsilon", e.epsilon)
        .at(worst.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_grid, FlowParams};
    use crate::flow::{build_initial, evolve, uniform_samples, InitialDataRecipe, SpeedForm};
    use crate::soliton::{translator_speed, translator_u};

    #[test]
    fn translator_entropy_matches_closed_form() {
        // ∫cos² = x/2 + sin2x/4 and ∫sin² = x/2 − sin2x/4. The gradient sum is
        // a midpoint rule on [θ_a, θ_b], the mass sum on [θ_a + h/2, θ_b − h/2].
        let cos2 = |x: f64| 0.5 * x + 0.25 * (2.0 * x).sin();
        let sin2 = |x: f64| 0.5 * x - 0.25 * (2.0 * x).sin();
        for alpha in [0.75, 1.0, 2.0] {
            let eps: f64 = 0.2;
            let m = translator_speed(alpha).unwrap();
            let c = prefactor(alpha);
            let limit = -c * m * m * (2.0 * eps).sin();
            for n in [256, 512, 1024] {
                let grid = make_grid(n).unwrap();
                let u = translator_u(alpha, grid).unwrap();
                let (a, b) = collar(grid, eps).unwrap();
                let h = grid.spacing();
                let (ta, tb) = (grid.theta(a), grid.theta(b));
                let oracle = c * m * m * (cos2(tb) - cos2(ta) - sin2(tb - 0.5 * h) + sin2(ta + 0.5 * h));
                let j = entropy(&u, alpha, eps).unwrap();
                assert!((j - oracle).abs() < c * m * m * h * h, "α={alpha} N={n}: {j} vs {oracle}");
                assert!((j - limit).abs() < 4.0 * c * m * m * h);
            }
        }
    }

    #[test]
    fn entropy_is_quadratic() {
        let grid = make_grid(128).unwrap();
        let u = SpeedProfile::from_fn(grid, 0.0, |t| t.sin() * (1.0 + 0.1 * (3.0 * t).sin())).unwrap();
        let j1 = entropy(&u, 1.5, 0.1).unwrap();
        let j2 = entropy(&u.scaled(2.0).unwrap(), 1.5, 0.1).unwrap();
        assert!((j2 - 4.0 * j1).abs() < 1e-12 * j1.abs().max(1.0));
    }

    #[test]
    fn dissipation_is_nonnegative_and_vanishes_on_balanced_steady_state() {
        let grid = make_grid(128).unwrap();
        let u = SpeedProfile::from_fn(grid, 0.0, |t| t.sin() * (1.0 + 0.2 * (5.0 * t).cos())).unwrap();
        assert!(dissipation(&u, 1.0, 0.1).unwrap() > 0.0);
        let tr = translator_u(1.0, grid).unwrap();
        let d = dissipation(&tr, 1.0, 0.1).unwrap();
        assert!(d < grid.spacing().powi(3), "{d}");
    }

    #[test]
    fn collar_preconditions() {
        let grid = make_grid(64).unwrap();
        let u = translator_u(1.0, grid).unwrap();
        assert!(entropy(&u, 1.0, 0.0).is_err());
        assert!(entropy(&u, 1.0, 0.9).is_err());
        assert!(entropy(&u, 1.0, 0.5).is_ok());
    }

    #[test]
    fn identity_holds_along_a_run() {
        let alpha = 1.0;
        let grid = make_grid(64).unwrap();
        let st = build_initial(&InitialDataRecipe::sin3_perturbation(), grid, alpha).unwrap();
        let params = FlowParams::new(alpha, 64, 1.0);
        let run = evolve(st, &params, &SpeedForm, &uniform_samples(0.0, 1.0, 401), &mut []).unwrap();
        let e = entropy_trace(&run.trace, 0.2).unwrap();
        let r = entropy_identity(&e, 1e-2);
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let mut csv = Vec::new();
        e.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,J,D,B\n"));
        assert_eq!(text.lines().count(), 402);
    }
}
