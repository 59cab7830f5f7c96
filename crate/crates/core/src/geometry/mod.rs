//! Planar geometry of a state given in the normal-angle gauge.
//!
//! Along a convex curve dX/dθ = (sin θ, −cos θ)/κ, so positions, the width
//! and the support function all follow from quadratures of 1/κ = u^{−1/α}.
//!
//! The quadratures factor the integrand as a fixed weight times a smooth
//! remainder: sin θ/κ = sin^{1−1/α}θ·ρ(θ) with ρ = (u/sin θ)^{−1/α}. The
//! weight carries the endpoint singularity and is integrated once per grid
//! (product integration); ρ is interpolated linearly between nodes and
//! extrapolated linearly into the two end half-cells. Translators have
//! constant ρ, so they are reproduced to quadrature accuracy.

pub mod interp;

use std::f64::consts::{FRAC_PI_2, PI};

pub use interp::MonotoneCubic;

use crate::domain::{
    tanh_sinh, AngularGrid, CurveSample, EndpointExponents, QuadOptions, SpeedProfile, SupportState,
};
use crate::error::{Error, Result};

/// Product-integration weights for one grid and exponent.
#[derive(Debug, Clone)]
pub struct CurveIntegrator {
    grid: AngularGrid,
    alpha: f64,
    /// Knots: 0, θ_0, …, θ_{N−1}, π with π/2 inserted when N is even.
    knots: Vec<f64>,
    tip_knot: usize,
    /// (left, right) hat-function moments of sin^{1−1/α} per segment.
    horizontal: Vec<(f64, f64)>,
    /// Same for −cos θ·sin^{−1/α}θ; the end segments are `None` when the
    /// height diverges (α ≤ 1).
    vertical: Vec<Option<(f64, f64)>>,
}

impl CurveIntegrator {
    pub fn new(grid: AngularGrid, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be > 0, got {alpha}")));
        }
        let n = grid.len();
        let mut knots = Vec::with_capacity(n + 3);
        knots.push(0.0);
        let mut tip_knot = 0;
        for i in 0..n {
            if n.is_multiple_of(2) && i == n / 2 {
                tip_knot = knots.len();
                knots.push(FRAC_PI_2);
            }
            if n % 2 == 1 && i == n / 2 {
                tip_knot = knots.len();
            }
            knots.push(grid.theta(i));
        }
        knots.push(PI);
        if n % 2 == 1 {
            knots[tip_knot] = FRAC_PI_2;
        }

        let segs = knots.len() - 1;
        let half = segs / 2;
        let p1 = 1.0 - 1.0 / alpha;
        let p2 = -1.0 / alpha;
        let opts = QuadOptions::rel(1e-13);
        let mut horizontal = vec![(0.0, 0.0); segs];
        let mut vertical = vec![None; segs];
        // Left half only; the right half follows by reflection θ ↦ π − θ,
        // under which the horizontal weight is even and the vertical one odd.
        for k in 0..half {
            let (a, b) = (knots[k], knots[k + 1]);
            let h = b - a;
            let end = EndpointExponents::new(if k == 0 { p1 } else { 0.0 }, 0.0);
            let ml = tanh_sinh(|_, da, db| da_sin(a, da).powf(p1) * db / h, a, b, end, opts)
                .map_err(|e| width_error(e, p1))?;
            let mr = tanh_sinh(|_, da, _| da_sin(a, da).powf(p1) * da / h, a, b, end, opts)
                .map_err(|e| width_error(e, p1))?;
            horizontal[k] = (ml, mr);
            horizontal[segs - 1 - k] = (mr, ml);

            let vert = if k == 0 && alpha <= 1.0 {
                None
            } else {
                let end = EndpointExponents::new(if k == 0 { p2 } else { 0.0 }, 0.0);
                let w = |x: f64, da: f64| -da_cos(a, x, da) * da_sin(a, da).powf(p2);
                let vl = tanh_sinh(|x, da, db| w(x, da) * db / h, a, b, end, opts)?;
                let vr = tanh_sinh(|x, da, _| w(x, da) * da / h, a, b, end, opts)?;
                Some((vl, vr))
            };
            vertical[k] = vert;
            vertical[segs - 1 - k] = vert.map(|(vl, vr)| (-vr, -vl));
        }
        Ok(Self {
            grid,
            alpha,
            knots,
            tip_knot,
            horizontal,
            vertical,
        })
    }

    pub fn grid(&self) -> AngularGrid {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ρ = (u/sin θ)^{−1/α} at every knot.
    fn rho_at_knots(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.len();
        if u.len() != n {
            return Err(Error::Precondition(format!("{} values for a grid of {n}", u.len())));
        }
        let rho: Vec<f64> = (0..n)
            .map(|i| (u[i] / self.grid.sin(i)).powf(-1.0 / self.alpha))
            .collect();
        if rho.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Precondition("speed must be positive and finite".into()));
        }
        let extrapolate = |near: f64, next: f64| {
            let v = near - 0.5 * (next - near);
            if v > 0.0 {
                v
            } else {
                near
            }
        };
        let mut out = Vec::with_capacity(self.knots.len());
        out.push(extrapolate(rho[0], rho[1]));
        for i in 0..n {
            if n.is_multiple_of(2) && i == n / 2 {
                out.push(0.5 * (rho[i - 1] + rho[i]));
            }
            out.push(rho[i]);
        }
        out.push(extrapolate(rho[n - 1], rho[n - 2]));
        Ok(out)
    }

    /// ∫₀^π sin θ·u^{−1/α} dθ.
    pub fn width(&self, u: &[f64]) -> Result<f64> {
        let rho = self.rho_at_knots(u)?;
        Ok(self
            .horizontal
            .iter()
            .enumerate()
            .map(|(k, (l, r))| l * rho[k] + r * rho[k + 1])
            .sum())
    }

    /// Curve through `anchor` at θ = π/2, sampled at the grid nodes.
    pub fn reconstruct(&self, u: &[f64], anchor: (f64, f64)) -> Result<CurveSample> {
        let rho = self.rho_at_knots(u)?;
        let segs = self.knots.len() - 1;
        // Cumulative integrals from θ = 0 at every knot (vertical from the
        // first node since its end segment may diverge).
        let mut cum1 = vec![0.0; segs + 1];
        let mut cum2 = vec![0.0; segs + 1];
        for k in 0..segs {
            let (l, r) = self.horizontal[k];
            cum1[k + 1] = cum1[k] + l * rho[k] + r * rho[k + 1];
            if k >= 1 && k + 1 < segs {
                let (l, r) = self.vertical[k].expect("interior vertical moments");
                cum2[k + 1] = cum2[k] + l * rho[k] + r * rho[k + 1];
            }
        }
        let tip1 = cum1[self.tip_knot];
        let tip2 = cum2[self.tip_knot];
        let n = self.grid.len();
        let mut x1 = Vec::with_capacity(n);
        let mut x2 = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        for (k, &th) in self.knots.iter().enumerate().take(segs).skip(1) {
            if self.grid.len().is_multiple_of(2) && k == self.tip_knot {
                continue;
            }
            theta.push(th);
            x1.push(anchor.0 + cum1[k] - tip1);
            x2.push(anchor.1 + cum2[k] - tip2);
        }
        let left1 = anchor.0 - tip1;
        let right1 = anchor.0 + cum1[segs] - tip1;
        let end2 = |k: usize, sign: f64, base: f64| {
            self.vertical[k].map(|(l, r)| base + sign * (l * rho[k] + r * rho[k + 1]))
        };
        let left2 = end2(0, -1.0, x2[0]);
        let right2 = end2(segs - 1, 1.0, x2[n - 1]);
        Ok(CurveSample {
            theta,
            x1,
            x2,
            width: right1 - left1,
            x1_limits: (left1, right1),
            x2_limits: (left2, right2),
            tip_index: self.grid.tip_index(),
        })
    }
}

fn width_error(e: Error, p: f64) -> Error {
    match e {
        Error::Divergence { .. } => Error::Divergence { exponent: p },
        other => other,
    }
}

/// sin x for x = a + da, accurate when a = 0 and da is tiny.
#[inline]
fn da_sin(a: f64, da: f64) -> f64 {
    if a == 0.0 {
        da.sin()
    } else {
        (a + da).sin()
    }
}

#[inline]
fn da_cos(a: f64, x: f64, da: f64) -> f64 {
    if a == 0.0 {
        da.cos()
    } else {
        x.cos()
    }
}

/// ∫₀^π sin θ·u^{−1/α} dθ.
pub fn width(u: &SpeedProfile, alpha: f64) -> Result<f64> {
    CurveIntegrator::new(u.grid(), alpha)?.width(u.values())
}

pub fn reconstruct(u: &SpeedProfile, alpha: f64, anchor: (f64, f64)) -> Result<CurveSample> {
    CurveIntegrator::new(u.grid(), alpha)?.reconstruct(u.values(), anchor)
}

/// S(θ_i) = ⟨−n(θ_i), X(θ_i)⟩, attained at the point with normal n(θ_i).
pub fn support_of(curve: &CurveSample, t: f64) -> Result<SupportState> {
    let grid = AngularGrid::cell_centered(curve.len());
    let values = (0..curve.len())
        .map(|i| {
            let th = curve.theta[i];
            -(th.cos() * curve.x1[i] + th.sin() * curve.x2[i])
        })
        .collect();
    SupportState::new(grid, values, t)
}

/// Limits S(0⁺) = −x₁(0⁺) and S(π⁻) = x₁(π⁻).
pub fn support_end_limits(curve: &CurveSample) -> (f64, f64) {
    (-curve.x1_limits.0, curve.x1_limits.1)
}

/// Absolute tip position read off the support function:
/// X(π/2) = (S_θ(π/2), −S(π/2)).
pub fn tip_from_support(support: &SupportState) -> (f64, f64) {
    let s = support.values();
    let grid = support.grid();
    let n = s.len();
    let h = grid.spacing();
    let slope = if n.is_multiple_of(2) {
        (s[n / 2] - s[n / 2 - 1]) / h
    } else {
        (s[n / 2 + 1] - s[n / 2 - 1]) / (2.0 * h)
    };
    (slope, -support.tip_value())
}

/// The curve as a graph x₂ = f(x₁) resampled on a uniform x-grid.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub slopes: Vec<f64>,
    height: MonotoneCubic,
    slope: MonotoneCubic,
}

impl GraphFunction {
    pub fn value_at(&self, x: f64) -> f64 {
        self.height.eval(x)
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        self.slope.eval(x)
    }

    /// Largest violation of convexity among the resampled ordinates.
    pub fn convexity_defect(&self) -> f64 {
        self.ordinates
            .windows(3)
            .map(|w| (2.0 * w[1] - w[0] - w[2]).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Resamples onto `samples` uniform abscissae spanning the node range; the
/// slope comes from the tangent direction, f_x(x₁(θ)) = −cot θ.
pub fn to_graph(curve: &CurveSample, samples: usize) -> Result<GraphFunction> {
    if curve.x1.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Reconstruction("x1 is not strictly increasing in theta".into()));
    }
    let height = MonotoneCubic::new(curve.x1.clone(), curve.x2.clone())?;
    let slope_data = curve.theta.iter().map(|t| -1.0 / t.tan()).collect();
    let slope = MonotoneCubic::new(curve.x1.clone(), slope_data)?;
    let (a, b) = height.domain();
    let samples = samples.max(2);
    let abscissae: Vec<f64> = (0..samples)
        .map(|k| a + (b - a) * k as f64 / (samples - 1) as f64)
        .collect();
    let ordinates = abscissae.iter().map(|&x| height.eval(x)).collect();
    let slopes = abscissae.iter().map(|&x| slope.eval(x)).collect();
    Ok(GraphFunction {
        abscissae,
        ordinates,
        slopes,
        height,
        slope,
    })
}
