//! Explicit time-stepping schemes, selectable by name.
//!
//! Every scheme advances the speed u by one forward-Euler step; they differ
//! in which variable the update is written in. All share the CFL policy
//! dt = cfl·Δθ²/(2α·max u^{1+1/α}), which is also the diffusion coefficient
//! α·p of the pressure form.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::domain::calculus::second_derivative_into;
use crate::domain::{BoundaryClosure, Power};
use crate::error::{Error, Result};

/// Scratch buffers reused across steps.
#[derive(Debug, Default)]
pub struct Workspace {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Workspace {
    fn ensure(&mut self, n: usize) {
        self.a.resize(n, 0.0);
        self.b.resize(n, 0.0);
    }
}

pub trait Scheme: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Writes the forward-Euler update of `u` over `dt` into `out`. A
    /// non-positive or non-finite entry in `out` signals positivity loss.
    fn advance(&self, u: &[f64], dt: f64, alpha: f64, spacing: f64, work: &mut Workspace, out: &mut [f64]);
}

/// Largest step allowed by the CFL policy for the current state.
pub fn stable_dt(u: &[f64], alpha: f64, spacing: f64, cfl_safety: f64) -> f64 {
    let umax = u.iter().copied().fold(0.0, f64::max);
    // max u^{1+1/α} = (max u)^{1+1/α} by monotonicity.
    cfl_safety * spacing * spacing / (2.0 * alpha * umax.powf(1.0 + 1.0 / alpha))
}

/// u_t = α u^{1+1/α}(u_θθ + u) with the odd ghost closure.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpeedForm;

impl Scheme for SpeedForm {
    fn name(&self) -> &'static str {
        "u-form"
    }

    fn advance(&self, u: &[f64], dt: f64, alpha: f64, spacing: f64, work: &mut Workspace, out: &mut [f64]) {
        work.ensure(u.len());
        second_derivative_into(u, spacing, BoundaryClosure::OddGhost, &mut work.a);
        let curv = Power::new(1.0 / alpha);
        let c = alpha * dt;
        for i in 0..u.len() {
            let ui = u[i];
            out[i] = ui + c * ui * curv.apply(ui) * (work.a[i] + ui);
        }
    }
}

/// u-form with the zeroth-order term scaled by c_h = (2 − 2cos Δθ)/Δθ², the
/// exact symbol of the discrete second difference on sin θ. Every multiple of
/// sin θ is then a discrete steady state.
#[derive(Debug, Clone, Copy, Default)]
pub struct BalancedSpeedForm;

impl Scheme for BalancedSpeedForm {
    fn name(&self) -> &'static str {
        "u-form-balanced"
    }

    fn advance(&self, u: &[f64], dt: f64, alpha: f64, spacing: f64, work: &mut Workspace, out: &mut [f64]) {
        work.ensure(u.len());
        second_derivative_into(u, spacing, BoundaryClosure::OddGhost, &mut work.a);
        let curv = Power::new(1.0 / alpha);
        let c = alpha * dt;
        let half = 0.5 * spacing;
        let symbol = (half.sin() / half).powi(2);
        for i in 0..u.len() {
            let ui = u[i];
            out[i] = ui + c * ui * curv.apply(ui) * (work.a[i] + symbol * ui);
        }
    }
}

/// p_t = α p p_θθ − α/(α+1)·p_θ² + (α+1)p² for p = u^{(α+1)/α}; u is
/// recovered as p^{α/(α+1)}. See [`pressure_update`] for the end closure.
#[derive(Debug, Clone, Copy, Default)]
pub struct PressureForm;

impl Scheme for PressureForm {
    fn name(&self) -> &'static str {
        "pressure-form"
    }

    fn advance(&self, u: &[f64], dt: f64, alpha: f64, spacing: f64, work: &mut Workspace, out: &mut [f64]) {
        let n = u.len();
        work.ensure(n);
        let curv = Power::new(1.0 / alpha);
        for i in 0..n {
            work.b[i] = u[i] * curv.apply(u[i]);
        }
        pressure_update(&work.b, dt, alpha, spacing, &mut work.a, out);
        let back = Power::new(alpha / (alpha + 1.0));
        for v in out.iter_mut() {
            if *v > 0.0 {
                *v = back.apply(*v);
            }
        }
    }
}

/// One explicit pressure-form step from `p` into `out`; `d2` is scratch.
///
/// Interior nodes use centered differences. At the two end nodes p is
/// fitted by aθ^γ + bθ^{γ+1} (γ = 1 + 1/α, θ measured from the end) through
/// the two outermost values and differentiated exactly. An even ghost alone
/// only imposes p_θ = 0 at the end and leaves a growing mode p(0) ≠ 0; the fit
/// also imposes the vanishing rate p ~ θ^γ of admissible data, which makes
/// the end node stable.
pub(crate) fn pressure_update(p: &[f64], dt: f64, alpha: f64, spacing: f64, d2: &mut [f64], out: &mut [f64]) {
    let n = p.len();
    second_derivative_into(p, spacing, BoundaryClosure::EvenGhost, d2);
    let inv2h = 0.5 / spacing;
    let grad_coef = alpha / (alpha + 1.0);
    let rate = |pi: f64, pxx: f64, px: f64| alpha * pi * pxx - grad_coef * px * px + (alpha + 1.0) * pi * pi;
    for i in 1..n - 1 {
        let dp = (p[i + 1] - p[i - 1]) * inv2h;
        out[i] = p[i] + dt * rate(p[i], d2[i], dp);
    }
    let gamma = 1.0 + 1.0 / alpha;
    for (end, next) in [(0, 1), (n - 1, n - 2)] {
        let (px, pxx) = end_fit(p[end], p[next], gamma, 0.5 * spacing);
        out[end] = p[end] + dt * rate(p[end], pxx, px);
    }
}

/// |p_θ| and p_θθ at distance θ₀ from the end for the fit aθ^γ + bθ^{γ+1}
/// through the values at θ₀ and 3θ₀.
fn end_fit(p0: f64, p1: f64, gamma: f64, theta0: f64) -> (f64, f64) {
    let g3 = 3f64.powf(gamma);
    let a = (3.0 * g3 * p0 - p1) / (2.0 * g3);
    let b = p0 - a;
    let px = (gamma * a + (gamma + 1.0) * b) / theta0;
    let pxx = gamma * ((gamma - 1.0) * a + (gamma + 1.0) * b) / (theta0 * theta0);
    (px, pxx)
}

/// Name-keyed registry of schemes.
#[derive(Debug, Clone)]
pub struct SchemeRegistry {
    schemes: BTreeMap<&'static str, Arc<dyn Scheme>>,
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut r = Self {
            schemes: BTreeMap::new(),
        };
        r.register(Arc::new(SpeedForm));
        r.register(Arc::new(PressureForm));
        r.register(Arc::new(BalancedSpeedForm));
        r
    }
}

impl SchemeRegistry {
    pub fn register(&mut self, scheme: Arc<dyn Scheme>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Scheme>> {
        self.schemes.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "scheme",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemes.keys().copied()
    }
}
