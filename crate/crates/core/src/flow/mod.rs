//! Time integration of the flow in the normal-angle gauge.
//!
//! The speed u = κ^α obeys u_t = α u^{1+1/α}(u_θθ + u) and the support
//! function S obeys S_t = −u. Both are advanced together by explicit Euler
//! steps under a CFL restriction; a step that would make u non-positive is
//! retried with half the step size.

pub mod initial;
pub mod pressure;
pub mod scheme;

use serde::{Deserialize, Serialize};

pub use initial::{build_initial, build_initial_seeded, InitialDataRecipe, RecipeKind};
pub use pressure::{step_pressure, PressureState};
pub use scheme::{stable_dt, BalancedSpeedForm, PressureForm, Scheme, SchemeRegistry, SpeedForm, Workspace};

use crate::domain::calculus::second_derivative_into;
use crate::domain::{AngularGrid, BoundaryClosure, FlowParams, Power, SpeedProfile, SupportState};
use crate::error::{Error, Result};

/// Maximum number of step halvings after a positivity failure.
pub const MAX_HALVINGS: u32 = 10;

/// Speed and support function at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub u: SpeedProfile,
    pub s: SupportState,
    pub t: f64,
    pub step_count: u64,
    pub dt_last: f64,
}

impl FlowState {
    pub fn new(u: SpeedProfile, s: SupportState) -> Result<Self> {
        if u.grid() != s.grid() {
            return Err(Error::Precondition("speed and support use different grids".into()));
        }
        if u.time() != s.time() {
            return Err(Error::Precondition("speed and support carry different times".into()));
        }
        let t = u.time();
        Ok(Self {
            u,
            s,
            t,
            step_count: 0,
            dt_last: 0.0,
        })
    }

    pub fn grid(&self) -> AngularGrid {
        self.u.grid()
    }

    fn from_parts(grid: AngularGrid, u: &[f64], s: &[f64], t: f64, step_count: u64, dt_last: f64) -> Result<Self> {
        Ok(Self {
            u: SpeedProfile::new(grid, u.to_vec(), t)?,
            s: SupportState::new(grid, s.to_vec(), t)?,
            t,
            step_count,
            dt_last,
        })
    }
}

/// α u^{1+1/α}(D²u + u) at every node.
pub fn rhs_u(u: &SpeedProfile, alpha: f64) -> Vec<f64> {
    let n = u.values().len();
    let mut d2 = vec![0.0; n];
    second_derivative_into(u.values(), u.grid().spacing(), BoundaryClosure::OddGhost, &mut d2);
    let curv = Power::new(1.0 / alpha);
    u.values()
        .iter()
        .zip(&d2)
        .map(|(&v, &d)| alpha * v * curv.apply(v) * (d + v))
        .collect()
}

/// Step-size statistics of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtStats {
    pub steps: u64,
    pub halvings: u64,
    pub min_dt: f64,
    pub max_dt: f64,
}

impl Default for DtStats {
    fn default() -> Self {
        Self {
            steps: 0,
            halvings: 0,
            min_dt: f64::INFINITY,
            max_dt: 0.0,
        }
    }
}

impl DtStats {
    fn record(&mut self, dt: f64, halvings: u32) {
        self.steps += 1;
        self.halvings += u64::from(halvings);
        self.min_dt = self.min_dt.min(dt);
        self.max_dt = self.max_dt.max(dt);
    }
}

/// Owns the buffers of one integration loop.
struct Integrator<'a> {
    scheme: &'a dyn Scheme,
    alpha: f64,
    cfl: f64,
    spacing: f64,
    u: Vec<f64>,
    s: Vec<f64>,
    next: Vec<f64>,
    work: Workspace,
    t: f64,
    steps: u64,
    dt_last: f64,
    stats: DtStats,
}

impl<'a> Integrator<'a> {
    fn new(state: &FlowState, params: &FlowParams, scheme: &'a dyn Scheme) -> Self {
        let n = state.grid().len();
        Self {
            scheme,
            alpha: params.alpha,
            cfl: params.cfl_safety,
            spacing: state.grid().spacing(),
            u: state.u.values().to_vec(),
            s: state.s.values().to_vec(),
            next: vec![0.0; n],
            work: Workspace::default(),
            t: state.t,
            steps: state.step_count,
            dt_last: state.dt_last,
            stats: DtStats::default(),
        }
    }

    /// One accepted step of at most `max_dt`; returns the step taken.
    fn step(&mut self, max_dt: f64) -> Result<f64> {
        let mut dt = stable_dt(&self.u, self.alpha, self.spacing, self.cfl).min(max_dt);
        for halvings in 0..=MAX_HALVINGS {
            self.scheme
                .advance(&self.u, dt, self.alpha, self.spacing, &mut self.work, &mut self.next);
            if self.next.iter().all(|v| v.is_finite() && *v > 0.0) {
                for (s, u) in self.s.iter_mut().zip(&self.u) {
                    *s -= dt * u;
                }
                std::mem::swap(&mut self.u, &mut self.next);
                self.t += dt;
                self.steps += 1;
                self.dt_last = dt;
                self.stats.record(dt, halvings);
                return Ok(dt);
            }
            dt *= 0.5;
        }
        Err(Error::PositivityLoss {
            t: self.t,
            halvings: MAX_HALVINGS,
        })
    }

    /// Steps until exactly `target`, landing on it with a shortened last step.
    fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.t < target {
            let remaining = target - self.t;
            self.step(remaining)?;
            // Absorb round-off so the loop does not take a sub-ulp step.
            if (target - self.t).abs() <= 1e-12 * target.abs().max(1.0) {
                self.t = target;
            }
        }
        Ok(())
    }

    fn snapshot(&self, grid: AngularGrid) -> Result<FlowState> {
        FlowState::from_parts(grid, &self.u, &self.s, self.t, self.steps, self.dt_last)
    }
}

/// One explicit step with the default (u-form) scheme.
pub fn step(state: &FlowState, params: &FlowParams) -> Result<FlowState> {
    step_with(state, params, &SpeedForm)
}

pub fn step_with(state: &FlowState, params: &FlowParams, scheme: &dyn Scheme) -> Result<FlowState> {
    let mut it = Integrator::new(state, params, scheme);
    it.step(f64::INFINITY)?;
    it.snapshot(state.grid())
}

/// Receives read-only snapshots at the sample times.
pub trait Observer {
    fn observe(&mut self, state: &FlowState) -> Result<()>;
}

impl<F: FnMut(&FlowState)> Observer for F {
    fn observe(&mut self, state: &FlowState) -> Result<()> {
        self(state);
        Ok(())
    }
}

/// Sampled states of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub alpha: f64,
    pub grid: AngularGrid,
    pub scheme: String,
    pub samples: Vec<TraceSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

impl Trace {
    pub fn new(alpha: f64, grid: AngularGrid, scheme: &str) -> Self {
        Self {
            alpha,
            grid,
            scheme: scheme.to_string(),
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, state: &FlowState) {
        self.samples.push(TraceSample {
            t: state.t,
            u: state.u.values().to_vec(),
            s: state.s.values().to_vec(),
        });
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn speed(&self, k: usize) -> Result<SpeedProfile> {
        let s = &self.samples[k];
        SpeedProfile::new(self.grid, s.u.clone(), s.t)
    }

    pub fn support(&self, k: usize) -> Result<SupportState> {
        let s = &self.samples[k];
        SupportState::new(self.grid, s.s.clone(), s.t)
    }

    /// Index of the sample closest to time `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        (0..self.samples.len()).min_by(|&a, &b| {
            let da = (self.samples[a].t - t).abs();
            let db = (self.samples[b].t - t).abs();
            da.total_cmp(&db)
        })
    }

    /// Samples with time in [from, to].
    pub fn window(&self, from: f64, to: f64) -> Trace {
        Trace {
            alpha: self.alpha,
            grid: self.grid,
            scheme: self.scheme.clone(),
            samples: self
                .samples
                .iter()
                .filter(|s| s.t >= from && s.t <= to)
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: FlowState,
    pub trace: Trace,
    pub stats: DtStats,
}

/// Integrates to `params.t_end`, recording the state and calling every
/// observer at each sample time in [state.t, t_end]. Sample times must be
/// increasing.
pub fn evolve(
    state: FlowState,
    params: &FlowParams,
    scheme: &dyn Scheme,
    sample_times: &[f64],
    observers: &mut [&mut dyn Observer],
) -> Result<Evolution> {
    params.validate_slab()?;
    if params.t_end < state.t {
        return Err(Error::Precondition(format!(
            "t_end {} precedes the state time {}",
            params.t_end, state.t
        )));
    }
    if sample_times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("sample times must be strictly increasing".into()));
    }
    let grid = state.grid();
    let mut trace = Trace::new(params.alpha, grid, scheme.name());
    let record = |st: &FlowState, trace: &mut Trace, observers: &mut [&mut dyn Observer]| -> Result<()> {
        trace.push(st);
        for o in observers.iter_mut() {
            o.observe(st)?;
        }
        Ok(())
    };

    let mut it = Integrator::new(&state, params, scheme);
    for &ts in sample_times.iter().filter(|&&ts| ts >= state.t && ts <= params.t_end) {
        it.advance_to(ts)?;
        record(&it.snapshot(grid)?, &mut trace, observers)?;
    }
    it.advance_to(params.t_end)?;
    let stats = it.stats;
    let end = if it.steps == state.step_count { state } else { it.snapshot(grid)? };
    log::debug!(
        "evolved to t = {} in {} steps (dt in [{:e}, {:e}], {} halvings)",
        end.t,
        stats.steps,
        stats.min_dt,
        stats.max_dt,
        stats.halvings
    );
    Ok(Evolution {
        state: end,
        trace,
        stats,
    })
}

/// `count` evenly spaced sample times from `from` to `to` inclusive.
pub fn uniform_samples(from: f64, to: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![to],
        _ => (0..count)
            .map(|k| from + (to - from) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_grid;
    use crate::soliton::translator_speed;

    fn translator_state(alpha: f64, n: usize) -> FlowState {
        let grid = make_grid(n).unwrap();
        build_initial(&InitialDataRecipe::translator(), grid, alpha).unwrap()
    }

    #[test]
    fn rhs_vanishes_on_translator() {
        let alpha = 1.0;
        let st = translator_state(alpha, 128);
        let r = rhs_u(&st.u, alpha);
        let h = st.grid().spacing();
        assert!(r.iter().all(|v| v.abs() < h * h), "{:?}", &r[..4]);
    }

    #[test]
    fn rhs_of_constant_interior() {
        let alpha: f64 = 2.0;
        let grid = make_grid(32).unwrap();
        let c: f64 = 0.8;
        let u = SpeedProfile::new(grid, vec![c; 32], 0.0).unwrap();
        let r = rhs_u(&u, alpha);
        let expect = alpha * c.powf(2.0 + 1.0 / alpha);
        for v in &r[1..31] {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_sign_follows_curvature_defect() {
        // Oracle: analytic u'' for u = sin θ + 0.3 sin 2θ.
        let alpha = 0.75;
        let grid = make_grid(256).unwrap();
        let f = |t: f64| t.sin() + 0.3 * (2.0 * t).sin();
        let fpp_plus_f = |t: f64| -0.9 * (2.0 * t).sin();
        let u = SpeedProfile::from_fn(grid, 0.0, f).unwrap();
        let r = rhs_u(&u, alpha);
        for i in 0..grid.len() {
            let exact = fpp_plus_f(grid.theta(i));
            if exact.abs() > 1e-2 {
                assert_eq!(r[i].signum(), exact.signum(), "node {i}");
            }
        }
    }

    #[test]
    fn translator_step_is_stationary_and_support_descends() {
        let alpha = 1.0;
        let st = translator_state(alpha, 64);
        let params = FlowParams::new(alpha, 64, 1.0);
        let next = step(&st, &params).unwrap();
        let dt = next.dt_last;
        assert_eq!(next.step_count, 1);
        let m = translator_speed(alpha).unwrap();
        let h = st.grid().spacing();
        for i in 0..64 {
            let th = st.grid().theta(i);
            assert!((next.u.values()[i] - st.u.values()[i]).abs() <= 10.0 * h * h * dt);
            let ds = next.s.values()[i] - st.s.values()[i];
            assert!((ds + dt * m * th.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn cfl_step_is_accepted_first_time() {
        let st = translator_state(1.0, 64);
        let params = FlowParams::new(1.0, 64, 1.0);
        let mut it = Integrator::new(&st, &params, &SpeedForm);
        it.step(f64::INFINITY).unwrap();
        assert_eq!(it.stats.halvings, 0);
        let expect = stable_dt(st.u.values(), 1.0, st.grid().spacing(), 0.25);
        assert_eq!(it.stats.max_dt, expect);
    }

    #[test]
    fn one_step_preserves_order() {
        let alpha = 1.0;
        let grid = make_grid(64).unwrap();
        let params = FlowParams::new(alpha, 64, 1.0);
        let a = build_initial(&InitialDataRecipe::translator(), grid, alpha).unwrap();
        let mut recipe = InitialDataRecipe::perturbation(1.1, vec![0.05], vec![]);
        recipe.normalize_width = false;
        let b = build_initial(&recipe, grid, alpha).unwrap();
        assert!(a.u.values().iter().zip(b.u.values()).all(|(x, y)| x <= y));
        // Same step size for both so the update is the same monotone map.
        let dt = stable_dt(b.u.values(), alpha, grid.spacing(), 0.25);
        let mut w = Workspace::default();
        let mut ua = vec![0.0; 64];
        let mut ub = vec![0.0; 64];
        SpeedForm.advance(a.u.values(), dt, alpha, grid.spacing(), &mut w, &mut ua);
        SpeedForm.advance(b.u.values(), dt, alpha, grid.spacing(), &mut w, &mut ub);
        assert!(ua.iter().zip(&ub).all(|(x, y)| x <= &(y + 1e-12)));
        let _ = params;
    }

    #[test]
    fn evolve_to_current_time_is_identity() {
        let st = translator_state(1.0, 32);
        let params = FlowParams::new(1.0, 32, 0.0);
        let ev = evolve(st.clone(), &params, &SpeedForm, &[], &mut []).unwrap();
        assert_eq!(ev.state, st);
        assert_eq!(ev.stats.steps, 0);
    }

    #[test]
    fn evolve_lands_on_samples_and_calls_observers() {
        let st = translator_state(1.0, 32);
        let params = FlowParams::new(1.0, 32, 0.3);
        let mut seen = Vec::new();
        let mut obs = |s: &FlowState| seen.push(s.t);
        let samples = [0.0, 0.1, 0.2, 0.25, 0.5];
        let ev = evolve(st, &params, &SpeedForm, &samples, &mut [&mut obs]).unwrap();
        assert_eq!(seen, vec![0.0, 0.1, 0.2, 0.25]);
        assert_eq!(ev.trace.times(), seen);
        assert_eq!(ev.state.t, 0.3);
    }

    #[test]
    fn symmetric_data_stays_bitwise_symmetric() {
        let alpha = 0.75;
        let grid = make_grid(48).unwrap();
        let vals: Vec<f64> = (0..48)
            .map(|i| {
                let t = grid.theta(i.min(47 - i));
                t.sin() * (1.0 + 0.2 * (3.0 * t).sin() + 0.1 * (2.0 * t).cos())
            })
            .collect();
        let u = SpeedProfile::new(grid, vals, 0.0).unwrap();
        let st = initial::state_from_speed(u, alpha, true).unwrap();
        let params = FlowParams::new(alpha, 48, 0.2);
        let ev = evolve(st, &params, &SpeedForm, &[], &mut []).unwrap();
        let u = ev.state.u.values();
        for i in 0..48 {
            assert_eq!(u[i], u[47 - i]);
        }
    }

    #[test]
    fn positivity_loss_is_reported() {
        // A spike against a near-zero neighbor with a huge forced step.
        let grid = make_grid(16).unwrap();
        let mut vals = vec![1e-3; 16];
        vals[8] = 5.0;
        let u = SpeedProfile::new(grid, vals, 0.0).unwrap();
        let s = SupportState::new(grid, vec![0.0; 16], 0.0).unwrap();
        let st = FlowState::new(u, s).unwrap();
        let params = FlowParams::new(1.0, 16, 1.0).with_cfl(0.999);
        let mut it = Integrator::new(&st, &params, &SpeedForm);
        // cfl < 1 keeps the scheme monotone: the spike step is accepted.
        assert!(it.step(f64::INFINITY).is_ok());

        #[derive(Debug)]
        struct Explode;
        impl Scheme for Explode {
            fn name(&self) -> &'static str {
                "explode"
            }
            fn advance(&self, _: &[f64], _: f64, _: f64, _: f64, _: &mut Workspace, out: &mut [f64]) {
                out.fill(-1.0);
            }
        }
        let err = step_with(&st, &params, &Explode).unwrap_err();
        assert!(matches!(err, Error::PositivityLoss { halvings: MAX_HALVINGS, .. }));
    }

    #[test]
    fn evolve_rejects_subcritical_alpha() {
        let st = translator_state(1.0, 32);
        let params = FlowParams::new(0.5, 32, 1.0);
        assert!(matches!(evolve(st, &params, &SpeedForm, &[], &mut []), Err(Error::Config(_))));
    }
}
