//! Checks selectable by name, each with its own JSON options.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::barrier::{barrier_residual, bisect_barrier_amplitude, fd_barrier_residual, BarrierSpec, FdBarrier};
use super::decay::{check_decay, check_flux_decay, check_gradient_decay, check_second_derivative_decay, DecayOptions};
use super::entropy::{entropy_identity_windows, entropy_trace};
use super::harnack::check_harnack;
use super::monitors::{
    check_convergence, check_curvature_bounds, check_fd_lower_bound, check_stationarity,
    check_support_compatibility, check_tip_kinematics, check_width, ConvergenceOptions,
};
use super::poincare::check_poincare;
use super::{EstimateReport, Location, Verdict};
use crate::domain::SpeedProfile;
use crate::error::{Error, Result};
use crate::flow::Trace;

/// What a check runs on.
#[derive(Debug, Clone, Copy)]
pub struct CheckInput<'a> {
    pub trace: &'a Trace,
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;

    /// `options` is `null` for the defaults or an object of overrides.
    fn run(&self, input: &CheckInput<'_>, options: &Value) -> Result<EstimateReport>;
}

/// A check name with its options, as written in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub name: String,
    #[serde(default)]
    pub options: Value,
}

impl CheckRequest {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            options: Value::Null,
        }
    }
}

struct FnCheck<O> {
    name: &'static str,
    run: fn(&Trace, &O) -> Result<EstimateReport>,
}

impl<O: DeserializeOwned + Default> Check for FnCheck<O> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn run(&self, input: &CheckInput<'_>, options: &Value) -> Result<EstimateReport> {
        let opts: O = if options.is_null() {
            O::default()
        } else {
            serde_json::from_value(options.clone())
                .map_err(|e| Error::Config(format!("options for check `{}`: {e}", self.name)))?
        };
        (self.run)(input.trace, &opts)
    }
}

#[derive(Clone)]
pub struct CheckRegistry {
    checks: BTreeMap<&'static str, Arc<dyn Check>>,
}

impl std::fmt::Debug for CheckRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.checks.keys()).finish()
    }
}

impl CheckRegistry {
    pub fn empty() -> Self {
        Self {
            checks: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, check: Arc<dyn Check>) {
        self.checks.insert(check.name(), check);
    }

    fn add<O: DeserializeOwned + Default + 'static>(
        &mut self,
        name: &'static str,
        run: fn(&Trace, &O) -> Result<EstimateReport>,
    ) {
        self.register(Arc::new(FnCheck { name, run }));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Check>> {
        self.checks.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "check",
            name: name.to_string(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.checks.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.keys().copied()
    }

    pub fn run(&self, request: &CheckRequest, input: &CheckInput<'_>) -> Result<EstimateReport> {
        self.get(&request.name)?.run(input, &request.options)
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.add("harnack", |t, o: &HarnackOpts| Ok(check_harnack(&t.window(o.from, f64::INFINITY), o.tolerance)));
        r.add("entropy_identity", run_entropy_identity);
        r.add("dissipation_vanishing", run_dissipation_vanishing);
        r.add("decay", |t, o: &ProfileOpts| {
            over_samples(t, o.t_min.unwrap_or(3.0), |u| Ok(check_decay(u, &o.decay())))
        });
        r.add("gradient_decay", |t, o: &ProfileOpts| {
            let beta = o.beta.unwrap_or_else(|| default_beta(t.alpha));
            over_samples(t, o.t_min.unwrap_or(1.0), |u| Ok(check_gradient_decay(u, t.alpha, beta, &o.decay())))
        });
        r.add("second_derivative_decay", |t, o: &ProfileOpts| {
            let beta = o.beta.unwrap_or_else(|| default_beta(t.alpha));
            over_samples(t, o.t_min.unwrap_or(1.0), |u| {
                Ok(check_second_derivative_decay(u, t.alpha, beta, o.epsilon, &o.decay()))
            })
        });
        r.add("flux_decay", |t, o: &FluxOpts| {
            over_samples(t, o.t_min, |u| Ok(check_flux_decay(u, t.alpha, o.outer_fraction, o.fit_nodes, o.abs_tolerance)))
        });
        r.add("fd_lower_bound", |t, o: &RadiusOpts| check_fd_lower_bound(t, o.radius));
        r.add("curvature_bounds", |t, o: &DeltaOpts| check_curvature_bounds(t, o.delta));
        r.add("stationarity", |t, o: &TolOpts| Ok(check_stationarity(t, o.tolerance)));
        r.add("convergence", |t, o: &ConvergenceOptions| check_convergence(t, o));
        r.add("width", |t, o: &WidthOpts| check_width(t, o.target, o.tolerance));
        r.add("support_compatibility", |t, o: &CompatOpts| {
            check_support_compatibility(t, o.min_sin, o.coefficient)
        });
        r.add("tip_kinematics", |t, o: &TolOpts| check_tip_kinematics(t, o.tolerance));
        r.add("barrier", run_barrier);
        r.add("fd_barrier", run_fd_barrier);
        r.add("poincare", run_poincare);
        r
    }
}

/// Below min(1, 1/α) for α ≥ 1; the fast-diffusion exponent (1 + 1/α)/2 for
/// α < 1.
fn default_beta(alpha: f64) -> f64 {
    if alpha < 1.0 {
        0.5 * (1.0 + 1.0 / alpha)
    } else {
        0.9 * (1.0f64).min(1.0 / alpha)
    }
}

/// Runs a profile check on every sample with t ≥ t_min. The verdict fails if
/// any sample fails; constants come from the sample with the smallest end
/// slope (or the first failure), with `sup` maximized over all samples.
fn over_samples(
    trace: &Trace,
    t_min: f64,
    check: impl Fn(&SpeedProfile) -> Result<EstimateReport>,
) -> Result<EstimateReport> {
    let mut worst: Option<EstimateReport> = None;
    let mut sup = 0.0f64;
    for k in 0..trace.len() {
        if trace.samples[k].t < t_min {
            continue;
        }
        let r = check(&trace.speed(k)?)?;
        sup = sup.max(r.constant("sup").unwrap_or(0.0));
        let key = |r: &EstimateReport| (r.verdict != Verdict::Fail, r.constant("end_slope").unwrap_or(0.0));
        let replace = match &worst {
            None => true,
            Some(w) => !key(&r).0 & key(w).0 || (key(&r).0 == key(w).0 && key(&r).1 < key(w).1),
        };
        if replace {
            worst = Some(r);
        }
    }
    match worst {
        Some(r) => Ok(if r.constants.contains_key("sup") { r.with("sup", sup) } else { r }),
        None => Ok(EstimateReport::new("profile", Verdict::Trend, 0.0).note(format!("no samples with t ≥ {t_min}"))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HarnackOpts {
    tolerance: f64,
    from: f64,
}

impl Default for HarnackOpts {
    fn default() -> Self {
        Self { tolerance: 1e-6, from: 0.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EntropyOpts {
    epsilon: f64,
    window: f64,
    tolerance: f64,
    /// The residual scale is at least floor_factor·|J(floor_time)|.
    floor_time: f64,
    floor_factor: f64,
}

impl Default for EntropyOpts {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            window: 1.0,
            tolerance: 0.05,
            floor_time: 2.0,
            floor_factor: 1e-6,
        }
    }
}

fn run_entropy_identity(trace: &Trace, o: &EntropyOpts) -> Result<EstimateReport> {
    let e = entropy_trace(trace, o.epsilon)?;
    let floor = trace.nearest(o.floor_time).map_or(0.0, |k| o.floor_factor * e.j[k].abs());
    Ok(entropy_identity_windows(&e, o.window, floor, o.tolerance).with("floor", floor))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VanishingOpts {
    epsilon: f64,
    early: f64,
    /// Defaults to the last sample.
    late: Option<f64>,
    ratio: f64,
}

impl Default for VanishingOpts {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            early: 1.0,
            late: None,
            ratio: 0.1,
        }
    }
}

fn run_dissipation_vanishing(trace: &Trace, o: &VanishingOpts) -> Result<EstimateReport> {
    let name = "dissipation_vanishing";
    let (Some(a), Some(b)) = (trace.nearest(o.early), o.late.map_or(trace.len().checked_sub(1), |t| trace.nearest(t)))
    else {
        return Ok(EstimateReport::new(name, Verdict::Trend, o.ratio).note("empty trace"));
    };
    let e = entropy_trace(trace, o.epsilon)?;
    let measured = e.d[b] / e.d[a];
    let verdict = if e.d[b] <= o.ratio * e.d[a] { Verdict::Pass } else { Verdict::Fail };
    Ok(EstimateReport::new(name, verdict, o.ratio)
        .with("d_early", e.d[a])
        .with("d_late", e.d[b])
        .with("measured_ratio", measured)
        .at(Location::time(e.times[b])))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ProfileOpts {
    t_min: Option<f64>,
    beta: Option<f64>,
    epsilon: f64,
    theta_max: f64,
    slope_nodes: usize,
    slope_tolerance: f64,
}

impl Default for ProfileOpts {
    fn default() -> Self {
        let d = DecayOptions::default();
        Self {
            t_min: None,
            beta: None,
            epsilon: 0.05,
            theta_max: d.theta_max,
            slope_nodes: d.slope_nodes,
            slope_tolerance: d.slope_tolerance,
        }
    }
}

impl ProfileOpts {
    fn decay(&self) -> DecayOptions {
        DecayOptions {
            theta_max: self.theta_max,
            slope_nodes: self.slope_nodes,
            slope_tolerance: self.slope_tolerance,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FluxOpts {
    t_min: f64,
    outer_fraction: f64,
    fit_nodes: usize,
    abs_tolerance: f64,
}

impl Default for FluxOpts {
    fn default() -> Self {
        Self {
            t_min: 1.0,
            outer_fraction: 0.2,
            fit_nodes: 8,
            abs_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RadiusOpts {
    radius: f64,
}

impl Default for RadiusOpts {
    fn default() -> Self {
        Self { radius: 2.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeltaOpts {
    delta: f64,
}

impl Default for DeltaOpts {
    fn default() -> Self {
        Self { delta: 0.2 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TolOpts {
    tolerance: f64,
}

impl Default for TolOpts {
    fn default() -> Self {
        Self { tolerance: 1e-3 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct WidthOpts {
    target: f64,
    tolerance: f64,
}

impl Default for WidthOpts {
    fn default() -> Self {
        Self {
            target: 2.0,
            tolerance: 1e-2,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CompatOpts {
    min_sin: f64,
    coefficient: f64,
}

impl Default for CompatOpts {
    fn default() -> Self {
        Self {
            min_sin: 0.5,
            coefficient: 10.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BarrierOpts {
    t0: f64,
    delta: f64,
    samples: usize,
    /// Bisected when absent.
    amplitude: Option<f64>,
    tolerance: f64,
}

impl Default for BarrierOpts {
    fn default() -> Self {
        Self {
            t0: 2.0,
            delta: 1e-4,
            samples: 200,
            amplitude: None,
            tolerance: 1e-10,
        }
    }
}

fn run_barrier(trace: &Trace, o: &BarrierOpts) -> Result<EstimateReport> {
    let alpha = trace.alpha;
    let amplitude = match o.amplitude {
        Some(a) => a,
        None => bisect_barrier_amplitude(alpha, o.t0, o.delta, o.samples, o.tolerance)?,
    };
    let spec = BarrierSpec::new(alpha, o.t0, amplitude, o.delta)?.with_samples(o.samples);
    barrier_residual(&spec, o.tolerance)
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FdBarrierOpts {
    mu: Vec<f64>,
    x_range: (f64, f64),
    t_range: (f64, f64),
    points: usize,
    tolerance: f64,
}

impl Default for FdBarrierOpts {
    fn default() -> Self {
        Self {
            mu: vec![0.5, 1.0, 2.0],
            x_range: (-5.0, 5.0),
            t_range: (0.5, 5.0),
            points: 101,
            tolerance: 1e-8,
        }
    }
}

fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn run_fd_barrier(trace: &Trace, o: &FdBarrierOpts) -> Result<EstimateReport> {
    if !(trace.alpha > 0.0 && trace.alpha < 1.0) {
        return Ok(EstimateReport::new("fd_barrier", Verdict::Trend, o.tolerance).note("applies to α < 1 only"));
    }
    let (xs, ts) = (linspace(o.x_range, o.points), linspace(o.t_range, o.points));
    let mut worst: Option<EstimateReport> = None;
    for &mu in &o.mu {
        let r = fd_barrier_residual(&FdBarrier::new(trace.alpha, mu)?, &xs, &ts, o.tolerance)?;
        let res = r.constant("relative_residual").unwrap_or(0.0);
        if worst.as_ref().is_none_or(|w| res >= w.constant("relative_residual").unwrap_or(0.0)) {
            worst = Some(r);
        }
    }
    worst.ok_or_else(|| Error::Config("fd_barrier needs at least one μ".into()))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PoincareOpts {
    count: usize,
    modes: usize,
    deltas: Vec<f64>,
    seed: u64,
    tolerance: f64,
}

impl Default for PoincareOpts {
    fn default() -> Self {
        Self {
            count: 100,
            modes: 8,
            deltas: vec![0.1, 0.3],
            seed: 0,
            tolerance: 1e-10,
        }
    }
}

fn run_poincare(_: &Trace, o: &PoincareOpts) -> Result<EstimateReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(o.seed);
    let mut worst = (f64::INFINITY, 0.0f64);
    let mut failed = None;
    for &delta in &o.deltas {
        for _ in 0..o.count {
            let coeffs: Vec<f64> = (0..o.modes.max(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_poincare(&coeffs, delta, o.tolerance)?;
            worst.0 = worst.0.min(r.constant("slack").unwrap_or(f64::NAN));
            worst.1 = worst.1.max(r.constant("mismatch").unwrap_or(f64::NAN));
            if r.verdict == Verdict::Fail && failed.is_none() {
                failed = Some(r);
            }
        }
    }
    let verdict = if failed.is_some() { Verdict::Fail } else { Verdict::Pass };
    Ok(EstimateReport::new("poincare", verdict, o.tolerance)
        .with("min_slack", worst.0)
        .with("max_mismatch", worst.1)
        .with("functions", (o.count * o.deltas.len()) as f64))
}
