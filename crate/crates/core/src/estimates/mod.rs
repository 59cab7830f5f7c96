//! Numerical checks of the quantitative estimates satisfied by the flow.
//!
//! Every check produces an [`EstimateReport`]: a verdict, the measured
//! constants, the worst location and the tolerance used. Statements that are
//! asymptotic (a liminf, an unspecified exponent) are reported as
//! [`Verdict::Trend`] rather than forced into pass/fail.

pub mod barrier;
pub mod decay;
pub mod entropy;
pub mod harnack;
pub mod monitors;
pub mod poincare;
pub mod registry;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use barrier::{barrier_residual, bisect_barrier_amplitude, fd_barrier_residual, BarrierSpec, FdBarrier};
pub use decay::{boundary_flux, check_decay, check_decay_rate, check_flux_decay, check_gradient_decay, check_second_derivative_decay, DecayOptions};
pub use entropy::{
    boundary_term, dissipation, entropy, entropy_identity, entropy_identity_windows, entropy_trace,
    EntropyTrace,
};
pub use harnack::check_harnack;
pub use monitors::{
    check_convergence, check_curvature_bounds, check_fd_lower_bound, check_ordering, check_stationarity,
    check_support_compatibility, check_tip_kinematics, check_width, translator_distance, translator_errors,
    ConvergenceOptions,
};
pub use poincare::{check_poincare, poincare_oracle};
pub use registry::{Check, CheckInput, CheckRegistry, CheckRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured and reported, no pass/fail claim.
    Trend,
}

/// Where the smallest slack was found.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub theta: Option<f64>,
    pub t: Option<f64>,
}

impl Location {
    pub fn at(theta: f64, t: f64) -> Self {
        Self {
            theta: Some(theta),
            t: Some(t),
        }
    }

    pub fn time(t: f64) -> Self {
        Self { theta: None, t: Some(t) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub verdict: Verdict,
    pub constants: BTreeMap<String, f64>,
    pub worst: Location,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl EstimateReport {
    pub fn new(name: &str, verdict: Verdict, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            verdict,
            constants: BTreeMap::new(),
            worst: Location::default(),
            tolerance,
            note: String::new(),
        }
    }

    /// Pass exactly when `slack ≥ −tolerance`.
    pub fn from_slack(name: &str, slack: f64, tolerance: f64) -> Self {
        let verdict = if slack >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        Self::new(name, verdict, tolerance).with("slack", slack)
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn at(mut self, worst: Location) -> Self {
        self.worst = worst;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Everything but an explicit failure.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }
}

/// Least-squares slope of ln y against ln x over the positive pairs.
pub(crate) fn log_log_slope(points: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// ∫ f dt over sample times: composite Simpson when the samples are uniform
/// and their count is odd, trapezoid otherwise.
pub(crate) fn integrate_samples(t: &[f64], f: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    let h = (t[n - 1] - t[0]) / (n - 1) as f64;
    let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if uniform && n % 2 == 1 && n >= 3 {
        let mut acc = f[0] + f[n - 1];
        for (k, v) in f.iter().enumerate().take(n - 1).skip(1) {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * v;
        }
        acc * h / 3.0
    } else {
        t.windows(2)
            .zip(f.windows(2))
            .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
            .sum()
    }
}
