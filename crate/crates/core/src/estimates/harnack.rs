//! Differential Harnack inequality: t^{1/(α+1)}·κ(θ, t) is nondecreasing in t
//! at every fixed normal angle, for flows started at t = 0.

use super::{EstimateReport, Location};
use crate::domain::Power;
use crate::flow::Trace;

/// Relative slack (q_b − q_a)/q_a between consecutive samples of
/// q = t^{1/(α+1)}κ, minimized over nodes and sample pairs. Samples at t ≤ 0
/// are skipped.
pub fn check_harnack(trace: &Trace, tolerance: f64) -> EstimateReport {
    let alpha = trace.alpha;
    let curv = Power::new(1.0 / alpha);
    let clock = 1.0 / (alpha + 1.0);
    let samples: Vec<_> = trace.samples.iter().filter(|s| s.t > 0.0).collect();
    let mut worst = (f64::INFINITY, Location::default());
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ca, cb) = (a.t.powf(clock), b.t.powf(clock));
        for i in 0..a.u.len() {
            let qa = ca * curv.apply(a.u[i]);
            let qb = cb * curv.apply(b.u[i]);
            let slack = (qb - qa) / qa;
            if slack < worst.0 {
                worst = (slack, Location::at(trace.grid.theta(i), b.t));
            }
        }
    }
    if samples.len() < 2 {
        return EstimateReport::new("harnack", super::Verdict::Trend, tolerance)
            .note("fewer than two samples with t > 0");
    }
    EstimateReport::from_slack("harnack", worst.0, tolerance)
        .at(worst.1)
        .with("pairs", (samples.len() - 1) as f64)
}
