//! Closed-form residuals of explicit barrier functions.
//!
//! Both barriers are differentiated by hand; numerical differentiation would
//! bury the sign of a residual that is supposed to be exactly nonnegative (or
//! exactly zero) under truncation error.

use super::{EstimateReport, Location, Verdict};
use crate::error::{Error, Result};

/// h = A sin^{t/3}(3θ/t) + δ on θ ∈ (0, πt/6), t ∈ (0, t₀], sampled on a
/// `samples × samples` grid of that parabolic domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub alpha: f64,
    pub t0: f64,
    pub amplitude: f64,
    pub delta: f64,
    pub samples: usize,
}

impl BarrierSpec {
    pub fn new(alpha: f64, t0: f64, amplitude: f64, delta: f64) -> Result<Self> {
        let spec = Self {
            alpha,
            t0,
            amplitude,
            delta,
            samples: 200,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    /// Largest admissible t₀ (exclusive): min(3, 6/(1 + 1/α)).
    pub fn time_limit(alpha: f64) -> f64 {
        3f64.min(6.0 / (1.0 + 1.0 / alpha))
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Precondition(format!("α = {} must be positive", self.alpha)));
        }
        let limit = Self::time_limit(self.alpha);
        if !(self.t0 > 0.0 && self.t0 < limit) {
            return Err(Error::Precondition(format!(
                "t0 = {} outside (0, {limit}) for α = {}",
                self.t0, self.alpha
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Precondition(format!("amplitude {} must be positive", self.amplitude)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Precondition(format!("δ = {} must be nonnegative", self.delta)));
        }
        if self.samples < 2 {
            return Err(Error::Precondition("barrier needs at least 2 samples per axis".into()));
        }
        Ok(())
    }

    /// Sample points (θ, t) strictly inside the domain.
    fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.samples;
        (1..=n).flat_map(move |j| {
            let t = self.t0 * j as f64 / n as f64;
            let top = t * std::f64::consts::PI / 6.0;
            (1..=n).map(move |i| (top * i as f64 / (n + 1) as f64, t))
        })
    }

    /// h_t − α h^{1+1/α}(h_θθ + h) and the weight φ^{(2α+1)t/(3α)−2}.
    pub fn residual(&self, theta: f64, t: f64) -> (f64, f64) {
        let (a, alpha, delta) = (self.amplitude, self.alpha, self.delta);
        let psi = 3.0 * theta / t;
        let phi = psi.sin();
        let w = a * phi.powf(t / 3.0);
        let w_t = w / 3.0 * (phi.ln() - psi / psi.tan());
        // w_θθ + w = A(1 − 3/t)φ^{t/3−2}.
        let lap = a * (1.0 - 3.0 / t) * phi.powf(t / 3.0 - 2.0) + delta;
        let h = w + delta;
        let r = w_t - alpha * h.powf(1.0 + 1.0 / alpha) * lap;
        let weight = phi.powf((2.0 * alpha + 1.0) * t / (3.0 * alpha) - 2.0);
        (r, weight)
    }
}

/// Minimum residual over the sample grid; passes when it is ≥ −tolerance.
/// With δ = 0 the residual must also dominate a positive multiple of
/// φ^{(2α+1)t/(3α)−2}; the smallest such multiple is reported as `epsilon0`.
pub fn barrier_residual(spec: &BarrierSpec, tolerance: f64) -> Result<EstimateReport> {
    spec.validate()?;
    let mut worst = (f64::INFINITY, Location::default());
    let mut normalized = f64::INFINITY;
    for (theta, t) in spec.points() {
        let (r, weight) = spec.residual(theta, t);
        if !r.is_finite() {
            return Err(Error::Precondition(format!("non-finite barrier residual at θ = {theta}, t = {t}")));
        }
        if r < worst.0 {
            worst = (r, Location::at(theta, t));
        }
        normalized = normalized.min(r / weight);
    }
    let mut ok = worst.0 >= -tolerance;
    if spec.delta == 0.0 {
        ok &= normalized > 0.0;
    }
    Ok(
        EstimateReport::new("barrier", if ok { Verdict::Pass } else { Verdict::Fail }, tolerance)
            .with("min_residual", worst.0)
            .with("epsilon0", normalized)
            .with("amplitude", spec.amplitude)
            .with("delta", spec.delta)
            .at(worst.1),
    )
}

/// Smallest amplitude (to relative precision 1e-10) for which the sampled
/// residual passes, assuming failure below and success above it.
pub fn bisect_barrier_amplitude(alpha: f64, t0: f64, delta: f64, samples: usize, tolerance: f64) -> Result<f64> {
    let passes = |a: f64| -> Result<bool> {
        let spec = BarrierSpec::new(alpha, t0, a, delta)?.with_samples(samples);
        Ok(barrier_residual(&spec, tolerance)?.verdict == Verdict::Pass)
    };
    let mut hi = 1.0;
    let mut tries = 0;
    while !passes(hi)? {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Precondition("no passing barrier amplitude below 2^60".into()));
        }
    }
    let mut lo = hi / 2.0;
    while passes(lo)? {
        hi = lo;
        lo /= 2.0;
        if lo < 1e-300 {
            return Ok(hi);
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// U(x, t) = t^{−k}(μ^{−2} + b x² t^{−2k})^{−1/(1−α)}, k = 1/(α+1): for
/// b = (1−α)/(2α(1+α)) an explicit solution of f_t = (f^α)_xx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdBarrier {
    pub alpha: f64,
    pub mu: f64,
    pub b: f64,
}

impl FdBarrier {
    pub fn new(alpha: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Precondition(format!("fast-diffusion barrier needs α ∈ (0, 1), got {alpha}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Precondition(format!("μ = {mu} must be positive")));
        }
        Ok(Self {
            alpha,
            mu,
            b: Self::exact_b(alpha),
        })
    }

    pub fn exact_b(alpha: f64) -> f64 {
        (1.0 - alpha) / (2.0 * alpha * (1.0 + alpha))
    }

    /// Same family with a different b; only b = [`exact_b`](Self::exact_b)
    /// solves the equation.
    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    fn exponents(&self) -> (f64, f64) {
        (1.0 / (self.alpha + 1.0), 1.0 / (1.0 - self.alpha))
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let (k, g) = self.exponents();
        let z = self.mu.powi(-2) + self.b * x * x * t.powf(-2.0 * k);
        t.powf(-k) * z.powf(-g)
    }

    /// (U_t − (U^α)_xx, |U_t| + |(U^α)_xx|).
    pub fn residual(&self, x: f64, t: f64) -> (f64, f64) {
        let (k, g) = self.exponents();
        let (alpha, b) = (self.alpha, self.b);
        let s = t.powf(-2.0 * k);
        let z = self.mu.powi(-2) + b * x * x * s;
        let z_t = -2.0 * k * b * x * x * s / t;
        let z_x = 2.0 * b * x * s;
        let u_t = -k * t.powf(-k - 1.0) * z.powf(-g) - g * t.powf(-k) * z.powf(-g - 1.0) * z_t;
        let ga = g * alpha;
        let pxx = t.powf(-k * alpha) * (-ga) * ((-ga - 1.0) * z.powf(-ga - 2.0) * z_x * z_x + z.powf(-ga - 1.0) * 2.0 * b * s);
        (u_t - pxx, u_t.abs() + pxx.abs())
    }
}

/// Largest relative residual over the tensor grid `xs × ts`.
pub fn fd_barrier_residual(barrier: &FdBarrier, xs: &[f64], ts: &[f64], tolerance: f64) -> Result<EstimateReport> {
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Precondition(format!("fast-diffusion barrier needs t > 0, got {t}")));
    }
    let mut worst = (0.0f64, Location::default());
    for &t in ts {
        for &x in xs {
            let (r, scale) = barrier.residual(x, t);
            let rel = if scale > 0.0 { r.abs() / scale } else { r.abs() };
            if rel >= worst.0 {
                worst = (rel, Location { theta: Some(x), t: Some(t) });
            }
        }
    }
    let verdict = if worst.0 <= tolerance { Verdict::Pass } else { Verdict::Fail };
    Ok(EstimateReport::new("fd_barrier", verdict, tolerance)
        .with("relative_residual", worst.0)
        .with("mu", barrier.mu)
        .with("b", barrier.b)
        .at(worst.1)
        .note("worst.theta holds the spatial coordinate x"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn time_window_preconditions() {
        assert!(BarrierSpec::new(1.0, 2.9, 1.0, 0.0).is_ok());
        assert!(matches!(BarrierSpec::new(1.0, 3.1, 1.0, 0.0), Err(Error::Precondition(_))));
        // α = 1/2: the limit is 6/3 = 2.
        assert!(BarrierSpec::new(0.5, 2.0, 1.0, 0.0).is_err());
        assert!(BarrierSpec::new(1.0, 2.0, 0.0, 0.0).is_err());
        assert!(BarrierSpec::new(1.0, 2.0, 1.0, -1e-3).is_err());
    }

    #[test]
    fn residual_matches_finite_differences() {
        let spec = BarrierSpec::new(1.3, 2.0, 1.7, 1e-3).unwrap();
        let h = |theta: f64, t: f64| spec.amplitude * (3.0 * theta / t).sin().powf(t / 3.0) + spec.delta;
        let (theta, t) = (0.4, 1.5);
        let e = 1e-4;
        let h_t = (h(theta, t + e) - h(theta, t - e)) / (2.0 * e);
        let h_tt = (h(theta + e, t) - 2.0 * h(theta, t) + h(theta - e, t)) / (e * e);
        let v = h(theta, t);
        let fd = h_t - spec.alpha * v.powf(1.0 + 1.0 / spec.alpha) * (h_tt + v);
        let (r, _) = spec.residual(theta, t);
        assert!((r - fd).abs() < 1e-5 * r.abs().max(1.0), "{r} vs {fd}");
    }

    #[test]
    fn bisected_amplitude_passes_and_a_tenth_fails() {
        let a = bisect_barrier_amplitude(1.0, 2.0, 1e-4, 60, 1e-10).unwrap();
        let ok = barrier_residual(&BarrierSpec::new(1.0, 2.0, a, 1e-4).unwrap().with_samples(60), 1e-10).unwrap();
        assert_eq!(ok.verdict, Verdict::Pass);
        let low = BarrierSpec::new(1.0, 2.0, a / 10.0, 1e-4).unwrap().with_samples(60);
        assert_eq!(barrier_residual(&low, 1e-10).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn pure_barrier_dominates_the_weight() {
        let spec = BarrierSpec::new(1.0, 2.0, 3.0, 0.0).unwrap().with_samples(50);
        let r = barrier_residual(&spec, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.constant("epsilon0").unwrap() > 0.0);
    }

    #[test]
    fn fast_diffusion_profile_is_an_exact_solution() {
        let xs = linspace(-5.0, 5.0, 41);
        let ts = linspace(0.5, 5.0, 19);
        for mu in [0.5, 1.0, 2.0] {
            let fd = FdBarrier::new(0.75, mu).unwrap();
            let r = fd_barrier_residual(&fd, &xs, &ts, 1e-8).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
            let wrong = fd.with_b(0.5 * fd.b);
            let r = fd_barrier_residual(&wrong, &xs, &ts, 1e-8).unwrap();
            assert_eq!(r.verdict, Verdict::Fail);
            assert!(r.constant("relative_residual").unwrap() > 0.05);
        }
    }

    #[test]
    fn residual_against_numerical_derivatives() {
        let fd = FdBarrier::new(0.6, 1.3).unwrap().with_b(0.2);
        let (x, t) = (0.7, 1.9);
        let e = 1e-4;
        let u_t = (fd.value(x, t + e) - fd.value(x, t - e)) / (2.0 * e);
        let p = |x: f64| fd.value(x, t).powf(fd.alpha);
        let pxx = (p(x + e) - 2.0 * p(x) + p(x - e)) / (e * e);
        let (r, _) = fd.residual(x, t);
        assert!((r - (u_t - pxx)).abs() < 1e-6, "{r} vs {}", u_t - pxx);
    }

    #[test]
    fn wrong_b_residual_is_invariant_under_mu_scaling() {
        let base = FdBarrier::new(0.75, 1.0).unwrap();
        let b = 0.5 * base.b;
        let one = base.with_b(b);
        for mu in [0.5, 2.0] {
            let scaled = FdBarrier::new(0.75, mu).unwrap().with_b(b);
            for (x, t) in [(0.3, 0.7), (-1.2, 2.0), (2.5, 4.0)] {
                let (r1, s1) = one.residual(mu * x, t);
                let (r2, s2) = scaled.residual(x, t);
                assert!((r1 / s1 - r2 / s2).abs() < 1e-12);
                let ratio = scaled.value(x, t) / one.value(mu * x, t);
                assert!((ratio - mu.powf(2.0 / 0.25)).abs() < 1e-10 * ratio);
            }
        }
    }

    #[test]
    fn fast_diffusion_preconditions() {
        assert!(FdBarrier::new(1.0, 1.0).is_err());
        assert!(FdBarrier::new(0.5, 0.0).is_err());
        let fd = FdBarrier::new(0.5, 1.0).unwrap();
        assert!(fd_barrier_residual(&fd, &[0.0], &[0.0], 1e-8).is_err());
    }
}
