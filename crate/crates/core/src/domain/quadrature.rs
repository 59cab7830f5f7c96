//! Double-exponential (tanh-sinh) quadrature for integrands with algebraic
//! endpoint singularities.
//!
//! The substitution x = c + h·tanh(π/2·sinh t) makes the integrand decay
//! double-exponentially at both ends. Integrands receive the node together
//! with its distances to both endpoints, computed without cancellation, so a
//! factor like sin(π − x) can be evaluated as sin(distance_to_right).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Leading power behavior |x − end|^p of the integrand at each endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointExponents {
    pub left: f64,
    pub right: f64,
}

impl EndpointExponents {
    pub const SMOOTH: Self = Self { left: 0.0, right: 0.0 };

    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn both(p: f64) -> Self {
        Self { left: p, right: p }
    }

    fn check(&self) -> Result<()> {
        for p in [self.left, self.right] {
            if p.is_nan() || p <= -1.0 {
                return Err(Error::Divergence { exponent: p });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_levels: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_levels: 12,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Half-range of the t variable; beyond it the node distances underflow.
const T_MAX: f64 = 6.5;

/// Tanh-sinh integral of `f(x, x − a, b − x)` over [a, b].
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, exponents: EndpointExponents, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    exponents.check()?;
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        let flipped = |x: f64, da: f64, db: f64| f(x, db, da);
        return ordered(&flipped, b, a, opts).map(|v| -v);
    }
    ordered(&f, a, b, opts)
}

fn ordered(f: &dyn Fn(f64, f64, f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    let half = 0.5 * (b - a);
    let centre = 0.5 * (a + b);

    // Contribution of the node pair ±t (or the centre when t == 0).
    let eval = |t: f64| -> Result<f64> {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let weight = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        if t == 0.0 {
            return Ok(weight * half * f(centre, half, half));
        }
        // Distance of the node from the nearer endpoint in [−1, 1] units.
        let comp = (-s).exp() / cosh_s;
        let near = half * comp;
        if !(near > 0.0) || weight == 0.0 {
            return Ok(0.0);
        }
        let far = 2.0 * half - near;
        let right = f(b - near, far, near);
        let left = f(a + near, near, far);
        let sum = left + right;
        if !sum.is_finite() {
            if weight * half < 1e-280 {
                return Ok(0.0);
            }
            return Err(Error::QuadratureStalled {
                estimate: f64::NAN,
                error: f64::INFINITY,
                tol: opts.rel_tol,
            });
        }
        Ok(weight * half * sum)
    };

    let mut step = 0.5;
    let mut total = eval(0.0)?;
    let mut k = 1;
    while (k as f64) * step <= T_MAX {
        total += eval(k as f64 * step)?;
        k += 1;
    }
    let mut estimate = total * step;
    let mut last_err = f64::INFINITY;
    for level in 1..=opts.max_levels {
        step *= 0.5;
        let mut k = 1;
        while (k as f64) * step <= T_MAX {
            total += eval(k as f64 * step)?;
            k += 2;
        }
        let next = total * step;
        last_err = (next - estimate).abs();
        estimate = next;
        if level >= 2 && last_err <= opts.rel_tol * estimate.abs() + opts.abs_tol {
            return Ok(estimate);
        }
    }
    // Converged to working precision even if the requested tolerance is tighter.
    if last_err <= 64.0 * f64::EPSILON * estimate.abs() {
        return Ok(estimate);
    }
    Err(Error::QuadratureStalled {
        estimate,
        error: last_err,
        tol: opts.rel_tol,
    })
}

/// ∫_a^b f(x) dx for f with power behavior given by `exponents`; default
/// relative tolerance 1e−10.
pub fn quad_endpoint_singular<F>(f: F, a: f64, b: f64, exponents: EndpointExponents) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    tanh_sinh(|x, _, _| f(x), a, b, exponents, QuadOptions::default())
}

/// ∫_0^b x^p·g(x) dx for p > −1 and g regular at 0.
///
/// The x^p·g(0) part is integrated in closed form and only the remainder
/// x^p·(g(x) − g(0)) goes through tanh-sinh, which keeps the value accurate
/// as p ↓ −1 where the plain rule would need sub-denormal nodes.
pub fn singular_power_integral<G>(p: f64, b: f64, g: G, opts: QuadOptions) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if p.is_nan() || p <= -1.0 {
        return Err(Error::Divergence { exponent: p });
    }
    let g0 = g(0.0);
    let singular = g0 * b.powf(p + 1.0) / (p + 1.0);
    let remainder = tanh_sinh(
        |_, x, _| x.powf(p) * (g(x) - g0),
        0.0,
        b,
        EndpointExponents::new(p + 1.0, 0.0),
        QuadOptions {
            abs_tol: opts.abs_tol.max(opts.rel_tol * singular.abs()),
            ..opts
        },
    )?;
    Ok(singular + remainder)
}

/// sin x / x, continuous at 0.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// ∫_0^π sin^p θ dθ for p > −1.
pub fn sine_power_integral(p: f64, opts: QuadOptions) -> Result<f64> {
    let half = singular_power_integral(p, FRAC_PI_2, |x| sinc(x).powf(p), opts)?;
    Ok(2.0 * half)
}
