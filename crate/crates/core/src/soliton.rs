//! Translating solitons of the α-flow between the lines x₁ = ±1.
//!
//! A translator moving with speed m in direction e₂ has κ^α = m·sin θ. Its
//! width is m^{−1/α}∫₀^π sin^{1−1/α}, so fixing the width to 2 pins m.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::domain::quadrature::{sinc, sine_power_integral, singular_power_integral, tanh_sinh};
use crate::domain::{AngularGrid, CurveSample, EndpointExponents, QuadOptions, SpeedProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonRegime {
    /// α ≤ 1/2: no slab-bound translator.
    EntireGraph,
    /// 1/2 < α ≤ 1: smooth graph over (−1, 1) with unbounded height.
    StripBound,
    /// α > 1: bounded graph continued by two vertical rays; only C¹ there.
    StripBoundWithRays,
}

impl SolitonRegime {
    pub fn classify(alpha: f64) -> Self {
        if alpha <= 0.5 {
            SolitonRegime::EntireGraph
        } else if alpha <= 1.0 {
            SolitonRegime::StripBound
        } else {
            SolitonRegime::StripBoundWithRays
        }
    }
}

/// Normalization of the speed constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpeedConvention {
    /// Translator of width 2, spanning (−1, 1).
    #[default]
    Width2,
    /// (∫₀^π sin^{1−1/α})^α without the half; the resulting profile has width 1.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum HeightLimit {
    Infinite,
    Finite(f64),
}

impl HeightLimit {
    pub fn finite(self) -> Option<f64> {
        match self {
            HeightLimit::Finite(v) => Some(v),
            HeightLimit::Infinite => None,
        }
    }
}

fn require_slab(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Config(format!("alpha must be > 0, got {alpha}")));
    }
    if alpha <= 0.5 {
        return Err(Error::EntireGraphRegime { alpha });
    }
    Ok(())
}

fn quad_opts() -> QuadOptions {
    QuadOptions::rel(1e-13)
}

/// Speed m(α) of the width-2 translator.
pub fn translator_speed(alpha: f64) -> Result<f64> {
    translator_speed_with(alpha, SpeedConvention::Width2)
}

pub fn translator_speed_with(alpha: f64, convention: SpeedConvention) -> Result<f64> {
    require_slab(alpha)?;
    let full = sine_power_integral(1.0 - 1.0 / alpha, quad_opts())?;
    let base = match convention {
        SpeedConvention::Width2 => 0.5 * full,
        SpeedConvention::PaperLiteral => full,
    };
    Ok(base.powf(alpha))
}

/// Limit of the translator height x₂ at the ends (tip at height 0).
pub fn translator_height_limit(alpha: f64) -> Result<HeightLimit> {
    require_slab(alpha)?;
    if alpha <= 1.0 {
        return Ok(HeightLimit::Infinite);
    }
    let m = translator_speed(alpha)?;
    // x₂(π⁻) = m^{−1/α}∫₀^{π/2} sin^{−1/α}z·cos z dz after reflecting z = π − y.
    let p = -1.0 / alpha;
    let tail = singular_power_integral(p, FRAC_PI_2, |z| sinc(z).powf(p) * z.cos(), quad_opts())?;
    Ok(HeightLimit::Finite(m.powf(-1.0 / alpha) * tail))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonData {
    pub alpha: f64,
    pub speed: f64,
    pub regime: SolitonRegime,
    pub height_limit: HeightLimit,
    pub profile: CurveSample,
    /// u* = m·sin θ on the profile angles.
    pub u_star: Vec<f64>,
}

impl SolitonData {
    pub fn speed_profile(&self, grid: AngularGrid) -> Result<SpeedProfile> {
        translator_u(self.alpha, grid)
    }
}

/// u* = m(α)·sin θ sampled on `grid`.
pub fn translator_u(alpha: f64, grid: AngularGrid) -> Result<SpeedProfile> {
    let m = translator_speed(alpha)?;
    SpeedProfile::new(grid, (0..grid.len()).map(|i| m * grid.sin(i)).collect(), 0.0)
}

/// Profile (x¹_α, x²_α) of the width-2 translator anchored with its tip at the
/// origin, integrated node to node from θ = π/2.
pub fn translator_profile(alpha: f64, grid: AngularGrid) -> Result<SolitonData> {
    require_slab(alpha)?;
    let m = translator_speed(alpha)?;
    let scale = m.powf(-1.0 / alpha);
    let n = grid.len();
    let theta = grid.nodes();

    let dx1 = |a: f64, b: f64| -> Result<f64> {
        tanh_sinh(
            |y, _, _| y.sin().powf(1.0 - 1.0 / alpha),
            a,
            b,
            EndpointExponents::SMOOTH,
            quad_opts(),
        )
    };
    let dx2 = |a: f64, b: f64| -> Result<f64> {
        tanh_sinh(
            |y, _, _| -y.sin().powf(-1.0 / alpha) * y.cos(),
            a,
            b,
            EndpointExponents::SMOOTH,
            quad_opts(),
        )
    };

    let mut x1 = vec![0.0; n];
    let mut x2 = vec![0.0; n];
    // Walk outward from π/2 in both directions.
    let upper_start = n / 2;
    let mut prev = FRAC_PI_2;
    let (mut a1, mut a2) = (0.0, 0.0);
    for i in upper_start..n {
        a1 += dx1(prev, theta[i])?;
        a2 += dx2(prev, theta[i])?;
        x1[i] = scale * a1;
        x2[i] = scale * a2;
        prev = theta[i];
    }
    let mut prev = FRAC_PI_2;
    let (mut a1, mut a2) = (0.0, 0.0);
    for i in (0..upper_start).rev() {
        a1 += dx1(prev, theta[i])?;
        a2 += dx2(prev, theta[i])?;
        x1[i] = scale * a1;
        x2[i] = scale * a2;
        prev = theta[i];
    }

    let height_limit = translator_height_limit(alpha)?;
    let half_width = scale * 0.5 * sine_power_integral(1.0 - 1.0 / alpha, quad_opts())?;
    let profile = CurveSample {
        theta,
        x1,
        x2,
        width: 2.0 * half_width,
        x1_limits: (-half_width, half_width),
        x2_limits: (height_limit.finite(), height_limit.finite()),
        tip_index: grid.tip_index(),
    };
    let u_star = (0..n).map(|i| m * grid.sin(i)).collect();
    Ok(SolitonData {
        alpha,
        speed: m,
        regime: SolitonRegime::classify(alpha),
        height_limit,
        profile,
        u_star,
    })
}

/// Width-2 Grim Reaper (α = 1) at angle θ: x₁ = (2/π)(θ − π/2), x₂ = −(2/π)·ln sin θ.
pub fn grim_reaper_point(theta: f64) -> (f64, f64) {
    (2.0 / PI * (theta - FRAC_PI_2), -2.0 / PI * theta.sin().ln())
}
