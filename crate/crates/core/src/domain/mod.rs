//! Value types shared by every module: the cell-centered angular grid, the
//! sampled speed and support functions, and flow parameters.
//!
//! The angle θ ∈ (0, π) is the angle between the inward normal and e₁. Both
//! ends θ = 0 and θ = π correspond to the two ends of the curve, where the
//! speed vanishes; the grid never places a node there.

pub mod calculus;
pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calculus::{first_derivative, second_derivative, BoundaryClosure};
pub use quadrature::{quad_endpoint_singular, tanh_sinh, EndpointExponents, QuadOptions};

/// Smallest grid accepted by flow entry points.
pub const MIN_GRID_SIZE: usize = 16;

/// Uniform cell-centered grid θ_i = (i + ½)·π/N on (0, π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularGrid {
    n: usize,
}

/// Grid with at least [`MIN_GRID_SIZE`] nodes.
pub fn make_grid(n: usize) -> Result<AngularGrid> {
    if n < MIN_GRID_SIZE {
        return Err(Error::Config(format!(
            "grid size {n} is below the minimum {MIN_GRID_SIZE}"
        )));
    }
    Ok(AngularGrid { n })
}

impl AngularGrid {
    /// Raw constructor without the flow minimum; useful for tiny geometric
    /// examples. Panics on `n < 2`.
    pub fn cell_centered(n: usize) -> Self {
        assert!(n >= 2, "an angular grid needs at least two nodes");
        Self { n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        PI / self.n as f64
    }

    #[inline]
    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing()
    }

    /// Distance of node `i` to the nearer end, computed without cancellation.
    #[inline]
    pub fn end_distance(&self, i: usize) -> f64 {
        let k = i.min(self.n - 1 - i);
        (k as f64 + 0.5) * self.spacing()
    }

    /// sin θ_i evaluated through the nearer end (exact symmetry).
    #[inline]
    pub fn sin(&self, i: usize) -> f64 {
        self.end_distance(i).sin()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.theta(i)).collect()
    }

    /// Index of the reflected node θ ↦ π − θ.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Node nearest π/2 (lower one on ties).
    pub fn tip_index(&self) -> usize {
        (self.n - 1) / 2
    }
}

/// Exponent-dependent powers of the speed, with fast paths for the exponents
/// that show up in practice (1/α ∈ {1, 1/2, 2}).
#[derive(Debug, Clone, Copy)]
pub(crate) enum Power {
    One,
    Half,
    Two,
    General(f64),
}

impl Power {
    pub(crate) fn new(exponent: f64) -> Self {
        if exponent == 1.0 {
            Power::One
        } else if exponent == 0.5 {
            Power::Half
        } else if exponent == 2.0 {
            Power::Two
        } else {
            Power::General(exponent)
        }
    }

    #[inline]
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            Power::One => x,
            Power::Half => x.sqrt(),
            Power::Two => x * x,
            Power::General(p) => x.powf(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub alpha: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    pub t_end: f64,
    pub grid_size: usize,
}

fn default_cfl() -> f64 {
    0.25
}

impl FlowParams {
    pub fn new(alpha: f64, grid_size: usize, t_end: f64) -> Self {
        Self {
            alpha,
            cfl_safety: default_cfl(),
            t_end,
            grid_size,
        }
    }

    pub fn with_cfl(mut self, cfl_safety: f64) -> Self {
        self.cfl_safety = cfl_safety;
        self
    }

    /// Checks shared by every entry point (α > 0, CFL factor, grid size).
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Config(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(Error::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        make_grid(self.grid_size).map(|_| ())
    }

    /// Slab flows additionally need α > 1/2.
    pub fn validate_slab(&self) -> Result<()> {
        self.validate()?;
        if self.alpha <= 0.5 {
            return Err(Error::Config(format!(
                "slab flow requires alpha > 1/2, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<AngularGrid> {
        make_grid(self.grid_size)
    }
}

/// The speed u = κ^α sampled on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    grid: AngularGrid,
    values: Vec<f64>,
    t: f64,
}

impl SpeedProfile {
    pub fn new(grid: AngularGrid, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "profile has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Precondition(format!(
                "speed must be positive and finite, got {} at node {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values, t })
    }

    /// Samples `f(θ)` on the grid.
    pub fn from_fn(grid: AngularGrid, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect(), t)
    }

    pub fn grid(&self) -> AngularGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect(), self.t)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Curvature κ = u^{1/α}.
    pub fn curvature(&self, alpha: f64) -> Vec<f64> {
        let p = Power::new(1.0 / alpha);
        self.values.iter().map(|&u| p.apply(u)).collect()
    }

    /// Value at θ = π/2 (average of the two middle nodes for even N).
    pub fn tip_value(&self) -> f64 {
        mid_value(&self.values)
    }
}

pub(crate) fn mid_value(values: &[f64]) -> f64 {
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// The support function S(θ) = sup ⟨−n(θ), X⟩ sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportState {
    grid: AngularGrid,
    values: Vec<f64>,
    t: f64,
}

impl SupportState {
    pub fn new(grid: AngularGrid, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "support has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("support values must be finite".into()));
        }
        Ok(Self { grid, values, t })
    }

    pub fn grid(&self) -> AngularGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn tip_value(&self) -> f64 {
        mid_value(&self.values)
    }

    /// Pointwise residual of S_θθ + S = κ^{−1} = u^{−1/α} on interior nodes
    /// whose sin θ is at least `min_sin`. Returns (max abs residual, node).
    pub fn compatibility_residual(
        &self,
        speed: &SpeedProfile,
        alpha: f64,
        min_sin: f64,
    ) -> (f64, usize) {
        let grid = self.grid;
        let h2 = grid.spacing() * grid.spacing();
        let radius = Power::new(-1.0 / alpha);
        let mut worst = (0.0, grid.tip_index());
        for i in 1..grid.len() - 1 {
            if grid.sin(i) < min_sin {
                continue;
            }
            let s = &self.values;
            let d2 = (s[i + 1] - 2.0 * s[i] + s[i - 1]) / h2;
            let r = (d2 + s[i] - radius.apply(speed.values()[i])).abs();
            if r > worst.0 {
                worst = (r, i);
            }
        }
        worst
    }
}

/// Planar curve sampled at the grid angles.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub theta: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// x₁(π⁻) − x₁(0⁺).
    pub width: f64,
    /// Limits of x₁ at the two ends.
    pub x1_limits: (f64, f64),
    /// Limits of x₂ at the two ends; `None` when the height is unbounded.
    pub x2_limits: (Option<f64>, Option<f64>),
    pub tip_index: usize,
}

impl CurveSample {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut out = self.clone();
        out.x1.iter_mut().for_each(|x| *x += dx);
        out.x2.iter_mut().for_each(|y| *y += dy);
        out.x1_limits = (self.x1_limits.0 + dx, self.x1_limits.1 + dx);
        out.x2_limits = (self.x2_limits.0.map(|y| y + dy), self.x2_limits.1.map(|y| y + dy));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn four_node_grid() {
        let g = AngularGrid::cell_centered(4);
        let expect = [PI / 8.0, 3.0 * PI / 8.0, 5.0 * PI / 8.0, 7.0 * PI / 8.0];
        for (a, b) in g.nodes().iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn sixteen_node_grid() {
        let g = make_grid(16).unwrap();
        assert_relative_eq!(g.spacing(), PI / 16.0);
        assert_relative_eq!(g.theta(0), PI / 32.0);
    }

    #[test]
    fn grid_is_symmetric() {
        let g = AngularGrid::cell_centered(8);
        for i in 0..8 {
            assert_relative_eq!(g.theta(i) + g.theta(g.mirror(i)), PI, epsilon = 1e-15);
            assert_eq!(g.sin(i), g.sin(g.mirror(i)));
        }
    }

    #[test]
    fn too_small_grid_is_rejected() {
        assert!(matches!(make_grid(15), Err(Error::Config(_))));
    }

    #[test]
    fn nodes_avoid_ends_and_increase() {
        let g = make_grid(33).unwrap();
        let nodes = g.nodes();
        assert!(nodes[0] > 0.0 && *nodes.last().unwrap() < PI);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.tip_index(), 16);
        assert_relative_eq!(nodes[16], PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(FlowParams::new(1.0, 64, 1.0).validate_slab().is_ok());
        assert!(FlowParams::new(0.5, 64, 1.0).validate_slab().is_err());
        assert!(FlowParams::new(0.4, 64, 1.0).validate().is_ok());
        assert!(FlowParams::new(-1.0, 64, 1.0).validate().is_err());
        assert!(FlowParams::new(1.0, 64, 1.0).with_cfl(1.0).validate().is_err());
        assert!(FlowParams::new(1.0, 8, 1.0).validate().is_err());
    }

    #[test]
    fn profile_rejects_nonpositive() {
        let g = make_grid(16).unwrap();
        let mut v = vec![1.0; 16];
        v[3] = 0.0;
        assert!(SpeedProfile::new(g, v, 0.0).is_err());
    }
}
