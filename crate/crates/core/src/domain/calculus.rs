//! Finite differences on the cell-centered angular grid.
//!
//! The ends θ = 0 and θ = π sit half a cell outside the first and last
//! nodes, so a ghost value mirrored through the end closes every stencil.

use serde::{Deserialize, Serialize};

use super::AngularGrid;

/// How the ghost value beyond each end is formed from the nearest node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClosure {
    /// Ghost = −value: the sampled function vanishes at the end and leaves it
    /// linearly (the speed u ~ cθ).
    #[default]
    OddGhost,
    /// Ghost = +value: even extension (the pressure p = u^{(α+1)/α}, which
    /// leaves the end with zero slope).
    EvenGhost,
}

impl BoundaryClosure {
    #[inline]
    pub fn ghost(self, nearest: f64) -> f64 {
        match self {
            BoundaryClosure::OddGhost => -nearest,
            BoundaryClosure::EvenGhost => nearest,
        }
    }
}

/// Centered second difference with ghost closure at both ends.
pub fn second_derivative(values: &[f64], grid: AngularGrid, closure: BoundaryClosure) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    second_derivative_into(values, grid.spacing(), closure, &mut out);
    out
}

pub(crate) fn second_derivative_into(
    values: &[f64],
    spacing: f64,
    closure: BoundaryClosure,
    out: &mut [f64],
) {
    let n = values.len();
    let inv = 1.0 / (spacing * spacing);
    let left = closure.ghost(values[0]);
    let right = closure.ghost(values[n - 1]);
    // Neighbors are summed first so mirrored inputs give bitwise mirrored
    // output.
    out[0] = ((values[1] + left) - 2.0 * values[0]) * inv;
    for i in 1..n - 1 {
        out[i] = ((values[i + 1] + values[i - 1]) - 2.0 * values[i]) * inv;
    }
    out[n - 1] = ((right + values[n - 2]) - 2.0 * values[n - 1]) * inv;
}

/// Centered first difference with the same ghost closure.
pub fn first_derivative(values: &[f64], grid: AngularGrid, closure: BoundaryClosure) -> Vec<f64> {
    let n = values.len();
    let inv = 0.5 / grid.spacing();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { closure.ghost(values[0]) } else { values[i - 1] };
            let hi = if i + 1 == n { closure.ghost(values[n - 1]) } else { values[i + 1] };
            (hi - lo) * inv
        })
        .collect()
}
