//! Initial data: the translator, multiplicative perturbations of it, and
//! profiles interpolated from sample points.
//!
//! All recipes produce u₀ = g(θ)·sin θ with g positive on [0, π], so the ends
//! of the curve are asymptotic to vertical lines. With width normalization on,
//! u₀ is rescaled by λ = (width/2)^α, which sets the width to exactly 2
//! because width(λu) = λ^{−1/α}·width(u).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FlowState;
use crate::domain::{AngularGrid, SpeedProfile};
use crate::error::{Error, Result};
use crate::geometry::{CurveIntegrator, MonotoneCubic};
use crate::soliton::translator_speed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecipeKind {
    /// u₀ = m(α) sin θ.
    ExactTranslator,
    /// u₀ = m(α) sin θ · g(θ) with
    /// g = constant + Σ sine[k−1]·sin kθ + Σ cosine[k−1]·cos kθ.
    MultiplicativePerturbation {
        #[serde(default = "unit")]
        constant: f64,
        #[serde(default)]
        sine: Vec<f64>,
        #[serde(default)]
        cosine: Vec<f64>,
    },
    /// u₀ = r(θ)·sin θ where r interpolates the ratios u/sin θ of the given
    /// samples (held constant beyond the first and last sample).
    PiecewiseBuilt { theta: Vec<f64>, u: Vec<f64> },
    /// Multiplicative perturbation with `modes` random sine coefficients whose
    /// absolute values sum to `amplitude` (< 1), drawn from the run seed.
    RandomPerturbation { modes: usize, amplitude: f64 },
}

fn unit() -> f64 {
    1.0
}

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataRecipe {
    #[serde(flatten)]
    pub kind: RecipeKind,
    #[serde(default = "enabled")]
    pub normalize_width: bool,
}

impl InitialDataRecipe {
    pub fn translator() -> Self {
        Self {
            kind: RecipeKind::ExactTranslator,
            normalize_width: true,
        }
    }

    pub fn perturbation(constant: f64, sine: Vec<f64>, cosine: Vec<f64>) -> Self {
        Self {
            kind: RecipeKind::MultiplicativePerturbation { constant, sine, cosine },
            normalize_width: true,
        }
    }

    /// The translator times 1 + 0.2 sin 3θ, the standard convergence test.
    pub fn sin3_perturbation() -> Self {
        Self::perturbation(1.0, vec![0.0, 0.0, 0.2], Vec::new())
    }
}

/// Builds the state with seed 0 for random recipes.
pub fn build_initial(recipe: &InitialDataRecipe, grid: AngularGrid, alpha: f64) -> Result<FlowState> {
    build_initial_seeded(recipe, grid, alpha, 0)
}

pub fn build_initial_seeded(
    recipe: &InitialDataRecipe,
    grid: AngularGrid,
    alpha: f64,
    seed: u64,
) -> Result<FlowState> {
    let m = translator_speed(alpha)?;
    let nodes = grid.nodes();
    let values: Vec<f64> = match &recipe.kind {
        RecipeKind::ExactTranslator => (0..grid.len()).map(|i| m * grid.sin(i)).collect(),
        RecipeKind::MultiplicativePerturbation { constant, sine, cosine } => {
            let g = |t: f64| factor(*constant, sine, cosine, t);
            check_factor(&g, grid)?;
            (0..grid.len()).map(|i| m * grid.sin(i) * g(nodes[i])).collect()
        }
        RecipeKind::RandomPerturbation { modes, amplitude } => {
            if *modes == 0 || !(0.0..1.0).contains(amplitude) {
                return Err(Error::InvalidRecipe(format!(
                    "random perturbation needs modes >= 1 and amplitude in [0, 1), got {modes}, {amplitude}"
                )));
            }
            let sine = random_coefficients(*modes, *amplitude, seed);
            let g = |t: f64| factor(1.0, &sine, &[], t);
            check_factor(&g, grid)?;
            (0..grid.len()).map(|i| m * grid.sin(i) * g(nodes[i])).collect()
        }
        RecipeKind::PiecewiseBuilt { theta, u } => piecewise(theta, u, grid)?,
    };
    let u0 = SpeedProfile::new(grid, values, 0.0).map_err(|e| Error::InvalidRecipe(e.to_string()))?;
    state_from_speed(u0, alpha, recipe.normalize_width)
}

/// Pairs u₀ (optionally width-normalized) with the support function of its
/// curve, centered so that S(0⁺) = S(π⁻) = width/2 and S(π/2) = 0.
pub fn state_from_speed(u0: SpeedProfile, alpha: f64, normalize_width: bool) -> Result<FlowState> {
    let integrator = CurveIntegrator::new(u0.grid(), alpha)?;
    let invalid = |e: Error| match e {
        Error::Divergence { .. } | Error::QuadratureStalled { .. } => {
            Error::InvalidRecipe(format!("width integral is not finite: {e}"))
        }
        other => other,
    };
    let width = integrator.width(u0.values()).map_err(invalid)?;
    let u0 = if normalize_width {
        let lambda = (0.5 * width).powf(alpha);
        u0.scaled(lambda)?
    } else {
        u0
    };
    let curve = integrator.reconstruct(u0.values(), (0.0, 0.0)).map_err(invalid)?;
    let shift = -0.5 * (curve.x1_limits.0 + curve.x1_limits.1);
    let curve = curve.translated(shift, 0.0);
    let s = crate::geometry::support_of(&curve, u0.time())?;
    FlowState::new(u0, s)
}

fn factor(constant: f64, sine: &[f64], cosine: &[f64], t: f64) -> f64 {
    let mut g = constant;
    for (k, a) in sine.iter().enumerate() {
        g += a * ((k + 1) as f64 * t).sin();
    }
    for (k, a) in cosine.iter().enumerate() {
        g += a * ((k + 1) as f64 * t).cos();
    }
    g
}

/// g must stay positive on the closed interval [0, π], checked on a grid
/// eight times finer than the flow grid (ends included).
fn check_factor(g: &impl Fn(f64) -> f64, grid: AngularGrid) -> Result<()> {
    let samples = 8 * grid.len();
    for k in 0..=samples {
        let t = std::f64::consts::PI * k as f64 / samples as f64;
        let v = g(t);
        if !(v.is_finite() && v > 1e-12) {
            return Err(Error::InvalidRecipe(format!(
                "perturbation factor is not positive at theta = {t}: {v}"
            )));
        }
    }
    Ok(())
}

fn random_coefficients(modes: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let total: f64 = raw.iter().map(|a| a.abs()).sum();
    if total == 0.0 {
        return vec![0.0; modes];
    }
    raw.iter().map(|a| a * amplitude / total).collect()
}

fn piecewise(theta: &[f64], u: &[f64], grid: AngularGrid) -> Result<Vec<f64>> {
    if theta.len() != u.len() || theta.len() < 2 {
        return Err(Error::InvalidRecipe("piecewise recipe needs >= 2 matching (theta, u) samples".into()));
    }
    if theta.iter().any(|t| !(*t > 0.0 && *t < std::f64::consts::PI)) {
        return Err(Error::InvalidRecipe("piecewise sample angles must lie in (0, pi)".into()));
    }
    if u.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidRecipe("piecewise sample speeds must be positive".into()));
    }
    let ratio: Vec<f64> = theta.iter().zip(u).map(|(t, v)| v / t.sin()).collect();
    let interp = MonotoneCubic::new(theta.to_vec(), ratio).map_err(|e| Error::InvalidRecipe(e.to_string()))?;
    let (lo, hi) = interp.domain();
    Ok((0..grid.len())
        .map(|i| interp.eval(grid.theta(i).clamp(lo, hi)) * grid.sin(i))
        .collect())
}
