//! Matrix norms and the spectral-norm-budget Rademacher bound for deep
//! ReLU networks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ComplexityEstimate;
use crate::error::{Error, Result};
use crate::linalg::{l2_norm, Matrix};

const POWER_MAX_ITERATIONS: usize = 200;
const POWER_REL_TOLERANCE: f64 = 1e-12;

/// Largest singular value by power iteration on `M^T M`.
///
/// Starts from the normalized all-ones vector; if the iteration has not
/// converged after 200 steps it restarts once from a seeded random vector
/// (an all-ones start can sit nearly orthogonal to the top singular
/// direction). The Rayleigh estimate only ever underestimates, so the best
/// value seen across both runs is returned.
pub fn spectral_norm(matrix: &Matrix) -> Result<f64> {
    if !matrix.data().iter().all(|v| v.is_finite()) {
        return Err(Error::input("matrix entries must be finite"));
    }
    let ones = vec![1.0; matrix.cols()];
    let (sigma, converged) = power_iterate(matrix, &ones);
    if converged {
        return Ok(sigma);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let restart: Vec<f64> = (0..matrix.cols())
        .map(|_| rand::Rng::random_range(&mut rng, -1.0..=1.0))
        .collect();
    let (sigma2, _) = power_iterate(matrix, &restart);
    Ok(sigma.max(sigma2))
}

fn power_iterate(matrix: &Matrix, start: &[f64]) -> (f64, bool) {
    let mut v = start.to_vec();
    let norm = l2_norm(&v);
    if norm == 0.0 {
        return (0.0, false);
    }
    for e in v.iter_mut() {
        *e /= norm;
    }
    let transpose = matrix.transpose();
    let mut sigma = l2_norm(&matrix.matvec(&v));
    let mut best = sigma;
    for _ in 0..POWER_MAX_ITERATIONS {
        let w = matrix.matvec(&v);
        let mut u = transpose.matvec(&w); // M^T M v
        let norm = l2_norm(&u);
        if norm == 0.0 {
            // v is in the null space; let the random restart decide
            return (best, false);
        }
        for e in u.iter_mut() {
            *e /= norm;
        }
        v = u;
        let next = l2_norm(&matrix.matvec(&v));
        best = best.max(next);
        let change = (next - sigma).abs();
        if change <= POWER_REL_TOLERANCE * next.max(f64::MIN_POSITIVE) {
            return (best, true);
        }
        sigma = next;
    }
    (best, false)
}

/// Sum of the l2 norms of the rows. Callers wanting the `(2,1)` norm of a
/// transpose pass the transpose.
pub fn norm_21(matrix: &Matrix) -> f64 {
    (0..matrix.rows()).map(|r| l2_norm(matrix.row(r))).sum()
}

/// Per-layer spectral norms `K_i`, per-layer `(2,1)` norms `b_i` of the
/// transposed weights, and the input norm bound `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBudget {
    spectral_norms: Vec<f64>,
    norms_21: Vec<f64>,
    input_bound: f64,
}

impl NormBudget {
    pub fn new(spectral_norms: Vec<f64>, norms_21: Vec<f64>, input_bound: f64) -> Result<Self> {
        if spectral_norms.is_empty() || spectral_norms.len() != norms_21.len() {
            return Err(Error::input(
                "budget needs matching nonempty spectral and (2,1) norm lists",
            ));
        }
        if !spectral_norms.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::input("spectral norms must be positive and finite"));
        }
        if !norms_21.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::input("(2,1) norms must be positive and finite"));
        }
        if !(input_bound.is_finite() && input_bound > 0.0) {
            return Err(Error::input("input bound must be positive and finite"));
        }
        Ok(NormBudget {
            spectral_norms,
            norms_21,
            input_bound,
        })
    }

    pub fn layer_count(&self) -> usize {
        self.spectral_norms.len()
    }

    pub fn spectral_norms(&self) -> &[f64] {
        &self.spectral_norms
    }

    pub fn norms_21(&self) -> &[f64] {
        &self.norms_21
    }

    pub fn input_bound(&self) -> f64 {
        self.input_bound
    }

    /// Element-wise maximum of two budgets over the same layer count; the
    /// hypothesis class holding several networks must budget for the largest
    /// norms among them.
    pub fn elementwise_max(&self, other: &NormBudget) -> Result<NormBudget> {
        if self.layer_count() != other.layer_count() {
            return Err(Error::input("budgets cover different layer counts"));
        }
        NormBudget::new(
            self.spectral_norms
                .iter()
                .zip(&other.spectral_norms)
                .map(|(a, b)| a.max(*b))
                .collect(),
            self.norms_21
                .iter()
                .zip(&other.norms_21)
                .map(|(a, b)| a.max(*b))
                .collect(),
            self.input_bound.max(other.input_bound),
        )
    }
}

/// Norm-budget Rademacher bound for the deep ReLU class:
/// `(c * prod_i K_i * (sum_i (b_i/K_i)^(2/3))^(3/2)) / sqrt(m)`.
///
/// A single layer is evaluated through the algebraic simplification
/// `c * b_1 / sqrt(m)`; the fractional-power chain would shed an ulp on a
/// value the formula determines exactly.
pub fn bartlett_bound(budget: &NormBudget, sample_count: u64) -> Result<ComplexityEstimate> {
    if sample_count == 0 {
        return Err(Error::input("sample count must be at least 1"));
    }
    let root_m = (sample_count as f64).sqrt();
    if budget.layer_count() == 1 {
        let value = budget.input_bound * budget.norms_21[0] / root_m;
        return Ok(ComplexityEstimate::closed_form(value));
    }
    let product: f64 = budget.spectral_norms.iter().product();
    let sum: f64 = budget
        .spectral_norms
        .iter()
        .zip(&budget.norms_21)
        .map(|(k, b)| (b / k).powf(2.0 / 3.0))
        .sum();
    let value = budget.input_bound * product * sum.powf(1.5) / root_m;
    Ok(ComplexityEstimate::closed_form(value))
}
