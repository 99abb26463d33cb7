//! Empirical Rademacher complexity: exact enumeration over all sign vectors
//! and seeded Monte-Carlo estimation.
//!
//! Both compute `E_sigma[sup_f (1/m) sum_i sigma_i f(z_i)]` for a class
//! tabulated by its behavior rows; the exact route enumerates all `2^m` sign
//! vectors, the Monte-Carlo route averages seeded draws and reports a
//! standard error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ComplexityEstimate, FiniteClassTable};
use crate::error::{Error, Result};

/// Enumeration limit: `2^m` sign vectors.
pub const EXACT_MAX_POINTS: usize = 20;

/// Below this the standard error is too noisy to mean anything.
pub const MIN_MC_DRAWS: u64 = 100;

/// Draw count used when a caller has no preference.
pub const DEFAULT_MC_DRAWS: u64 = 1000;

fn validate_rows(rows: &[Vec<f64>]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::input("class must contain at least one hypothesis"));
    }
    let m = rows[0].len();
    if m == 0 {
        return Err(Error::input("class must cover at least one sample point"));
    }
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::input("behavior rows must share one length"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::input("behavior values must be finite"));
    }
    Ok(m)
}

/// `sup_f (1/m) sum_i signs[i] * f(z_i)` over the tabulated hypotheses.
pub fn sup_correlation(rows: &[Vec<f64>], signs: &[f64]) -> f64 {
    let m = signs.len();
    let mut best = f64::NEG_INFINITY;
    for row in rows {
        let mut s = 0.0;
        for i in 0..m {
            s += signs[i] * row[i];
        }
        best = best.max(s);
    }
    best / m as f64
}

/// Exact empirical Rademacher complexity of a real-valued behavior table by
/// full enumeration of the `2^m` sign vectors.
pub fn empirical_rademacher_exact(rows: &[Vec<f64>]) -> Result<ComplexityEstimate> {
    let m = validate_rows(rows)?;
    if m > EXACT_MAX_POINTS {
        return Err(Error::capacity(format!(
            "exact enumeration handles m <= {EXACT_MAX_POINTS}, got {m}"
        )));
    }
    let total = 1u64 << m;
    let mut signs = vec![0.0; m];
    let mut acc = 0.0;
    for mask in 0..total {
        for (i, s) in signs.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
        acc += sup_correlation(rows, &signs);
    }
    let value = acc / total as f64;
    // the expectation is nonnegative for any nonempty class; rounding in the
    // cancellation of an exactly-zero case may leave a sub-ulp residue
    Ok(ComplexityEstimate::exact(value.max(0.0)))
}

/// Exact empirical Rademacher complexity of a binary table under the
/// `{0,1} -> {-1,+1}` mapping.
pub fn empirical_rademacher_exact_table(table: &FiniteClassTable) -> Result<ComplexityEstimate> {
    empirical_rademacher_exact(&table.to_signs()?)
}

/// The sign vector for one Monte-Carlo draw. Seeding is counter-based on
/// `(seed, draw)`, so fan-out across workers reproduces the serial stream.
pub fn rademacher_signs(seed: u64, draw: u64, m: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    (0..m)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Monte-Carlo empirical Rademacher complexity. `sup_over_class` maps one
/// sign vector to `sup_f (1/m) sum_i sigma_i f(z_i)`; the estimate averages
/// `draws` seeded draws and carries `stderr = sample std / sqrt(draws)`.
pub fn empirical_rademacher_mc<F>(
    sup_over_class: F,
    m: usize,
    draws: u64,
    seed: u64,
) -> Result<ComplexityEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if m == 0 {
        return Err(Error::input("sample size must be at least 1"));
    }
    if draws < MIN_MC_DRAWS {
        return Err(Error::input(format!(
            "need at least {MIN_MC_DRAWS} draws, got {draws}"
        )));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for draw in 0..draws {
        let signs = rademacher_signs(seed, draw, m);
        let v = sup_over_class(&signs);
        sum += v;
        sum_sq += v * v;
    }
    let n = draws as f64;
    let mean = sum / n;
    let variance = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let stderr = (variance / n).sqrt();
    Ok(ComplexityEstimate::monte_carlo(mean, stderr, draws))
}
