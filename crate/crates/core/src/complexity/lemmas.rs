//! Executable verifiers for the combinatorial facts the bound's proof leans
//! on: the convex-hull Rademacher equality, Lipschitz contraction, and the
//! binomial-coefficient log inequality.

use super::rademacher::empirical_rademacher_exact;
use crate::error::{Error, Result};
use crate::loss::LossFunction;

pub const HULL_MAX_POINTS: usize = 16;
pub const HULL_MAX_HYPOTHESES: usize = 16;

const BINOMIAL_MAX: u64 = 30;

/// Exact `C(n, k)`; n capped so the product stays in integer range.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Err(Error::input(format!("k={k} exceeds n={n}")));
    }
    if n > BINOMIAL_MAX {
        return Err(Error::capacity(format!(
            "exact binomials are kept to n <= {BINOMIAL_MAX}, got {n}"
        )));
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    Ok(acc)
}

/// `(log C(T,k), k * (1 + log(T/k)))`; the first must never exceed the
/// second.
pub fn binomial_log_bound_check(expert_count: u64, selected_count: u64) -> Result<(f64, f64)> {
    if selected_count == 0 || selected_count > expert_count {
        return Err(Error::input(format!(
            "need 1 <= k <= T, got k={selected_count}, T={expert_count}"
        )));
    }
    let binom = binomial(expert_count, selected_count)?;
    let log_binom = (binom as f64).ln();
    let t = expert_count as f64;
    let k = selected_count as f64;
    let rhs = k * (1.0 + (t / k).ln());
    Ok((log_binom, rhs))
}

/// Exact empirical Rademacher complexity of the convex hull of the class
/// versus the class itself. The hull side maximizes over the vertex set plus
/// a simplex grid of mixing weights (`grid_resolution` divisions per
/// coordinate) as a falsification attempt; the vertex maximum is the analytic
/// optimum, so the two returned values must agree.
pub fn convex_hull_rademacher_check(
    rows: &[Vec<f64>],
    grid_resolution: usize,
) -> Result<(f64, f64)> {
    if rows.is_empty() {
        return Err(Error::input("class must contain at least one hypothesis"));
    }
    let n = rows.len();
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::input("behavior rows must share one length"));
    }
    if m > HULL_MAX_POINTS {
        return Err(Error::capacity(format!(
            "hull enumeration handles m <= {HULL_MAX_POINTS}, got {m}"
        )));
    }
    if n > HULL_MAX_HYPOTHESES {
        return Err(Error::capacity(format!(
            "hull enumeration handles n <= {HULL_MAX_HYPOTHESES}, got {n}"
        )));
    }
    if grid_resolution == 0 {
        return Err(Error::input("grid resolution must be at least 1"));
    }

    let base = empirical_rademacher_exact(rows)?.value;

    let grid = simplex_grid(n, grid_resolution);
    let total = 1u64 << m;
    let mut signs = vec![0.0; m];
    let mut acc = 0.0;
    for mask in 0..total {
        for (i, s) in signs.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
        // per-row correlations shared by the vertex max and every grid point
        let corr: Vec<f64> = rows
            .iter()
            .map(|row| {
                let mut s = 0.0;
                for i in 0..m {
                    s += signs[i] * row[i];
                }
                s
            })
            .collect();
        let mut best = corr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for lambda in &grid {
            let mixed: f64 = lambda.iter().zip(&corr).map(|(l, c)| l * c).sum();
            best = best.max(mixed);
        }
        acc += best / m as f64;
    }
    let hull = (acc / total as f64).max(0.0);
    Ok((hull, base))
}

/// All mixing vectors with entries in multiples of `1/resolution` summing to
/// one.
fn simplex_grid(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fill_compositions(n, resolution, 0, &mut counts, &mut out);
    out
}

fn fill_compositions(
    n: usize,
    remaining: usize,
    idx: usize,
    counts: &mut Vec<usize>,
    out: &mut Vec<Vec<f64>>,
) {
    if idx == n - 1 {
        counts[idx] = remaining;
        let total: usize = counts.iter().sum();
        out.push(counts.iter().map(|&c| c as f64 / total as f64).collect());
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        fill_compositions(n, remaining - c, idx + 1, counts, out);
    }
}

/// Exact empirical Rademacher complexity of the loss-composed class (lhs)
/// against the loss's Lipschitz constant times that of the base class (rhs);
/// contraction says lhs <= rhs.
pub fn lipschitz_contraction_check(
    rows: &[Vec<f64>],
    labels: &[i8],
    loss: &LossFunction,
) -> Result<(f64, f64)> {
    let c = loss
        .lipschitz()
        .ok_or_else(|| Error::input("contraction needs a loss with a finite Lipschitz constant"))?;
    if rows.is_empty() {
        return Err(Error::input("class must contain at least one hypothesis"));
    }
    let m = rows[0].len();
    if labels.len() != m {
        return Err(Error::input(format!(
            "{} labels for {m} sample points",
            labels.len()
        )));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::input("labels must be +1 or -1"));
    }
    let composed: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(labels)
                .map(|(&v, &y)| loss.eval(y, v))
                .collect()
        })
        .collect();
    let lhs = empirical_rademacher_exact(&composed)?.value;
    let rhs = c * empirical_rademacher_exact(rows)?.value;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(30, 15).unwrap(), 155_117_520);
        assert_eq!(binomial(5, 0).unwrap(), 1);
        assert_eq!(binomial(5, 5).unwrap(), 1);
        assert!(binomial(4, 5).is_err());
        assert!(binomial(31, 2).is_err());
    }

    #[test]
    fn log_bound_edge_cases() {
        // T = k: C(T,T) = 1, so lhs = 0 and rhs = k
        let (lhs, rhs) = binomial_log_bound_check(7, 7).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 7.0);
        // k = 1: lhs = log T, rhs = 1 + log T
        let (lhs, rhs) = binomial_log_bound_check(12, 1).unwrap();
        assert!((lhs - (12.0f64).ln()).abs() < 1e-15);
        assert!((rhs - (1.0 + (12.0f64).ln())).abs() < 1e-15);
        assert!(binomial_log_bound_check(4, 0).is_err());
        assert!(binomial_log_bound_check(4, 5).is_err());
    }

    #[test]
    fn hull_equals_base_on_the_antipodal_pair() {
        let rows = vec![vec![1.0, 1.0], vec![-1.0, -1.0]];
        let (hull, base) = convex_hull_rademacher_check(&rows, 10).unwrap();
        assert_eq!(base, 0.5);
        assert!((hull - base).abs() <= 1e-12);
    }

    #[test]
    fn hull_equals_base_on_a_singleton() {
        let rows = vec![vec![0.25, -1.0, 0.5]];
        let (hull, base) = convex_hull_rademacher_check(&rows, 10).unwrap();
        assert_eq!(base, 0.0);
        assert!((hull - base).abs() <= 1e-12);
    }

    #[test]
    fn hull_capacity_limits() {
        let rows = vec![vec![0.0; 17]];
        assert!(convex_hull_rademacher_check(&rows, 4).is_err());
    }

    #[test]
    fn contraction_on_the_constant_zero_class() {
        let rows = vec![vec![0.0, 0.0, 0.0]];
        let loss = LossFunction::clipped_hinge();
        let (lhs, rhs) = lipschitz_contraction_check(&rows, &[1, 1, -1], &loss).unwrap();
        // both sides are singleton classes, so both exact values vanish
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn contraction_holds_on_the_antipodal_pair() {
        let rows = vec![vec![1.0, 1.0], vec![-1.0, -1.0]];
        let loss = LossFunction::clipped_hinge();
        let (lhs, rhs) = lipschitz_contraction_check(&rows, &[1, 1], &loss).unwrap();
        assert!(lhs <= rhs + 1e-12, "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn scaling_the_class_halves_the_rhs() {
        let rows = vec![vec![1.0, -0.5], vec![-1.0, 0.75]];
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| 0.5 * v).collect())
            .collect();
        let loss = LossFunction::clipped_hinge();
        let (_, rhs_full) = lipschitz_contraction_check(&rows, &[1, -1], &loss).unwrap();
        let (lhs_half, rhs_half) = lipschitz_contraction_check(&scaled, &[1, -1], &loss).unwrap();
        assert!((rhs_half - 0.5 * rhs_full).abs() < 1e-12);
        assert!(lhs_half <= rhs_half + 1e-12);
    }

    #[test]
    fn contraction_rejects_zero_one() {
        let rows = vec![vec![1.0, -1.0]];
        assert!(lipschitz_contraction_check(&rows, &[1, 1], &LossFunction::zero_one()).is_err());
    }
}
