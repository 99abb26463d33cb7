//! Natarajan dimension: exhaustive search on tabulated classes, the
//! closed-form network bound, and the growth function.

use std::collections::HashSet;

use super::FiniteClassTable;
use crate::error::{Error, Result};

/// Exhaustive shattering search enumerates `2^m` point subsets.
pub const NATARAJAN_MAX_POINTS: usize = 12;
pub const NATARAJAN_MAX_HYPOTHESES: usize = 4096;

/// Exact Natarajan dimension of the tabulated class on its `m` points.
///
/// A subset `C` is multiclass-shattered when two pointwise-distinct labelings
/// `f0, f1` of `C` exist such that every `B subset of C` is realized by some
/// hypothesis agreeing with `f0` on `B` and `f1` off it. Candidate `(f0, f1)`
/// pairs are restricted to behavior rows the class realizes on `C`: taking
/// `B = C` and `B = {}` shows any witnessing pair must itself be realized, so
/// the restriction loses nothing.
pub fn natarajan_dimension_exact(table: &FiniteClassTable) -> Result<usize> {
    let m = table.points();
    let n = table.hypotheses();
    if m > NATARAJAN_MAX_POINTS {
        return Err(Error::capacity(format!(
            "exhaustive search handles m <= {NATARAJAN_MAX_POINTS}, got {m}"
        )));
    }
    if n > NATARAJAN_MAX_HYPOTHESES {
        return Err(Error::capacity(format!(
            "exhaustive search handles n <= {NATARAJAN_MAX_HYPOTHESES}, got {n}"
        )));
    }

    for size in (1..=m).rev() {
        let mut subset_mask = (1u32 << size) - 1;
        let limit = 1u32 << m;
        while subset_mask < limit {
            if shatters(table, subset_mask, size) {
                return Ok(size);
            }
            subset_mask = next_subset_of_same_size(subset_mask, limit);
        }
    }
    Ok(0)
}

/// Next bitmask with the same popcount (Gosper's hack); returns `limit` or
/// beyond when exhausted.
fn next_subset_of_same_size(mask: u32, limit: u32) -> u32 {
    let c = mask & mask.wrapping_neg();
    let r = mask + c;
    if c == 0 || r >= limit {
        return limit;
    }
    r | (((mask ^ r) / c) >> 2)
}

fn shatters(table: &FiniteClassTable, subset_mask: u32, size: usize) -> bool {
    let points: Vec<usize> = (0..table.points()).filter(|i| subset_mask >> i & 1 == 1).collect();

    let mut seen = HashSet::new();
    let mut projections: Vec<Vec<u32>> = Vec::new();
    for row in table.rows() {
        let proj: Vec<u32> = points.iter().map(|&i| row[i]).collect();
        if seen.insert(proj.clone()) {
            projections.push(proj);
        }
    }
    // every one of the 2^size mixes must be realized, so fewer realized
    // projections than that cannot shatter
    if projections.len() < (1usize << size) {
        return false;
    }

    for (a, f0) in projections.iter().enumerate() {
        'pair: for f1 in projections.iter().skip(a + 1) {
            if f0.iter().zip(f1).any(|(u, v)| u == v) {
                continue;
            }
            for b_mask in 0..(1u32 << size) {
                let mix: Vec<u32> = (0..size)
                    .map(|t| if b_mask >> t & 1 == 1 { f0[t] } else { f1[t] })
                    .collect();
                if !seen.contains(&mix) {
                    continue 'pair;
                }
            }
            return true;
        }
    }
    false
}

/// Growth function: the number of distinct behavior rows the class realizes
/// on its sample points.
pub fn growth_function(table: &FiniteClassTable) -> usize {
    let distinct: HashSet<&Vec<u32>> = table.rows().iter().collect();
    distinct.len()
}

/// The combinatorial growth ceiling `m^d * arity^(2d)` implied by Natarajan
/// dimension `d`.
pub fn natarajan_growth_bound(m: usize, arity: u32, dimension: usize) -> f64 {
    (m as f64).powi(dimension as i32) * f64::from(arity).powi(2 * dimension as i32)
}

/// Closed-form Natarajan bound for a ReLU network: `constant * d * p^2` for
/// `d` outputs and `p` parameters. The big-O constant is exposed as a
/// configuration value; downstream reports hold up to it.
pub fn natarajan_nn_bound(output_count: u64, param_count: u64, constant: f64) -> Result<f64> {
    if !(constant.is_finite() && constant >= 0.0) {
        return Err(Error::input(format!(
            "big-O constant must be nonnegative and finite, got {constant}"
        )));
    }
    let d = output_count as f64;
    let p = param_count as f64;
    Ok(constant * d * p * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: Vec<Vec<u32>>, arity: u32) -> FiniteClassTable {
        FiniteClassTable::new(rows, arity).unwrap()
    }

    #[test]
    fn singleton_class_has_dimension_zero() {
        let t = table(vec![vec![0, 1, 0]], 2);
        assert_eq!(natarajan_dimension_exact(&t).unwrap(), 0);
    }

    #[test]
    fn all_binary_functions_on_two_points_shatter_both() {
        let t = table(vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]], 2);
        assert_eq!(natarajan_dimension_exact(&t).unwrap(), 2);
    }

    #[test]
    fn three_labels_on_one_point_give_dimension_one() {
        let t = table(vec![vec![0], vec![1], vec![2]], 3);
        assert_eq!(natarajan_dimension_exact(&t).unwrap(), 1);
    }

    #[test]
    fn two_constant_rows_shatter_a_point() {
        let t = table(vec![vec![0, 0], vec![1, 1]], 2);
        // {x1} is shattered by (f0=0, f1=1); both points together need all 4
        // mixes, only 2 are realized
        assert_eq!(natarajan_dimension_exact(&t).unwrap(), 1);
    }

    #[test]
    fn capacity_limits_are_enforced() {
        let t = table(vec![vec![0; 13]], 2);
        assert!(matches!(
            natarajan_dimension_exact(&t),
            Err(Error::CapacityExceeded(_))
        ));
    }

    #[test]
    fn growth_counts_distinct_rows() {
        let t = table(vec![vec![0, 1], vec![0, 1], vec![1, 1]], 2);
        assert_eq!(growth_function(&t), 2);
        let full: Vec<Vec<u32>> = (0..8u32)
            .map(|mask| (0..3).map(|i| mask >> i & 1).collect())
            .collect();
        assert_eq!(growth_function(&table(full, 2)), 8);
    }

    #[test]
    fn nn_bound_is_the_scaled_product() {
        assert_eq!(natarajan_nn_bound(4, 10, 1.0).unwrap(), 400.0);
        assert_eq!(natarajan_nn_bound(4, 10, 2.0).unwrap(), 800.0);
        assert_eq!(natarajan_nn_bound(4, 0, 1.0).unwrap(), 0.0);
        assert!(natarajan_nn_bound(4, 10, -1.0).is_err());
    }

    #[test]
    fn growth_bound_formula() {
        assert_eq!(natarajan_growth_bound(3, 2, 3), 27.0 * 64.0);
        assert_eq!(natarajan_growth_bound(5, 3, 0), 1.0);
    }
}
