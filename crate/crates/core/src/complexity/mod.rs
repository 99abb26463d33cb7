//! Complexity quantities consumed by the generalization bound, plus
//! executable verifiers for the combinatorial lemmas behind it: empirical
//! Rademacher complexity (exact and Monte-Carlo), Natarajan dimension
//! (exhaustive and closed-form), growth functions, and matrix norm budgets.

mod lemmas;
mod natarajan;
mod norms;
mod rademacher;

pub mod corpus;

pub use lemmas::{
    binomial, binomial_log_bound_check, convex_hull_rademacher_check, lipschitz_contraction_check,
    HULL_MAX_HYPOTHESES, HULL_MAX_POINTS,
};
pub use natarajan::{
    growth_function, natarajan_dimension_exact, natarajan_growth_bound, natarajan_nn_bound,
    NATARAJAN_MAX_HYPOTHESES, NATARAJAN_MAX_POINTS,
};
pub use norms::{bartlett_bound, norm_21, spectral_norm, NormBudget};
pub use rademacher::{
    empirical_rademacher_exact, empirical_rademacher_exact_table, empirical_rademacher_mc,
    rademacher_signs, sup_correlation, EXACT_MAX_POINTS, MIN_MC_DRAWS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a complexity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    MonteCarlo,
    ExactEnumeration,
    ClosedFormBound,
}

/// A nonnegative complexity value with its provenance. `stderr` and `draws`
/// are zero unless the method is Monte-Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    pub stderr: f64,
    pub draws: u64,
}

impl ComplexityEstimate {
    pub fn exact(value: f64) -> Self {
        ComplexityEstimate {
            value,
            method: EstimateMethod::ExactEnumeration,
            stderr: 0.0,
            draws: 0,
        }
    }

    pub fn closed_form(value: f64) -> Self {
        ComplexityEstimate {
            value,
            method: EstimateMethod::ClosedFormBound,
            stderr: 0.0,
            draws: 0,
        }
    }

    pub fn monte_carlo(value: f64, stderr: f64, draws: u64) -> Self {
        ComplexityEstimate {
            value,
            method: EstimateMethod::MonteCarlo,
            stderr,
            draws,
        }
    }
}

/// A finite multiclass hypothesis class tabulated by its behaviors: row `i`
/// holds hypothesis `i`'s outputs on the `m` sample points, each output in
/// `[0, arity)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteClassTable {
    behaviors: Vec<Vec<u32>>,
    arity: u32,
}

impl FiniteClassTable {
    pub fn new(behaviors: Vec<Vec<u32>>, arity: u32) -> Result<Self> {
        if behaviors.is_empty() {
            return Err(Error::input("class table needs at least one hypothesis"));
        }
        if arity < 1 {
            return Err(Error::input("label arity must be at least 1"));
        }
        let m = behaviors[0].len();
        if m == 0 {
            return Err(Error::input("class table needs at least one sample point"));
        }
        for (i, row) in behaviors.iter().enumerate() {
            if row.len() != m {
                return Err(Error::input(format!(
                    "hypothesis {i} has {} outputs, expected {m}",
                    row.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= arity) {
                return Err(Error::input(format!(
                    "hypothesis {i} outputs {v}, outside [0, {arity})"
                )));
            }
        }
        Ok(FiniteClassTable { behaviors, arity })
    }

    /// Number of sample points `m`.
    pub fn points(&self) -> usize {
        self.behaviors[0].len()
    }

    /// Number of tabulated hypotheses `n`.
    pub fn hypotheses(&self) -> usize {
        self.behaviors.len()
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.behaviors
    }

    /// Binary labels mapped to `{-1, +1}`; an error for other arities.
    pub fn to_signs(&self) -> Result<Vec<Vec<f64>>> {
        if self.arity != 2 {
            return Err(Error::input(format!(
                "sign mapping needs arity 2, table has {}",
                self.arity
            )));
        }
        Ok(self
            .behaviors
            .iter()
            .map(|row| row.iter().map(|&v| 2.0 * f64::from(v) - 1.0).collect())
            .collect())
    }

    /// Labels as raw reals `0, 1, ..., arity-1`.
    pub fn to_reals(&self) -> Vec<Vec<f64>> {
        self.behaviors
            .iter()
            .map(|row| row.iter().map(|&v| f64::from(v)).collect())
            .collect()
    }

    /// CSV: header `m=<int>,arity=<int>`, then one hypothesis per row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("m={},arity={}\n", self.points(), self.arity);
        for row in &self.behaviors {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse("empty class table"))?;
        let parts: Vec<&str> = header.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::parse(format!("bad class table header: {header}")));
        }
        let m: usize = parts[0]
            .strip_prefix("m=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(format!("bad m field: {}", parts[0])))?;
        let arity: u32 = parts[1]
            .strip_prefix("arity=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(format!("bad arity field: {}", parts[1])))?;
        let mut behaviors = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| {
                    c.parse::<u32>()
                        .map_err(|_| Error::parse(format!("bad label {c:?} on row {}", lineno + 2)))
                })
                .collect::<Result<Vec<u32>>>()?;
            if row.len() != m {
                return Err(Error::parse(format!(
                    "row {} has {} labels, header declares m={m}",
                    lineno + 2,
                    row.len()
                )));
            }
            behaviors.push(row);
        }
        FiniteClassTable::new(behaviors, arity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_validates_entries() {
        assert!(FiniteClassTable::new(vec![], 2).is_err());
        assert!(FiniteClassTable::new(vec![vec![0, 2]], 2).is_err());
        assert!(FiniteClassTable::new(vec![vec![0, 1], vec![0]], 2).is_err());
        assert!(FiniteClassTable::new(vec![vec![0, 1]], 2).is_ok());
    }

    #[test]
    fn sign_mapping_requires_binary() {
        let t = FiniteClassTable::new(vec![vec![0, 1, 1]], 2).unwrap();
        assert_eq!(t.to_signs().unwrap(), vec![vec![-1.0, 1.0, 1.0]]);
        let t3 = FiniteClassTable::new(vec![vec![0, 2]], 3).unwrap();
        assert!(t3.to_signs().is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let t = FiniteClassTable::new(vec![vec![0, 1, 2], vec![2, 2, 0]], 3).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("m=3,arity=3\n"));
        assert_eq!(FiniteClassTable::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn csv_rejects_corruption() {
        assert!(FiniteClassTable::from_csv("").is_err());
        assert!(FiniteClassTable::from_csv("m=2,arity=2\n0\n").is_err());
        assert!(FiniteClassTable::from_csv("m=2,arity=2\n0,x\n").is_err());
        assert!(FiniteClassTable::from_csv("points=2,arity=2\n0,1\n").is_err());
    }

    #[test]
    fn estimate_constructors_keep_the_stderr_invariant() {
        assert_eq!(ComplexityEstimate::exact(0.5).stderr, 0.0);
        assert_eq!(ComplexityEstimate::closed_form(0.5).draws, 0);
        let mc = ComplexityEstimate::monte_carlo(0.5, 0.01, 1000);
        assert_eq!(mc.method, EstimateMethod::MonteCarlo);
    }
}
