//! Empirical risk and generalization-gap measurement.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossFunction;

/// A real-valued predictor over feature vectors of a fixed dimension.
///
/// `predict` may assume `x.len() == input_dim()`; risk evaluation checks the
/// dimension once per dataset before iterating.
pub trait Predictor {
    fn input_dim(&self) -> usize;
    fn predict(&self, x: &[f64]) -> f64;
}

/// Wrap a closure as a predictor.
pub struct FnPredictor<F: Fn(&[f64]) -> f64> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnPredictor<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnPredictor { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> Predictor for FnPredictor<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Train/held-out risks and their absolute difference.
///
/// The held-out risk stands in for the unobservable population risk; it is a
/// proxy, not the true risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub train_risk: f64,
    pub test_risk: f64,
    pub gap: f64,
}

/// Mean per-example loss over `data`, in dataset order.
pub fn empirical_risk(predictor: &impl Predictor, data: &Dataset, loss: &LossFunction) -> Result<f64> {
    if predictor.input_dim() != data.dim() {
        return Err(Error::input(format!(
            "predictor expects dimension {}, dataset has {}",
            predictor.input_dim(),
            data.dim()
        )));
    }
    let mut sum = 0.0;
    for ex in data.examples() {
        let pred = predictor.predict(ex.x());
        if !pred.is_finite() {
            return Err(Error::input("predictor produced a non-finite value"));
        }
        sum += loss.eval(ex.y(), pred);
    }
    Ok(sum / data.len() as f64)
}

/// Risk on a training set, risk on a held-out set, and the absolute gap.
pub fn generalization_gap(
    predictor: &impl Predictor,
    train: &Dataset,
    test: &Dataset,
    loss: &LossFunction,
) -> Result<GapReport> {
    if train.dim() != test.dim() {
        return Err(Error::input(format!(
            "train dimension {} does not match test dimension {}",
            train.dim(),
            test.dim()
        )));
    }
    let train_risk = empirical_risk(predictor, train, loss)?;
    let test_risk = empirical_risk(predictor, test, loss)?;
    Ok(GapReport {
        train_risk,
        test_risk,
        gap: (train_risk - test_risk).abs(),
    })
}
