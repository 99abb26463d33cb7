//! Loss functions over {+1, -1} labels and real-valued predictions.
//!
//! Both losses map into `[0, 1]`. The clipped hinge is the surrogate used for
//! risk and bound evaluation: it is Lipschitz in the prediction argument,
//! which the bound machinery requires. The zero-one loss is reporting-only
//! and is rejected wherever a finite Lipschitz constant is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFunction {
    /// `1` on a misclassification (`y * prediction <= 0`), else `0`.
    ZeroOne,
    /// `min(1, max(0, 1 - lipschitz * y * prediction))`.
    ClippedHinge { lipschitz: f64 },
}

impl LossFunction {
    pub fn zero_one() -> Self {
        LossFunction::ZeroOne
    }

    /// The canonical clipped hinge with Lipschitz constant 1.
    pub fn clipped_hinge() -> Self {
        LossFunction::ClippedHinge { lipschitz: 1.0 }
    }

    /// A clipped hinge with Lipschitz constant `c` in the prediction argument.
    pub fn clipped_hinge_scaled(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::input("hinge Lipschitz constant must be positive and finite"));
        }
        Ok(LossFunction::ClippedHinge { lipschitz: c })
    }

    /// Per-example loss; `y` must be `+1` or `-1` and `prediction` finite.
    pub fn eval(&self, y: i8, prediction: f64) -> f64 {
        debug_assert!(y == 1 || y == -1);
        let margin = f64::from(y) * prediction;
        match self {
            LossFunction::ZeroOne => {
                if margin > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            LossFunction::ClippedHinge { lipschitz } => (1.0 - lipschitz * margin).clamp(0.0, 1.0),
        }
    }

    /// Lipschitz constant in the prediction argument; `None` for zero-one.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            LossFunction::ZeroOne => None,
            LossFunction::ClippedHinge { lipschitz } => Some(*lipschitz),
        }
    }

    /// Derivative of the loss in the prediction argument, with the
    /// subgradient at the hinge kinks taken as zero.
    pub(crate) fn grad_prediction(&self, y: i8, prediction: f64) -> f64 {
        match self {
            LossFunction::ZeroOne => 0.0,
            LossFunction::ClippedHinge { lipschitz } => {
                let u = lipschitz * f64::from(y) * prediction;
                if u > 0.0 && u < 1.0 {
                    // interior of the hinge ramp: 1 - u in (0, 1)
                    -lipschitz * f64::from(y)
                } else {
                    0.0
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_one_counts_misclassifications() {
        let l = LossFunction::zero_one();
        assert_eq!(l.eval(1, 2.5), 0.0);
        assert_eq!(l.eval(-1, 2.5), 1.0);
        // a prediction of exactly zero is counted as an error for both labels
        assert_eq!(l.eval(1, 0.0), 1.0);
        assert_eq!(l.eval(-1, 0.0), 1.0);
    }

    #[test]
    fn hinge_matches_definition() {
        let l = LossFunction::clipped_hinge();
        assert_eq!(l.eval(1, 1.0), 0.0);
        assert_eq!(l.eval(1, 0.0), 1.0);
        assert_eq!(l.eval(1, 0.5), 0.5);
        assert_eq!(l.eval(-1, -2.0), 0.0);
        assert_eq!(l.eval(-1, 3.0), 1.0);
    }

    #[test]
    fn scaled_hinge_steepens_the_ramp() {
        let l = LossFunction::clipped_hinge_scaled(2.0).unwrap();
        assert_eq!(l.eval(1, 0.25), 0.5);
        assert_eq!(l.lipschitz(), Some(2.0));
        assert!(LossFunction::clipped_hinge_scaled(0.0).is_err());
        assert!(LossFunction::clipped_hinge_scaled(f64::INFINITY).is_err());
    }

    #[test]
    fn hinge_gradient_is_zero_on_the_flats() {
        let l = LossFunction::clipped_hinge();
        assert_eq!(l.grad_prediction(1, 2.0), 0.0); // saturated at 0
        assert_eq!(l.grad_prediction(1, -1.0), 0.0); // saturated at 1
        assert_eq!(l.grad_prediction(1, 0.5), -1.0);
        assert_eq!(l.grad_prediction(-1, -0.5), 1.0);
    }
}
