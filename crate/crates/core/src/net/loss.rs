use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Asymmetric squared loss; underestimates are weighted by `w > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub w: f64,
}

impl LossSpec {
    pub fn new(w: f64) -> Result<Self> {
        if !(w.is_finite() && w > 1.0) {
            return Err(Error::Parameter(format!("loss weight w must be > 1, got {w}")));
        }
        Ok(LossSpec { w })
    }
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec { w: 1.1 }
    }
}

/// `max(0, pred - label)^2 + w * max(0, label - pred)^2`
pub fn asym_loss(pred: f64, label: f64, spec: &LossSpec) -> f64 {
    let over = (pred - label).max(0.0);
    let under = (label - pred).max(0.0);
    over * over + spec.w * under * under
}

/// Derivative in `pred`; 0 at `pred == label`.
pub fn asym_loss_grad(pred: f64, label: f64, spec: &LossSpec) -> f64 {
    2.0 * (pred - label).max(0.0) - 2.0 * spec.w * (label - pred).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weight_must_exceed_one() {
        assert!(LossSpec::new(1.0).is_err());
        assert!(LossSpec::new(1.1).is_ok());
    }

    proptest! {
        #[test]
        fn nonnegative_and_zero_only_at_label(x in -2.0..2.0f64, y in 0.0..1.0f64) {
            let spec = LossSpec::default();
            let l = asym_loss(x, y, &spec);
            prop_assert!(l >= 0.0);
            prop_assert_eq!(l == 0.0, x == y);
        }

        #[test]
        fn underestimation_costs_more(y in 0.0..1.0f64, d in 1e-6..1.0f64, w in 1.0001..5.0f64) {
            let spec = LossSpec::new(w).unwrap();
            prop_assert!(asym_loss(y + d, y, &spec) < asym_loss(y - d, y, &spec));
        }
    }
}
