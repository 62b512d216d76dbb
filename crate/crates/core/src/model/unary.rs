use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::MorphTag;

/// Unary factor of one position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum UnaryConstraint {
    Free,
    /// `phi(m) = alpha` if `m == tag`, else 1. Stored as `log alpha > 0`.
    Prefer { tag: MorphTag, log_alpha: f64 },
    /// `phi(m) = 1` if `m == tag`, else 0.
    Clamp(MorphTag),
}

impl UnaryConstraint {
    pub fn prefer(tag: MorphTag, log_alpha: f64) -> Result<Self> {
        if log_alpha.is_nan() || log_alpha <= 0.0 {
            return Err(Error::Config(format!(
                "alpha must exceed 1 (log alpha = {})",
                log_alpha
            )));
        }
        Ok(UnaryConstraint::Prefer { tag, log_alpha })
    }

    /// `log phi(m)`; `-inf` where a clamp forbids `m`.
    pub fn log_phi(&self, m: &MorphTag) -> f64 {
        match self {
            UnaryConstraint::Free => 0.0,
            UnaryConstraint::Prefer { tag, log_alpha } => {
                if m == tag {
                    *log_alpha
                } else {
                    0.0
                }
            }
            UnaryConstraint::Clamp(tag) => {
                if m == tag {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

/// `phi_i(m)` of the given position.
pub fn phi(m: &MorphTag, position: usize, constraints: &[UnaryConstraint]) -> f64 {
    constraints[position].log_phi(m).exp()
}
