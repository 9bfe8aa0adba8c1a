//! RBF-kernel support vector machine trained by sequential minimal
//! optimization, with logistic calibration of decision values into class
//! probabilities.
//!
//! Input vectors are used as given. They arrive unit-length from
//! [`crate::features`] and are never re-normalized here.

mod kernel;
mod model;
mod platt;
mod smo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kernel::rbf_kernel;
pub use model::{argmax, train_binary, BinaryModel, CalibratedModel, ModelBundle};
pub use platt::{fit_sigmoid, Sigmoid};
pub use smo::{solve, DualSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub c: f64,
    pub gamma: f64,
    /// KKT tolerance.
    pub tol: f64,
    /// Cap on outer SMO sweeps; `None` means ten times the training set size.
    pub max_passes: Option<usize>,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            c: 1.0,
            gamma: 0.01,
            tol: 1e-3,
            max_passes: None,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("gamma", self.gamma), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_passes == Some(0) {
            return Err(Error::InvalidArgument("max_passes must be positive".into()));
        }
        Ok(())
    }
}
