//! Adiabatically switched uniform electric field.
//!
//! The field is ramped as e^{ηt} from t = -∞ and held constant from t = 0:
//! E(t) = e^{η·min(t,0)} E. Its integral F(t) = ∫_{-∞}^t E(s) ds enters the
//! Hamiltonian as a uniform shift of the link phases, and F'(t) = E(t)
//! exactly, which several diagnostics check by finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    /// Field amplitude vector E (length = lattice dimension).
    pub amplitude: Vec<f64>,
    /// Switching rate η > 0.
    pub rate: f64,
}

impl FieldProfile {
    pub fn new(amplitude: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Validation {
                path: "field.eta".into(),
                message: format!("switching rate must be positive and finite, got {rate}"),
            });
        }
        if amplitude.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("field amplitude".into()));
        }
        Ok(Self { amplitude, rate })
    }

    /// A zero field with the given dimension (η fixed at 1 so the profile
    /// stays valid).
    pub fn zero(dimension: usize) -> Self {
        Self {
            amplitude: vec![0.0; dimension],
            rate: 1.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude.iter().all(|&e| e == 0.0)
    }

    /// E(t) = e^{η·min(t,0)} E.
    pub fn electric_field(&self, t: f64) -> Vec<f64> {
        let ramp = (self.rate * t.min(0.0)).exp();
        self.amplitude.iter().map(|&e| ramp * e).collect()
    }

    /// F(t) = ∫_{-∞}^t E(s) ds = (e^{η·min(t,0)}/η + max(t,0)) E.
    pub fn field_integral(&self, t: f64) -> Vec<f64> {
        let factor = (self.rate * t.min(0.0)).exp() / self.rate + t.max(0.0);
        self.amplitude.iter().map(|&e| factor * e).collect()
    }
}
