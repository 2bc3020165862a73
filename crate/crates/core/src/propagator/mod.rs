//! Two-parameter unitary propagators for the driven lattice operators.
//!
//! The construction freezes the generator on the cells of a grid of spacing
//! 1/k and multiplies step exponentials; the limit k → ∞ is the propagator,
//! approached here by k-doubling with a Cauchy stopping rule. The Γ/C
//! operator calculus quantifies how fast H(t)^{1/2} turns with t, which is
//! exactly what controls the product formula, and the Dyson recursion
//! reconstructs H(t)^{1/2} U(t,s) H(s)^{-1/2} term by term as an end-to-end
//! consistency check.

mod dyson;
mod gamma;
mod product;
pub mod reference;
mod weak;

pub use dyson::{dyson_series, dyson_terms, w_k, w_k_bound_check, WkBound};
pub use gamma::{
    c_closed_form, c_limit, c_operator, c_operator_field_form, dunford_taylor_residual, gamma,
    gamma1_closed_form, gamma2_spectral, gamma_one_sided, gamma_rate, gamma_rate_sup,
    h_half_c_rate_sup, GammaOperator, OneSidedLimits,
};
pub use product::{converge_propagator, u_k_matrix, PropagatorTable, StepRule};
pub use weak::{weak_derivative_residual_s, weak_derivative_residual_t};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Interval, starting subdivision, and stopping rule for the k-doubling
/// refinement. Grid points are anchored at the left endpoint of the
/// interval with spacing 1/k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSchedule {
    pub interval: (f64, f64),
    pub k0: u32,
    pub tolerance: f64,
    pub k_cap: u32,
}

impl PropagatorSchedule {
    pub fn new(interval: (f64, f64), k0: u32, tolerance: f64, k_cap: u32) -> Result<Self> {
        if !(interval.0 < interval.1) {
            return Err(Error::Validation {
                path: "propagator.interval".into(),
                message: format!("need s0 < t1, got {:?}", interval),
            });
        }
        if k0 == 0 {
            return Err(Error::Validation {
                path: "propagator.k0".into(),
                message: "subdivision count must be ≥ 1".into(),
            });
        }
        if !(tolerance > 0.0) {
            return Err(Error::Validation {
                path: "propagator.tolerance".into(),
                message: format!("tolerance must be positive, got {tolerance}"),
            });
        }
        Ok(Self {
            interval,
            k0,
            tolerance,
            k_cap,
        })
    }

    pub fn contains(&self, t: f64) -> bool {
        let eps = 1e-12;
        t >= self.interval.0 - eps && t <= self.interval.1 + eps
    }
}

/// A built propagator with its convergence history.
#[derive(Debug, Clone)]
pub struct PropagatorResult {
    pub matrix: CMatrix,
    pub t: f64,
    pub s: f64,
    /// Subdivision at which the doubling stopped.
    pub k: u32,
    /// Final Cauchy gap ‖U_k − U_{2k}‖ (operator norm).
    pub gap: f64,
    /// (k, gap) pairs seen during refinement.
    pub gap_history: Vec<(u32, f64)>,
    /// Whether the gap met the tolerance before the cap.
    pub converged: bool,
    /// Deviation from the independent reference integrator, when requested.
    pub reference_deviation: Option<f64>,
}
