//! Variation range of a cost over one local gate, the optimizers that
//! compute it, parameter-shift derivatives, and the analytic bounds.

mod adam;
mod bounds;
mod exact;
mod grid;
mod shift;
mod transfer;

use serde::{Deserialize, Serialize};

use crate::circuits::LocalUnitaryParams;

pub use adam::{variation_range_adam, AdamConfig};
pub use bounds::{
    bound_report, coupling_rank, coupling_rank_terms, general_bound, markov_tail, observable_pauli_terms, qsl_bound,
    task_tight_bound, theorem1_bound, tight_bound, tight_bound_observable, variance_bound, BoundReport,
};
pub use exact::{variation_range_exact_m1, DEGENERACY_RATIO};
pub use grid::{variation_range_grid, DEFAULT_GRID_RESOLUTION};
pub use shift::{
    finite_difference, parameter_shift_derivative, parameter_shift_half_angle, telescoping_bound_check, ParamCircuit,
    ShiftContext,
};
pub use transfer::{transfer_tensor, transfer_tensor_for, transfer_tensor_pure, TransferTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Adam,
    Grid,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "adam" => Ok(Method::Adam),
            "grid" => Ok(Method::Grid),
            other => Err(crate::Error::config(
                "optimizer",
                format!("unknown optimizer `{other}` (expected exact, adam or grid)"),
            )),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Adam => "adam",
            Method::Grid => "grid",
        })
    }
}

/// Extremes of the cost over the local gate `U_A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationResult {
    pub max_value: f64,
    pub min_value: f64,
    pub delta: f64,
    pub argmax: LocalUnitaryParams,
    pub argmin: LocalUnitaryParams,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the maximizer is not unique (exact oracle only).
    pub degenerate: bool,
}

impl VariationResult {
    pub(crate) fn new(
        max_value: f64,
        min_value: f64,
        argmax: LocalUnitaryParams,
        argmin: LocalUnitaryParams,
        method: Method,
    ) -> Self {
        Self {
            max_value,
            min_value,
            delta: (max_value - min_value).max(0.0),
            argmax,
            argmin,
            method,
            iterations: 0,
            converged: true,
            degenerate: false,
        }
    }
}
