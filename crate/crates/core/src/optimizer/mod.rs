//! Optimal pilot reuse, antenna/UE dimensioning, and finite-density searches.

mod dense;
mod finite;
mod pilot;
pub mod search;

pub use dense::{
    alternating_optimize, feasible_start, integer_refine, optimal_k_fixed_ratio,
    optimal_m_fixed_k, pilot_overhead_factor, unit_reuse_antennas, AntennaCoefficients,
    IntegerOptimum, RelaxedOptimum, CONVERGENCE_RTOL, DEFAULT_M_MAX, MAX_ITERATIONS,
};
pub use finite::{
    ee_vs_density, evaluate_with_optimal_reuse, optimize_at_density, optimize_for_ue_density,
    optimize_rho_finite_lambda, optimize_rho_with_reuse, FiniteOptimum, SearchLimits,
    UeDensityOptimum, RHO_BRACKET_HI, RHO_BRACKET_LO, RHO_RTOL,
};
pub use pilot::{optimal_pilot_reuse, pilot_coefficients, PilotSolution};

use crate::error::Result;
use crate::model::{HardwareModel, PropagationModel};

/// Dense-limit objective with the unit-reuse constraint applied; `None` when
/// the point is infeasible. Exposed for brute-force cross-checks.
pub fn constrained_objective(
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Option<f64> {
    let v = dense::constrained_objective(m, k, gamma, prop, hw);
    v.is_finite().then_some(v)
}

/// Relaxed and integer dense-limit optima from the default start point.
pub fn optimize_dense(
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
    m_max: u32,
) -> Result<(RelaxedOptimum, IntegerOptimum)> {
    let (m0, k0) = feasible_start(gamma, prop, hw, m_max)?;
    let relaxed = alternating_optimize(m0, k0, gamma, prop, hw)?;
    let integer = integer_refine(&relaxed, gamma, prop, hw)?;
    Ok((relaxed, integer))
}
