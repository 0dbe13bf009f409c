use crate::error::{Error, Result};
use crate::model::PropagationModel;

/// Smallest pilot reuse factor meeting a SINR target, with its coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotSolution {
    /// Unclamped `B1 γ / (M − B2 γ)`.
    pub beta_star: f64,
    pub b1: f64,
    pub b2: f64,
    /// `beta_star ≥ 1`, `beta_star·K ≤ S` and `M > B2 γ`.
    pub feasible: bool,
}

impl PilotSolution {
    /// Reuse factor to operate with: `beta_star` raised to 1 when the target
    /// is met even with full reuse.
    pub fn operating_beta(&self) -> f64 {
        self.beta_star.max(1.0)
    }
}

/// Pilot coefficients `(B1, B2)` at noise ratio `σ²/ρ`.
pub fn pilot_coefficients(m: f64, k: f64, noise_ratio: f64, alpha: f64) -> (f64, f64) {
    let a2 = alpha - 2.0;
    let a1 = alpha - 1.0;
    let x = noise_ratio;
    let b1 = 4.0 * k / (a2 * a2) + (k + m) / a1 + 2.0 * (k + x) / a2;
    let b2 = (k + x + 2.0 * k / a2) * (1.0 + x);
    (b1, b2)
}

/// Pilot reuse factor that meets `gamma` with equality. `rho` may be
/// `f64::INFINITY` for the noise-free limit.
pub fn optimal_pilot_reuse(
    m: f64,
    k: f64,
    rho: f64,
    gamma: f64,
    prop: &PropagationModel,
) -> Result<PilotSolution> {
    prop.validate()?;
    if !(rho > 0.0) {
        return Err(Error::domain("rho", rho, "power-control coefficient must be positive"));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain("gamma", gamma, "SINR target must be positive"));
    }
    let (b1, b2) = pilot_coefficients(m, k, prop.noise / rho, prop.alpha);
    let margin = m - b2 * gamma;
    if !(margin > 0.0) {
        return Err(Error::infeasible(format!(
            "M = {m} must exceed B2*gamma = {:.6} for SINR target {gamma}",
            b2 * gamma
        )));
    }
    let beta_star = b1 * gamma / margin;
    Ok(PilotSolution {
        beta_star,
        b1,
        b2,
        feasible: beta_star >= 1.0 && beta_star * k <= prop.s(),
    })
}
