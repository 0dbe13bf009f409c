//! Finite-density searches: transmit power, density sweeps, and dimensioning
//! for a prescribed UE density.

use rayon::prelude::*;

use super::dense::{IntegerOptimum, DEFAULT_M_MAX};
use super::pilot::{optimal_pilot_reuse, pilot_coefficients};
use super::search::{bisect_threshold, scan_then_refine};
use crate::error::{Error, Result};
use crate::model::{
    asymptotic_pilot_coefficients, energy_efficiency, EEReport, HardwareModel, OperatingPoint,
    PropagationModel,
};

/// Lower end of the power-control search, as a multiple of the noise energy.
pub const RHO_BRACKET_LO: f64 = 1e-4;
/// Upper end of the power-control search, as a multiple of the noise energy.
pub const RHO_BRACKET_HI: f64 = 1e12;
/// Relative tolerance on the optimal power-control coefficient.
pub const RHO_RTOL: f64 = 1e-6;
const RHO_SCAN_POINTS: usize = 49;

/// Bounds of the integer `(M, K)` grid searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchLimits {
    pub m_max: u32,
    /// Defaults to the block length when `None`.
    pub k_max: Option<u32>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            m_max: DEFAULT_M_MAX,
            k_max: None,
        }
    }
}

impl SearchLimits {
    fn k_max(&self, prop: &PropagationModel) -> u32 {
        self.k_max.unwrap_or(prop.block_len).min(prop.block_len)
    }
}

/// Best finite-density configuration found by a grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteOptimum {
    pub m: u32,
    pub k: u32,
    pub lambda: f64,
    pub rho: f64,
    pub beta: f64,
    pub report: EEReport,
}

/// Evaluates EE with the pilot reuse chosen to meet `gamma`. Operating points
/// where no reuse factor reaches the target are reported at maximal reuse
/// (zero SE) and marked infeasible.
pub fn evaluate_with_optimal_reuse(
    lambda: f64,
    m: f64,
    k: f64,
    rho: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<(f64, EEReport)> {
    let max_beta = prop.s() / k;
    let beta = match optimal_pilot_reuse(m, k, rho, gamma, prop) {
        Ok(sol) if sol.beta_star * k <= prop.s() => sol.operating_beta(),
        Ok(_) => max_beta,
        Err(e) if e.is_infeasibility() => max_beta,
        Err(e) => return Err(e),
    };
    if max_beta < 1.0 {
        return Err(Error::infeasible(format!("K = {k} exceeds block length")));
    }
    let pt = OperatingPoint {
        lambda,
        m,
        k,
        beta,
        rho,
        gamma,
    };
    Ok((beta, energy_efficiency(&pt, prop, hw)?))
}

/// Whether some reuse factor meets `gamma` at power `rho`.
fn reachable(m: f64, k: f64, rho: f64, gamma: f64, prop: &PropagationModel) -> bool {
    let (b1, b2) = pilot_coefficients(m, k, prop.noise / rho, prop.alpha);
    let margin = m - b2 * gamma;
    margin > 0.0 && b1 * gamma / margin * k <= prop.s()
}

/// Maximizes EE over the power-control coefficient at fixed density, with
/// the pilot reuse factor following the SINR target.
pub fn optimize_rho_finite_lambda(
    lambda: f64,
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<(f64, EEReport)> {
    optimize_rho_with_reuse(lambda, m, k, gamma, prop, hw).map(|(rho, _, r)| (rho, r))
}

/// As [`optimize_rho_finite_lambda`], also returning the pilot reuse factor.
pub fn optimize_rho_with_reuse(
    lambda: f64,
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<(f64, f64, EEReport)> {
    prop.validate()?;
    hw.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain("lambda", lambda, "BS density must be positive and finite"));
    }
    let lo = (prop.noise * RHO_BRACKET_LO).ln();
    let hi = (prop.noise * RHO_BRACKET_HI).ln();
    if !reachable(m, k, hi.exp(), gamma, prop) {
        return Err(Error::infeasible(format!(
            "SINR target {gamma} unreachable for (M, K) = ({m}, {k}) at any power in the search bracket"
        )));
    }
    // feasibility is monotone in rho: trim the infeasible low-power end
    let lo = if reachable(m, k, lo.exp(), gamma, prop) {
        lo
    } else {
        bisect_threshold(|t| reachable(m, k, t.exp(), gamma, prop), lo, hi, 1e-9)
    };
    let ee_at = |t: f64| -> f64 {
        match evaluate_with_optimal_reuse(lambda, m, k, t.exp(), gamma, prop, hw) {
            Ok((_, r)) if r.feasible => r.ee,
            _ => f64::NEG_INFINITY,
        }
    };
    let (t, _) = scan_then_refine(ee_at, lo, hi, RHO_SCAN_POINTS, RHO_RTOL);
    let rho = t.exp();
    let (beta, report) = evaluate_with_optimal_reuse(lambda, m, k, rho, gamma, prop, hw)?;
    if !report.feasible {
        return Err(Error::infeasible("no feasible power-control coefficient found"));
    }
    Ok((rho, beta, report))
}

/// EE along a density grid for fixed `(M, K)` with `ρ = λ ρ̃`.
pub fn ee_vs_density(
    rho_tilde: f64,
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
    lambda_grid: &[f64],
) -> Result<Vec<EEReport>> {
    prop.validate()?;
    hw.validate()?;
    if !(rho_tilde > 0.0) {
        return Err(Error::domain("rho_tilde", rho_tilde, "must be positive"));
    }
    let (b1, b2) = asymptotic_pilot_coefficients(m, k, prop.alpha);
    if m <= b2 * gamma || b1 * gamma / (m - b2 * gamma) * k > prop.s() {
        return Err(Error::infeasible(format!(
            "(M, K) = ({m}, {k}) cannot meet SINR target {gamma} even in the dense limit"
        )));
    }
    lambda_grid
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::domain("lambda", lambda, "grid densities must be positive"));
            }
            let rho = if lambda.is_infinite() { f64::INFINITY } else { lambda * rho_tilde };
            evaluate_with_optimal_reuse(lambda, m, k, rho, gamma, prop, hw).map(|(_, r)| r)
        })
        .collect()
}

/// `a` beats `b`: higher EE, ties to fewer antennas then fewer UEs.
fn better(a: &FiniteOptimum, b: &FiniteOptimum) -> bool {
    if a.report.ee != b.report.ee {
        return a.report.ee > b.report.ee;
    }
    (a.m, a.k) < (b.m, b.k)
}

fn grid_search<L>(
    density_of: L,
    m_min_is_k: bool,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
    limits: &SearchLimits,
) -> Result<FiniteOptimum>
where
    L: Fn(u32) -> f64 + Sync,
{
    let k_max = limits.k_max(prop);
    let per_k: Vec<Option<FiniteOptimum>> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let kf = f64::from(k);
            let lambda = density_of(k);
            let (_, b2) = asymptotic_pilot_coefficients(0.0, kf, prop.alpha);
            // below the dense-limit threshold no power helps
            let m_lo = ((b2 * gamma).floor() as u32 + 1).max(if m_min_is_k { k } else { 1 });
            let mut best: Option<FiniteOptimum> = None;
            for m in m_lo..=limits.m_max {
                let Ok((rho, beta, report)) =
                    optimize_rho_with_reuse(lambda, f64::from(m), kf, gamma, prop, hw)
                else {
                    continue;
                };
                let cand = FiniteOptimum {
                    m,
                    k,
                    lambda,
                    rho,
                    beta,
                    report,
                };
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
            }
            best
        })
        .collect();
    per_k
        .into_iter()
        .flatten()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or_else(|| Error::infeasible("no feasible (M, K) in the search grid"))
}

/// Integer `(M, K)` grid search at a fixed BS density, with `ρ` and `β`
/// optimized at every grid point.
pub fn optimize_at_density(
    lambda: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
    limits: &SearchLimits,
) -> Result<FiniteOptimum> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain("lambda", lambda, "BS density must be positive and finite"));
    }
    grid_search(|_| lambda, false, gamma, prop, hw, limits)
}

/// Optimum under a fixed UE density `μ = K λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeDensityOptimum {
    pub optimum: IntegerOptimum,
    pub lambda: f64,
    pub rho: f64,
    pub report: EEReport,
}

impl From<FiniteOptimum> for UeDensityOptimum {
    fn from(f: FiniteOptimum) -> Self {
        UeDensityOptimum {
            optimum: IntegerOptimum {
                m: f.m,
                k: f.k,
                beta: f.beta,
                ee: f.report.ee,
                neighborhood_radius_used: 0,
            },
            lambda: f.lambda,
            rho: f.rho,
            report: f.report,
        }
    }
}

/// Integer grid over `K ∈ [1, S]`, `M ∈ [K, M_max]` with `λ = μ/K`.
pub fn optimize_for_ue_density(
    mu: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
    limits: &SearchLimits,
) -> Result<UeDensityOptimum> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain("mu", mu, "UE density must be positive and finite"));
    }
    grid_search(|k| mu / f64::from(k), true, gamma, prop, hw, limits).map(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::asymptotic_objective;

    fn setup() -> (PropagationModel, HardwareModel) {
        (PropagationModel::default(), HardwareModel::default())
    }

    #[test]
    fn fixed_point_ee_grows_with_density() {
        let (prop, hw) = setup();
        let mut last = 0.0;
        for lambda in [0.1, 1.0, 10.0, 100.0] {
            let (_, r) = optimize_rho_finite_lambda(lambda, 89.0, 10.0, 3.0, &prop, &hw).unwrap();
            assert!(r.feasible);
            assert!(r.ee > last, "{lambda}: {} <= {last}", r.ee);
            last = r.ee;
        }
        let dense = asymptotic_objective(89.0, 10.0, 3.0, &prop, &hw).unwrap();
        assert!(last < dense);
    }

    #[test]
    fn density_ten_is_within_ten_percent_of_dense_limit() {
        let (prop, hw) = setup();
        let (_, r) = optimize_rho_finite_lambda(10.0, 89.0, 10.0, 3.0, &prop, &hw).unwrap();
        let dense = asymptotic_objective(89.0, 10.0, 3.0, &prop, &hw).unwrap();
        assert!(r.ee >= 0.9 * dense, "{} vs {dense}", r.ee);
    }

    #[test]
    fn optimal_rho_meets_target_exactly() {
        let (prop, hw) = setup();
        let (rho, beta, r) = optimize_rho_with_reuse(10.0, 89.0, 10.0, 3.0, &prop, &hw).unwrap();
        assert!(rho > prop.noise * RHO_BRACKET_LO && rho < prop.noise * RHO_BRACKET_HI);
        assert!(beta > 1.0);
        assert!((r.sinr - 3.0).abs() < 1e-9 * 3.0);
    }

    #[test]
    fn low_power_is_infeasible() {
        let (prop, _) = setup();
        assert!(!reachable(89.0, 10.0, prop.noise * 1e-4, 3.0, &prop));
        assert!(reachable(89.0, 10.0, prop.noise * 1e4, 3.0, &prop));
    }

    #[test]
    fn unreachable_target_is_reported() {
        let (prop, hw) = setup();
        let err = optimize_rho_finite_lambda(10.0, 10.0, 10.0, 3.0, &prop, &hw).unwrap_err();
        assert!(err.is_infeasibility());
    }

    #[test]
    fn density_grid_with_fixed_scaling() {
        let (prop, hw) = setup();
        let grid = [1.0, 10.0, f64::INFINITY];
        let r = ee_vs_density(1e-19, 89.0, 10.0, 3.0, &prop, &hw, &grid).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r[0].ee < r[1].ee);
        assert!(r[2].per_cell);
        assert!(ee_vs_density(1e-19, 5.0, 10.0, 3.0, &prop, &hw, &grid).is_err());
    }

    #[test]
    fn small_grid_search_is_deterministic() {
        let (prop, hw) = setup();
        let limits = SearchLimits {
            m_max: 120,
            k_max: Some(15),
        };
        let a = optimize_at_density(10.0, 3.0, &prop, &hw, &limits).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| optimize_at_density(10.0, 3.0, &prop, &hw, &limits).unwrap());
        assert_eq!(a, b);
        assert!(a.report.feasible);
    }

    #[test]
    fn ue_density_sets_bs_density() {
        let (prop, hw) = setup();
        let limits = SearchLimits {
            m_max: 120,
            k_max: Some(15),
        };
        let o = optimize_for_ue_density(1e3, 3.0, &prop, &hw, &limits).unwrap();
        assert!((o.lambda * f64::from(o.optimum.k) - 1e3).abs() < 1e-9);
        assert!(o.optimum.m >= o.optimum.k);
        assert!(optimize_for_ue_density(0.0, 3.0, &prop, &hw, &limits).is_err());
    }
}
