//! Antenna and user dimensioning in the dense-network limit.
//!
//! The objective is the dense-limit EE with the pilot reuse tuned to meet the
//! SINR target (see [`crate::model::asymptotic_objective`]), subject to a
//! reuse factor of at least one. It is quasi-concave in `(M, K)`, which the
//! closed-form line maximizers and the alternating scheme rely on.

use crate::error::{Error, Result};
use crate::model::{
    asymptotic_objective_raw, asymptotic_pilot_coefficients, validate_target, HardwareModel,
    PropagationModel,
};

/// Relative EE change at which the alternating scheme stops.
pub const CONVERGENCE_RTOL: f64 = 1e-10;
/// Iteration cap for the alternating scheme.
pub const MAX_ITERATIONS: usize = 100;
/// Default upper bound on antennas per BS in searches.
pub const DEFAULT_M_MAX: u32 = 512;

/// Result of the real-valued alternating optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedOptimum {
    pub m_star: f64,
    pub k_star: f64,
    /// bit/Joule.
    pub ee: f64,
    pub iterations: usize,
    /// `(M, K, EE)` for the start point and after every iteration.
    pub trajectory: Vec<(f64, f64, f64)>,
}

/// Best integer configuration near the relaxed optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerOptimum {
    pub m: u32,
    pub k: u32,
    pub beta: f64,
    /// bit/Joule.
    pub ee: f64,
    pub neighborhood_radius_used: u32,
}

/// Coefficients `(a0, a1, a2)` of the antenna-count closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl AntennaCoefficients {
    pub fn new(gamma: f64, prop: &PropagationModel) -> Self {
        let al = prop.alpha;
        let s = prop.s();
        AntennaCoefficients {
            a0: gamma / (s * (al - 1.0)),
            a1: (4.0 * gamma / ((al - 2.0) * (al - 2.0)) + gamma / (al - 1.0) + 2.0 * gamma / (al - 2.0)) / s,
            a2: (1.0 + 2.0 / (al - 2.0)) * gamma,
        }
    }
}

/// `G(c̄)`: pilot overhead per UE at fixed antennas-per-UE ratio. Errors when
/// `c̄` cannot reach the target.
pub fn pilot_overhead_factor(c_bar: f64, gamma: f64, prop: &PropagationModel) -> Result<f64> {
    let al = prop.alpha;
    let denom = c_bar - (1.0 + 2.0 / (al - 2.0)) * gamma;
    if !(denom > 0.0) {
        return Err(Error::infeasible(format!(
            "antenna/UE ratio {c_bar} must exceed {:.6} for SINR target {gamma}",
            (1.0 + 2.0 / (al - 2.0)) * gamma
        )));
    }
    let num = 4.0 * gamma / ((al - 2.0) * (al - 2.0))
        + gamma / (al - 1.0)
        + 2.0 * gamma / (al - 2.0)
        + gamma / (al - 1.0) * c_bar;
    Ok(num / denom / prop.s())
}

/// EE-maximizing `K` along the ray `M = c̄ K`.
pub fn optimal_k_fixed_ratio(
    c_bar: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<f64> {
    prop.validate()?;
    hw.validate()?;
    if !(c_bar > 0.0) {
        return Err(Error::domain("c_bar", c_bar, "antenna/UE ratio must be positive"));
    }
    let g = pilot_overhead_factor(c_bar, gamma, prop)?;
    let (c0, c1, d0, d1) = (hw.c0, hw.c1, hw.d0, hw.d1);
    let lin = c1 + d0 * c_bar;
    let root = ((g * c0).powi(2) + c0 * d1 * c_bar + c0 * g * lin).sqrt();
    Ok((root - g * c0) / (d1 * c_bar + g * lin))
}

/// `M` at which the reuse factor needed for the target drops to exactly one.
/// `None` when `γ ≥ α − 1`: the required reuse then stays above one for every
/// `M` and the constraint never binds.
pub fn unit_reuse_antennas(k: f64, gamma: f64, prop: &PropagationModel) -> Option<f64> {
    let al = prop.alpha;
    let a2 = al - 2.0;
    let denom = 1.0 - gamma / (al - 1.0);
    (denom > 0.0)
        .then(|| k * gamma * (1.0 + 4.0 / (a2 * a2) + 1.0 / (al - 1.0) + 4.0 / a2) / denom)
}

/// Unconstrained stationary point in `M` for fixed `K`.
fn stationary_antennas(k: f64, gamma: f64, prop: &PropagationModel, hw: &HardwareModel) -> f64 {
    let AntennaCoefficients { a0, a1, a2 } = AntennaCoefficients::new(gamma, prop);
    let static_ratio = (hw.c0 + hw.c1 * k) / (hw.d0 * k + hw.d1 * k * k);
    let disc = a1 * a2 * k
        + a1 * a1 * k * k
        + (1.0 - a0 * k) * (a1 * k + a0 * a2 * k) * static_ratio
        + a0 * a1 * a2 * k * k
        + a0 * a2 * a2 * k;
    k * (a1 * k + a2 + disc.sqrt()) / (1.0 - a0 * k)
}

/// EE-maximizing `M` for fixed `K`, honouring the unit-reuse constraint.
pub fn optimal_m_fixed_k(
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<f64> {
    prop.validate()?;
    hw.validate()?;
    validate_target(gamma, prop)?;
    if !(k > 0.0) {
        return Err(Error::domain("k", k, "UE count must be positive"));
    }
    if hw.d0 + hw.d1 * k <= 0.0 {
        return Err(Error::Degenerate(
            "antenna energy is zero; EE grows without bound in M".into(),
        ));
    }
    let a0 = AntennaCoefficients::new(gamma, prop).a0;
    if a0 * k >= 1.0 {
        return Err(Error::infeasible(format!(
            "K = {k} too large for block length {}",
            prop.block_len
        )));
    }
    let m = stationary_antennas(k, gamma, prop, hw);
    // reuse factor decreases in M, so the constraint caps M from above
    Ok(match unit_reuse_antennas(k, gamma, prop) {
        Some(cap) if m > cap => cap,
        _ => m,
    })
}

/// Dense-limit objective including the unit-reuse constraint; `-inf` outside
/// the feasible set.
pub(crate) fn constrained_objective(
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> f64 {
    let (b1, b2) = asymptotic_pilot_coefficients(m, k, prop.alpha);
    let margin = m - b2 * gamma;
    if !(margin > 0.0) || b1 * gamma / margin < 1.0 - 1e-12 {
        return f64::NEG_INFINITY;
    }
    let v = asymptotic_objective_raw(m, k, gamma, prop, hw);
    if v > 0.0 {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// A start point for [`alternating_optimize`]: one UE and an antenna count
/// with a 2x margin over the SINR threshold, doubled until feasible.
pub fn feasible_start(
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
    m_max: u32,
) -> Result<(f64, f64)> {
    validate_target(gamma, prop)?;
    let k = 1.0;
    let mut m = (2.0 * k * gamma * (1.0 + 2.0 / (prop.alpha - 2.0))).ceil();
    while m <= f64::from(m_max) {
        if constrained_objective(m, k, gamma, prop, hw).is_finite() {
            return Ok((m, k));
        }
        m *= 2.0;
    }
    Err(Error::infeasible(format!(
        "no feasible start with K = 1 and M <= {m_max}"
    )))
}

/// Alternates the closed-form `K` (fixed `M/K`) and `M` (fixed `K`) updates.
pub fn alternating_optimize(
    start_m: f64,
    start_k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<RelaxedOptimum> {
    prop.validate()?;
    hw.validate()?;
    validate_target(gamma, prop)?;
    let mut ee = constrained_objective(start_m, start_k, gamma, prop, hw);
    if !ee.is_finite() {
        return Err(Error::infeasible(format!(
            "start (M, K) = ({start_m}, {start_k}) is infeasible; use a feasibility search such as feasible_start"
        )));
    }
    let (mut m, mut k) = (start_m, start_k);
    let mut trajectory = vec![(m, k, ee)];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let k_new = optimal_k_fixed_ratio(m / k, gamma, prop, hw)?;
        let m_new = optimal_m_fixed_k(k_new, gamma, prop, hw)?;
        let ee_new = constrained_objective(m_new, k_new, gamma, prop, hw);
        if !(ee_new.is_finite()) {
            return Err(Error::infeasible(format!(
                "alternating step left the feasible set at ({m_new}, {k_new})"
            )));
        }
        let change = (ee_new - ee).abs() / ee.abs();
        m = m_new;
        k = k_new;
        ee = ee_new;
        trajectory.push((m, k, ee));
        if change < CONVERGENCE_RTOL {
            break;
        }
    }
    Ok(RelaxedOptimum {
        m_star: m,
        k_star: k,
        ee,
        iterations,
        trajectory,
    })
}

/// `a` beats `b`: higher EE, ties to fewer antennas then fewer UEs.
fn better(a: (f64, u32, u32), b: (f64, u32, u32)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    (a.1, a.2) < (b.1, b.2)
}

/// Searches integer points in growing square rings around the rounded relaxed
/// optimum, stopping once a complete ring brings no improvement.
pub fn integer_refine(
    relaxed: &RelaxedOptimum,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<IntegerOptimum> {
    const START_RADIUS: i64 = 2;
    let cm = relaxed.m_star.round().max(1.0) as i64;
    let ck = relaxed.k_star.round().max(1.0) as i64;
    let max_radius = i64::from(DEFAULT_M_MAX.max(prop.block_len));

    let eval = |m: i64, k: i64| -> Option<(f64, u32, u32)> {
        if m < 1 || k < 1 {
            return None;
        }
        let v = constrained_objective(m as f64, k as f64, gamma, prop, hw);
        v.is_finite().then_some((v, m as u32, k as u32))
    };

    let mut best: Option<(f64, u32, u32)> = None;
    let consider = |cand: Option<(f64, u32, u32)>, best: &mut Option<(f64, u32, u32)>| -> bool {
        match (cand, *best) {
            (Some(c), None) => {
                *best = Some(c);
                true
            }
            (Some(c), Some(b)) if better(c, b) => {
                *best = Some(c);
                true
            }
            _ => false,
        }
    };

    for dm in -START_RADIUS..=START_RADIUS {
        for dk in -START_RADIUS..=START_RADIUS {
            consider(eval(cm + dm, ck + dk), &mut best);
        }
    }
    let mut radius = START_RADIUS;
    loop {
        let r = radius + 1;
        if r > max_radius {
            break;
        }
        let mut improved = false;
        for d in -r..=r {
            for (dm, dk) in [(d, -r), (d, r), (-r, d), (r, d)] {
                improved |= consider(eval(cm + dm, ck + dk), &mut best);
            }
        }
        // keep widening while nothing feasible has been seen yet
        if !improved && best.is_some() {
            break;
        }
        radius = r;
    }

    let (ee, m, k) = best.ok_or_else(|| {
        Error::infeasible("no feasible integer (M, K) near the relaxed optimum")
    })?;
    let (b1, b2) = asymptotic_pilot_coefficients(f64::from(m), f64::from(k), prop.alpha);
    Ok(IntegerOptimum {
        m,
        k,
        beta: b1 * gamma / (f64::from(m) - b2 * gamma),
        ee,
        neighborhood_radius_used: radius as u32,
    })
}
