//! Closed-form uplink performance and energy model.
//!
//! Everything here is a pure function of its arguments. Energies are in
//! Joule per symbol, distances in km, densities per km². Antenna and user
//! counts are real-valued; integrality is the optimizer's concern.
//!
//! Two regimes are supported through [`OperatingPoint::lambda`]:
//!
//! * finite `lambda`: the full expressions, including receiver noise and the
//!   radiated-energy term of the consumption model;
//! * `lambda == f64::INFINITY`: the dense-network limit with the power-control
//!   coefficient growing linearly in the density. Noise vanishes from the SINR,
//!   the radiated energy vanishes from the consumption, and the area quantities
//!   (which diverge) are reported per cell. Their ratio is the limit EE.
//!
//! `rho == f64::INFINITY` on its own removes the noise terms (`noise / rho`
//! evaluates to an exact zero) but keeps finite-density bookkeeping.

use crate::error::{Error, Result};

/// Symbol duration used by the reference hardware figures, in s/symbol.
pub const REFERENCE_SYMBOL_TIME: f64 = 5e-8;

/// Relative slack when comparing an achieved SINR against its target.
pub const SINR_TARGET_RTOL: f64 = 1e-9;

/// Pathloss and noise description shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    /// Pathloss exponent, strictly above 2.
    pub alpha: f64,
    /// Linear propagation loss at 1 km.
    pub omega: f64,
    /// Receiver noise energy per symbol (J/symbol).
    pub noise: f64,
    /// Symbols per coherence block.
    pub block_len: u32,
}

impl Default for PropagationModel {
    /// Urban macro reference values: α = 3.76, 130 dB at 1 km, σ² = 1e-20 J,
    /// S = 400.
    fn default() -> Self {
        PropagationModel {
            alpha: 3.76,
            omega: 1e13,
            noise: 1e-20,
            block_len: 400,
        }
    }
}

impl PropagationModel {
    pub fn new(alpha: f64, omega: f64, noise: f64, block_len: u32) -> Result<Self> {
        let p = PropagationModel {
            alpha,
            omega,
            noise,
            block_len,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::domain(
                "alpha",
                self.alpha,
                "pathloss exponent must exceed 2",
            ));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::domain("omega", self.omega, "must be positive"));
        }
        if !(self.noise > 0.0) || !self.noise.is_finite() {
            return Err(Error::domain("noise", self.noise, "must be positive"));
        }
        if self.block_len == 0 {
            return Err(Error::domain("block_len", 0.0, "must be at least 1"));
        }
        Ok(())
    }

    /// Block length as a float, for use in the formulas.
    pub fn s(&self) -> f64 {
        f64::from(self.block_len)
    }

    /// Expected sum over other cells of `(d_jj / d_0j)^α` for one UE per cell:
    /// `2 / (α − 2)`.
    pub fn interference_ratio_mean(&self) -> f64 {
        2.0 / (self.alpha - 2.0)
    }

    /// Expected sum over other cells of `(d_jj / d_0j)^{2α}`: `1 / (α − 1)`.
    pub fn squared_ratio_mean(&self) -> f64 {
        1.0 / (self.alpha - 1.0)
    }

    /// `Γ(α/2 + 1) / (πλ)^{α/2}`, the mean of `d^α` for a Rayleigh serving
    /// distance with scale `1/√(2πλ)`.
    pub fn mean_distance_power(&self, lambda: f64) -> f64 {
        libm::tgamma(self.alpha / 2.0 + 1.0) / (std::f64::consts::PI * lambda).powf(self.alpha / 2.0)
    }
}

/// Linear energy consumption model, all coefficients in J/symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareModel {
    /// Power amplifier efficiency in (0, 1].
    pub eta: f64,
    /// Static energy per BS.
    pub c0: f64,
    /// Circuit energy per active UE.
    pub c1: f64,
    /// Circuit energy per BS antenna.
    pub d0: f64,
    /// Signal-processing energy per antenna and UE.
    pub d1: f64,
}

impl Default for HardwareModel {
    /// η = 0.39, C0 = 10 W, C1 = 0.1 W, D0 = 0.2 W (all times the 50 ns
    /// symbol time) and D1 = 1.56e-10 J/symbol.
    fn default() -> Self {
        HardwareModel::from_watts(0.39, 10.0, 0.1, 0.2, 1.56e-10, REFERENCE_SYMBOL_TIME)
    }
}

impl HardwareModel {
    /// Builds a model from power figures in Watt, converting to J/symbol with
    /// `symbol_time`. `d1` is already an energy per symbol.
    pub fn from_watts(
        eta: f64,
        c0_watt: f64,
        c1_watt: f64,
        d0_watt: f64,
        d1: f64,
        symbol_time: f64,
    ) -> Self {
        HardwareModel {
            eta,
            c0: c0_watt * symbol_time,
            c1: c1_watt * symbol_time,
            d0: d0_watt * symbol_time,
            d1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::domain("eta", self.eta, "must lie in (0, 1]"));
        }
        for (name, v) in [("c0", self.c0), ("c1", self.c1), ("d0", self.d0), ("d1", self.d1)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(name, v, "must be finite and nonnegative"));
            }
        }
        if self.c0 + self.c1 + self.d0 + self.d1 <= 0.0 {
            return Err(Error::Degenerate(
                "all circuit coefficients are zero".to_string(),
            ));
        }
        Ok(())
    }

    /// Circuit energy of one cell: `C0 + C1 K + D0 M + D1 M K`.
    pub fn circuit_energy(&self, m: f64, k: f64) -> f64 {
        self.c0 + self.c1 * k + self.d0 * m + self.d1 * m * k
    }
}

/// One candidate network configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// BS density (BS/km²); `f64::INFINITY` selects the dense limit.
    pub lambda: f64,
    /// Antennas per BS.
    pub m: f64,
    /// UEs per cell.
    pub k: f64,
    /// Pilot reuse factor.
    pub beta: f64,
    /// Power-control coefficient (J/symbol); `f64::INFINITY` drops noise.
    pub rho: f64,
    /// SINR target.
    pub gamma: f64,
}

impl OperatingPoint {
    /// Noise-to-power ratio `σ²/ρ`; exactly zero when `rho` is infinite or
    /// the dense limit is selected.
    pub fn noise_ratio(&self, prop: &PropagationModel) -> f64 {
        if self.lambda.is_infinite() {
            0.0
        } else {
            prop.noise / self.rho
        }
    }

    pub fn is_asymptotic(&self) -> bool {
        self.lambda.is_infinite()
    }

    fn validate_link(&self) -> Result<()> {
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::domain("m", self.m, "antenna count must be positive"));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::domain("k", self.k, "UE count must be positive"));
        }
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return Err(Error::domain("beta", self.beta, "pilot reuse factor must be at least 1"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::domain("rho", self.rho, "power-control coefficient must be positive"));
        }
        Ok(())
    }

    fn validate_density(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::domain("lambda", self.lambda, "BS density must be positive"));
        }
        Ok(())
    }

    fn check_pilots_fit(&self, prop: &PropagationModel) -> Result<()> {
        if self.beta * self.k > prop.s() * (1.0 + 1e-12) {
            return Err(Error::infeasible(format!(
                "pilots exceed coherence block (beta*K = {} > S = {})",
                self.beta * self.k,
                prop.block_len
            )));
        }
        Ok(())
    }
}

/// Evaluated performance and consumption at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EEReport {
    pub sinr: f64,
    /// bit/symbol/user.
    pub se_per_ue: f64,
    /// bit/symbol/km², or bit/symbol per cell in the dense limit.
    pub ase: f64,
    /// J/symbol/km², or J/symbol per cell in the dense limit.
    pub aec: f64,
    /// bit/Joule.
    pub ee: f64,
    pub feasible: bool,
    /// Set when `ase` and `aec` are per-cell figures (dense limit).
    pub per_cell: bool,
}

/// Denominator of the average SINR bound, without validation.
pub(crate) fn sinr_denominator(m: f64, k: f64, beta: f64, noise_ratio: f64, alpha: f64) -> f64 {
    let x = noise_ratio;
    let a2 = alpha - 2.0;
    let a1 = alpha - 1.0;
    (k + x) * (1.0 + 2.0 / (beta * a2) + x)
        + (2.0 * k / a2) * (1.0 + x)
        + (k / beta) * (4.0 / (a2 * a2) + 1.0 / a1)
        + m / (beta * a1)
}

/// Average SINR lower bound with MMSE estimation and MRC.
pub fn sinr_lower_bound(pt: &OperatingPoint, prop: &PropagationModel) -> Result<f64> {
    prop.validate()?;
    pt.validate_link()?;
    let d = sinr_denominator(pt.m, pt.k, pt.beta, pt.noise_ratio(prop), prop.alpha);
    Ok(pt.m / d)
}

/// Pre-log factor times `log2(1 + sinr)`.
pub(crate) fn se_from_sinr(beta: f64, k: f64, s: f64, sinr: f64) -> f64 {
    (1.0 - beta * k / s) * (1.0 + sinr).log2()
}

/// Spectral efficiency lower bound per UE (bit/symbol/user).
pub fn se_lower_bound(pt: &OperatingPoint, prop: &PropagationModel) -> Result<f64> {
    let sinr = sinr_lower_bound(pt, prop)?;
    pt.check_pilots_fit(prop)?;
    Ok(se_from_sinr(pt.beta, pt.k, prop.s(), sinr))
}

/// Area spectral efficiency `λ K SE` (bit/symbol/km²). In the dense limit the
/// per-cell value `K SE` is returned.
pub fn area_spectral_efficiency(pt: &OperatingPoint, prop: &PropagationModel) -> Result<f64> {
    pt.validate_density()?;
    let se = se_lower_bound(pt, prop)?;
    let scale = if pt.is_asymptotic() { 1.0 } else { pt.lambda };
    Ok(scale * pt.k * se)
}

/// Mean transmit energy per symbol of a UE under statistical channel
/// inversion: `ρ ω Γ(α/2+1) / (πλ)^{α/2}`.
pub fn average_uplink_power(pt: &OperatingPoint, prop: &PropagationModel) -> Result<f64> {
    prop.validate()?;
    if !(pt.lambda > 0.0) || !pt.lambda.is_finite() {
        return Err(Error::domain("lambda", pt.lambda, "BS density must be positive and finite"));
    }
    if !(pt.rho >= 0.0) || !pt.rho.is_finite() {
        return Err(Error::domain("rho", pt.rho, "power-control coefficient must be finite and nonnegative"));
    }
    Ok(pt.rho * prop.omega * prop.mean_distance_power(pt.lambda))
}

/// Area energy consumption (J/symbol/km²), or J/symbol per cell in the dense
/// limit (where the radiated share vanishes).
pub fn area_energy_consumption(
    pt: &OperatingPoint,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<f64> {
    prop.validate()?;
    hw.validate()?;
    pt.validate_density()?;
    let circuit = hw.circuit_energy(pt.m, pt.k);
    if pt.is_asymptotic() {
        return Ok(circuit);
    }
    let s = prop.s();
    let radiated = if pt.rho == 0.0 {
        0.0
    } else {
        (s - pt.beta * pt.k + 1.0) / s * average_uplink_power(pt, prop)? / hw.eta * pt.k
    };
    Ok(pt.lambda * (radiated + circuit))
}

/// Assembles the full report. Feasibility means the SINR target is met and
/// the pilot constraints hold.
pub fn energy_efficiency(
    pt: &OperatingPoint,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<EEReport> {
    if !(pt.gamma > 0.0) {
        return Err(Error::domain("gamma", pt.gamma, "SINR target must be positive"));
    }
    let sinr = sinr_lower_bound(pt, prop)?;
    let se_per_ue = se_lower_bound(pt, prop)?;
    let ase = area_spectral_efficiency(pt, prop)?;
    let aec = area_energy_consumption(pt, prop, hw)?;
    if aec <= 0.0 {
        return Err(Error::Degenerate("area energy consumption is zero".into()));
    }
    let feasible = sinr >= pt.gamma * (1.0 - SINR_TARGET_RTOL)
        && pt.beta >= 1.0
        && pt.beta * pt.k <= prop.s();
    Ok(EEReport {
        sinr,
        se_per_ue,
        ase,
        aec,
        ee: ase / aec,
        feasible,
        per_cell: pt.is_asymptotic(),
    })
}

/// Dense-limit pilot coefficients `(B̄1, B̄2)`.
pub fn asymptotic_pilot_coefficients(m: f64, k: f64, alpha: f64) -> (f64, f64) {
    let a2 = alpha - 2.0;
    let a1 = alpha - 1.0;
    let b1 = k * (4.0 / (a2 * a2) + 1.0 / a1 + 2.0 / a2) + m / a1;
    let b2 = k * (1.0 + 2.0 / a2);
    (b1, b2)
}

/// Dense-limit EE objective without validation. `NEG_INFINITY` when the SINR
/// target cannot be reached; may be negative when the pilots overflow.
pub(crate) fn asymptotic_objective_raw(
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> f64 {
    let (b1, b2) = asymptotic_pilot_coefficients(m, k, prop.alpha);
    let margin = m - b2 * gamma;
    if !(margin > 0.0) {
        return f64::NEG_INFINITY;
    }
    let beta = b1 * gamma / margin;
    k * (1.0 - k / prop.s() * beta) * (1.0 + gamma).log2() / hw.circuit_energy(m, k)
}

/// EE in the dense limit with the pilot reuse factor set so that the SINR
/// target holds with equality (bit/Joule).
pub fn asymptotic_objective(
    m: f64,
    k: f64,
    gamma: f64,
    prop: &PropagationModel,
    hw: &HardwareModel,
) -> Result<f64> {
    prop.validate()?;
    hw.validate()?;
    if !(k > 0.0) {
        return Err(Error::domain("k", k, "UE count must be positive"));
    }
    if !(gamma > 0.0) {
        return Err(Error::domain("gamma", gamma, "SINR target must be positive"));
    }
    let (_, b2) = asymptotic_pilot_coefficients(m, k, prop.alpha);
    if m <= b2 * gamma {
        return Err(Error::infeasible(format!(
            "M = {m} does not exceed {:.4}: SINR target {gamma} unreachable at any pilot reuse",
            b2 * gamma
        )));
    }
    let v = asymptotic_objective_raw(m, k, gamma, prop, hw);
    if v < 0.0 {
        return Err(Error::infeasible(format!(
            "pilot reuse required at (M, K) = ({m}, {k}) exceeds the coherence block"
        )));
    }
    Ok(v)
}

/// Checks that a SINR target is usable.
pub fn validate_target(gamma: f64, _prop: &PropagationModel) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain("gamma", gamma, "SINR target must be positive and finite"));
    }
    Ok(())
}
