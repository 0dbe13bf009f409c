//! Seeded Monte Carlo validation of the closed-form model.
//!
//! Each realization draws one network snapshot around a typical UE that uses
//! pilot `k` in cell 0. Realization `i` owns its own counter-based random
//! substreams, so results depend only on the seed and the realization count,
//! not on the number of worker threads.

mod estimators;
mod geometry;
pub mod stats;

pub use estimators::{
    estimate_average_power, estimate_sinr_denominator_terms, simulate_empirical_se,
    simulate_signal_level, validate, CheckOutcome, CheckStatus, EmpiricalSe, PowerEstimate,
    SignalLevelEstimate, TermEstimate, TermEstimates, ValidationReport,
};
pub use geometry::{sample_geometry, CellSample, GeometryRealization, UeSample};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::PropagationModel;

/// Below this many realizations statistical checks are reported as
/// inconclusive rather than pass or fail.
pub const MIN_CONCLUSIVE_REALIZATIONS: usize = 1000;
/// Relative share of term (a) allowed to lie outside the simulation window.
pub const TRUNCATION_TOLERANCE: f64 = 0.01;
/// Cap on rejection-sampling attempts when placing a UE in a Voronoi cell.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 1000;
/// Default cap on `M × realizations` for the antenna-level simulation.
pub const DEFAULT_SIGNAL_BUDGET: u64 = 100_000_000;

/// How the interfering network is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    /// Interfering BSs form a PPP around the typical UE's serving BS, and every
    /// UE sits at a Rayleigh distance from its own BS in a uniform direction.
    /// A UE closer to BS 0 than to its own BS contributes no interference.
    #[default]
    BsCentric,
    /// The typical UE is at the origin with a BS-free disk of radius equal to
    /// its serving distance. UEs are placed uniformly in their Voronoi cells
    /// by rejection sampling.
    UeCentric,
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bs_centric" | "bs-centric" => Ok(Geometry::BsCentric),
            "ue_centric" | "ue-centric" => Ok(Geometry::UeCentric),
            _ => Err(Error::Simulation(format!("unknown geometry `{s}`"))),
        }
    }
}

/// Monte Carlo parameters. The operating point is `(lambda, m, k, beta, rho)`;
/// `rho = ∞` switches noise off.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub realization_count: usize,
    /// Radius of the simulation window in km. `None` picks the smallest window
    /// whose missing share of term (a) is [`TRUNCATION_TOLERANCE`].
    pub window_radius: Option<f64>,
    pub seed: u64,
    pub lambda: f64,
    pub m: u32,
    pub k: u32,
    pub beta: f64,
    pub rho: f64,
    pub geometry: Geometry,
    /// Cap on `M × realizations` for [`simulate_signal_level`].
    pub signal_budget: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            realization_count: 100_000,
            window_radius: None,
            seed: 1,
            lambda: 10.0,
            m: 89,
            k: 10,
            beta: 7.24,
            rho: 1e-19,
            geometry: Geometry::BsCentric,
            signal_budget: DEFAULT_SIGNAL_BUDGET,
        }
    }
}

impl McConfig {
    pub fn validate(&self, prop: &PropagationModel) -> Result<()> {
        prop.validate()?;
        if self.realization_count == 0 {
            return Err(Error::Simulation("realization_count must be positive".into()));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::domain("lambda", self.lambda, "must be finite and positive"));
        }
        if self.m == 0 || self.k == 0 {
            return Err(Error::Simulation("M and K must be positive".into()));
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(Error::domain("beta", self.beta, "must be finite and at least 1"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::domain("rho", self.rho, "must be positive"));
        }
        if let Some(r) = self.window_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::domain("window_radius", r, "must be finite and positive"));
            }
        }
        Ok(())
    }

    /// Pilot-sharing probability `1/β`.
    pub fn share_probability(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn noise_ratio(&self, prop: &PropagationModel) -> f64 {
        if self.rho.is_infinite() {
            0.0
        } else {
            prop.noise / self.rho
        }
    }

    /// The configured window, or the default one for this density.
    pub fn window(&self, prop: &PropagationModel) -> f64 {
        self.window_radius
            .unwrap_or_else(|| default_window_radius(self.lambda, prop))
    }

    pub(crate) fn geometry_rng(&self, index: usize) -> ChaCha8Rng {
        substream(self.seed, 2 * index as u64)
    }

    pub(crate) fn fading_rng(&self, index: usize) -> ChaCha8Rng {
        substream(self.seed, 2 * index as u64 + 1)
    }
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Expected `Σ (d_own/d_0)^α` from BSs beyond radius `r`, before pilot thinning.
pub fn interference_tail(r: f64, lambda: f64, prop: &PropagationModel) -> f64 {
    let a = prop.alpha;
    2.0 * std::f64::consts::PI * lambda * prop.mean_distance_power(lambda) * r.powf(2.0 - a)
        / (a - 2.0)
}

/// Expected `Σ (d_own/d_0)^{2α}` from BSs beyond radius `r`.
pub fn squared_interference_tail(r: f64, lambda: f64, prop: &PropagationModel) -> f64 {
    let a = prop.alpha;
    let mean_sq = libm::tgamma(a + 1.0) / (std::f64::consts::PI * lambda).powf(a);
    2.0 * std::f64::consts::PI * lambda * mean_sq * r.powf(2.0 - 2.0 * a) / (2.0 * a - 2.0)
}

/// Share of term (a) lying outside a window of radius `r`.
pub fn truncation_share(r: f64, lambda: f64, prop: &PropagationModel) -> f64 {
    interference_tail(r, lambda, prop) / prop.interference_ratio_mean()
}

/// Smallest window whose truncation share equals [`TRUNCATION_TOLERANCE`].
pub fn default_window_radius(lambda: f64, prop: &PropagationModel) -> f64 {
    let a = prop.alpha;
    let scale = std::f64::consts::PI * lambda * prop.mean_distance_power(lambda);
    (TRUNCATION_TOLERANCE / scale).powf(1.0 / (2.0 - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window_hits_tolerance() {
        let prop = PropagationModel::default();
        for lambda in [0.1, 1.0, 10.0, 100.0] {
            let r = default_window_radius(lambda, &prop);
            let share = truncation_share(r, lambda, &prop);
            assert!((share - TRUNCATION_TOLERANCE).abs() < 1e-12, "{lambda}: {share}");
        }
        let r = default_window_radius(10.0, &prop);
        assert!((3.0..4.0).contains(&r), "{r}");
    }

    #[test]
    fn window_holds_a_fixed_expected_bs_count() {
        let prop = PropagationModel::default();
        let count = |l: f64| std::f64::consts::PI * l * default_window_radius(l, &prop).powi(2);
        assert!((count(1.0) / count(100.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        use rand::Rng;
        let cfg = McConfig::default();
        let a: u64 = cfg.geometry_rng(3).random();
        let b: u64 = cfg.geometry_rng(3).random();
        let c: u64 = cfg.fading_rng(3).random();
        let d: u64 = cfg.geometry_rng(4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn config_validation() {
        let prop = PropagationModel::default();
        assert!(McConfig::default().validate(&prop).is_ok());
        let bad = McConfig { beta: 0.5, ..McConfig::default() };
        assert!(bad.validate(&prop).is_err());
        let bad = McConfig { realization_count: 0, ..McConfig::default() };
        assert!(bad.validate(&prop).is_err());
        assert_eq!("ue_centric".parse::<Geometry>().unwrap(), Geometry::UeCentric);
        assert!("x".parse::<Geometry>().is_err());
    }
}
