//! Run configuration: a sectioned `key = value` file with `#` comments.
//!
//! Every field is optional. Omitted propagation and hardware fields take the
//! reference values (path-loss exponent 3.76, 130 dB attenuation, 400-symbol
//! blocks, 50 ns symbols, η = 0.39, C0 = 10 W, C1 = 0.1 W, D0 = 0.2 W,
//! D1 = 1.56e-10 J/symbol) and are listed in [`RunConfig::defaulted`].
//!
//! ```toml
//! [propagation]
//! alpha = 3.76
//! omega_db = 130
//!
//! [hardware]
//! d0_watt = 0.2
//!
//! [scenario]
//! gamma = 3
//! lambda = inf      # dense limit
//! m = 89
//! k = 10
//!
//! [sweep]
//! axis = "lambda"
//! lambda_values = [0.1, 1, 10, 100]
//!
//! [simulation]
//! realizations = 100000
//! seed = 42
//!
//! [output]
//! csv = "out.csv"
//! precision = 6
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{HardwareModel, PropagationModel, REFERENCE_SYMBOL_TIME};
use crate::optimizer::{SearchLimits, DEFAULT_M_MAX};
use crate::simulator::{Geometry, McConfig, DEFAULT_SIGNAL_BUDGET};

/// Seed used when the simulation section gives none.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    propagation: Option<RawPropagation>,
    hardware: Option<RawHardware>,
    scenario: Option<RawScenario>,
    sweep: Option<RawSweep>,
    simulation: Option<RawSimulation>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    alpha: Option<f64>,
    omega_db: Option<f64>,
    noise: Option<f64>,
    block_len: Option<u32>,
    symbol_time: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHardware {
    eta: Option<f64>,
    c0_watt: Option<f64>,
    c1_watt: Option<f64>,
    d0_watt: Option<f64>,
    d1_joule_per_symbol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    gamma: Option<f64>,
    lambda: Option<f64>,
    mu: Option<f64>,
    m: Option<u32>,
    k: Option<u32>,
    beta: Option<f64>,
    rho: Option<f64>,
    m_max: Option<u32>,
    k_max: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<String>,
    lambda_values: Option<Vec<f64>>,
    mu_values: Option<Vec<f64>>,
    gamma_values: Option<Vec<f64>>,
    m_values: Option<Vec<u32>>,
    k_values: Option<Vec<u32>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    realizations: Option<usize>,
    seed: Option<u64>,
    window_radius: Option<f64>,
    geometry: Option<String>,
    signal_budget: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<PathBuf>,
    precision: Option<usize>,
}

/// What a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// BS density, with `(M, K, β, ρ)` optimized at every point.
    Lambda,
    /// UE density `μ = K λ`, plus the fixed `(10, 1)` and `(89, 10)` curves.
    Mu,
    /// Dense-limit EE over an `(M, K)` grid.
    MkSurface,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "mu" => Ok(SweepAxis::Mu),
            "mk_surface" => Ok(SweepAxis::MkSurface),
            _ => Err(Error::Config(format!(
                "unknown sweep axis `{s}` (expected lambda, mu or mk_surface)"
            ))),
        }
    }
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Mu => "mu",
            SweepAxis::MkSurface => "mk_surface",
        }
    }
}

/// The operating point or search a command acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub gamma: f64,
    /// `f64::INFINITY` selects the dense limit.
    pub lambda: f64,
    /// When set, `optimize` works at this UE density.
    pub mu: Option<f64>,
    pub m: u32,
    pub k: u32,
    /// Pilot reuse; the target-meeting value when `None`.
    pub beta: Option<f64>,
    /// Power-control coefficient; optimized when `None` at finite density.
    pub rho: Option<f64>,
    pub limits: SearchLimits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub axis: Option<SweepAxis>,
    pub lambda_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    /// Targets to sweep; the scenario target when empty.
    pub gamma_values: Vec<f64>,
    pub m_values: Vec<u32>,
    pub k_values: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSettings {
    pub realizations: usize,
    pub seed: u64,
    pub seed_defaulted: bool,
    pub window_radius: Option<f64>,
    pub geometry: Geometry,
    pub signal_budget: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub csv: Option<PathBuf>,
    /// Significant digits in CSV output.
    pub precision: usize,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub prop: PropagationModel,
    pub hw: HardwareModel,
    pub symbol_time: f64,
    pub scenario: Scenario,
    pub sweep: SweepSettings,
    pub simulation: SimulationSettings,
    pub output: OutputSettings,
    /// Propagation and hardware fields that took their reference value.
    pub defaulted: Vec<&'static str>,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty config resolves")
    }
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|i| {
            let v = lo * 10f64.powf(i as f64 / per_decade as f64);
            // snap to 3 significant digits so grids print cleanly
            let mag = 10f64.powi(v.log10().floor() as i32 - 2);
            (v / mag).round() * mag
        })
        .collect()
}

/// 1-based line of `key` inside `[section]`, for diagnostics.
fn line_of(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn located(text: &str, section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    match line_of(text, section, key) {
        Some(line) => Error::Config(format!("line {line}: {section}.{key}: {msg}")),
        None => Error::Config(format!("{section}.{key}: {msg}")),
    }
}

/// Parses and resolves a configuration from text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut defaulted = Vec::new();
    let mut pick = |v: Option<f64>, name: &'static str, default: f64| {
        v.unwrap_or_else(|| {
            defaulted.push(name);
            default
        })
    };

    let p = raw.propagation.unwrap_or_default();
    let reference = PropagationModel::default();
    let alpha = pick(p.alpha, "propagation.alpha", reference.alpha);
    let omega_db = pick(p.omega_db, "propagation.omega_db", 10.0 * reference.omega.log10());
    let noise = pick(p.noise, "propagation.noise", reference.noise);
    let symbol_time = pick(p.symbol_time, "propagation.symbol_time", REFERENCE_SYMBOL_TIME);
    let block_len = match p.block_len {
        Some(b) => b,
        None => {
            defaulted.push("propagation.block_len");
            reference.block_len
        }
    };
    let mut pick = |v: Option<f64>, name: &'static str, default: f64| {
        v.unwrap_or_else(|| {
            defaulted.push(name);
            default
        })
    };
    let h = raw.hardware.unwrap_or_default();
    let eta = pick(h.eta, "hardware.eta", 0.39);
    let c0 = pick(h.c0_watt, "hardware.c0_watt", 10.0);
    let c1 = pick(h.c1_watt, "hardware.c1_watt", 0.1);
    let d0 = pick(h.d0_watt, "hardware.d0_watt", 0.2);
    let d1 = pick(h.d1_joule_per_symbol, "hardware.d1_joule_per_symbol", 1.56e-10);

    let prop = PropagationModel {
        alpha,
        omega: 10f64.powf(omega_db / 10.0),
        noise,
        block_len,
    };
    if let Err(e) = prop.validate() {
        let key = match &e {
            Error::Domain { name, .. } => *name,
            _ => "alpha",
        };
        return Err(located(text, "propagation", key, e));
    }
    if !(symbol_time > 0.0) || !symbol_time.is_finite() {
        return Err(located(text, "propagation", "symbol_time", "must be positive"));
    }
    let hw = HardwareModel::from_watts(eta, c0, c1, d0, d1, symbol_time);
    if let Err(e) = hw.validate() {
        let key = match &e {
            Error::Domain { name: "eta", .. } => "eta",
            Error::Domain { name, .. } => match *name {
                "c0" => "c0_watt",
                "c1" => "c1_watt",
                "d0" => "d0_watt",
                _ => "d1_joule_per_symbol",
            },
            _ => "c0_watt",
        };
        return Err(located(text, "hardware", key, e));
    }

    let s = raw.scenario.unwrap_or_default();
    let gamma = s.gamma.unwrap_or(3.0);
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(located(text, "scenario", "gamma", "must be positive and finite"));
    }
    let lambda = s.lambda.unwrap_or(f64::INFINITY);
    if !(lambda > 0.0) {
        return Err(located(text, "scenario", "lambda", "must be positive (inf for the dense limit)"));
    }
    if let Some(mu) = s.mu {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(located(text, "scenario", "mu", "must be positive and finite"));
        }
    }
    let scenario = Scenario {
        gamma,
        lambda,
        mu: s.mu,
        m: s.m.unwrap_or(89),
        k: s.k.unwrap_or(10),
        beta: s.beta,
        rho: s.rho,
        limits: SearchLimits {
            m_max: s.m_max.unwrap_or(DEFAULT_M_MAX),
            k_max: s.k_max,
        },
    };
    if scenario.m == 0 {
        return Err(located(text, "scenario", "m", "must be positive"));
    }
    if scenario.k == 0 {
        return Err(located(text, "scenario", "k", "must be positive"));
    }

    let w = raw.sweep.unwrap_or_default();
    let axis = match w.axis {
        Some(a) => Some(a.parse().map_err(|e| located(text, "sweep", "axis", e))?),
        None => None,
    };
    let sweep = SweepSettings {
        axis,
        lambda_values: w.lambda_values.unwrap_or_else(|| log_grid(0.1, 100.0, 4)),
        mu_values: w.mu_values.unwrap_or_else(|| log_grid(100.0, 1e5, 4)),
        gamma_values: w.gamma_values.unwrap_or_default(),
        m_values: w.m_values.unwrap_or_else(|| (10..=200).collect()),
        k_values: w.k_values.unwrap_or_else(|| (1..=20).collect()),
    };

    let m = raw.simulation.unwrap_or_default();
    let geometry = match m.geometry {
        Some(g) => g.parse().map_err(|e| located(text, "simulation", "geometry", e))?,
        None => Geometry::default(),
    };
    let simulation = SimulationSettings {
        realizations: m.realizations.unwrap_or(100_000),
        seed: m.seed.unwrap_or(DEFAULT_SEED),
        seed_defaulted: m.seed.is_none(),
        window_radius: m.window_radius,
        geometry,
        signal_budget: m.signal_budget.unwrap_or(DEFAULT_SIGNAL_BUDGET),
    };

    let o = raw.output.unwrap_or_default();
    let output = OutputSettings {
        csv: o.csv,
        precision: o.precision.unwrap_or(6).clamp(1, 17),
    };

    Ok(RunConfig {
        prop,
        hw,
        symbol_time,
        scenario,
        sweep,
        simulation,
        output,
        defaulted,
    })
}

/// Reads and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl RunConfig {
    /// Monte Carlo settings for the scenario's operating point. Uses the
    /// scenario reuse factor, or 7.24 when none is set, and `ρ = 1e-19` when
    /// the scenario leaves it open. The dense limit maps to `λ = 10`.
    pub fn mc_config(&self) -> McConfig {
        let base = McConfig::default();
        McConfig {
            realization_count: self.simulation.realizations,
            window_radius: self.simulation.window_radius,
            seed: self.simulation.seed,
            lambda: if self.scenario.lambda.is_finite() {
                self.scenario.lambda
            } else {
                base.lambda
            },
            m: self.scenario.m,
            k: self.scenario.k,
            beta: self.scenario.beta.unwrap_or(base.beta),
            rho: self.scenario.rho.unwrap_or(base.rho),
            geometry: self.simulation.geometry,
            signal_budget: self.simulation.signal_budget,
        }
    }
}
