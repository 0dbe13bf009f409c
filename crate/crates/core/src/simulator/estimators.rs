//! Monte Carlo estimators and the closed-form checks built on them.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::geometry::{sample_geometry, GeometryRealization};
use super::stats::{ks_critical_1pct, ks_statistic, MeanEstimate};
use super::{
    interference_tail, squared_interference_tail, truncation_share, McConfig,
    MIN_CONCLUSIVE_REALIZATIONS, TRUNCATION_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::model::{
    average_uplink_power, se_from_sinr, se_lower_bound, OperatingPoint, PropagationModel,
};

/// Per-realization reductions of one snapshot.
#[derive(Debug, Clone, Copy)]
struct Snapshot {
    serving_distance: f64,
    /// Mean `d^α` over interfering UEs of non-edge cells, if any.
    mean_distance_power: Option<f64>,
    /// `Σ χ r^α` over pilot-sharing UEs.
    shared: f64,
    /// `Σ r^α` over all interfering UEs.
    all: f64,
    /// `Σ χ r^{2α}` over pilot-sharing UEs.
    shared_sq: f64,
}

fn reduce(g: &GeometryRealization, alpha: f64) -> Snapshot {
    let mut shared = 0.0;
    let mut all = 0.0;
    let mut shared_sq = 0.0;
    let mut dpow = 0.0;
    let mut dcount = 0usize;
    for (j, cell) in g.cells.iter().enumerate() {
        let ues = g.cell_ues(j);
        for (i, ue) in ues.iter().enumerate() {
            let r = ue.interference_ratio(alpha);
            all += r;
            if i == 0 && cell.shares_pilot {
                shared += r;
                shared_sq += r * r;
            }
            if !cell.edge {
                dpow += ue.own_distance.powf(alpha);
                dcount += 1;
            }
        }
    }
    Snapshot {
        serving_distance: g.serving_distance,
        mean_distance_power: (dcount > 0).then(|| dpow / dcount as f64),
        shared,
        all,
        shared_sq,
    }
}

fn snapshots(cfg: &McConfig, prop: &PropagationModel) -> Result<Vec<Snapshot>> {
    cfg.validate(prop)?;
    (0..cfg.realization_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.geometry_rng(i);
            sample_geometry(cfg, prop, &mut rng).map(|g| reduce(&g, prop.alpha))
        })
        .collect()
}

/// Expected interference mass outside the window, per term.
#[derive(Debug, Clone, Copy)]
struct Tails {
    shared: f64,
    all: f64,
    shared_sq: f64,
}

impl Tails {
    fn new(cfg: &McConfig, prop: &PropagationModel) -> Self {
        let r = cfg.window(prop);
        let t1 = interference_tail(r, cfg.lambda, prop);
        let t2 = squared_interference_tail(r, cfg.lambda, prop);
        Tails {
            shared: t1 / cfg.beta,
            all: cfg.k as f64 * t1,
            shared_sq: t2 / cfg.beta,
        }
    }
}

/// Empirical mean transmit energy per symbol against its closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub estimate: MeanEstimate,
    pub closed_form: f64,
}

impl PowerEstimate {
    pub fn relative_error(&self) -> f64 {
        (self.estimate.mean - self.closed_form).abs() / self.closed_form
    }
}

fn power_from(cfg: &McConfig, prop: &PropagationModel, snaps: &[Snapshot]) -> Result<PowerEstimate> {
    let pt = OperatingPoint {
        lambda: cfg.lambda,
        m: cfg.m as f64,
        k: cfg.k as f64,
        beta: cfg.beta,
        rho: cfg.rho,
        gamma: 1.0,
    };
    let closed_form = average_uplink_power(&pt, prop)?;
    let scale = cfg.rho * prop.omega;
    let samples: Vec<f64> = snaps
        .iter()
        .filter_map(|s| s.mean_distance_power.map(|d| scale * d))
        .collect();
    Ok(PowerEstimate {
        estimate: MeanEstimate::from_samples(&samples),
        closed_form,
    })
}

/// Mean `ρ ω d^α` over interfering UEs. Requires finite `rho`.
pub fn estimate_average_power(cfg: &McConfig, prop: &PropagationModel) -> Result<PowerEstimate> {
    power_from(cfg, prop, &snapshots(cfg, prop)?)
}

/// One SINR-denominator term: Monte Carlo mean of the windowed sum, the
/// analytic mass beyond the window, and the unwindowed closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEstimate {
    pub estimate: MeanEstimate,
    pub tail: f64,
    pub closed_form: f64,
}

impl TermEstimate {
    /// Windowed estimate plus the analytic tail.
    pub fn corrected(&self) -> f64 {
        self.estimate.mean + self.tail
    }

    pub fn z_score(&self) -> f64 {
        (self.corrected() - self.closed_form).abs() / self.estimate.std_error
    }
}

/// Estimates of `E Σ χ r^α = 2/(β(α−2))`, `E Σ Σ r^α = 2K/(α−2)` and
/// `E Σ χ r^{2α} = 1/(β(α−1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEstimates {
    pub pilot_contamination: TermEstimate,
    pub interference: TermEstimate,
    pub coherent: TermEstimate,
}

fn terms_from(cfg: &McConfig, prop: &PropagationModel, snaps: &[Snapshot]) -> TermEstimates {
    let tails = Tails::new(cfg, prop);
    let col = |f: fn(&Snapshot) -> f64| snaps.iter().map(f).collect::<Vec<_>>();
    let k = cfg.k as f64;
    TermEstimates {
        pilot_contamination: TermEstimate {
            estimate: MeanEstimate::from_samples(&col(|s| s.shared)),
            tail: tails.shared,
            closed_form: prop.interference_ratio_mean() / cfg.beta,
        },
        interference: TermEstimate {
            estimate: MeanEstimate::from_samples(&col(|s| s.all)),
            tail: tails.all,
            closed_form: k * prop.interference_ratio_mean(),
        },
        coherent: TermEstimate {
            estimate: MeanEstimate::from_samples(&col(|s| s.shared_sq)),
            tail: tails.shared_sq,
            closed_form: prop.squared_ratio_mean() / cfg.beta,
        },
    }
}

pub fn estimate_sinr_denominator_terms(
    cfg: &McConfig,
    prop: &PropagationModel,
) -> Result<TermEstimates> {
    Ok(terms_from(cfg, prop, &snapshots(cfg, prop)?))
}

/// Spectral efficiency averaged over realized geometries, next to the
/// closed-form bound evaluated at averaged interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalSe {
    pub estimate: MeanEstimate,
    pub closed_form: f64,
}

impl EmpiricalSe {
    /// `(empirical − closed form) / closed form`.
    pub fn relative_gap(&self) -> f64 {
        (self.estimate.mean - self.closed_form) / self.closed_form
    }
}

fn empirical_se_from(
    cfg: &McConfig,
    prop: &PropagationModel,
    snaps: &[Snapshot],
) -> Result<EmpiricalSe> {
    let pt = OperatingPoint {
        lambda: cfg.lambda,
        m: cfg.m as f64,
        k: cfg.k as f64,
        beta: cfg.beta,
        rho: cfg.rho,
        gamma: 1.0,
    };
    let closed_form = se_lower_bound(&pt, prop)?;
    let tails = Tails::new(cfg, prop);
    let x = cfg.noise_ratio(prop);
    let m = cfg.m as f64;
    let k = cfg.k as f64;
    let samples: Vec<f64> = snaps
        .iter()
        .map(|s| {
            let a = s.shared + tails.shared;
            let b = s.all + tails.all;
            let c = s.shared_sq + tails.shared_sq;
            let den = (k + x) * (1.0 + a + x)
                + b * (1.0 + x)
                + k * cfg.beta * (a * a - c)
                + k * c
                + m * c;
            se_from_sinr(cfg.beta, k, prop.s(), m / den)
        })
        .collect();
    Ok(EmpiricalSe {
        estimate: MeanEstimate::from_samples(&samples),
        closed_form,
    })
}

/// Mean over realizations of the SE with the interference terms fixed at
/// their realized values.
pub fn simulate_empirical_se(cfg: &McConfig, prop: &PropagationModel) -> Result<EmpiricalSe> {
    empirical_se_from(cfg, prop, &snapshots(cfg, prop)?)
}

/// Antenna-level checks of MMSE estimation and channel inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalLevelEstimate {
    pub realizations: usize,
    /// Empirical estimation-error variance over its closed form; target 1.
    pub error_variance_ratio: MeanEstimate,
    /// Normalized correlation between estimate and error; target 0.
    pub orthogonality: MeanEstimate,
    /// `p ‖h‖² / (M ρ)` for the typical UE; target 1.
    pub received_power_ratio: MeanEstimate,
}

fn complex_normal<R: Rng>(rng: &mut R, var: f64) -> (f64, f64) {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (s * re, s * im)
}

/// Draws fading for the typical link, one aggregate pilot-contamination
/// vector per realization and receiver noise, then forms the MMSE estimate.
///
/// Channels are expressed after power control: `g = √(ω d^α) h ~ CN(0, I)`,
/// received pilot `g + c + n` with `c ~ CN(0, A I)`, `n ~ CN(0, σ²/ρ I)` and
/// `A` the realized pilot-contamination sum.
pub fn simulate_signal_level(
    cfg: &McConfig,
    prop: &PropagationModel,
) -> Result<SignalLevelEstimate> {
    cfg.validate(prop)?;
    let m = cfg.m as usize;
    let budget = (cfg.signal_budget / cfg.m as u64) as usize;
    let n = cfg.realization_count.min(budget);
    if n == 0 {
        return Err(Error::Simulation(format!(
            "signal budget {} is below one realization of M = {}",
            cfg.signal_budget, cfg.m
        )));
    }
    let x = cfg.noise_ratio(prop);
    let rows: Vec<(Option<f64>, Option<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut grng = cfg.geometry_rng(i);
            let contamination = reduce(&sample_geometry(cfg, prop, &mut grng)?, prop.alpha).shared;
            let mut rng = cfg.fading_rng(i);
            let shrink = 1.0 / (1.0 + contamination + x);
            let err_var = (contamination + x) * shrink;
            let (mut err2, mut est2, mut cross, mut gain) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..m {
                let g = complex_normal(&mut rng, 1.0);
                let c = complex_normal(&mut rng, contamination);
                let w = complex_normal(&mut rng, x);
                let est = (shrink * (g.0 + c.0 + w.0), shrink * (g.1 + c.1 + w.1));
                let e = (g.0 - est.0, g.1 - est.1);
                err2 += e.0 * e.0 + e.1 * e.1;
                est2 += est.0 * est.0 + est.1 * est.1;
                cross += est.0 * e.0 + est.1 * e.1;
                gain += g.0 * g.0 + g.1 * g.1;
            }
            let mf = m as f64;
            let ratio = (err_var > 0.0).then(|| err2 / mf / err_var);
            let corr = (err2 > 0.0 && est2 > 0.0).then(|| cross / (err2 * est2).sqrt());
            Ok((ratio, corr, gain / mf))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.0).collect();
    let corrs: Vec<f64> = rows.iter().filter_map(|r| r.1).collect();
    let gains: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(SignalLevelEstimate {
        realizations: n,
        error_variance_ratio: MeanEstimate::from_samples(&ratios),
        orthogonality: MeanEstimate::from_samples(&corrs),
        received_power_ratio: MeanEstimate::from_samples(&gains),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
        }
    }
}

/// One line of a validation report. `tolerance` is the allowed
/// `|estimate − reference|`, or the critical value for the KS check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub estimate: f64,
    pub reference: f64,
    pub std_error: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub realizations: usize,
    pub window_radius: f64,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }
}

fn judged(conclusive: bool, ok: bool) -> CheckStatus {
    match (conclusive, ok) {
        (false, _) => CheckStatus::Inconclusive,
        (true, true) => CheckStatus::Pass,
        (true, false) => CheckStatus::Fail,
    }
}

fn within_3se(name: &'static str, est: MeanEstimate, shift: f64, reference: f64) -> CheckOutcome {
    let tolerance = 3.0 * est.std_error;
    let estimate = est.mean + shift;
    CheckOutcome {
        name,
        estimate,
        reference,
        std_error: est.std_error,
        tolerance,
        status: judged(
            est.count >= MIN_CONCLUSIVE_REALIZATIONS,
            (estimate - reference).abs() <= tolerance,
        ),
    }
}

/// Runs every check: window truncation, serving-distance law, mean power,
/// the three interference terms, the Jensen ordering of the SE, and the
/// antenna-level MMSE properties.
pub fn validate(cfg: &McConfig, prop: &PropagationModel) -> Result<ValidationReport> {
    let snaps = snapshots(cfg, prop)?;
    let n = snaps.len();
    let conclusive = n >= MIN_CONCLUSIVE_REALIZATIONS;
    let window = cfg.window(prop);
    let mut checks = Vec::new();

    let share = truncation_share(window, cfg.lambda, prop);
    checks.push(CheckOutcome {
        name: "window_truncation",
        estimate: share,
        reference: 0.0,
        std_error: 0.0,
        tolerance: TRUNCATION_TOLERANCE,
        status: judged(true, share <= TRUNCATION_TOLERANCE * (1.0 + 1e-9)),
    });

    let sigma2 = 1.0 / (2.0 * std::f64::consts::PI * cfg.lambda);
    let distances: Vec<f64> = snaps.iter().map(|s| s.serving_distance).collect();
    let d = ks_statistic(&distances, |r| 1.0 - (-r * r / (2.0 * sigma2)).exp());
    let crit = ks_critical_1pct(n);
    checks.push(CheckOutcome {
        name: "serving_distance_ks",
        estimate: d,
        reference: 0.0,
        std_error: 0.0,
        tolerance: crit,
        status: judged(conclusive, d < crit),
    });

    if cfg.rho.is_finite() {
        let p = power_from(cfg, prop, &snaps)?;
        checks.push(within_3se("average_power", p.estimate, 0.0, p.closed_form));
    }

    let t = terms_from(cfg, prop, &snaps);
    for (name, term) in [
        ("pilot_contamination_term", t.pilot_contamination),
        ("interference_term", t.interference),
        ("coherent_interference_term", t.coherent),
    ] {
        checks.push(within_3se(name, term.estimate, term.tail, term.closed_form));
    }

    let se = empirical_se_from(cfg, prop, &snaps)?;
    checks.push(CheckOutcome {
        name: "empirical_se_jensen",
        estimate: se.estimate.mean,
        reference: se.closed_form,
        std_error: se.estimate.std_error,
        tolerance: 0.1 * se.closed_form,
        status: judged(
            conclusive,
            se.estimate.mean >= se.closed_form && se.relative_gap() <= 0.1,
        ),
    });

    let sig = simulate_signal_level(cfg, prop)?;
    checks.push(within_3se("estimation_error_variance", sig.error_variance_ratio, 0.0, 1.0));
    checks.push(within_3se("estimate_error_orthogonality", sig.orthogonality, 0.0, 0.0));
    checks.push(within_3se("received_power", sig.received_power_ratio, 0.0, 1.0));

    Ok(ValidationReport {
        realizations: n,
        window_radius: window,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Geometry;

    fn small(count: usize) -> McConfig {
        McConfig {
            realization_count: count,
            ..McConfig::default()
        }
    }

    #[test]
    fn terms_match_closed_forms() {
        let prop = PropagationModel::default();
        let t = estimate_sinr_denominator_terms(&small(4000), &prop).unwrap();
        for term in [t.pilot_contamination, t.interference, t.coherent] {
            assert!(term.z_score() < 4.0, "{term:?}");
        }
    }

    #[test]
    fn power_matches_closed_form() {
        let prop = PropagationModel::default();
        let p = estimate_average_power(&small(2000), &prop).unwrap();
        assert!(p.relative_error() < 0.01, "{p:?}");
    }

    #[test]
    fn empirical_se_exceeds_bound() {
        let prop = PropagationModel::default();
        let se = simulate_empirical_se(&small(3000), &prop).unwrap();
        assert!(se.relative_gap() >= 0.0 && se.relative_gap() < 0.1, "{se:?}");
    }

    #[test]
    fn signal_level_properties() {
        let prop = PropagationModel::default();
        let s = simulate_signal_level(&small(3000), &prop).unwrap();
        assert!((s.error_variance_ratio.mean - 1.0).abs() < 4.0 * s.error_variance_ratio.std_error);
        assert!(s.orthogonality.mean.abs() < 4.0 * s.orthogonality.std_error);
        assert!((s.received_power_ratio.mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn signal_budget_caps_realizations() {
        let prop = PropagationModel::default();
        let cfg = McConfig {
            signal_budget: 89 * 50,
            ..small(200)
        };
        assert_eq!(simulate_signal_level(&cfg, &prop).unwrap().realizations, 50);
    }

    #[test]
    fn small_runs_are_inconclusive() {
        let prop = PropagationModel::default();
        let r = validate(&small(100), &prop).unwrap();
        assert!(r
            .checks
            .iter()
            .filter(|c| c.name != "window_truncation")
            .all(|c| c.status == CheckStatus::Inconclusive));
    }

    #[test]
    fn shrunken_window_fails_truncation() {
        let prop = PropagationModel::default();
        let cfg = McConfig {
            window_radius: Some(0.5),
            ..small(50)
        };
        let r = validate(&cfg, &prop).unwrap();
        assert_eq!(r.checks[0].status, CheckStatus::Fail);
    }

    #[test]
    fn ue_centric_void_geometry_runs() {
        let prop = PropagationModel::default();
        let cfg = McConfig {
            geometry: Geometry::UeCentric,
            window_radius: Some(1.0),
            ..small(20)
        };
        let t = estimate_sinr_denominator_terms(&cfg, &prop).unwrap();
        assert!(t.interference.estimate.mean > 0.0);
    }
}
