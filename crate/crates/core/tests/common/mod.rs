#![allow(dead_code)]

use dense_ee::{HardwareModel, PropagationModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense-limit EE objective, independent of the library: returns the value
/// and the pilot reuse factor, or `None` when the target is unreachable.
pub fn objective(m: f64, k: f64, gamma: f64, prop: &PropagationModel, hw: &HardwareModel) -> Option<(f64, f64)> {
    let a = prop.alpha;
    let b1 = k * (4.0 / (a - 2.0).powi(2) + 1.0 / (a - 1.0) + 2.0 / (a - 2.0)) + m / (a - 1.0);
    let b2 = k * (1.0 + 2.0 / (a - 2.0));
    if m <= b2 * gamma {
        return None;
    }
    let beta = b1 * gamma / (m - b2 * gamma);
    let load = 1.0 - k / prop.s() * beta;
    let circuit = hw.c0 + hw.c1 * k + hw.d0 * m + hw.d1 * m * k;
    Some((k * load * (1.0 + gamma).log2() / circuit, beta))
}

/// Argmax over a log grid, then a linear grid around the best cell.
pub fn grid_argmax<F: Fn(f64) -> Option<f64>>(f: F, lo: f64, hi: f64) -> f64 {
    const N: usize = 4000;
    let pick = |xs: Vec<f64>| {
        xs.into_iter()
            .filter_map(|x| f(x).map(|v| (x, v)))
            .fold((f64::NAN, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
            .0
    };
    let ratio = (hi / lo).powf(1.0 / N as f64);
    let coarse = pick((0..=N).map(|i| lo * ratio.powi(i as i32)).collect());
    let (a, b) = (coarse / ratio, coarse * ratio);
    pick((0..=N).map(|i| a + (b - a) * i as f64 / N as f64).collect())
}

pub struct Instance {
    pub gamma: f64,
    pub prop: PropagationModel,
    pub hw: HardwareModel,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let prop = PropagationModel {
        alpha: rng.random_range(2.5..5.0),
        block_len: rng.random_range(100..1000),
        ..PropagationModel::default()
    };
    let hw = HardwareModel::from_watts(
        rng.random_range(0.2..0.6),
        rng.random_range(1.0..20.0),
        rng.random_range(0.01..1.0),
        rng.random_range(0.05..1.0),
        rng.random_range(1e-11..1e-9),
        5e-8,
    );
    Instance {
        gamma: rng.random_range(0.5..7.0),
        prop,
        hw,
    }
}
