//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's numerical code; they are written from the definitions.

#![allow(dead_code)]

use rand::Rng;
use recapture_hmm::model::{CaptureHistory, IndividualParams};

/// Every latent path of `history` with its joint probability `P(Z, X)`.
/// Bit `t` of the mask is set when the animal is Away at occasion `t`;
/// occasion 0 is always Here.
pub fn enumerate_paths(history: &CaptureHistory, p: &IndividualParams) -> Vec<(u32, f64)> {
    let n = history.observations.len();
    assert!((1..=20).contains(&n));
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask & 1 == 1 {
            continue;
        }
        let away = |t: usize| mask >> t & 1 == 1;
        let mut prob = p.pi; // occasion 0: Here and seen
        for t in 1..n {
            prob *= match (away(t - 1), away(t)) {
                (false, false) => p.stay_here,
                (false, true) => 1.0 - p.stay_here,
                (true, true) => p.stay_away,
                (true, false) => 1.0 - p.stay_away,
            };
            prob *= match (away(t), history.observations[t]) {
                (false, 1) => p.pi,
                (false, _) => 1.0 - p.pi,
                (true, 1) => 0.0,
                (true, _) => 1.0,
            };
        }
        out.push((mask, prob));
    }
    out
}

pub fn random_instance<R: Rng>(rng: &mut R, len: usize, id: &str) -> (CaptureHistory, IndividualParams) {
    let params = IndividualParams {
        pi: rng.random_range(0.05..0.95),
        stay_here: rng.random_range(0.05..0.95),
        stay_away: rng.random_range(0.05..0.95),
    };
    let mut obs = vec![1u8];
    obs.extend((1..len).map(|_| u8::from(rng.random_bool(0.4))));
    (CaptureHistory::new(id, 0, obs), params)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Shift to x ≥ 1000 with the recurrence and finish with three terms of the
/// asymptotic series; truncation error there is below 1e-20.
pub fn digamma_oracle(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 1000.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x - x2 * (1.0 / 12.0 - x2 * (1.0 / 120.0 - x2 / 252.0))
}

pub fn trigamma_oracle(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 1000.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + 0.5 * x2 + x2 / x * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 / 42.0))
}

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// Log-spaced grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (lo.ln() + (hi / lo).ln() * k as f64 / (n - 1) as f64).exp()).collect()
}
