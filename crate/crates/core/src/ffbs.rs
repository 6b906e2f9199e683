//! Forward filtering, backward sampling of the Here/Away chain.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{count_stats, CaptureHistory, CountStats, IndividualParams, ModelError, State, StateChain};
use crate::rng::{Purpose, Substreams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FfbsError {
    #[error("forward normalizer vanished at occasion {index}")]
    Underflow { index: usize },
    #[error("empty capture history")]
    Empty,
    #[error("backward weights degenerate at occasion {index}")]
    Degenerate { index: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{} individual(s) failed; first: {}: {}", .0.len(), .0[0].0, .0[0].1)]
    Batch(Vec<(String, FfbsError)>),
    #[error("{histories} histories but {params} parameter sets")]
    Mismatch { histories: usize, params: usize },
}

/// Filtered state probabilities `P(S_t | X_1..X_t)` for each occasion.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardProbs {
    /// `[P(Here), P(Away)]`, each pair summing to one.
    pub alpha: Vec<[f64; 2]>,
    /// `P(X_t | X_1..X_{t-1})`; the first entry is π for the first sighting,
    /// with the first state fixed at Here.
    pub norm: Vec<f64>,
}

impl ForwardProbs {
    /// Per-occasion log normalizers.
    pub fn log_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.norm.iter().map(|c| c.ln())
    }

    /// `ln P(X | first sighting)`, the sum of the log normalizers.
    pub fn log_likelihood(&self) -> f64 {
        self.log_norms().sum()
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Unnormalized forward values are rescaled by this exact power of two once
/// their sum drops below its reciprocal.
const RESCALE: f64 = 1.157_920_892_373_162e77; // 2^256
const RESCALE_EVERY: usize = 16;

/// Normalized forward recursion, conditioned on being Here at the first
/// sighting.
pub fn forward_filter(history: &CaptureHistory, params: &IndividualParams) -> Result<ForwardProbs, FfbsError> {
    let n = history.len();
    if n == 0 {
        return Err(FfbsError::Empty);
    }
    let mut alpha = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    alpha.push([1.0, 0.0]);
    norms.push(params.emission(State::Here, history.seen(0)));

    // Emission tables indexed by the observation.
    let emit_here = [1.0 - params.pi, params.pi];
    let emit_away = [1.0, 0.0];
    let (ghh, gaa) = (params.stay_here, params.stay_away);
    // The recursion runs on unnormalized values; normalizing each step only
    // feeds the stored output, which keeps the division off the carried chain.
    let (mut here, mut away) = (1.0, 0.0);
    let mut inv_prev = 1.0;
    // Per-step shrinkage is at least EPSILON, so a chunk cannot underflow
    // between rescaling checks.
    for (c, chunk) in history.observations[1..].chunks(RESCALE_EVERY).enumerate() {
        for (k, &x) in chunk.iter().enumerate() {
            let x = usize::from(x == 1);
            let h = (here * ghh + away * (1.0 - gaa)) * emit_here[x];
            let a = (here * (1.0 - ghh) + away * gaa) * emit_away[x];
            let sum = h + a;
            if !(sum > 0.0 && sum.is_finite()) {
                return Err(FfbsError::Underflow { index: 1 + c * RESCALE_EVERY + k });
            }
            let inv = 1.0 / sum;
            alpha.push([h * inv, a * inv]);
            norms.push(sum * inv_prev);
            here = h;
            away = a;
            inv_prev = inv;
        }
        if here + away < 1.0 / RESCALE {
            here *= RESCALE;
            away *= RESCALE;
            inv_prev /= RESCALE;
        }
    }
    Ok(ForwardProbs { alpha, norm: norms })
}

/// Draws a full path from `P(Z | X)` given the filtered probabilities.
///
/// Consumes exactly one uniform per occasion.
pub fn backward_sample<R: Rng + ?Sized>(
    fp: &ForwardProbs,
    params: &IndividualParams,
    rng: &mut R,
) -> Result<StateChain, FfbsError> {
    let n = fp.len();
    if n == 0 {
        return Err(FfbsError::Empty);
    }
    let mut states = vec![State::Here; n];
    let [ph, pa] = fp.alpha[n - 1];
    if !(ph + pa > 0.0) {
        return Err(FfbsError::Degenerate { index: n - 1 });
    }
    let u: f64 = rng.random();
    let mut next = if u * (ph + pa) < ph { State::Here } else { State::Away };
    states[n - 1] = next;

    let (ghh, gaa) = (params.stay_here, params.stay_away);
    for t in (0..n - 1).rev() {
        let [ph, pa] = fp.alpha[t];
        let u: f64 = rng.random();
        // Decide for both possible successors, then select; only the
        // selection depends on the previous draw.
        let (wh_h, wa_h) = (ph * ghh, pa * (1.0 - gaa));
        let (wh_a, wa_a) = (ph * (1.0 - ghh), pa * gaa);
        let here_if_h = u * (wh_h + wa_h) < wh_h;
        let here_if_a = u * (wh_a + wa_a) < wh_a;
        let here = match next {
            State::Here => here_if_h,
            State::Away => here_if_a,
        };
        next = if here { State::Here } else { State::Away };
        states[t] = next;
    }
    Ok(StateChain { states })
}

/// FFBS plus counting for every individual. Individual `i` draws from
/// substream `(Ffbs, i, counter)`, so output is identical for any thread
/// count.
pub fn sample_all_chains(
    histories: &[CaptureHistory],
    params: &[IndividualParams],
    streams: &Substreams,
    counter: u64,
) -> Result<Vec<(StateChain, CountStats)>, FfbsError> {
    if histories.len() != params.len() {
        return Err(FfbsError::Mismatch { histories: histories.len(), params: params.len() });
    }
    let results: Vec<Result<(StateChain, CountStats), FfbsError>> = histories
        .par_iter()
        .zip(params.par_iter())
        .enumerate()
        .map(|(i, (h, p))| {
            let mut rng = streams.rng(Purpose::Ffbs, i as u64, counter);
            let fp = forward_filter(h, p)?;
            let chain = backward_sample(&fp, p, &mut rng)?;
            let counts = count_stats(&chain, h)?;
            Ok((chain, counts))
        })
        .collect();

    let mut out = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (h, r) in histories.iter().zip(results) {
        match r {
            Ok(v) => out.push(v),
            Err(e) => failures.push((h.id.clone(), e)),
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(FfbsError::Batch(failures))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::State::{Away as A, Here as H};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hist(x: &[u8]) -> CaptureHistory {
        CaptureHistory::new("t", 0, x.to_vec())
    }

    #[test]
    fn first_occasion_is_here() {
        let p = IndividualParams::new(0.3, 0.6, 0.7);
        let fp = forward_filter(&hist(&[1]), &p).unwrap();
        assert_eq!(fp.alpha, vec![[1.0, 0.0]]);
        assert!((fp.log_likelihood() - 0.3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_step() {
        let p = IndividualParams::new(0.5, 0.8, 0.7);
        let fp = forward_filter(&hist(&[1, 0]), &p).unwrap();
        // unnormalized (0.8 * 0.5, 0.2 * 1.0)
        assert!((fp.alpha[1][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((fp.alpha[1][1] - 1.0 / 3.0).abs() < 1e-15);
        let fp = forward_filter(&hist(&[1, 1]), &p).unwrap();
        assert_eq!(fp.alpha[1], [1.0, 0.0]);
    }

    #[test]
    fn all_sightings_force_here() {
        let p = IndividualParams::new(0.5, 0.8, 0.7);
        let fp = forward_filter(&hist(&[1, 1, 1]), &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(backward_sample(&fp, &p, &mut rng).unwrap().states, vec![H, H, H]);
        }
    }

    #[test]
    fn terminal_marginal_matches_filter() {
        let p = IndividualParams::new(0.5, 0.8, 0.7);
        let fp = forward_filter(&hist(&[1, 0]), &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 60_000;
        let here = (0..draws)
            .filter(|_| backward_sample(&fp, &p, &mut rng).unwrap().states[1] == H)
            .count();
        let freq = here as f64 / draws as f64;
        let se = (2.0 / 9.0 / draws as f64).sqrt();
        assert!((freq - 2.0 / 3.0).abs() < 4.0 * se, "freq {freq}");
    }

    #[test]
    fn long_series_do_not_underflow() {
        let p = IndividualParams::new(0.05, 0.5, 0.99);
        let mut x = vec![0u8; 4000];
        x[0] = 1;
        x[3999] = 1;
        let fp = forward_filter(&hist(&x), &p).unwrap();
        assert!(fp.log_likelihood().is_finite());
        assert!(fp.alpha.iter().all(|a| (a[0] + a[1] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn batch_matches_sequential_and_is_ordered() {
        let streams = Substreams::new(9);
        assert!(sample_all_chains(&[], &[], &streams, 0).unwrap().is_empty());

        let hs = vec![hist(&[1]), hist(&[1, 0, 0, 1, 0, 0, 0]), hist(&[1, 0, 0, 0, 0, 0])];
        let ps = vec![IndividualParams::new(0.4, 0.7, 0.6); 3];
        let batch = sample_all_chains(&hs, &ps, &streams, 5).unwrap();
        assert_eq!(batch[0].0.states, vec![H]);
        assert_eq!(batch[0].1.as_tuple(), (1, 1, 0, 0, 0, 0));
        for (i, (h, p)) in hs.iter().zip(&ps).enumerate() {
            let mut rng = streams.rng(Purpose::Ffbs, i as u64, 5);
            let fp = forward_filter(h, p).unwrap();
            let chain = backward_sample(&fp, p, &mut rng).unwrap();
            assert_eq!(batch[i].0, chain);
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sample_all_chains(&hs, &ps, &streams, 5).unwrap());
        assert_eq!(single, batch);
    }

    #[test]
    fn batch_reports_ids() {
        let streams = Substreams::new(1);
        let hs = vec![hist(&[1]), CaptureHistory::new("bad", 0, vec![])];
        let ps = vec![IndividualParams::default(); 2];
        match sample_all_chains(&hs, &ps, &streams, 0) {
            Err(FfbsError::Batch(f)) => assert_eq!(f[0].0, "bad"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            sample_all_chains(&hs, &ps[..1], &streams, 0),
            Err(FfbsError::Mismatch { .. })
        ));
    }

    #[test]
    fn sampled_chains_respect_sightings() {
        let p = IndividualParams::new(0.3, 0.6, 0.8);
        let x = [1, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0];
        let fp = forward_filter(&hist(&x), &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let c = backward_sample(&fp, &p, &mut rng).unwrap();
            for (z, &obs) in c.states.iter().zip(&x) {
                assert!(!(obs == 1 && *z == A));
            }
        }
    }
}
