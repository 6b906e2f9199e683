//! The MCMC driver and posterior summaries.
//!
//! One iteration runs, in order: FFBS for every individual, tallying,
//! conjugate Gibbs draws of each individual's three probabilities, and one
//! independence Metropolis-Hastings update per hyper block (π, γ^HH, γ^AA).

use rayon::prelude::*;
use thiserror::Error;

use crate::ffbs::{sample_all_chains, FfbsError};
use crate::model::{
    validate_history, BetaHyper, Block, CaptureHistory, ChainState, CountStats, IndividualParams, ModelError,
    RunConfig, StateChain,
};
use crate::rng::{Purpose, Substreams};
use crate::samplers::{beta_to_moments, gibbs_theta, imh_hyper_step, SamplerError};
use crate::simulate::TruthRecord;
use crate::stats::{pearson, Moments};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(ModelError),
    #[error("invalid data: {0}")]
    Data(ModelError),
    #[error("no capture histories")]
    NoData,
    #[error("iteration {iteration}: {source}")]
    Numeric { iteration: u64, source: FfbsError },
    #[error("iteration {iteration}, block {block}: {source}")]
    Sampler { iteration: u64, block: Block, source: SamplerError },
    #[error("no posterior samples to summarize")]
    EmptySamples,
}

/// Stored form of one hyper block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperRecord {
    pub a: f64,
    pub b: f64,
    /// ψ(a) − ψ(b)
    pub logit_mean: f64,
    /// √(ψ'(a) + ψ'(b))
    pub logit_sd: f64,
}

impl HyperRecord {
    pub fn from_hyper(h: &BetaHyper) -> Self {
        let (mu, s2) = beta_to_moments(h.a, h.b).expect("hyper parameters are positive");
        Self { a: h.a, b: h.b, logit_mean: mu, logit_sd: s2.sqrt() }
    }

    /// Values in the order of [`HYPER_FIELDS`].
    pub fn values(&self) -> [f64; 4] {
        [self.a, self.b, self.logit_mean, self.logit_sd]
    }
}

/// Column names for a stored hyper block.
pub const HYPER_FIELDS: [&str; 4] = ["a", "b", "logit_mean", "logit_sd"];

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    pub iteration: u64,
    pub hypers: [HyperRecord; 3],
    pub thetas: Option<Vec<IndividualParams>>,
}

/// A rejected-by-failure hyper proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalFailure {
    pub iteration: u64,
    pub block: Block,
    pub error: SamplerError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub samples: Vec<PosteriorSample>,
    pub state: ChainState,
    pub failures: Vec<ProposalFailure>,
}

impl RunOutput {
    pub fn acceptance_rates(&self) -> [f64; 3] {
        self.state.acceptance_rates()
    }

    pub fn summarize(&self, truth: Option<&TruthRecord>) -> Result<Summary, EngineError> {
        let mut s = summarize(&self.samples, truth)?;
        s.acceptance = Some(self.acceptance_rates());
        Ok(s)
    }
}

/// Global horizon implied by a set of histories.
pub fn horizon_of(histories: &[CaptureHistory]) -> usize {
    histories.iter().map(|h| h.first_occasion + h.len()).max().unwrap_or(0)
}

pub fn run_chain(histories: &[CaptureHistory], config: &RunConfig, seed: u64) -> Result<RunOutput, EngineError> {
    run_chain_observed(histories, config, seed, |_, _| {})
}

/// [`run_chain`] with a callback receiving every iteration's sampled chains.
pub fn run_chain_observed<F>(
    histories: &[CaptureHistory],
    config: &RunConfig,
    seed: u64,
    mut observer: F,
) -> Result<RunOutput, EngineError>
where
    F: FnMut(u64, &[(StateChain, CountStats)]),
{
    config.validate().map_err(EngineError::Config)?;
    if histories.is_empty() {
        return Err(EngineError::NoData);
    }
    let horizon = horizon_of(histories);
    for h in histories {
        validate_history(h, horizon).map_err(EngineError::Data)?;
    }

    let streams = Substreams::new(seed);
    let mut state = ChainState::initial(histories.len(), seed);
    let mut samples = Vec::new();
    let mut failures = Vec::new();

    for iteration in 0..config.iterations as u64 {
        let chains = sample_all_chains(histories, &state.params, &streams, iteration)
            .map_err(|source| EngineError::Numeric { iteration, source })?;
        observer(iteration, &chains);

        let hypers = state.hypers;
        state.params = chains
            .par_iter()
            .enumerate()
            .map(|(i, (_, counts))| {
                let mut rng = streams.rng(Purpose::Gibbs, i as u64, iteration);
                let mut p = IndividualParams::default();
                for block in Block::ALL {
                    p.set(block, gibbs_theta(counts.get(block), &hypers[block.index()], &mut rng));
                }
                p
            })
            .collect();

        for block in Block::ALL {
            let k = block.index();
            let thetas: Vec<f64> = state.params.iter().map(|p| p.get(block)).collect();
            let mut rng = streams.rng(Purpose::Hyper, k as u64, iteration);
            let step = imh_hyper_step(&thetas, &state.hypers[k], &config.prior, &mut rng)
                .map_err(|source| EngineError::Sampler { iteration, block, source })?;
            state.attempted[k] += 1;
            if step.accepted {
                state.accepted[k] += 1;
            }
            if let Some(error) = step.failure {
                failures.push(ProposalFailure { iteration, block, error });
            }
            state.hypers[k] = step.hyper;
        }
        state.iteration += 1;

        let burnin = config.burnin as u64;
        if iteration >= burnin && (iteration - burnin).is_multiple_of(config.thin as u64) {
            let recorded = (iteration - burnin) / config.thin as u64;
            let thetas = recorded.is_multiple_of(config.theta_thin as u64).then(|| state.params.clone());
            samples.push(PosteriorSample {
                iteration,
                hypers: state.hypers.map(|h| HyperRecord::from_hyper(&h)),
                thetas,
            });
        }
    }
    Ok(RunOutput { samples, state, failures })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperSummary {
    pub block: Block,
    pub a: Moments,
    pub b: Moments,
    pub logit_mean: Moments,
    pub logit_sd: Moments,
}

impl HyperSummary {
    /// Moments in the order of [`HYPER_FIELDS`].
    pub fn fields(&self) -> [Moments; 4] {
        [self.a, self.b, self.logit_mean, self.logit_sd]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub draws: usize,
    pub hypers: [HyperSummary; 3],
    /// Posterior mean of each individual's parameters, when θ draws were kept.
    pub individual_means: Option<Vec<IndividualParams>>,
    /// Correlation between posterior means and truth, per block.
    pub correlations: Option<[Option<f64>; 3]>,
    pub acceptance: Option<[f64; 3]>,
}

pub fn summarize(samples: &[PosteriorSample], truth: Option<&TruthRecord>) -> Result<Summary, EngineError> {
    if samples.is_empty() {
        return Err(EngineError::EmptySamples);
    }
    let hypers = Block::ALL.map(|block| {
        let k = block.index();
        let column = |f: fn(&HyperRecord) -> f64| {
            let xs: Vec<f64> = samples.iter().map(|s| f(&s.hypers[k])).collect();
            Moments::of(&xs).expect("non-empty")
        };
        HyperSummary {
            block,
            a: column(|h| h.a),
            b: column(|h| h.b),
            logit_mean: column(|h| h.logit_mean),
            logit_sd: column(|h| h.logit_sd),
        }
    });

    let with_theta: Vec<&Vec<IndividualParams>> = samples.iter().filter_map(|s| s.thetas.as_ref()).collect();
    let individual_means = with_theta.first().map(|first| {
        let n = first.len();
        let count = with_theta.len() as f64;
        (0..n)
            .map(|i| {
                let mean = |block: Block| with_theta.iter().map(|t| t[i].get(block)).sum::<f64>() / count;
                IndividualParams { pi: mean(Block::Pi), stay_here: mean(Block::StayHere), stay_away: mean(Block::StayAway) }
            })
            .collect::<Vec<_>>()
    });

    let correlations = match (&individual_means, truth) {
        (Some(means), Some(t)) if means.len() == t.params.len() => Some(Block::ALL.map(|block| {
            let est: Vec<f64> = means.iter().map(|p| p.get(block)).collect();
            pearson(&est, &t.values(block))
        })),
        _ => None,
    };

    Ok(Summary { draws: samples.len(), hypers, individual_means, correlations, acceptance: None })
}
