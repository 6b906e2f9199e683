//! Capture histories, latent chains, count statistics and hyper-parameter
//! blocks.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfn::{self, DomainError};

/// Probabilities are kept inside `[EPSILON, 1 - EPSILON]`.
pub const EPSILON: f64 = 1e-12;

#[inline]
pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(EPSILON, 1.0 - EPSILON)
}

#[inline]
pub fn logit(p: f64) -> f64 {
    let p = clamp_probability(p);
    (p / (1.0 - p)).ln()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("individual {id}: empty capture history")]
    EmptyHistory { id: String },
    #[error("individual {id}: first observation must be 1")]
    LeadingZero { id: String },
    #[error("individual {id}: non-binary entry at index {index} (value {value})")]
    NonBinary { id: String, index: usize, value: u8 },
    #[error("individual {id}: history starting at {first} with {len} occasions overflows horizon {horizon}")]
    PastHorizon { id: String, first: usize, len: usize, horizon: usize },
    #[error("chain length {chain} does not match history length {history}")]
    LengthMismatch { chain: usize, history: usize },
    #[error("sighting at index {index} but chain is Away")]
    Inconsistent { index: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Latent state of an animal on one occasion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Here,
    Away,
}

impl State {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            State::Here => 0,
            State::Away => 1,
        }
    }
}

/// One animal's seen / not-seen series, starting at its first sighting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureHistory {
    pub id: String,
    /// Occasion index (0-based) of the first sighting.
    pub first_occasion: usize,
    /// `observations[k]` is the outcome at occasion `first_occasion + k`.
    pub observations: Vec<u8>,
}

impl CaptureHistory {
    pub fn new(id: impl Into<String>, first_occasion: usize, observations: Vec<u8>) -> Self {
        Self { id: id.into(), first_occasion, observations }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    #[inline]
    pub fn seen(&self, k: usize) -> bool {
        self.observations[k] == 1
    }

    pub fn sightings(&self) -> usize {
        self.observations.iter().filter(|&&x| x == 1).count()
    }

    /// Checks the history against a global horizon of `horizon` occasions.
    pub fn validate(&self, horizon: usize) -> Result<(), ModelError> {
        validate_history(self, horizon)
    }
}

/// Reports the first violated invariant of `h`.
pub fn validate_history(h: &CaptureHistory, horizon: usize) -> Result<(), ModelError> {
    let id = || h.id.clone();
    if h.observations.is_empty() {
        return Err(ModelError::EmptyHistory { id: id() });
    }
    if let Some((index, &value)) = h.observations.iter().enumerate().find(|(_, &x)| x > 1) {
        return Err(ModelError::NonBinary { id: id(), index, value });
    }
    if h.observations[0] != 1 {
        return Err(ModelError::LeadingZero { id: id() });
    }
    if h.first_occasion + h.observations.len() > horizon {
        return Err(ModelError::PastHorizon {
            id: id(),
            first: h.first_occasion,
            len: h.observations.len(),
            horizon,
        });
    }
    Ok(())
}

/// A sampled latent path, aligned with its capture history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateChain {
    pub states: Vec<State>,
}

impl StateChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn here_count(&self) -> usize {
        self.states.iter().filter(|&&s| s == State::Here).count()
    }
}

impl fmt::Display for StateChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            f.write_str(match s {
                State::Here => "H",
                State::Away => "A",
            })?;
        }
        Ok(())
    }
}

/// The three individual-level probability families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    /// Detection probability when Here.
    Pi,
    /// Probability of staying Here.
    StayHere,
    /// Probability of staying Away.
    StayAway,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Pi, Block::StayHere, Block::StayAway];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short name used in every file format.
    pub fn name(self) -> &'static str {
        match self {
            Block::Pi => "pi",
            Block::StayHere => "gHH",
            Block::StayAway => "gAA",
        }
    }

    pub fn from_name(s: &str) -> Option<Block> {
        Block::ALL.into_iter().find(|b| b.name() == s)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binomial successes out of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub successes: u32,
    pub trials: u32,
}

impl Tally {
    pub fn new(successes: u32, trials: u32) -> Self {
        debug_assert!(successes <= trials);
        Self { successes, trials }
    }

    pub fn failures(&self) -> u32 {
        self.trials - self.successes
    }
}

/// Per-individual success/trial tallies for the three blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountStats {
    pub detection: Tally,
    pub stay_here: Tally,
    pub stay_away: Tally,
}

impl CountStats {
    pub fn get(&self, block: Block) -> Tally {
        match block {
            Block::Pi => self.detection,
            Block::StayHere => self.stay_here,
            Block::StayAway => self.stay_away,
        }
    }

    /// `(y_pi, n_pi, y_HH, n_HH, y_AA, n_AA)`
    pub fn as_tuple(&self) -> (u32, u32, u32, u32, u32, u32) {
        (
            self.detection.successes,
            self.detection.trials,
            self.stay_here.successes,
            self.stay_here.trials,
            self.stay_away.successes,
            self.stay_away.trials,
        )
    }
}

/// Tallies trials and successes from a sampled chain.
///
/// Every Here occasion is a detection trial. Every occasion except the last
/// is a transition trial for the state occupied at that time.
pub fn count_stats(chain: &StateChain, history: &CaptureHistory) -> Result<CountStats, ModelError> {
    if chain.len() != history.len() {
        return Err(ModelError::LengthMismatch { chain: chain.len(), history: history.len() });
    }
    // Branch-free tallies; chains are random so data-dependent branches
    // mispredict constantly.
    let (mut here_n, mut seen_here, mut contradictions) = (0u32, 0u32, 0u32);
    let (mut hh_n, mut hh_y, mut aa_y) = (0u32, 0u32, 0u32);
    let states = &chain.states;
    for (t, (&z, &x)) in states.iter().zip(&history.observations).enumerate() {
        let here = u32::from(z == State::Here);
        let seen = u32::from(x == 1);
        here_n += here;
        seen_here += here & seen;
        contradictions += (1 - here) & seen;
        if let Some(&next) = states.get(t + 1) {
            let same = u32::from(next == z);
            hh_n += here;
            hh_y += here & same;
            aa_y += (1 - here) & same;
        }
    }
    if contradictions > 0 {
        let index = states
            .iter()
            .zip(&history.observations)
            .position(|(&z, &x)| z == State::Away && x == 1)
            .expect("counted a contradiction");
        return Err(ModelError::Inconsistent { index });
    }
    let transitions = chain.len().saturating_sub(1) as u32;
    Ok(CountStats {
        detection: Tally::new(seen_here, here_n),
        stay_here: Tally::new(hh_y, hh_n),
        stay_away: Tally::new(aa_y, transitions - hh_n),
    })
}

/// Individual-level probabilities, each kept strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndividualParams {
    pub pi: f64,
    pub stay_here: f64,
    pub stay_away: f64,
}

impl IndividualParams {
    pub fn new(pi: f64, stay_here: f64, stay_away: f64) -> Self {
        Self {
            pi: clamp_probability(pi),
            stay_here: clamp_probability(stay_here),
            stay_away: clamp_probability(stay_away),
        }
    }

    pub fn get(&self, block: Block) -> f64 {
        match block {
            Block::Pi => self.pi,
            Block::StayHere => self.stay_here,
            Block::StayAway => self.stay_away,
        }
    }

    pub fn set(&mut self, block: Block, value: f64) {
        let v = clamp_probability(value);
        match block {
            Block::Pi => self.pi = v,
            Block::StayHere => self.stay_here = v,
            Block::StayAway => self.stay_away = v,
        }
    }

    /// Transition probability from `from` to `to`.
    #[inline]
    pub fn transition(&self, from: State, to: State) -> f64 {
        match (from, to) {
            (State::Here, State::Here) => self.stay_here,
            (State::Here, State::Away) => 1.0 - self.stay_here,
            (State::Away, State::Away) => self.stay_away,
            (State::Away, State::Here) => 1.0 - self.stay_away,
        }
    }

    /// Probability of observing `seen` given the state.
    #[inline]
    pub fn emission(&self, state: State, seen: bool) -> f64 {
        match (state, seen) {
            (State::Here, true) => self.pi,
            (State::Here, false) => 1.0 - self.pi,
            (State::Away, true) => 0.0,
            (State::Away, false) => 1.0,
        }
    }
}

impl Default for IndividualParams {
    fn default() -> Self {
        Self::new(0.5, 0.5, 0.5)
    }
}

/// Population Beta(a, b) for one block together with the mean and variance
/// of logit θ under it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaHyper {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl BetaHyper {
    pub fn from_ab(a: f64, b: f64) -> Result<Self, DomainError> {
        let mu = specfn::digamma(a)? - specfn::digamma(b)?;
        let sigma2 = specfn::trigamma(a)? + specfn::trigamma(b)?;
        Ok(Self { a, b, mu, sigma2 })
    }

    pub fn logit_sd(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }
}

/// Constants of the Normal-Gamma prior on the logit-scale mean and precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPrior {
    pub mu0: f64,
    /// Prior precision multiplier on the mean, in units of τ.
    pub kappa0: f64,
    pub alpha_tau: f64,
    pub beta_tau: f64,
}

impl Default for HyperPrior {
    fn default() -> Self {
        Self { mu0: 0.0, kappa0: 0.1, alpha_tau: 0.1, beta_tau: 0.1 }
    }
}

/// Generating Beta parameters for the three blocks, in `Block::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTruth {
    pub pi: [f64; 2],
    #[serde(rename = "gHH")]
    pub stay_here: [f64; 2],
    #[serde(rename = "gAA")]
    pub stay_away: [f64; 2],
}

impl BlockTruth {
    pub fn uniform(a: f64, b: f64) -> Self {
        Self { pi: [a, b], stay_here: [a, b], stay_away: [a, b] }
    }

    pub fn get(&self, block: Block) -> (f64, f64) {
        let [a, b] = match block {
            Block::Pi => self.pi,
            Block::StayHere => self.stay_here,
            Block::StayAway => self.stay_away,
        };
        (a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub individuals: usize,
    pub horizon: usize,
    pub truth: BlockTruth,
}

/// Sampler settings. Loaded from and echoed to TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Total iterations, burn-in included.
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    /// Stride (in recorded samples) for storing individual θ values.
    pub theta_thin: usize,
    pub seed: u64,
    pub prior: HyperPrior,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            iterations: 15_000,
            burnin: 5_000,
            thin: 1,
            theta_thin: 10,
            seed: 0,
            prior: HyperPrior::default(),
            simulation: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.burnin >= self.iterations && self.iterations > 0 {
            return bad("burnin must be smaller than iterations");
        }
        if self.thin == 0 || self.theta_thin == 0 {
            return bad("thinning strides must be at least 1");
        }
        let p = &self.prior;
        if !p.mu0.is_finite() {
            return bad("prior.mu0 must be finite");
        }
        if !(p.kappa0 > 0.0 && p.alpha_tau > 0.0 && p.beta_tau > 0.0) {
            return bad("prior constants kappa0, alpha_tau, beta_tau must be positive");
        }
        if let Some(sim) = &self.simulation {
            if sim.individuals == 0 || sim.horizon == 0 {
                return bad("simulation needs at least one individual and one occasion");
            }
            for block in Block::ALL {
                let (a, b) = sim.truth.get(block);
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return bad("truth Beta parameters must be positive");
                }
            }
        }
        Ok(())
    }
}

/// Full sampler state between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub params: Vec<IndividualParams>,
    pub hypers: [BetaHyper; 3],
    /// Completed iterations.
    pub iteration: u64,
    pub accepted: [u64; 3],
    pub attempted: [u64; 3],
    /// Master seed; together with `iteration` this is the RNG cursor.
    pub seed: u64,
}

impl ChainState {
    /// θ = 0.5 everywhere, every block at Beta(1, 1).
    pub fn initial(individuals: usize, seed: u64) -> Self {
        let flat = BetaHyper::from_ab(1.0, 1.0).expect("Beta(1,1) moments");
        Self {
            params: vec![IndividualParams::default(); individuals],
            hypers: [flat; 3],
            iteration: 0,
            accepted: [0; 3],
            attempted: [0; 3],
            seed,
        }
    }

    pub fn acceptance_rates(&self) -> [f64; 3] {
        std::array::from_fn(|k| {
            if self.attempted[k] == 0 {
                0.0
            } else {
                self.accepted[k] as f64 / self.attempted[k] as f64
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use State::{Away as A, Here as H};

    fn hist(x: &[u8]) -> CaptureHistory {
        CaptureHistory::new("x", 0, x.to_vec())
    }

    #[test]
    fn validate_examples() {
        assert!(validate_history(&hist(&[1, 0, 1]), 3).is_ok());
        let e = validate_history(&hist(&[0, 1]), 3).unwrap_err();
        assert_eq!(e.to_string(), "individual x: first observation must be 1");
        let e = validate_history(&hist(&[1, 2]), 3).unwrap_err();
        assert_eq!(e, ModelError::NonBinary { id: "x".into(), index: 1, value: 2 });
        assert!(e.to_string().contains("non-binary entry at index 1"));
        let e = validate_history(&CaptureHistory::new("y", 2, vec![1, 0]), 3).unwrap_err();
        assert!(matches!(e, ModelError::PastHorizon { horizon: 3, .. }));
        assert!(validate_history(&hist(&[]), 3).is_err());
    }

    #[test]
    fn count_examples() {
        let c = count_stats(&StateChain { states: vec![H, H, A, H] }, &hist(&[1, 0, 0, 1])).unwrap();
        assert_eq!(c.as_tuple(), (2, 3, 1, 2, 0, 1));
        let c = count_stats(&StateChain { states: vec![H] }, &hist(&[1])).unwrap();
        assert_eq!(c.as_tuple(), (1, 1, 0, 0, 0, 0));
        let c = count_stats(&StateChain { states: vec![H, H, H] }, &hist(&[1, 1, 1])).unwrap();
        assert_eq!(c.as_tuple(), (3, 3, 2, 2, 0, 0));
    }

    #[test]
    fn count_rejects_away_sighting() {
        let e = count_stats(&StateChain { states: vec![H, A] }, &hist(&[1, 1])).unwrap_err();
        assert_eq!(e, ModelError::Inconsistent { index: 1 });
        let e = count_stats(&StateChain { states: vec![H] }, &hist(&[1, 1])).unwrap_err();
        assert!(matches!(e, ModelError::LengthMismatch { .. }));
    }

    #[test]
    fn params_are_clamped() {
        let p = IndividualParams::new(0.0, 1.0, 0.3);
        assert_eq!(p.pi, EPSILON);
        assert_eq!(p.stay_here, 1.0 - EPSILON);
        assert!(logit(0.0).is_finite());
        assert!(logit(1.0).is_finite());
    }

    #[test]
    fn beta_hyper_moments() {
        let h = BetaHyper::from_ab(8.0, 2.0).unwrap();
        assert!((h.mu - 1.592_857_142_857_14).abs() < 1e-10);
        assert!((h.sigma2 - 0.778_071_081_542_258).abs() < 1e-10);
        assert!(BetaHyper::from_ab(0.0, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let mut c = RunConfig { burnin: 20, iterations: 10, ..Default::default() };
        assert!(c.validate().is_err());
        c.burnin = 0;
        c.thin = 0;
        assert!(c.validate().is_err());
        c.thin = 1;
        c.prior.kappa0 = 0.0;
        assert!(c.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn counting_identities(states in proptest::collection::vec(proptest::bool::ANY, 1..60), seen in proptest::collection::vec(proptest::bool::ANY, 60)) {
            // Force Z[0] = Here and only allow sightings while Here.
            let mut chain: Vec<State> = states.iter().map(|&h| if h { H } else { A }).collect();
            chain[0] = H;
            let obs: Vec<u8> = chain.iter().zip(&seen).enumerate()
                .map(|(t, (&z, &s))| u8::from(t == 0 || (z == H && s))).collect();
            let h = hist(&obs);
            let ch = StateChain { states: chain };
            let c = count_stats(&ch, &h).unwrap();
            proptest::prop_assert_eq!(c.detection.trials as usize, ch.here_count());
            proptest::prop_assert_eq!((c.stay_here.trials + c.stay_away.trials) as usize, ch.len() - 1);
            proptest::prop_assert_eq!(c.detection.successes as usize, h.sightings());
            for b in Block::ALL {
                proptest::prop_assert!(c.get(b).successes <= c.get(b).trials);
            }
        }
    }
}
