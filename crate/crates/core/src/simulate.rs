//! Synthetic populations and capture histories.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Block, BlockTruth, CaptureHistory, IndividualParams, SimulationConfig, State};
use crate::rng::{Purpose, Substreams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulateError {
    #[error("unknown design {0:?} (expected exploratory, asymptotic-n, asymptotic-T or custom)")]
    UnknownDesign(String),
    #[error("invalid design: {0}")]
    Invalid(String),
}

/// True individual parameters and the Beta distributions they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub ids: Vec<String>,
    pub params: Vec<IndividualParams>,
    pub generating: Option<BlockTruth>,
}

impl TruthRecord {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn values(&self, block: Block) -> Vec<f64> {
        self.params.iter().map(|p| p.get(block)).collect()
    }
}

pub fn individual_id(index: usize) -> String {
    format!("ind{:04}", index + 1)
}

pub fn draw_individual<R: Rng + ?Sized>(truth: &BlockTruth, rng: &mut R) -> IndividualParams {
    let mut draw = |block| {
        let (a, b) = truth.get(block);
        Beta::new(a, b).expect("positive Beta parameters").sample(rng)
    };
    let pi = draw(Block::Pi);
    let stay_here = draw(Block::StayHere);
    let stay_away = draw(Block::StayAway);
    IndividualParams::new(pi, stay_here, stay_away)
}

/// `n` independent individuals with θ ~ Beta(a, b) per block.
pub fn draw_individuals<R: Rng + ?Sized>(n: usize, truth: &BlockTruth, rng: &mut R) -> TruthRecord {
    let params: Vec<IndividualParams> = (0..n).map(|_| draw_individual(truth, rng)).collect();
    TruthRecord { ids: (0..n).map(individual_id).collect(), params, generating: Some(*truth) }
}

/// Simulates `horizon` occasions, Here and seen on the first.
pub fn simulate_history<R: Rng + ?Sized>(
    id: impl Into<String>,
    params: &IndividualParams,
    horizon: usize,
    rng: &mut R,
) -> CaptureHistory {
    assert!(horizon >= 1, "horizon must be at least 1");
    let mut obs = Vec::with_capacity(horizon);
    obs.push(1u8);
    let mut state = State::Here;
    for _ in 1..horizon {
        let stay = match state {
            State::Here => params.stay_here,
            State::Away => params.stay_away,
        };
        if rng.random::<f64>() >= stay {
            state = match state {
                State::Here => State::Away,
                State::Away => State::Here,
            };
        }
        let seen = state == State::Here && rng.random::<f64>() < params.pi;
        obs.push(u8::from(seen));
    }
    CaptureHistory::new(id, 0, obs)
}

/// Named simulation experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    /// 60 animals, 500 occasions, Beta(4,2) / Beta(6,2) / Beta(15,5).
    Exploratory,
    /// `size` animals, 250 occasions, Beta(8,2) on every block.
    AsymptoticN { size: usize },
    /// 16 animals, `horizon` occasions, Beta(30,3) / Beta(30,5) / Beta(30,2).
    AsymptoticT { horizon: usize },
    Custom(SimulationConfig),
}

impl Design {
    pub fn config(&self) -> SimulationConfig {
        match self {
            Design::Exploratory => SimulationConfig {
                individuals: 60,
                horizon: 500,
                truth: BlockTruth { pi: [4.0, 2.0], stay_here: [6.0, 2.0], stay_away: [15.0, 5.0] },
            },
            Design::AsymptoticN { size } => {
                SimulationConfig { individuals: *size, horizon: 250, truth: BlockTruth::uniform(8.0, 2.0) }
            }
            Design::AsymptoticT { horizon } => SimulationConfig {
                individuals: 16,
                horizon: *horizon,
                truth: BlockTruth { pi: [30.0, 3.0], stay_here: [30.0, 5.0], stay_away: [30.0, 2.0] },
            },
            Design::Custom(c) => c.clone(),
        }
    }

    /// Builds a design from its name plus the optional size/horizon/custom
    /// overrides the CLI exposes.
    pub fn from_parts(
        name: &str,
        size: Option<usize>,
        horizon: Option<usize>,
        custom: Option<SimulationConfig>,
    ) -> Result<Design, SimulateError> {
        let kind: DesignKind = name.parse()?;
        Ok(match kind {
            DesignKind::Exploratory => Design::Exploratory,
            DesignKind::AsymptoticN => Design::AsymptoticN { size: size.unwrap_or(50) },
            DesignKind::AsymptoticT => Design::AsymptoticT { horizon: horizon.unwrap_or(250) },
            DesignKind::Custom => {
                let mut c = custom.ok_or_else(|| {
                    SimulateError::Invalid("custom design needs a [simulation] table in the config".into())
                })?;
                if let Some(n) = size {
                    c.individuals = n;
                }
                if let Some(t) = horizon {
                    c.horizon = t;
                }
                Design::Custom(c)
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Design::Exploratory => "exploratory",
            Design::AsymptoticN { .. } => "asymptotic-n",
            Design::AsymptoticT { .. } => "asymptotic-T",
            Design::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Exploratory,
    AsymptoticN,
    AsymptoticT,
    Custom,
}

impl FromStr for DesignKind {
    type Err = SimulateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exploratory" => Ok(DesignKind::Exploratory),
            "asymptotic-n" | "asymptotic-N" => Ok(DesignKind::AsymptoticN),
            "asymptotic-T" | "asymptotic-t" => Ok(DesignKind::AsymptoticT),
            "custom" => Ok(DesignKind::Custom),
            other => Err(SimulateError::UnknownDesign(other.to_string())),
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Simulated histories plus the truth that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub horizon: usize,
    pub histories: Vec<CaptureHistory>,
    pub truth: TruthRecord,
}

/// Simulates a design. Individual `i` uses substream `(Simulation, i)`, so
/// the output depends only on the seed.
pub fn run_design(design: &Design, seed: u64) -> Result<Dataset, SimulateError> {
    simulate_population(&design.config(), seed)
}

pub fn simulate_population(config: &SimulationConfig, seed: u64) -> Result<Dataset, SimulateError> {
    if config.individuals == 0 || config.horizon == 0 {
        return Err(SimulateError::Invalid("need at least one individual and one occasion".into()));
    }
    for block in Block::ALL {
        let (a, b) = config.truth.get(block);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(SimulateError::Invalid(format!("{block}: Beta({a}, {b})")));
        }
    }
    let streams = Substreams::new(seed);
    let (params, histories): (Vec<_>, Vec<_>) = (0..config.individuals)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.rng(Purpose::Simulation, i as u64, 0);
            let p = draw_individual(&config.truth, &mut rng);
            let h = simulate_history(individual_id(i), &p, config.horizon, &mut rng);
            (p, h)
        })
        .unzip();
    Ok(Dataset {
        horizon: config.horizon,
        histories,
        truth: TruthRecord {
            ids: (0..config.individuals).map(individual_id).collect(),
            params,
            generating: Some(config.truth),
        },
    })
}
