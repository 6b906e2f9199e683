//! Hierarchical Bayesian hidden-Markov mark-recapture.
//!
//! Animals move between two latent states, Here and Away, and can only be
//! sighted while Here. Each animal carries its own detection probability and
//! its own probabilities of staying Here and staying Away, drawn from
//! population Beta distributions. This crate simulates such populations and
//! fits them by MCMC:
//!
//! - [`ffbs`] draws each animal's latent path given its sightings,
//! - [`samplers`] updates individual probabilities by conjugate Gibbs draws
//!   and the population Beta parameters by an independence
//!   Metropolis-Hastings step built from logit-scale moment matching,
//! - [`engine`] runs the full chain and summarizes it.
//!
//! ```no_run
//! use recapture_hmm::engine::run_chain;
//! use recapture_hmm::model::RunConfig;
//! use recapture_hmm::simulate::{run_design, Design};
//!
//! let data = run_design(&Design::Exploratory, 1).unwrap();
//! let config = RunConfig { iterations: 2_000, burnin: 500, ..Default::default() };
//! let out = run_chain(&data.histories, &config, 7).unwrap();
//! let summary = out.summarize(Some(&data.truth)).unwrap();
//! println!("pi: a = {:.2}", summary.hypers[0].a.mean);
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod engine;
pub mod experiment;
pub mod ffbs;
pub mod io;
pub mod model;
pub mod rng;
pub mod samplers;
pub mod simulate;
pub mod specfn;
pub mod stats;

pub use engine::{run_chain, summarize, PosteriorSample, RunOutput, Summary};
pub use model::{Block, CaptureHistory, IndividualParams, RunConfig};
