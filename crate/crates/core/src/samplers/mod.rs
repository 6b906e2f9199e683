//! Parameter updates: conjugate Gibbs draws for individual effects,
//! adaptive independence Metropolis-Hastings for the Beta hyper-parameters
//! and a fixed multivariate-t independence sampler for fixed-effect blocks.

mod gibbs;
mod hyper;
mod mvt;

pub use gibbs::gibbs_theta;
pub use hyper::{
    beta_to_moments, imh_hyper_step, moments_to_beta, moments_to_beta_with_stats, normal_gamma_update,
    HyperStep, NewtonStats, NormalGammaPosterior, SamplerError, MAX_NEWTON_ITERATIONS, NEWTON_TOLERANCE,
};
pub use mvt::{imh_fixed_step, MvtError, MvtProposal, MvtSpec};
