//! Hyper-parameter update for one Beta block.
//!
//! The chain state of a block is the mean and variance `(μ, σ²)` of logit θ.
//! `(a, b)` follow from it deterministically through the digamma/trigamma
//! moment identities. Proposals come from the Normal-Gamma posterior of the
//! current logit θ values, so the proposal moves with the individual effects
//! from one iteration to the next.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use thiserror::Error;

use crate::model::{logit, BetaHyper, HyperPrior};
use crate::specfn::{digamma, log_beta, log_gamma, tetragamma, trigamma, DomainError};

/// Residual bound on both moment equations.
pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 40;
/// Largest allowed Newton step in log(a), log(b).
const MAX_LOG_STEP: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("logit-moment inversion for (mu={mu}, sigma2={sigma2}) did not converge; residual {residual:e}")]
    NoConvergence { mu: f64, sigma2: f64, residual: f64 },
    #[error("logit variance must be finite and positive, got {0}")]
    BadVariance(f64),
    #[error("conjugate update needs at least one finite value")]
    EmptyData,
    #[error("non-finite {0}")]
    NonFinite(&'static str),
}

/// Mean and variance of logit θ for θ ~ Beta(a, b).
pub fn beta_to_moments(a: f64, b: f64) -> Result<(f64, f64), DomainError> {
    Ok((digamma(a)? - digamma(b)?, trigamma(a)? + trigamma(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NewtonStats {
    pub iterations: usize,
}

/// Inverts [`beta_to_moments`] by Newton-Raphson in `(ln a, ln b)`.
pub fn moments_to_beta(mu: f64, sigma2: f64) -> Result<(f64, f64), SamplerError> {
    moments_to_beta_with_stats(mu, sigma2).map(|(a, b, _)| (a, b))
}

pub fn moments_to_beta_with_stats(mu: f64, sigma2: f64) -> Result<(f64, f64, NewtonStats), SamplerError> {
    if !mu.is_finite() {
        return Err(SamplerError::NonFinite("logit mean"));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(SamplerError::BadVariance(sigma2));
    }
    let residual = |u: f64, v: f64| -> Option<[f64; 2]> {
        let (m, s) = beta_to_moments(u.exp(), v.exp()).ok()?;
        let r = [m - mu, s - sigma2];
        r.iter().all(|x| x.is_finite()).then_some(r)
    };
    let size = |r: [f64; 2]| r[0].abs().max(r[1].abs());

    // Exact inverse of mu ~ ln(a/b), sigma2 ~ 1/a + 1/b.
    let e = mu.clamp(-50.0, 50.0).exp();
    let mut u = ((1.0 + e) / sigma2).ln();
    let mut v = ((1.0 + 1.0 / e) / sigma2).ln();
    let mut r = residual(u, v).ok_or(SamplerError::NonFinite("starting residual"))?;
    let mut polish = 0;

    for iteration in 0..MAX_NEWTON_ITERATIONS {
        let err = size(r);
        if err < NEWTON_TOLERANCE {
            if polish == 2 || err == 0.0 {
                return Ok((u.exp(), v.exp(), NewtonStats { iterations: iteration }));
            }
            polish += 1;
        }
        let (a, b) = (u.exp(), v.exp());
        // Jacobian of the residual with respect to (ln a, ln b).
        let j00 = trigamma(a)? * a;
        let j01 = -trigamma(b)? * b;
        let j10 = tetragamma(a)? * a;
        let j11 = tetragamma(b)? * b;
        let det = j00 * j11 - j01 * j10;
        let mut du = -(j11 * r[0] - j01 * r[1]) / det;
        let mut dv = -(-j10 * r[0] + j00 * r[1]) / det;
        if !(du.is_finite() && dv.is_finite()) {
            break;
        }
        let longest = du.abs().max(dv.abs());
        if longest > MAX_LOG_STEP {
            du *= MAX_LOG_STEP / longest;
            dv *= MAX_LOG_STEP / longest;
        }

        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..MAX_HALVINGS {
            let (nu, nv) = (u + step * du, v + step * dv);
            if let Some(nr) = residual(nu, nv) {
                let better = size(nr) < err || (err < NEWTON_TOLERANCE && size(nr) <= err);
                if better {
                    u = nu;
                    v = nv;
                    r = nr;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let err = size(r);
    if err < NEWTON_TOLERANCE {
        Ok((u.exp(), v.exp(), NewtonStats { iterations: MAX_NEWTON_ITERATIONS }))
    } else {
        Err(SamplerError::NoConvergence { mu, sigma2, residual: err })
    }
}

/// Normal-Gamma distribution over a Gaussian mean and precision:
/// τ ~ Gamma(α, rate β), μ | τ ~ N(μ_n, 1 / (κ τ)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalGammaPosterior {
    pub mu_n: f64,
    pub kappa_n: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
}

impl NormalGammaPosterior {
    pub fn from_prior(prior: &HyperPrior) -> Self {
        Self { mu_n: prior.mu0, kappa_n: prior.kappa0, alpha_n: prior.alpha_tau, beta_n: prior.beta_tau }
    }

    pub fn log_density(&self, mu: f64, tau: f64) -> f64 {
        if !(tau > 0.0) {
            return f64::NEG_INFINITY;
        }
        let Self { mu_n, kappa_n, alpha_n, beta_n } = *self;
        let lg = log_gamma(alpha_n).expect("alpha_n > 0");
        alpha_n * beta_n.ln() - lg + (alpha_n - 1.0) * tau.ln() - beta_n * tau
            + 0.5 * (kappa_n * tau / (2.0 * PI)).ln()
            - 0.5 * kappa_n * tau * (mu - mu_n).powi(2)
    }

    /// Draws `(μ, τ)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let tau = Gamma::new(self.alpha_n, 1.0 / self.beta_n).expect("valid Gamma").sample(rng);
        let sd = (1.0 / (self.kappa_n * tau)).sqrt();
        let mu = match Normal::new(self.mu_n, sd) {
            Ok(n) => n.sample(rng),
            Err(_) => f64::NAN,
        };
        (mu, tau)
    }
}

/// Conjugate update of the Normal-Gamma prior with observations `z`.
pub fn normal_gamma_update(z: &[f64], prior: &HyperPrior) -> Result<NormalGammaPosterior, SamplerError> {
    if z.is_empty() {
        return Err(SamplerError::EmptyData);
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err(SamplerError::NonFinite("logit value"));
    }
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let ss: f64 = z.iter().map(|x| (x - mean).powi(2)).sum();
    let HyperPrior { mu0, kappa0, alpha_tau, beta_tau } = *prior;
    Ok(NormalGammaPosterior {
        mu_n: (kappa0 * mu0 + n * mean) / (kappa0 + n),
        kappa_n: kappa0 + n,
        alpha_n: alpha_tau + n / 2.0,
        beta_n: beta_tau + 0.5 * ss + kappa0 * n * (mean - mu0).powi(2) / (2.0 * (kappa0 + n)),
    })
}

/// Outcome of one hyper-parameter update.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperStep {
    pub hyper: BetaHyper,
    pub accepted: bool,
    /// Set when the candidate could not be formed; counts as a rejection.
    pub failure: Option<SamplerError>,
}

/// One independence Metropolis-Hastings update of a Beta block given the
/// current individual values `thetas`.
pub fn imh_hyper_step<R: Rng + ?Sized>(
    thetas: &[f64],
    current: &BetaHyper,
    prior: &HyperPrior,
    rng: &mut R,
) -> Result<HyperStep, SamplerError> {
    let logits: Vec<f64> = thetas.iter().map(|&t| logit(t)).collect();
    let proposal = normal_gamma_update(&logits, prior)?;
    let prior_density = NormalGammaPosterior::from_prior(prior);

    let (mu_c, tau_c) = proposal.sample(rng);
    let log_u: f64 = rng.random::<f64>().ln();
    let reject = |failure: SamplerError| Ok(HyperStep { hyper: *current, accepted: false, failure: Some(failure) });

    if !(mu_c.is_finite() && tau_c > 0.0 && tau_c.is_finite()) {
        return reject(SamplerError::NonFinite("candidate"));
    }
    let sigma2_c = 1.0 / tau_c;
    let (a_c, b_c) = match moments_to_beta(mu_c, sigma2_c) {
        Ok(ab) => ab,
        Err(e) => return reject(e),
    };

    let n = thetas.len() as f64;
    let sum_log: f64 = thetas.iter().map(|t| t.ln()).sum();
    let sum_log1m: f64 = thetas.iter().map(|t| (1.0 - t).ln()).sum();
    let log_lik = |a: f64, b: f64| -> Result<f64, SamplerError> {
        Ok((a - 1.0) * sum_log + (b - 1.0) * sum_log1m - n * log_beta(a, b)?)
    };

    let tau = 1.0 / current.sigma2;
    let target_cand = log_lik(a_c, b_c)? + prior_density.log_density(mu_c, tau_c);
    let target_curr = log_lik(current.a, current.b)? + prior_density.log_density(current.mu, tau);
    let prop_cand = proposal.log_density(mu_c, tau_c);
    let prop_curr = proposal.log_density(current.mu, tau);
    let log_ratio = (target_cand - target_curr) - (prop_cand - prop_curr);
    if log_ratio.is_nan() {
        return reject(SamplerError::NonFinite("acceptance ratio"));
    }
    if log_u < log_ratio {
        let hyper = BetaHyper { a: a_c, b: b_c, mu: mu_c, sigma2: sigma2_c };
        Ok(HyperStep { hyper, accepted: true, failure: None })
    } else {
        Ok(HyperStep { hyper: *current, accepted: false, failure: None })
    }
}
