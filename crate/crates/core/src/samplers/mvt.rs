//! Multivariate Student-t proposal and the fixed-proposal independence
//! sampler used for fixed-effect blocks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfn::log_gamma;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MvtError {
    #[error("scale matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: mean has {mean} entries, scale is {rows}x{cols}")]
    Dimension { mean: usize, rows: usize, cols: usize },
    #[error("degrees of freedom must exceed 2, got {0}")]
    DegreesOfFreedom(f64),
    #[error("empty proposal")]
    Empty,
}

/// On-disk form: mean vector, row-major scale matrix and degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvtSpec {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub nu: f64,
}

/// Multivariate t with location `mean`, scale matrix `scale` and `nu`
/// degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct MvtProposal {
    mean: DVector<f64>,
    scale: DMatrix<f64>,
    nu: f64,
    factor: DMatrix<f64>,
    log_norm: f64,
}

impl MvtProposal {
    pub fn new(mean: DVector<f64>, scale: DMatrix<f64>, nu: f64) -> Result<Self, MvtError> {
        let d = mean.len();
        if d == 0 {
            return Err(MvtError::Empty);
        }
        if scale.nrows() != d || scale.ncols() != d {
            return Err(MvtError::Dimension { mean: d, rows: scale.nrows(), cols: scale.ncols() });
        }
        if !(nu > 2.0 && nu.is_finite()) {
            return Err(MvtError::DegreesOfFreedom(nu));
        }
        let chol = scale.clone().cholesky().ok_or(MvtError::NotPositiveDefinite)?;
        let factor = chol.l();
        let log_det: f64 = 2.0 * factor.diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let df = d as f64;
        let log_norm = log_gamma((nu + df) / 2.0).expect("positive") - log_gamma(nu / 2.0).expect("positive")
            - 0.5 * df * (nu * PI).ln()
            - 0.5 * log_det;
        Ok(Self { mean, scale, nu, factor, log_norm })
    }

    pub fn from_spec(spec: &MvtSpec) -> Result<Self, MvtError> {
        let d = spec.mean.len();
        if spec.scale.len() != d * d {
            let rows = if d == 0 { 0 } else { spec.scale.len() / d.max(1) };
            return Err(MvtError::Dimension { mean: d, rows, cols: d });
        }
        Self::new(DVector::from_vec(spec.mean.clone()), DMatrix::from_row_slice(d, d, &spec.scale), spec.nu)
    }

    pub fn to_spec(&self) -> MvtSpec {
        let d = self.dim();
        let scale = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.scale[(i, j)]).collect();
        MvtSpec { mean: self.mean.iter().copied().collect(), scale, nu: self.nu }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `mean + L z sqrt(ν / g)` with `z` standard normal and `g ~ χ²(ν)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let g = ChiSquared::new(self.nu).expect("nu > 2").sample(rng);
        &self.mean + (&self.factor * z) * (self.nu / g).sqrt()
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        let y = self
            .factor
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        let maha = y.norm_squared();
        self.log_norm - 0.5 * (self.nu + self.dim() as f64) * (maha / self.nu).ln_1p()
    }
}

/// One independence Metropolis-Hastings step with the fixed proposal `p`.
/// Candidates with a non-finite log target are rejected.
pub fn imh_fixed_step<R, F>(current: &DVector<f64>, log_target: F, p: &MvtProposal, rng: &mut R) -> (DVector<f64>, bool)
where
    R: Rng + ?Sized,
    F: Fn(&DVector<f64>) -> f64,
{
    let candidate = p.sample(rng);
    let cand_target = log_target(&candidate);
    if !cand_target.is_finite() {
        return (current.clone(), false);
    }
    let log_ratio = (cand_target - log_target(current)) - (p.log_pdf(&candidate) - p.log_pdf(current));
    if rng.random::<f64>().ln() < log_ratio {
        (candidate, true)
    } else {
        (current.clone(), false)
    }
}
