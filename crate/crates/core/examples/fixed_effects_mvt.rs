//! Samples the two coefficients of a logistic regression with a fixed
//! multivariate-t independence proposal.
//!
//! The proposal is centred on the maximum-likelihood estimate with the
//! inverse Fisher information as its scale, which is how fixed effects in a
//! larger model would typically be handled.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recapture_hmm::samplers::{imh_fixed_step, MvtProposal};

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let beta_true = [-0.5, 1.2];
    let xs: Vec<f64> = (0..400).map(|_| rng.random_range(-2.0..2.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| f64::from(rng.random_bool(sigmoid(beta_true[0] + beta_true[1] * x)))).collect();

    let log_lik = |b: &DVector<f64>| {
        xs.iter().zip(&ys).map(|(x, y)| {
            let eta = b[0] + b[1] * x;
            y * eta - eta.exp().ln_1p()
        })
        .sum::<f64>()
    };

    // Newton for the MLE and the observed information.
    let mut b = DVector::zeros(2);
    let mut info = DMatrix::identity(2, 2);
    for _ in 0..25 {
        let mut grad = DVector::zeros(2);
        info = DMatrix::zeros(2, 2);
        for (x, y) in xs.iter().zip(&ys) {
            let row = DVector::from_vec(vec![1.0, *x]);
            let p = sigmoid(b[0] + b[1] * x);
            grad += &row * (y - p);
            info += &row * row.transpose() * (p * (1.0 - p));
        }
        b += info.clone().lu().solve(&grad).expect("non-singular information");
    }
    let scale = info.try_inverse().expect("invertible");
    let proposal = MvtProposal::new(b.clone(), scale, 5.0).unwrap();

    let (steps, mut accepted) = (20_000, 0);
    let mut current = b.clone();
    let mut sum = DVector::zeros(2);
    for _ in 0..steps {
        let (next, acc) = imh_fixed_step(&current, log_lik, &proposal, &mut rng);
        current = next;
        accepted += usize::from(acc);
        sum += &current;
    }
    let mean = sum / steps as f64;
    println!("true        {:>8.3} {:>8.3}", beta_true[0], beta_true[1]);
    println!("MLE         {:>8.3} {:>8.3}", b[0], b[1]);
    println!("posterior   {:>8.3} {:>8.3}", mean[0], mean[1]);
    println!("acceptance  {:.3}", accepted as f64 / steps as f64);
}
