use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::model::{clamp_probability, BetaHyper, Tally};

/// Draws θ from its full conditional Beta(y + a, n − y + b).
pub fn gibbs_theta<R: Rng + ?Sized>(tally: Tally, hyper: &BetaHyper, rng: &mut R) -> f64 {
    let alpha = f64::from(tally.successes) + hyper.a;
    let beta = f64::from(tally.failures()) + hyper.b;
    let dist = Beta::new(alpha, beta).expect("positive Beta parameters");
    clamp_probability(dist.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(tally: Tally, a: f64, b: f64, n: usize, seed: u64) -> (f64, f64) {
        let hyper = BetaHyper::from_ab(a, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| gibbs_theta(tally, &hyper, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var)
    }

    fn beta_var(a: f64, b: f64) -> f64 {
        a * b / ((a + b).powi(2) * (a + b + 1.0))
    }

    #[test]
    fn no_data_draws_from_prior() {
        let (mean, var) = moments(Tally::new(0, 0), 4.0, 2.0, 100_000, 1);
        let se = (beta_var(4.0, 2.0) / 1e5).sqrt();
        assert!((mean - 4.0 / 6.0).abs() < 3.0 * se);
        assert!((var / beta_var(4.0, 2.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn conjugate_update() {
        let (mean, var) = moments(Tally::new(3, 10), 4.0, 2.0, 100_000, 2);
        let se = (beta_var(7.0, 9.0) / 1e5).sqrt();
        assert!((mean - 7.0 / 16.0).abs() < 3.0 * se, "mean {mean}");
        assert!((var / beta_var(7.0, 9.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn draws_stay_inside_unit_interval() {
        let hyper = BetaHyper::from_ab(0.01, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x = gibbs_theta(Tally::new(0, 0), &hyper, &mut rng);
            assert!(x > 0.0 && x < 1.0);
        }
    }
}
