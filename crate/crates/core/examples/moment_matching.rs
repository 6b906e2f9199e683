//! Maps Beta(a, b) to the mean and variance of logit θ and back again.

use recapture_hmm::samplers::{beta_to_moments, moments_to_beta_with_stats};

fn main() {
    println!("{:>7} {:>7} {:>10} {:>10} {:>12} {:>12} {:>5}", "a", "b", "mu", "sigma2", "a'", "b'", "iters");
    for (a, b) in [(0.2, 0.2), (1.0, 1.0), (4.0, 2.0), (8.0, 2.0), (30.0, 3.0), (100.0, 0.5)] {
        let (mu, s2) = beta_to_moments(a, b).unwrap();
        let (ra, rb, stats) = moments_to_beta_with_stats(mu, s2).unwrap();
        println!("{a:>7.2} {b:>7.2} {mu:>10.5} {s2:>10.5} {ra:>12.8} {rb:>12.8} {:>5}", stats.iterations);
    }

    // A logit-normal summary from elsewhere, e.g. a previous study.
    let (a, b, _) = moments_to_beta_with_stats(1.5, 0.4).unwrap();
    println!("\nlogit mean 1.5, variance 0.4  ->  Beta({a:.3}, {b:.3}), mean {:.3}", a / (a + b));
}
