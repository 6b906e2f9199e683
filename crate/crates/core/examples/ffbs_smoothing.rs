//! Posterior probability of being Here on each occasion of a short history,
//! estimated by repeated forward-filter backward-sample draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recapture_hmm::ffbs::{backward_sample, forward_filter};
use recapture_hmm::model::{CaptureHistory, IndividualParams, State};

fn main() {
    let history = CaptureHistory::new("whale", 0, vec![1, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0]);
    let params = IndividualParams::new(0.6, 0.8, 0.7);
    let fp = forward_filter(&history, &params).expect("valid history");
    println!("log-likelihood {:.6}", fp.log_likelihood());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 20_000;
    let mut here = vec![0usize; history.len()];
    for _ in 0..draws {
        let chain = backward_sample(&fp, &params, &mut rng).unwrap();
        for (count, s) in here.iter_mut().zip(&chain.states) {
            *count += usize::from(*s == State::Here);
        }
    }

    println!("{:>3} {:>2} {:>9} {:>9}", "t", "x", "filtered", "smoothed");
    for (t, x) in history.observations.iter().enumerate() {
        let [h, a] = fp.alpha[t];
        println!("{t:>3} {x:>2} {:>9.3} {:>9.3}", h / (h + a), here[t] as f64 / draws as f64);
    }
}
