//! How well individual probabilities are recovered as histories get longer.
//!
//! cargo run --release --example horizon_study -- [iterations] [seed]

use recapture_hmm::experiment::{horizon_experiment, ExperimentPlan};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().expect("integer argument"));
    let iterations = args.next().unwrap_or(3000) as usize;
    let seed = args.next().unwrap_or(7);
    let plan = ExperimentPlan { iterations, burnin: iterations / 3 };
    let table = horizon_experiment(&[250, 1000, 4000], &plan, seed).expect("horizon study");
    print!("{}", table.render());
}
