//! Posterior precision of the hyper-parameters against the number of
//! animals. The defaults are short enough for a quick look; pass
//! `15000 5000` for full-length chains.
//!
//! cargo run --release --example scaling_study -- [iterations] [burnin] [seed]

use recapture_hmm::experiment::{scaling_experiment, ExperimentPlan};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().expect("integer argument"));
    let iterations = args.next().unwrap_or(3000) as usize;
    let burnin = args.next().unwrap_or(1000) as usize;
    let seed = args.next().unwrap_or(7);

    let plan = ExperimentPlan { iterations, burnin };
    let table = scaling_experiment(&[50, 200], &plan, seed).expect("scaling study");
    print!("{}", table.render());

    let sd = |n: usize, k: usize| table.row(n).unwrap().hypers[k][0].sd;
    println!("\nSD ratio of a, N=200 vs N=50 (1/sqrt(4) = 0.5):");
    for (k, name) in ["pi", "gHH", "gAA"].iter().enumerate() {
        println!("  {name:<4} {:.2}", sd(200, k) / sd(50, k));
    }
}
