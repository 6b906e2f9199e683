//! Fits the 60-animal, 500-occasion exploratory design and prints the
//! posterior of the six hyper-parameters next to their true values.
//!
//! cargo run --release --example fit_exploratory -- [iterations] [seed]

use std::time::Instant;

use recapture_hmm::engine::run_chain;
use recapture_hmm::model::{Block, RunConfig};
use recapture_hmm::simulate::{run_design, Design};

fn main() {
    let mut args = std::env::args().skip(1);
    let iterations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let data = run_design(&Design::Exploratory, seed).expect("simulate");
    let truth = data.truth.generating.expect("design truth");
    let config = RunConfig { iterations, burnin: iterations / 10, ..Default::default() };

    let start = Instant::now();
    let out = run_chain(&data.histories, &config, seed).expect("run chain");
    let summary = out.summarize(Some(&data.truth)).expect("summary");
    println!("{} iterations in {:.1?}", iterations, start.elapsed());

    println!("{:<5} {:>6} {:>16} {:>6} {:>16} {:>7} {:>6}", "block", "true a", "a (sd)", "true b", "b (sd)", "accept", "corr");
    for block in Block::ALL {
        let h = &summary.hypers[block.index()];
        let (ta, tb) = truth.get(block);
        let corr = summary.correlations.and_then(|c| c[block.index()]).unwrap_or(f64::NAN);
        println!(
            "{:<5} {:>6.1} {:>8.2} ({:>5.2}) {:>6.1} {:>8.2} ({:>5.2}) {:>7.3} {:>6.3}",
            block.name(),
            ta,
            h.a.mean,
            h.a.sd,
            tb,
            h.b.mean,
            h.b.sd,
            summary.acceptance.unwrap()[block.index()],
            corr
        );
    }
    if !out.failures.is_empty() {
        println!("{} hyper proposals could not be inverted and were rejected", out.failures.len());
    }
}
