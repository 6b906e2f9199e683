//! Simulates each built-in design and reports how often animals are seen.
//!
//! cargo run --release --example simulate_designs -- [seed]

use recapture_hmm::simulate::{run_design, Design};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let designs =
        [Design::Exploratory, Design::AsymptoticN { size: 200 }, Design::AsymptoticT { horizon: 1000 }];

    println!("{:<13} {:>7} {:>8} {:>13} {:>14}", "design", "animals", "horizon", "mean length", "sighting rate");
    for design in &designs {
        let data = run_design(design, seed).expect("valid design");
        let occasions: usize = data.histories.iter().map(|h| h.len()).sum();
        let sightings: usize = data.histories.iter().map(|h| h.sightings()).sum();
        println!(
            "{:<13} {:>7} {:>8} {:>13.1} {:>14.3}",
            design.name(),
            data.histories.len(),
            data.horizon,
            occasions as f64 / data.histories.len() as f64,
            sightings as f64 / occasions as f64
        );
    }

    let data = run_design(&Design::Exploratory, seed).unwrap();
    let h = &data.histories[0];
    let p = &data.truth.params[0];
    let prefix: String = h.observations.iter().take(60).map(|x| if *x == 1 { '|' } else { '.' }).collect();
    println!("\n{} (pi {:.2}, gHH {:.2}, gAA {:.2}) from occasion {}:", h.id, p.pi, p.stay_here, p.stay_away, h.first_occasion);
    println!("{prefix}");
}
