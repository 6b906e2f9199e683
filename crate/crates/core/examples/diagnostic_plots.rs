//! Runs a short chain on simulated data and writes trace, density and
//! truth-recovery plots into a directory.
//!
//! cargo run --release --example diagnostic_plots -- [out-dir]

use std::path::PathBuf;

use recapture_hmm::diagnostics::write_diagnostics;
use recapture_hmm::engine::run_chain;
use recapture_hmm::io::SampleTable;
use recapture_hmm::model::RunConfig;
use recapture_hmm::simulate::{run_design, Design};

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "diagnostics".into()).into();
    let data = run_design(&Design::AsymptoticN { size: 40 }, 5).unwrap();
    let config = RunConfig { iterations: 2000, burnin: 500, theta_thin: 5, ..Default::default() };
    let chain = run_chain(&data.histories, &config, 5).unwrap();

    let table = SampleTable { ids: data.truth.ids.clone(), samples: chain.samples };
    let report = write_diagnostics(&table, Some(&data.truth), None, &out).expect("write plots");
    print!("{}", report.render());
    println!("\n{} files in {}", report.files.len(), out.display());
}
