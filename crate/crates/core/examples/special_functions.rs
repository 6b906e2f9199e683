//! Log-gamma and the first three polygamma functions on a few arguments.

use recapture_hmm::specfn::{digamma, log_beta, log_gamma, tetragamma, trigamma};

fn main() {
    println!("{:>8} {:>20} {:>20} {:>20} {:>20}", "x", "ln Γ(x)", "ψ(x)", "ψ'(x)", "ψ''(x)");
    for x in [0.01, 0.5, 1.0, 2.5, 10.0, 150.0] {
        println!(
            "{x:>8} {:>20.14} {:>20.14} {:>20.14} {:>20.14}",
            log_gamma(x).unwrap(),
            digamma(x).unwrap(),
            trigamma(x).unwrap(),
            tetragamma(x).unwrap()
        );
    }
    println!("\nln B(8, 2) = {:.14}  (exact ln(1/72) = {:.14})", log_beta(8.0, 2.0).unwrap(), (1.0f64 / 72.0).ln());
    match digamma(-1.0) {
        Ok(v) => println!("ψ(-1) = {v}"),
        Err(e) => println!("ψ(-1): {e}"),
    }
}
