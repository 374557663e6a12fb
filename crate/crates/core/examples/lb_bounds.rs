//! Bounds on load balancing for a two-link threshold router, checked
//! against a direct simulation of the threshold rule.
//!
//! cargo run --release --example lb_bounds

use coin_routing::lb::{simulate_threshold, verdict, ThresholdModel};
use coin_routing::LoadToCost;

fn main() -> coin_routing::Result<()> {
    let ca = LoadToCost::power(1.0, 2.0)?;
    let cb = LoadToCost::affine(0.0, 1.0)?;
    let window = 1000;
    let report = verdict(&ca, &cb, window)?;
    println!("{report}\n");

    for (label, k) in [("k_LB", report.k_lb), ("k'", report.k_prime)] {
        let model = ThresholdModel::new(ca, cb, window, k.round())?;
        let run = simulate_threshold(&model, 200 * window)?;
        println!(
            "{label:5} = {:7.1}: simulated average {:.6}, S in [{}, {}]",
            k.round(),
            run.average,
            run.s_min,
            run.s_max
        );
    }
    Ok(())
}
