//! MB at several steering levels on the Ray network, against ISPA.
//!
//! cargo run --release --example steering_sweep [seeds]

use coin_routing::harness::{run_scenario, steering_sweep, Scenario};
use coin_routing::runner::Algorithm;

fn main() -> coin_routing::Result<()> {
    let seeds = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ray.scn");
    let mut scenario = Scenario::load(path)?.with_seeds(seeds);
    // the (4, 4) row only
    scenario.spec.loads.retain(|row| row == &[4, 4]);
    let sweep = steering_sweep(&scenario, &[0.0, 0.25, 0.5, 0.75, 1.0])?;
    let ispa = run_scenario(&scenario.clone().with_algorithms(vec![Algorithm::Ispa]))?;
    println!("{}", ispa.to_markdown());
    println!("{}", sweep.to_markdown());
    Ok(())
}
