//! ISPA and MB on the Hex network, with and without the extra link.
//!
//! cargo run --release --example hex_braess [seeds]

use coin_routing::harness::{braess_report, run_scenario, Scenario, BRAESS_TOLERANCE};
use coin_routing::runner::Algorithm;

fn main() -> coin_routing::Result<()> {
    let seeds = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/hex-linear.scn");
    let scenario = Scenario::load(path)?
        .with_algorithms(vec![
            Algorithm::Ispa,
            Algorithm::FullKnowledge,
            Algorithm::MemoryBased { steering: 0.5 },
        ])
        .with_seeds(seeds);
    let table = run_scenario(&scenario)?;
    println!("{}", table.to_markdown());
    for e in braess_report(&table, BRAESS_TOLERANCE)? {
        println!(
            "load {:?} {:8} A {:7.2}  B {:7.2}  {}",
            e.load, e.algorithm, e.cost_a, e.cost_b, e.flag
        );
    }
    Ok(())
}
