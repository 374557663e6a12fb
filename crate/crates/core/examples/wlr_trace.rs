//! One recorded MB run on Bootes: per-wave world reward and per-destination
//! WLR, written as CSV to stdout.
//!
//! cargo run --release --example wlr_trace > trace.csv

use coin_routing::harness::{wlr_csv, Scenario};
use coin_routing::runner::{run, Algorithm};
use coin_routing::Variant;

fn main() -> coin_routing::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/bootes2.scn");
    let scenario = Scenario::load(path)?;
    let load = scenario.load_rows()[1].clone();
    let topo = scenario.topology(Variant::B, &load)?;
    let sched = scenario.schedule(&topo)?;
    let mut config = scenario.config(Algorithm::MemoryBased { steering: 0.5 });
    config.record_trajectory = true;
    let result = run(&topo, &sched, &config, 7)?;
    eprintln!(
        "per-packet cost {:.3} over {} measured waves, {} training examples",
        result.per_packet_cost,
        result.waves_measured,
        result.training.iter().map(|t| t.len()).sum::<usize>()
    );
    print!("{}", wlr_csv(&result, &topo)?);
    Ok(())
}
