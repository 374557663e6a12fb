//! Travelers choosing whole paths on the small Braess network until no one
//! wants to switch.
//!
//! cargo run --example braess_equilibrium

use coin_routing::games::CongestionGame;
use coin_routing::harness::Scenario;
use coin_routing::Variant;

fn main() -> coin_routing::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/braess-figure2.scn");
    let scenario = Scenario::load(path)?;
    for variant in [Variant::A, Variant::B] {
        let topo = scenario.spec.topology(variant)?;
        let game = CongestionGame::from_topology(&topo)?;
        for travelers in [1, 6] {
            let eq = game.best_response_equilibrium(travelers)?;
            let paths: Vec<String> = game
                .paths()
                .iter()
                .zip(&eq.counts)
                .map(|(p, n)| {
                    let names: Vec<&str> = p.iter().map(|&r| topo.name(r)).collect();
                    format!("{}x{}", n, names.join("-"))
                })
                .collect();
            println!(
                "net {variant}, {travelers} traveler(s): {}  cost per traveler {:?}",
                paths.join(" "),
                eq.traveler_costs
            );
        }
    }
    Ok(())
}
