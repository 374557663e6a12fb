//! Exhaustive sign test of private utilities on a one-wave network with
//! two decision points: the world utility itself, the WLU of each agent's
//! exact effect set, and each agent's own traffic cost.
//!
//! cargo run --example factoredness

use coin_routing::build_topology;
use coin_routing::utility::{exhaustive_probe, OneWaveRouting, PrivateUtility};

const NET: &str = "
node S1 zero
node S2 zero
node A affine 0 2.5
node B affine 0 1
node C affine 0 1
node D1 zero
node D2 zero
edge S1 A
edge S1 B
edge S2 B
edge S2 C
edge A D1
edge B D1
edge B D2
edge C D2
demand S1 D1 1
demand S2 D2 1
schedule L=auto W=2
";

fn main() -> coin_routing::Result<()> {
    let system = OneWaveRouting::new(build_topology(NET)?);
    for utility in [
        PrivateUtility::Team,
        PrivateUtility::ExactEffectSetWlu,
        PrivateUtility::OwnTraffic,
    ] {
        let records = exhaustive_probe(&system, utility)?;
        let bad: Vec<_> = records.iter().filter(|r| !r.agrees()).collect();
        println!(
            "{utility:?}: {} swaps, {} sign mismatches",
            records.len(),
            bad.len()
        );
        for r in bad {
            println!(
                "  agent {} at {:?} -> {}: private {:+.2}, world {:+.2}",
                r.agent, r.joint, r.alternative, r.delta_private, r.delta_world
            );
        }
    }
    Ok(())
}
