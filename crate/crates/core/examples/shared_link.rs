//! Two agents that each prefer the shared link end up worse off than if
//! both had taken their own alternates.
//!
//! cargo run --example shared_link

use coin_routing::games::{greedy_joint, one_shot, second_choice_joint};
use coin_routing::harness::Scenario;
use coin_routing::utility::OneWaveRouting;
use coin_routing::Variant;

fn main() -> coin_routing::Result<()> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/scenarios/two-router-shared-link.scn"
    );
    let scenario = Scenario::load(path)?;
    let system = OneWaveRouting::new(scenario.spec.topology(Variant::A)?);
    for (label, joint) in [
        ("greedy", greedy_joint(&system)),
        ("alternates", second_choice_joint(&system)),
    ] {
        let shot = one_shot(&system, &joint)?;
        println!(
            "{label:10} joint {:?}: per-agent {:?}, total {}",
            shot.joint,
            shot.costs,
            shot.total()
        );
    }
    Ok(())
}
