#![allow(dead_code)]

use coin_routing::sim::{Decisions, Simulator, StepRecord};
use coin_routing::{build_topology, Topology, Trajectory, WaveSchedule};
use rand::seq::SliceRandom;
use rand::Rng;

fn random_cost<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..4) {
        0 => format!(
            "affine {} {}",
            rng.gen_range(0..6),
            rng.gen_range(0.0..3.0f64)
        ),
        1 => format!(
            "power {} {}",
            rng.gen_range(0.5..3.0f64),
            rng.gen_range(1..4)
        ),
        2 => format!(
            "affine-log {} {}",
            rng.gen_range(0..6),
            rng.gen_range(0.5..2.0f64)
        ),
        _ => "zero".into(),
    }
}

/// A random layered network: one or two sources, one to three hidden
/// layers with occasional layer-skipping links, one or two destinations.
pub fn random_scenario<R: Rng>(rng: &mut R) -> String {
    let mut text = String::new();
    let sources = rng.gen_range(1..=2);
    let dests = rng.gen_range(1..=2);
    let mut layers: Vec<Vec<String>> = vec![(0..sources).map(|i| format!("S{i}")).collect()];
    for l in 0..rng.gen_range(1..=3) {
        let width = rng.gen_range(1..=3);
        layers.push((0..width).map(|i| format!("R{l}_{i}")).collect());
    }
    layers.push((0..dests).map(|i| format!("D{i}")).collect());

    for (li, layer) in layers.iter().enumerate() {
        for n in layer {
            let cost = if li == 0 || li == layers.len() - 1 {
                "zero".to_string()
            } else {
                random_cost(rng)
            };
            text.push_str(&format!("node {n} {cost}\n"));
        }
    }
    let last = layers.len() - 1;
    for li in 0..last {
        for n in &layers[li] {
            let next = &layers[li + 1];
            let mut targets: Vec<&String> = if li + 1 == last {
                next.iter().collect()
            } else {
                next.iter().filter(|_| rng.gen_bool(0.6)).collect()
            };
            if targets.is_empty() {
                targets.push(next.choose(rng).unwrap());
            }
            if li + 2 < last && rng.gen_bool(0.3) {
                targets.push(layers[li + 2].choose(rng).unwrap());
            }
            for t in targets {
                text.push_str(&format!("edge {n} {t}\n"));
            }
        }
    }
    for s in &layers[0] {
        let d = layers[last].choose(rng).unwrap();
        text.push_str(&format!("demand {s} {d} {}\n", rng.gen_range(1..=3)));
    }
    text
}

pub fn random_topology<R: Rng>(rng: &mut R) -> Topology {
    let text = random_scenario(rng);
    build_topology(&text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

/// Runs `waves` waves with every active agent picking a uniformly random
/// candidate each step. Returns the trajectory and the delivered count at
/// the end of every wave.
pub fn random_run<R: Rng>(
    topo: &Topology,
    m: usize,
    waves: usize,
    rng: &mut R,
) -> (Trajectory, Vec<u64>) {
    let l = topo.longest_path_length();
    let sched = WaveSchedule::new(l, l * m, 0, waves).unwrap();
    let mut sim = Simulator::new(topo, sched).unwrap();
    let mut traj = Trajectory::empty(topo, &sched);
    let mut delivered = Vec::new();
    for step in 0..l * waves {
        let mut dec = Decisions::new(topo);
        for a in sim.active_agents() {
            dec.set_slot(a, *topo.candidates(a).choose(rng).unwrap());
        }
        let rec: StepRecord = sim.step(&dec).unwrap();
        traj.push(rec);
        if (step + 1) % l == 0 {
            delivered.push(sim.delivered());
        }
    }
    (traj, delivered)
}

/// Longest hop count over all simple source-to-destination paths, by
/// exhaustive enumeration.
pub fn brute_longest(topo: &Topology) -> usize {
    fn walk(topo: &Topology, v: usize, dest: usize, depth: usize, best: &mut usize) {
        if v == dest {
            *best = (*best).max(depth);
            return;
        }
        for &s in topo.successors(v) {
            walk(topo, s, dest, depth + 1, best);
        }
    }
    let mut best = 0;
    for d in topo.demands() {
        walk(topo, d.source, d.dest, 0, &mut best);
    }
    best
}

/// A one-wave system: agent `i` is source `S{i}` sending `packets[i]` to
/// its own destination (or a shared `D`) through one of the routers listed
/// in `choices[i]`, picked from the pool `R0..` with the given costs.
pub fn small_system_text(
    choices: &[Vec<usize>],
    packets: &[u32],
    pool_costs: &[&str],
    shared_dest: bool,
) -> String {
    let mut text = String::new();
    for (j, c) in pool_costs.iter().enumerate() {
        text.push_str(&format!("node R{j} {c}\n"));
    }
    let dest = |i: usize| {
        if shared_dest {
            "D".to_string()
        } else {
            format!("D{i}")
        }
    };
    if shared_dest {
        text.push_str("node D zero\n");
    }
    for (i, routers) in choices.iter().enumerate() {
        text.push_str(&format!("node S{i} zero\n"));
        if !shared_dest {
            text.push_str(&format!("node D{i} zero\n"));
        }
        for &r in routers {
            text.push_str(&format!("edge S{i} R{r}\n"));
        }
    }
    let mut linked = std::collections::BTreeSet::new();
    for (i, routers) in choices.iter().enumerate() {
        for &r in routers {
            if linked.insert((r, dest(i))) {
                text.push_str(&format!("edge R{r} {}\n", dest(i)));
            }
        }
    }
    for (i, n) in packets.iter().enumerate().take(choices.len()) {
        text.push_str(&format!("demand S{i} {} {n}\n", dest(i)));
    }
    text
}

/// Every non-empty subset of `0..n`.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&j| mask & (1 << j) != 0).collect())
        .collect()
}
