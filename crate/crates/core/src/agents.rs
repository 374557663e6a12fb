//! Decision rules for router/destination agents: ideal shortest path (ISPA),
//! full-knowledge WLR minimization (FK) and the memory-based nearest-neighbor
//! learner (MB) with FK steering.
//!
//! Rewards here are costs: an agent prefers the hop with the *lowest*
//! predicted wonderful-life reward.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::{wlr_step_term, Decisions, Simulator};
use crate::topology::{AgentKey, NodeId, Topology};

/// How equal-cost candidates are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// The tied hop this agent used least recently (never-used first, then
    /// candidate order).
    #[default]
    LeastRecent,
    /// Uniform among tied hops, from the run's seeded stream.
    Random,
}

/// Per-run tie-breaking state.
#[derive(Debug, Clone)]
pub struct TieBreaker {
    mode: TieBreak,
    clock: u64,
    last_used: Vec<Vec<u64>>,
    rng: ChaCha8Rng,
}

impl TieBreaker {
    pub fn new(topology: &Topology, mode: TieBreak, rng: ChaCha8Rng) -> Self {
        let last_used = (0..topology.agents().len())
            .map(|a| vec![0; topology.candidates(a).len()])
            .collect();
        TieBreaker {
            mode,
            clock: 0,
            last_used,
            rng,
        }
    }

    /// Picks one of `tied` (candidate indices of `agent`).
    pub fn pick(&mut self, agent: usize, tied: &[usize]) -> usize {
        debug_assert!(!tied.is_empty());
        if tied.len() == 1 {
            return tied[0];
        }
        match self.mode {
            TieBreak::LeastRecent => *tied
                .iter()
                .min_by_key(|&&i| (self.last_used[agent][i], i))
                .unwrap(),
            TieBreak::Random => tied[self.rng.gen_range(0..tied.len())],
        }
    }

    /// Records that `agent` routed through candidate index `idx`.
    pub fn note(&mut self, agent: usize, idx: usize) {
        self.clock += 1;
        self.last_used[agent][idx] = self.clock;
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Cost of the cheapest path from every router to `dest` when crossing
/// router `r` costs `node_cost[r]`, own cost included. Dijkstra on the
/// reversed graph.
pub fn cost_to_dest(topology: &Topology, dest: NodeId, node_cost: &[f64]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; topology.len()];
    let mut heap = BinaryHeap::new();
    dist[dest] = node_cost[dest];
    heap.push(Reverse((Dist(dist[dest]), dest)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &u in topology.predecessors(v) {
            let nd = node_cost[u] + d;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((Dist(nd), u)));
            }
        }
    }
    dist
}

/// Indices whose value is within rounding of the minimum.
pub fn argmin_ties(values: &[f64]) -> Vec<usize> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * min.abs().max(1.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= min + tol)
        .map(|(i, _)| i)
        .collect()
}

/// Path cost to the destination through each candidate hop, with every
/// router's cost frozen at `V_r(observed[r])`.
pub fn ispa_scores(topology: &Topology, agent: usize, observed: &[f64]) -> Vec<f64> {
    let key = topology.agents()[agent];
    let node_cost: Vec<f64> = topology
        .costs()
        .iter()
        .zip(observed)
        .map(|(c, &z)| c.eval_unchecked(z.max(0.0)))
        .collect();
    let dist = cost_to_dest(topology, key.dest, &node_cost);
    topology
        .candidates(agent)
        .iter()
        .map(|&h| dist[h])
        .collect()
}

/// Ideal shortest path: first hop of a cheapest path under frozen loads.
pub fn ispa_decide(
    topology: &Topology,
    key: AgentKey,
    observed: &[f64],
    tie: &mut TieBreaker,
) -> Result<NodeId> {
    let agent = slot_of(topology, key)?;
    let scores = ispa_scores(topology, agent, observed);
    let tied = argmin_ties(&scores);
    if tied.is_empty() || !scores[tied[0]].is_finite() {
        return Err(no_path(topology, key));
    }
    Ok(topology.candidates(agent)[tie.pick(agent, &tied)])
}

fn slot_of(topology: &Topology, key: AgentKey) -> Result<usize> {
    topology
        .agent_slot(key)
        .ok_or_else(|| no_path(topology, key))
}

fn no_path(topology: &Topology, key: AgentKey) -> Error {
    Error::Unreachable {
        src: topology.name(key.router).to_string(),
        dst: topology.name(key.dest).to_string(),
    }
}

/// Predicted WLR of the rest of the current wave for each candidate hop of
/// `agent`, every other agent following `plans`.
pub fn fk_scores(sim: &Simulator<'_>, agent: usize, plans: &[NodeId]) -> Result<Vec<f64>> {
    let topo = sim.topology();
    let key = topo.agents()[agent];
    let slot = topo.dest_slot(key.dest).unwrap();
    let sched = *sim.schedule();
    let end = (sim.wave() + 1) * sched.wave_len;
    let mut scores = Vec::with_capacity(topo.candidates(agent).len());
    for &hop in topo.candidates(agent) {
        let mut plan = plans.to_vec();
        plan[agent] = hop;
        let mut ahead = sim.clone();
        let mut total = 0.0;
        loop {
            let mut dec = Decisions::new(topo);
            for a in ahead.active_agents() {
                dec.set_slot(a, plan[a]);
            }
            ahead.step(&dec)?;
            if ahead.time() >= end {
                break;
            }
            total += wlr_step_term(
                topo.costs(),
                topo.destinations().len(),
                sched.waves_in_window(),
                &ahead.current_record(),
                slot,
            );
        }
        scores.push(total);
    }
    Ok(scores)
}

/// Full-knowledge COIN: the hop minimizing the exactly predicted WLR.
pub fn fk_decide(
    sim: &Simulator<'_>,
    key: AgentKey,
    plans: &[NodeId],
    tie: &mut TieBreaker,
) -> Result<NodeId> {
    let topo = sim.topology();
    let agent = slot_of(topo, key)?;
    let cands = topo.candidates(agent);
    match cands.len() {
        0 => return Err(no_path(topo, key)),
        1 => return Ok(cands[0]),
        _ => {}
    }
    let scores = fk_scores(sim, agent, plans)?;
    let tied = argmin_ties(&scores);
    Ok(cands[tie.pick(agent, &tied)])
}

/// One scored routing decision.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub agent: AgentKey,
    /// Wave the decision was made in.
    pub wave: usize,
    /// Windowed loads of the candidate hops, with the agent's own traffic
    /// for one wave added on the chosen hop.
    pub input: Vec<f64>,
    pub action: NodeId,
    /// WLR of the wave.
    pub outcome: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    examples: Vec<TrainingExample>,
}

impl TrainingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[TrainingExample] {
        &self.examples
    }

    /// Appends an example; later queries see it.
    pub fn record_outcome(&mut self, example: TrainingExample) {
        debug_assert!(example.outcome.is_finite());
        self.examples.push(example);
    }

    /// Nearest stored example (Euclidean over inputs), optionally restricted
    /// to one action. Earliest example wins exact ties.
    pub fn nearest(&self, input: &[f64], action: Option<NodeId>) -> Option<&TrainingExample> {
        let mut best: Option<(f64, &TrainingExample)> = None;
        for ex in &self.examples {
            if action.is_some_and(|a| a != ex.action) {
                continue;
            }
            let d2: f64 = ex
                .input
                .iter()
                .zip(input)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if best.is_none_or(|(bd, _)| d2 < bd) {
                best = Some((d2, ex));
            }
        }
        best.map(|(_, ex)| ex)
    }
}

/// Candidate-hop loads with `share` added to component `chosen`.
pub fn hypothetical_input(loads: &[f64], share: f64, chosen: usize) -> Vec<f64> {
    let mut v = loads.to_vec();
    v[chosen] += share;
    v
}

/// Nearest-neighbor WLR estimate for each candidate hop.
pub fn mb_estimates(
    training: &TrainingSet,
    candidates: &[NodeId],
    loads: &[f64],
    share: f64,
) -> Vec<f64> {
    candidates
        .iter()
        .enumerate()
        .map(|(i, &hop)| {
            let input = hypothetical_input(loads, share, i);
            training
                .nearest(&input, Some(hop))
                .or_else(|| training.nearest(&input, None))
                .map_or(f64::INFINITY, |ex| ex.outcome)
        })
        .collect()
}

/// Memory-based COIN. With probability `steering` (or when nothing has been
/// learned yet) the decision is delegated to `fk`.
#[allow(clippy::too_many_arguments)]
pub fn mb_decide<R: Rng, F: FnOnce(&mut TieBreaker) -> Result<NodeId>>(
    agent: usize,
    candidates: &[NodeId],
    loads: &[f64],
    share: f64,
    training: &TrainingSet,
    steering: f64,
    rng: &mut R,
    tie: &mut TieBreaker,
    fk: F,
) -> Result<NodeId> {
    let delegate = rng.gen_bool(steering.clamp(0.0, 1.0));
    if delegate || training.is_empty() {
        return fk(tie);
    }
    let est = mb_estimates(training, candidates, loads, share);
    let tied = argmin_ties(&est);
    Ok(candidates[tie.pick(agent, &tied)])
}
