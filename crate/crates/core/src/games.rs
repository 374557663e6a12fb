//! Static one-shot routing games: travelers picking whole paths under
//! best-response dynamics, and single-wave instances run through the
//! simulator.

use crate::agents::{argmin_ties, ispa_scores};
use crate::cost::LoadToCost;
use crate::error::{Error, Result};
use crate::sim::Trajectory;
use crate::topology::{NodeId, Topology};
use crate::utility::{destination_cost, OneWaveRouting, SmallSystem};

/// Travelers from one source to one destination, each choosing a whole
/// path; a traveler on router `r` pays `V_r(travelers on r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionGame {
    costs: Vec<LoadToCost>,
    paths: Vec<Vec<NodeId>>,
}

/// A pure-strategy equilibrium reached by best-response moves.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Travelers per path.
    pub counts: Vec<u32>,
    /// Per-traveler cost of each path at the equilibrium.
    pub path_costs: Vec<f64>,
    /// Cost of every traveler, in arrival order.
    pub traveler_costs: Vec<f64>,
}

impl Equilibrium {
    pub fn total_cost(&self) -> f64 {
        self.traveler_costs.iter().sum()
    }
}

impl CongestionGame {
    pub fn new(costs: Vec<LoadToCost>, paths: Vec<Vec<NodeId>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Experiment("game without paths".into()));
        }
        if let Some(&r) = paths.iter().flatten().find(|&&r| r >= costs.len()) {
            return Err(Error::UnknownRouter(r.to_string()));
        }
        Ok(CongestionGame { costs, paths })
    }

    /// All paths of the topology's first demand.
    pub fn from_topology(topology: &Topology) -> Result<Self> {
        let demand = topology.demands().first().ok_or(Error::NoTraffic)?;
        let mut paths = Vec::new();
        let mut stack = vec![vec![demand.source]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if last == demand.dest {
                paths.push(path);
                continue;
            }
            for &next in topology.successors(last).iter().rev() {
                if topology.can_reach(next, demand.dest) {
                    let mut p = path.clone();
                    p.push(next);
                    stack.push(p);
                }
            }
        }
        CongestionGame::new(topology.costs().to_vec(), paths)
    }

    pub fn paths(&self) -> &[Vec<NodeId>] {
        &self.paths
    }

    fn loads(&self, counts: &[u32]) -> Vec<u32> {
        let mut load = vec![0; self.costs.len()];
        for (p, &c) in self.paths.iter().zip(counts) {
            for &r in p {
                load[r] += c;
            }
        }
        load
    }

    /// Per-traveler cost of each path when `counts` travelers use them.
    pub fn path_costs(&self, counts: &[u32]) -> Vec<f64> {
        let load = self.loads(counts);
        self.paths
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&r| self.costs[r].eval_unchecked(load[r] as f64))
                    .sum()
            })
            .collect()
    }

    /// Cost of moving one traveler from `from` to `to`.
    fn cost_after_move(&self, counts: &[u32], from: Option<usize>, to: usize) -> f64 {
        let mut c = counts.to_vec();
        if let Some(f) = from {
            c[f] -= 1;
        }
        c[to] += 1;
        self.path_costs(&c)[to]
    }

    /// Travelers arrive one at a time, each taking its cheapest path given
    /// those already present; then travelers keep switching to a strictly
    /// cheaper path until nobody can. Ties go to the lowest path index.
    pub fn best_response_equilibrium(&self, travelers: u32) -> Result<Equilibrium> {
        let k = self.paths.len();
        let mut counts = vec![0u32; k];
        let mut choice = Vec::with_capacity(travelers as usize);
        for _ in 0..travelers {
            let best = (0..k)
                .map(|p| (self.cost_after_move(&counts, None, p), p))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .unwrap()
                .1;
            counts[best] += 1;
            choice.push(best);
        }
        let max_rounds = 1000;
        for _ in 0..max_rounds {
            let mut moved = false;
            for slot in choice.iter_mut() {
                let cur = *slot;
                let now = self.path_costs(&counts)[cur];
                let mut best = (now, cur);
                for p in (0..k).filter(|&p| p != cur) {
                    let c = self.cost_after_move(&counts, Some(cur), p);
                    if c < best.0 - 1e-12 {
                        best = (c, p);
                    }
                }
                if best.1 != cur {
                    counts[cur] -= 1;
                    counts[best.1] += 1;
                    *slot = best.1;
                    moved = true;
                }
            }
            if !moved {
                let path_costs = self.path_costs(&counts);
                let traveler_costs = choice.iter().map(|&p| path_costs[p]).collect();
                return Ok(Equilibrium {
                    counts,
                    path_costs,
                    traveler_costs,
                });
            }
        }
        Err(Error::Experiment(format!(
            "best-response dynamics did not settle in {max_rounds} rounds"
        )))
    }
}

/// Per-destination costs of one wave in which every decision point picks a
/// fixed candidate index.
#[derive(Debug, Clone, PartialEq)]
pub struct OneShot {
    pub joint: Vec<usize>,
    /// Cost of the traffic bound for each destination slot.
    pub costs: Vec<f64>,
    pub trajectory: Trajectory,
}

impl OneShot {
    pub fn total(&self) -> f64 {
        self.costs.iter().sum()
    }
}

pub fn one_shot(system: &OneWaveRouting, joint: &[usize]) -> Result<OneShot> {
    let trajectory = system.simulate(joint)?;
    let costs = (0..system.topology().destinations().len())
        .map(|d| destination_cost(&trajectory, d))
        .collect();
    Ok(OneShot {
        joint: joint.to_vec(),
        costs,
        trajectory,
    })
}

/// What every decision point picks with ISPA on an idle network: nobody
/// sees the others' traffic before committing.
pub fn greedy_joint(system: &OneWaveRouting) -> Vec<usize> {
    let topo = system.topology();
    let idle = vec![0.0; topo.len()];
    (0..topo.agents().len())
        .filter(|&a| topo.candidates(a).len() > 1)
        .map(|a| argmin_ties(&ispa_scores(topo, a, &idle))[0])
        .collect()
}

/// Every decision point takes its idle-network second choice.
pub fn second_choice_joint(system: &OneWaveRouting) -> Vec<usize> {
    let topo = system.topology();
    let idle = vec![0.0; topo.len()];
    (0..topo.agents().len())
        .filter(|&a| topo.candidates(a).len() > 1)
        .map(|a| {
            let scores = ispa_scores(topo, a, &idle);
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)));
            order[1]
        })
        .collect()
}
