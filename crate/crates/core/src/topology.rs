//! Router graphs, traffic demands and the line-oriented scenario format.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::cost::LoadToCost;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// A router/destination pair; the unit that makes routing decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentKey {
    pub router: NodeId,
    pub dest: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demand {
    pub source: NodeId,
    pub dest: NodeId,
    /// Packets injected at `source` at the start of every wave.
    pub packets: u32,
}

/// Which link set of a two-variant scenario to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Base network.
    A,
    /// Base network plus the `addedge` links.
    B,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::A => f.write_str("A"),
            Variant::B => f.write_str("B"),
        }
    }
}

/// `L=auto` resolves to the longest demand path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleSpec {
    pub wave_len: Option<usize>,
    pub window: usize,
}

/// Parsed scenario file, before any validation of the graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioSpec {
    pub name: Option<String>,
    pub nodes: Vec<(String, LoadToCost)>,
    pub edges: Vec<(String, String)>,
    pub added_edges: Vec<(String, String)>,
    pub demands: Vec<(String, String, u32)>,
    /// One row per table line; entries align with `demands`.
    pub loads: Vec<Vec<u32>>,
    pub schedule: Option<ScheduleSpec>,
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ScenarioSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "name" => spec.name = Some(tokens[1..].join(" ")),
                "node" => {
                    if tokens.len() < 3 {
                        return Err(err("expected `node <id> <form> <coeffs...>`".into()));
                    }
                    let cost =
                        LoadToCost::from_tokens(&tokens[2..]).map_err(|e| err(e.to_string()))?;
                    if spec.nodes.iter().any(|(n, _)| n == tokens[1]) {
                        return Err(err(format!("duplicate node `{}`", tokens[1])));
                    }
                    spec.nodes.push((tokens[1].to_string(), cost));
                }
                "edge" | "addedge" => {
                    if tokens.len() != 3 {
                        return Err(err(format!("expected `{} <from> <to>`", tokens[0])));
                    }
                    let pair = (tokens[1].to_string(), tokens[2].to_string());
                    if tokens[0] == "edge" {
                        spec.edges.push(pair);
                    } else {
                        spec.added_edges.push(pair);
                    }
                }
                "demand" => {
                    if tokens.len() != 4 {
                        return Err(err("expected `demand <src> <dst> <packets>`".into()));
                    }
                    let packets = parse_packets(tokens[3]).map_err(|e| err(e.to_string()))?;
                    spec.demands
                        .push((tokens[1].to_string(), tokens[2].to_string(), packets));
                }
                "load" => {
                    let row = tokens[1..]
                        .iter()
                        .map(|t| parse_packets(t))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| err(e.to_string()))?;
                    spec.loads.push(row);
                }
                "schedule" => {
                    let mut wave_len = None;
                    let mut window = None;
                    for kv in &tokens[1..] {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected key=value, got `{kv}`")))?;
                        match k {
                            "L" if v == "auto" => wave_len = Some(None),
                            "L" => {
                                let l = v
                                    .parse::<usize>()
                                    .ok()
                                    .filter(|l| *l > 0)
                                    .ok_or_else(|| err(format!("bad L `{v}`")))?;
                                wave_len = Some(Some(l));
                            }
                            "W" => {
                                window = Some(
                                    v.parse::<usize>()
                                        .ok()
                                        .filter(|w| *w > 0)
                                        .ok_or_else(|| err(format!("bad W `{v}`")))?,
                                )
                            }
                            _ => return Err(err(format!("unknown schedule key `{k}`"))),
                        }
                    }
                    spec.schedule = Some(ScheduleSpec {
                        wave_len: wave_len.unwrap_or(None),
                        window: window.ok_or_else(|| err("schedule needs W".into()))?,
                    });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        for row in &spec.loads {
            if row.len() != spec.demands.len() {
                return Err(Error::InvalidDemand(format!(
                    "load row has {} entries for {} demands",
                    row.len(),
                    spec.demands.len()
                )));
            }
        }
        Ok(spec)
    }

    pub fn topology(&self, variant: Variant) -> Result<Topology> {
        let names: Vec<String> = self.nodes.iter().map(|(n, _)| n.clone()).collect();
        let costs: Vec<LoadToCost> = self.nodes.iter().map(|(_, c)| *c).collect();
        let index: HashMap<&str, NodeId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UnknownRouter(n.to_string()))
        };
        let mut links = Vec::new();
        let extra: &[(String, String)] = match variant {
            Variant::A => &[],
            Variant::B => &self.added_edges,
        };
        for (from, to) in self.edges.iter().chain(extra) {
            links.push((lookup(from)?, lookup(to)?));
        }
        let demands = self
            .demands
            .iter()
            .map(|(s, d, p)| {
                Ok(Demand {
                    source: lookup(s)?,
                    dest: lookup(d)?,
                    packets: *p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Topology::new(names, costs, links, demands)
    }
}

fn parse_packets(tok: &str) -> Result<u32> {
    match tok.parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::InvalidDemand(format!(
            "`{tok}` is not a positive integer packet count"
        ))),
    }
}

/// Parses a scenario description and builds the topology with every link,
/// including `addedge` lines.
pub fn build_topology(description: &str) -> Result<Topology> {
    ScenarioSpec::parse(description)?.topology(Variant::B)
}

/// A validated router graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    names: Vec<String>,
    costs: Vec<LoadToCost>,
    succ: Vec<Vec<NodeId>>,
    pred: Vec<Vec<NodeId>>,
    demands: Vec<Demand>,
    dests: Vec<NodeId>,
    dest_slot: Vec<Option<usize>>,
    agents: Vec<AgentKey>,
    candidates: Vec<Vec<NodeId>>,
    agent_slot: HashMap<AgentKey, usize>,
    /// `reaches[slot][n]`: node `n` has a path to destination `dests[slot]`.
    reaches: Vec<Vec<bool>>,
}

impl Topology {
    pub fn new(
        names: Vec<String>,
        costs: Vec<LoadToCost>,
        links: Vec<(NodeId, NodeId)>,
        demands: Vec<Demand>,
    ) -> Result<Self> {
        let n = names.len();
        assert_eq!(n, costs.len());
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in &links {
            if a >= n || b >= n {
                return Err(Error::UnknownRouter(format!("#{}", a.max(b))));
            }
            if !succ[a].contains(&b) {
                succ[a].push(b);
            }
        }

        let mut dests: Vec<NodeId> = Vec::new();
        for d in &demands {
            if d.packets == 0 {
                return Err(Error::InvalidDemand("zero packets per wave".into()));
            }
            if d.source == d.dest {
                return Err(Error::InvalidDemand(format!(
                    "source equals destination `{}`",
                    names[d.source]
                )));
            }
            if !costs[d.dest].is_zero() {
                return Err(Error::InvalidDemand(format!(
                    "destination `{}` must be a zero-cost dummy router",
                    names[d.dest]
                )));
            }
            if !dests.contains(&d.dest) {
                dests.push(d.dest);
            }
        }
        let mut dest_slot = vec![None; n];
        for (i, &d) in dests.iter().enumerate() {
            dest_slot[d] = Some(i);
        }

        let mut pred = vec![Vec::new(); n];
        for (a, out) in succ.iter().enumerate() {
            for &b in out {
                pred[b].push(a);
            }
        }
        let reaches: Vec<Vec<bool>> = dests.iter().map(|&d| flood(&pred, &[d])).collect();

        for d in &demands {
            if !reaches[dest_slot[d.dest].unwrap()][d.source] {
                return Err(Error::Unreachable {
                    src: names[d.source].clone(),
                    dst: names[d.dest].clone(),
                });
            }
        }

        // Per destination: routers that carry its traffic, i.e. reachable from
        // one of its sources and able to reach it.
        let mut agents = Vec::new();
        let mut candidates = Vec::new();
        for (slot, &d) in dests.iter().enumerate() {
            let sources: Vec<NodeId> = demands
                .iter()
                .filter(|x| x.dest == d)
                .map(|x| x.source)
                .collect();
            let from_src = flood(&succ, &sources);
            let relevant: Vec<bool> = (0..n).map(|v| from_src[v] && reaches[slot][v]).collect();
            check_acyclic(&succ, &relevant, &names)?;
            for r in 0..n {
                if !relevant[r] || r == d {
                    continue;
                }
                let hops: Vec<NodeId> = succ[r].iter().copied().filter(|&s| relevant[s]).collect();
                agents.push(AgentKey { router: r, dest: d });
                candidates.push(hops);
            }
        }
        let agent_slot = agents.iter().enumerate().map(|(i, a)| (*a, i)).collect();

        Ok(Topology {
            names,
            costs,
            succ,
            pred,
            demands,
            dests,
            dest_slot,
            agents,
            candidates,
            agent_slot,
            reaches,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cost(&self, id: NodeId) -> &LoadToCost {
        &self.costs[id]
    }

    pub fn costs(&self) -> &[LoadToCost] {
        &self.costs
    }

    pub fn successors(&self, id: NodeId) -> &[NodeId] {
        &self.succ[id]
    }

    pub fn predecessors(&self, id: NodeId) -> &[NodeId] {
        &self.pred[id]
    }

    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, out)| out.iter().map(move |&b| (a, b)))
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    /// Same graph with the per-wave packet counts replaced, in demand order.
    pub fn with_loads(&self, loads: &[u32]) -> Result<Topology> {
        if loads.len() != self.demands.len() {
            return Err(Error::InvalidDemand(format!(
                "{} loads for {} demands",
                loads.len(),
                self.demands.len()
            )));
        }
        if loads.contains(&0) {
            return Err(Error::InvalidDemand("zero packets per wave".into()));
        }
        let mut t = self.clone();
        for (d, &p) in t.demands.iter_mut().zip(loads) {
            d.packets = p;
        }
        Ok(t)
    }

    /// Same graph with every cost function multiplied by `factor`.
    pub fn with_scaled_costs(&self, factor: f64) -> Topology {
        let mut t = self.clone();
        for c in &mut t.costs {
            *c = c.scaled(factor);
        }
        t
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.dests
    }

    pub fn dest_slot(&self, d: NodeId) -> Option<usize> {
        self.dest_slot[d]
    }

    /// Every router/destination pair that can carry traffic.
    pub fn agents(&self) -> &[AgentKey] {
        &self.agents
    }

    pub fn agent_slot(&self, key: AgentKey) -> Option<usize> {
        self.agent_slot.get(&key).copied()
    }

    /// Next hops of `agent` that lie on a path to its destination.
    pub fn candidates(&self, agent: usize) -> &[NodeId] {
        &self.candidates[agent]
    }

    /// Agents with more than one candidate next hop.
    pub fn decision_points(&self) -> impl Iterator<Item = AgentKey> + '_ {
        self.agents
            .iter()
            .zip(&self.candidates)
            .filter(|(_, c)| c.len() > 1)
            .map(|(a, _)| *a)
    }

    pub fn can_reach(&self, from: NodeId, dest: NodeId) -> bool {
        self.dest_slot[dest]
            .map(|s| self.reaches[s][from])
            .unwrap_or(false)
    }

    /// Longest hop count over all demand paths; the minimal wave length that
    /// drains every wave.
    pub fn longest_path_length(&self) -> usize {
        let mut best = 0;
        for d in &self.demands {
            let slot = self.dest_slot[d.dest].unwrap();
            let mut memo: Vec<Option<usize>> = vec![None; self.len()];
            best = best.max(self.longest_from(d.source, d.dest, slot, &mut memo));
        }
        best
    }

    fn longest_from(
        &self,
        v: NodeId,
        dest: NodeId,
        slot: usize,
        memo: &mut Vec<Option<usize>>,
    ) -> usize {
        if v == dest {
            return 0;
        }
        if let Some(x) = memo[v] {
            return x;
        }
        let mut best = 0;
        for &s in &self.succ[v] {
            if self.reaches[slot][s] {
                best = best.max(1 + self.longest_from(s, dest, slot, memo));
            }
        }
        memo[v] = Some(best);
        best
    }

    /// Scenario text for this topology (nodes, links, demands).
    pub fn to_scenario_text(&self) -> String {
        let mut out = String::new();
        for (name, cost) in self.names.iter().zip(&self.costs) {
            writeln!(out, "node {name} {cost}").unwrap();
        }
        for (a, b) in self.links() {
            writeln!(out, "edge {} {}", self.names[a], self.names[b]).unwrap();
        }
        for d in &self.demands {
            writeln!(
                out,
                "demand {} {} {}",
                self.names[d.source], self.names[d.dest], d.packets
            )
            .unwrap();
        }
        out
    }
}

fn flood(adj: &[Vec<NodeId>], start: &[NodeId]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<NodeId> = start.to_vec();
    for &s in start {
        seen[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

fn check_acyclic(succ: &[Vec<NodeId>], keep: &[bool], names: &[String]) -> Result<()> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; succ.len()];
    for root in 0..succ.len() {
        if !keep[root] || color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if !keep[w] {
                    continue;
                }
                match color[w] {
                    0 => {
                        color[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return Err(Error::Cycle(names[w].clone())),
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}
