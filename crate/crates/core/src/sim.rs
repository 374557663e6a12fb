//! Deterministic wave dynamics: injection, forwarding, windowed loads and
//! cost accrual.
//!
//! Windowed loads are kept as exact integer sums over the last `W` steps.
//! A router's windowed load is that sum divided by `W / L`, i.e. the packets
//! it handled per wave, averaged over the waves in the window.

use crate::cost::LoadToCost;
use crate::error::{Error, Result};
use crate::topology::{AgentKey, NodeId, ScheduleSpec, Topology};

/// Default number of measured waves.
pub const DEFAULT_MEASURED_WAVES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveSchedule {
    pub wave_len: usize,
    pub window: usize,
    /// First wave whose cost is measured.
    pub measure_from: usize,
    pub total_waves: usize,
}

impl WaveSchedule {
    pub fn new(
        wave_len: usize,
        window: usize,
        measure_from: usize,
        total_waves: usize,
    ) -> Result<Self> {
        if wave_len == 0 {
            return Err(Error::InvalidSchedule("L must be positive".into()));
        }
        if window == 0 || !window.is_multiple_of(wave_len) {
            return Err(Error::InvalidSchedule(format!(
                "W = {window} is not a positive multiple of L = {wave_len}"
            )));
        }
        if measure_from >= total_waves {
            return Err(Error::InvalidSchedule(format!(
                "measurement starts at wave {measure_from} of {total_waves}"
            )));
        }
        Ok(WaveSchedule {
            wave_len,
            window,
            measure_from,
            total_waves,
        })
    }

    /// Resolves `L=auto`, skips `preamble` waves plus one full window of
    /// warm-up, then measures `measured` waves.
    pub fn resolve(
        spec: ScheduleSpec,
        topology: &Topology,
        preamble: usize,
        measured: usize,
    ) -> Result<Self> {
        let longest = topology.longest_path_length();
        let wave_len = spec.wave_len.unwrap_or(longest);
        if wave_len < longest {
            return Err(Error::InvalidSchedule(format!(
                "L = {wave_len} shorter than the longest demand path ({longest})"
            )));
        }
        if spec.window == 0 || !spec.window.is_multiple_of(wave_len) {
            return Err(Error::InvalidSchedule(format!(
                "W = {} is not a positive multiple of L = {wave_len}",
                spec.window
            )));
        }
        let warmup = spec.window / wave_len;
        let measure_from = preamble + warmup;
        WaveSchedule::new(wave_len, spec.window, measure_from, measure_from + measured)
    }

    pub fn waves_in_window(&self) -> usize {
        self.window / self.wave_len
    }

    pub fn wave_of(&self, t: usize) -> usize {
        t / self.wave_len
    }

    pub fn measured_waves(&self) -> usize {
        self.total_waves - self.measure_from
    }
}

/// How an agent forwards its traffic during one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    Hop(NodeId),
    Split(Vec<(NodeId, u32)>),
}

/// Routing decisions for one step, indexed by agent.
#[derive(Debug, Clone)]
pub struct Decisions {
    routes: Vec<Option<Route>>,
}

impl Decisions {
    pub fn new(topology: &Topology) -> Self {
        Decisions {
            routes: vec![None; topology.agents().len()],
        }
    }

    pub fn set_hop(&mut self, topology: &Topology, key: AgentKey, hop: NodeId) -> Result<()> {
        let slot = agent_slot(topology, key)?;
        self.routes[slot] = Some(Route::Hop(hop));
        Ok(())
    }

    pub fn set_split(
        &mut self,
        topology: &Topology,
        key: AgentKey,
        split: Vec<(NodeId, u32)>,
    ) -> Result<()> {
        let slot = agent_slot(topology, key)?;
        self.routes[slot] = Some(Route::Split(split));
        Ok(())
    }

    pub fn set_slot(&mut self, slot: usize, hop: NodeId) {
        self.routes[slot] = Some(Route::Hop(hop));
    }

    pub fn get(&self, slot: usize) -> Option<&Route> {
        self.routes[slot].as_ref()
    }
}

fn agent_slot(topology: &Topology, key: AgentKey) -> Result<usize> {
    topology.agent_slot(key).ok_or_else(|| Error::DeadEnd {
        router: topology.name(key.router).to_string(),
        dest: topology.name(key.dest).to_string(),
        hop: "-".into(),
    })
}

/// Traffic and window sums observed at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// `x[r][d]`, flattened as `r * dests + slot`.
    pub traffic: Vec<u32>,
    /// Sum of `x[r][d]` over the last `W` steps, same layout.
    pub window: Vec<u64>,
}

/// Recorded dynamics: everything the world utility depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) costs: Vec<LoadToCost>,
    pub(crate) dests: usize,
    pub(crate) waves_in_window: usize,
    pub(crate) wave_len: usize,
    pub(crate) steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn empty(topology: &Topology, schedule: &WaveSchedule) -> Self {
        Trajectory {
            costs: topology.costs().to_vec(),
            dests: topology.destinations().len(),
            waves_in_window: schedule.waves_in_window(),
            wave_len: schedule.wave_len,
            steps: Vec::new(),
        }
    }

    /// Builds a trajectory from raw records; used for hand-made snapshots.
    pub fn from_parts(
        costs: Vec<LoadToCost>,
        dests: usize,
        wave_len: usize,
        waves_in_window: usize,
        steps: Vec<StepRecord>,
    ) -> Self {
        Trajectory {
            costs,
            dests,
            waves_in_window,
            wave_len,
            steps,
        }
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn nodes(&self) -> usize {
        self.costs.len()
    }

    pub fn dests(&self) -> usize {
        self.dests
    }

    pub fn costs(&self) -> &[LoadToCost] {
        &self.costs
    }

    pub fn waves_in_window(&self) -> usize {
        self.waves_in_window
    }

    pub fn wave_len(&self) -> usize {
        self.wave_len
    }

    pub fn traffic(&self, step: usize, r: NodeId, d: usize) -> u32 {
        self.steps[step].traffic[r * self.dests + d]
    }

    /// Instantaneous load `z_r`.
    pub fn load(&self, step: usize, r: NodeId) -> u64 {
        let row = &self.steps[step].traffic[r * self.dests..(r + 1) * self.dests];
        row.iter().map(|&x| x as u64).sum()
    }

    /// Windowed per-destination load `X_{r,d}`.
    pub fn windowed(&self, step: usize, r: NodeId, d: usize) -> f64 {
        self.steps[step].window[r * self.dests + d] as f64 / self.waves_in_window as f64
    }

    /// Windowed load `Z_r`.
    pub fn windowed_load(&self, step: usize, r: NodeId) -> f64 {
        let row = &self.steps[step].window[r * self.dests..(r + 1) * self.dests];
        row.iter().sum::<u64>() as f64 / self.waves_in_window as f64
    }

    /// The steps of wave `k` (by absolute time).
    pub fn wave(&self, k: usize) -> Trajectory {
        let lo = k * self.wave_len;
        let hi = lo + self.wave_len;
        Trajectory {
            steps: self
                .steps
                .iter()
                .filter(|s| s.t >= lo && s.t < hi)
                .cloned()
                .collect(),
            ..self.clone_header()
        }
    }

    pub(crate) fn clone_header(&self) -> Trajectory {
        Trajectory {
            costs: self.costs.clone(),
            dests: self.dests,
            waves_in_window: self.waves_in_window,
            wave_len: self.wave_len,
            steps: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: StepRecord) {
        self.steps.push(rec);
    }

    /// Wave indices present in the trajectory, ascending.
    pub fn waves(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.steps.iter().map(|s| s.t / self.wave_len).collect();
        w.dedup();
        w
    }
}

/// Cost accrued at one step: `sum_r z_r V_r(Z_r)`.
pub(crate) fn step_cost(costs: &[LoadToCost], dests: usize, m: usize, rec: &StepRecord) -> f64 {
    let mut total = 0.0;
    for (r, cost) in costs.iter().enumerate() {
        let row = r * dests..(r + 1) * dests;
        let z: u64 = rec.traffic[row.clone()].iter().map(|&x| x as u64).sum();
        if z == 0 {
            continue;
        }
        let zw: u64 = rec.window[row].iter().sum();
        total += z as f64 * cost.eval_unchecked(zw as f64 / m as f64);
    }
    total
}

/// World reward of one wave: `sum_{t in wave} sum_{r,d} x_{r,d} V_r(sum_d' X_{r,d'})`.
pub fn world_reward(wave: &Trajectory) -> f64 {
    wave.steps
        .iter()
        .map(|rec| step_cost(&wave.costs, wave.dests, wave.waves_in_window, rec))
        .sum()
}

/// World utility over a whole trajectory, summed step by step over `(t, r)`.
pub fn world_utility(trajectory: &Trajectory) -> f64 {
    let m = trajectory.waves_in_window as f64;
    let mut total = 0.0;
    for i in 0..trajectory.steps.len() {
        for r in 0..trajectory.nodes() {
            let z = trajectory.load(i, r);
            if z > 0 {
                let zw: u64 = (0..trajectory.dests)
                    .map(|d| trajectory.steps[i].window[r * trajectory.dests + d])
                    .sum();
                total += z as f64 * trajectory.costs[r].eval_unchecked(zw as f64 / m);
            }
        }
    }
    total
}

/// Deterministic wave simulator.
///
/// Between calls to [`Simulator::step`] the simulator sits at time `t` with
/// the traffic `x(t)` in place and the window already including it; the
/// window as of `t - 1` is kept for decision makers.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    topo: &'a Topology,
    sched: WaveSchedule,
    dests: usize,
    t: usize,
    traffic: Vec<u32>,
    ring: Vec<u32>,
    window: Vec<u64>,
    prev_node_window: Vec<u64>,
    total_cost: f64,
    injected: u64,
    delivered: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(topo: &'a Topology, sched: WaveSchedule) -> Result<Self> {
        if sched.wave_len < topo.longest_path_length() {
            return Err(Error::InvalidSchedule(format!(
                "L = {} shorter than the longest demand path ({})",
                sched.wave_len,
                topo.longest_path_length()
            )));
        }
        let dests = topo.destinations().len();
        let cells = topo.len() * dests;
        let mut sim = Simulator {
            topo,
            sched,
            dests,
            t: 0,
            traffic: vec![0; cells],
            ring: vec![0; cells * sched.window],
            window: vec![0; cells],
            prev_node_window: vec![0; topo.len()],
            total_cost: 0.0,
            injected: 0,
            delivered: 0,
        };
        sim.inject();
        sim.push_window();
        Ok(sim)
    }

    pub fn topology(&self) -> &'a Topology {
        self.topo
    }

    pub fn schedule(&self) -> &WaveSchedule {
        &self.sched
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn wave(&self) -> usize {
        self.sched.wave_of(self.t)
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn injected(&self) -> u64 {
        self.injected
    }

    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    pub fn traffic(&self, r: NodeId, slot: usize) -> u32 {
        self.traffic[r * self.dests + slot]
    }

    /// Current traffic of an agent.
    pub fn agent_traffic(&self, agent: usize) -> u32 {
        let key = self.topo.agents()[agent];
        let slot = self.topo.dest_slot(key.dest).unwrap();
        self.traffic(key.router, slot)
    }

    /// Windowed loads `Z_r(t)` including the current step.
    pub fn windowed_loads(&self) -> Vec<f64> {
        let m = self.sched.waves_in_window() as f64;
        (0..self.topo.len())
            .map(|r| self.node_window(r) as f64 / m)
            .collect()
    }

    /// Windowed loads `Z_r(t - 1)`, what routers observe when deciding.
    pub fn observed_loads(&self) -> Vec<f64> {
        let m = self.sched.waves_in_window() as f64;
        self.prev_node_window
            .iter()
            .map(|&s| s as f64 / m)
            .collect()
    }

    pub fn windowed(&self, r: NodeId, slot: usize) -> f64 {
        self.window[r * self.dests + slot] as f64 / self.sched.waves_in_window() as f64
    }

    fn node_window(&self, r: NodeId) -> u64 {
        self.window[r * self.dests..(r + 1) * self.dests]
            .iter()
            .sum()
    }

    pub fn current_record(&self) -> StepRecord {
        StepRecord {
            t: self.t,
            traffic: self.traffic.clone(),
            window: self.window.clone(),
        }
    }

    /// Agents holding traffic at the current step.
    pub fn active_agents(&self) -> Vec<usize> {
        self.topo
            .agents()
            .iter()
            .enumerate()
            .filter(|(_, k)| {
                let slot = self.topo.dest_slot(k.dest).unwrap();
                self.traffic(k.router, slot) > 0
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn inject(&mut self) {
        for d in self.topo.demands() {
            let slot = self.topo.dest_slot(d.dest).unwrap();
            self.traffic[d.source * self.dests + slot] += d.packets;
            self.injected += d.packets as u64;
        }
    }

    fn push_window(&mut self) {
        for r in 0..self.topo.len() {
            self.prev_node_window[r] = self.node_window(r);
        }
        let cells = self.traffic.len();
        let pos = (self.t % self.sched.window) * cells;
        for i in 0..cells {
            self.window[i] -= self.ring[pos + i] as u64;
            self.ring[pos + i] = self.traffic[i];
            self.window[i] += self.traffic[i] as u64;
        }
    }

    /// Accrues the cost of step `t`, forwards all traffic per `decisions`,
    /// and moves to `t + 1`. Returns the record of step `t`.
    pub fn step(&mut self, decisions: &Decisions) -> Result<StepRecord> {
        let topo = self.topo;
        let mut next = vec![0u32; self.traffic.len()];
        let mut delivered = 0u64;
        for (slot_agent, key) in topo.agents().iter().enumerate() {
            let slot = topo.dest_slot(key.dest).unwrap();
            let amount = self.traffic[key.router * self.dests + slot];
            if amount == 0 {
                continue;
            }
            let name = |n: NodeId| topo.name(n).to_string();
            let route = decisions
                .get(slot_agent)
                .ok_or_else(|| Error::MissingDecision {
                    router: name(key.router),
                    dest: name(key.dest),
                })?;
            let single;
            let parts: &[(NodeId, u32)] = match route {
                Route::Hop(h) => {
                    single = [(*h, amount)];
                    &single
                }
                Route::Split(parts) => {
                    let got: u64 = parts.iter().map(|p| p.1 as u64).sum();
                    if got != amount as u64 {
                        return Err(Error::SplitMismatch {
                            router: name(key.router),
                            dest: name(key.dest),
                            got,
                            expected: amount as u64,
                        });
                    }
                    parts
                }
            };
            for &(hop, n) in parts {
                let ok =
                    topo.successors(key.router).contains(&hop) && topo.can_reach(hop, key.dest);
                if !ok {
                    return Err(Error::DeadEnd {
                        router: name(key.router),
                        dest: name(key.dest),
                        hop: name(hop),
                    });
                }
                if hop == key.dest {
                    delivered += n as u64;
                } else {
                    next[hop * self.dests + slot] += n;
                }
            }
        }

        let rec = self.current_record();
        self.total_cost += step_cost(topo.costs(), self.dests, self.sched.waves_in_window(), &rec);
        self.delivered += delivered;
        self.traffic = next;
        self.t += 1;
        if self.t.is_multiple_of(self.sched.wave_len) {
            if self.traffic.iter().any(|&x| x > 0) {
                return Err(Error::WaveNotDrained(self.sched.wave_of(self.t - 1)));
            }
            self.inject();
        }
        self.push_window();
        Ok(rec)
    }
}

/// Closed-form WLR contribution of one step for destination slot `d`:
/// `sum_r [ z V(Z) - (z - x_d) V(Z - X_d) ]`.
pub(crate) fn wlr_step_term(
    costs: &[LoadToCost],
    dests: usize,
    m: usize,
    rec: &StepRecord,
    d: usize,
) -> f64 {
    let mut total = 0.0;
    let m = m as f64;
    for (r, cost) in costs.iter().enumerate() {
        let row = r * dests..(r + 1) * dests;
        let z: u64 = rec.traffic[row.clone()].iter().map(|&x| x as u64).sum();
        if z == 0 {
            continue;
        }
        let zw: u64 = rec.window[row].iter().sum();
        let xd = rec.traffic[r * dests + d] as u64;
        let xwd = rec.window[r * dests + d];
        let full = z as f64 * cost.eval_unchecked(zw as f64 / m);
        let rest = if z > xd {
            (z - xd) as f64 * cost.eval_unchecked((zw - xwd) as f64 / m)
        } else {
            0.0
        };
        total += full - rest;
    }
    total
}
