//! Counterfactual utilities: the clamping operator, wonderful-life utility
//! (WLU), the per-wave wonderful-life reward (WLR) and factoredness probes.

use std::collections::HashSet;

use crate::cost::LoadToCost;
use crate::error::{Error, Result};
use crate::sim::{wlr_step_term, Decisions, Simulator, Trajectory, WaveSchedule};
use crate::topology::Topology;

/// One component of the recorded state. `dest` is a destination slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    /// `x_{r,d}(t)`
    Traffic {
        t: usize,
        router: usize,
        dest: usize,
    },
    /// `X_{r,d}(t)`
    Windowed {
        t: usize,
        router: usize,
        dest: usize,
    },
}

/// Read access to traffic and windowed loads, step by step.
pub trait LoadView {
    fn steps(&self) -> usize;
    fn nodes(&self) -> usize;
    fn dests(&self) -> usize;
    fn cost(&self, r: usize) -> &LoadToCost;
    fn traffic(&self, i: usize, r: usize, d: usize) -> f64;
    fn windowed(&self, i: usize, r: usize, d: usize) -> f64;
}

impl LoadView for Trajectory {
    fn steps(&self) -> usize {
        Trajectory::steps(self).len()
    }
    fn nodes(&self) -> usize {
        Trajectory::nodes(self)
    }
    fn dests(&self) -> usize {
        Trajectory::dests(self)
    }
    fn cost(&self, r: usize) -> &LoadToCost {
        &self.costs()[r]
    }
    fn traffic(&self, i: usize, r: usize, d: usize) -> f64 {
        Trajectory::traffic(self, i, r, d) as f64
    }
    fn windowed(&self, i: usize, r: usize, d: usize) -> f64 {
        Trajectory::windowed(self, i, r, d)
    }
}

/// Evaluates `G = sum_{t,r,d} x_{r,d}(t) V_r(sum_d' X_{r,d'}(t))` on any view.
pub fn utility_of<V: LoadView + ?Sized>(view: &V) -> f64 {
    let mut total = 0.0;
    for i in 0..view.steps() {
        for r in 0..view.nodes() {
            let x: f64 = (0..view.dests()).map(|d| view.traffic(i, r, d)).sum();
            if x == 0.0 {
                continue;
            }
            let load: f64 = (0..view.dests()).map(|d| view.windowed(i, r, d)).sum();
            total += x * view.cost(r).eval_unchecked(load.max(0.0));
        }
    }
    total
}

/// A trajectory with a set of coordinates read as 0. Nothing is re-simulated.
#[derive(Debug, Clone)]
pub struct ClampedView<'a> {
    base: &'a Trajectory,
    traffic: HashSet<(usize, usize, usize)>,
    windowed: HashSet<(usize, usize, usize)>,
}

impl ClampedView<'_> {
    pub fn base(&self) -> &Trajectory {
        self.base
    }

    pub fn clamped_len(&self) -> usize {
        self.traffic.len() + self.windowed.len()
    }
}

impl LoadView for ClampedView<'_> {
    fn steps(&self) -> usize {
        self.base.steps().len()
    }
    fn nodes(&self) -> usize {
        self.base.nodes()
    }
    fn dests(&self) -> usize {
        self.base.dests()
    }
    fn cost(&self, r: usize) -> &LoadToCost {
        &self.base.costs()[r]
    }
    fn traffic(&self, i: usize, r: usize, d: usize) -> f64 {
        if self.traffic.contains(&(i, r, d)) {
            0.0
        } else {
            self.base.traffic(i, r, d) as f64
        }
    }
    fn windowed(&self, i: usize, r: usize, d: usize) -> f64 {
        if self.windowed.contains(&(i, r, d)) {
            0.0
        } else {
            self.base.windowed(i, r, d)
        }
    }
}

/// Clamps the coordinates in `sigma` to 0.
pub fn clamp<'a>(trajectory: &'a Trajectory, sigma: &[Coord]) -> Result<ClampedView<'a>> {
    let mut view = ClampedView {
        base: trajectory,
        traffic: HashSet::new(),
        windowed: HashSet::new(),
    };
    for &c in sigma {
        let (t, r, d) = match c {
            Coord::Traffic { t, router, dest } | Coord::Windowed { t, router, dest } => {
                (t, router, dest)
            }
        };
        let i = step_index(trajectory, t)
            .filter(|_| r < trajectory.nodes() && d < trajectory.dests())
            .ok_or_else(|| Error::CoordinateOutOfRange(format!("{c:?}")))?;
        match c {
            Coord::Traffic { .. } => view.traffic.insert((i, r, d)),
            Coord::Windowed { .. } => view.windowed.insert((i, r, d)),
        };
    }
    Ok(view)
}

fn step_index(trajectory: &Trajectory, t: usize) -> Option<usize> {
    trajectory.steps().binary_search_by_key(&t, |s| s.t).ok()
}

/// Wonderful-life utility `G(z) - G(CL_sigma(z))`.
pub fn wlu(trajectory: &Trajectory, sigma: &[Coord]) -> Result<f64> {
    let clamped = clamp(trajectory, sigma)?;
    Ok(utility_of(trajectory) - utility_of(&clamped))
}

/// Every coordinate of the trajectory.
pub fn all_coords(trajectory: &Trajectory) -> Vec<Coord> {
    let mut out = Vec::new();
    for s in trajectory.steps() {
        for router in 0..trajectory.nodes() {
            for dest in 0..trajectory.dests() {
                out.push(Coord::Traffic {
                    t: s.t,
                    router,
                    dest,
                });
                out.push(Coord::Windowed {
                    t: s.t,
                    router,
                    dest,
                });
            }
        }
    }
    out
}

/// Estimated effect set of any agent routing toward `dest` during `wave`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectSetSpec {
    pub dest: usize,
    pub wave: usize,
    /// Also clamp `X_{r,d}` over the following `W/L - 1` waves.
    pub include_future_window: bool,
}

impl EffectSetSpec {
    pub fn new(dest: usize, wave: usize) -> Self {
        EffectSetSpec {
            dest,
            wave,
            include_future_window: false,
        }
    }

    /// Coordinates of the set that exist in `trajectory`.
    pub fn coords(&self, trajectory: &Trajectory) -> Vec<Coord> {
        let l = trajectory.wave_len();
        let horizon = if self.include_future_window {
            trajectory.waves_in_window()
        } else {
            1
        };
        let mut out = Vec::new();
        for s in trajectory.steps() {
            let k = s.t / l;
            if k < self.wave || k >= self.wave + horizon {
                continue;
            }
            for router in 0..trajectory.nodes() {
                if k == self.wave {
                    out.push(Coord::Traffic {
                        t: s.t,
                        router,
                        dest: self.dest,
                    });
                }
                out.push(Coord::Windowed {
                    t: s.t,
                    router,
                    dest: self.dest,
                });
            }
        }
        out
    }
}

/// WLU for an estimated effect set.
pub fn effect_set_wlu(trajectory: &Trajectory, spec: &EffectSetSpec) -> Result<f64> {
    wlu(trajectory, &spec.coords(trajectory))
}

/// Wave-indexed wonderful-life reward for destination slot `dest`:
/// the cost of the wave minus the cost it would have with all of
/// `dest`'s traffic and windowed load removed. Lower is better.
pub fn wlr(wave: &Trajectory, dest: usize) -> f64 {
    wave.steps()
        .iter()
        .map(|rec| {
            wlr_step_term(
                wave.costs(),
                wave.dests(),
                wave.waves_in_window(),
                rec,
                dest,
            )
        })
        .sum()
}

/// A system small enough to re-simulate every joint action.
pub trait SmallSystem {
    fn agents(&self) -> usize;
    fn actions(&self, agent: usize) -> usize;
    fn simulate(&self, joint: &[usize]) -> Result<Trajectory>;
    /// Destination slot of the traffic `agent` routes.
    fn dest_slot(&self, agent: usize) -> usize;
}

/// One wave of a routing network where each decision point picks a fixed
/// next hop. Windows span exactly one wave.
#[derive(Debug, Clone)]
pub struct OneWaveRouting {
    topology: Topology,
    deciders: Vec<usize>,
}

impl OneWaveRouting {
    pub fn new(topology: Topology) -> Self {
        let deciders = (0..topology.agents().len())
            .filter(|&a| topology.candidates(a).len() > 1)
            .collect();
        OneWaveRouting { topology, deciders }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
}

impl SmallSystem for OneWaveRouting {
    fn agents(&self) -> usize {
        self.deciders.len()
    }

    fn actions(&self, agent: usize) -> usize {
        self.topology.candidates(self.deciders[agent]).len()
    }

    fn simulate(&self, joint: &[usize]) -> Result<Trajectory> {
        let topo = &self.topology;
        let l = topo.longest_path_length();
        let sched = WaveSchedule::new(l, l, 0, 1)?;
        let mut sim = Simulator::new(topo, sched)?;
        let mut traj = Trajectory::empty(topo, &sched);
        let mut choice: Vec<usize> = vec![0; topo.agents().len()];
        for (i, &a) in self.deciders.iter().enumerate() {
            choice[a] = joint[i];
        }
        for _ in 0..l {
            let mut dec = Decisions::new(topo);
            for a in sim.active_agents() {
                dec.set_slot(a, topo.candidates(a)[choice[a]]);
            }
            traj.push(sim.step(&dec)?);
        }
        Ok(traj)
    }

    fn dest_slot(&self, agent: usize) -> usize {
        let key = self.topology.agents()[self.deciders[agent]];
        self.topology.dest_slot(key.dest).unwrap()
    }
}

/// Private utility assigned to each agent by a probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivateUtility {
    /// Every agent gets the world utility.
    Team,
    /// WLU of the agent's exact effect set.
    ExactEffectSetWlu,
    /// Cost incurred by the traffic bound for the agent's destination only;
    /// these sum to the world utility (weakly trivial).
    OwnTraffic,
}

/// Cost incurred by the traffic bound for destination slot `dest`.
pub fn destination_cost(trajectory: &Trajectory, dest: usize) -> f64 {
    let m = trajectory.waves_in_window() as f64;
    trajectory
        .steps()
        .iter()
        .map(|rec| {
            (0..trajectory.nodes())
                .map(|r| {
                    let x = rec.traffic[r * trajectory.dests() + dest];
                    if x == 0 {
                        return 0.0;
                    }
                    let zsum: u64 = rec.window
                        [r * trajectory.dests()..(r + 1) * trajectory.dests()]
                        .iter()
                        .sum();
                    x as f64 * trajectory.costs()[r].eval_unchecked(zsum as f64 / m)
                })
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignRecord {
    pub agent: usize,
    pub joint: Vec<usize>,
    pub alternative: usize,
    pub delta_private: f64,
    pub delta_world: f64,
}

impl SignRecord {
    pub fn agrees(&self) -> bool {
        sign(self.delta_private) == sign(self.delta_world)
    }
}

fn sign(x: f64) -> i8 {
    if x > 1e-9 {
        1
    } else if x < -1e-9 {
        -1
    } else {
        0
    }
}

/// Coordinates that change with `agent`'s action while everyone else holds
/// `joint`.
pub fn exact_effect_set<S: SmallSystem + ?Sized>(
    system: &S,
    agent: usize,
    joint: &[usize],
) -> Result<Vec<Coord>> {
    let mut runs = Vec::new();
    for a in 0..system.actions(agent) {
        let mut j = joint.to_vec();
        j[agent] = a;
        runs.push(system.simulate(&j)?);
    }
    let base = &runs[0];
    let mut sigma = Vec::new();
    for c in all_coords(base) {
        let read = |t: &Trajectory| -> f64 {
            match c {
                Coord::Traffic {
                    t: time,
                    router,
                    dest,
                } => {
                    let i = step_index(t, time).unwrap();
                    t.traffic(i, router, dest) as f64
                }
                Coord::Windowed {
                    t: time,
                    router,
                    dest,
                } => {
                    let i = step_index(t, time).unwrap();
                    t.windowed(i, router, dest)
                }
            }
        };
        let v0 = read(base);
        if runs[1..].iter().any(|r| read(r) != v0) {
            sigma.push(c);
        }
    }
    Ok(sigma)
}

/// Compares the private and world utility changes of one unilateral swap.
pub fn factoredness_probe<S: SmallSystem + ?Sized>(
    system: &S,
    agent: usize,
    joint: &[usize],
    alternative: usize,
    utility: PrivateUtility,
) -> Result<SignRecord> {
    let before = system.simulate(joint)?;
    let mut alt = joint.to_vec();
    alt[agent] = alternative;
    let after = system.simulate(&alt)?;
    let delta_world = utility_of(&after) - utility_of(&before);
    let delta_private = match utility {
        PrivateUtility::Team => delta_world,
        PrivateUtility::ExactEffectSetWlu => {
            let sigma = exact_effect_set(system, agent, joint)?;
            wlu(&after, &sigma)? - wlu(&before, &sigma)?
        }
        PrivateUtility::OwnTraffic => {
            let d = system.dest_slot(agent);
            destination_cost(&after, d) - destination_cost(&before, d)
        }
    };
    Ok(SignRecord {
        agent,
        joint: joint.to_vec(),
        alternative,
        delta_private,
        delta_world,
    })
}

/// Probes every unilateral swap from every joint action.
pub fn exhaustive_probe<S: SmallSystem + ?Sized>(
    system: &S,
    utility: PrivateUtility,
) -> Result<Vec<SignRecord>> {
    let sizes: Vec<usize> = (0..system.agents()).map(|a| system.actions(a)).collect();
    let mut out = Vec::new();
    for joint in joint_actions(&sizes) {
        for agent in 0..sizes.len() {
            for alt in 0..sizes[agent] {
                if alt != joint[agent] {
                    out.push(factoredness_probe(system, agent, &joint, alt, utility)?);
                }
            }
        }
    }
    Ok(out)
}

/// All joint actions for the given per-agent action counts.
pub fn joint_actions(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}
