//! Drives a simulation with one decision policy per agent and collects
//! costs, per-wave rewards and (for memory-based agents) training sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    fk_decide, ispa_decide, mb_decide, TieBreak, TieBreaker, TrainingExample, TrainingSet,
};
use crate::error::{Error, Result};
use crate::sim::{world_reward, Decisions, Simulator, Trajectory, WaveSchedule};
use crate::topology::{NodeId, Topology};
use crate::utility::wlr;

/// Default number of ISPA waves run before the configured algorithm takes
/// over (memory-based agents collect examples during them).
pub const DEFAULT_BOOTSTRAP_WAVES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Ispa,
    FullKnowledge,
    MemoryBased { steering: f64 },
}

impl Algorithm {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Algorithm::MemoryBased { steering } if !(0.0..=1.0).contains(&steering) => {
                Err(Error::InvalidSteering(steering))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in tables: `ISPA`, `FK`, `MB`.
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Ispa => "ISPA",
            Algorithm::FullKnowledge => "FK",
            Algorithm::MemoryBased { .. } => "MB",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::MemoryBased { steering } => write!(f, "MB({steering})"),
            a => f.write_str(a.label()),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    /// `ispa`, `fk`, `mb` (steering 0) or `mb:<steering>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let algo = match (name, arg) {
            ("ispa", None) => Algorithm::Ispa,
            ("fk", None) => Algorithm::FullKnowledge,
            ("mb", None) => Algorithm::MemoryBased { steering: 0.0 },
            ("mb", Some(a)) => Algorithm::MemoryBased {
                steering: a
                    .parse()
                    .map_err(|_| Error::Experiment(format!("bad steering `{a}`")))?,
            },
            _ => return Err(Error::Experiment(format!("unknown algorithm `{s}`"))),
        };
        algo.validate()?;
        Ok(algo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// One entry per agent (see [`Topology::agents`]); a single entry is
    /// applied to every agent.
    pub policies: Vec<Algorithm>,
    pub bootstrap_waves: usize,
    pub tie_break: TieBreak,
    pub record_trajectory: bool,
}

impl RunConfig {
    pub fn uniform(algorithm: Algorithm) -> Self {
        RunConfig {
            policies: vec![algorithm],
            bootstrap_waves: DEFAULT_BOOTSTRAP_WAVES,
            tie_break: TieBreak::default(),
            record_trajectory: false,
        }
    }

    fn policy(&self, agent: usize) -> Algorithm {
        if self.policies.len() == 1 {
            self.policies[0]
        } else {
            self.policies[agent]
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Cost of the measured waves.
    pub measured_cost: f64,
    /// Packets injected during the measured waves.
    pub measured_packets: u64,
    pub waves_measured: usize,
    pub per_packet_cost: f64,
    /// World reward of every wave, measured or not.
    pub wave_rewards: Vec<f64>,
    pub total_cost: f64,
    pub trajectory: Option<Trajectory>,
    /// Per agent; empty for agents that never used the memory-based rule.
    pub training: Vec<TrainingSet>,
}

/// Runs `schedule.total_waves` waves. Waves before `config.bootstrap_waves`
/// use ISPA for every agent.
pub fn run(
    topology: &Topology,
    schedule: &WaveSchedule,
    config: &RunConfig,
    seed: u64,
) -> Result<RunResult> {
    if topology.demands().is_empty() {
        return Err(Error::NoTraffic);
    }
    let n_agents = topology.agents().len();
    if config.policies.len() != 1 && config.policies.len() != n_agents {
        return Err(Error::Experiment(format!(
            "{} policies for {n_agents} agents",
            config.policies.len()
        )));
    }
    for p in &config.policies {
        p.validate()?;
    }

    let mut tie_rng = ChaCha8Rng::seed_from_u64(seed);
    tie_rng.set_stream(0);
    let mut steer_rng = ChaCha8Rng::seed_from_u64(seed);
    steer_rng.set_stream(1);
    let mut tie = TieBreaker::new(topology, config.tie_break, tie_rng);

    let mut sim = Simulator::new(topology, *schedule)?;
    let m = schedule.waves_in_window() as f64;
    let per_wave: u64 = topology.demands().iter().map(|d| d.packets as u64).sum();

    // Last wave's plan, seeded with the idle-network shortest paths.
    let idle = vec![0.0; topology.len()];
    let mut plan: Vec<NodeId> = Vec::with_capacity(n_agents);
    {
        let mut scratch = tie.clone();
        for &key in topology.agents() {
            plan.push(ispa_decide(topology, key, &idle, &mut scratch)?);
        }
    }

    let mut training = vec![TrainingSet::new(); n_agents];
    let mut trajectory = config
        .record_trajectory
        .then(|| Trajectory::empty(topology, schedule));
    let mut wave_rewards = Vec::with_capacity(schedule.total_waves);
    let mut measured_cost = 0.0;
    let mut measured_packets = 0;

    for wave in 0..schedule.total_waves {
        let bootstrap = wave < config.bootstrap_waves;
        let mut decided: Vec<Option<NodeId>> = vec![None; n_agents];
        let mut pending: Vec<(usize, TrainingExample)> = Vec::new();
        let mut wave_traj = Trajectory::empty(topology, schedule);

        for _ in 0..schedule.wave_len {
            let active = sim.active_agents();
            let observed = sim.observed_loads();
            let snapshot: Vec<NodeId> = (0..n_agents)
                .map(|a| decided[a].unwrap_or(plan[a]))
                .collect();
            let mut fresh = Vec::new();
            for &a in &active {
                if decided[a].is_some() {
                    continue;
                }
                let key = topology.agents()[a];
                let cands = topology.candidates(a);
                let policy = config.policy(a);
                let hop = if cands.len() == 1 {
                    cands[0]
                } else if bootstrap || policy == Algorithm::Ispa {
                    ispa_decide(topology, key, &observed, &mut tie)?
                } else if policy == Algorithm::FullKnowledge {
                    fk_decide(&sim, key, &snapshot, &mut tie)?
                } else {
                    let Algorithm::MemoryBased { steering } = policy else {
                        unreachable!()
                    };
                    let loads: Vec<f64> = cands.iter().map(|&h| observed[h]).collect();
                    let share = sim.agent_traffic(a) as f64 / m;
                    mb_decide(
                        a,
                        cands,
                        &loads,
                        share,
                        &training[a],
                        steering,
                        &mut steer_rng,
                        &mut tie,
                        |tb| fk_decide(&sim, key, &snapshot, tb),
                    )?
                };
                if cands.len() > 1 && matches!(policy, Algorithm::MemoryBased { .. }) {
                    let loads: Vec<f64> = cands.iter().map(|&h| observed[h]).collect();
                    pending.push((
                        a,
                        TrainingExample {
                            agent: key,
                            wave,
                            input: loads,
                            action: hop,
                            outcome: 0.0,
                        },
                    ));
                }
                fresh.push((a, hop));
            }
            for (a, hop) in fresh {
                decided[a] = Some(hop);
                if let Some(idx) = topology.candidates(a).iter().position(|&h| h == hop) {
                    tie.note(a, idx);
                }
            }
            let mut dec = Decisions::new(topology);
            for &a in &active {
                dec.set_slot(a, decided[a].unwrap());
            }
            let rec = sim.step(&dec)?;
            if let Some(tr) = trajectory.as_mut() {
                tr.push(rec.clone());
            }
            wave_traj.push(rec);
        }

        let reward = world_reward(&wave_traj);
        wave_rewards.push(reward);
        for (a, mut ex) in pending {
            let slot = topology.dest_slot(ex.agent.dest).unwrap();
            ex.outcome = wlr(&wave_traj, slot);
            training[a].record_outcome(ex);
        }
        for a in 0..n_agents {
            if let Some(h) = decided[a] {
                plan[a] = h;
            }
        }
        if wave >= schedule.measure_from {
            measured_cost += reward;
            measured_packets += per_wave;
        }
    }

    Ok(RunResult {
        measured_cost,
        measured_packets,
        waves_measured: schedule.measured_waves(),
        per_packet_cost: measured_cost / measured_packets as f64,
        wave_rewards,
        total_cost: sim.total_cost(),
        trajectory,
        training,
    })
}

/// Runs `waves` ISPA waves with memory-based agents recording examples and
/// returns their training sets.
pub fn bootstrap(
    topology: &Topology,
    schedule: &WaveSchedule,
    waves: usize,
    seed: u64,
) -> Result<Vec<TrainingSet>> {
    if waves == 0 {
        return Err(Error::EmptyBootstrap);
    }
    let sched = WaveSchedule::new(schedule.wave_len, schedule.window, 0, waves)?;
    let mut config = RunConfig::uniform(Algorithm::MemoryBased { steering: 0.0 });
    config.bootstrap_waves = waves;
    Ok(run(topology, &sched, &config, seed)?.training)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_topology, ScenarioSpec, Variant};

    const HEX: &str = "
        node S zero
        node P affine 0 10
        node Q affine 50 1
        node R affine 50 1
        node T affine 0 10
        node M affine 10 1
        node D zero
        edge S P
        edge S R
        edge P Q
        edge R T
        edge Q D
        edge T D
        addedge P M
        addedge M T
        demand S D 1
        schedule L=auto W=120
    ";

    fn steady(variant: Variant, n: u32, algo: Algorithm) -> f64 {
        let spec = ScenarioSpec::parse(HEX).unwrap();
        let topo = spec.topology(variant).unwrap().with_loads(&[n]).unwrap();
        let sched = WaveSchedule::resolve(spec.schedule.unwrap(), &topo, 20, 40).unwrap();
        let mut cfg = RunConfig::uniform(algo);
        cfg.bootstrap_waves = 20;
        run(&topo, &sched, &cfg, 3).unwrap().per_packet_cost
    }

    #[test]
    fn ispa_steady_state_costs() {
        for (n, want) in [(1, 55.5), (2, 61.0), (3, 66.5), (4, 72.0)] {
            let got = steady(Variant::A, n, Algorithm::Ispa);
            assert!((got - want).abs() < 1e-9, "A n={n}: {got}");
        }
        for (n, want) in [(1, 31.0), (2, 52.0), (3, 73.0)] {
            let got = steady(Variant::B, n, Algorithm::Ispa);
            assert!((got - want).abs() < 1e-9, "B n={n}: {got}");
        }
    }

    #[test]
    fn fully_steered_memory_equals_full_knowledge() {
        let spec = ScenarioSpec::parse(HEX).unwrap();
        let topo = spec.topology(Variant::B).unwrap().with_loads(&[3]).unwrap();
        let sched = WaveSchedule::resolve(spec.schedule.unwrap(), &topo, 10, 20).unwrap();
        let mut fk = RunConfig::uniform(Algorithm::FullKnowledge);
        fk.bootstrap_waves = 10;
        let mut mb = fk.clone();
        mb.policies = vec![Algorithm::MemoryBased { steering: 1.0 }];
        let a = run(&topo, &sched, &fk, 9).unwrap();
        let b = run(&topo, &sched, &mb, 9).unwrap();
        assert_eq!(a.wave_rewards, b.wave_rewards);
        assert!(!b.training[0].is_empty());
    }

    #[test]
    fn same_seed_same_result() {
        let spec = ScenarioSpec::parse(HEX).unwrap();
        let topo = spec.topology(Variant::B).unwrap().with_loads(&[2]).unwrap();
        let sched = WaveSchedule::resolve(spec.schedule.unwrap(), &topo, 10, 20).unwrap();
        let mut cfg = RunConfig::uniform(Algorithm::MemoryBased { steering: 0.3 });
        cfg.bootstrap_waves = 10;
        cfg.tie_break = TieBreak::Random;
        let a = run(&topo, &sched, &cfg, 5).unwrap();
        let b = run(&topo, &sched, &cfg, 5).unwrap();
        assert_eq!(a.wave_rewards, b.wave_rewards);
    }

    #[test]
    fn errors() {
        let topo = build_topology("node S zero\nnode D zero\nedge S D\ndemand S D 1").unwrap();
        let sched = WaveSchedule::new(1, 1, 0, 1).unwrap();
        assert_eq!(
            bootstrap(&topo, &sched, 0, 1).unwrap_err(),
            Error::EmptyBootstrap
        );
        assert!(matches!(
            "mb:1.5".parse::<Algorithm>(),
            Err(Error::InvalidSteering(_))
        ));
        assert_eq!("fk".parse::<Algorithm>().unwrap(), Algorithm::FullKnowledge);
    }
}
