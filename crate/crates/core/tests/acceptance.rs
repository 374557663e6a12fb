//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! By default the process exits 0 even when a criterion fails, so that the
//! workspace test run reports the outcome without aborting. Set
//! `COIN_ACCEPTANCE_STRICT=1` to exit nonzero on any failure.

mod common;

use std::time::{Duration, Instant};

use coin_routing::games::{greedy_joint, one_shot, second_choice_joint, CongestionGame};
use coin_routing::harness::{
    braess_report, run_scenario, BraessFlag, ResultTable, Scenario, BRAESS_TOLERANCE,
};
use coin_routing::lb::{
    argmin_upper, lower_bound, simulate_threshold, solve_klb, upper_bound, verdict, ThresholdModel,
};
use coin_routing::runner::Algorithm;
use coin_routing::utility::{
    effect_set_wlu, exhaustive_probe, wlr, EffectSetSpec, OneWaveRouting, PrivateUtility,
};
use coin_routing::{build_topology, world_reward, world_utility, LoadToCost, Result, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn scenario(name: &str) -> Result<Scenario> {
    Scenario::load(format!(
        "{}/scenarios/{name}.scn",
        env!("CARGO_MANIFEST_DIR")
    ))
}

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn worked_example() -> Result<Outcome> {
    let ca = LoadToCost::power(1.0, 2.0)?;
    let cb = LoadToCost::affine(0.0, 1.0)?;
    let r = verdict(&ca, &cb, 1000)?;
    let w = 1000.0;
    let pass = close(r.k_lb / w, 0.618, 1e-3)
        && close(r.k_prime / w, 0.548, 1e-3)
        && close(r.lb_lower_bound, 0.380, 1e-3)
        && close(r.opt_upper_bound, 0.371, 1e-3)
        && r.suboptimal;
    Ok(Outcome::new(
        pass,
        format!(
            "k_LB/W={:.4} k'/W={:.4} lower={:.4} upper={:.4} suboptimal={}",
            r.k_lb / w,
            r.k_prime / w,
            r.lb_lower_bound,
            r.opt_upper_bound,
            r.suboptimal
        ),
    ))
}

fn random_monotone(r: &mut ChaCha8Rng) -> Result<LoadToCost> {
    match r.gen_range(0..3) {
        0 => LoadToCost::affine(r.gen_range(0.0..0.5), r.gen_range(0.5..3.0)),
        1 => LoadToCost::power(r.gen_range(0.5..3.0), r.gen_range(1..=3) as f64),
        _ => LoadToCost::affine_log(r.gen_range(0.0..0.5), r.gen_range(0.5..3.0)),
    }
}

fn threshold_oracle() -> Result<Outcome> {
    const W: usize = 1000;
    const STEPS: usize = 100_000;
    let mut pairs = vec![(LoadToCost::power(1.0, 2.0)?, LoadToCost::affine(0.0, 1.0)?)];
    let mut r = ChaCha8Rng::seed_from_u64(2);
    while pairs.len() < 11 {
        let (ca, cb) = (random_monotone(&mut r)?, random_monotone(&mut r)?);
        if solve_klb(&ca, &cb, W).is_ok() {
            pairs.push((ca, cb));
        }
    }
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for (ca, cb) in &pairs {
        let k_lb = solve_klb(ca, cb, W)?;
        let (k_prime, _) = argmin_upper(ca, cb, W)?;
        for k in [k_lb, k_prime] {
            let lo = lower_bound(ca, cb, W, k)?;
            let hi = upper_bound(ca, cb, W, k)?;
            let model = ThresholdModel::new(*ca, *cb, W, k)?;
            let avg = simulate_threshold(&model, STEPS)?.average;
            // margin to the nearer bound, negative when outside
            worst = worst.min((avg - (lo - 1e-3)).min(hi + 1e-3 - avg));
            checked += 1;
        }
    }
    Ok(Outcome::new(
        worst >= 0.0,
        format!("{checked} (pair, k) cases, smallest margin {worst:.2e}"),
    ))
}

fn braess_equilibria() -> Result<Outcome> {
    let s = scenario("braess-figure2")?;
    let mut got = Vec::new();
    for (variant, travelers) in [
        (Variant::A, 1),
        (Variant::A, 6),
        (Variant::B, 1),
        (Variant::B, 6),
    ] {
        let game = CongestionGame::from_topology(&s.spec.topology(variant)?)?;
        got.push(game.best_response_equilibrium(travelers)?.traveler_costs);
    }
    let all = |v: &[f64], x: f64| v.iter().all(|&c| c == x);
    let pass = got[0] == [61.0] && all(&got[1], 83.0) && got[2] == [31.0] && all(&got[3], 92.0);
    Ok(Outcome::new(
        pass,
        format!(
            "A1={:?} A6={:?} B1={:?} B6={:?}",
            got[0], got[1], got[2], got[3]
        ),
    ))
}

fn shared_link() -> Result<Outcome> {
    let s = scenario("two-router-shared-link")?;
    let system = OneWaveRouting::new(s.spec.topology(Variant::A)?);
    let greedy = one_shot(&system, &greedy_joint(&system))?;
    let alt = one_shot(&system, &second_choice_joint(&system))?;
    let pass = greedy.costs == [4.0, 4.0]
        && greedy.total() == 8.0
        && alt.costs == [2.0, 2.0]
        && alt.total() == 4.0;
    Ok(Outcome::new(
        pass,
        format!(
            "greedy {:?} total {}, alternates {:?} total {}",
            greedy.costs,
            greedy.total(),
            alt.costs,
            alt.total()
        ),
    ))
}

fn hex_ispa() -> Result<Outcome> {
    let s = scenario("hex-linear")?
        .with_algorithms(vec![Algorithm::Ispa])
        .with_seeds(1);
    let table = run_scenario(&s)?;
    let want = [
        (Variant::A, 1, 55.5),
        (Variant::A, 2, 61.0),
        (Variant::A, 3, 66.5),
        (Variant::A, 4, 72.0),
        (Variant::B, 1, 31.0),
        (Variant::B, 2, 52.0),
        (Variant::B, 3, 73.0),
    ];
    let mut pass = s.measured_waves >= 200;
    let mut cells = Vec::new();
    for (v, load, x) in want {
        let got = cell(&table, &[load], v, "ISPA")?;
        pass &= close(got, x, 0.5);
        cells.push(format!("{v}{load}={got:.2}"));
    }
    Ok(Outcome::new(pass, cells.join(" ")))
}

fn cell(table: &ResultTable, load: &[u32], v: Variant, algo: &str) -> Result<f64> {
    table
        .get(load, v, algo)
        .map(|r| r.mean)
        .ok_or_else(|| coin_routing::Error::Experiment(format!("missing {load:?} {v} {algo}")))
}

fn braess_flags() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    let ispa = |name: &str| -> Result<Vec<(Vec<u32>, BraessFlag)>> {
        let s = scenario(name)?
            .with_algorithms(vec![Algorithm::Ispa])
            .with_seeds(SEEDS);
        let report = braess_report(&run_scenario(&s)?, BRAESS_TOLERANCE)?;
        Ok(report.into_iter().map(|e| (e.load, e.flag)).collect())
    };

    let hex = ispa("hex-linear")?;
    let ok = hex
        .iter()
        .filter(|(l, _)| l[0] >= 3)
        .all(|(_, f)| *f == BraessFlag::Paradox);
    pass &= ok;
    notes.push(format!("ISPA hex-linear load>=3 paradox: {ok}"));

    let bootes = ispa("bootes2")?;
    let n = bootes
        .iter()
        .filter(|(_, f)| *f == BraessFlag::Paradox)
        .count();
    pass &= n >= 3;
    notes.push(format!("ISPA bootes2 paradox rows: {n}/{}", bootes.len()));

    let fig2 = ispa("braess-figure2")?;
    let ok = fig2
        .iter()
        .any(|(l, f)| l == &[6] && *f == BraessFlag::Paradox);
    pass &= ok;
    notes.push(format!("ISPA braess-figure2 6 travelers paradox: {ok}"));

    for name in ["hex-linear", "hex-log"] {
        let s = scenario(name)?
            .with_algorithms(vec![Algorithm::MemoryBased { steering: 0.5 }])
            .with_seeds(SEEDS);
        let report = braess_report(&run_scenario(&s)?, BRAESS_TOLERANCE)?;
        let bad: Vec<String> = report
            .iter()
            .filter(|e| e.flag == BraessFlag::Paradox)
            .map(|e| format!("load {:?} A {:.2} B {:.2}", e.load, e.cost_a, e.cost_b))
            .collect();
        pass &= bad.is_empty();
        notes.push(if bad.is_empty() {
            format!("MB(0.5) {name}: no paradox")
        } else {
            format!("MB(0.5) {name} paradox at {}", bad.join(", "))
        });
    }
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn steering_endpoints() -> Result<Outcome> {
    let mut notes = Vec::new();
    let ray = scenario("ray")?;
    let load = [4, 4];

    let mut identical = true;
    for (s, v, l) in [(&ray, Variant::A, &load[..]), (&ray, Variant::B, &load[..])] {
        for seed in 0..SEEDS as u64 {
            let mb = s.run_one(v, l, Algorithm::MemoryBased { steering: 1.0 }, seed)?;
            let fk = s.run_one(v, l, Algorithm::FullKnowledge, seed)?;
            identical &= mb.per_packet_cost.to_bits() == fk.per_packet_cost.to_bits();
        }
    }
    notes.push(format!(
        "MB(1.0) == FK bitwise over {SEEDS} seeds: {identical}"
    ));

    let mut s = ray.clone().with_seeds(SEEDS);
    s.spec.loads = vec![load.to_vec()];
    let mut algorithms = vec![Algorithm::Ispa];
    let steering = [0.0, 0.25, 0.5, 0.75, 1.0];
    algorithms.extend(
        steering
            .iter()
            .map(|&x| Algorithm::MemoryBased { steering: x }),
    );
    let table = run_scenario(&s.with_algorithms(algorithms))?;
    let ispa = cell(&table, &load, Variant::B, "ISPA")?;
    let mut pass = identical;
    let mut costs = vec![format!("ISPA={ispa:.2}")];
    for x in steering {
        let label = Algorithm::MemoryBased { steering: x }.to_string();
        let c = cell(&table, &load, Variant::B, &label)?;
        pass &= if x == 0.0 { c > ispa } else { c < ispa };
        costs.push(format!("{label}={c:.2}"));
    }
    notes.push(format!("ray {load:?} net B: {}", costs.join(" ")));
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn factoredness() -> Result<Outcome> {
    let pools: [[&str; 3]; 2] = [
        ["affine 0 1", "affine 1 2", "affine 3 0.5"],
        ["power 1 2", "affine 2 1", "affine-log 0 4"],
    ];
    let mut systems = 0;
    let mut swaps = 0;
    let mut mismatches = 0;
    let subsets = common::subsets(3);
    for agents in 1..=3usize {
        let mut idx = vec![0usize; agents];
        loop {
            let choices: Vec<Vec<usize>> = idx.iter().map(|&i| subsets[i].clone()).collect();
            for pool in &pools {
                for shared in [false, true] {
                    let text = common::small_system_text(&choices, &vec![1; agents], pool, shared);
                    let system = OneWaveRouting::new(build_topology(&text)?);
                    for u in [PrivateUtility::ExactEffectSetWlu, PrivateUtility::Team] {
                        for rec in exhaustive_probe(&system, u)? {
                            swaps += 1;
                            mismatches += usize::from(!rec.agrees());
                        }
                    }
                    systems += 1;
                }
            }
            // next structure
            let mut i = 0;
            while i < agents {
                idx[i] += 1;
                if idx[i] < subsets.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == agents {
                break;
            }
        }
    }

    let weak = OneWaveRouting::new(build_topology(WEAKLY_TRIVIAL)?);
    let violations = exhaustive_probe(&weak, PrivateUtility::OwnTraffic)?
        .iter()
        .filter(|r| !r.agrees())
        .count();
    Ok(Outcome::new(
        mismatches == 0 && violations >= 1,
        format!(
            "{systems} systems, {swaps} swaps, {mismatches} WLU/team mismatches; \
             own-traffic utility violations: {violations}"
        ),
    ))
}

const WEAKLY_TRIVIAL: &str = "
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
";

fn model_identities() -> Result<Outcome> {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let mut worst = [0.0f64; 3];
    let mut conserved = true;
    for _ in 0..100 {
        let topo = common::random_topology(&mut r);
        let m = r.gen_range(1..=3);
        let (traj, delivered) = common::random_run(&topo, m, 6, &mut r);
        let per_wave: u64 = topo.demands().iter().map(|d| d.packets as u64).sum();
        for (k, &got) in delivered.iter().enumerate() {
            conserved &= got == (k as u64 + 1) * per_wave;
        }
        let w = traj.wave_len() * m;
        for i in 0..traj.steps().len() {
            for node in 0..traj.nodes() {
                for d in 0..traj.dests() {
                    let sum: u64 = (i.saturating_sub(w - 1)..=i)
                        .map(|j| traj.traffic(j, node, d) as u64)
                        .sum();
                    let err = (traj.windowed(i, node, d) - sum as f64 / m as f64).abs();
                    worst[0] = worst[0].max(err);
                }
            }
        }
        let by_wave: f64 = traj
            .waves()
            .into_iter()
            .map(|k| world_reward(&traj.wave(k)))
            .sum();
        worst[1] = worst[1].max((world_utility(&traj) - by_wave).abs());
        for k in traj.waves() {
            for d in 0..traj.dests() {
                let clamped = effect_set_wlu(&traj, &EffectSetSpec::new(d, k))?;
                worst[2] = worst[2].max((wlr(&traj.wave(k), d) - clamped).abs());
            }
        }
    }
    Ok(Outcome::new(
        conserved && worst[0] <= 1e-12 && worst[1] <= 1e-9 && worst[2] <= 1e-9,
        format!(
            "100 snapshots: conservation {conserved}, window err {:.1e}, G-sum err {:.1e}, \
             closed-form vs clamp err {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    ))
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("load-balancing worked example", 1, worked_example),
        ("threshold simulator within bounds", 30, threshold_oracle),
        ("Braess equilibria", 1, braess_equilibria),
        ("shared-link instance", 1, shared_link),
        ("Hex ISPA steady states", 10, hex_ispa),
        ("Braess flags", 300, braess_flags),
        ("steering endpoints", 300, steering_endpoints),
        ("factoredness suite", 10, factoredness),
        ("model identities", 10, model_identities),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {}: {} {name} ({:.2}s, limit {limit}s) {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var_os("COIN_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
