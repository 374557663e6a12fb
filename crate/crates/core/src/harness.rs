//! Multi-seed experiment batches over scenario files: result tables,
//! Braess classification and steering sweeps.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::agents::TieBreak;
use crate::error::{Error, Result};
use crate::runner::{run, Algorithm, RunConfig, RunResult, DEFAULT_BOOTSTRAP_WAVES};
use crate::sim::{WaveSchedule, DEFAULT_MEASURED_WAVES};
use crate::topology::{ScenarioSpec, Topology, Variant};
use crate::utility::wlr;

pub const DEFAULT_SEEDS: usize = 20;
/// Cost difference below which adding links counts as neutral.
pub const BRAESS_TOLERANCE: f64 = 0.5;

/// A scenario file plus the batch settings used to run it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub bootstrap_waves: usize,
    pub measured_waves: usize,
    pub tie_break: TieBreak,
}

impl Scenario {
    /// Defaults: ISPA and MB(0.5), seeds `0..20`.
    pub fn from_spec(spec: ScenarioSpec) -> Result<Self> {
        if spec.schedule.is_none() {
            return Err(Error::InvalidSchedule(
                "scenario has no schedule line".into(),
            ));
        }
        // both variants must build
        spec.topology(Variant::A)?;
        spec.topology(Variant::B)?;
        Ok(Scenario {
            name: spec.name.clone().unwrap_or_else(|| "scenario".into()),
            spec,
            algorithms: vec![Algorithm::Ispa, Algorithm::MemoryBased { steering: 0.5 }],
            seeds: (0..DEFAULT_SEEDS as u64).collect(),
            bootstrap_waves: DEFAULT_BOOTSTRAP_WAVES,
            measured_waves: DEFAULT_MEASURED_WAVES,
            tie_break: TieBreak::default(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Scenario::from_spec(ScenarioSpec::parse(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut s = Scenario::parse(&text)?;
        if s.spec.name.is_none() {
            if let Some(stem) = path.file_stem() {
                s.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(s)
    }

    pub fn with_algorithms(mut self, algorithms: Vec<Algorithm>) -> Self {
        self.algorithms = algorithms;
        self
    }

    pub fn with_seeds(mut self, n: usize) -> Self {
        self.seeds = (0..n as u64).collect();
        self
    }

    /// Table rows: the `load` lines, or the file's demand amounts if none.
    pub fn load_rows(&self) -> Vec<Vec<u32>> {
        if self.spec.loads.is_empty() {
            vec![self.spec.demands.iter().map(|d| d.2).collect()]
        } else {
            self.spec.loads.clone()
        }
    }

    /// Topology of one variant carrying one load row.
    pub fn topology(&self, variant: Variant, load: &[u32]) -> Result<Topology> {
        self.spec.topology(variant)?.with_loads(load)
    }

    pub fn schedule(&self, topology: &Topology) -> Result<WaveSchedule> {
        let spec = self
            .spec
            .schedule
            .ok_or_else(|| Error::InvalidSchedule("scenario has no schedule line".into()))?;
        WaveSchedule::resolve(spec, topology, self.bootstrap_waves, self.measured_waves)
    }

    pub fn config(&self, algorithm: Algorithm) -> RunConfig {
        let mut c = RunConfig::uniform(algorithm);
        c.bootstrap_waves = self.bootstrap_waves;
        c.tie_break = self.tie_break;
        c
    }

    /// One run of one cell.
    pub fn run_one(
        &self,
        variant: Variant,
        load: &[u32],
        algorithm: Algorithm,
        seed: u64,
    ) -> Result<RunResult> {
        let topo = self.topology(variant, load)?;
        let sched = self.schedule(&topo)?;
        run(&topo, &sched, &self.config(algorithm), seed)
    }
}

/// One run, as serialized to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario: String,
    pub variant: Variant,
    pub algorithm: String,
    pub load: Vec<u32>,
    pub seed: u64,
    pub per_packet_cost: f64,
    pub waves_measured: usize,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str =
        "scenario,variant,algorithm,demand,seed,per_packet_cost,waves_measured";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.scenario,
            self.variant,
            self.algorithm,
            format_load(&self.load),
            self.seed,
            self.per_packet_cost,
            self.waves_measured
        )
    }
}

pub fn format_load(load: &[u32]) -> String {
    load.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_load(s: &str) -> Result<Vec<u32>> {
    s.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Experiment(format!("bad load `{s}`")))
        })
        .collect()
}

/// Runs every (load row, variant, algorithm, seed) of the scenario.
pub fn run_records(scenario: &Scenario) -> Result<Vec<RunRecord>> {
    if scenario.algorithms.is_empty() {
        return Err(Error::Experiment("empty algorithm roster".into()));
    }
    if scenario.seeds.is_empty() {
        return Err(Error::Experiment("no seeds".into()));
    }
    let mut jobs = Vec::new();
    for load in scenario.load_rows() {
        for variant in [Variant::A, Variant::B] {
            for &algo in &scenario.algorithms {
                algo.validate()?;
                for &seed in &scenario.seeds {
                    jobs.push((load.clone(), variant, algo, seed));
                }
            }
        }
    }
    jobs.into_par_iter()
        .map(|(load, variant, algo, seed)| {
            let r = scenario.run_one(variant, &load, algo, seed)?;
            Ok(RunRecord {
                scenario: scenario.name.clone(),
                variant,
                algorithm: algo.to_string(),
                load,
                seed,
                per_packet_cost: r.per_packet_cost,
                waves_measured: r.waves_measured,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub load: Vec<u32>,
    pub variant: Variant,
    pub algorithm: String,
    pub mean: f64,
    /// Sample standard deviation (0 for a single seed).
    pub std: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            _ => Err(Error::Experiment(format!("unknown format `{s}`"))),
        }
    }
}

impl ResultTable {
    pub const CSV_HEADER: &'static str = "load,variant,algorithm,mean,std,seeds";

    /// Aggregates per (load, variant, algorithm); rows sorted by load row
    /// order of first appearance, then variant, then algorithm order.
    pub fn from_records(records: &[RunRecord]) -> ResultTable {
        let mut keys: Vec<(Vec<u32>, Variant, String)> = Vec::new();
        for r in records {
            let k = (r.load.clone(), r.variant, r.algorithm.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let load_order: Vec<Vec<u32>> = keys.iter().fold(Vec::new(), |mut acc, k| {
            if !acc.contains(&k.0) {
                acc.push(k.0.clone());
            }
            acc
        });
        let algo_order: Vec<String> = keys.iter().fold(Vec::new(), |mut acc, k| {
            if !acc.contains(&k.2) {
                acc.push(k.2.clone());
            }
            acc
        });
        keys.sort_by_key(|k| {
            (
                load_order.iter().position(|l| *l == k.0),
                k.1,
                algo_order.iter().position(|a| *a == k.2),
            )
        });
        let rows = keys
            .into_iter()
            .map(|(load, variant, algorithm)| {
                let mut costs: Vec<(u64, f64)> = records
                    .iter()
                    .filter(|r| r.load == load && r.variant == variant && r.algorithm == algorithm)
                    .map(|r| (r.seed, r.per_packet_cost))
                    .collect();
                costs.sort_by_key(|c| c.0);
                let v: Vec<f64> = costs.into_iter().map(|c| c.1).collect();
                let (mean, std) = mean_std(&v);
                ResultRow {
                    load,
                    variant,
                    algorithm,
                    mean,
                    std,
                    seeds: v.len(),
                }
            })
            .collect();
        ResultTable { rows }
    }

    pub fn get(&self, load: &[u32], variant: Variant, algorithm: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.load == load && r.variant == variant && r.algorithm == algorithm)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                format_load(&r.load),
                r.variant,
                r.algorithm,
                r.mean,
                r.std,
                r.seeds
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == Self::CSV_HEADER => {}
            _ => return Err(Error::Experiment("missing result table header".into())),
        }
        let bad = |line: &str| Error::Experiment(format!("bad result row `{line}`"));
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(line));
            }
            let variant = match f[1] {
                "A" => Variant::A,
                "B" => Variant::B,
                _ => return Err(bad(line)),
            };
            rows.push(ResultRow {
                load: parse_load(f[0])?,
                variant,
                algorithm: f[2].to_string(),
                mean: f[3].parse().map_err(|_| bad(line))?,
                std: f[4].parse().map_err(|_| bad(line))?,
                seeds: f[5].parse().map_err(|_| bad(line))?,
            });
        }
        Ok(ResultTable { rows })
    }

    /// One line per (load, variant), one column per algorithm.
    pub fn to_markdown(&self) -> String {
        let mut algos: Vec<&str> = Vec::new();
        let mut cells: Vec<(&[u32], Variant)> = Vec::new();
        for r in &self.rows {
            if !algos.contains(&r.algorithm.as_str()) {
                algos.push(&r.algorithm);
            }
            if !cells.contains(&(r.load.as_slice(), r.variant)) {
                cells.push((&r.load, r.variant));
            }
        }
        let mut s = String::from("| Load | Net |");
        for a in &algos {
            let _ = write!(s, " {a} |");
        }
        s.push_str("\n|---|---|");
        s.push_str(&"---:|".repeat(algos.len()));
        s.push('\n');
        for (load, variant) in cells {
            let _ = write!(s, "| {} | {} |", load_label(load), variant);
            for a in &algos {
                match self.get(load, variant, a) {
                    Some(r) => {
                        let _ = write!(s, " {:.2} |", r.mean);
                    }
                    None => s.push_str(" |"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Markdown => self.to_markdown(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>, format: TableFormat) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.render(format))
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn load_label(load: &[u32]) -> String {
    load.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_scenario(scenario: &Scenario) -> Result<ResultTable> {
    Ok(ResultTable::from_records(&run_records(scenario)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BraessFlag {
    Paradox,
    Benefit,
    Neutral,
}

impl std::fmt::Display for BraessFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BraessFlag::Paradox => "PARADOX",
            BraessFlag::Benefit => "BENEFIT",
            BraessFlag::Neutral => "NEUTRAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BraessEntry {
    pub load: Vec<u32>,
    pub algorithm: String,
    pub cost_a: f64,
    pub cost_b: f64,
    pub flag: BraessFlag,
}

pub fn classify(cost_a: f64, cost_b: f64, tolerance: f64) -> BraessFlag {
    if cost_b > cost_a + tolerance {
        BraessFlag::Paradox
    } else if cost_b < cost_a - tolerance {
        BraessFlag::Benefit
    } else {
        BraessFlag::Neutral
    }
}

/// Compares variant B against A for every (load, algorithm) in the table.
pub fn braess_report(table: &ResultTable, tolerance: f64) -> Result<Vec<BraessEntry>> {
    let mut out = Vec::new();
    let mut seen: Vec<(&[u32], &str)> = Vec::new();
    for r in &table.rows {
        let key = (r.load.as_slice(), r.algorithm.as_str());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let missing = |v: Variant| {
            Error::Experiment(format!(
                "no variant {v} row for load {} / {}",
                load_label(&r.load),
                r.algorithm
            ))
        };
        let a = table
            .get(&r.load, Variant::A, &r.algorithm)
            .ok_or_else(|| missing(Variant::A))?;
        let b = table
            .get(&r.load, Variant::B, &r.algorithm)
            .ok_or_else(|| missing(Variant::B))?;
        out.push(BraessEntry {
            load: r.load.clone(),
            algorithm: r.algorithm.clone(),
            cost_a: a.mean,
            cost_b: b.mean,
            flag: classify(a.mean, b.mean, tolerance),
        });
    }
    Ok(out)
}

/// Runs MB at each steering value, plus FK as the reference for the 1.0
/// endpoint.
pub fn steering_sweep(scenario: &Scenario, steering: &[f64]) -> Result<ResultTable> {
    let mut algorithms = Vec::with_capacity(steering.len() + 1);
    for &s in steering {
        let a = Algorithm::MemoryBased { steering: s };
        a.validate()?;
        algorithms.push(a);
    }
    algorithms.push(Algorithm::FullKnowledge);
    run_scenario(&scenario.clone().with_algorithms(algorithms))
}

/// Per-wave, per-destination WLR of a recorded trajectory as CSV.
pub fn wlr_csv(result: &RunResult, topology: &Topology) -> Result<String> {
    let traj = result
        .trajectory
        .as_ref()
        .ok_or_else(|| Error::Experiment("run did not record its trajectory".into()))?;
    let mut s = String::from("wave,destination,wlr,world_reward\n");
    for k in traj.waves() {
        let wave = traj.wave(k);
        let reward = crate::sim::world_reward(&wave);
        for (slot, &d) in topology.destinations().iter().enumerate() {
            let _ = writeln!(s, "{k},{},{},{reward}", topology.name(d), wlr(&wave, slot));
        }
    }
    Ok(s)
}
