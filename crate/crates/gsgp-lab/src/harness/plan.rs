//! Experiment plans: which datasets, noise levels, methods, and repetition
//! scheme to run, with engine configurations and a base seed.
//!
//! Plans load from a TOML file. A `preset` picks the full-scale or
//! desk-scale defaults and individual keys override from there:
//!
//! ```toml
//! base_seed = 20170715
//! preset = "desk"                 # "paper" (default) or "desk"
//! datasets = ["keijzer-1"]        # or ["all"]
//! methods = ["gp", "gsgp"]
//! noise_levels = [0.0, 0.1, 0.2]
//! total_reps = 10
//! uniform_samples = 5
//!
//! [gp]
//! pop_size = 200
//! generations = 200
//!
//! [gsgp]
//! pop_size = 200
//! generations = 200
//! ```
//!
//! The environment variable `GSGP_LAB_BASE_SEED` overrides the base seed
//! from the file.

use crate::datasets::{Benchmark, NoiseLevel};
use crate::error::{Error, Result};
use crate::gp::GpConfig;
use crate::gsgp::GsgpConfig;
use crate::harness::seeds;
use crate::metrics::noise_permille;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Name of the environment variable that overrides a plan's base seed.
pub const BASE_SEED_ENV: &str = "GSGP_LAB_BASE_SEED";

/// Default base seed when neither the plan nor the environment names one.
pub const DEFAULT_BASE_SEED: u64 = 20170715;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gp,
    Gsgp,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Gp, Method::Gsgp];

    pub fn id(self) -> &'static str {
        match self {
            Method::Gp => "gp",
            Method::Gsgp => "gsgp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gp" => Ok(Method::Gp),
            "gsgp" => Ok(Method::Gsgp),
            other => Err(Error::MalformedPlan(format!("unknown method `{other}`"))),
        }
    }
}

/// How often each (dataset, noise level, method) cell is repeated.
/// Deterministically sampled datasets run all repetitions on sample 0;
/// uniform-sampled datasets split them evenly across their resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionScheme {
    pub total_reps: u32,
    pub uniform_samples: u32,
}

impl RepetitionScheme {
    pub fn new(total_reps: u32, uniform_samples: u32) -> Result<Self> {
        if total_reps == 0 {
            return Err(Error::MalformedPlan("total_reps must be positive".into()));
        }
        if !(1..=5).contains(&uniform_samples) {
            return Err(Error::MalformedPlan(
                "uniform_samples must lie in 1..=5".into(),
            ));
        }
        if total_reps % uniform_samples != 0 {
            return Err(Error::MalformedPlan(format!(
                "total_reps {total_reps} must divide evenly across {uniform_samples} samples"
            )));
        }
        Ok(RepetitionScheme {
            total_reps,
            uniform_samples,
        })
    }

    pub fn reps_per_sample(&self) -> u32 {
        self.total_reps / self.uniform_samples
    }

    /// (sample_id, rep_index) pairs for one benchmark.
    pub fn sample_reps(&self, benchmark: Benchmark) -> Vec<(u32, u32)> {
        if benchmark.spec().deterministic() {
            (0..self.total_reps).map(|rep| (0, rep)).collect()
        } else {
            (1..=self.uniform_samples)
                .flat_map(|s| (0..self.reps_per_sample()).map(move |rep| (s, rep)))
                .collect()
        }
    }
}

/// One unit of work: a single engine run at fixed coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub dataset: Benchmark,
    pub noise: NoiseLevel,
    pub sample_id: u32,
    pub rep_index: u32,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/n{:03}/s{}/r{}",
            self.method,
            self.dataset,
            noise_permille(self.noise.probability()),
            self.sample_id,
            self.rep_index
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub datasets: Vec<Benchmark>,
    pub noise_levels: Vec<NoiseLevel>,
    pub methods: Vec<Method>,
    pub base_seed: u64,
    pub reps: RepetitionScheme,
    pub gp: GpConfig,
    pub gsgp: GsgpConfig,
}

impl ExperimentPlan {
    /// The full factorial design at publication scale: 15 datasets × 11
    /// noise levels × 2 methods × 50 repetitions.
    pub fn paper_default() -> Self {
        ExperimentPlan {
            datasets: Benchmark::ALL.to_vec(),
            noise_levels: NoiseLevel::standard_grid(),
            methods: Method::ALL.to_vec(),
            base_seed: DEFAULT_BASE_SEED,
            reps: RepetitionScheme::new(50, 5).expect("50 reps over 5 samples"),
            gp: GpConfig::paper(),
            gsgp: GsgpConfig::paper(),
        }
    }

    /// Desk-scale preset: smaller engines, three noise levels, ten
    /// repetitions — minutes instead of machine-months.
    pub fn desk_default() -> Self {
        ExperimentPlan {
            datasets: Benchmark::ALL.to_vec(),
            noise_levels: vec![
                NoiseLevel::ZERO,
                NoiseLevel::new(0.10).expect("valid level"),
                NoiseLevel::new(0.20).expect("valid level"),
            ],
            methods: Method::ALL.to_vec(),
            base_seed: DEFAULT_BASE_SEED,
            reps: RepetitionScheme::new(10, 5).expect("10 reps over 5 samples"),
            gp: GpConfig::desk(),
            gsgp: GsgpConfig::desk(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::MalformedPlan("no datasets selected".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::MalformedPlan("no methods selected".into()));
        }
        if self.noise_levels.is_empty() {
            return Err(Error::MalformedPlan("no noise levels selected".into()));
        }
        let mut seen = HashSet::new();
        for d in &self.datasets {
            if !seen.insert(*d) {
                return Err(Error::DuplicateCell(format!("dataset {d} listed twice")));
            }
        }
        let mut seen = HashSet::new();
        for l in &self.noise_levels {
            if !seen.insert(noise_permille(l.probability())) {
                return Err(Error::DuplicateCell(format!(
                    "noise level {} listed twice",
                    l.probability()
                )));
            }
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(*m) {
                return Err(Error::DuplicateCell(format!("method {m} listed twice")));
            }
        }
        Ok(())
    }

    /// The fully expanded cell list, in a fixed deterministic order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &dataset in &self.datasets {
            for &noise in &self.noise_levels {
                for &method in &self.methods {
                    for (sample_id, rep_index) in self.reps.sample_reps(dataset) {
                        cells.push(Cell {
                            method,
                            dataset,
                            noise,
                            sample_id,
                            rep_index,
                        });
                    }
                }
            }
        }
        cells
    }

    /// Engine seed for one cell; a pure function of the base seed and the
    /// cell coordinates.
    pub fn run_seed_for(&self, cell: &Cell) -> u64 {
        seeds::run_seed(
            self.base_seed,
            cell.method,
            cell.dataset,
            noise_permille(cell.noise.probability()),
            cell.sample_id,
            cell.rep_index,
        )
    }

    /// Hash covering everything that shapes a method's runs, recorded on
    /// each RunRecord so mixed-config record sets are detectable.
    pub fn config_hash(&self, method: Method) -> String {
        let engine = match method {
            Method::Gp => self.gp.fingerprint(),
            Method::Gsgp => self.gsgp.fingerprint(),
        };
        let canonical = format!(
            "{engine};base={};reps={}x{}",
            self.base_seed,
            self.reps.uniform_samples,
            self.reps.reps_per_sample()
        );
        format!("{:016x}", seeds::fnv1a64(&canonical))
    }

    /// Parses a plan from TOML text. See the module docs for the format.
    pub fn parse_str(text: &str) -> Result<Self> {
        let file: PlanFile =
            toml::from_str(text).map_err(|e| Error::MalformedPlan(e.to_string()))?;
        let mut plan = match file.preset.as_deref() {
            None | Some("paper") => ExperimentPlan::paper_default(),
            Some("desk") => ExperimentPlan::desk_default(),
            Some(other) => {
                return Err(Error::MalformedPlan(format!(
                    "unknown preset `{other}` (expected `paper` or `desk`)"
                )))
            }
        };

        if let Some(names) = file.datasets {
            let mut datasets = Vec::new();
            for name in &names {
                if name.eq_ignore_ascii_case("all") {
                    datasets.extend(Benchmark::ALL);
                } else {
                    datasets.push(name.parse()?);
                }
            }
            plan.datasets = datasets;
        }
        if let Some(names) = file.methods {
            plan.methods = names
                .iter()
                .map(|n| n.parse())
                .collect::<Result<Vec<Method>>>()?;
        }
        if let Some(levels) = file.noise_levels {
            plan.noise_levels = levels
                .into_iter()
                .map(NoiseLevel::new)
                .collect::<Result<Vec<_>>>()?;
        }
        if let Some(seed) = file.base_seed {
            plan.base_seed = seed;
        }
        if file.total_reps.is_some() || file.uniform_samples.is_some() {
            plan.reps = RepetitionScheme::new(
                file.total_reps.unwrap_or(plan.reps.total_reps),
                file.uniform_samples.unwrap_or(plan.reps.uniform_samples),
            )?;
        }
        if let Some(over) = file.gp {
            over.apply(&mut plan.gp);
        }
        if let Some(over) = file.gsgp {
            over.apply(&mut plan.gsgp);
        }

        if let Ok(seed) = std::env::var(BASE_SEED_ENV) {
            plan.base_seed = seed.parse().map_err(|_| {
                Error::MalformedPlan(format!("{BASE_SEED_ENV}=`{seed}` is not a u64"))
            })?;
        }

        plan.validate()?;
        Ok(plan)
    }
}

/// Loads and validates a plan file.
pub fn plan_experiment(path: &Path) -> Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentPlan::parse_str(&text)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    base_seed: Option<u64>,
    preset: Option<String>,
    datasets: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    noise_levels: Option<Vec<f64>>,
    total_reps: Option<u32>,
    uniform_samples: Option<u32>,
    gp: Option<GpOverrides>,
    gsgp: Option<GsgpOverrides>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GpOverrides {
    pop_size: Option<usize>,
    generations: Option<usize>,
    tournament_size: Option<usize>,
    p_crossover: Option<f64>,
    p_mutation: Option<f64>,
    init_max_depth: Option<usize>,
    evolution_max_depth: Option<usize>,
    elitism: Option<usize>,
}

impl GpOverrides {
    fn apply(&self, config: &mut GpConfig) {
        if let Some(v) = self.pop_size {
            config.pop_size = v;
        }
        if let Some(v) = self.generations {
            config.generations = v;
        }
        if let Some(v) = self.tournament_size {
            config.tournament_size = v;
        }
        if let Some(v) = self.p_crossover {
            config.p_crossover = v;
        }
        if let Some(v) = self.p_mutation {
            config.p_mutation = v;
        }
        if let Some(v) = self.init_max_depth {
            config.init_max_depth = v;
        }
        if let Some(v) = self.evolution_max_depth {
            config.evolution_max_depth = v;
        }
        if let Some(v) = self.elitism {
            config.elitism = v;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GsgpOverrides {
    pop_size: Option<usize>,
    generations: Option<usize>,
    tournament_size: Option<usize>,
    p_crossover: Option<f64>,
    p_mutation: Option<f64>,
    ms_fraction: Option<f64>,
    init_max_depth: Option<usize>,
    rt_max_depth: Option<usize>,
    bound_mutation_trees: Option<bool>,
    elitism: Option<usize>,
}

impl GsgpOverrides {
    fn apply(&self, config: &mut GsgpConfig) {
        if let Some(v) = self.pop_size {
            config.pop_size = v;
        }
        if let Some(v) = self.generations {
            config.generations = v;
        }
        if let Some(v) = self.tournament_size {
            config.tournament_size = v;
        }
        if let Some(v) = self.p_crossover {
            config.p_crossover = v;
        }
        if let Some(v) = self.p_mutation {
            config.p_mutation = v;
        }
        if let Some(v) = self.ms_fraction {
            config.ms_fraction = v;
        }
        if let Some(v) = self.init_max_depth {
            config.init_max_depth = v;
        }
        if let Some(v) = self.rt_max_depth {
            config.rt_max_depth = v;
        }
        if let Some(v) = self.bound_mutation_trees {
            config.bound_mutation_trees = v;
        }
        if let Some(v) = self.elitism {
            config.elitism = v;
        }
    }
}
