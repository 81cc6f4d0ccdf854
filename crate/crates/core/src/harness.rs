//! Uniform entry point over all eight algorithms and the equal-budget
//! comparison run.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baselines::{run_baseline, BaselineConfig, BaselineKind};
use crate::error::{Error, Result};
use crate::model::{Instance, Solution};
use crate::seeding::{initial_solution, RngSeed};
use crate::solvers::{hybrid, lra, mga, SolveResult, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lra,
    Mga,
    Hybrid,
    Ga,
    Memetic,
    Shc,
    Sa,
    Ts,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Lra,
        Algorithm::Mga,
        Algorithm::Hybrid,
        Algorithm::Ga,
        Algorithm::Memetic,
        Algorithm::Shc,
        Algorithm::Sa,
        Algorithm::Ts,
    ];

    /// The hybrid and the five comparison baselines.
    pub const COMPARISON: [Algorithm; 6] = [
        Algorithm::Hybrid,
        Algorithm::Ga,
        Algorithm::Shc,
        Algorithm::Sa,
        Algorithm::Ts,
        Algorithm::Memetic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lra => "lra",
            Algorithm::Mga => "mga",
            Algorithm::Hybrid => "hybrid",
            Algorithm::Ga => "ga",
            Algorithm::Memetic => "memetic",
            Algorithm::Shc => "shc",
            Algorithm::Sa => "sa",
            Algorithm::Ts => "ts",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::Lra => "Local Repair Algorithm",
            Algorithm::Mga => "Modified Genetic Algorithm",
            Algorithm::Hybrid => "Hybrid Algorithm",
            Algorithm::Ga => "Genetic Algorithm",
            Algorithm::Memetic => "Memetic Algorithm",
            Algorithm::Shc => "Stochastic Hill Climbing",
            Algorithm::Sa => "Simulated Annealing",
            Algorithm::Ts => "Tabu Search",
        }
    }

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            Algorithm::Ga => Some(BaselineKind::Ga),
            Algorithm::Memetic => Some(BaselineKind::Memetic),
            Algorithm::Shc => Some(BaselineKind::StochasticHillClimbing),
            Algorithm::Sa => Some(BaselineKind::SimulatedAnnealing),
            Algorithm::Ts => Some(BaselineKind::TabuSearch),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Parameters for every algorithm; each run reads the part it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub solver: SolverConfig,
    pub baseline: BaselineConfig,
}

impl AlgorithmConfig {
    pub fn with_seed(mut self, seed: RngSeed) -> Self {
        self.solver.seed = seed;
        self.baseline.seed = seed;
        self
    }

    pub fn with_wall_clock(mut self, budget: Option<Duration>) -> Self {
        self.solver.wall_clock_budget = budget;
        self.baseline.wall_clock_budget = budget;
        self
    }

    /// Lifts every iteration and generation cap so that only the wall
    /// clock ends a run.
    pub fn unbounded_iterations(mut self) -> Self {
        self.solver.lra_total_iteration = u64::MAX;
        self.solver.mga_max_generation = u64::MAX;
        self.baseline.max_iterations = u64::MAX;
        self
    }
}

pub fn solve(
    instance: &Instance,
    start: &Solution,
    algorithm: Algorithm,
    config: &AlgorithmConfig,
) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Lra => lra(instance, start, &config.solver),
        Algorithm::Mga => mga(instance, start, &config.solver),
        Algorithm::Hybrid => hybrid(instance, start, &config.solver),
        other => {
            let baseline = BaselineConfig {
                algorithm: other.baseline().expect("remaining variants are baselines"),
                ..config.baseline.clone()
            };
            run_baseline(instance, start, &baseline)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub total_time: Duration,
    pub result: SolveResult,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub start: Solution,
    pub rows: Vec<ComparisonRow>,
}

/// Runs every algorithm from one shared initial solution (generated from
/// `seed`) under the same configuration and wall-clock budget. Runs are
/// sequential so each gets the machine to itself.
pub fn compare(
    instance: &Instance,
    algorithms: &[Algorithm],
    seed: RngSeed,
    budget: Option<Duration>,
    config: &AlgorithmConfig,
) -> Result<Comparison> {
    if algorithms.len() < 2 {
        return Err(Error::Config(
            "a comparison needs at least two algorithms".into(),
        ));
    }
    let start = initial_solution(instance, seed)?;
    let config = config.clone().with_seed(seed).with_wall_clock(budget);
    let mut rows = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let t0 = Instant::now();
        let result = solve(instance, &start, algorithm, &config)?;
        rows.push(ComparisonRow {
            algorithm,
            total_time: t0.elapsed(),
            result,
        });
    }
    Ok(Comparison { start, rows })
}
