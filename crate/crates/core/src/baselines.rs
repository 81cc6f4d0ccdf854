//! Standard metaheuristics used as comparison baselines.
//!
//! These are textbook formulations sharing the single-seat faculty
//! replacement neighborhood, the evaluation function and the starting
//! solution with the hybrid solver. Their hyperparameters are calibration
//! choices, not values taken from any reference study.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Solution};
use crate::search::SearchState;
use crate::seeding::{pick, repair, seat_layout, RngSeed};
use crate::solvers::{feasible_start, secs_opt, SolveResult, Termination};
use crate::trace::{Clock, Phase, TraceRecorder};
use crate::units::Score;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Ga,
    Memetic,
    StochasticHillClimbing,
    SimulatedAnnealing,
    TabuSearch,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Ga,
        BaselineKind::Memetic,
        BaselineKind::StochasticHillClimbing,
        BaselineKind::SimulatedAnnealing,
        BaselineKind::TabuSearch,
    ];

    fn phase(self) -> Phase {
        match self {
            BaselineKind::Ga => Phase::Genetic,
            BaselineKind::Memetic => Phase::Memetic,
            BaselineKind::StochasticHillClimbing => Phase::HillClimbing,
            BaselineKind::SimulatedAnnealing => Phase::Annealing,
            BaselineKind::TabuSearch => Phase::Tabu,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub algorithm: BaselineKind,
    pub population_size: usize,
    pub crossover_rate: f64,
    /// Per-seat mutation probability for GA offspring.
    pub mutation_rate: f64,
    /// Replacement attempts of hill-climbing refinement per memetic offspring.
    pub local_search_steps: usize,
    /// Starting temperature, in score units (a score lies in [0, 1]).
    pub initial_temperature: f64,
    /// Geometric cooling factor applied every iteration.
    pub cooling_rate: f64,
    pub tabu_tenure: u64,
    /// Iterations (SHC, SA, TS) or generations (GA, Memetic).
    pub max_iterations: u64,
    #[serde(with = "secs_opt", rename = "wall_clock_secs")]
    pub wall_clock_budget: Option<Duration>,
    pub seed: RngSeed,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            algorithm: BaselineKind::StochasticHillClimbing,
            population_size: 50,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            local_search_steps: 100,
            initial_temperature: 0.05,
            cooling_rate: 0.999,
            tabu_tenure: 50,
            max_iterations: 10_000,
            wall_clock_budget: None,
            seed: RngSeed(0),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
            ("cooling_rate", self.cooling_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if !self.initial_temperature.is_finite() || self.initial_temperature <= 0.0 {
            return Err(Error::Config("initial_temperature must be positive".into()));
        }
        if self.tabu_tenure == 0 {
            return Err(Error::Config("tabu_tenure must be positive".into()));
        }
        if self.population_size < 2 {
            return Err(Error::Config("population_size must be at least 2".into()));
        }
        Ok(())
    }
}

/// Runs one baseline from a hard-feasible start.
pub fn run_baseline(
    instance: &Instance,
    start: &Solution,
    config: &BaselineConfig,
) -> Result<SolveResult> {
    config.validate()?;
    let state = feasible_start(instance, start)?;
    let mut trace = TraceRecorder::new(Clock::start(config.wall_clock_budget));
    let (best, terminated_by, iterations) = match config.algorithm {
        BaselineKind::StochasticHillClimbing => hill_climbing(state, config, &mut trace),
        BaselineKind::SimulatedAnnealing => annealing(state, config, &mut trace),
        BaselineKind::TabuSearch => tabu(state, config, &mut trace),
        BaselineKind::Ga | BaselineKind::Memetic => genetic(state, config, &mut trace),
    };
    SolveResult::finish(
        instance,
        best,
        trace.into_points(),
        terminated_by,
        iterations,
    )
}

fn budget_exhausted(
    iteration: u64,
    config: &BaselineConfig,
    trace: &TraceRecorder,
) -> Option<Termination> {
    if iteration >= config.max_iterations {
        Some(Termination::IterationBudget)
    } else if trace.clock().expired() {
        Some(Termination::WallClock)
    } else {
        None
    }
}

/// A random (seat, eligible faculty) pair; the faculty may equal the current one.
fn random_neighbor(state: &SearchState<'_>, rng: &mut impl Rng) -> (usize, usize) {
    let element = pick(rng, state.len());
    let eligible = state.instance().eligible(state.section_of(element));
    (element, eligible[pick(rng, eligible.len())])
}

/// One hill-climbing step: accept the random neighbor iff it strictly improves.
fn climb_step(state: &mut SearchState<'_>, rng: &mut impl Rng) -> bool {
    let current = state.score();
    let (element, f) = random_neighbor(state, rng);
    if f == state.faculty_of(element) {
        return false;
    }
    match state.replacement_score(element, f) {
        Some(score) if score > current => {
            state.set_faculty(element, f);
            true
        }
        _ => false,
    }
}

fn hill_climbing(
    mut state: SearchState<'_>,
    config: &BaselineConfig,
    trace: &mut TraceRecorder,
) -> (Solution, Termination, u64) {
    let mut rng = config.seed.rng();
    trace.record(state.score(), Phase::HillClimbing, 0);
    let mut iteration = 0;
    loop {
        if let Some(t) = budget_exhausted(iteration, config, trace) {
            return (state.solution().clone(), t, iteration);
        }
        iteration += 1;
        if climb_step(&mut state, &mut rng) {
            state.debug_check();
            trace.record(state.score(), Phase::HillClimbing, iteration);
        }
    }
}

/// Metropolis acceptance over the replacement neighborhood with geometric
/// cooling. Neighbors are drawn from the same stream as hill climbing;
/// acceptance draws use a separate stream, so as the temperature goes to
/// zero the run coincides with hill climbing. Equal-score moves are
/// rejected, as everywhere else.
fn annealing(
    mut state: SearchState<'_>,
    config: &BaselineConfig,
    trace: &mut TraceRecorder,
) -> (Solution, Termination, u64) {
    let mut rng = config.seed.rng();
    let mut accept_rng = config.seed.stream(1);
    let mut best = state.score();
    let mut best_solution = state.solution().clone();
    trace.record(best, Phase::Annealing, 0);
    let mut temperature = config.initial_temperature;
    let mut iteration = 0;
    loop {
        if let Some(t) = budget_exhausted(iteration, config, trace) {
            return (best_solution, t, iteration);
        }
        iteration += 1;
        let current = state.score();
        let (element, f) = random_neighbor(&state, &mut rng);
        if f != state.faculty_of(element) {
            if let Some(score) = state.replacement_score(element, f) {
                let delta = score.diff_f64(current);
                let accept = if score > current {
                    true
                } else if score < current {
                    accept_rng.gen::<f64>() < (delta / temperature).exp()
                } else {
                    false
                };
                if accept {
                    state.set_faculty(element, f);
                    if score > best {
                        best = score;
                        best_solution = state.solution().clone();
                        state.debug_check();
                        trace.record(best, Phase::Annealing, iteration);
                    }
                }
            }
        }
        temperature *= config.cooling_rate;
    }
}

/// Best-admissible-move tabu search. After moving a seat away from a
/// faculty member, giving it back to them is tabu for `tabu_tenure`
/// iterations unless that would beat the best score so far.
fn tabu(
    mut state: SearchState<'_>,
    config: &BaselineConfig,
    trace: &mut TraceRecorder,
) -> (Solution, Termination, u64) {
    let instance = state.instance();
    let mut rng = config.seed.rng();
    let n_f = instance.n_faculty();
    let mut tabu_until = vec![0u64; state.len() * n_f];
    let mut best = state.score();
    let mut best_solution = state.solution().clone();
    trace.record(best, Phase::Tabu, 0);
    let mut iteration = 0;
    loop {
        if let Some(t) = budget_exhausted(iteration, config, trace) {
            return (best_solution, t, iteration);
        }
        iteration += 1;

        let mut chosen: Option<(usize, usize, Score)> = None;
        let mut ties = 0u32;
        for element in 0..state.len() {
            let current = state.faculty_of(element);
            for &f in instance.eligible(state.section_of(element)) {
                if f == current {
                    continue;
                }
                let Some(score) = state.replacement_score(element, f) else {
                    continue;
                };
                let is_tabu = tabu_until[element * n_f + f] > iteration;
                if is_tabu && score <= best {
                    continue;
                }
                match chosen {
                    Some((_, _, s)) if score < s => {}
                    Some((_, _, s)) if score == s => {
                        ties += 1;
                        if rng.gen_range(0..ties + 1) == 0 {
                            chosen = Some((element, f, score));
                        }
                    }
                    _ => {
                        ties = 0;
                        chosen = Some((element, f, score));
                    }
                }
            }
        }

        if let Some((element, f, score)) = chosen {
            let old = state.set_faculty(element, f);
            tabu_until[element * n_f + old] = iteration + config.tabu_tenure;
            if score > best {
                best = score;
                best_solution = state.solution().clone();
                state.debug_check();
                trace.record(best, Phase::Tabu, iteration);
            }
        }
    }
}

struct Individual {
    solution: Solution,
    score: Score,
}

fn tournament<'p>(population: &'p [Individual], rng: &mut impl Rng) -> &'p Individual {
    let a = &population[pick(rng, population.len())];
    let b = &population[pick(rng, population.len())];
    if b.score > a.score {
        b
    } else {
        a
    }
}

/// Per-seat random replacement, keeping only replacements that stay feasible.
fn mutate(state: &mut SearchState<'_>, rate: f64, rng: &mut impl Rng) {
    for element in 0..state.len() {
        if rng.gen_bool(rate) {
            let eligible = state.instance().eligible(state.section_of(element));
            let f = eligible[pick(rng, eligible.len())];
            if state.can_replace(element, f) {
                state.set_faculty(element, f);
            }
        }
    }
}

/// Generational GA with elitism, binary tournaments, one-point crossover
/// repaired to feasibility, and random eligible-faculty mutation. The
/// memetic variant refines each offspring by hill climbing.
fn genetic(
    start: SearchState<'_>,
    config: &BaselineConfig,
    trace: &mut TraceRecorder,
) -> (Solution, Termination, u64) {
    let instance = start.instance();
    let memetic = config.algorithm == BaselineKind::Memetic;
    let phase = config.algorithm.phase();
    let mut rng = config.seed.rng();
    let layout = seat_layout(instance);

    let mut best = Individual {
        solution: start.solution().clone(),
        score: start.score(),
    };
    trace.record(best.score, phase, 0);

    // the start plus perturbed copies of it
    let mut population = vec![Individual {
        solution: best.solution.clone(),
        score: best.score,
    }];
    while population.len() < config.population_size {
        let mut s = start.clone();
        mutate(&mut s, 0.2, &mut rng);
        population.push(Individual {
            solution: s.solution().clone(),
            score: s.score(),
        });
    }

    let mut generation = 0;
    loop {
        if let Some(t) = budget_exhausted(generation, config, trace) {
            return (best.solution, t, generation);
        }
        generation += 1;

        let elite = population
            .iter()
            .max_by(|a, b| a.score.cmp(&b.score))
            .expect("population is never empty");
        let mut next = vec![Individual {
            solution: elite.solution.clone(),
            score: elite.score,
        }];
        while next.len() < config.population_size {
            if trace.clock().expired() {
                break;
            }
            let p1 = tournament(&population, &mut rng);
            let p2 = tournament(&population, &mut rng);
            let child = if rng.gen_bool(config.crossover_rate) && layout.len() > 1 {
                let cut = 1 + pick(&mut rng, layout.len() - 1);
                let proposal: Vec<usize> = p1.solution.elements()[..cut]
                    .iter()
                    .chain(&p2.solution.elements()[cut..])
                    .map(|e| e.faculty)
                    .collect();
                match repair(instance, &layout, &proposal, &mut rng) {
                    Some(s) => s,
                    None => continue,
                }
            } else {
                p1.solution.clone()
            };
            let mut state = SearchState::new(instance, child).expect("layout references are valid");
            debug_assert!(state.is_feasible());
            mutate(&mut state, config.mutation_rate, &mut rng);
            if memetic {
                for _ in 0..config.local_search_steps {
                    climb_step(&mut state, &mut rng);
                }
            }
            next.push(Individual {
                score: state.score(),
                solution: state.solution().clone(),
            });
        }
        next.shuffle(&mut rng);
        population = next;

        let gen_best = population
            .iter()
            .max_by(|a, b| a.score.cmp(&b.score))
            .expect("population is never empty");
        if gen_best.score > best.score {
            best = Individual {
                solution: gen_best.solution.clone(),
                score: gen_best.score,
            };
            trace.record(best.score, phase, generation);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::PenaltyConfig;
    use crate::evaluation::evaluate;
    use crate::model::fixtures::*;
    use crate::seeding::{generate_instance, initial_solution, GeneratorSpec};

    fn single_choice_instance() -> Instance {
        Instance::new(
            vec![theory("t0", "A", &[0, 1, 2, 3]), theory("t1", "B", &[4])],
            vec![faculty("F0", 12, &["A"]), faculty("F1", 12, &["B"])],
            PenaltyConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn hill_climbing_without_alternatives_returns_start() {
        let inst = single_choice_instance();
        let start = initial_solution(&inst, RngSeed(0)).unwrap();
        for algorithm in BaselineKind::ALL {
            let cfg = BaselineConfig {
                algorithm,
                max_iterations: 200,
                ..BaselineConfig::default()
            };
            let res = run_baseline(&inst, &start, &cfg).unwrap();
            assert_eq!(res.best_solution, start, "{algorithm:?}");
        }
    }

    #[test]
    fn cold_annealing_matches_hill_climbing() {
        let inst = generate_instance(&GeneratorSpec::default(), RngSeed(4)).unwrap();
        let start = initial_solution(&inst, RngSeed(4)).unwrap();
        let base = BaselineConfig {
            max_iterations: 5_000,
            seed: RngSeed(21),
            ..BaselineConfig::default()
        };
        let shc = run_baseline(
            &inst,
            &start,
            &BaselineConfig {
                algorithm: BaselineKind::StochasticHillClimbing,
                ..base.clone()
            },
        )
        .unwrap();
        let sa = run_baseline(
            &inst,
            &start,
            &BaselineConfig {
                algorithm: BaselineKind::SimulatedAnnealing,
                initial_temperature: 1e-300,
                ..base
            },
        )
        .unwrap();
        assert_eq!(shc.best_solution, sa.best_solution);
        let a: Vec<_> = shc
            .trace
            .iter()
            .map(|p| (p.iteration, p.best_score))
            .collect();
        let b: Vec<_> = sa
            .trace
            .iter()
            .map(|p| (p.iteration, p.best_score))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn baselines_are_feasible_monotone_and_deterministic() {
        let inst = generate_instance(&GeneratorSpec::default(), RngSeed(6)).unwrap();
        let start = initial_solution(&inst, RngSeed(6)).unwrap();
        let start_score = evaluate(&inst, &start).unwrap().score;
        for algorithm in BaselineKind::ALL {
            let cfg = BaselineConfig {
                algorithm,
                max_iterations: match algorithm {
                    BaselineKind::Ga | BaselineKind::Memetic => 40,
                    BaselineKind::TabuSearch => 300,
                    _ => 3_000,
                },
                seed: RngSeed(2),
                ..BaselineConfig::default()
            };
            let a = run_baseline(&inst, &start, &cfg).unwrap();
            let b = run_baseline(&inst, &start, &cfg).unwrap();
            assert_eq!(a.best_solution, b.best_solution, "{algorithm:?}");
            assert!(a.best_report.is_feasible(), "{algorithm:?}");
            assert!(a.best_report.score >= start_score);
            assert_eq!(a.trace[0].best_score, start_score);
            assert_eq!(a.trace.last().unwrap().best_score, a.best_report.score);
            assert!(a
                .trace
                .windows(2)
                .all(|w| w[0].best_score <= w[1].best_score));
        }
    }

    #[test]
    fn config_validation() {
        let bad = BaselineConfig {
            crossover_rate: 1.5,
            ..BaselineConfig::default()
        };
        assert!(bad.validate().is_err());
        let cold = BaselineConfig {
            initial_temperature: 0.0,
            ..BaselineConfig::default()
        };
        assert!(cold.validate().is_err());
    }
}
