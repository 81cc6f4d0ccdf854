//! Local Repair (LRA), the Modified Genetic Algorithm (MGA) and their
//! hybrid.
//!
//! All three work on a single incumbent solution and accept a change only
//! when it keeps every hard constraint satisfied and strictly improves the
//! score, so the incumbent is always the best solution seen.
//!
//! * LRA picks a random seat and tries every eligible faculty member for
//!   it, keeping the best strictly improving one.
//! * MGA picks a mini-batch of seats, swaps faculty between consecutive
//!   pairs ("mini-batch crossover") and, once `mutation_tolerance`
//!   generations in a row failed to improve, also re-draws the faculty of
//!   one batch seat ("conditional mutation").
//! * The hybrid runs LRA until it stalls for `switching_tolerance`
//!   iterations (or its budget ends), then continues with MGA.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvaluationReport};
use crate::model::{Instance, Solution};
use crate::search::SearchState;
use crate::seeding::{pick, RngSeed};
use crate::trace::{Clock, Phase, TracePoint, TraceRecorder};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub lra_total_iteration: u64,
    pub switching_tolerance: u64,
    pub mga_max_generation: u64,
    pub mini_batch_size: usize,
    pub mutation_tolerance: u64,
    #[serde(with = "secs_opt", rename = "wall_clock_secs")]
    pub wall_clock_budget: Option<Duration>,
    pub seed: RngSeed,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lra_total_iteration: 5000,
            switching_tolerance: 1000,
            mga_max_generation: 500_000,
            mini_batch_size: 2,
            mutation_tolerance: 20_000,
            wall_clock_budget: None,
            seed: RngSeed(0),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mini_batch_size < 2 || !self.mini_batch_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "mini_batch_size must be an even number >= 2, got {}",
                self.mini_batch_size
            )));
        }
        if self.switching_tolerance == 0 || self.mutation_tolerance == 0 {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Optional durations written as fractional seconds.
pub(crate) mod secs_opt {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        let secs = Option::<f64>::deserialize(d)?;
        secs.map(|s| {
            Duration::try_from_secs_f64(s).map_err(|_| serde::de::Error::custom("invalid duration"))
        })
        .transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    IterationBudget,
    WallClock,
    SwitchingTolerance,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub best_solution: Solution,
    pub best_report: EvaluationReport,
    pub trace: Vec<TracePoint>,
    pub terminated_by: Termination,
    /// Iterations or generations completed.
    pub iterations: u64,
}

impl SolveResult {
    pub(crate) fn finish(
        instance: &Instance,
        best_solution: Solution,
        trace: Vec<TracePoint>,
        terminated_by: Termination,
        iterations: u64,
    ) -> Result<Self> {
        let best_report = evaluate(instance, &best_solution)?;
        Ok(SolveResult {
            best_solution,
            best_report,
            trace,
            terminated_by,
            iterations,
        })
    }
}

/// Rejects starts that are malformed or violate a hard constraint.
pub(crate) fn feasible_start<'a>(
    instance: &'a Instance,
    start: &Solution,
) -> Result<SearchState<'a>> {
    start
        .check_well_formed(instance)
        .map_err(|e| Error::Precondition(format!("start solution is malformed: {e}")))?;
    let state = SearchState::new(instance, start.clone())?;
    if !state.is_feasible() {
        let hcv = evaluate(instance, start)?.hcv;
        return Err(Error::Precondition(format!(
            "start solution violates {} hard constraint(s): {hcv:?}",
            hcv.total()
        )));
    }
    Ok(state)
}

fn run_lra<R: Rng>(
    state: &mut SearchState<'_>,
    config: &SolverConfig,
    rng: &mut R,
    trace: &mut TraceRecorder,
) -> (Termination, u64) {
    let instance = state.instance();
    let mut best = state.score();
    trace.record(best, Phase::Lra, 0);
    let mut stale = 0u64;
    let mut iteration = 0u64;
    loop {
        if iteration >= config.lra_total_iteration {
            return (Termination::IterationBudget, iteration);
        }
        if trace.clock().expired() {
            return (Termination::WallClock, iteration);
        }
        iteration += 1;

        let element = pick(rng, state.len());
        let current = state.faculty_of(element);
        let mut chosen = None;
        for &f in instance.eligible(state.section_of(element)) {
            if f == current {
                continue;
            }
            if let Some(score) = state.replacement_score(element, f) {
                if score > best {
                    best = score;
                    chosen = Some(f);
                }
            }
        }

        match chosen {
            Some(f) => {
                state.set_faculty(element, f);
                state.debug_check();
                stale = 0;
                trace.record(best, Phase::Lra, iteration);
            }
            None => {
                stale += 1;
                if stale >= config.switching_tolerance {
                    return (Termination::SwitchingTolerance, iteration);
                }
            }
        }
    }
}

fn run_mga<R: Rng>(
    state: &mut SearchState<'_>,
    config: &SolverConfig,
    rng: &mut R,
    trace: &mut TraceRecorder,
    offset: u64,
) -> (Termination, u64) {
    let instance = state.instance();
    let n = state.len();
    let batch_size = config.mini_batch_size.min(n - n % 2);
    let mut best = state.score();
    trace.record(best, Phase::MgaCrossover, offset);
    let mut stale = 0u64;
    let mut mutation_active = false;
    let mut undo: Vec<(usize, usize)> = Vec::with_capacity(batch_size + 1);
    let mut generation = 0u64;
    loop {
        if generation >= config.mga_max_generation {
            return (Termination::IterationBudget, generation);
        }
        if trace.clock().expired() {
            return (Termination::WallClock, generation);
        }
        generation += 1;

        let batch = rand::seq::index::sample(rng, n, batch_size).into_vec();
        undo.clear();
        for pair in batch.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            let (fa, fb) = (state.faculty_of(a), state.faculty_of(b));
            if fa == fb
                || !instance.is_eligible(state.section_of(a), fb)
                || !instance.is_eligible(state.section_of(b), fa)
            {
                continue;
            }
            state.set_faculty(a, fb);
            state.set_faculty(b, fa);
            undo.push((a, fa));
            undo.push((b, fb));
        }
        if mutation_active && !batch.is_empty() {
            let element = batch[pick(rng, batch.len())];
            let eligible = instance.eligible(state.section_of(element));
            let f = eligible[pick(rng, eligible.len())];
            let old = state.set_faculty(element, f);
            if old != f {
                undo.push((element, old));
            }
        }

        let phase = if mutation_active {
            Phase::MgaMutation
        } else {
            Phase::MgaCrossover
        };
        let score = state.score();
        // the hard gate is applied to the whole proposal, so a swap may
        // pass through a clash that the mutation then resolves
        if !undo.is_empty() && state.is_feasible() && score > best {
            best = score;
            stale = 0;
            state.debug_check();
            trace.record(best, phase, offset + generation);
        } else {
            for &(element, old) in undo.iter().rev() {
                state.set_faculty(element, old);
            }
            stale += 1;
            if !mutation_active && stale >= config.mutation_tolerance {
                mutation_active = true;
                trace.record(best, Phase::MgaMutation, offset + generation);
            }
        }
    }
}

/// Local Repair Algorithm from a hard-feasible start.
pub fn lra(instance: &Instance, start: &Solution, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let mut state = feasible_start(instance, start)?;
    let mut rng = config.seed.rng();
    let mut trace = TraceRecorder::new(Clock::start(config.wall_clock_budget));
    let (terminated_by, iterations) = run_lra(&mut state, config, &mut rng, &mut trace);
    SolveResult::finish(
        instance,
        state.solution().clone(),
        trace.into_points(),
        terminated_by,
        iterations,
    )
}

/// Modified Genetic Algorithm from a hard-feasible start.
pub fn mga(instance: &Instance, start: &Solution, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let mut state = feasible_start(instance, start)?;
    let mut rng = config.seed.rng();
    let mut trace = TraceRecorder::new(Clock::start(config.wall_clock_budget));
    let (terminated_by, iterations) = run_mga(&mut state, config, &mut rng, &mut trace, 0);
    SolveResult::finish(
        instance,
        state.solution().clone(),
        trace.into_points(),
        terminated_by,
        iterations,
    )
}

/// LRA followed by MGA on LRA's result, sharing one clock and RNG stream.
///
/// Trace iterations are cumulative: the first MGA point sits at the number
/// of LRA iterations performed.
pub fn hybrid(instance: &Instance, start: &Solution, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let mut state = feasible_start(instance, start)?;
    let mut rng = config.seed.rng();
    let mut trace = TraceRecorder::new(Clock::start(config.wall_clock_budget));
    let (lra_end, lra_iterations) = run_lra(&mut state, config, &mut rng, &mut trace);
    if lra_end == Termination::WallClock || config.mga_max_generation == 0 {
        return SolveResult::finish(
            instance,
            state.solution().clone(),
            trace.into_points(),
            lra_end,
            lra_iterations,
        );
    }
    let (terminated_by, generations) =
        run_mga(&mut state, config, &mut rng, &mut trace, lra_iterations);
    SolveResult::finish(
        instance,
        state.solution().clone(),
        trace.into_points(),
        terminated_by,
        lra_iterations + generations,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::PenaltyConfig;
    use crate::model::fixtures::*;
    use crate::seeding::{generate_instance, initial_solution, GeneratorSpec};

    fn single_choice_instance() -> Instance {
        let sections = vec![
            theory("t0", "A", &[0, 1, 2, 3]),
            theory("t1", "B", &[4]),
            lab("l0", "C", &[7]),
        ];
        let faculty = vec![
            faculty("F0", 12, &["A", "C"]),
            faculty("F1", 12, &["B", "C"]),
        ];
        Instance::new(sections, faculty, PenaltyConfig::default()).unwrap()
    }

    #[test]
    fn lra_without_alternatives_stalls_on_switching_tolerance() {
        let inst = single_choice_instance();
        let start = initial_solution(&inst, RngSeed(1)).unwrap();
        let res = lra(&inst, &start, &SolverConfig::default()).unwrap();
        assert_eq!(res.best_solution, start);
        assert_eq!(res.terminated_by, Termination::SwitchingTolerance);
        assert_eq!(res.iterations, 1000);
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn mutation_latches_once_after_tolerance() {
        let inst = single_choice_instance();
        let start = initial_solution(&inst, RngSeed(1)).unwrap();
        let cfg = SolverConfig {
            mga_max_generation: 50_000,
            ..SolverConfig::default()
        };
        let res = mga(&inst, &start, &cfg).unwrap();
        let activations: Vec<_> = res
            .trace
            .iter()
            .filter(|p| p.phase == Phase::MgaMutation)
            .collect();
        assert_eq!(activations.len(), 1);
        assert_eq!(activations[0].iteration, 20_000);
        assert_eq!(res.terminated_by, Termination::IterationBudget);
        assert_eq!(res.best_solution, start);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let inst = single_choice_instance();
        let mut start = initial_solution(&inst, RngSeed(1)).unwrap();
        start.set_faculty(0, 1); // F1 does not prefer A
        for run in [lra, mga, hybrid] {
            assert!(matches!(
                run(&inst, &start, &SolverConfig::default()),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn config_validation() {
        let odd = SolverConfig {
            mini_batch_size: 3,
            ..SolverConfig::default()
        };
        assert!(odd.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    fn small() -> (Instance, Solution) {
        let inst = generate_instance(&GeneratorSpec::default(), RngSeed(8)).unwrap();
        let start = initial_solution(&inst, RngSeed(8)).unwrap();
        (inst, start)
    }

    #[test]
    fn hybrid_with_zero_generations_equals_lra() {
        let (inst, start) = small();
        let cfg = SolverConfig {
            mga_max_generation: 0,
            seed: RngSeed(5),
            ..SolverConfig::default()
        };
        let a = lra(&inst, &start, &cfg).unwrap();
        let b = hybrid(&inst, &start, &cfg).unwrap();
        assert_eq!(a.best_solution, b.best_solution);
        assert_eq!(a.best_report, b.best_report);
        assert_eq!(a.terminated_by, b.terminated_by);
        assert_eq!(a.trace.len(), b.trace.len());
    }

    #[test]
    fn solvers_are_elitist_feasible_and_deterministic() {
        let (inst, start) = small();
        let cfg = SolverConfig {
            mga_max_generation: 30_000,
            mutation_tolerance: 5_000,
            seed: RngSeed(17),
            ..SolverConfig::default()
        };
        for run in [lra, mga, hybrid] {
            let a = run(&inst, &start, &cfg).unwrap();
            let b = run(&inst, &start, &cfg).unwrap();
            assert_eq!(a.best_solution, b.best_solution);
            assert_eq!(a.iterations, b.iterations);
            assert!(a.best_report.is_feasible());
            assert!(a.best_report.score >= evaluate(&inst, &start).unwrap().score);
            assert_eq!(a.trace.last().unwrap().best_score, a.best_report.score);
            for w in a.trace.windows(2) {
                assert!(w[0].best_score <= w[1].best_score);
                assert!(w[0].iteration <= w[1].iteration);
                assert!(w[0].elapsed <= w[1].elapsed);
            }
            // strictly increasing at improvement points within a phase
            for w in a.trace.windows(2) {
                if w[0].phase == w[1].phase && w[1].phase != Phase::MgaMutation {
                    assert!(w[0].best_score < w[1].best_score);
                }
            }
        }
    }

    #[test]
    fn hybrid_phases_are_ordered() {
        let (inst, start) = small();
        let cfg = SolverConfig {
            mga_max_generation: 30_000,
            mutation_tolerance: 2_000,
            seed: RngSeed(3),
            ..SolverConfig::default()
        };
        let res = hybrid(&inst, &start, &cfg).unwrap();
        let first_mga = res.trace.iter().position(|p| p.phase.is_mga()).unwrap();
        assert!(res.trace[..first_mga].iter().all(|p| p.phase == Phase::Lra));
        assert!(res.trace[first_mga..].iter().all(|p| p.phase.is_mga()));
        let lra_final = res.trace[first_mga - 1].best_score;
        assert!(res.best_report.score >= lra_final);
        if let Some(m) = res.trace.iter().position(|p| p.phase == Phase::MgaMutation) {
            assert!(res.trace[m..].iter().all(|p| p.phase == Phase::MgaMutation));
        }
    }
}
