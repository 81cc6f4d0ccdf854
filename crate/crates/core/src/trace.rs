//! Best-score-over-time traces emitted by every solver.

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::units::Score;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    #[serde(rename = "LRA")]
    Lra,
    #[serde(rename = "MGA-crossover")]
    MgaCrossover,
    #[serde(rename = "MGA-mutation")]
    MgaMutation,
    #[serde(rename = "GA")]
    Genetic,
    #[serde(rename = "Memetic")]
    Memetic,
    #[serde(rename = "SHC")]
    HillClimbing,
    #[serde(rename = "SA")]
    Annealing,
    #[serde(rename = "TS")]
    Tabu,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Lra => "LRA",
            Phase::MgaCrossover => "MGA-crossover",
            Phase::MgaMutation => "MGA-mutation",
            Phase::Genetic => "GA",
            Phase::Memetic => "Memetic",
            Phase::HillClimbing => "SHC",
            Phase::Annealing => "SA",
            Phase::Tabu => "TS",
        }
    }

    pub fn from_label(label: &str) -> Option<Phase> {
        [
            Phase::Lra,
            Phase::MgaCrossover,
            Phase::MgaMutation,
            Phase::Genetic,
            Phase::Memetic,
            Phase::HillClimbing,
            Phase::Annealing,
            Phase::Tabu,
        ]
        .into_iter()
        .find(|p| p.label() == label)
    }

    pub fn is_mga(self) -> bool {
        matches!(self, Phase::MgaCrossover | Phase::MgaMutation)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TracePoint {
    pub elapsed: Duration,
    pub best_score: Score,
    pub phase: Phase,
    /// Iterations (or generations) completed since the solver started.
    pub iteration: u64,
}

/// Shared clock for a solve, possibly spanning several phases.
#[derive(Clone, Copy, Debug)]
pub struct Clock {
    origin: Instant,
    deadline: Option<Instant>,
}

impl Clock {
    pub fn start(budget: Option<Duration>) -> Self {
        let origin = Instant::now();
        Clock {
            origin,
            deadline: budget.map(|b| origin + b),
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.origin.elapsed()
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Records improvements; rejects points that would decrease the best score.
#[derive(Clone, Debug)]
pub struct TraceRecorder {
    clock: Clock,
    points: Vec<TracePoint>,
}

impl TraceRecorder {
    pub fn new(clock: Clock) -> Self {
        TraceRecorder {
            clock,
            points: Vec::new(),
        }
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn record(&mut self, best_score: Score, phase: Phase, iteration: u64) {
        if let Some(last) = self.points.last() {
            assert!(
                best_score >= last.best_score,
                "trace best score must not decrease"
            );
        }
        self.points.push(TracePoint {
            elapsed: self.clock.elapsed(),
            best_score,
            phase,
            iteration,
        });
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<TracePoint> {
        self.points
    }
}
