//! Solution scoring.
//!
//! Each faculty member starts from 1 and loses the sum of their soft
//! penalties, clamped at 0. The solution score is the mean of these
//! individual scores over all faculty (idle faculty contribute 1), and is
//! forced to 0 whenever any hard constraint is violated.

use serde::Serialize;

use crate::constraints::{
    penalty_sum, section_staff, staffing_hard, FacultyHard, FacultySchedule, HardViolations,
    SectionHard,
};
use crate::error::Result;
use crate::model::{Instance, Solution};
use crate::units::{Fixed, Score, SCALE};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacultyScore {
    pub faculty_id: String,
    pub penalty_sum: Fixed,
    /// `max(0, 1 - penalty_sum)`
    pub clamped_score: Fixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvaluationReport {
    pub hcv: HardViolations,
    pub per_faculty: Vec<FacultyScore>,
    pub score: Score,
    #[serde(skip)]
    faculty_hard: Vec<FacultyHard>,
    #[serde(skip)]
    section_staff: Vec<Vec<usize>>,
    #[serde(skip)]
    section_hard: Vec<SectionHard>,
}

impl EvaluationReport {
    pub fn is_feasible(&self) -> bool {
        self.hcv.is_feasible()
    }

    fn recompute_score(&mut self, n_faculty: usize) {
        let denominator = n_faculty as u64 * SCALE as u64;
        self.score = if self.hcv.total() > 0 {
            Score::zero(denominator)
        } else {
            let sum: i64 = self
                .per_faculty
                .iter()
                .map(|f| f.clamped_score.units())
                .sum();
            Score::new(sum as u64, denominator)
        };
    }
}

pub(crate) fn clamp_score(penalty: Fixed) -> Fixed {
    (Fixed::ONE - penalty).max(Fixed::ZERO)
}

fn faculty_score(instance: &Instance, schedule: &FacultySchedule) -> FacultyScore {
    let penalty = penalty_sum(instance, schedule);
    FacultyScore {
        faculty_id: instance.faculty_member(schedule.faculty).id.clone(),
        penalty_sum: penalty,
        clamped_score: clamp_score(penalty),
    }
}

pub fn evaluate(instance: &Instance, solution: &Solution) -> Result<EvaluationReport> {
    let schedules = FacultySchedule::build_all(instance, solution)?;
    let mut hcv = HardViolations::default();
    let mut faculty_hard = Vec::with_capacity(schedules.len());
    let mut per_faculty = Vec::with_capacity(schedules.len());
    for schedule in &schedules {
        let h = schedule.hard(instance);
        hcv.add_faculty(h);
        faculty_hard.push(h);
        per_faculty.push(faculty_score(instance, schedule));
    }
    let staff = section_staff(instance, solution);
    let section_hard: Vec<_> = staff
        .iter()
        .enumerate()
        .map(|(s, st)| staffing_hard(instance, s, st))
        .collect();
    for h in &section_hard {
        hcv.add_section(*h);
    }
    let mut report = EvaluationReport {
        hcv,
        per_faculty,
        score: Score::zero(1),
        faculty_hard,
        section_staff: staff,
        section_hard,
    };
    report.recompute_score(instance.n_faculty());
    Ok(report)
}

/// Re-evaluates `solution` given the report of a previous solution and the
/// faculty whose schedules differ between the two.
///
/// Only those faculty members' schedules and the staffing of sections they
/// touch (before or after) are recomputed. The result equals
/// [`evaluate`] exactly when `changed_faculty` is complete; debug builds
/// check this.
pub fn evaluate_delta(
    instance: &Instance,
    solution: &Solution,
    cached: &EvaluationReport,
    changed_faculty: &[usize],
) -> Result<EvaluationReport> {
    if changed_faculty.is_empty() {
        return Ok(cached.clone());
    }
    solution.check_references(instance)?;

    let n_f = instance.n_faculty();
    let mut changed = vec![false; n_f];
    for &f in changed_faculty {
        if f >= n_f {
            return Err(crate::Error::Integrity(format!("unknown faculty #{f}")));
        }
        changed[f] = true;
    }

    let n_s = instance.sections().len();
    let mut touched = vec![false; n_s];
    for (s, staff) in cached.section_staff.iter().enumerate() {
        if staff.iter().any(|&f| changed[f]) {
            touched[s] = true;
        }
    }
    let mut schedules: Vec<Option<FacultySchedule>> = (0..n_f)
        .map(|f| changed[f].then(|| FacultySchedule::empty(f)))
        .collect();
    for e in solution.elements() {
        if let Some(schedule) = schedules[e.faculty].as_mut() {
            schedule.add(instance, e.section);
            touched[e.section] = true;
        }
    }

    let mut report = cached.clone();
    for schedule in schedules.into_iter().flatten() {
        let f = schedule.faculty;
        report.hcv.sub_faculty(report.faculty_hard[f]);
        let h = schedule.hard(instance);
        report.hcv.add_faculty(h);
        report.faculty_hard[f] = h;
        report.per_faculty[f] = faculty_score(instance, &schedule);
    }

    for (s, t) in touched.iter().enumerate() {
        if *t {
            report.section_staff[s].clear();
        }
    }
    for e in solution.elements() {
        if touched[e.section] {
            report.section_staff[e.section].push(e.faculty);
        }
    }
    for (s, t) in touched.iter().enumerate() {
        if *t {
            report.hcv.sub_section(report.section_hard[s]);
            let h = staffing_hard(instance, s, &report.section_staff[s]);
            report.hcv.add_section(h);
            report.section_hard[s] = h;
        }
    }

    report.recompute_score(n_f);
    #[cfg(debug_assertions)]
    {
        let full = evaluate(instance, solution)?;
        debug_assert_eq!(report, full, "evaluate_delta diverged from full evaluation");
    }
    Ok(report)
}
