//! Incrementally maintained solver state.
//!
//! Every move the solvers make is a sequence of single-element faculty
//! replacements. [`SearchState`] applies them in O(slots) per touched
//! faculty member and keeps the hard-violation total and the score exact.

use crate::constraints::{penalty_sum, staffing_hard, FacultySchedule};
use crate::error::Result;
use crate::evaluation::clamp_score;
use crate::model::{Instance, Solution};
use crate::units::{Score, SCALE};

#[derive(Clone, Debug)]
pub(crate) struct SearchState<'a> {
    instance: &'a Instance,
    solution: Solution,
    schedules: Vec<FacultySchedule>,
    faculty_hard: Vec<u64>,
    clamped: Vec<i64>,
    section_elements: Vec<Vec<usize>>,
    section_hard: Vec<u64>,
    hard_total: u64,
    clamped_sum: i64,
}

impl<'a> SearchState<'a> {
    pub fn new(instance: &'a Instance, solution: Solution) -> Result<Self> {
        let schedules = FacultySchedule::build_all(instance, &solution)?;
        let mut section_elements = vec![Vec::new(); instance.sections().len()];
        for (i, e) in solution.elements().iter().enumerate() {
            section_elements[e.section].push(i);
        }
        let faculty_hard: Vec<u64> = schedules.iter().map(|s| s.hard(instance).total()).collect();
        let clamped: Vec<i64> = schedules
            .iter()
            .map(|s| clamp_score(penalty_sum(instance, s)).units())
            .collect();
        let mut state = SearchState {
            instance,
            schedules,
            hard_total: faculty_hard.iter().sum(),
            clamped_sum: clamped.iter().sum(),
            faculty_hard,
            clamped,
            section_hard: vec![0; section_elements.len()],
            section_elements,
            solution,
        };
        for s in 0..state.section_elements.len() {
            let h = state.compute_section_hard(s);
            state.section_hard[s] = h;
            state.hard_total += h;
        }
        Ok(state)
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    pub fn len(&self) -> usize {
        self.solution.len()
    }

    pub fn faculty_of(&self, element: usize) -> usize {
        self.solution.elements()[element].faculty
    }

    pub fn section_of(&self, element: usize) -> usize {
        self.solution.elements()[element].section
    }

    pub fn is_feasible(&self) -> bool {
        self.hard_total == 0
    }

    pub fn score(&self) -> Score {
        let denominator = self.instance.n_faculty() as u64 * SCALE as u64;
        if self.hard_total > 0 {
            Score::zero(denominator)
        } else {
            Score::new(self.clamped_sum as u64, denominator)
        }
    }

    fn compute_section_hard(&self, section: usize) -> u64 {
        let staff: Vec<usize> = self.section_elements[section]
            .iter()
            .map(|&e| self.solution.elements()[e].faculty)
            .collect();
        staffing_hard(self.instance, section, &staff).total()
    }

    fn refresh_faculty(&mut self, f: usize) {
        let schedule = &self.schedules[f];
        let hard = schedule.hard(self.instance).total();
        let clamped = clamp_score(penalty_sum(self.instance, schedule)).units();
        self.hard_total = self.hard_total - self.faculty_hard[f] + hard;
        self.clamped_sum += clamped - self.clamped[f];
        self.faculty_hard[f] = hard;
        self.clamped[f] = clamped;
    }

    /// Replaces the faculty of `element`; returns the previous one.
    pub fn set_faculty(&mut self, element: usize, faculty: usize) -> usize {
        let e = self.solution.elements()[element];
        let old = e.faculty;
        if old == faculty {
            return old;
        }
        self.schedules[old].remove(self.instance, e.section);
        self.schedules[faculty].add(self.instance, e.section);
        self.solution.set_faculty(element, faculty);
        self.refresh_faculty(old);
        self.refresh_faculty(faculty);
        let h = self.compute_section_hard(e.section);
        self.hard_total = self.hard_total - self.section_hard[e.section] + h;
        self.section_hard[e.section] = h;
        old
    }

    /// Whether giving `element` to `faculty` keeps a feasible state feasible.
    ///
    /// Only meaningful when the current state is feasible.
    pub fn can_replace(&self, element: usize, faculty: usize) -> bool {
        let e = self.solution.elements()[element];
        if e.faculty == faculty {
            return true;
        }
        if !self.instance.is_eligible(e.section, faculty) {
            return false;
        }
        if self.section_elements[e.section]
            .iter()
            .any(|&other| self.solution.elements()[other].faculty == faculty)
        {
            return false;
        }
        let section = self.instance.section(e.section);
        let schedule = &self.schedules[faculty];
        if schedule.overlaps(&section.slots) {
            return false;
        }
        schedule.total_credits + section.credits
            <= self.instance.faculty_member(faculty).max_credits
    }

    /// Score after replacing `element`'s faculty, or `None` when the
    /// replacement would break a hard constraint. The state is unchanged.
    pub fn replacement_score(&mut self, element: usize, faculty: usize) -> Option<Score> {
        if !self.can_replace(element, faculty) {
            return None;
        }
        let old = self.set_faculty(element, faculty);
        debug_assert!(self.is_feasible());
        let score = self.score();
        self.set_faculty(element, old);
        Some(score)
    }

    #[cfg(debug_assertions)]
    pub fn debug_check(&self) {
        let report = crate::evaluation::evaluate(self.instance, &self.solution)
            .expect("search state references are valid");
        assert_eq!(report.hcv.total(), self.hard_total, "hard total drifted");
        assert_eq!(report.score, self.score(), "score drifted");
    }

    #[cfg(not(debug_assertions))]
    #[inline(always)]
    pub fn debug_check(&self) {}
}
