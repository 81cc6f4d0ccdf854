//! Hard-constraint violation counting and soft-constraint penalties.
//!
//! Hard constraints:
//! 1. every theory section has exactly one faculty member,
//! 2. every lab section has two distinct faculty members,
//! 3. nobody teaches two classes in the same slot,
//! 4. nobody exceeds their credit limit,
//! 5. nobody teaches a course outside their preferred list.
//!
//! Soft constraints are evaluated per faculty member and per day; each
//! occurrence yields one penalty entry (see [`SoftConstraint`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Instance, Kind, SlotIndex, Solution, DAYS_PER_WEEK, SLOTS_PER_DAY, SLOTS_PER_WEEK,
};
use crate::units::Fixed;

/// Maximum number of working days before the over-days penalty applies.
pub const MAX_WORKING_DAYS: u32 = 5;
/// Maximum taught slots in one day before the overload penalty applies.
pub const MAX_SLOTS_PER_DAY: u32 = 4;
/// Length of a run of back-to-back classes that is penalised.
pub const CONSECUTIVE_RUN: u32 = 4;
/// Period treated as an early-hour slot.
pub const EARLY_PERIOD: u8 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    pub over_days: Fixed,
    pub over_slots_per_day: Fixed,
    pub consecutive_four: Fixed,
    pub idle_gap: Fixed,
    pub senior_lab: Fixed,
    pub senior_early: Fixed,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            over_days: Fixed::from_units(3000),
            over_slots_per_day: Fixed::from_units(2000),
            consecutive_four: Fixed::from_units(2000),
            idle_gap: Fixed::from_units(500),
            senior_lab: Fixed::from_units(2500),
            senior_early: Fixed::from_units(1500),
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("over_days", self.over_days),
            ("over_slots_per_day", self.over_slots_per_day),
            ("consecutive_four", self.consecutive_four),
            ("idle_gap", self.idle_gap),
            ("senior_lab", self.senior_lab),
            ("senior_early", self.senior_early),
        ];
        for (name, value) in fields {
            if value.is_negative() {
                return Err(Error::Validation(format!("penalty `{name}` must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Aggregated teaching load of one faculty member.
///
/// Maintained incrementally by [`add`](Self::add) / [`remove`](Self::remove);
/// the result always equals a rebuild from scratch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacultySchedule {
    pub faculty: usize,
    slot_load: [u16; SLOTS_PER_WEEK],
    pub lab_seats: u32,
    pub total_credits: Fixed,
    /// Seats held in sections this faculty member did not ask for.
    pub off_preference: u32,
}

impl FacultySchedule {
    pub fn empty(faculty: usize) -> Self {
        FacultySchedule {
            faculty,
            slot_load: [0; SLOTS_PER_WEEK],
            lab_seats: 0,
            total_credits: Fixed::ZERO,
            off_preference: 0,
        }
    }

    pub fn add(&mut self, instance: &Instance, section: usize) {
        let s = instance.section(section);
        for slot in &s.slots {
            self.slot_load[slot.value() as usize] += 1;
        }
        if s.kind == Kind::Lab {
            self.lab_seats += 1;
        }
        self.total_credits += s.credits;
        if !instance.is_eligible(section, self.faculty) {
            self.off_preference += 1;
        }
    }

    pub fn remove(&mut self, instance: &Instance, section: usize) {
        let s = instance.section(section);
        for slot in &s.slots {
            let load = &mut self.slot_load[slot.value() as usize];
            debug_assert!(*load > 0, "removing a section that was never added");
            *load -= 1;
        }
        if s.kind == Kind::Lab {
            self.lab_seats -= 1;
        }
        self.total_credits -= s.credits;
        if !instance.is_eligible(section, self.faculty) {
            self.off_preference -= 1;
        }
    }

    /// Builds every faculty member's schedule from a solution.
    pub fn build_all(instance: &Instance, solution: &Solution) -> Result<Vec<FacultySchedule>> {
        solution.check_references(instance)?;
        let mut schedules: Vec<_> = (0..instance.n_faculty())
            .map(FacultySchedule::empty)
            .collect();
        for e in solution.elements() {
            schedules[e.faculty].add(instance, e.section);
        }
        Ok(schedules)
    }

    pub fn is_occupied(&self, slot: SlotIndex) -> bool {
        self.slot_load[slot.value() as usize] > 0
    }

    pub fn occupied(&self) -> impl Iterator<Item = SlotIndex> + '_ {
        SlotIndex::all().filter(|s| self.is_occupied(*s))
    }

    /// Whether any of `slots` is already taught by this faculty member.
    pub fn overlaps(&self, slots: &[SlotIndex]) -> bool {
        slots.iter().any(|s| self.is_occupied(*s))
    }

    /// Bit `p` is set when period `p` of `day` is taught.
    pub fn day_mask(&self, day: u8) -> u8 {
        let base = (day * SLOTS_PER_DAY) as usize;
        let mut mask = 0u8;
        for p in 0..SLOTS_PER_DAY as usize {
            if self.slot_load[base + p] > 0 {
                mask |= 1 << p;
            }
        }
        mask
    }

    /// Sum over slots of `max(0, classes_in_slot - 1)`.
    pub fn clash_excess(&self) -> u32 {
        self.slot_load
            .iter()
            .map(|&n| u32::from(n.saturating_sub(1)))
            .sum()
    }

    pub fn hard(&self, instance: &Instance) -> FacultyHard {
        FacultyHard {
            slot_clash: self.clash_excess(),
            credit_exceeded: u32::from(
                self.total_credits > instance.faculty_member(self.faculty).max_credits,
            ),
            off_preference: self.off_preference,
        }
    }
}

/// Hard-violation terms attributable to one faculty member.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FacultyHard {
    pub slot_clash: u32,
    pub credit_exceeded: u32,
    pub off_preference: u32,
}

impl FacultyHard {
    pub fn total(&self) -> u64 {
        u64::from(self.slot_clash)
            + u64::from(self.credit_exceeded)
            + u64::from(self.off_preference)
    }
}

/// Hard-violation terms attributable to one section.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SectionHard {
    pub theory_unstaffed: u32,
    pub lab_understaffed: u32,
}

impl SectionHard {
    /// `seats` is the number of elements for the section, `distinct` the
    /// number of distinct faculty among them.
    pub fn from_staffing(kind: Kind, seats: usize, distinct: usize) -> Self {
        match kind {
            Kind::Theory => SectionHard {
                theory_unstaffed: u32::from(seats != 1),
                lab_understaffed: 0,
            },
            Kind::Lab => SectionHard {
                theory_unstaffed: 0,
                lab_understaffed: u32::from(distinct < Kind::Lab.required_seats() as usize),
            },
        }
    }

    pub fn total(&self) -> u64 {
        u64::from(self.theory_unstaffed) + u64::from(self.lab_understaffed)
    }
}

/// Counts of each hard-constraint violation; `total()` is `hcv`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HardViolations {
    pub hc_theory_unstaffed: u64,
    pub hc_lab_understaffed: u64,
    pub hc_slot_clash: u64,
    pub hc_credit_exceeded: u64,
    pub hc_off_preference: u64,
}

impl HardViolations {
    pub fn total(&self) -> u64 {
        self.hc_theory_unstaffed
            + self.hc_lab_understaffed
            + self.hc_slot_clash
            + self.hc_credit_exceeded
            + self.hc_off_preference
    }

    pub fn is_feasible(&self) -> bool {
        self.total() == 0
    }

    pub(crate) fn add_faculty(&mut self, h: FacultyHard) {
        self.hc_slot_clash += u64::from(h.slot_clash);
        self.hc_credit_exceeded += u64::from(h.credit_exceeded);
        self.hc_off_preference += u64::from(h.off_preference);
    }

    pub(crate) fn sub_faculty(&mut self, h: FacultyHard) {
        self.hc_slot_clash -= u64::from(h.slot_clash);
        self.hc_credit_exceeded -= u64::from(h.credit_exceeded);
        self.hc_off_preference -= u64::from(h.off_preference);
    }

    pub(crate) fn add_section(&mut self, h: SectionHard) {
        self.hc_theory_unstaffed += u64::from(h.theory_unstaffed);
        self.hc_lab_understaffed += u64::from(h.lab_understaffed);
    }

    pub(crate) fn sub_section(&mut self, h: SectionHard) {
        self.hc_theory_unstaffed -= u64::from(h.theory_unstaffed);
        self.hc_lab_understaffed -= u64::from(h.lab_understaffed);
    }
}

/// Per-section staffing: the faculty holding each seat, in solution order.
pub(crate) fn section_staff(instance: &Instance, solution: &Solution) -> Vec<Vec<usize>> {
    let mut staff = vec![Vec::new(); instance.sections().len()];
    for e in solution.elements() {
        staff[e.section].push(e.faculty);
    }
    staff
}

pub(crate) fn staffing_hard(instance: &Instance, section: usize, staff: &[usize]) -> SectionHard {
    let mut distinct = staff.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    SectionHard::from_staffing(instance.section(section).kind, staff.len(), distinct.len())
}

pub fn count_hard_violations(instance: &Instance, solution: &Solution) -> Result<HardViolations> {
    let schedules = FacultySchedule::build_all(instance, solution)?;
    let mut hcv = HardViolations::default();
    for schedule in &schedules {
        hcv.add_faculty(schedule.hard(instance));
    }
    for (s, staff) in section_staff(instance, solution).iter().enumerate() {
        hcv.add_section(staffing_hard(instance, s, staff));
    }
    Ok(hcv)
}

/// Identifies which soft constraint produced a penalty entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SoftConstraint {
    /// SC1: a working day beyond the fifth.
    OverDays,
    /// SC2: a day with more than four taught slots.
    OverSlotsPerDay,
    /// SC3: a day containing four or more back-to-back slots.
    ConsecutiveFour,
    /// SC4: idle periods inside a day's teaching span.
    IdleGap,
    /// SC5: a lab seat held by a senior faculty member.
    SeniorLab,
    /// SC5: an early-hour slot taught by a senior faculty member.
    SeniorEarly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SoftViolation {
    pub constraint: SoftConstraint,
    /// Day the violation occurred on, when it is tied to one.
    pub day: Option<u8>,
    pub penalty: Fixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct DayProfile {
    taught: u32,
    has_run: bool,
    gap: u32,
    early: bool,
}

fn day_profile(mask: u8) -> DayProfile {
    if mask == 0 {
        return DayProfile::default();
    }
    let m = u32::from(mask);
    let first = m.trailing_zeros();
    let last = 31 - m.leading_zeros();
    let taught = m.count_ones();
    DayProfile {
        taught,
        has_run: m & (m >> 1) & (m >> 2) & (m >> 3) != 0,
        gap: last - first + 1 - taught,
        early: m & (1 << EARLY_PERIOD) != 0,
    }
}

/// Every soft-constraint occurrence for one faculty member's schedule.
pub fn soft_penalties(instance: &Instance, schedule: &FacultySchedule) -> Vec<SoftViolation> {
    let cfg = instance.penalties();
    let senior = instance.faculty_member(schedule.faculty).is_senior;
    let mut out = Vec::new();
    let mut working_days = 0u32;
    for day in 0..DAYS_PER_WEEK {
        let p = day_profile(schedule.day_mask(day));
        if p.taught == 0 {
            continue;
        }
        working_days += 1;
        let mut push = |constraint, penalty| {
            out.push(SoftViolation {
                constraint,
                day: Some(day),
                penalty,
            })
        };
        if p.taught > MAX_SLOTS_PER_DAY {
            push(SoftConstraint::OverSlotsPerDay, cfg.over_slots_per_day);
        }
        if p.has_run {
            push(SoftConstraint::ConsecutiveFour, cfg.consecutive_four);
        }
        if p.gap > 0 {
            push(SoftConstraint::IdleGap, cfg.idle_gap * i64::from(p.gap));
        }
        if senior && p.early {
            push(SoftConstraint::SeniorEarly, cfg.senior_early);
        }
    }
    for _ in MAX_WORKING_DAYS..working_days.max(MAX_WORKING_DAYS) {
        out.push(SoftViolation {
            constraint: SoftConstraint::OverDays,
            day: None,
            penalty: cfg.over_days,
        });
    }
    if senior {
        for _ in 0..schedule.lab_seats {
            out.push(SoftViolation {
                constraint: SoftConstraint::SeniorLab,
                day: None,
                penalty: cfg.senior_lab,
            });
        }
    }
    out
}

/// Sum of [`soft_penalties`] without materialising the entries.
pub fn penalty_sum(instance: &Instance, schedule: &FacultySchedule) -> Fixed {
    let cfg = instance.penalties();
    let senior = instance.faculty_member(schedule.faculty).is_senior;
    let mut total = Fixed::ZERO;
    let mut working_days = 0u32;
    for day in 0..DAYS_PER_WEEK {
        let p = day_profile(schedule.day_mask(day));
        if p.taught == 0 {
            continue;
        }
        working_days += 1;
        if p.taught > MAX_SLOTS_PER_DAY {
            total += cfg.over_slots_per_day;
        }
        if p.has_run {
            total += cfg.consecutive_four;
        }
        total += cfg.idle_gap * i64::from(p.gap);
        if senior && p.early {
            total += cfg.senior_early;
        }
    }
    total += cfg.over_days * i64::from(working_days.saturating_sub(MAX_WORKING_DAYS));
    if senior {
        total += cfg.senior_lab * i64::from(schedule.lab_seats);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{slot_index, Assignment};
    use proptest::prelude::*;

    fn one_faculty_with(slots: &[(u8, u8)], senior: bool) -> (Instance, FacultySchedule) {
        let sections: Vec<_> = slots
            .iter()
            .enumerate()
            .map(|(i, &(d, p))| theory(&format!("s{i}"), "X", &[slot_index(d, p).unwrap().value()]))
            .collect();
        let mut f = faculty("A", 99, &["X"]);
        f.is_senior = senior;
        let inst = Instance::new(sections, vec![f], PenaltyConfig::default()).unwrap();
        let mut sched = FacultySchedule::empty(0);
        for s in 0..slots.len() {
            sched.add(&inst, s);
        }
        (inst, sched)
    }

    fn entries(v: &[SoftViolation], c: SoftConstraint) -> Vec<Fixed> {
        v.iter()
            .filter(|e| e.constraint == c)
            .map(|e| e.penalty)
            .collect()
    }

    #[test]
    fn six_working_days_gives_one_over_days_entry() {
        let (inst, sched) =
            one_faculty_with(&[(0, 2), (1, 2), (2, 2), (3, 2), (4, 2), (5, 2)], false);
        let v = soft_penalties(&inst, &sched);
        assert_eq!(
            entries(&v, SoftConstraint::OverDays),
            vec![Fixed::from_units(3000)]
        );
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn four_in_a_row_is_a_run_without_gap() {
        let (inst, sched) = one_faculty_with(&[(0, 0), (0, 1), (0, 2), (0, 3)], false);
        let v = soft_penalties(&inst, &sched);
        assert_eq!(entries(&v, SoftConstraint::ConsecutiveFour).len(), 1);
        assert!(entries(&v, SoftConstraint::IdleGap).is_empty());
        assert!(entries(&v, SoftConstraint::OverSlotsPerDay).is_empty());
    }

    #[test]
    fn idle_gap_counts_interior_empty_periods() {
        // brute-force oracle: periods strictly between 1 and 4 not taught = {2, 3}
        let taught = [1u8, 4];
        let oracle = (taught[0] + 1..taught[1])
            .filter(|p| !taught.contains(p))
            .count() as i64;
        assert_eq!(oracle, 2);
        let (inst, sched) = one_faculty_with(&[(3, 1), (3, 4)], false);
        let v = soft_penalties(&inst, &sched);
        assert_eq!(
            entries(&v, SoftConstraint::IdleGap),
            vec![Fixed::from_units(500 * oracle)]
        );
        assert_eq!(
            Fixed::from_units(500 * oracle),
            Fixed::from_f64(0.10).unwrap()
        );
    }

    #[test]
    fn overload_and_run_are_scored_independently() {
        let (inst, sched) = one_faculty_with(&[(2, 0), (2, 1), (2, 2), (2, 3), (2, 5)], false);
        let v = soft_penalties(&inst, &sched);
        assert_eq!(entries(&v, SoftConstraint::OverSlotsPerDay).len(), 1);
        assert_eq!(entries(&v, SoftConstraint::ConsecutiveFour).len(), 1);
        assert_eq!(
            entries(&v, SoftConstraint::IdleGap),
            vec![Fixed::from_units(500)]
        );
    }

    #[test]
    fn senior_penalties_only_apply_to_seniors() {
        let (inst, sched) = one_faculty_with(&[(0, 0), (1, 0), (1, 1)], true);
        let v = soft_penalties(&inst, &sched);
        assert_eq!(entries(&v, SoftConstraint::SeniorEarly).len(), 2);
        let (inst, sched) = one_faculty_with(&[(0, 0), (1, 0), (1, 1)], false);
        assert!(soft_penalties(&inst, &sched).is_empty());
    }

    #[test]
    fn senior_lab_per_seat() {
        let mut a = faculty("A", 99, &["L"]);
        a.is_senior = true;
        let inst = Instance::new(
            vec![lab("l1", "L", &[2]), lab("l2", "L", &[9])],
            vec![a, faculty("B", 99, &["L"])],
            PenaltyConfig::default(),
        )
        .unwrap();
        let mut sched = FacultySchedule::empty(0);
        sched.add(&inst, 0);
        sched.add(&inst, 1);
        let v = soft_penalties(&inst, &sched);
        assert_eq!(entries(&v, SoftConstraint::SeniorLab).len(), 2);
    }

    fn hard_fixture() -> Instance {
        Instance::new(
            vec![
                theory("t1", "X", &[7, 20]),
                theory("t2", "X", &[7]),
                lab("l1", "Y", &[30]),
            ],
            vec![
                faculty("A", 6, &["X", "Y"]),
                faculty("B", 6, &["X", "Y"]),
                faculty("C", 3, &["Y"]),
            ],
            PenaltyConfig::default(),
        )
        .unwrap()
    }

    fn sol(els: &[(usize, Kind, usize)]) -> Solution {
        Solution::from_elements_unchecked(
            els.iter()
                .map(|&(section, kind, faculty)| Assignment {
                    section,
                    kind,
                    faculty,
                })
                .collect(),
        )
    }

    #[test]
    fn feasible_solution_has_no_hard_violations() {
        let inst = hard_fixture();
        let s = sol(&[
            (0, Kind::Theory, 0),
            (1, Kind::Theory, 1),
            (2, Kind::Lab, 1),
            (2, Kind::Lab, 2),
        ]);
        assert_eq!(
            count_hard_violations(&inst, &s).unwrap(),
            HardViolations::default()
        );
    }

    #[test]
    fn shared_slot_is_one_clash() {
        let inst = hard_fixture();
        let s = sol(&[
            (0, Kind::Theory, 0),
            (1, Kind::Theory, 0),
            (2, Kind::Lab, 1),
            (2, Kind::Lab, 2),
        ]);
        let h = count_hard_violations(&inst, &s).unwrap();
        assert_eq!(h.hc_slot_clash, 1);
        assert_eq!(h.total(), 1);
    }

    #[test]
    fn lab_with_one_faculty_is_understaffed() {
        let inst = hard_fixture();
        let s = sol(&[
            (0, Kind::Theory, 0),
            (1, Kind::Theory, 1),
            (2, Kind::Lab, 2),
            (2, Kind::Lab, 2),
        ]);
        let h = count_hard_violations(&inst, &s).unwrap();
        assert_eq!(h.hc_lab_understaffed, 1);
        // both seats put C in slot 30 twice, and 3.0 credits meet the limit exactly
        assert_eq!(h.hc_slot_clash, 1);
        assert_eq!(h.hc_credit_exceeded, 0);
        assert_eq!(h.total(), 2);
    }

    #[test]
    fn credit_preference_and_staffing_counts() {
        let inst = hard_fixture();
        // C teaches t1 (off preference, 3.0 + lab 1.5 > 3.0), t2 unstaffed
        let s = sol(&[(0, Kind::Theory, 2), (2, Kind::Lab, 1), (2, Kind::Lab, 2)]);
        let h = count_hard_violations(&inst, &s).unwrap();
        assert_eq!(h.hc_theory_unstaffed, 1);
        assert_eq!(h.hc_off_preference, 1);
        assert_eq!(h.hc_credit_exceeded, 1);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn dangling_reference_is_an_integrity_error() {
        let inst = hard_fixture();
        let s = sol(&[(5, Kind::Theory, 0)]);
        assert!(matches!(
            count_hard_violations(&inst, &s),
            Err(Error::Integrity(_))
        ));
    }

    proptest! {
        #[test]
        fn penalty_sum_matches_entries_and_grows_with_load(
            slots in proptest::collection::vec(0u8..36, 0..20),
            senior in any::<bool>(),
        ) {
            let mut distinct = slots.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let sections: Vec<_> = (0..distinct.len())
                .map(|i| theory(&format!("s{i}"), "X", &[distinct[i]]))
                .collect();
            let mut f = faculty("A", 999, &["X"]);
            f.is_senior = senior;
            let inst = Instance::new(sections, vec![f], PenaltyConfig::default()).unwrap();
            let mut sched = FacultySchedule::empty(0);
            let mut prev = Fixed::ZERO;
            // add in the original (shuffled) order
            for &slot in &slots {
                let s = distinct.binary_search(&slot).unwrap();
                if sched.is_occupied(SlotIndex::new(slot).unwrap()) { continue; }
                sched.add(&inst, s);
                let entries = soft_penalties(&inst, &sched);
                prop_assert!(entries.iter().all(|e| e.penalty >= Fixed::ZERO));
                let sum: Fixed = entries.iter().map(|e| e.penalty).sum();
                prop_assert_eq!(sum, penalty_sum(&inst, &sched));
                // filling a hole can close an idle gap; every other term only grows
                let non_gap: Fixed = entries
                    .iter()
                    .filter(|e| e.constraint != SoftConstraint::IdleGap)
                    .map(|e| e.penalty)
                    .sum();
                prop_assert!(non_gap >= prev);
                prev = non_gap;
            }
        }

        #[test]
        fn incremental_schedule_equals_rebuild(
            ops in proptest::collection::vec((0usize..3, 0usize..3), 1..40)
        ) {
            let inst = hard_fixture();
            let mut faculty_of = vec![0usize, 1, 1, 2];
            let sections = [0usize, 1, 2, 2];
            let kinds = [Kind::Theory, Kind::Theory, Kind::Lab, Kind::Lab];
            let build = |f: &[usize]| sol(&[(0, kinds[0], f[0]), (1, kinds[1], f[1]), (2, kinds[2], f[2]), (2, kinds[3], f[3])]);
            let mut inc = FacultySchedule::build_all(&inst, &build(&faculty_of)).unwrap();
            for (elem, fac) in ops {
                let elem = elem.min(3);
                let old = faculty_of[elem];
                inc[old].remove(&inst, sections[elem]);
                inc[fac].add(&inst, sections[elem]);
                faculty_of[elem] = fac;
                let full = FacultySchedule::build_all(&inst, &build(&faculty_of)).unwrap();
                prop_assert_eq!(&inc, &full);
            }
        }
    }
}
