//! Problem instances and candidate solutions.
//!
//! A week has six days of six periods each. Every meeting of a course
//! section occupies one [`SlotIndex`] in `0..36`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constraints::PenaltyConfig;
use crate::error::{Error, Result};
use crate::units::Fixed;

pub const DAYS_PER_WEEK: u8 = 6;
pub const SLOTS_PER_DAY: u8 = 6;
pub const SLOTS_PER_WEEK: usize = (DAYS_PER_WEEK * SLOTS_PER_DAY) as usize;

/// One of the 36 weekly day/period positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotIndex(u8);

impl SlotIndex {
    pub fn new(value: u8) -> Result<Self> {
        if (value as usize) < SLOTS_PER_WEEK {
            Ok(SlotIndex(value))
        } else {
            Err(Error::Domain(format!(
                "slot index {value} out of range 0..={}",
                SLOTS_PER_WEEK - 1
            )))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn day(self) -> u8 {
        self.0 / SLOTS_PER_DAY
    }

    pub fn period(self) -> u8 {
        self.0 % SLOTS_PER_DAY
    }

    pub fn all() -> impl Iterator<Item = SlotIndex> {
        (0..SLOTS_PER_WEEK as u8).map(SlotIndex)
    }
}

/// Maps a (day, period) pair to its slot index `6 * day + period`.
pub fn slot_index(day: u8, period: u8) -> Result<SlotIndex> {
    if day >= DAYS_PER_WEEK || period >= SLOTS_PER_DAY {
        return Err(Error::Domain(format!(
            "day {day} / period {period} outside 0..{DAYS_PER_WEEK} x 0..{SLOTS_PER_DAY}"
        )));
    }
    Ok(SlotIndex(day * SLOTS_PER_DAY + period))
}

impl fmt::Display for SlotIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for SlotIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for SlotIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = i64::deserialize(deserializer)?;
        u8::try_from(raw)
            .ok()
            .and_then(|v| SlotIndex::new(v).ok())
            .ok_or_else(|| {
                serde::de::Error::custom(format!(
                    "slot index {raw} out of range 0..={}",
                    SLOTS_PER_WEEK - 1
                ))
            })
    }
}

/// Theory or lab, written `T` / `L` in files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "T")]
    Theory,
    #[serde(rename = "L")]
    Lab,
}

impl Kind {
    pub fn tag(self) -> char {
        match self {
            Kind::Theory => 'T',
            Kind::Lab => 'L',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Kind> {
        match tag {
            "T" => Some(Kind::Theory),
            "L" => Some(Kind::Lab),
            _ => None,
        }
    }

    /// Number of distinct faculty a section of this kind needs.
    pub fn required_seats(self) -> u32 {
        match self {
            Kind::Theory => 1,
            Kind::Lab => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CourseSection {
    pub id: String,
    pub code: String,
    pub kind: Kind,
    pub slots: Vec<SlotIndex>,
    /// Credit weight charged to every faculty member holding a seat.
    pub credits: Fixed,
    pub required_seats: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Faculty {
    pub id: String,
    pub name: String,
    pub max_credits: Fixed,
    #[serde(default)]
    pub is_senior: bool,
    #[serde(rename = "preferred")]
    pub preferred_courses: BTreeSet<String>,
}

impl Faculty {
    pub fn prefers(&self, code: &str) -> bool {
        self.preferred_courses.contains(code)
    }
}

/// An immutable, validated problem definition.
#[derive(Clone, Debug)]
pub struct Instance {
    sections: Vec<CourseSection>,
    faculty: Vec<Faculty>,
    penalties: PenaltyConfig,
    section_by_id: HashMap<String, usize>,
    faculty_by_id: HashMap<String, usize>,
    // eligible[s] lists faculty indices preferring section s, instance order
    eligible: Vec<Vec<usize>>,
    // prefers[s * n_f + f]
    prefers: Vec<bool>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.sections == other.sections
            && self.faculty == other.faculty
            && self.penalties == other.penalties
    }
}

impl Instance {
    /// Validates every model invariant and the load-time feasibility screen
    /// (each section has at least `required_seats` eligible faculty).
    pub fn new(
        sections: Vec<CourseSection>,
        faculty: Vec<Faculty>,
        penalties: PenaltyConfig,
    ) -> Result<Self> {
        if faculty.is_empty() {
            return Err(Error::Validation("instance has no faculty".into()));
        }
        penalties.validate()?;

        let mut faculty_by_id = HashMap::with_capacity(faculty.len());
        for (i, f) in faculty.iter().enumerate() {
            if f.id.is_empty() || f.id.contains('|') {
                return Err(Error::Validation(format!(
                    "faculty id `{}` must be non-empty and must not contain '|'",
                    f.id
                )));
            }
            if faculty_by_id.insert(f.id.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate faculty id `{}`",
                    f.id
                )));
            }
            if f.max_credits <= Fixed::ZERO {
                return Err(Error::Validation(format!(
                    "faculty `{}` must have max_credits > 0",
                    f.id
                )));
            }
        }

        let mut section_by_id = HashMap::with_capacity(sections.len());
        for (i, s) in sections.iter().enumerate() {
            if s.id.is_empty() || s.id.contains('|') {
                return Err(Error::Validation(format!(
                    "section id `{}` must be non-empty and must not contain '|'",
                    s.id
                )));
            }
            if section_by_id.insert(s.id.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate section id `{}`",
                    s.id
                )));
            }
            if s.slots.is_empty() {
                return Err(Error::Validation(format!(
                    "section `{}` has no slots",
                    s.id
                )));
            }
            let distinct: BTreeSet<_> = s.slots.iter().collect();
            if distinct.len() != s.slots.len() {
                return Err(Error::Validation(format!(
                    "section `{}` lists a slot more than once",
                    s.id
                )));
            }
            if s.required_seats != s.kind.required_seats() {
                return Err(Error::Validation(format!(
                    "section `{}` of kind {} must have required_seats = {}",
                    s.id,
                    s.kind.tag(),
                    s.kind.required_seats()
                )));
            }
            if s.credits <= Fixed::ZERO {
                return Err(Error::Validation(format!(
                    "section `{}` must have credits > 0",
                    s.id
                )));
            }
        }

        let n_f = faculty.len();
        let mut eligible = Vec::with_capacity(sections.len());
        let mut prefers = vec![false; sections.len() * n_f];
        for (s_idx, s) in sections.iter().enumerate() {
            let list: Vec<usize> = faculty
                .iter()
                .enumerate()
                .filter(|(_, f)| f.prefers(&s.code))
                .map(|(i, _)| i)
                .collect();
            if list.len() < s.required_seats as usize {
                return Err(Error::Validation(format!(
                    "insufficient eligible faculty for section `{}` ({}): {} eligible, {} required",
                    s.id,
                    s.code,
                    list.len(),
                    s.required_seats
                )));
            }
            for &f in &list {
                prefers[s_idx * n_f + f] = true;
            }
            eligible.push(list);
        }

        Ok(Instance {
            sections,
            faculty,
            penalties,
            section_by_id,
            faculty_by_id,
            eligible,
            prefers,
        })
    }

    pub fn sections(&self) -> &[CourseSection] {
        &self.sections
    }

    pub fn faculty(&self) -> &[Faculty] {
        &self.faculty
    }

    pub fn penalties(&self) -> &PenaltyConfig {
        &self.penalties
    }

    pub fn section(&self, idx: usize) -> &CourseSection {
        &self.sections[idx]
    }

    pub fn faculty_member(&self, idx: usize) -> &Faculty {
        &self.faculty[idx]
    }

    pub fn n_faculty(&self) -> usize {
        self.faculty.len()
    }

    pub fn section_index(&self, id: &str) -> Option<usize> {
        self.section_by_id.get(id).copied()
    }

    pub fn faculty_index(&self, id: &str) -> Option<usize> {
        self.faculty_by_id.get(id).copied()
    }

    /// Indices of faculty preferring section `section`, in instance order.
    pub fn eligible(&self, section: usize) -> &[usize] {
        &self.eligible[section]
    }

    pub fn is_eligible(&self, section: usize, faculty: usize) -> bool {
        self.prefers[section * self.faculty.len() + faculty]
    }

    /// Total number of teaching seats (solution length).
    pub fn total_seats(&self) -> usize {
        self.sections
            .iter()
            .map(|s| s.required_seats as usize)
            .sum()
    }
}

/// Faculty whose preferred list contains the section's course code, in instance order.
pub fn eligible_faculty<'a>(instance: &'a Instance, section: &CourseSection) -> Vec<&'a Faculty> {
    instance
        .faculty()
        .iter()
        .filter(|f| f.prefers(&section.code))
        .collect()
}

/// One seat of a section held by one faculty member: `section|kind|faculty`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub section: usize,
    pub kind: Kind,
    pub faculty: usize,
}

/// An ordered list of seat assignments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Solution {
    elements: Vec<Assignment>,
}

impl Solution {
    /// Builds a solution and checks it is well formed over `instance`:
    /// valid references, matching kind tags, exactly `required_seats`
    /// elements per section, and distinct faculty within a section.
    pub fn new(instance: &Instance, elements: Vec<Assignment>) -> Result<Self> {
        let solution = Solution { elements };
        solution.check_well_formed(instance)?;
        Ok(solution)
    }

    /// Wraps elements without checking them. Used when reading a solution
    /// file that must be diagnosed rather than rejected.
    pub fn from_elements_unchecked(elements: Vec<Assignment>) -> Self {
        Solution { elements }
    }

    pub fn elements(&self) -> &[Assignment] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub(crate) fn set_faculty(&mut self, element: usize, faculty: usize) {
        self.elements[element].faculty = faculty;
    }

    /// Checks references and kind tags only.
    pub fn check_references(&self, instance: &Instance) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            if e.section >= instance.sections().len() {
                return Err(Error::Integrity(format!(
                    "element {i} references unknown section #{}",
                    e.section
                )));
            }
            if e.faculty >= instance.n_faculty() {
                return Err(Error::Integrity(format!(
                    "element {i} references unknown faculty #{}",
                    e.faculty
                )));
            }
            let kind = instance.section(e.section).kind;
            if e.kind != kind {
                return Err(Error::Integrity(format!(
                    "element {i} tags section `{}` as {} but it is {}",
                    instance.section(e.section).id,
                    e.kind.tag(),
                    kind.tag()
                )));
            }
        }
        Ok(())
    }

    pub fn check_well_formed(&self, instance: &Instance) -> Result<()> {
        self.check_references(instance)?;
        let mut staff: Vec<Vec<usize>> = vec![Vec::new(); instance.sections().len()];
        for e in &self.elements {
            staff[e.section].push(e.faculty);
        }
        for (s, faculty) in staff.iter_mut().enumerate() {
            let section = instance.section(s);
            if faculty.len() != section.required_seats as usize {
                return Err(Error::Validation(format!(
                    "section `{}` has {} seats assigned, expected {}",
                    section.id,
                    faculty.len(),
                    section.required_seats
                )));
            }
            faculty.sort_unstable();
            if faculty.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!(
                    "section `{}` lists the same faculty member twice",
                    section.id
                )));
            }
        }
        Ok(())
    }
}
