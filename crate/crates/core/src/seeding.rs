//! Hard-feasible starting solutions and synthetic benchmark instances.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::PenaltyConfig;
use crate::error::{Error, Result};
use crate::model::{
    slot_index, Assignment, CourseSection, Faculty, Instance, Kind, Solution, DAYS_PER_WEEK,
    SLOTS_PER_DAY,
};
use crate::units::Fixed;

/// Restart budget of the randomized greedy constructor.
pub const MAX_RESTARTS: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// An independent stream derived from this seed.
    pub fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(stream);
        rng
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

/// Uniform index in `0..n` that does not depend on the platform's `usize`.
pub(crate) fn pick(rng: &mut impl Rng, n: usize) -> usize {
    debug_assert!(n > 0 && n <= u32::MAX as usize);
    rng.gen_range(0..n as u32) as usize
}

/// The solution layout: one `(section, kind)` per seat, sections in
/// instance order, seats of a section adjacent.
pub fn seat_layout(instance: &Instance) -> Vec<(usize, Kind)> {
    instance
        .sections()
        .iter()
        .enumerate()
        .flat_map(|(i, s)| std::iter::repeat_n((i, s.kind), s.required_seats as usize))
        .collect()
}

/// Partial staffing used while constructing or repairing a solution.
pub(crate) struct Occupancy<'a> {
    instance: &'a Instance,
    slot_mask: Vec<u64>,
    credits: Vec<Fixed>,
    section_masks: Vec<u64>,
    staff: Vec<Vec<usize>>,
}

impl<'a> Occupancy<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let section_masks = instance
            .sections()
            .iter()
            .map(|s| {
                s.slots
                    .iter()
                    .fold(0u64, |m, slot| m | (1u64 << slot.value()))
            })
            .collect();
        Occupancy {
            instance,
            slot_mask: vec![0; instance.n_faculty()],
            credits: vec![Fixed::ZERO; instance.n_faculty()],
            section_masks,
            staff: vec![Vec::new(); instance.sections().len()],
        }
    }

    pub fn fits(&self, section: usize, faculty: usize) -> bool {
        self.instance.is_eligible(section, faculty)
            && !self.staff[section].contains(&faculty)
            && self.slot_mask[faculty] & self.section_masks[section] == 0
            && self.credits[faculty] + self.instance.section(section).credits
                <= self.instance.faculty_member(faculty).max_credits
    }

    pub fn assign(&mut self, section: usize, faculty: usize) {
        self.slot_mask[faculty] |= self.section_masks[section];
        self.credits[faculty] += self.instance.section(section).credits;
        self.staff[section].push(faculty);
    }

    /// Uniform choice among eligible faculty that fit, if any.
    pub fn choose(&self, section: usize, rng: &mut impl Rng) -> Option<usize> {
        let candidates: Vec<usize> = self
            .instance
            .eligible(section)
            .iter()
            .copied()
            .filter(|&f| self.fits(section, f))
            .collect();
        (!candidates.is_empty()).then(|| candidates[pick(rng, candidates.len())])
    }
}

fn greedy_order(instance: &Instance, rng: &mut impl Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instance.sections().len()).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| {
        let (sa, sb) = (instance.section(a), instance.section(b));
        sb.required_seats
            .cmp(&sa.required_seats)
            .then(sb.credits.cmp(&sa.credits))
    });
    order
}

fn greedy_attempt(instance: &Instance, rng: &mut impl Rng) -> std::result::Result<Solution, usize> {
    let mut occ = Occupancy::new(instance);
    for s in greedy_order(instance, rng) {
        for _ in 0..instance.section(s).required_seats {
            let f = occ.choose(s, rng).ok_or(s)?;
            occ.assign(s, f);
        }
    }
    let mut next_seat = vec![0usize; instance.sections().len()];
    let elements = seat_layout(instance)
        .into_iter()
        .map(|(section, kind)| {
            let faculty = occ.staff[section][next_seat[section]];
            next_seat[section] += 1;
            Assignment {
                section,
                kind,
                faculty,
            }
        })
        .collect();
    Ok(Solution::from_elements_unchecked(elements))
}

/// Randomized greedy construction of a solution satisfying every hard
/// constraint, with up to `restarts` fresh orderings.
pub fn initial_solution_with_restarts(
    instance: &Instance,
    seed: RngSeed,
    restarts: usize,
) -> Result<Solution> {
    let mut rng = seed.rng();
    let mut first_failure = None;
    for _ in 0..restarts.max(1) {
        match greedy_attempt(instance, &mut rng) {
            Ok(solution) => {
                debug_assert!(solution.check_well_formed(instance).is_ok());
                return Ok(solution);
            }
            Err(section) => {
                first_failure.get_or_insert(section);
            }
        }
    }
    let section = first_failure
        .map(|s| instance.section(s).id.clone())
        .unwrap_or_default();
    Err(Error::Infeasible {
        section,
        attempts: restarts.max(1),
    })
}

/// A hard-feasible starting solution, deterministic per `(instance, seed)`.
pub fn initial_solution(instance: &Instance, seed: RngSeed) -> Result<Solution> {
    initial_solution_with_restarts(instance, seed, MAX_RESTARTS)
}

/// Rebuilds a feasible solution from a proposed faculty-per-element vector:
/// proposals that still fit are kept (visited in random order), the rest are
/// re-drawn uniformly from eligible faculty. `None` if some seat cannot be filled.
pub(crate) fn repair(
    instance: &Instance,
    layout: &[(usize, Kind)],
    proposal: &[usize],
    rng: &mut impl Rng,
) -> Option<Solution> {
    let mut occ = Occupancy::new(instance);
    let mut order: Vec<usize> = (0..layout.len()).collect();
    order.shuffle(rng);
    let mut chosen = vec![usize::MAX; layout.len()];
    let mut pending = Vec::new();
    for &e in &order {
        let section = layout[e].0;
        if occ.fits(section, proposal[e]) {
            occ.assign(section, proposal[e]);
            chosen[e] = proposal[e];
        } else {
            pending.push(e);
        }
    }
    for e in pending {
        let section = layout[e].0;
        let f = occ.choose(section, rng)?;
        occ.assign(section, f);
        chosen[e] = f;
    }
    let elements = layout
        .iter()
        .zip(chosen)
        .map(|(&(section, kind), faculty)| Assignment {
            section,
            kind,
            faculty,
        })
        .collect();
    Some(Solution::from_elements_unchecked(elements))
}

/// Parameters of the synthetic instance generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_faculty: usize,
    pub n_theory_sections: usize,
    pub n_lab_sections: usize,
    /// Sections sharing one course code.
    pub sections_per_course: usize,
    /// Probability a faculty member lists a given course code.
    pub preference_density: f64,
    /// Inclusive range of per-faculty credit limits, drawn in steps of 0.5.
    pub credit_limit_range: (Fixed, Fixed),
    /// Probability that a section meets twice a week instead of once.
    pub two_meeting_probability: f64,
    pub senior_fraction: f64,
    pub theory_credits: Fixed,
    pub lab_credits: Fixed,
    pub penalties: PenaltyConfig,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            n_faculty: 8,
            n_theory_sections: 16,
            n_lab_sections: 4,
            sections_per_course: 2,
            preference_density: 0.4,
            credit_limit_range: (Fixed::from_units(90_000), Fixed::from_units(150_000)),
            two_meeting_probability: 0.5,
            senior_fraction: 0.2,
            theory_credits: Fixed::from_units(30_000),
            lab_credits: Fixed::from_units(15_000),
            penalties: PenaltyConfig::default(),
        }
    }
}

/// Maximum number of preference redraws before generation gives up.
const GENERATION_ATTEMPTS: usize = 50;
const GENERATION_SEED_RESTARTS: usize = 200;

impl GeneratorSpec {
    /// Roughly the size of a department's semester offering: about 100
    /// sections and 40 faculty with little spare teaching capacity.
    pub fn paper_scale() -> Self {
        GeneratorSpec {
            n_faculty: 40,
            n_theory_sections: 80,
            n_lab_sections: 24,
            sections_per_course: 3,
            preference_density: 0.2,
            credit_limit_range: (Fixed::from_units(60_000), Fixed::from_units(120_000)),
            two_meeting_probability: 0.7,
            senior_fraction: 0.25,
            ..GeneratorSpec::default()
        }
    }

    fn demand(&self) -> Fixed {
        self.theory_credits * self.n_theory_sections as i64
            + self.lab_credits * (2 * self.n_lab_sections) as i64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Generation(m));
        if self.n_faculty == 0 {
            return bad("n_faculty must be positive".into());
        }
        if self.n_theory_sections + self.n_lab_sections == 0 {
            return bad("at least one section is required".into());
        }
        if self.sections_per_course == 0 {
            return bad("sections_per_course must be positive".into());
        }
        if !(self.preference_density > 0.0 && self.preference_density <= 1.0) {
            return bad("preference_density must lie in (0, 1]".into());
        }
        for (name, p) in [
            ("two_meeting_probability", self.two_meeting_probability),
            ("senior_fraction", self.senior_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        let (lo, hi) = self.credit_limit_range;
        if lo <= Fixed::ZERO || hi < lo {
            return bad("credit_limit_range must satisfy 0 < min <= max".into());
        }
        if self.theory_credits <= Fixed::ZERO || self.lab_credits <= Fixed::ZERO {
            return bad("section credits must be positive".into());
        }
        let needed = if self.n_lab_sections > 0 { 2.0 } else { 1.0 };
        if self.n_lab_sections > 0 && self.n_faculty < 2 {
            return bad("lab sections need two distinct faculty but n_faculty < 2".into());
        }
        if (self.n_faculty as f64) * self.preference_density < needed {
            return bad(format!(
                "expected eligible faculty per section ({:.2}) is below the {needed} required seats",
                self.n_faculty as f64 * self.preference_density
            ));
        }
        if hi * (self.n_faculty as i64) < self.demand() {
            return bad(format!(
                "total credit demand {} exceeds the largest possible capacity {}",
                self.demand(),
                hi * self.n_faculty as i64
            ));
        }
        self.penalties.validate()
    }
}

fn course_codes(prefix: &str, kind: Kind, sections: usize, per_course: usize) -> Vec<String> {
    let n_codes = sections.div_ceil(per_course);
    (0..n_codes)
        .map(|i| format!("{prefix}{:03}{}", 101 + i, kind.tag()))
        .collect()
}

fn draw_slots(spec: &GeneratorSpec, rng: &mut impl Rng) -> Vec<crate::model::SlotIndex> {
    let meetings = if rng.gen_bool(spec.two_meeting_probability) {
        2
    } else {
        1
    };
    let period = rng.gen_range(0..SLOTS_PER_DAY);
    let mut days: Vec<u8> = (0..DAYS_PER_WEEK).collect();
    days.shuffle(rng);
    let mut picked: Vec<u8> = days.into_iter().take(meetings).collect();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|d| slot_index(d, period).expect("day and period in range"))
        .collect()
}

fn draw_credit_limit(spec: &GeneratorSpec, rng: &mut impl Rng) -> Fixed {
    let (lo, hi) = spec.credit_limit_range;
    let step = 5_000;
    let steps = (hi.units() - lo.units()) / step;
    Fixed::from_units(lo.units() + step * rng.gen_range(0..=steps))
}

/// Generates a synthetic instance. Deterministic per `(spec, seed)`; the
/// result passes load-time screening and admits a hard-feasible start.
pub fn generate_instance(spec: &GeneratorSpec, seed: RngSeed) -> Result<Instance> {
    spec.validate()?;
    let mut rng = seed.rng();

    let theory_codes = course_codes(
        "CSE",
        Kind::Theory,
        spec.n_theory_sections,
        spec.sections_per_course,
    );
    let lab_codes = course_codes(
        "CSE",
        Kind::Lab,
        spec.n_lab_sections,
        spec.sections_per_course,
    );

    let mut sections = Vec::new();
    for (kind, count, codes, credits) in [
        (
            Kind::Theory,
            spec.n_theory_sections,
            &theory_codes,
            spec.theory_credits,
        ),
        (Kind::Lab, spec.n_lab_sections, &lab_codes, spec.lab_credits),
    ] {
        for i in 0..count {
            let code = &codes[i / spec.sections_per_course];
            let number = i % spec.sections_per_course + 1;
            sections.push(CourseSection {
                id: format!("{code}-{number:02}"),
                code: code.clone(),
                kind,
                slots: draw_slots(spec, &mut rng),
                credits,
                required_seats: kind.required_seats(),
            });
        }
    }

    let n_senior = (spec.senior_fraction * spec.n_faculty as f64).round() as usize;
    let all_codes: Vec<(&String, usize)> = theory_codes
        .iter()
        .map(|c| (c, 1))
        .chain(lab_codes.iter().map(|c| (c, 2)))
        .collect();

    let mut last_err = None;
    for _ in 0..GENERATION_ATTEMPTS {
        let mut prefs: Vec<BTreeSet<String>> = vec![BTreeSet::new(); spec.n_faculty];
        for p in prefs.iter_mut() {
            for (code, _) in &all_codes {
                if rng.gen_bool(spec.preference_density) {
                    p.insert((*code).clone());
                }
            }
        }
        // top up codes with too few interested faculty
        for (code, needed) in &all_codes {
            let mut holders: Vec<usize> = (0..spec.n_faculty)
                .filter(|&f| prefs[f].contains(*code))
                .collect();
            while holders.len() < *needed {
                let f = pick(&mut rng, spec.n_faculty);
                if !holders.contains(&f) {
                    prefs[f].insert((*code).clone());
                    holders.push(f);
                }
            }
        }
        for p in prefs.iter_mut() {
            if p.is_empty() {
                let (code, _) = all_codes[pick(&mut rng, all_codes.len())];
                p.insert(code.clone());
            }
        }
        let faculty: Vec<Faculty> = prefs
            .into_iter()
            .enumerate()
            .map(|(i, preferred_courses)| Faculty {
                id: format!("F{:03}", i + 1),
                name: format!("Faculty {:03}", i + 1),
                max_credits: draw_credit_limit(spec, &mut rng),
                is_senior: i < n_senior,
                preferred_courses,
            })
            .collect();

        let instance = Instance::new(sections.clone(), faculty, spec.penalties)?;
        let probe = RngSeed(rng.gen());
        match initial_solution_with_restarts(&instance, probe, GENERATION_SEED_RESTARTS) {
            Ok(_) => return Ok(instance),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Generation(format!(
        "no seedable instance after {GENERATION_ATTEMPTS} preference draws (last: {})",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}
