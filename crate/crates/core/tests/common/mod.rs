//! Test oracles written independently of the library's evaluator: a
//! direct transcription of the scoring rules and an exhaustive search over
//! every feasible allocation of a small instance.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ucap::model::{Assignment, Kind};
use ucap::{generate_instance, Fixed, GeneratorSpec, Instance, RngSeed, Score, Solution};

const UNIT: i64 = 10_000;

/// Hard-violation total and score, computed from scratch.
pub fn naive_score(instance: &Instance, solution: &Solution) -> (u64, Score) {
    let n_f = instance.n_faculty();
    let p = instance.penalties();
    let mut hcv = 0u64;

    for (s, section) in instance.sections().iter().enumerate() {
        let staff: Vec<usize> = solution
            .elements()
            .iter()
            .filter(|e| e.section == s)
            .map(|e| e.faculty)
            .collect();
        let distinct: BTreeSet<usize> = staff.iter().copied().collect();
        let bad = match section.kind {
            Kind::Theory => staff.len() != 1,
            Kind::Lab => distinct.len() < 2,
        };
        hcv += bad as u64;
    }

    let mut numerator = 0i64;
    for f in 0..n_f {
        let member = instance.faculty_member(f);
        let mine: Vec<&Assignment> = solution
            .elements()
            .iter()
            .filter(|e| e.faculty == f)
            .collect();
        let mut load = [0u32; 36];
        let mut credits = 0i64;
        let mut labs = 0i64;
        for e in &mine {
            let section = instance.section(e.section);
            for slot in &section.slots {
                load[slot.value() as usize] += 1;
            }
            credits += section.credits.units();
            if section.kind == Kind::Lab {
                labs += 1;
            }
            if !member.preferred_courses.contains(&section.code) {
                hcv += 1;
            }
        }
        hcv += load
            .iter()
            .map(|&n| n.saturating_sub(1) as u64)
            .sum::<u64>();
        if credits > member.max_credits.units() {
            hcv += 1;
        }

        let mut penalty = 0i64;
        let mut working_days = 0;
        for day in 0..6 {
            let taught: Vec<usize> = (0..6).filter(|&q| load[day * 6 + q] > 0).collect();
            if taught.is_empty() {
                continue;
            }
            working_days += 1;
            if taught.len() > 4 {
                penalty += p.over_slots_per_day.units();
            }
            if (0..=2).any(|start| (start..start + 4).all(|q| taught.contains(&q))) {
                penalty += p.consecutive_four.units();
            }
            let (first, last) = (taught[0], *taught.last().unwrap());
            let idle = (first + 1..last).filter(|q| !taught.contains(q)).count() as i64;
            penalty += idle * p.idle_gap.units();
            if member.is_senior && taught[0] == 0 {
                penalty += p.senior_early.units();
            }
        }
        if working_days > 5 {
            penalty += (working_days - 5) * p.over_days.units();
        }
        if member.is_senior {
            penalty += labs * p.senior_lab.units();
        }
        numerator += (UNIT - penalty).max(0);
    }

    let denominator = n_f as u64 * UNIT as u64;
    let score = if hcv == 0 {
        Score::new(numerator as u64, denominator)
    } else {
        Score::zero(denominator)
    };
    (hcv, score)
}

pub struct Optimum {
    pub best: Score,
    pub solution: Solution,
    pub feasible_count: u64,
}

/// Enumerates every feasible allocation (lab seat order ignored) and
/// returns the best score, or `None` once more than `limit` are found.
pub fn exhaustive_optimum(instance: &Instance, limit: u64) -> Option<Optimum> {
    struct Walk<'a> {
        instance: &'a Instance,
        masks: Vec<u64>,
        credits: Vec<i64>,
        picks: Vec<Vec<usize>>,
        best: Option<(Score, Vec<Vec<usize>>)>,
        count: u64,
        limit: u64,
    }

    impl Walk<'_> {
        fn fits(&self, s: usize, f: usize) -> bool {
            let section = self.instance.section(s);
            let member = self.instance.faculty_member(f);
            member.preferred_courses.contains(&section.code)
                && self.masks[f] & mask(s, self.instance) == 0
                && self.credits[f] + section.credits.units() <= member.max_credits.units()
        }

        fn take(&mut self, s: usize, f: usize) {
            self.masks[f] |= mask(s, self.instance);
            self.credits[f] += self.instance.section(s).credits.units();
        }

        fn give_back(&mut self, s: usize, f: usize) {
            self.masks[f] &= !mask(s, self.instance);
            self.credits[f] -= self.instance.section(s).credits.units();
        }

        fn go(&mut self, s: usize) -> bool {
            if s == self.instance.sections().len() {
                self.count += 1;
                if self.count > self.limit {
                    return false;
                }
                let solution = build(self.instance, &self.picks);
                let (hcv, score) = naive_score(self.instance, &solution);
                assert_eq!(hcv, 0, "enumerated allocation must be feasible");
                if self.best.as_ref().is_none_or(|(b, _)| score > *b) {
                    self.best = Some((score, self.picks.clone()));
                }
                return true;
            }
            let n_f = self.instance.n_faculty();
            match self.instance.section(s).kind {
                Kind::Theory => {
                    for f in 0..n_f {
                        if self.fits(s, f) {
                            self.take(s, f);
                            self.picks.push(vec![f]);
                            let go_on = self.go(s + 1);
                            self.picks.pop();
                            self.give_back(s, f);
                            if !go_on {
                                return false;
                            }
                        }
                    }
                }
                Kind::Lab => {
                    for a in 0..n_f {
                        if !self.fits(s, a) {
                            continue;
                        }
                        self.take(s, a);
                        for b in a + 1..n_f {
                            if self.fits(s, b) {
                                self.take(s, b);
                                self.picks.push(vec![a, b]);
                                let go_on = self.go(s + 1);
                                self.picks.pop();
                                self.give_back(s, b);
                                if !go_on {
                                    self.give_back(s, a);
                                    return false;
                                }
                            }
                        }
                        self.give_back(s, a);
                    }
                }
            }
            true
        }
    }

    let n_f = instance.n_faculty();
    let mut walk = Walk {
        instance,
        masks: vec![0; n_f],
        credits: vec![0; n_f],
        picks: Vec::new(),
        best: None,
        count: 0,
        limit,
    };
    if !walk.go(0) {
        return None;
    }
    let (best, picks) = walk.best?;
    Some(Optimum {
        best,
        solution: build(instance, &picks),
        feasible_count: walk.count,
    })
}

fn mask(s: usize, instance: &Instance) -> u64 {
    instance
        .section(s)
        .slots
        .iter()
        .fold(0, |m, slot| m | 1 << slot.value())
}

fn build(instance: &Instance, picks: &[Vec<usize>]) -> Solution {
    let elements = picks
        .iter()
        .enumerate()
        .flat_map(|(s, staff)| {
            let kind = instance.section(s).kind;
            staff.iter().map(move |&faculty| Assignment {
                section: s,
                kind,
                faculty,
            })
        })
        .collect();
    Solution::new(instance, elements).expect("enumerated allocation is well formed")
}

/// A generated instance small enough to enumerate.
pub fn small_spec() -> GeneratorSpec {
    GeneratorSpec {
        n_faculty: 5,
        n_theory_sections: 12,
        n_lab_sections: 2,
        sections_per_course: 2,
        preference_density: 0.6,
        two_meeting_probability: 1.0,
        senior_fraction: 0.5,
        credit_limit_range: (Fixed::from_units(90_000), Fixed::from_units(150_000)),
        ..GeneratorSpec::default()
    }
}

/// Whether `score` is within `hundredths`/100 of `target`, exactly.
pub fn within(score: Score, target: Score, hundredths: u64) -> bool {
    let lhs = target.numerator() as u128 * score.denominator() as u128;
    let rhs = score.numerator() as u128 * target.denominator() as u128;
    let tol = hundredths as u128 * target.denominator() as u128 * score.denominator() as u128;
    lhs <= rhs || (lhs - rhs) * 100 <= tol
}

pub fn small_instance(seed: u64) -> Instance {
    generate_instance(&small_spec(), RngSeed(seed)).expect("small instance generates")
}

/// The first `count` small instances (from seed `first` upward) with at
/// most `limit` feasible allocations, paired with their optima.
pub fn enumerable_instances(first: u64, count: usize, limit: u64) -> Vec<(u64, Instance, Optimum)> {
    (first..)
        .filter_map(|seed| {
            let inst = small_instance(seed);
            exhaustive_optimum(&inst, limit).map(|opt| (seed, inst, opt))
        })
        .take(count)
        .collect()
}

/// Best score among feasible allocations reachable from `start` through
/// feasible single-seat faculty replacements (breadth-first; lab seat order
/// ignored). `None` if more than `limit` states are visited.
pub fn replacement_reachable_best(
    instance: &Instance,
    start: &Solution,
    limit: usize,
) -> Option<Score> {
    use std::collections::{HashSet, VecDeque};

    let kinds: Vec<(usize, Kind)> = start
        .elements()
        .iter()
        .map(|e| (e.section, e.kind))
        .collect();
    let canonical = |faculty: &[usize]| {
        let mut k = faculty.to_vec();
        for i in 1..k.len() {
            if kinds[i].0 == kinds[i - 1].0 && k[i - 1] > k[i] {
                k.swap(i - 1, i);
            }
        }
        k
    };
    let assemble = |faculty: &[usize]| {
        Solution::from_elements_unchecked(
            kinds
                .iter()
                .zip(faculty)
                .map(|(&(section, kind), &faculty)| Assignment {
                    section,
                    kind,
                    faculty,
                })
                .collect(),
        )
    };

    let first: Vec<usize> = start.elements().iter().map(|e| e.faculty).collect();
    let mut seen = HashSet::from([canonical(&first)]);
    let mut queue = VecDeque::from([first]);
    let mut best = naive_score(instance, start).1;
    while let Some(current) = queue.pop_front() {
        for i in 0..current.len() {
            for &f in instance.eligible(kinds[i].0) {
                if f == current[i] {
                    continue;
                }
                let mut next = current.clone();
                next[i] = f;
                let key = canonical(&next);
                if seen.contains(&key) {
                    continue;
                }
                let (hcv, score) = naive_score(instance, &assemble(&next));
                if hcv == 0 {
                    best = best.max(score);
                    seen.insert(key);
                    if seen.len() > limit {
                        return None;
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Some(best)
}
