//! Instances, schedules and the verifiers for every problem variant.
//!
//! Tasks are identified by 1-based indices into the *sorted* deadline list.
//! For (1 or 2)-Visits the single-visit tasks come first (`1..=m`) and the
//! double-visit tasks follow (`m+1..=m+n`), each group sorted on its own.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A sorted multiset of positive deadlines.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Deadlines(Vec<u64>);

impl Deadlines {
    /// Sorts `values` and checks that every deadline is at least one.
    pub fn new(values: impl Into<Vec<u64>>) -> Result<Self> {
        let mut values = values.into();
        if let Some(pos) = values.iter().position(|&d| d == 0) {
            return Err(invalid(format!("deadline #{} is zero", pos + 1)));
        }
        values.sort_unstable();
        Ok(Deadlines(values))
    }

    pub fn empty() -> Self {
        Deadlines(Vec::new())
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Deadline of the 1-based task `task`.
    pub fn of_task(&self, task: usize) -> Option<u64> {
        task.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    /// Distinct values in increasing order together with their multiplicities.
    pub fn value_counts(&self) -> Vec<(u64, usize)> {
        let mut out: Vec<(u64, usize)> = Vec::new();
        for &d in &self.0 {
            match out.last_mut() {
                Some((v, c)) if *v == d => *c += 1,
                _ => out.push((d, 1)),
            }
        }
        out
    }

    pub fn distinct_count(&self) -> usize {
        self.value_counts().len()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.value_counts().iter().map(|&(_, c)| c).max().unwrap_or(0)
    }

    pub fn is_simple_set(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    pub fn product_saturating(&self) -> u64 {
        self.0.iter().fold(1u64, |acc, &d| acc.saturating_mul(d))
    }
}

impl TryFrom<Vec<u64>> for Deadlines {
    type Error = Error;

    fn try_from(values: Vec<u64>) -> Result<Self> {
        Deadlines::new(values)
    }
}

impl From<Deadlines> for Vec<u64> {
    fn from(d: Deadlines) -> Self {
        d.0
    }
}

impl fmt::Display for Deadlines {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

/// A k-Visits instance: schedule length is exactly `k * n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KVisitsInstance {
    pub deadlines: Deadlines,
    pub k: u32,
}

impl KVisitsInstance {
    pub fn new(deadlines: Deadlines, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be positive"));
        }
        Ok(KVisitsInstance { deadlines, k })
    }

    pub fn horizon(&self) -> usize {
        self.k as usize * self.deadlines.len()
    }
}

/// A (1 or 2)-Visits instance with `m` single and `n` double tasks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneOrTwoInstance {
    pub single: Deadlines,
    pub double: Deadlines,
}

impl OneOrTwoInstance {
    pub fn new(single: Deadlines, double: Deadlines) -> Self {
        OneOrTwoInstance { single, double }
    }

    pub fn m(&self) -> usize {
        self.single.len()
    }

    pub fn n(&self) -> usize {
        self.double.len()
    }

    pub fn horizon(&self) -> usize {
        self.m() + 2 * self.n()
    }

    /// Deadline of task `task` under the singles-first numbering.
    pub fn deadline_of(&self, task: usize) -> Option<u64> {
        if task <= self.m() {
            self.single.of_task(task)
        } else {
            self.double.of_task(task - self.m())
        }
    }

    pub fn is_normalized(&self) -> bool {
        let h = self.horizon() as u64;
        self.single.max().is_none_or(|d| d <= h) && self.double.max().is_none_or(|d| d <= h)
    }

    /// Drops tasks whose deadline exceeds the horizon until none is left.
    ///
    /// A dropped task can always be appended at the very end of a schedule
    /// of the remaining tasks, so feasibility is unchanged.
    pub fn normalize(&self) -> OneOrTwoInstance {
        let mut single = self.single.values().to_vec();
        let mut double = self.double.values().to_vec();
        loop {
            let h = (single.len() + 2 * double.len()) as u64;
            let before = single.len() + double.len();
            single.retain(|&d| d <= h);
            double.retain(|&d| d <= h);
            if single.len() + double.len() == before {
                break;
            }
        }
        OneOrTwoInstance {
            single: Deadlines(single),
            double: Deadlines(double),
        }
    }
}

/// Removes deadlines larger than `k * n`, repeating until stable.
///
/// A task whose deadline exceeds the full horizon never expires: all of its
/// visits fit in the trailing block of the schedule. Each removal shrinks
/// `n`, which can expose further removable deadlines, so the rule is applied
/// to a fixpoint.
pub fn normalize(deadlines: &Deadlines, k: u32) -> Deadlines {
    let mut values = deadlines.values().to_vec();
    while let Some(&last) = values.last() {
        if last > k as u64 * values.len() as u64 {
            values.pop();
        } else {
            break;
        }
    }
    Deadlines(values)
}

/// Role of a visit inside a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Single,
    Primary,
    Secondary,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub pos: usize,
    pub task: usize,
    pub role: Role,
}

/// A finite schedule whose positions are exactly `1..=len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct Schedule {
    entries: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    entries: Vec<Entry>,
}

impl TryFrom<RawSchedule> for Schedule {
    type Error = Error;
    fn try_from(raw: RawSchedule) -> Result<Self> {
        Schedule::new(raw.entries)
    }
}

impl From<Schedule> for RawSchedule {
    fn from(s: Schedule) -> Self {
        RawSchedule { entries: s.entries }
    }
}

impl Schedule {
    /// Sorts `entries` by position and checks the positions are `1..=len`.
    pub fn new(mut entries: Vec<Entry>) -> Result<Self> {
        entries.sort_by_key(|e| e.pos);
        for (i, e) in entries.iter().enumerate() {
            if e.pos != i + 1 {
                return Err(invalid(format!(
                    "schedule positions must be 1..={} without gaps or repeats; found {} at slot {}",
                    entries.len(),
                    e.pos,
                    i + 1
                )));
            }
        }
        Ok(Schedule { entries })
    }

    /// A schedule of plain visits, one task per position.
    pub fn plain(tasks: &[usize]) -> Self {
        Schedule {
            entries: tasks
                .iter()
                .enumerate()
                .map(|(i, &task)| Entry {
                    pos: i + 1,
                    task,
                    role: Role::Plain,
                })
                .collect(),
        }
    }

    /// Builds a schedule from a per-position `(task, role)` table.
    pub fn from_slots(slots: &[(usize, Role)]) -> Self {
        Schedule {
            entries: slots
                .iter()
                .enumerate()
                .map(|(i, &(task, role))| Entry {
                    pos: i + 1,
                    task,
                    role,
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tasks(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.task).collect()
    }

    /// The sub-schedule of positions `from..=to`, renumbered from 1.
    pub fn window(&self, from: usize, to: usize) -> Schedule {
        Schedule {
            entries: self.entries[from - 1..to]
                .iter()
                .enumerate()
                .map(|(i, e)| Entry { pos: i + 1, ..*e })
                .collect(),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", e.task)?;
        }
        Ok(())
    }
}

/// Why a schedule was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    LengthMismatch { expected: usize, actual: usize },
    UnknownTask,
    TooManyVisits { expected: usize },
    TooFewVisits { expected: usize, actual: usize },
    DeadlineExpired { deadline: u64, gap: usize },
    WrongRole { found: Role },
    DuplicateRole { role: Role },
    MissingRole { role: Role },
    PrimaryTooLate { deadline: u64 },
    SecondaryTooLate { deadline: u64, primary: usize },
    SingleTooLate { deadline: u64 },
    TaskAbsent,
}

/// The first violated constraint of a rejected schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub task: Option<usize>,
    pub position: Option<usize>,
    pub reason: Reason,
}

/// Outcome of a verifier. A feasible verdict never carries a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    feasible: bool,
    witness: Option<Violation>,
}

impl Verdict {
    pub fn feasible() -> Self {
        Verdict {
            feasible: true,
            witness: None,
        }
    }

    pub fn infeasible(witness: Violation) -> Self {
        Verdict {
            feasible: false,
            witness: Some(witness),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    pub fn witness(&self) -> Option<&Violation> {
        self.witness.as_ref()
    }

    /// Keeps the violation that occurs earliest in position order.
    fn earliest(mut found: Vec<Violation>) -> Self {
        found.sort_by_key(|v| (v.position.unwrap_or(usize::MAX), v.task.unwrap_or(0)));
        match found.into_iter().next() {
            Some(v) => Verdict::infeasible(v),
            None => Verdict::feasible(),
        }
    }
}

fn violation(task: usize, position: Option<usize>, reason: Reason) -> Violation {
    Violation {
        task: Some(task),
        position,
        reason,
    }
}

fn length_mismatch(expected: usize, actual: usize) -> Verdict {
    Verdict::infeasible(Violation {
        task: None,
        position: None,
        reason: Reason::LengthMismatch { expected, actual },
    })
}

/// Checks a plain schedule against the k-Visits definition. Roles are ignored.
pub fn verify_k_visits(inst: &KVisitsInstance, sched: &Schedule) -> Verdict {
    let n = inst.deadlines.len();
    let k = inst.k as usize;
    if sched.len() != inst.horizon() {
        return length_mismatch(inst.horizon(), sched.len());
    }
    let mut last = vec![0usize; n + 1];
    let mut count = vec![0usize; n + 1];
    let mut found = Vec::new();
    for e in sched.entries() {
        let Some(d) = inst.deadlines.of_task(e.task) else {
            found.push(violation(e.task, Some(e.pos), Reason::UnknownTask));
            continue;
        };
        count[e.task] += 1;
        if count[e.task] > k {
            found.push(violation(
                e.task,
                Some(e.pos),
                Reason::TooManyVisits { expected: k },
            ));
            continue;
        }
        let gap = e.pos - last[e.task];
        if gap as u64 > d {
            found.push(violation(
                e.task,
                Some(e.pos),
                Reason::DeadlineExpired { deadline: d, gap },
            ));
        }
        last[e.task] = e.pos;
    }
    for task in 1..=n {
        if count[task] < k {
            let d = inst.deadlines.values()[task - 1] as usize;
            let due = last[task] + d + 1;
            found.push(violation(
                task,
                (due <= sched.len()).then_some(due),
                Reason::TooFewVisits {
                    expected: k,
                    actual: count[task],
                },
            ));
        }
    }
    Verdict::earliest(found)
}

#[derive(Clone, Copy, Default)]
struct RoleSlots {
    primary: Option<usize>,
    secondary: Option<usize>,
}

/// Collects primary/secondary positions for tasks `offset+1..=offset+n`.
fn check_double_visits(
    deadlines: &Deadlines,
    offset: usize,
    slots: &[RoleSlots],
    found: &mut Vec<Violation>,
) {
    for (i, s) in slots.iter().enumerate() {
        let task = offset + i + 1;
        let d = deadlines.values()[i];
        let (Some(p), Some(q)) = (s.primary, s.secondary) else {
            let role = if s.primary.is_none() {
                Role::Primary
            } else {
                Role::Secondary
            };
            found.push(violation(task, None, Reason::MissingRole { role }));
            continue;
        };
        if p as u64 > d {
            found.push(violation(task, Some(p), Reason::PrimaryTooLate { deadline: d }));
        }
        if q > p && (q - p) as u64 > d {
            found.push(violation(
                task,
                Some(q),
                Reason::SecondaryTooLate {
                    deadline: d,
                    primary: p,
                },
            ));
        }
    }
}

fn record_role(slot: &mut RoleSlots, e: &Entry, found: &mut Vec<Violation>) {
    let target = match e.role {
        Role::Primary => &mut slot.primary,
        Role::Secondary => &mut slot.secondary,
        other => {
            found.push(violation(e.task, Some(e.pos), Reason::WrongRole { found: other }));
            return;
        }
    };
    if target.is_some() {
        found.push(violation(e.task, Some(e.pos), Reason::DuplicateRole { role: e.role }));
    } else {
        *target = Some(e.pos);
    }
}

/// Checks a role-labelled schedule against the 2-Visits definition: each
/// primary within `d` of the start, each secondary either before its
/// primary or at most `d` after it.
pub fn verify_two_visits(deadlines: &Deadlines, sched: &Schedule) -> Verdict {
    let n = deadlines.len();
    if sched.len() != 2 * n {
        return length_mismatch(2 * n, sched.len());
    }
    let mut slots = vec![RoleSlots::default(); n];
    let mut found = Vec::new();
    for e in sched.entries() {
        if e.task == 0 || e.task > n {
            found.push(violation(e.task, Some(e.pos), Reason::UnknownTask));
            continue;
        }
        record_role(&mut slots[e.task - 1], e, &mut found);
    }
    check_double_visits(deadlines, 0, &slots, &mut found);
    Verdict::earliest(found)
}

/// Checks a schedule against the (1 or 2)-Visits definition.
pub fn verify_one_or_two(inst: &OneOrTwoInstance, sched: &Schedule) -> Verdict {
    let (m, n) = (inst.m(), inst.n());
    if sched.len() != inst.horizon() {
        return length_mismatch(inst.horizon(), sched.len());
    }
    let mut single_at: Vec<Option<usize>> = vec![None; m];
    let mut slots = vec![RoleSlots::default(); n];
    let mut found = Vec::new();
    for e in sched.entries() {
        if e.task == 0 || e.task > m + n {
            found.push(violation(e.task, Some(e.pos), Reason::UnknownTask));
        } else if e.task <= m {
            if e.role != Role::Single {
                found.push(violation(e.task, Some(e.pos), Reason::WrongRole { found: e.role }));
            } else if single_at[e.task - 1].is_some() {
                found.push(violation(e.task, Some(e.pos), Reason::TooManyVisits { expected: 1 }));
            } else {
                single_at[e.task - 1] = Some(e.pos);
            }
        } else {
            record_role(&mut slots[e.task - m - 1], e, &mut found);
        }
    }
    for (i, at) in single_at.iter().enumerate() {
        let d = inst.single.values()[i];
        match at {
            None => found.push(violation(
                i + 1,
                None,
                Reason::TooFewVisits {
                    expected: 1,
                    actual: 0,
                },
            )),
            Some(p) if *p as u64 > d => {
                found.push(violation(i + 1, Some(*p), Reason::SingleTooLate { deadline: d }))
            }
            Some(_) => {}
        }
    }
    check_double_visits(&inst.double, m, &slots, &mut found);
    Verdict::earliest(found)
}

/// Exact density: the sum of reciprocal deadlines.
pub fn density(deadlines: &Deadlines) -> BigRational {
    density_of(deadlines.values())
}

pub(crate) fn density_of(values: &[u64]) -> BigRational {
    values.iter().fold(BigRational::zero(), |acc, &d| {
        acc + BigRational::new(BigInt::one(), BigInt::from(d))
    })
}

/// `√2 − 1/2` as a float, for reporting only.
pub const SQRT2_MINUS_HALF: f64 = std::f64::consts::SQRT_2 - 0.5;

/// Exact test of `r ≤ √2 − 1/2`.
///
/// For `r = p/q` with `q > 0` this is `2p + q ≤ 2√2·q`; when the left side
/// is non-negative both sides can be squared: `(2p + q)² ≤ 8q²`.
pub fn at_most_sqrt2_minus_half(r: &BigRational) -> bool {
    let p = r.numer();
    let q = r.denom();
    debug_assert!(q.is_positive());
    let lhs: BigInt = BigInt::from(2) * p + q;
    if lhs.is_negative() {
        return true;
    }
    &lhs * &lhs <= BigInt::from(8) * q * q
}

/// Density thresholds used by sweeps and checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    /// `√2 − 1/2`
    Sqrt2Half,
    One,
}

impl Threshold {
    pub fn admits(self, r: &BigRational) -> bool {
        match self {
            Threshold::Sqrt2Half => at_most_sqrt2_minus_half(r),
            Threshold::One => *r <= BigRational::one(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dl(v: &[u64]) -> Deadlines {
        Deadlines::new(v.to_vec()).unwrap()
    }

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn deadlines_sort_and_reject_zero() {
        assert_eq!(dl(&[5, 1, 3]).values(), &[1, 3, 5]);
        assert!(Deadlines::new(vec![2, 0]).is_err());
        assert_eq!(dl(&[2, 2, 3]).max_multiplicity(), 2);
        assert_eq!(dl(&[2, 2, 3]).distinct_count(), 2);
        assert!(dl(&[1, 2, 3]).is_simple_set());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&dl(&[1, 2, 99]), 2), dl(&[1, 2]));
        assert_eq!(normalize(&dl(&[2, 2]), 2), dl(&[2, 2]));
        assert_eq!(normalize(&dl(&[2, 3, 50]), 3), dl(&[2, 3]));
        assert_eq!(normalize(&Deadlines::empty(), 2), Deadlines::empty());
        // A single pass would stop after dropping 100.
        assert_eq!(normalize(&dl(&[1, 5, 7, 100]), 2), dl(&[1]));
    }

    #[test]
    fn k_visits_examples() {
        let d = dl(&[2, 5, 6, 7, 8, 9, 10, 11]);
        let by_deadline = [
            2, 2, 2, 10, 5, 6, 7, 8, 9, 5, 11, 6, 7, 10, 5, 8, 6, 9, 7, 8, 9, 11, 10, 11,
        ];
        let tasks: Vec<usize> = by_deadline
            .iter()
            .map(|&x| d.values().iter().position(|&y| y == x).unwrap() + 1)
            .collect();
        let inst = KVisitsInstance::new(d, 3).unwrap();
        assert!(verify_k_visits(&inst, &Schedule::plain(&tasks)).is_feasible());

        let inst = KVisitsInstance::new(dl(&[1]), 1).unwrap();
        assert!(verify_k_visits(&inst, &Schedule::plain(&[1])).is_feasible());

        let inst = KVisitsInstance::new(dl(&[2, 2]), 2).unwrap();
        let v = verify_k_visits(&inst, &Schedule::plain(&[1, 1, 2, 2]));
        let w = v.witness().unwrap();
        assert_eq!((w.task, w.position), (Some(2), Some(3)));
        assert!(matches!(w.reason, Reason::DeadlineExpired { deadline: 2, gap: 3 }));
    }

    #[test]
    fn k_visits_rejects_structural_errors() {
        let inst = KVisitsInstance::new(dl(&[2, 2]), 2).unwrap();
        let v = verify_k_visits(&inst, &Schedule::plain(&[1, 2, 1]));
        assert!(matches!(v.witness().unwrap().reason, Reason::LengthMismatch { .. }));
        let v = verify_k_visits(&inst, &Schedule::plain(&[1, 2, 3, 2]));
        assert_eq!(v.witness().unwrap().reason, Reason::UnknownTask);
        let v = verify_k_visits(&inst, &Schedule::plain(&[1, 2, 1, 1]));
        assert!(matches!(v.witness().unwrap().reason, Reason::TooManyVisits { .. }));
    }

    #[test]
    fn two_visits_examples() {
        use Role::*;
        let s = Schedule::from_slots(&[(1, Primary), (2, Primary), (1, Secondary), (2, Secondary)]);
        assert!(verify_two_visits(&dl(&[2, 2]), &s).is_feasible());

        let s = Schedule::from_slots(&[
            (1, Secondary),
            (1, Primary),
            (2, Primary),
            (3, Primary),
            (2, Secondary),
            (3, Secondary),
        ]);
        assert!(verify_two_visits(&dl(&[4, 4, 4]), &s).is_feasible());

        let s = Schedule::from_slots(&[(1, Primary), (2, Primary), (1, Plain), (2, Secondary)]);
        let v = verify_two_visits(&dl(&[2, 2]), &s);
        assert_eq!(v.witness().unwrap().reason, Reason::WrongRole { found: Plain });
    }

    #[test]
    fn one_or_two_examples() {
        use Role::*;
        let inst = OneOrTwoInstance::new(dl(&[1]), dl(&[2]));
        let ok = Schedule::from_slots(&[(1, Single), (2, Primary), (2, Secondary)]);
        assert!(verify_one_or_two(&inst, &ok).is_feasible());
        let bad = Schedule::from_slots(&[(2, Primary), (1, Single), (2, Secondary)]);
        let v = verify_one_or_two(&inst, &bad);
        assert_eq!(v.witness().unwrap().task, Some(1));
        assert!(matches!(v.witness().unwrap().reason, Reason::SingleTooLate { deadline: 1 }));

        // Brute force over all length-4 schedules (oracle script) reports
        // this instance feasible; this labelling is one witness.
        let inst = OneOrTwoInstance::new(dl(&[1, 3]), dl(&[4]));
        let s = Schedule::from_slots(&[(1, Single), (3, Primary), (2, Single), (3, Secondary)]);
        assert!(verify_one_or_two(&inst, &s).is_feasible());
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&dl(&[2, 3, 6])), ratio(1, 1));
        assert_eq!(density(&dl(&[4, 4, 4])), ratio(3, 4));
        for x in 2..20 {
            assert_eq!(density(&dl(&[2, 3, x])), ratio(5, 6) + ratio(1, x as i64));
        }
    }

    #[test]
    fn sqrt2_threshold_is_exact_at_the_boundary() {
        // 0.9142135623... lies between these two neighbours.
        assert!(at_most_sqrt2_minus_half(&ratio(9_142_135, 10_000_000)));
        assert!(!at_most_sqrt2_minus_half(&ratio(9_142_136, 10_000_000)));
        assert!(at_most_sqrt2_minus_half(&ratio(1, 2)));
        assert!(!at_most_sqrt2_minus_half(&ratio(1, 1)));
        assert!(Threshold::One.admits(&ratio(1, 1)));
    }

    #[test]
    fn one_or_two_normalize_drops_to_fixpoint() {
        let inst = OneOrTwoInstance::new(dl(&[1, 50]), dl(&[2, 9]));
        let n = inst.normalize();
        assert_eq!(n.single, dl(&[1]));
        assert_eq!(n.double, dl(&[2]));
        assert!(n.is_normalized());
    }

    #[test]
    fn schedule_positions_must_be_contiguous() {
        let e = |pos| Entry { pos, task: 1, role: Role::Plain };
        assert!(Schedule::new(vec![e(2), e(1)]).is_ok());
        assert!(Schedule::new(vec![e(1), e(3)]).is_err());
        assert!(Schedule::new(vec![e(1), e(1)]).is_err());
    }
}
