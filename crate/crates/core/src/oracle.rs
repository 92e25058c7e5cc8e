//! Exhaustive decision procedures used as ground truth by the test suites.
//!
//! The k-Visits search walks schedules position by position over states
//! `(time to expiry, visits left)` per task. Tasks with equal deadlines are
//! interchangeable, so refuted states are stored in a canonical order.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::discretized_sequence;
use crate::error::{Error, Result};
use crate::model::{
    normalize, verify_k_visits, verify_one_or_two, verify_two_visits, Deadlines, KVisitsInstance,
    OneOrTwoInstance, Role, Schedule,
};
use crate::posmatch::{solve_brute_force, two_visits_to_pm};

/// Extra restrictions for [`k_visits_decide`]. They only remove schedules.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchConstraints {
    /// These positions must hold pairwise distinct tasks.
    pub distinct_at: Option<BTreeSet<usize>>,
    /// A task's first visit may only come once every task with a smaller
    /// deadline has been visited.
    pub sorted_first_visits: bool,
}

impl SearchConstraints {
    pub fn none() -> Self {
        Self::default()
    }

    /// Checks a finished schedule against the constraints.
    pub fn admits(&self, deadlines: &Deadlines, sched: &Schedule) -> bool {
        if let Some(at) = &self.distinct_at {
            let mut seen = HashSet::new();
            for e in sched.entries() {
                if at.contains(&e.pos) && !seen.insert(e.task) {
                    return false;
                }
            }
        }
        if self.sorted_first_visits {
            let mut seen = HashSet::new();
            let mut last = 0;
            for e in sched.entries() {
                if seen.insert(e.task) {
                    let d = deadlines.values()[e.task - 1];
                    if d < last {
                        return false;
                    }
                    last = d;
                }
            }
        }
        true
    }
}

pub const DEFAULT_NODE_CAP: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub feasible: bool,
    pub witness: Option<Schedule>,
    pub nodes: u64,
}

struct KSearch<'a> {
    d: Vec<u32>,
    k: u32,
    /// Tasks with equal deadlines share a group index.
    group_of: Vec<usize>,
    remaining: Vec<u32>,
    left: Vec<u32>,
    mask: u64,
    path: Vec<usize>,
    horizon: usize,
    constraints: &'a SearchConstraints,
    dead: HashSet<Vec<u64>>,
    nodes: u64,
    cap: u64,
}

impl KSearch<'_> {
    fn key(&self) -> Vec<u64> {
        let mut key: Vec<u64> = (0..self.d.len())
            .map(|i| {
                let bit = (self.mask >> i & 1) as u64;
                (self.group_of[i] as u64) << 48
                    | (self.remaining[i] as u64) << 24
                    | (self.left[i] as u64) << 1
                    | bit
            })
            .collect();
        key.sort_unstable();
        key
    }

    fn signature(&self, i: usize) -> (usize, u32, u32, u64) {
        (self.group_of[i], self.remaining[i], self.left[i], self.mask >> i & 1)
    }

    fn allowed(&self, i: usize, pos: usize) -> bool {
        if let Some(at) = &self.constraints.distinct_at {
            if at.contains(&pos) && self.mask >> i & 1 == 1 {
                return false;
            }
        }
        if self.constraints.sorted_first_visits && self.left[i] == self.k {
            let smaller_unvisited =
                (0..self.d.len()).any(|j| self.d[j] < self.d[i] && self.left[j] == self.k);
            if smaller_unvisited {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self) -> Result<bool> {
        let pos = self.path.len() + 1;
        if pos > self.horizon {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::CapExceeded {
                what: "k-Visits search nodes",
                cap: self.cap,
                actual: self.nodes,
            });
        }
        let key = self.key();
        if self.dead.contains(&key) {
            return Ok(false);
        }
        let n = self.d.len();
        let urgent: Vec<usize> = (0..n).filter(|&i| self.left[i] > 0 && self.remaining[i] == 1).collect();
        let candidates: Vec<usize> = match urgent.len() {
            0 => (0..n).filter(|&i| self.left[i] > 0).collect(),
            1 => urgent,
            _ => Vec::new(),
        };
        let mut tried = HashSet::new();
        for i in candidates {
            if !tried.insert(self.signature(i)) || !self.allowed(i, pos) {
                continue;
            }
            let saved = (self.remaining.clone(), self.left[i], self.mask);
            for j in 0..n {
                if j != i && self.left[j] > 0 {
                    self.remaining[j] -= 1;
                }
            }
            self.left[i] -= 1;
            self.remaining[i] = if self.left[i] > 0 { self.d[i] } else { 0 };
            if self.constraints.distinct_at.as_ref().is_some_and(|at| at.contains(&pos)) {
                self.mask |= 1 << i;
            }
            self.path.push(i + 1);
            if self.dfs()? {
                return Ok(true);
            }
            self.path.pop();
            (self.remaining, self.left[i], self.mask) = (saved.0, saved.1, saved.2);
        }
        self.dead.insert(key);
        Ok(false)
    }
}

/// Exact k-Visits decision by depth-first search with refuted-state memo.
///
/// A task whose expiry counter reaches 1 must be visited next; two such
/// tasks at once end the branch. The witness is re-verified before return.
pub fn k_visits_decide(
    inst: &KVisitsInstance,
    constraints: &SearchConstraints,
    node_cap: u64,
) -> Result<Decision> {
    let n = inst.deadlines.len();
    if constraints.distinct_at.is_some() && n > 64 {
        return Err(Error::CapExceeded {
            what: "tasks under a distinctness constraint",
            cap: 64,
            actual: n as u64,
        });
    }
    let horizon = inst.horizon();
    let clamp = (horizon + 1).min(u32::MAX as usize) as u64;
    let d: Vec<u32> = inst.deadlines.values().iter().map(|&x| x.min(clamp) as u32).collect();
    let mut group_of = vec![0usize; n];
    for i in 1..n {
        group_of[i] = group_of[i - 1] + (d[i] != d[i - 1]) as usize;
    }
    let mut s = KSearch {
        remaining: d.clone(),
        left: vec![inst.k; n],
        d,
        k: inst.k,
        group_of,
        mask: 0,
        path: Vec::with_capacity(horizon),
        horizon,
        constraints,
        dead: HashSet::new(),
        nodes: 0,
        cap: node_cap,
    };
    if !s.dfs()? {
        return Ok(Decision {
            feasible: false,
            witness: None,
            nodes: s.nodes,
        });
    }
    let sched = Schedule::plain(&s.path);
    let verdict = verify_k_visits(inst, &sched);
    if !verdict.is_feasible() || !constraints.admits(&inst.deadlines, &sched) {
        return Err(Error::Internal(format!("search witness rejected: {verdict:?}")));
    }
    Ok(Decision {
        feasible: true,
        witness: Some(sched),
        nodes: s.nodes,
    })
}

/// Breadth-first variant without constraints, kept as an independent check
/// on [`k_visits_decide`]. States are deduplicated per layer.
pub fn k_visits_decide_bfs(inst: &KVisitsInstance, state_cap: usize) -> Result<bool> {
    let d: Vec<u64> = inst.deadlines.values().to_vec();
    let n = d.len();
    let k = inst.k as u64;
    let mut layer: HashSet<Vec<(u64, u64, u64)>> = HashSet::new();
    layer.insert(d.iter().map(|&x| (x, x, k)).collect());
    for _ in 0..inst.horizon() {
        let mut next = HashSet::new();
        for state in &layer {
            for i in 0..n {
                if state[i].2 == 0 {
                    continue;
                }
                let mut s = state.clone();
                let mut ok = true;
                for (j, e) in s.iter_mut().enumerate() {
                    if j == i {
                        e.2 -= 1;
                        e.1 = if e.2 > 0 { e.0 } else { 0 };
                    } else if e.2 > 0 {
                        if e.1 == 1 {
                            ok = false;
                            break;
                        }
                        e.1 -= 1;
                    }
                }
                if ok {
                    s.sort_unstable();
                    next.insert(s);
                }
            }
        }
        if next.len() > state_cap {
            return Err(Error::CapExceeded {
                what: "k-Visits breadth-first layer",
                cap: state_cap as u64,
                actual: next.len() as u64,
            });
        }
        layer = next;
    }
    Ok(!layer.is_empty())
}

/// Per-task progress in [`role_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    /// Nothing placed. `u64` is the last position allowed for the first required visit.
    Open,
    /// Primary at the stored position, secondary still due.
    PrimaryDone(u64),
    /// Secondary placed first; primary still due by the deadline.
    SecondaryFirst,
    Done,
}

/// Options for [`role_search`].
#[derive(Clone, Debug, Default)]
pub struct RoleConstraints {
    /// When set, primaries occupy exactly these positions.
    pub primaries_at: Option<BTreeSet<u64>>,
    /// When set, single task `i` must sit at `singles_at[i]`.
    pub singles_at: Option<BTreeMap<usize, u64>>,
}

struct RoleSearch<'a> {
    single: &'a [u64],
    double: &'a [u64],
    single_done: Vec<bool>,
    phase: Vec<Phase>,
    slots: Vec<(usize, Role)>,
    horizon: u64,
    rc: &'a RoleConstraints,
    dead: HashSet<(Vec<bool>, Vec<Phase>)>,
}

impl RoleSearch<'_> {
    fn moves(&self, pos: u64) -> Vec<(usize, Role)> {
        let m = self.single.len();
        let mut out = Vec::new();
        let forced_single = self
            .rc
            .singles_at
            .as_ref()
            .and_then(|at| at.iter().find(|&(_, &p)| p == pos).map(|(&t, _)| t));
        if let Some(t) = forced_single {
            if !self.single_done[t - 1] && pos <= self.single[t - 1] {
                out.push((t, Role::Single));
            }
            return out;
        }
        if self.rc.singles_at.is_none() {
            for (i, &d) in self.single.iter().enumerate() {
                if !self.single_done[i] && pos <= d {
                    out.push((i + 1, Role::Single));
                }
            }
        }
        let primary_ok = self.rc.primaries_at.as_ref().is_none_or(|a| a.contains(&pos));
        let secondary_ok = self.rc.primaries_at.as_ref().is_none_or(|a| !a.contains(&pos));
        for (i, &d) in self.double.iter().enumerate() {
            let task = m + i + 1;
            match self.phase[i] {
                Phase::Open => {
                    if primary_ok && pos <= d {
                        out.push((task, Role::Primary));
                    }
                    if secondary_ok && pos < d {
                        out.push((task, Role::Secondary));
                    }
                }
                Phase::PrimaryDone(p) => {
                    if secondary_ok && pos - p <= d {
                        out.push((task, Role::Secondary));
                    }
                }
                Phase::SecondaryFirst => {
                    if primary_ok && pos <= d {
                        out.push((task, Role::Primary));
                    }
                }
                Phase::Done => {}
            }
        }
        out
    }

    /// No pending visit can still be placed in time.
    fn hopeless(&self, pos: u64) -> bool {
        let single_late = self.single.iter().zip(&self.single_done).any(|(&d, &done)| !done && d < pos);
        let double_late = self.double.iter().zip(&self.phase).any(|(&d, ph)| match *ph {
            Phase::Open | Phase::SecondaryFirst => d < pos,
            Phase::PrimaryDone(p) => p + d < pos,
            Phase::Done => false,
        });
        single_late || double_late
    }

    fn dfs(&mut self) -> bool {
        let pos = self.slots.len() as u64 + 1;
        if pos > self.horizon {
            return true;
        }
        if self.hopeless(pos) {
            return false;
        }
        // Primary-done phases store absolute positions, so the state key
        // needs the position too; it is implied by the slot count.
        let key = (self.single_done.clone(), self.phase.clone());
        if self.dead.contains(&key) {
            return false;
        }
        let m = self.single.len();
        for (task, role) in self.moves(pos) {
            let saved = if task <= m {
                self.single_done[task - 1] = true;
                None
            } else {
                let i = task - m - 1;
                let old = self.phase[i];
                self.phase[i] = match (old, role) {
                    (Phase::Open, Role::Primary) => Phase::PrimaryDone(pos),
                    (Phase::Open, _) => Phase::SecondaryFirst,
                    _ => Phase::Done,
                };
                Some((i, old))
            };
            self.slots.push((task, role));
            if self.dfs() {
                return true;
            }
            self.slots.pop();
            match saved {
                None => self.single_done[task - 1] = false,
                Some((i, old)) => self.phase[i] = old,
            }
        }
        self.dead.insert(key);
        false
    }
}

/// Exhaustive search over role-labelled (1 or 2)-Visits schedules.
pub fn role_search(inst: &OneOrTwoInstance, rc: &RoleConstraints) -> Result<Option<Schedule>> {
    let mut s = RoleSearch {
        single: inst.single.values(),
        double: inst.double.values(),
        single_done: vec![false; inst.m()],
        phase: vec![Phase::Open; inst.n()],
        slots: Vec::with_capacity(inst.horizon()),
        horizon: inst.horizon() as u64,
        rc,
        dead: HashSet::new(),
    };
    if !s.dfs() {
        return Ok(None);
    }
    let sched = Schedule::from_slots(&s.slots);
    let verdict = verify_one_or_two(inst, &sched);
    if !verdict.is_feasible() {
        return Err(Error::Internal(format!("role search witness rejected: {verdict:?}")));
    }
    Ok(Some(sched))
}

/// 2-Visits search, optionally forcing primaries onto `primaries_at`.
pub fn two_visits_search(deadlines: &Deadlines, primaries_at: Option<BTreeSet<u64>>) -> Result<Option<Schedule>> {
    let inst = OneOrTwoInstance::new(Deadlines::empty(), deadlines.clone());
    let found = role_search(
        &inst,
        &RoleConstraints {
            primaries_at,
            singles_at: None,
        },
    )?;
    if let Some(s) = &found {
        if !verify_two_visits(deadlines, s).is_feasible() {
            return Err(Error::Internal("2-Visits witness rejected".into()));
        }
    }
    Ok(found)
}

/// The fixed 3-Visits instance and the schedule that witnesses it.
pub const COUNTEREXAMPLE_DEADLINES: [u64; 8] = [2, 5, 6, 7, 8, 9, 10, 11];
/// Tasks named by their deadline.
pub const COUNTEREXAMPLE_SCHEDULE: [u64; 24] = [
    2, 2, 2, 10, 5, 6, 7, 8, 9, 5, 11, 6, 7, 10, 5, 8, 6, 9, 7, 8, 9, 11, 10, 11,
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub schedule_verifies: bool,
    /// Search with distinct tasks on the discretized positions.
    pub distinct_positions: Decision,
    /// Search with first visits in deadline order.
    pub sorted_first_visits: Decision,
}

impl CounterexampleReport {
    pub fn all_hold(&self) -> bool {
        self.schedule_verifies && !self.distinct_positions.feasible && !self.sorted_first_visits.feasible
    }
}

/// Checks the three facts about `{2,5,6,7,8,9,10,11}` with `k = 3`: the
/// fixed schedule is valid, yet no valid schedule puts distinct tasks on
/// the discretized positions, and none visits tasks first in deadline order.
pub fn counterexample_3visits(node_cap: u64) -> Result<CounterexampleReport> {
    let d = Deadlines::new(COUNTEREXAMPLE_DEADLINES.to_vec())?;
    let inst = KVisitsInstance::new(d.clone(), 3)?;
    let tasks: Vec<usize> = COUNTEREXAMPLE_SCHEDULE
        .iter()
        .map(|x| COUNTEREXAMPLE_DEADLINES.iter().position(|y| y == x).map(|i| i + 1))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Internal("schedule names an unknown deadline".into()))?;
    let schedule_verifies = verify_k_visits(&inst, &Schedule::plain(&tasks)).is_feasible();
    let positions: BTreeSet<usize> = discretized_sequence(&d)?
        .positions()
        .iter()
        .map(|&p| p as usize)
        .collect();
    let distinct = SearchConstraints {
        distinct_at: Some(positions),
        sorted_first_visits: false,
    };
    let sorted = SearchConstraints {
        distinct_at: None,
        sorted_first_visits: true,
    };
    let report = CounterexampleReport {
        schedule_verifies,
        distinct_positions: k_visits_decide(&inst, &distinct, node_cap)?,
        sorted_first_visits: k_visits_decide(&inst, &sorted, node_cap)?,
    };
    if !report.all_hold() {
        return Err(Error::Internal(format!("3-Visits facts do not hold: {report:?}")));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub instances: usize,
    pub feasible: usize,
    pub infeasible: usize,
}

/// 2-Visits through the search versus through Position Matching.
fn pm_route(d: &Deadlines) -> Result<bool> {
    let kept = normalize(d, 2);
    if discretized_sequence(&kept).is_err() {
        return Ok(false);
    }
    Ok(solve_brute_force(&two_visits_to_pm(&kept)?, 12)?.is_some())
}

/// Compares the k = 2 search with brute-force Position Matching on random
/// instances plus pinned cases. Any disagreement is an error.
pub fn pm_equiv_sweep(count: usize, max_n: usize, seed: u64) -> Result<SweepReport> {
    if max_n == 0 || max_n > 6 {
        return Err(Error::Precondition("max_n must lie in 1..=6".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<Vec<u64>> = vec![vec![1, 2], vec![2, 2], vec![1, 4, 5, 6, 6, 7, 15, 16, 18, 18, 18]];
    for _ in 0..count {
        let n = rng.gen_range(1..=max_n);
        cases.push((0..n).map(|_| rng.gen_range(1..=2 * n as u64)).collect());
    }
    let mut report = SweepReport {
        instances: 0,
        feasible: 0,
        infeasible: 0,
    };
    for v in cases {
        let d = Deadlines::new(v)?;
        let inst = KVisitsInstance::new(d.clone(), 2)?;
        let search = k_visits_decide(&inst, &SearchConstraints::none(), DEFAULT_NODE_CAP)?.feasible;
        let pm = pm_route(&d)?;
        if search != pm {
            return Err(Error::Internal(format!(
                "search says {search}, position matching says {pm} on {d}"
            )));
        }
        report.instances += 1;
        if search {
            report.feasible += 1;
        } else {
            report.infeasible += 1;
        }
    }
    Ok(report)
}
