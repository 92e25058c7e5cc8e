//! Position Matching: the instance type, the reductions from 2-Visits and
//! (1 or 2)-Visits, cluster splitting, exact solvers and schedule rebuilding.
//!
//! A matching picks, for every target `t ∈ T`, one deadline `d ∈ D` and one
//! position `a ∈ A` such that `d ≥ a` and `d + a ≥ t`, using every element
//! exactly once. The triplet `(d, a, t)` means: the task with deadline `d`
//! gets its primary visit at position `a` and its secondary at `t`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::discretize::{clusters, complement_targets, discretized_sequence, DiscretizedSequence};
use crate::error::{invalid, precondition, Error, Result};
use crate::model::{
    normalize, verify_one_or_two, verify_two_visits, Deadlines, OneOrTwoInstance, Role, Schedule,
};
use crate::randmatch;

/// A Position Matching instance. `A` is always derived from `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PMInstance {
    deadlines: Deadlines,
    seq: DiscretizedSequence,
    targets: Vec<u64>,
}

impl PMInstance {
    /// Builds an instance from `D` and `T`; `T` is sorted and must be duplicate-free.
    pub fn new(deadlines: Deadlines, targets: Vec<u64>) -> Result<Self> {
        let seq = discretized_sequence(&deadlines)?;
        let mut targets = targets;
        targets.sort_unstable();
        if targets.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("targets must not repeat"));
        }
        if targets.len() != deadlines.len() {
            return Err(invalid(format!(
                "{} deadlines but {} targets",
                deadlines.len(),
                targets.len()
            )));
        }
        Ok(PMInstance {
            deadlines,
            seq,
            targets,
        })
    }

    pub fn deadlines(&self) -> &Deadlines {
        &self.deadlines
    }

    pub fn seq(&self) -> &DiscretizedSequence {
        &self.seq
    }

    pub fn targets(&self) -> &[u64] {
        &self.targets
    }

    pub fn n(&self) -> usize {
        self.targets.len()
    }

    fn d(&self, i: usize) -> u64 {
        self.deadlines.values()[i]
    }

    fn a(&self, j: usize) -> u64 {
        self.seq.positions()[j]
    }
}

/// One matched triple, with 1-based indices into `D`, `A` and `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Triplet {
    pub d_index: usize,
    pub a_index: usize,
    pub t_index: usize,
    pub d: u64,
    pub a: u64,
    pub t: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PMMatching {
    pub triplets: Vec<Triplet>,
}

impl PMMatching {
    /// Checks that every element is used once and both inequalities hold.
    pub fn validate(&self, inst: &PMInstance) -> Result<()> {
        let n = inst.n();
        if self.triplets.len() != n {
            return Err(Error::Internal(format!(
                "matching has {} triplets for {n} targets",
                self.triplets.len()
            )));
        }
        let mut used = [vec![false; n], vec![false; n], vec![false; n]];
        for tr in &self.triplets {
            for (k, idx) in [tr.d_index, tr.a_index, tr.t_index].into_iter().enumerate() {
                if idx == 0 || idx > n || std::mem::replace(&mut used[k][idx - 1], true) {
                    return Err(Error::Internal(format!("index reused or out of range in {tr:?}")));
                }
            }
            let (d, a, t) = (inst.d(tr.d_index - 1), inst.a(tr.a_index - 1), inst.targets[tr.t_index - 1]);
            if (d, a, t) != (tr.d, tr.a, tr.t) {
                return Err(Error::Internal(format!("values disagree with indices in {tr:?}")));
            }
            if d < a || d + a < t {
                return Err(Error::Internal(format!("triplet {tr:?} breaks d ≥ a or d + a ≥ t")));
            }
        }
        Ok(())
    }

    /// Shifts all three indices by `offset` (cluster-local to parent numbering).
    fn shifted(mut self, offset: usize) -> Self {
        for tr in &mut self.triplets {
            tr.d_index += offset;
            tr.a_index += offset;
            tr.t_index += offset;
        }
        self
    }

    fn from_assignment(inst: &PMInstance, d_of_a: &[usize], t_of_a: &[usize]) -> Self {
        let triplets = (0..inst.n())
            .map(|j| Triplet {
                d_index: d_of_a[j] + 1,
                a_index: j + 1,
                t_index: t_of_a[j] + 1,
                d: inst.d(d_of_a[j]),
                a: inst.a(j),
                t: inst.targets[t_of_a[j]],
            })
            .collect();
        PMMatching { triplets }
    }
}

/// Where each single-visit task goes, keyed by its 1-based task index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SinglePlacement {
    pub assignments: BTreeMap<usize, u64>,
}

/// Reduces a normalized 2-Visits instance: `T = [2n] ∖ A`.
pub fn two_visits_to_pm(deadlines: &Deadlines) -> Result<PMInstance> {
    let h = 2 * deadlines.len() as u64;
    if deadlines.max().is_some_and(|d| d > h) {
        return Err(precondition(format!("deadlines must be at most 2n = {h}; normalize first")));
    }
    let seq = discretized_sequence(deadlines)?;
    let targets = complement_targets(&seq, h)?;
    PMInstance::new(deadlines.clone(), targets)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OneOrTwoReduction {
    Reduced {
        pm: PMInstance,
        placement: SinglePlacement,
    },
    /// No free position at or before this single task's deadline.
    SingleUnplaceable { task: usize },
}

/// Reduces a normalized (1 or 2)-Visits instance.
///
/// Primary visits take the discretized positions of the double deadlines.
/// Singles are placed largest deadline first, each at the latest position
/// still free and not after its deadline; whatever remains becomes `T`.
pub fn one_or_two_to_pm(inst: &OneOrTwoInstance) -> Result<OneOrTwoReduction> {
    if !inst.is_normalized() {
        return Err(precondition("deadlines must not exceed m + 2n; normalize first"));
    }
    let seq = discretized_sequence(&inst.double)?;
    let horizon = inst.horizon() as u64;
    let mut free: BTreeSet<u64> = complement_targets(&seq, horizon)?.into_iter().collect();
    let mut placement = SinglePlacement::default();
    for task in (1..=inst.m()).rev() {
        let d = inst.single.values()[task - 1];
        let Some(&p) = free.range(..=d).next_back() else {
            return Ok(OneOrTwoReduction::SingleUnplaceable { task });
        };
        free.remove(&p);
        placement.assignments.insert(task, p);
    }
    let pm = PMInstance::new(inst.double.clone(), free.into_iter().collect())?;
    Ok(OneOrTwoReduction::Reduced { pm, placement })
}

/// One sub-instance per cluster, in cluster order.
///
/// `D` is cut along the cluster's index range and the sorted targets are
/// handed out block-wise, so child `k` covers parent indices
/// `offset+1..=offset+len` of all three lists.
pub fn split_by_clusters(inst: &PMInstance) -> Result<Vec<PMInstance>> {
    Ok(cluster_parts(inst)?.into_iter().map(|(_, p)| p).collect())
}

fn cluster_parts(inst: &PMInstance) -> Result<Vec<(usize, PMInstance)>> {
    let spans = clusters(&inst.seq);
    if spans.len() == 1 {
        return Ok(vec![(0, inst.clone())]);
    }
    let mut out = Vec::with_capacity(spans.len());
    for span in spans {
        let range = span.start_index - 1..span.end_index;
        let d = Deadlines::new(inst.deadlines.values()[range.clone()].to_vec())?;
        let child = PMInstance::new(d, inst.targets[range.clone()].to_vec())?;
        if child.seq.positions() != &inst.seq.positions()[range.clone()] {
            return Err(Error::Internal("cluster does not rediscretize to itself".into()));
        }
        out.push((range.start, child));
    }
    Ok(out)
}

/// The forced matching for duplicate-free `D`, where `A = D`.
pub fn solve_simple_set(inst: &PMInstance) -> Result<Option<PMMatching>> {
    if !inst.deadlines.is_simple_set() {
        return Err(precondition("solve_simple_set needs duplicate-free deadlines"));
    }
    let n = inst.n();
    if (0..n).any(|i| inst.targets[i] > 2 * inst.d(i)) {
        return Ok(None);
    }
    let idx: Vec<usize> = (0..n).collect();
    let m = PMMatching::from_assignment(inst, &idx, &idx);
    m.validate(inst)?;
    Ok(Some(m))
}

/// Enumerates assignments of `D` to `A` with `d ≥ a`, then checks whether the
/// sorted sums dominate the sorted targets pointwise.
pub fn solve_brute_force(inst: &PMInstance, cap: usize) -> Result<Option<PMMatching>> {
    let n = inst.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "position matching brute force",
            cap: cap as u64,
            actual: n as u64,
        });
    }
    let counts = inst.deadlines.value_counts();
    let values: Vec<u64> = counts.iter().map(|&(v, _)| v).collect();
    let mut left: Vec<usize> = counts.iter().map(|&(_, c)| c).collect();
    let mut chosen = vec![0usize; n];
    let found = brute_assign(inst, &values, &mut left, &mut chosen, n);
    let Some(t_of_a) = found else {
        return Ok(None);
    };
    // Turn chosen value slots into concrete D indices.
    let mut next_index: Vec<usize> = Vec::with_capacity(values.len());
    let mut start = 0;
    for &(_, c) in &counts {
        next_index.push(start);
        start += c;
    }
    let d_of_a: Vec<usize> = chosen
        .iter()
        .map(|&v| {
            next_index[v] += 1;
            next_index[v] - 1
        })
        .collect();
    let m = PMMatching::from_assignment(inst, &d_of_a, &t_of_a);
    m.validate(inst)?;
    Ok(Some(m))
}

/// Fills `chosen[j]` for `j < remaining`, positions processed from the top.
fn brute_assign(
    inst: &PMInstance,
    values: &[u64],
    left: &mut [usize],
    chosen: &mut [usize],
    remaining: usize,
) -> Option<Vec<usize>> {
    if remaining == 0 {
        return dominance_targets(inst, values, chosen);
    }
    let j = remaining - 1;
    let a = inst.a(j);
    let first = values.partition_point(|&v| v < a);
    for v in first..values.len() {
        if left[v] == 0 {
            continue;
        }
        left[v] -= 1;
        chosen[j] = v;
        let r = brute_assign(inst, values, left, chosen, j);
        left[v] += 1;
        if r.is_some() {
            return r;
        }
    }
    None
}

/// Target index per position if sorted sums dominate sorted targets.
fn dominance_targets(inst: &PMInstance, values: &[u64], chosen: &[usize]) -> Option<Vec<usize>> {
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| values[chosen[j]] + inst.a(j));
    let mut t_of_a = vec![0usize; n];
    for (rank, &j) in order.iter().enumerate() {
        if inst.targets[rank] > values[chosen[j]] + inst.a(j) {
            return None;
        }
        t_of_a[j] = rank;
    }
    Some(t_of_a)
}

/// Exact branch-and-bound search for instances beyond brute-force reach.
///
/// Targets are covered largest first. For a fixed position `a` and target
/// `t`, the smallest unused deadline `d ≥ max(a, t − a)` can replace any other
/// feasible choice, so only the position is branched on. Nodes are pruned by
/// a Hall check on `d ≥ a`, an upper bound on the k-th largest achievable
/// sum, and a table of states already refuted.
pub fn solve_exact_search(inst: &PMInstance, node_budget: u64) -> Result<Option<PMMatching>> {
    let n = inst.n();
    let counts = inst.deadlines.value_counts();
    let mut s = ExactSearch {
        inst,
        values: counts.iter().map(|&(v, _)| v).collect(),
        left: counts.iter().map(|&(_, c)| c as u32).collect(),
        free: vec![true; n],
        targets_desc: inst.targets.iter().rev().copied().collect(),
        picks: Vec::with_capacity(n),
        dead: HashSet::new(),
        nodes: 0,
        budget: node_budget,
    };
    if !s.search()? {
        return Ok(None);
    }
    let mut next_index: Vec<usize> = Vec::with_capacity(counts.len());
    let mut start = 0;
    for &(_, c) in &counts {
        next_index.push(start);
        start += c;
    }
    let mut d_of_a = vec![0usize; n];
    let mut t_of_a = vec![0usize; n];
    for (k, &(j, v)) in s.picks.iter().enumerate() {
        d_of_a[j] = next_index[v];
        next_index[v] += 1;
        t_of_a[j] = n - 1 - k;
    }
    let m = PMMatching::from_assignment(inst, &d_of_a, &t_of_a);
    m.validate(inst)?;
    Ok(Some(m))
}

struct ExactSearch<'a> {
    inst: &'a PMInstance,
    values: Vec<u64>,
    left: Vec<u32>,
    free: Vec<bool>,
    targets_desc: Vec<u64>,
    /// (position index, value slot) per covered target, in target order.
    picks: Vec<(usize, usize)>,
    dead: HashSet<Vec<u64>>,
    nodes: u64,
    budget: u64,
}

impl ExactSearch<'_> {
    fn key(&self) -> Vec<u64> {
        let mut key: Vec<u64> = self.left.iter().map(|&c| c as u64).collect();
        for chunk in self.free.chunks(64) {
            key.push(chunk.iter().enumerate().fold(0u64, |acc, (i, &f)| acc | ((f as u64) << i)));
        }
        key
    }

    fn bounds_hold(&self) -> bool {
        let k0 = self.picks.len();
        let d_desc: Vec<u64> = self
            .values
            .iter()
            .zip(&self.left)
            .rev()
            .flat_map(|(&v, &c)| std::iter::repeat_n(v, c as usize))
            .collect();
        let a_desc: Vec<u64> = (0..self.free.len())
            .rev()
            .filter(|&j| self.free[j])
            .map(|j| self.inst.a(j))
            .collect();
        for i in 0..d_desc.len() {
            if d_desc[i] < a_desc[i] {
                return false;
            }
            let bound = (d_desc[0] + a_desc[i]).min(d_desc[i] + a_desc[0]);
            if self.targets_desc[k0 + i] > bound {
                return false;
            }
        }
        true
    }

    fn search(&mut self) -> Result<bool> {
        let k = self.picks.len();
        if k == self.targets_desc.len() {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::CapExceeded {
                what: "position matching exact search nodes",
                cap: self.budget,
                actual: self.nodes,
            });
        }
        if !self.bounds_hold() {
            return Ok(false);
        }
        let key = self.key();
        if self.dead.contains(&key) {
            return Ok(false);
        }
        let t = self.targets_desc[k];
        let mut options: Vec<(u64, usize, usize)> = Vec::new();
        for j in (0..self.free.len()).rev() {
            if !self.free[j] {
                continue;
            }
            let a = self.inst.a(j);
            let need = a.max(t.saturating_sub(a));
            let start = self.values.partition_point(|&v| v < need);
            if let Some(v) = (start..self.values.len()).find(|&v| self.left[v] > 0) {
                options.push((self.values[v] + a - t, j, v));
            }
        }
        options.sort_by_key(|&(slack, j, _)| (slack, std::cmp::Reverse(j)));
        for (_, j, v) in options {
            self.free[j] = false;
            self.left[v] -= 1;
            self.picks.push((j, v));
            if self.search()? {
                return Ok(true);
            }
            self.picks.pop();
            self.left[v] += 1;
            self.free[j] = true;
        }
        self.dead.insert(key);
        Ok(false)
    }
}

/// Builds the schedule encoded by a matching: primary at `a`, secondary at
/// `t`, and singles at their placement. Double tasks are numbered after the
/// `m` singles.
pub fn pm_to_schedule(
    inst: &PMInstance,
    matching: &PMMatching,
    placement: Option<&SinglePlacement>,
) -> Result<Schedule> {
    matching.validate(inst)?;
    let m = placement.map_or(0, |p| p.assignments.len());
    let horizon = 2 * inst.n() + m;
    let mut slots: Vec<Option<(usize, Role)>> = vec![None; horizon];
    let mut put = |pos: u64, task: usize, role: Role| -> Result<()> {
        let slot = pos
            .checked_sub(1)
            .and_then(|p| slots.get_mut(p as usize))
            .ok_or_else(|| Error::Internal(format!("position {pos} outside 1..={horizon}")))?;
        if slot.replace((task, role)).is_some() {
            return Err(Error::Internal(format!("position {pos} assigned twice")));
        }
        Ok(())
    };
    if let Some(p) = placement {
        for (&task, &pos) in &p.assignments {
            put(pos, task, Role::Single)?;
        }
    }
    for tr in &matching.triplets {
        put(tr.a, m + tr.d_index, Role::Primary)?;
        put(tr.t, m + tr.d_index, Role::Secondary)?;
    }
    let filled: Option<Vec<(usize, Role)>> = slots.into_iter().collect();
    let filled = filled.ok_or_else(|| Error::Internal("schedule has an empty position".into()))?;
    Ok(Schedule::from_slots(&filled))
}

/// Which solver [`solve_auto`] may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Auto,
    Simple,
    Brute,
    Randomized,
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub strategy: Strategy,
    /// Largest cluster handed to [`solve_brute_force`].
    pub brute_cap: usize,
    /// Largest distinct-value count routed to the randomized solver.
    pub p_cap: usize,
    /// Node budget of [`solve_exact_search`]; zero disables it.
    pub exact_budget: u64,
    pub seed: u64,
    pub trials: u32,
    /// Upper bound on `(degree + 1) · n³` for one randomized decision.
    pub randomized_work_cap: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            strategy: Strategy::Auto,
            brute_cap: 10,
            p_cap: 3,
            exact_budget: 2_000_000,
            seed: 0,
            trials: 5,
            randomized_work_cap: 200_000_000,
        }
    }
}

/// Result of a decision procedure carrying a witness on success.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Outcome<W> {
    Feasible(W),
    Infeasible,
    /// Every randomized trial said no; not a certificate.
    ProbablyInfeasible,
    Undecided(String),
}

impl<W> Outcome<W> {
    pub fn map<V>(self, f: impl FnOnce(W) -> V) -> Outcome<V> {
        match self {
            Outcome::Feasible(w) => Outcome::Feasible(f(w)),
            Outcome::Infeasible => Outcome::Infeasible,
            Outcome::ProbablyInfeasible => Outcome::ProbablyInfeasible,
            Outcome::Undecided(why) => Outcome::Undecided(why),
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Outcome::Feasible(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Feasible(_) => "feasible",
            Outcome::Infeasible => "infeasible",
            Outcome::ProbablyInfeasible => "probably-infeasible",
            Outcome::Undecided(_) => "undecided",
        }
    }
}

fn from_exact(r: Result<Option<PMMatching>>) -> Result<Outcome<PMMatching>> {
    match r {
        Ok(Some(m)) => Ok(Outcome::Feasible(m)),
        Ok(None) => Ok(Outcome::Infeasible),
        Err(e @ Error::CapExceeded { .. }) => Ok(Outcome::Undecided(e.to_string())),
        Err(e) => Err(e),
    }
}

fn solve_cluster(inst: &PMInstance, cfg: &SolveConfig, stream: u64) -> Result<Outcome<PMMatching>> {
    let randomized = || -> Result<Outcome<PMMatching>> {
        let rc = randmatch::RandomizedConfig {
            seed: cfg.seed,
            stream,
            trials: cfg.trials,
        };
        Ok(match randmatch::solve_cluster_randomized(inst, &rc)? {
            Some(m) => Outcome::Feasible(m),
            None => Outcome::ProbablyInfeasible,
        })
    };
    match cfg.strategy {
        Strategy::Simple => from_exact(solve_simple_set(inst)),
        Strategy::Brute => from_exact(solve_brute_force(inst, cfg.brute_cap)),
        Strategy::Randomized => randomized(),
        Strategy::Auto => {
            if inst.deadlines.is_simple_set() {
                return from_exact(solve_simple_set(inst));
            }
            let p = inst.deadlines.distinct_count();
            if p <= cfg.p_cap && randmatch::work_estimate(inst) <= Some(cfg.randomized_work_cap) {
                return randomized();
            }
            if inst.n() <= cfg.brute_cap {
                return from_exact(solve_brute_force(inst, cfg.brute_cap));
            }
            if cfg.exact_budget > 0 {
                return from_exact(solve_exact_search(inst, cfg.exact_budget));
            }
            Ok(Outcome::Undecided(format!(
                "cluster of size {} with {p} distinct deadlines is beyond every configured solver",
                inst.n()
            )))
        }
    }
}

/// Splits into clusters, solves each with the configured strategy, and
/// joins the answers. A certified no anywhere wins over uncertain answers.
pub fn solve_auto(inst: &PMInstance, cfg: &SolveConfig) -> Result<Outcome<PMMatching>> {
    let mut triplets = Vec::with_capacity(inst.n());
    let mut uncertain: Option<Outcome<PMMatching>> = None;
    for (stream, (offset, child)) in cluster_parts(inst)?.into_iter().enumerate() {
        match solve_cluster(&child, cfg, stream as u64)? {
            Outcome::Feasible(m) => triplets.extend(m.shifted(offset).triplets),
            Outcome::Infeasible => return Ok(Outcome::Infeasible),
            Outcome::ProbablyInfeasible => uncertain = Some(Outcome::ProbablyInfeasible),
            Outcome::Undecided(why) => {
                if uncertain.is_none() {
                    uncertain = Some(Outcome::Undecided(why));
                }
            }
        }
    }
    if let Some(u) = uncertain {
        return Ok(u);
    }
    let m = PMMatching { triplets };
    m.validate(inst)?;
    Ok(Outcome::Feasible(m))
}

/// Appends tasks dropped by normalization after a schedule of the rest.
///
/// Dropped tasks go in increasing deadline order, each visited on two
/// consecutive positions (or once, for singles). A task dropped at horizon
/// `h` has deadline above `h`, and everything placed up to and including it
/// was still present when it was dropped, so it finishes by position `h`.
fn append_dropped(slots: &mut Vec<(usize, Role)>, mut dropped: Vec<(u64, usize, bool)>) {
    dropped.sort();
    for (_, task, single) in dropped {
        if single {
            slots.push((task, Role::Single));
        } else {
            slots.push((task, Role::Primary));
            slots.push((task, Role::Secondary));
        }
    }
}

/// Decides 2-Visits through Position Matching and returns a verified schedule.
pub fn solve_two_visits(deadlines: &Deadlines, cfg: &SolveConfig) -> Result<Outcome<Schedule>> {
    let kept = normalize(deadlines, 2);
    if discretized_sequence(&kept).is_err() {
        return Ok(Outcome::Infeasible);
    }
    let pm = two_visits_to_pm(&kept)?;
    let outcome = solve_auto(&pm, cfg)?;
    let Outcome::Feasible(m) = outcome else {
        return Ok(outcome.map(|_| unreachable!()));
    };
    let core = pm_to_schedule(&pm, &m, None)?;
    let mut slots: Vec<(usize, Role)> = core.entries().iter().map(|e| (e.task, e.role)).collect();
    let dropped = (kept.len() + 1..=deadlines.len())
        .map(|task| (deadlines.values()[task - 1], task, false))
        .collect();
    append_dropped(&mut slots, dropped);
    let sched = Schedule::from_slots(&slots);
    let verdict = verify_two_visits(deadlines, &sched);
    if !verdict.is_feasible() {
        return Err(Error::Internal(format!("reconstructed schedule rejected: {verdict:?}")));
    }
    Ok(Outcome::Feasible(sched))
}

/// Decides (1 or 2)-Visits through Position Matching and returns a verified schedule.
pub fn solve_one_or_two(inst: &OneOrTwoInstance, cfg: &SolveConfig) -> Result<Outcome<Schedule>> {
    let kept = inst.normalize();
    if discretized_sequence(&kept.double).is_err() {
        return Ok(Outcome::Infeasible);
    }
    let (pm, placement) = match one_or_two_to_pm(&kept)? {
        OneOrTwoReduction::SingleUnplaceable { .. } => return Ok(Outcome::Infeasible),
        OneOrTwoReduction::Reduced { pm, placement } => (pm, placement),
    };
    let outcome = solve_auto(&pm, cfg)?;
    let Outcome::Feasible(m) = outcome else {
        return Ok(outcome.map(|_| unreachable!()));
    };
    let core = pm_to_schedule(&pm, &m, Some(&placement))?;
    // Renumber from the reduced instance back to the original task ids.
    let (m_kept, m_all) = (kept.m(), inst.m());
    let renumber = |task: usize| if task <= m_kept { task } else { task - m_kept + m_all };
    let mut slots: Vec<(usize, Role)> =
        core.entries().iter().map(|e| (renumber(e.task), e.role)).collect();
    let mut dropped: Vec<(u64, usize, bool)> = (m_kept + 1..=m_all)
        .map(|task| (inst.single.values()[task - 1], task, true))
        .collect();
    dropped.extend(
        (kept.n() + 1..=inst.n()).map(|j| (inst.double.values()[j - 1], m_all + j, false)),
    );
    append_dropped(&mut slots, dropped);
    let sched = Schedule::from_slots(&slots);
    let verdict = verify_one_or_two(inst, &sched);
    if !verdict.is_feasible() {
        return Err(Error::Internal(format!("reconstructed schedule rejected: {verdict:?}")));
    }
    Ok(Outcome::Feasible(sched))
}

/// Draws a Position Matching instance of size `n` with at most
/// `max_distinct` distinct deadline values. Targets are either the
/// complement of `A` in `[2n]` or a random `n`-subset of `[3n]`.
pub fn random_pm<R: Rng>(rng: &mut R, n: usize, max_distinct: usize) -> Result<PMInstance> {
    if n == 0 || max_distinct == 0 {
        return Err(precondition("n and max_distinct must be positive"));
    }
    let top = 2 * n as u64;
    for _ in 0..10_000 {
        let p = rng.gen_range(1..=max_distinct.min(n));
        let pool: Vec<u64> = (0..p).map(|_| rng.gen_range(1..=top)).collect();
        let d = Deadlines::new((0..n).map(|_| pool[rng.gen_range(0..p)]).collect::<Vec<_>>())?;
        let Ok(seq) = discretized_sequence(&d) else {
            continue;
        };
        let targets = if rng.gen_bool(0.5) {
            complement_targets(&seq, top)?
        } else {
            let mut t: Vec<u64> = sample(rng, 3 * n, n).into_iter().map(|x| x as u64 + 1).collect();
            t.sort_unstable();
            t
        };
        return PMInstance::new(d, targets);
    }
    Err(Error::Internal("no admissible deadline draw in 10000 tries".into()))
}
