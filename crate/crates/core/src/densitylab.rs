//! Density thresholds: constructive schedules below a density bound, the
//! families that show where those bounds stop, the gap function behind the
//! `√2 − 1/2` constant, and the passage from finite k-Visits schedules to
//! periodic pinwheel windows.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::discretize::{complement_targets, discretized_sequence};
use crate::error::{precondition, Error, Result};
use crate::model::{
    density, verify_k_visits, verify_two_visits, Deadlines, KVisitsInstance, Reason, Role,
    Schedule, Threshold, Verdict, Violation, SQRT2_MINUS_HALF,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OneVisit {
    Schedule(Schedule),
    /// Smallest `j` with `d_j < j`: the first `j` tasks cannot all fit.
    Witness(usize),
}

/// Visits the tasks once each in deadline order, which works exactly when
/// `d_i ≥ i` for every `i`.
pub fn one_visit_schedule(deadlines: &Deadlines) -> OneVisit {
    let d = deadlines.values();
    match (0..d.len()).find(|&i| d[i] < i as u64 + 1) {
        Some(i) => OneVisit::Witness(i + 1),
        None => OneVisit::Schedule(Schedule::plain(&(1..=d.len()).collect::<Vec<_>>())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimRecord {
    pub i: usize,
    pub d: u64,
    pub a: u64,
    pub t: u64,
    pub bound: u64,
    pub satisfied: bool,
}

/// The check `t_i ≤ d_i + a_i` at every index, with `T = [2n] ∖ A` sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub records: Vec<ClaimRecord>,
    pub first_violation: Option<usize>,
}

impl ClaimReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn violations(&self) -> Vec<usize> {
        self.records.iter().filter(|r| !r.satisfied).map(|r| r.i).collect()
    }
}

pub fn claim_property(deadlines: &Deadlines) -> Result<ClaimReport> {
    let n = deadlines.len() as u64;
    if deadlines.max().is_some_and(|d| d > 2 * n) {
        return Err(precondition("deadlines must be at most 2n"));
    }
    let seq = discretized_sequence(deadlines)?;
    let t = complement_targets(&seq, 2 * n)?;
    let records: Vec<ClaimRecord> = deadlines
        .values()
        .iter()
        .zip(seq.positions())
        .zip(&t)
        .enumerate()
        .map(|(i, ((&d, &a), &t))| ClaimRecord {
            i: i + 1,
            d,
            a,
            t,
            bound: d + a,
            satisfied: t <= d + a,
        })
        .collect();
    let first_violation = records.iter().find(|r| !r.satisfied).map(|r| r.i);
    Ok(ClaimReport {
        records,
        first_violation,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensitySchedule {
    Schedule(Schedule),
    /// The index check failed; nothing is claimed about feasibility.
    Violation(ClaimReport),
}

/// Primary of task `i` at `a_i`, secondary at `t_i`, when the index check holds.
pub fn density_schedule_2v(deadlines: &Deadlines) -> Result<DensitySchedule> {
    let report = claim_property(deadlines)?;
    if !report.holds() {
        return Ok(DensitySchedule::Violation(report));
    }
    let mut slots = vec![(0usize, Role::Plain); 2 * deadlines.len()];
    for r in &report.records {
        slots[r.a as usize - 1] = (r.i, Role::Primary);
        slots[r.t as usize - 1] = (r.i, Role::Secondary);
    }
    let sched = Schedule::from_slots(&slots);
    let verdict = verify_two_visits(deadlines, &sched);
    if !verdict.is_feasible() {
        return Err(Error::Internal(format!("index-check schedule rejected: {verdict:?}")));
    }
    Ok(DensitySchedule::Schedule(sched))
}

/// `j` copies of `dj` followed by `dj` copies of `dj + 2j − 1`.
pub fn worst_case_family(j: u64, dj: u64) -> Result<Deadlines> {
    if j == 0 || dj + 1 < 2 * j {
        return Err(precondition(format!("need j ≥ 1 and dj ≥ 2j − 1, got j = {j}, dj = {dj}")));
    }
    let mut v = vec![dj; j as usize];
    v.extend(std::iter::repeat_n(dj + 2 * j - 1, dj as usize));
    Deadlines::new(v)
}

/// `j/dj + dj/(dj + 2j − 1)`, the density of [`worst_case_family`].
pub fn worst_case_density(j: u64, dj: u64) -> BigRational {
    let r = |p: u64, q: u64| BigRational::new(BigInt::from(p), BigInt::from(q));
    r(j, dj) + r(dj, dj + 2 * j - 1)
}

/// `f(x, y) = y/x + x/(x + 2y − 1)` on `y ≥ 1`, `x ≥ 2y − 1`.
pub fn gap_function(x: f64, y: f64) -> Result<f64> {
    if !(y >= 1.0 && x >= 2.0 * y - 1.0 && x > 0.0) {
        return Err(precondition(format!("({x}, {y}) lies outside y ≥ 1, x ≥ 2y − 1")));
    }
    Ok(y / x + x / (x + 2.0 * y - 1.0))
}

/// The line along which `f` approaches its infimum.
pub fn infimum_line(x: f64) -> f64 {
    (std::f64::consts::SQRT_2 - 1.0) / 2.0 * x + 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapScan {
    pub points: u64,
    pub min_value: f64,
    pub argmin: (f64, f64),
    /// Points where `f ≤ √2 − 1/2`; the infimum is never attained.
    pub at_or_below: u64,
    /// `f` on the infimum line at `x_max`.
    pub line_value: f64,
}

/// Evaluates `f` on the grid `x, y ∈ {1, 1 + step, …}` with `x ≤ x_max`.
pub fn gap_infimum_scan(x_max: f64, step: f64) -> Result<GapScan> {
    if x_max < 3.0 || step <= 0.0 {
        return Err(precondition("need x_max ≥ 3 and a positive step"));
    }
    let mut scan = GapScan {
        points: 0,
        min_value: f64::INFINITY,
        argmin: (0.0, 0.0),
        at_or_below: 0,
        line_value: gap_function(x_max, infimum_line(x_max))?,
    };
    let steps_x = ((x_max - 1.0) / step).floor() as u64;
    for ix in 0..=steps_x {
        let x = 1.0 + ix as f64 * step;
        let steps_y = (((x + 1.0) / 2.0 - 1.0) / step).floor() as u64;
        for iy in 0..=steps_y {
            let y = 1.0 + iy as f64 * step;
            let v = y / x + x / (x + 2.0 * y - 1.0);
            scan.points += 1;
            if v <= SQRT2_MINUS_HALF {
                scan.at_or_below += 1;
            }
            if v < scan.min_value {
                scan.min_value = v;
                scan.argmin = (x, y);
            }
        }
    }
    Ok(scan)
}

/// `{2, 3, x}` with `k = 6x + 1`: a no-instance whose density `5/6 + 1/x`
/// tends to `5/6`.
pub fn pinwheel_no_family(x: u64) -> Result<KVisitsInstance> {
    if x < 2 {
        return Err(precondition("x must be at least 2"));
    }
    let k = u32::try_from(6 * x + 1).map_err(|_| precondition("k = 6x + 1 overflows"))?;
    KVisitsInstance::new(Deadlines::new(vec![2, 3, x])?, k)
}

/// `{1, 1+k, …, 1+(n−1)k}` with the schedule visiting task `i` `k` times in a row.
pub fn divergent_family(k: u32, n: usize) -> Result<(KVisitsInstance, Schedule)> {
    let d: Vec<u64> = (0..n as u64).map(|i| 1 + i * k as u64).collect();
    let inst = KVisitsInstance::new(Deadlines::new(d)?, k)?;
    let tasks: Vec<usize> = (1..=n).flat_map(|i| std::iter::repeat_n(i, k as usize)).collect();
    let sched = Schedule::plain(&tasks);
    let verdict = verify_k_visits(&inst, &sched);
    if !verdict.is_feasible() {
        return Err(Error::Internal(format!("block schedule rejected: {verdict:?}")));
    }
    Ok((inst, sched))
}

/// Draws normalized 2-Visits instances with density within `threshold`.
///
/// Deadlines are `2n − g` for a geometric `g` whose rate is itself random,
/// so both sparse and near-threshold instances show up; draws above the
/// threshold are rejected.
pub fn sample_low_density<R: Rng>(rng: &mut R, max_n: usize, threshold: Threshold) -> Result<Deadlines> {
    if max_n == 0 {
        return Err(precondition("max_n must be positive"));
    }
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=max_n);
        let top = 2 * n as u64;
        let rate: f64 = rng.gen_range(0.5 / n as f64..1.0);
        let d: Vec<u64> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(f64::EPSILON..1.0);
                let g = (u.ln() / (1.0 - rate).ln()).floor() as u64;
                top - g.min(top - 1)
            })
            .collect();
        let d = Deadlines::new(d)?;
        if threshold.admits(&density(&d)) {
            return Ok(d);
        }
    }
    Err(Error::Internal("density sampler rejected 100000 draws in a row".into()))
}

/// Time to expiry and visits left per task after a schedule prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StateVector {
    pub remaining: Vec<u64>,
    pub visits_left: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicWindow {
    /// `V(p) = V(q)` with `p < q`.
    pub p: usize,
    pub q: usize,
    /// Positions `p..=q−1` of the schedule.
    pub window: Schedule,
}

/// Looks for two prefixes with the same time-to-expiry vector and returns
/// the block between them, which repeats forever as a pinwheel schedule.
///
/// Returns `None` when some task finishes its `k` visits within the first
/// `min(∏ d_i, L)` positions: then the state vectors are not guaranteed to
/// repeat before a task drops out.
pub fn cyclic_extract(inst: &KVisitsInstance, sched: &Schedule) -> Result<Option<CyclicWindow>> {
    let verdict = verify_k_visits(inst, sched);
    if !verdict.is_feasible() {
        return Err(precondition(format!("schedule is not feasible: {verdict:?}")));
    }
    let d = inst.deadlines.values();
    let n = d.len();
    let len = sched.len();
    let m = (inst.deadlines.product_saturating().min(len as u64)) as usize;
    let mut count = vec![0u32; n];
    let mut kth = vec![0usize; n];
    for e in sched.entries() {
        count[e.task - 1] += 1;
        if count[e.task - 1] == inst.k {
            kth[e.task - 1] = e.pos;
        }
    }
    if kth.iter().any(|&p| p < m + 1) {
        return Ok(None);
    }
    let mut remaining = d.to_vec();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for e in sched.entries().iter().take(m + 1) {
        for (i, r) in remaining.iter_mut().enumerate() {
            *r = if i + 1 == e.task { d[i] } else { *r - 1 };
        }
        if let Some(&p) = seen.get(&remaining) {
            let window = sched.window(p, e.pos - 1);
            let verdict = verify_pinwheel_window(&inst.deadlines, &window);
            if !verdict.is_feasible() {
                return Err(Error::Internal(format!("extracted window rejected: {verdict:?}")));
            }
            return Ok(Some(CyclicWindow { p, q: e.pos, window }));
        }
        seen.insert(remaining.clone(), e.pos);
    }
    Err(Error::Internal("no repeated state within ∏ d_i + 1 positions".into()))
}

/// Checks that repeating `window` forever keeps every task within its
/// deadline: every cyclic gap between consecutive visits is at most `d_i`.
pub fn verify_pinwheel_window(deadlines: &Deadlines, window: &Schedule) -> Verdict {
    let n = deadlines.len();
    let w = window.len();
    let mut visits: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in window.entries() {
        if e.task == 0 || e.task > n {
            return Verdict::infeasible(Violation {
                task: Some(e.task),
                position: Some(e.pos),
                reason: Reason::UnknownTask,
            });
        }
        visits[e.task - 1].push(e.pos);
    }
    let mut found = Vec::new();
    for (i, v) in visits.iter().enumerate() {
        let d = deadlines.values()[i] as usize;
        if v.is_empty() {
            found.push((usize::MAX, i + 1, Reason::TaskAbsent));
            continue;
        }
        let mut prev = v[v.len() - 1] as isize - w as isize;
        for &p in v {
            let gap = (p as isize - prev) as usize;
            if gap > d {
                found.push((p, i + 1, Reason::DeadlineExpired { deadline: d as u64, gap }));
                break;
            }
            prev = p as isize;
        }
    }
    found.sort_by_key(|&(pos, task, _)| (pos, task));
    match found.into_iter().next() {
        None => Verdict::feasible(),
        Some((pos, task, reason)) => Verdict::infeasible(Violation {
            task: Some(task),
            position: (pos != usize::MAX).then_some(pos),
            reason,
        }),
    }
}

/// Exhaustive search for a pinwheel window of length at most `max_len`.
pub fn pinwheel_window_search(deadlines: &Deadlines, max_len: usize) -> Option<Schedule> {
    let n = deadlines.len();
    for len in n.max(1)..=max_len {
        let mut seq = Vec::with_capacity(len);
        if let Some(s) = window_dfs(deadlines, len, &mut seq) {
            return Some(s);
        }
    }
    None
}

fn window_dfs(deadlines: &Deadlines, len: usize, seq: &mut Vec<usize>) -> Option<Schedule> {
    let n = deadlines.len();
    if seq.len() == len {
        let s = Schedule::plain(seq);
        return verify_pinwheel_window(deadlines, &s).is_feasible().then_some(s);
    }
    for task in 1..=n {
        seq.push(task);
        // Linear gaps inside the window must already respect the deadlines.
        let ok = (1..=n).all(|i| {
            let d = deadlines.values()[i - 1] as usize;
            let mut last = 0usize;
            for (p, &t) in seq.iter().enumerate() {
                if t == i {
                    if p + 1 - last > d && last > 0 {
                        return false;
                    }
                    last = p + 1;
                }
            }
            last == 0 || seq.len() - last < d
        }) && {
            // Every task must still fit: missing tasks need a slot within their deadline.
            let missing = (1..=n).filter(|i| !seq.contains(i)).count();
            missing <= len - seq.len()
        };
        if ok {
            if let Some(s) = window_dfs(deadlines, len, seq) {
                return Some(s);
            }
        }
        seq.pop();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::density;
    use num_traits::One;

    fn dl(v: &[u64]) -> Deadlines {
        Deadlines::new(v.to_vec()).unwrap()
    }

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn one_visit_examples() {
        assert_eq!(one_visit_schedule(&dl(&[1, 2, 3])), OneVisit::Schedule(Schedule::plain(&[1, 2, 3])));
        assert_eq!(one_visit_schedule(&dl(&[2, 2, 2])), OneVisit::Witness(3));
        assert!(matches!(one_visit_schedule(&dl(&[3, 3, 3])), OneVisit::Schedule(_)));
        for n in 2..10u64 {
            let d = dl(&vec![n - 1; n as usize]);
            assert_eq!(one_visit_schedule(&d), OneVisit::Witness(n as usize));
        }
    }

    #[test]
    fn claim_examples() {
        let r = claim_property(&dl(&[4, 4, 4])).unwrap();
        assert!(r.holds());
        let ts: Vec<u64> = r.records.iter().map(|r| r.t).collect();
        let bounds: Vec<u64> = r.records.iter().map(|r| r.bound).collect();
        assert_eq!(ts, [1, 5, 6]);
        assert_eq!(bounds, [6, 7, 8]);
        let r = claim_property(&dl(&[4, 4, 7, 7, 7, 7])).unwrap();
        assert_eq!(r.first_violation, Some(2));
        assert_eq!(r.violations(), [2]);
        assert!(claim_property(&dl(&[2, 2])).unwrap().holds());
    }

    #[test]
    fn density_schedule_examples() {
        let DensitySchedule::Schedule(s) = density_schedule_2v(&dl(&[4, 4, 4])).unwrap() else {
            panic!()
        };
        let primaries: Vec<usize> =
            s.entries().iter().filter(|e| e.role == Role::Primary).map(|e| e.pos).collect();
        assert_eq!(primaries, [2, 3, 4]);
        assert!(matches!(
            density_schedule_2v(&dl(&[4, 4, 7, 7, 7, 7])).unwrap(),
            DensitySchedule::Violation(_)
        ));
    }

    #[test]
    fn worst_case_examples() {
        let d = worst_case_family(2, 4).unwrap();
        assert_eq!(d, dl(&[4, 4, 7, 7, 7, 7]));
        assert_eq!(density(&d), ratio(15, 14));
        assert_eq!(worst_case_density(2, 4), ratio(15, 14));
        assert_eq!(worst_case_family(1, 1).unwrap(), dl(&[1, 2]));
        assert!(worst_case_family(3, 4).is_err());
    }

    #[test]
    fn gap_function_examples() {
        assert!((gap_function(3.0, 1.0).unwrap() - 13.0 / 12.0).abs() < 1e-12);
        assert!((gap_function(1.0, 1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!(gap_function(1.0, 2.0).is_err());
        let mut prev = f64::INFINITY;
        for x in [10.0, 100.0, 1000.0, 10000.0] {
            let v = gap_function(x, infimum_line(x)).unwrap();
            assert!(v < prev && v > SQRT2_MINUS_HALF);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for x in [3.0, 10.0, 100.0, 1e6] {
            let v = gap_function(x, 1.0).unwrap();
            assert!(v < prev && v > 1.0);
            prev = v;
        }
        assert!((prev - 1.0).abs() < 1e-5);
    }

    #[test]
    fn small_scan() {
        let s = gap_infimum_scan(200.0, 0.5).unwrap();
        assert_eq!(s.at_or_below, 0);
        assert!(s.min_value > SQRT2_MINUS_HALF && s.min_value < 0.93);
    }

    #[test]
    fn families() {
        let inst = pinwheel_no_family(2).unwrap();
        assert_eq!((inst.deadlines.values(), inst.k), (&[2, 2, 3][..], 13));
        for x in 2..30 {
            let d = pinwheel_no_family(x).unwrap().deadlines;
            assert_eq!(density(&d), ratio(5, 6) + ratio(1, x as i64));
        }
        let (inst, s) = divergent_family(2, 3).unwrap();
        assert_eq!(inst.deadlines, dl(&[1, 3, 5]));
        assert_eq!(s.tasks(), [1, 1, 2, 2, 3, 3]);
        assert_eq!(density(&inst.deadlines), ratio(23, 15));
        let (inst, _) = divergent_family(1, 4).unwrap();
        assert_eq!(density(&inst.deadlines), ratio(25, 12));
    }

    #[test]
    fn cyclic_examples() {
        let inst = KVisitsInstance::new(dl(&[2, 2]), 3).unwrap();
        let c = cyclic_extract(&inst, &Schedule::plain(&[1, 2, 1, 2, 1, 2])).unwrap().unwrap();
        assert_eq!((c.p, c.q), (1, 3));
        assert_eq!(c.window.tasks(), [1, 2]);
        let (inst, s) = divergent_family(2, 3).unwrap();
        assert_eq!(cyclic_extract(&inst, &s).unwrap(), None);
    }

    #[test]
    fn pinwheel_window_examples() {
        assert!(verify_pinwheel_window(&dl(&[2, 2]), &Schedule::plain(&[1, 2])).is_feasible());
        // Task 2 (deadline 3) waits 4 slots across the wrap.
        assert!(!verify_pinwheel_window(&dl(&[2, 3, 6]), &Schedule::plain(&[1, 2, 1, 3])).is_feasible());
        let v = verify_pinwheel_window(&dl(&[2, 2, 5]), &Schedule::plain(&[1, 2]));
        assert_eq!(v.witness().unwrap().reason, Reason::TaskAbsent);
        for x in 2..8 {
            assert_eq!(pinwheel_window_search(&dl(&[2, 3, x]), 12), None);
        }
        assert!(pinwheel_window_search(&dl(&[2, 4, 4]), 6).is_some());
    }

    #[test]
    fn low_density_sampler_respects_threshold() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let d = sample_low_density(&mut rng, 20, Threshold::Sqrt2Half).unwrap();
            assert!(Threshold::Sqrt2Half.admits(&density(&d)));
            assert!(d.max().unwrap() <= 2 * d.len() as u64);
            let d = sample_low_density(&mut rng, 20, Threshold::One).unwrap();
            assert!(density(&d) <= BigRational::one());
        }
    }
}
