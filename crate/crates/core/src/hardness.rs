//! Instance transformers from Numerical Matching with Target Sums down to
//! Position Matching, and exhaustive oracles for each intermediate problem.
//!
//! The chain is NMTS → SRNMTS (middle set fixed to `[n]`) → IN3DM (sums
//! relaxed to `a + b ≥ t`) → shifted IN3DM (`min A ≥ n`) → Position Matching
//! with every deadline value appearing at most twice.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::discretized_sequence;
use crate::error::{invalid, precondition, Error, Result};
use crate::model::Deadlines;
use crate::posmatch::{solve_exact_search, PMInstance};

/// Find a bijection with `a + b = t` for every triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NMTSInstance {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub t: Vec<u64>,
}

/// NMTS whose middle set is `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SRNMTSInstance {
    pub a: Vec<u64>,
    pub t: Vec<u64>,
}

/// Middle set `[n]`, triples need only `a + b ≥ t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IN3DMInstance {
    pub a: Vec<u64>,
    pub t: Vec<u64>,
}

impl NMTSInstance {
    pub fn new(a: Vec<u64>, b: Vec<u64>, t: Vec<u64>) -> Result<Self> {
        if a.len() != b.len() || a.len() != t.len() {
            return Err(invalid("A, B and T must have equal length"));
        }
        if a.iter().chain(&b).chain(&t).any(|&x| x == 0) {
            return Err(invalid("values must be positive"));
        }
        Ok(NMTSInstance { a, b, t })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

impl SRNMTSInstance {
    pub fn new(a: Vec<u64>, t: Vec<u64>) -> Result<Self> {
        if a.len() != t.len() {
            return Err(invalid("A and T must have equal length"));
        }
        if !is_simple(&a) || !is_simple(&t) {
            return Err(invalid("A and T must be duplicate-free"));
        }
        Ok(SRNMTSInstance { a, t })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

impl IN3DMInstance {
    pub fn new(a: Vec<u64>, t: Vec<u64>) -> Result<Self> {
        if a.len() != t.len() {
            return Err(invalid("A and T must have equal length"));
        }
        Ok(IN3DMInstance { a, t })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Output of a reduction step: either an equivalent instance, or a marker
/// that the input is a no-instance for a reason visible without search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduced<T> {
    Instance(T),
    TrivialNo,
}

fn is_simple(v: &[u64]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

/// Replaces `B` by `[max B]`: every missing middle value `s_i` gets its own
/// new pair `3i·max(T) − s_i` in `A` and `3i·max(T)` in `T`, which can only
/// be matched with each other.
pub fn nmts_to_srnmts(inst: &NMTSInstance) -> Result<Reduced<SRNMTSInstance>> {
    if !is_simple(&inst.a) || !is_simple(&inst.b) || !is_simple(&inst.t) {
        return Err(precondition("A, B and T must each be duplicate-free"));
    }
    let (Some(&max_a), Some(&max_b), Some(&max_t)) =
        (inst.a.iter().max(), inst.b.iter().max(), inst.t.iter().max())
    else {
        return Ok(Reduced::Instance(SRNMTSInstance::new(vec![], vec![])?));
    };
    if max_t <= max_a || max_t <= max_b {
        return Ok(Reduced::TrivialNo);
    }
    let present: HashSet<u64> = inst.b.iter().copied().collect();
    let missing: Vec<u64> = (1..=max_b).filter(|s| !present.contains(s)).collect();
    let mut a = inst.a.clone();
    let mut t = inst.t.clone();
    for (i, &s) in missing.iter().enumerate() {
        let block = 3 * (i as u64 + 1) * max_t;
        a.push(block - s);
        t.push(block);
    }
    a.sort_unstable();
    t.sort_unstable();
    Ok(Reduced::Instance(SRNMTSInstance::new(a, t)?))
}

/// Keeps the instance when `Σ(a_i + i) = Σ t_i`; then `a + b ≥ t` on every
/// triple forces equality everywhere.
pub fn srnmts_to_in3dm(inst: &SRNMTSInstance) -> Reduced<IN3DMInstance> {
    let n = inst.n() as u128;
    let lhs: u128 = inst.a.iter().map(|&x| x as u128).sum::<u128>() + n * (n + 1) / 2;
    let rhs: u128 = inst.t.iter().map(|&x| x as u128).sum();
    if lhs != rhs {
        return Reduced::TrivialNo;
    }
    Reduced::Instance(IN3DMInstance {
        a: inst.a.clone(),
        t: inst.t.clone(),
    })
}

/// Adds `n` to every element of `A` and `T`.
pub fn in3dm_normalize(inst: &IN3DMInstance) -> IN3DMInstance {
    let n = inst.n() as u64;
    IN3DMInstance {
        a: inst.a.iter().map(|x| x + n).collect(),
        t: inst.t.iter().map(|x| x + n).collect(),
    }
}

/// The value `P = max(max A, max T)` used by [`in3dm_to_pm`].
pub fn padding_bound(inst: &IN3DMInstance) -> u64 {
    inst.a.iter().chain(&inst.t).copied().max().unwrap_or(0)
}

/// Pads a shifted IN3DM instance into Position Matching.
///
/// With `P = max(max A, max T)`, the deadlines are `A` plus two copies of
/// each of `P+1, …, 2P−n`, and the targets are `T` plus the range
/// `[P+n+2, 4P−2n+1]` with every third element (offsets `2, 5, 8, …`)
/// left out. The padding fills every position above `n`, so `A` can only
/// use positions `1..=n`, which play the role of the middle set.
pub fn in3dm_to_pm(inst: &IN3DMInstance) -> Result<PMInstance> {
    let n = inst.n() as u64;
    if !is_simple(&inst.a) || !is_simple(&inst.t) {
        return Err(precondition("A and T must be duplicate-free"));
    }
    if inst.a.iter().any(|&x| x < n) {
        return Err(precondition("every element of A must be at least n; shift first"));
    }
    let p = padding_bound(inst);
    let mut d = inst.a.clone();
    for v in p + 1..=(2 * p).saturating_sub(n) {
        d.push(v);
        d.push(v);
    }
    let mut t = inst.t.clone();
    let lo = p + n + 2;
    let hi = (4 * p + 1).saturating_sub(2 * n);
    t.extend((lo..=hi).filter(|x| (x - lo) % 3 != 2));
    let pm = PMInstance::new(Deadlines::new(d)?, t)?;
    if !pm.seq().is_prefix() {
        return Err(Error::Internal("padded deadlines do not discretize to a prefix".into()));
    }
    Ok(pm)
}

/// Triples `(a, b, t)` of a witness, by value.
pub type Witness = Vec<(u64, u64, u64)>;

/// Exhaustive search for a bijection `A × B → T` with `fits(a, b, t)` on
/// every triple. Targets are covered largest first; refuted pairs of
/// remaining `A`/`B` subsets are remembered.
fn triple_search(
    a: &[u64],
    b: &[u64],
    t: &[u64],
    cap: usize,
    what: &'static str,
    fits: impl Fn(u64, u64, u64) -> bool,
) -> Result<Option<Witness>> {
    let n = a.len();
    if n > cap.min(64) {
        return Err(Error::CapExceeded {
            what,
            cap: cap.min(64) as u64,
            actual: n as u64,
        });
    }
    let mut t_desc = t.to_vec();
    t_desc.sort_unstable_by(|x, y| y.cmp(x));

    struct Ctx<'a, F> {
        a: &'a [u64],
        b: &'a [u64],
        t: Vec<u64>,
        fits: F,
        dead: HashSet<(u64, u64)>,
        out: Witness,
    }

    fn go<F: Fn(u64, u64, u64) -> bool>(c: &mut Ctx<'_, F>, a_used: u64, b_used: u64, k: usize) -> bool {
        if k == c.t.len() {
            return true;
        }
        if c.dead.contains(&(a_used, b_used)) {
            return false;
        }
        let t = c.t[k];
        let mut tried_a = HashSet::new();
        for i in 0..c.a.len() {
            if a_used >> i & 1 == 1 || !tried_a.insert(c.a[i]) {
                continue;
            }
            let mut tried_b = HashSet::new();
            for j in 0..c.b.len() {
                if b_used >> j & 1 == 1 || !tried_b.insert(c.b[j]) || !(c.fits)(c.a[i], c.b[j], t) {
                    continue;
                }
                c.out.push((c.a[i], c.b[j], t));
                if go(c, a_used | 1 << i, b_used | 1 << j, k + 1) {
                    return true;
                }
                c.out.pop();
            }
        }
        c.dead.insert((a_used, b_used));
        false
    }

    let mut ctx = Ctx {
        a,
        b,
        t: t_desc,
        fits,
        dead: HashSet::new(),
        out: Vec::with_capacity(n),
    };
    Ok(go(&mut ctx, 0, 0, 0).then_some(ctx.out))
}

pub const DEFAULT_ORACLE_CAP: usize = 7;

pub fn solve_nmts_bf(inst: &NMTSInstance, cap: usize) -> Result<Option<Witness>> {
    triple_search(&inst.a, &inst.b, &inst.t, cap, "NMTS oracle", |a, b, t| a + b == t)
}

pub fn solve_srnmts_bf(inst: &SRNMTSInstance, cap: usize) -> Result<Option<Witness>> {
    let b: Vec<u64> = (1..=inst.n() as u64).collect();
    triple_search(&inst.a, &b, &inst.t, cap, "SRNMTS oracle", |a, b, t| a + b == t)
}

pub fn solve_in3dm_bf(inst: &IN3DMInstance, cap: usize) -> Result<Option<Witness>> {
    let b: Vec<u64> = (1..=inst.n() as u64).collect();
    triple_search(&inst.a, &b, &inst.t, cap, "IN3DM oracle", |a, b, t| a + b >= t)
}

/// How [`random_nmts`] chooses `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmtsDraw {
    /// `T` is the sum set of a hidden matching: always a yes-instance.
    Planted,
    /// `T` is redrawn until `ΣT = ΣA + ΣB`, so the sum test cannot reject it.
    Balanced,
    Uniform,
}

/// Random duplicate-free NMTS instance with values in `1..=max_value`.
pub fn random_nmts<R: Rng>(rng: &mut R, n: usize, max_value: u64, how: NmtsDraw) -> Result<NMTSInstance> {
    if n as u64 > max_value {
        return Err(precondition("need at least n distinct values"));
    }
    let draw = |rng: &mut R| -> Vec<u64> {
        let mut v: Vec<u64> = sample(rng, max_value as usize, n)
            .into_iter()
            .map(|x| x as u64 + 1)
            .collect();
        v.sort_unstable();
        v
    };
    for _ in 0..10_000 {
        let a = draw(rng);
        let b = draw(rng);
        let t = match how {
            NmtsDraw::Planted => {
                let perm = sample(rng, n, n).into_vec();
                let mut t: Vec<u64> = (0..n).map(|i| a[i] + b[perm[i]]).collect();
                t.sort_unstable();
                if !is_simple(&t) || t.last().is_some_and(|&x| x > max_value) {
                    continue;
                }
                t
            }
            NmtsDraw::Balanced => {
                let t = draw(rng);
                if t.iter().sum::<u64>() != a.iter().chain(&b).sum::<u64>() {
                    continue;
                }
                t
            }
            NmtsDraw::Uniform => draw(rng),
        };
        return NMTSInstance::new(a, b, t);
    }
    Err(precondition("no instance of the requested kind found after 10000 draws"))
}

/// Verdict of every stage of the chain on one NMTS instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub nmts: bool,
    /// `None` when an earlier step already returned the trivial no.
    pub srnmts: Option<bool>,
    pub in3dm: Option<bool>,
    pub in3dm_shifted: Option<bool>,
    pub pm: Option<bool>,
    pub pm_size: Option<usize>,
    pub pm_max_multiplicity: Option<usize>,
    pub pm_prefix_ok: Option<bool>,
}

impl ChainReport {
    /// True when every stage that ran agrees with the source verdict.
    pub fn consistent(&self) -> bool {
        let stages = [self.srnmts, self.in3dm, self.in3dm_shifted, self.pm];
        let ran: Vec<bool> = stages.iter().flatten().copied().collect();
        if ran.len() < stages.len() && self.nmts {
            return false;
        }
        ran.iter().all(|&v| v == self.nmts) && self.pm_prefix_ok != Some(false)
    }
}

/// Pushes `inst` through the whole chain, deciding each stage with its own
/// exhaustive oracle.
pub fn run_chain(inst: &NMTSInstance, oracle_cap: usize, pm_budget: u64) -> Result<ChainReport> {
    let mut report = ChainReport {
        nmts: solve_nmts_bf(inst, oracle_cap)?.is_some(),
        srnmts: None,
        in3dm: None,
        in3dm_shifted: None,
        pm: None,
        pm_size: None,
        pm_max_multiplicity: None,
        pm_prefix_ok: None,
    };
    let Reduced::Instance(sr) = nmts_to_srnmts(inst)? else {
        return Ok(report);
    };
    report.srnmts = Some(solve_srnmts_bf(&sr, oracle_cap)?.is_some());
    let Reduced::Instance(ind) = srnmts_to_in3dm(&sr) else {
        return Ok(report);
    };
    report.in3dm = Some(solve_in3dm_bf(&ind, oracle_cap)?.is_some());
    let shifted = in3dm_normalize(&ind);
    report.in3dm_shifted = Some(solve_in3dm_bf(&shifted, oracle_cap)?.is_some());
    let pm = in3dm_to_pm(&shifted)?;
    let expected_len = 2 * padding_bound(&shifted) - shifted.n() as u64;
    report.pm_size = Some(pm.n());
    report.pm_max_multiplicity = Some(pm.deadlines().max_multiplicity());
    report.pm_prefix_ok = Some(
        discretized_sequence(pm.deadlines())?.is_prefix() && pm.n() as u64 == expected_len,
    );
    report.pm = Some(solve_exact_search(&pm, pm_budget)?.is_some());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<u64>) -> Vec<u64> {
        v.sort_unstable();
        v
    }

    #[test]
    fn nmts_to_srnmts_examples() {
        let inst = NMTSInstance::new(vec![1, 2], vec![1, 3], vec![2, 5]).unwrap();
        let Reduced::Instance(sr) = nmts_to_srnmts(&inst).unwrap() else { panic!() };
        assert_eq!(sr.a, [1, 2, 13]);
        assert_eq!(sr.t, [2, 5, 15]);
        assert!(solve_nmts_bf(&inst, 7).unwrap().is_some());
        assert!(solve_srnmts_bf(&sr, 7).unwrap().is_some());

        let inst = NMTSInstance::new(vec![1, 2], vec![1, 2], vec![3, 4]).unwrap();
        let Reduced::Instance(sr) = nmts_to_srnmts(&inst).unwrap() else { panic!() };
        assert_eq!((sr.a, sr.t), (vec![1, 2], vec![3, 4]));

        let inst = NMTSInstance::new(vec![1, 2], vec![1, 5], vec![2, 5]).unwrap();
        assert_eq!(nmts_to_srnmts(&inst).unwrap(), Reduced::TrivialNo);

        let inst = NMTSInstance::new(vec![1, 1], vec![1, 2], vec![2, 3]).unwrap();
        assert!(nmts_to_srnmts(&inst).is_err());
    }

    #[test]
    fn srnmts_to_in3dm_examples() {
        let ok = SRNMTSInstance::new(vec![1, 2], vec![2, 4]).unwrap();
        assert_eq!(
            srnmts_to_in3dm(&ok),
            Reduced::Instance(IN3DMInstance::new(vec![1, 2], vec![2, 4]).unwrap())
        );
        let bad = SRNMTSInstance::new(vec![1, 2], vec![2, 5]).unwrap();
        assert_eq!(srnmts_to_in3dm(&bad), Reduced::TrivialNo);
    }

    #[test]
    fn shift_examples() {
        let inst = IN3DMInstance::new(vec![1, 2], vec![2, 4]).unwrap();
        let s = in3dm_normalize(&inst);
        assert_eq!((s.a.clone(), s.t.clone()), (vec![3, 4], vec![4, 6]));
        let twice = in3dm_normalize(&s);
        assert_eq!(
            solve_in3dm_bf(&twice, 7).unwrap().is_some(),
            solve_in3dm_bf(&inst, 7).unwrap().is_some()
        );
    }

    #[test]
    fn padding_listing_for_p6_n2() {
        let inst = IN3DMInstance::new(vec![3, 4], vec![4, 6]).unwrap();
        let pm = in3dm_to_pm(&inst).unwrap();
        assert_eq!(pm.deadlines().values(), &[3, 4, 7, 7, 8, 8, 9, 9, 10, 10]);
        assert_eq!(pm.targets(), &[4, 6, 10, 11, 13, 14, 16, 17, 19, 20]);
        assert_eq!(pm.seq().positions(), (1..=10).collect::<Vec<_>>().as_slice());
        assert_eq!(pm.deadlines().max_multiplicity(), 2);
        // 2P − 2n padded targets.
        assert_eq!(pm.targets().len() - 2, 2 * 6 - 2 * 2);
        assert!(solve_exact_search(&pm, 100_000).unwrap().is_some());
        assert!(in3dm_to_pm(&IN3DMInstance::new(vec![1, 2], vec![2, 4]).unwrap()).is_err());
    }

    #[test]
    fn oracle_examples() {
        let nmts = NMTSInstance::new(vec![1, 2], vec![1, 2], vec![2, 4]).unwrap();
        let w = solve_nmts_bf(&nmts, 7).unwrap().unwrap();
        assert_eq!(sorted(w.iter().map(|x| x.2).collect()), [2, 4]);
        let sr = SRNMTSInstance::new(vec![1, 3], vec![2, 5]).unwrap();
        let mut w = solve_srnmts_bf(&sr, 7).unwrap().unwrap();
        w.sort();
        assert_eq!(w, [(1, 1, 2), (3, 2, 5)]);
        let ind = IN3DMInstance::new(vec![3, 4], vec![4, 6]).unwrap();
        assert!(solve_in3dm_bf(&ind, 7).unwrap().is_some());
        let big = IN3DMInstance::new((1..=8).collect(), (1..=8).collect()).unwrap();
        assert!(matches!(solve_in3dm_bf(&big, 7), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn padded_elements_match_among_themselves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..60 {
            let n = rng.gen_range(1..=3);
            let inst = random_nmts(&mut rng, n, 9, NmtsDraw::Planted).unwrap();
            let Reduced::Instance(sr) = nmts_to_srnmts(&inst).unwrap() else { continue };
            let Some(w) = solve_srnmts_bf(&sr, 16).unwrap() else { continue };
            let max_t = *inst.t.iter().max().unwrap();
            for (a, b, t) in w {
                if !inst.a.contains(&a) {
                    assert_eq!(t % (3 * max_t), 0);
                    assert_eq!(a + b, t);
                    assert!(!inst.b.contains(&b));
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn small_chain_is_consistent() {
        let inst = NMTSInstance::new(vec![1, 2], vec![1, 3], vec![2, 5]).unwrap();
        let r = run_chain(&inst, 16, 1_000_000).unwrap();
        assert!(r.nmts && r.consistent(), "{r:?}");
        assert_eq!(r.pm_max_multiplicity, Some(2));
    }
}
