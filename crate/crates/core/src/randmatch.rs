//! Position Matching as exact-weight perfect matching, and a randomized
//! one-sided-error decision procedure for the latter.
//!
//! Every distinct deadline value gets a weight that is a power of `n + 1`;
//! a perfect matching hits the target weight exactly when it uses each
//! value as often as `D` does. The decision evaluates the determinant of a
//! randomly weighted polynomial matrix at roots of unity of `F_p` and reads
//! off one coefficient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::posmatch::{solve_auto, Outcome, PMInstance, PMMatching, SolveConfig, Strategy, Triplet};

/// The Mersenne prime `2^61 − 1`.
pub const MODULUS: u64 = (1 << 61) - 1;

/// Prime factors of `MODULUS − 1`.
const ORDER_FACTORS: [(u64, u32); 12] = [
    (2, 1),
    (3, 2),
    (5, 2),
    (7, 1),
    (11, 1),
    (13, 1),
    (31, 1),
    (41, 1),
    (61, 1),
    (151, 1),
    (331, 1),
    (1321, 1),
];

/// A primitive root modulo `MODULUS`.
const GENERATOR: u64 = 37;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub weight: u64,
    /// Index of the deadline value this edge stands for, when it has one.
    pub tag: Option<usize>,
}

/// Bipartite graph with parallel edges; vertices are 0-based on both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedBipartiteMultigraph {
    pub left_count: usize,
    pub right_count: usize,
    pub edges: Vec<Edge>,
}

impl WeightedBipartiteMultigraph {
    pub fn new(left_count: usize, right_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if let Some(e) = edges.iter().find(|e| e.left >= left_count || e.right >= right_count) {
            return Err(invalid(format!("edge {e:?} leaves the vertex range")));
        }
        Ok(WeightedBipartiteMultigraph {
            left_count,
            right_count,
            edges,
        })
    }

    /// Sum over left vertices of their heaviest edge; `None` if one is isolated.
    pub fn degree_bound(&self) -> Option<u64> {
        let mut best: Vec<Option<u64>> = vec![None; self.left_count];
        for e in &self.edges {
            let b = &mut best[e.left];
            *b = Some(b.map_or(e.weight, |w| w.max(e.weight)));
        }
        best.into_iter()
            .try_fold(0u64, |acc, w| w.and_then(|w| acc.checked_add(w)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EWPMInstance {
    pub graph: WeightedBipartiteMultigraph,
    pub target: u64,
}

/// Per-value weights `(n+1)^(i−1)` and the target `Σ n_i (n+1)^(i−1)`.
pub fn pm_to_ewpm(inst: &PMInstance) -> Result<EWPMInstance> {
    let n = inst.n();
    let counts = inst.deadlines().value_counts();
    let base = n as u64 + 1;
    let mut weights = Vec::with_capacity(counts.len());
    let mut w = 1u64;
    let mut target = 0u64;
    for (i, &(_, c)) in counts.iter().enumerate() {
        if i > 0 {
            w = w.checked_mul(base).ok_or(Error::Overflow("computing value weights"))?;
        }
        weights.push(w);
        target = (c as u64)
            .checked_mul(w)
            .and_then(|x| x.checked_add(target))
            .ok_or(Error::Overflow("computing the target weight"))?;
    }
    let a = inst.seq().positions();
    let t = inst.targets();
    let mut edges = Vec::new();
    for (j, &aj) in a.iter().enumerate() {
        for (k, &tk) in t.iter().enumerate() {
            for (i, &(d, _)) in counts.iter().enumerate() {
                if d >= aj && d + aj >= tk {
                    edges.push(Edge {
                        left: j,
                        right: k,
                        weight: weights[i],
                        tag: Some(i),
                    });
                }
            }
        }
    }
    Ok(EWPMInstance {
        graph: WeightedBipartiteMultigraph::new(n, n, edges)?,
        target,
    })
}

/// Replaces every edge `u–v` of weight `w` by the path `u–x1–x2–v` with
/// weights `w, 0, 0`. `x1` joins the right side and `x2` the left side, so
/// the result is simple and still bipartite.
pub fn multigraph_to_simple(inst: &EWPMInstance) -> EWPMInstance {
    let g = &inst.graph;
    let m = g.edges.len();
    let mut edges = Vec::with_capacity(3 * m);
    for (idx, e) in g.edges.iter().enumerate() {
        let x1 = g.right_count + idx;
        let x2 = g.left_count + idx;
        edges.push(Edge {
            left: e.left,
            right: x1,
            weight: e.weight,
            tag: e.tag,
        });
        edges.push(Edge {
            left: x2,
            right: x1,
            weight: 0,
            tag: None,
        });
        edges.push(Edge {
            left: x2,
            right: e.right,
            weight: 0,
            tag: None,
        });
    }
    EWPMInstance {
        graph: WeightedBipartiteMultigraph {
            left_count: g.left_count + m,
            right_count: g.right_count + m,
            edges,
        },
        target: inst.target,
    }
}

/// Sorted weights of every perfect matching, parallel edges counted apart.
pub fn ewpm_brute_force(inst: &EWPMInstance, cap: usize) -> Result<Vec<u64>> {
    let g = &inst.graph;
    if g.left_count > cap {
        return Err(Error::CapExceeded {
            what: "perfect matching enumeration",
            cap: cap as u64,
            actual: g.left_count as u64,
        });
    }
    let mut out = Vec::new();
    if g.left_count != g.right_count {
        return Ok(out);
    }
    let mut by_left: Vec<Vec<&Edge>> = vec![Vec::new(); g.left_count];
    for e in &g.edges {
        by_left[e.left].push(e);
    }
    fn walk(by_left: &[Vec<&Edge>], u: usize, used: &mut [bool], acc: u64, out: &mut Vec<u64>) {
        if u == by_left.len() {
            out.push(acc);
            return;
        }
        for e in &by_left[u] {
            if !used[e.right] {
                used[e.right] = true;
                walk(by_left, u + 1, used, acc + e.weight, out);
                used[e.right] = false;
            }
        }
    }
    walk(&by_left, 0, &mut vec![false; g.right_count], 0, &mut out);
    out.sort_unstable();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Answer {
    Yes,
    ProbablyNo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RandomizedVerdict {
    pub answer: Answer,
    pub trials: u32,
    pub field_modulus: u64,
    pub seed: u64,
}

fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    r
}

fn inv(a: u64) -> u64 {
    pow(a, MODULUS - 2)
}

/// Determinant over `F_p` by Gaussian elimination; consumes `m`.
fn det(mut m: Vec<Vec<u64>>) -> u64 {
    let n = m.len();
    let mut result = 1u64;
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| m[r][c] != 0) else {
            return 0;
        };
        if p != c {
            m.swap(p, c);
            result = MODULUS - result;
        }
        result = mul(result, m[c][c]);
        let pivot_inv = inv(m[c][c]);
        for r in c + 1..n {
            if m[r][c] == 0 {
                continue;
            }
            let f = mul(m[r][c], pivot_inv);
            for k in c..n {
                let sub = mul(f, m[c][k]);
                m[r][k] = add(m[r][k], MODULUS - sub);
            }
        }
    }
    result
}

/// Smallest divisor of `MODULUS − 1` that is at least `min`.
fn smooth_order(min: u64) -> Option<u64> {
    let mut divisors = vec![1u64];
    for &(q, e) in &ORDER_FACTORS {
        let mut next = Vec::with_capacity(divisors.len() * (e as usize + 1));
        for &d in &divisors {
            let mut x = d;
            next.push(x);
            for _ in 0..e {
                x *= q;
                next.push(x);
            }
        }
        divisors = next;
    }
    divisors.into_iter().filter(|&d| d >= min).min()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn trial_rng(seed: u64, stream: u64, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix(stream ^ splitmix(trial as u64)));
    rng
}

/// One-sided decision: `true` means a matching of the target weight exists.
fn decide(inst: &EWPMInstance, seed: u64, stream: u64, trials: u32) -> Result<bool> {
    let g = &inst.graph;
    let n = g.left_count;
    if n != g.right_count {
        return Ok(false);
    }
    if n == 0 {
        return Ok(inst.target == 0);
    }
    let Some(deg) = g.degree_bound() else {
        return Ok(false);
    };
    if inst.target > deg {
        return Ok(false);
    }
    let order = smooth_order(deg + 1)
        .ok_or_else(|| Error::Precondition(format!("degree bound {deg} exceeds the field")))?;
    let omega = pow(GENERATOR, (MODULUS - 1) / order);
    let mut powers = Vec::with_capacity(order as usize);
    let mut x = 1u64;
    for _ in 0..order {
        powers.push(x);
        x = mul(x, omega);
    }
    let exps: Vec<u64> = g.edges.iter().map(|e| e.weight % order).collect();
    let target_exp = inst.target % order;
    let order_inv = inv(order % MODULUS);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, stream, trial);
        let coeffs: Vec<u64> = g.edges.iter().map(|_| rng.gen_range(1..MODULUS)).collect();
        let mut acc = 0u64;
        for k in 0..order {
            let mut m = vec![vec![0u64; n]; n];
            for (e, (&r, &w)) in g.edges.iter().zip(coeffs.iter().zip(&exps)) {
                let xw = powers[((k as u128 * w as u128) % order as u128) as usize];
                m[e.left][e.right] = add(m[e.left][e.right], mul(r, xw));
            }
            let back = (order - (k as u128 * target_exp as u128 % order as u128) as u64) % order;
            acc = add(acc, mul(det(m), powers[back as usize]));
        }
        if mul(acc, order_inv) != 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Randomized decision with one-sided error: `Yes` is never wrong; a false
/// `ProbablyNo` needs every trial to hit a root of a nonzero polynomial of
/// degree at most the degree bound.
pub fn ewpm_decide_randomized(inst: &EWPMInstance, seed: u64, trials: u32) -> Result<RandomizedVerdict> {
    let yes = decide(inst, seed, 0, trials)?;
    Ok(RandomizedVerdict {
        answer: if yes { Answer::Yes } else { Answer::ProbablyNo },
        trials,
        field_modulus: MODULUS,
        seed,
    })
}

/// Rough operation count of one randomized decision on `inst`.
pub fn work_estimate(inst: &PMInstance) -> Option<u64> {
    let ewpm = pm_to_ewpm(inst).ok()?;
    let deg = ewpm.graph.degree_bound().unwrap_or(0);
    let n = inst.n() as u64;
    let per_point = n.checked_pow(3)?.checked_add(ewpm.graph.edges.len() as u64)?;
    (deg.checked_add(1)?).checked_mul(per_point)
}

#[derive(Clone, Copy, Debug)]
pub struct RandomizedConfig {
    pub seed: u64,
    /// Distinguishes independent callers sharing one seed.
    pub stream: u64,
    pub trials: u32,
}

/// Decides one cluster and, on yes, extracts a matching by deleting every
/// edge whose removal keeps the answer yes.
pub fn solve_cluster_randomized(inst: &PMInstance, cfg: &RandomizedConfig) -> Result<Option<PMMatching>> {
    let mut ewpm = pm_to_ewpm(inst)?;
    let mut call = 0u64;
    let mut next_stream = || {
        call += 1;
        splitmix(cfg.stream).wrapping_add(call)
    };
    if !decide(&ewpm, cfg.seed, next_stream(), cfg.trials)? {
        return Ok(None);
    }
    let mut i = 0;
    while i < ewpm.graph.edges.len() {
        let e = ewpm.graph.edges[i];
        let left_alone = ewpm.graph.edges.iter().filter(|f| f.left == e.left).count() == 1;
        let right_alone = ewpm.graph.edges.iter().filter(|f| f.right == e.right).count() == 1;
        if left_alone || right_alone {
            i += 1;
            continue;
        }
        let removed = ewpm.graph.edges.remove(i);
        if !decide(&ewpm, cfg.seed, next_stream(), cfg.trials)? {
            ewpm.graph.edges.insert(i, removed);
            i += 1;
        }
    }
    let matching = matching_from_edges(inst, &ewpm)?;
    matching.validate(inst)?;
    Ok(Some(matching))
}

/// Reads the surviving edges back as triplets, checking that they form a
/// perfect matching that uses each deadline value exactly as often as `D`.
fn matching_from_edges(inst: &PMInstance, ewpm: &EWPMInstance) -> Result<PMMatching> {
    let n = inst.n();
    let edges = &ewpm.graph.edges;
    let broken = |what: &str| Error::Internal(format!("extracted edge set {what}"));
    if edges.len() != n {
        return Err(broken("is not a perfect matching"));
    }
    let weight: u64 = edges.iter().map(|e| e.weight).sum();
    if weight != ewpm.target {
        return Err(broken("misses the target weight"));
    }
    let counts = inst.deadlines().value_counts();
    let mut next_index = Vec::with_capacity(counts.len());
    let mut start = 0;
    for &(_, c) in &counts {
        next_index.push(start);
        start += c;
    }
    let mut used_per_value = vec![0usize; counts.len()];
    let (mut seen_l, mut seen_r) = (vec![false; n], vec![false; n]);
    let mut triplets = Vec::with_capacity(n);
    for e in edges {
        if std::mem::replace(&mut seen_l[e.left], true) || std::mem::replace(&mut seen_r[e.right], true) {
            return Err(broken("reuses a vertex"));
        }
        let v = e.tag.ok_or_else(|| broken("has an untagged edge"))?;
        used_per_value[v] += 1;
        let d_index = next_index[v];
        next_index[v] += 1;
        triplets.push(Triplet {
            d_index: d_index + 1,
            a_index: e.left + 1,
            t_index: e.right + 1,
            d: counts[v].0,
            a: inst.seq().positions()[e.left],
            t: inst.targets()[e.right],
        });
    }
    if used_per_value.iter().zip(&counts).any(|(&u, &(_, c))| u != c) {
        return Err(broken("does not use each deadline value as often as D"));
    }
    triplets.sort_by_key(|t| t.a_index);
    Ok(PMMatching { triplets })
}

/// Cluster-by-cluster randomized solve of a whole instance.
pub fn solve_pm_randomized(inst: &PMInstance, seed: u64, trials: u32) -> Result<Outcome<PMMatching>> {
    let cfg = SolveConfig {
        strategy: Strategy::Randomized,
        seed,
        trials,
        ..SolveConfig::default()
    };
    solve_auto(inst, &cfg)
}
