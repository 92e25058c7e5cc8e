//! The ten release criteria, each reported on its own PASS/FAIL line.
//!
//! Runs without the libtest harness so the report is always printed, and
//! exits nonzero if any criterion fails. Seeds and tolerances are fixed below.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kvisits::densitylab::{
    claim_property, cyclic_extract, density_schedule_2v, divergent_family, gap_infimum_scan,
    infimum_line, pinwheel_no_family, sample_low_density, verify_pinwheel_window,
    worst_case_density, worst_case_family, DensitySchedule,
};
use kvisits::discretize::discretized_sequence;
use kvisits::hardness::{random_nmts, run_chain, NmtsDraw};
use kvisits::model::{density, normalize, verify_two_visits, Deadlines, KVisitsInstance, OneOrTwoInstance, Threshold, SQRT2_MINUS_HALF};
use kvisits::oracle::{
    counterexample_3visits, k_visits_decide, role_search, two_visits_search, RoleConstraints,
    SearchConstraints, DEFAULT_NODE_CAP,
};
use kvisits::posmatch::{
    one_or_two_to_pm, random_pm, solve_brute_force, split_by_clusters, OneOrTwoReduction, Outcome,
};
use kvisits::randmatch::{ewpm_brute_force, multigraph_to_simple, solve_pm_randomized, Edge, EWPMInstance, WeightedBipartiteMultigraph};

const SEED: u64 = 20_240_601;
/// Evaluation tolerance for the gap-function scan; the comparison itself is strict.
const SCAN_EVAL_TOL: f64 = 1e-9;
const LINE_TOL: f64 = 1e-3;

fn dl(v: &[u64]) -> Deadlines {
    Deadlines::new(v.to_vec()).unwrap()
}

fn c1_discretized_fixtures() -> String {
    let start = Instant::now();
    let a = discretized_sequence(&dl(&[3, 5, 5, 7, 7, 7, 15, 15, 16])).unwrap();
    assert_eq!(a.positions(), [2, 3, 4, 5, 6, 7, 14, 15, 16]);
    let b = discretized_sequence(&dl(&[2, 4, 5, 8, 8, 10, 11, 11, 12, 12, 13, 13, 14, 14])).unwrap();
    assert_eq!(b.positions(), (1..=14).collect::<Vec<u64>>());
    let took = start.elapsed();
    assert!(took < Duration::from_millis(1), "took {took:?}");
    format!("{took:?}")
}

fn c2_counterexample() -> String {
    let start = Instant::now();
    let r = counterexample_3visits(DEFAULT_NODE_CAP).unwrap();
    assert!(r.schedule_verifies);
    assert!(!r.distinct_positions.feasible);
    assert!(!r.sorted_first_visits.feasible);
    let took = start.elapsed();
    assert!(took < Duration::from_secs(60));
    format!(
        "{took:?}, nodes {} and {}",
        r.distinct_positions.nodes, r.sorted_first_visits.nodes
    )
}

fn c3_density_sweep() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_n = 0;
    for _ in 0..10_000 {
        let d = sample_low_density(&mut rng, 40, Threshold::Sqrt2Half).unwrap();
        assert!(Threshold::Sqrt2Half.admits(&density(&d)));
        max_n = max_n.max(d.len());
        let report = claim_property(&d).unwrap();
        assert!(report.holds(), "{d}: index check fails at {:?}", report.first_violation);
        match density_schedule_2v(&d).unwrap() {
            DensitySchedule::Schedule(s) => assert!(verify_two_visits(&d, &s).is_feasible()),
            DensitySchedule::Violation(_) => panic!("{d}: no schedule"),
        }
    }
    let took = start.elapsed();
    assert!(took < Duration::from_secs(30), "took {took:?}");
    format!("10000 instances up to n = {max_n}, {took:?}")
}

fn c4_worst_case_family() -> String {
    let mut cases = 0;
    for j in 1..=5u64 {
        for dj in 2 * j - 1..=15 {
            let d = worst_case_family(j, dj).unwrap();
            let expected = BigRational::new(BigInt::from(j), BigInt::from(dj))
                + BigRational::new(BigInt::from(dj), BigInt::from(dj + 2 * j - 1));
            assert_eq!(density(&d), expected);
            assert_eq!(worst_case_density(j, dj), expected);
            assert_eq!(claim_property(&d).unwrap().violations(), [j as usize], "j = {j}, dj = {dj}");
            cases += 1;
        }
    }
    format!("{cases} (j, dj) pairs")
}

fn c5_gap_scan() -> String {
    let scan = gap_infimum_scan(1e4, 1.0).unwrap();
    assert_eq!(scan.at_or_below, 0);
    assert!(scan.min_value - SCAN_EVAL_TOL > SQRT2_MINUS_HALF, "min {}", scan.min_value);
    let x = 1e4;
    let on_line = scan.line_value;
    assert!((on_line - SQRT2_MINUS_HALF).abs() < LINE_TOL, "{on_line} at y = {}", infimum_line(x));
    format!(
        "{} points, min {:.12} at {:?}, line {:.9}",
        scan.points, scan.min_value, scan.argmin, on_line
    )
}

fn c6_threshold_families() -> String {
    for x in [2, 3] {
        let inst = pinwheel_no_family(x).unwrap();
        let d = k_visits_decide(&inst, &SearchConstraints::none(), DEFAULT_NODE_CAP).unwrap();
        assert!(!d.feasible, "{} k = {}", inst.deadlines, inst.k);
    }
    let three = BigRational::from_integer(BigInt::from(3));
    let mut above = None;
    for k in 1..=3u32 {
        for n in 1..=50 {
            let (inst, _) = divergent_family(k, n).unwrap();
            if above.is_none() && density(&inst.deadlines) > three {
                above = Some((k, n));
            }
        }
    }
    let (k, n) = above.expect("no divergent instance above density 3");
    format!("density first exceeds 3 at k = {k}, n = {n}")
}

fn c7_hardness_chain() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let draws = [NmtsDraw::Planted, NmtsDraw::Balanced, NmtsDraw::Uniform];
    let (mut yes, mut no) = (0, 0);
    for i in 0..200 {
        let n = rng.gen_range(1..=4);
        let inst = random_nmts(&mut rng, n, 9, draws[i % 3]).unwrap();
        let r = run_chain(&inst, 16, 5_000_000).unwrap();
        assert!(r.consistent(), "{inst:?}: {r:?}");
        if r.pm.is_some() {
            assert_eq!(r.pm_prefix_ok, Some(true));
            assert!(r.pm_max_multiplicity.unwrap() <= 2);
        }
        if r.nmts {
            yes += 1;
        } else {
            no += 1;
        }
    }
    let took = start.elapsed();
    assert!(took < Duration::from_secs(60));
    format!("{yes} yes, {no} no, {took:?}")
}

fn random_multigraph(rng: &mut ChaCha8Rng) -> EWPMInstance {
    let l = rng.gen_range(1..=4);
    let edge_count = rng.gen_range(l..=2 * l + 2);
    let edges = (0..edge_count)
        .map(|_| Edge {
            left: rng.gen_range(0..l),
            right: rng.gen_range(0..l),
            weight: rng.gen_range(0..5),
            tag: None,
        })
        .collect();
    EWPMInstance {
        graph: WeightedBipartiteMultigraph::new(l, l, edges).unwrap(),
        target: 0,
    }
}

fn c8_randomized_pipeline() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut yes, mut probably_no, mut certified_no) = (0, 0, 0);
    for i in 0..300u64 {
        let n = rng.gen_range(1..=7);
        let inst = random_pm(&mut rng, n, 3).unwrap();
        assert!(inst.deadlines().distinct_count() <= 3);
        let truth = solve_brute_force(&inst, 10).unwrap();
        match (truth, solve_pm_randomized(&inst, SEED + i, 5).unwrap()) {
            (Some(_), Outcome::Feasible(m)) => {
                m.validate(&inst).unwrap();
                yes += 1;
            }
            (None, Outcome::ProbablyInfeasible) => probably_no += 1,
            (None, Outcome::Infeasible) => certified_no += 1,
            (t, o) => panic!("{inst:?}: brute force {t:?}, randomized {o:?}"),
        }
    }
    for _ in 0..100 {
        let g = random_multigraph(&mut rng);
        let simple = multigraph_to_simple(&g);
        assert_eq!(ewpm_brute_force(&g, 4).unwrap(), ewpm_brute_force(&simple, 64).unwrap());
    }
    let took = start.elapsed();
    assert!(took < Duration::from_secs(60));
    format!("{yes} yes, {probably_no} probably-no, {certified_no} certified no, 100 gadgets, {took:?}")
}

fn c9_structural_sweeps() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // Primary positions: every 2-Visits instance with n ≤ 4 and d ≤ 2n, plus random n = 5.
    let mut primary_cases = 0;
    let mut check_primary = |d: &Deadlines| {
        let kept = normalize(d, 2);
        if kept.len() != d.len() {
            return;
        }
        let free = two_visits_search(d, None).unwrap();
        let Ok(seq) = discretized_sequence(d) else {
            assert!(free.is_none());
            return;
        };
        let a: BTreeSet<u64> = seq.positions().iter().copied().collect();
        let forced = two_visits_search(d, Some(a)).unwrap();
        assert_eq!(free.is_some(), forced.is_some(), "{d}");
        primary_cases += 1;
    };
    for n in 1..=4u64 {
        let mut v = vec![1u64; n as usize];
        loop {
            check_primary(&dl(&v));
            let Some(i) = (0..v.len()).rev().find(|&i| v[i] < 2 * n) else { break };
            let next = v[i] + 1;
            for x in &mut v[i..] {
                *x = next;
            }
        }
    }
    for _ in 0..200 {
        let d: Vec<u64> = (0..5).map(|_| rng.gen_range(1..=10)).collect();
        check_primary(&dl(&d));
    }

    // Disconnection: singles at their canonical places lose nothing.
    let mut single_cases = 0;
    for _ in 0..600 {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=5 - m);
        let h = (m + 2 * n) as u64;
        let single = dl(&(0..m).map(|_| rng.gen_range(1..=h)).collect::<Vec<_>>());
        let double = dl(&(0..n).map(|_| rng.gen_range(1..=h)).collect::<Vec<_>>());
        let inst = OneOrTwoInstance::new(single, double);
        if !inst.is_normalized() {
            continue;
        }
        let free = role_search(&inst, &RoleConstraints::default()).unwrap();
        let pinned = match (discretized_sequence(&inst.double), one_or_two_to_pm(&inst)) {
            (Ok(_), Ok(OneOrTwoReduction::Reduced { placement, .. })) => {
                let rc = RoleConstraints {
                    primaries_at: None,
                    singles_at: Some(placement.assignments),
                };
                role_search(&inst, &rc).unwrap()
            }
            _ => None,
        };
        assert_eq!(free.is_some(), pinned.is_some(), "{inst:?}");
        single_cases += 1;
    }

    // Cluster self-reduction on random PM instances.
    let mut cluster_cases = 0;
    for _ in 0..400 {
        let n = rng.gen_range(1..=8);
        let inst = random_pm(&mut rng, n, n).unwrap();
        let whole = solve_brute_force(&inst, 8).unwrap().is_some();
        let parts = split_by_clusters(&inst)
            .unwrap()
            .iter()
            .all(|c| solve_brute_force(c, 8).unwrap().is_some());
        assert_eq!(whole, parts, "{inst:?}");
        cluster_cases += 1;
    }
    format!("{primary_cases} primary, {single_cases} disconnection, {cluster_cases} cluster cases")
}

fn c10_cyclic_extraction() -> String {
    let mut all = Vec::new();
    fn multisets(from: u64, prod: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        // Two 1s already make an instance infeasible; more would never end.
        if cur.len() >= 6 {
            return;
        }
        for d in from..=30 {
            if prod * d > 30 {
                break;
            }
            cur.push(d);
            multisets(d, prod * d, cur, out);
            cur.pop();
        }
    }
    multisets(1, 1, &mut Vec::new(), &mut all);
    let (mut windows, mut infeasible) = (0, 0);
    for v in all {
        let d = dl(&v);
        let k = u32::try_from(d.product_saturating() + 1).unwrap();
        let inst = KVisitsInstance::new(d.clone(), k).unwrap();
        let decision = k_visits_decide(&inst, &SearchConstraints::none(), DEFAULT_NODE_CAP).unwrap();
        let Some(sched) = decision.witness else {
            infeasible += 1;
            continue;
        };
        let w = cyclic_extract(&inst, &sched).unwrap().expect("precondition holds for k = ∏ d_i + 1");
        assert!(verify_pinwheel_window(&d, &w.window).is_feasible(), "{d}");
        windows += 1;
    }
    format!("{windows} windows verified, {infeasible} infeasible instances")
}

fn main() {
    let criteria: [(&str, fn() -> String); 10] = [
        ("1 discretized-sequence fixtures", c1_discretized_fixtures),
        ("2 3-Visits counterexample", c2_counterexample),
        ("3 low-density sweep", c3_density_sweep),
        ("4 worst-case family", c4_worst_case_family),
        ("5 gap-function scan", c5_gap_scan),
        ("6 threshold families", c6_threshold_families),
        ("7 hardness chain", c7_hardness_chain),
        ("8 randomized pipeline", c8_randomized_pipeline),
        ("9 structural sweeps", c9_structural_sweeps),
        ("10 cyclic extraction", c10_cyclic_extraction),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL criterion {name}: {msg}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
