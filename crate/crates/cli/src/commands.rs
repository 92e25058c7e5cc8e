use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use kvisits::densitylab::{
    claim_property, density_schedule_2v, divergent_family, one_visit_schedule, pinwheel_no_family,
    sample_low_density, worst_case_family, DensitySchedule, OneVisit,
};
use kvisits::discretize::{clusters, complement_targets, discretized_sequence};
use kvisits::hardness::{
    in3dm_normalize, in3dm_to_pm, nmts_to_srnmts, random_nmts, run_chain, srnmts_to_in3dm,
    NmtsDraw, Reduced,
};
use kvisits::io::{nmts_from_json, schedule_from_json, schedule_to_json, Instance};
use kvisits::model::{
    at_most_sqrt2_minus_half, density, verify_k_visits, verify_one_or_two, verify_two_visits,
    Deadlines, KVisitsInstance, OneOrTwoInstance, Role, Schedule, Threshold,
};
use kvisits::oracle::{
    counterexample_3visits, k_visits_decide, pm_equiv_sweep, role_search, RoleConstraints,
    SearchConstraints,
};
use kvisits::posmatch::{
    solve_auto, solve_one_or_two, solve_two_visits, Outcome, SolveConfig, Strategy,
};
use kvisits::randmatch::MODULUS;

use crate::{emit, Cli, Command, Format, Global, Status, Usage};

/// Sub-stream ids, so that one seed drives independent random sources.
const STREAM_GENERATE: u64 = 1;
const STREAM_DENSITY: u64 = 2;
const STREAM_BENCH: u64 = 3;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?)
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value serializes")
}

fn status_of<W>(o: &Outcome<W>) -> Status {
    match o {
        Outcome::Feasible(_) => Status::Yes,
        Outcome::Infeasible | Outcome::ProbablyInfeasible => Status::No,
        Outcome::Undecided(_) => Status::Undecided,
    }
}

fn short_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn seed_required(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Usage(format!("{what} needs --seed")).into())
}

pub fn run(cli: &Cli) -> Result<Status> {
    let g = &cli.global;
    match &cli.command {
        Command::Solve(a) => solve(g, a),
        Command::Verify(a) => verify(g, a),
        Command::Discretize(a) => discretize(g, a),
        Command::Reduce(a) => reduce(g, a),
        Command::Oracle(c) => oracle(g, c),
        Command::Density(a) => density_cmd(g, a),
        Command::Family(a) => family(g, a),
        Command::Generate(a) => generate(g, a),
        Command::Bench(a) => bench(g, a),
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    #[value(name = "2v")]
    TwoVisits,
    #[value(name = "1or2")]
    OneOrTwo,
    Pm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Auto,
    Simple,
    Brute,
    Randomized,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Problem to solve; inferred from the file when omitted.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, value_enum, default_value_t = Algo::Auto)]
    pub algo: Algo,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write the schedule file here.
    #[arg(long)]
    pub emit_schedule: Option<PathBuf>,
    /// Required with `--algo randomized`; `auto` defaults to 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub trials: u32,
}

fn solve_config(g: &Global, a: &SolveArgs) -> Result<SolveConfig> {
    let seed = match a.algo {
        Algo::Randomized => seed_required(a.seed, "--algo randomized")?,
        _ => a.seed.unwrap_or(0),
    };
    Ok(SolveConfig {
        strategy: match a.algo {
            Algo::Auto => Strategy::Auto,
            Algo::Simple => Strategy::Simple,
            Algo::Brute => Strategy::Brute,
            Algo::Randomized => Strategy::Randomized,
        },
        brute_cap: g.brute_cap,
        p_cap: g.p_cap,
        exact_budget: g.state_cap,
        seed,
        trials: a.trials,
        ..SolveConfig::default()
    })
}

fn solve(g: &Global, a: &SolveArgs) -> Result<Status> {
    let inst = load_instance(&a.input)?;
    let cfg = solve_config(g, a)?;
    let variant = match (a.variant, &inst) {
        (Some(v), _) => v,
        (None, Instance::KVisits(_)) => VariantArg::TwoVisits,
        (None, Instance::OneOrTwo(_)) => VariantArg::OneOrTwo,
        (None, Instance::Pm(_)) => VariantArg::Pm,
    };
    let mut report = json!({
        "algo": format!("{:?}", a.algo).to_lowercase(),
        "seed": cfg.seed,
    });
    if matches!(a.algo, Algo::Auto | Algo::Randomized) {
        report["trials"] = json!(cfg.trials);
        report["field_modulus"] = json!(MODULUS);
    }
    let (status, text) = match (variant, &inst) {
        (VariantArg::Pm, Instance::Pm(pm)) => {
            if a.emit_schedule.is_some() {
                return Err(Usage("--emit-schedule needs a scheduling variant, not pm".into()).into());
            }
            let outcome = solve_auto(pm, &cfg)?;
            if let Outcome::Feasible(m) = &outcome {
                m.validate(pm)?;
            }
            report["variant"] = json!("pm");
            report["outcome"] = serde_json::to_value(&outcome)?;
            (status_of(&outcome), outcome.label().to_string())
        }
        (VariantArg::TwoVisits | VariantArg::OneOrTwo, _) => {
            let (outcome, check): (Outcome<Schedule>, Box<dyn Fn(&Schedule) -> bool>) =
                match (variant, &inst) {
                    (VariantArg::TwoVisits, Instance::KVisits(k)) if k.k == 2 => {
                        let d = k.deadlines.clone();
                        (solve_two_visits(&d, &cfg)?, Box::new(move |s| verify_two_visits(&d, s).is_feasible()))
                    }
                    (VariantArg::TwoVisits, Instance::OneOrTwo(o)) if o.m() == 0 => {
                        let d = o.double.clone();
                        (solve_two_visits(&d, &cfg)?, Box::new(move |s| verify_two_visits(&d, s).is_feasible()))
                    }
                    (VariantArg::OneOrTwo, Instance::OneOrTwo(o)) => {
                        let o = o.clone();
                        (solve_one_or_two(&o, &cfg)?, Box::new(move |s| verify_one_or_two(&o, s).is_feasible()))
                    }
                    (VariantArg::OneOrTwo, Instance::KVisits(k)) if k.k == 2 => {
                        let o = OneOrTwoInstance::new(Deadlines::empty(), k.deadlines.clone());
                        (solve_one_or_two(&o, &cfg)?, Box::new(move |s| verify_one_or_two(&o, s).is_feasible()))
                    }
                    (VariantArg::TwoVisits | VariantArg::OneOrTwo, Instance::KVisits(k)) => {
                        return Err(Usage(format!(
                            "solve handles k = 2 only (file has k = {}); use `oracle decide`",
                            k.k
                        ))
                        .into())
                    }
                    _ => return Err(Usage("instance does not match --variant".into()).into()),
                };
            if let Outcome::Feasible(s) = &outcome {
                if !check(s) {
                    return Err(kvisits::Error::Internal("solver schedule failed re-verification".into()).into());
                }
                if let Some(path) = &a.emit_schedule {
                    std::fs::write(path, schedule_to_json(s))
                        .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?;
                }
            }
            report["variant"] = json!(if variant == VariantArg::TwoVisits { "2v" } else { "1or2" });
            let text = match &outcome {
                Outcome::Feasible(s) => format!("feasible\n{s}"),
                o => o.label().to_string(),
            };
            report["outcome"] = serde_json::to_value(&outcome)?;
            (status_of(&outcome), text)
        }
        (VariantArg::Pm, _) => return Err(Usage("--variant pm needs a pm instance".into()).into()),
    };
    emit(g, &if g.format == Format::Json { pretty(&report) } else { text })?;
    Ok(status)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
}

fn verify(g: &Global, a: &VerifyArgs) -> Result<Status> {
    let inst = load_instance(&a.input)?;
    let sched = schedule_from_json(&read(&a.schedule)?)
        .map_err(|e| Usage(format!("{}: {e}", a.schedule.display())))?;
    let labelled = sched.entries().iter().any(|e| e.role != Role::Plain);
    let verdict = match &inst {
        Instance::KVisits(k) if k.k == 2 && labelled => verify_two_visits(&k.deadlines, &sched),
        Instance::KVisits(k) => verify_k_visits(k, &sched),
        Instance::OneOrTwo(o) => verify_one_or_two(o, &sched),
        Instance::Pm(_) => return Err(Usage("pm instances have matchings, not schedules".into()).into()),
    };
    let text = match verdict.witness() {
        None => "valid".to_string(),
        Some(v) => format!("invalid: {v:?}"),
    };
    emit(g, &if g.format == Format::Json { pretty(&serde_json::to_value(&verdict)?) } else { text })?;
    Ok(if verdict.is_feasible() { Status::Yes } else { Status::No })
}

#[derive(Args, Debug)]
pub struct DiscretizeArgs {
    #[arg(long = "in", conflicts_with = "deadlines")]
    pub input: Option<PathBuf>,
    /// Comma-separated deadlines instead of a file; targets use horizon 2n.
    #[arg(long, value_delimiter = ',')]
    pub deadlines: Option<Vec<u64>>,
}

fn discretize(g: &Global, a: &DiscretizeArgs) -> Result<Status> {
    let (d, horizon, given_targets) = match (&a.input, &a.deadlines) {
        (Some(path), _) => match load_instance(path)? {
            Instance::KVisits(k) => (k.deadlines.clone(), k.horizon() as u64, None),
            Instance::OneOrTwo(o) => (o.double.clone(), o.horizon() as u64, None),
            Instance::Pm(p) => (p.deadlines().clone(), 0, Some(p.targets().to_vec())),
        },
        (None, Some(v)) => {
            let d = Deadlines::new(v.clone()).map_err(|e| Usage(e.to_string()))?;
            let h = 2 * d.len() as u64;
            (d, h, None)
        }
        (None, None) => return Err(Usage("give --in or --deadlines".into()).into()),
    };
    let seq = match discretized_sequence(&d) {
        Ok(s) => s,
        Err(e) => {
            let report = json!({"deadlines": d.values(), "overcrowded": true, "detail": e.to_string()});
            emit(g, &if g.format == Format::Json { pretty(&report) } else { format!("overcrowded: {e}") })?;
            return Ok(Status::No);
        }
    };
    let targets = match given_targets {
        Some(t) => t,
        None => complement_targets(&seq, horizon)?,
    };
    let spans = clusters(&seq);
    let report = json!({
        "deadlines": d.values(),
        "a": seq.positions(),
        "clusters": spans,
        "targets": targets,
    });
    let text = format!(
        "A = {:?}\nclusters = {:?}\nT = {:?}",
        seq.positions(),
        spans.iter().map(|c| (c.start_value, c.end_value)).collect::<Vec<_>>(),
        targets
    );
    emit(g, &if g.format == Format::Json { pretty(&report) } else { text })?;
    Ok(Status::Yes)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chain {
    #[value(name = "nmts:pm")]
    NmtsPm,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long, value_enum, default_value_t = Chain::NmtsPm)]
    pub chain: Chain,
    /// NMTS instance file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Where to write the Position Matching instance.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decide every stage with its own exhaustive oracle.
    #[arg(long)]
    pub verify_with_oracle: bool,
    /// Largest instance the per-stage oracles accept.
    #[arg(long, default_value_t = 16)]
    pub oracle_cap: usize,
}

fn verdict_word(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "trivial-no",
    }
}

fn reduce(g: &Global, a: &ReduceArgs) -> Result<Status> {
    let nmts = nmts_from_json(&read(&a.input)?).map_err(|e| Usage(format!("{}: {e}", a.input.display())))?;
    let mut stages = vec![json!({"stage": "nmts", "size": nmts.n()})];
    let mut pm = None;
    if let Reduced::Instance(sr) = nmts_to_srnmts(&nmts)? {
        stages.push(json!({"stage": "srnmts", "size": sr.n()}));
        if let Reduced::Instance(ind) = srnmts_to_in3dm(&sr) {
            stages.push(json!({"stage": "in3dm", "size": ind.n()}));
            let shifted = in3dm_normalize(&ind);
            stages.push(json!({"stage": "in3dm_shifted", "size": shifted.n()}));
            let p = in3dm_to_pm(&shifted)?;
            stages.push(json!({"stage": "pm", "size": p.n(), "max_multiplicity": p.deadlines().max_multiplicity()}));
            pm = Some(p);
        }
    }
    if let (Some(path), Some(p)) = (&a.out, &pm) {
        std::fs::write(path, Instance::Pm(p.clone()).to_json())
            .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut status = if pm.is_some() { Status::Yes } else { Status::No };
    let mut report = json!({"chain": "nmts:pm", "trivial_no": pm.is_none()});
    if a.verify_with_oracle {
        let r = run_chain(&nmts, a.oracle_cap, g.state_cap)?;
        let verdicts = [Some(r.nmts), r.srnmts, r.in3dm, r.in3dm_shifted, r.pm];
        for (stage, v) in stages.iter_mut().zip(verdicts) {
            stage["verdict"] = json!(verdict_word(v));
        }
        if !r.consistent() {
            return Err(kvisits::Error::Internal(format!("chain verdicts disagree: {r:?}")).into());
        }
        report["consistent"] = json!(true);
        report["pm_prefix_ok"] = json!(r.pm_prefix_ok);
        status = Status::Yes;
    }
    let mut text = String::from("stage          size  verdict\n");
    for s in &stages {
        text.push_str(&format!(
            "{:<14} {:<5} {}\n",
            s["stage"].as_str().unwrap_or(""),
            s["size"].to_string(),
            s.get("verdict").and_then(Value::as_str).unwrap_or("-")
        ));
    }
    report["stages"] = Value::Array(stages);
    emit(g, &if g.format == Format::Json { pretty(&report) } else { text })?;
    Ok(status)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintArg {
    /// Distinct tasks on the discretized-sequence positions.
    DistinctDiscretized,
    /// First visits in nondecreasing deadline order.
    SortedFirstVisits,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Exhaustive feasibility decision with an optional constraint.
    Decide {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        constraint: Vec<ConstraintArg>,
    },
    /// Check the three facts about the fixed 3-Visits instance.
    #[command(name = "counterexample-3v")]
    Counterexample3v,
    /// Compare the k = 2 search with Position Matching on random instances.
    Sweep {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
}

fn oracle(g: &Global, c: &OracleCommand) -> Result<Status> {
    match c {
        OracleCommand::Decide { input, constraint } => {
            let (feasible, report) = match load_instance(input)? {
                Instance::KVisits(k) => {
                    let mut sc = SearchConstraints::none();
                    for c in constraint {
                        match c {
                            ConstraintArg::SortedFirstVisits => sc.sorted_first_visits = true,
                            ConstraintArg::DistinctDiscretized => {
                                let seq = discretized_sequence(&k.deadlines)?;
                                sc.distinct_at = Some(seq.positions().iter().map(|&p| p as usize).collect());
                            }
                        }
                    }
                    let d = k_visits_decide(&k, &sc, g.state_cap)?;
                    (d.feasible, serde_json::to_value(&d)?)
                }
                Instance::OneOrTwo(o) => {
                    if !constraint.is_empty() {
                        return Err(Usage("constraints apply to kvisits instances".into()).into());
                    }
                    let w = role_search(&o, &RoleConstraints::default())?;
                    (w.is_some(), json!({"feasible": w.is_some(), "witness": w}))
                }
                Instance::Pm(_) => return Err(Usage("oracle decide takes scheduling instances".into()).into()),
            };
            let text = if feasible { "feasible" } else { "infeasible" };
            emit(g, &if g.format == Format::Json { pretty(&report) } else { text.into() })?;
            Ok(if feasible { Status::Yes } else { Status::No })
        }
        OracleCommand::Counterexample3v => {
            let r = counterexample_3visits(g.state_cap)?;
            let text = format!(
                "schedule verifies: {}\ndistinct tasks on discretized positions: {}\nfirst visits in deadline order: {}",
                r.schedule_verifies,
                if r.distinct_positions.feasible { "feasible" } else { "infeasible" },
                if r.sorted_first_visits.feasible { "feasible" } else { "infeasible" },
            );
            emit(g, &if g.format == Format::Json { pretty(&serde_json::to_value(&r)?) } else { text })?;
            Ok(Status::Yes)
        }
        OracleCommand::Sweep { count, seed, max_n } => {
            let seed = seed_required(*seed, "oracle sweep")?;
            let r = pm_equiv_sweep(*count, *max_n, seed)?;
            let text = format!("{} instances agree ({} feasible, {} infeasible)", r.instances, r.feasible, r.infeasible);
            emit(g, &if g.format == Format::Json { pretty(&serde_json::to_value(&r)?) } else { text })?;
            Ok(Status::Yes)
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdArg {
    #[value(name = "sqrt2half")]
    Sqrt2Half,
    One,
}

impl From<ThresholdArg> for Threshold {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Sqrt2Half => Threshold::Sqrt2Half,
            ThresholdArg::One => Threshold::One,
        }
    }
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Report on one instance file.
    #[arg(long, conflicts_with = "sweep")]
    pub check: Option<PathBuf>,
    /// Sample low-density instances and write a CSV report.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 40)]
    pub max_n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ThresholdArg::Sqrt2Half)]
    pub threshold: ThresholdArg,
    /// Threads for the sweep; rows come out in sample order either way.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

fn density_report(d: &Deadlines) -> Result<Value> {
    let dens = density(d);
    let mut report = json!({
        "deadlines": d.values(),
        "density": dens.to_string(),
        "density_approx": dens.to_f64(),
        "at_most_sqrt2_minus_half": at_most_sqrt2_minus_half(&dens),
        "at_most_one": Threshold::One.admits(&dens),
    });
    report["one_visit"] = match one_visit_schedule(d) {
        OneVisit::Schedule(s) => json!({"schedule": s}),
        OneVisit::Witness(j) => json!({"overloaded_prefix": j}),
    };
    if d.max().is_some_and(|m| m <= 2 * d.len() as u64) && discretized_sequence(d).is_ok() {
        let claim = claim_property(d)?;
        report["index_check_violations"] = json!(claim.violations());
        if let DensitySchedule::Schedule(s) = density_schedule_2v(d)? {
            report["two_visit_schedule"] = json!(s);
        }
    }
    Ok(report)
}

fn density_cmd(g: &Global, a: &DensityArgs) -> Result<Status> {
    if let Some(path) = &a.check {
        let d = match load_instance(path)? {
            Instance::KVisits(k) => k.deadlines,
            Instance::OneOrTwo(o) if o.m() == 0 => o.double,
            _ => return Err(Usage("density --check takes a kvisits instance".into()).into()),
        };
        let report = density_report(&d)?;
        let text = format!("density {} ≈ {}", report["density"].as_str().unwrap_or(""), report["density_approx"]);
        emit(g, &if g.format == Format::Json { pretty(&report) } else { text })?;
        return Ok(Status::Yes);
    }
    if !a.sweep {
        return Err(Usage("give --check FILE or --sweep".into()).into());
    }
    let seed = seed_required(a.seed, "density --sweep")?;
    if a.workers == 0 {
        return Err(Usage("--workers must be positive".into()).into());
    }
    let threshold = Threshold::from(a.threshold);
    let row = |i: usize| -> Result<(String, usize, String, bool, bool)> {
        let mut rng = rng_for(seed, STREAM_DENSITY << 32 | i as u64);
        let d = sample_low_density(&mut rng, a.max_n, threshold)?;
        let claim_ok = claim_property(&d)?.holds();
        let scheduled_ok = match density_schedule_2v(&d)? {
            DensitySchedule::Schedule(s) => verify_two_visits(&d, &s).is_feasible(),
            DensitySchedule::Violation(_) => false,
        };
        let hash = short_hash(&Instance::KVisits(KVisitsInstance::new(d.clone(), 2)?).to_json());
        Ok((hash, d.len(), density(&d).to_string(), claim_ok, scheduled_ok))
    };
    let mut rows: Vec<Option<Result<_>>> = (0..a.count).map(|_| None).collect();
    std::thread::scope(|s| {
        let chunks: Vec<_> = rows.chunks_mut(a.count.div_ceil(a.workers).max(1)).enumerate().collect();
        let size = a.count.div_ceil(a.workers).max(1);
        for (c, chunk) in chunks {
            let row = &row;
            s.spawn(move || {
                for (j, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(row(c * size + j));
                }
            });
        }
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance_hash", "n", "density", "claim_ok", "scheduled_ok"])?;
    let mut all_ok = true;
    for r in rows {
        let (hash, n, dens, claim_ok, scheduled_ok) = r.expect("every row computed")?;
        all_ok &= claim_ok && scheduled_ok;
        w.write_record([hash, n.to_string(), dens, claim_ok.to_string(), scheduled_ok.to_string()])?;
    }
    emit(g, &String::from_utf8(w.into_inner()?)?)?;
    Ok(if all_ok { Status::Yes } else { Status::No })
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Worstcase,
    Pinwheelno,
    Divergent,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub kind: FamilyKind,
    #[arg(long, default_value_t = 1)]
    pub j: u64,
    #[arg(long, default_value_t = 2)]
    pub dj: u64,
    #[arg(long, default_value_t = 2)]
    pub x: u64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 11)]
    pub n: usize,
}

fn family(g: &Global, a: &FamilyArgs) -> Result<Status> {
    let report = match a.kind {
        FamilyKind::Worstcase => {
            let d = worst_case_family(a.j, a.dj)?;
            let mut r = density_report(&d)?;
            r["k"] = json!(2);
            r
        }
        FamilyKind::Pinwheelno => {
            let inst = pinwheel_no_family(a.x)?;
            let decision = k_visits_decide(&inst, &SearchConstraints::none(), g.state_cap)?;
            let dens = density(&inst.deadlines);
            json!({
                "deadlines": inst.deadlines.values(),
                "k": inst.k,
                "density": dens.to_string(),
                "density_approx": dens.to_f64(),
                "feasible": decision.feasible,
                "nodes": decision.nodes,
            })
        }
        FamilyKind::Divergent => {
            let (inst, sched) = divergent_family(a.k, a.n)?;
            let dens = density(&inst.deadlines);
            json!({
                "deadlines": inst.deadlines.values(),
                "k": inst.k,
                "density": dens.to_string(),
                "density_approx": dens.to_f64(),
                "schedule_verifies": verify_k_visits(&inst, &sched).is_feasible(),
                "schedule": sched,
            })
        }
    };
    let text = format!(
        "{:?} k={} density {}",
        report["deadlines"].as_array().map(|v| v.len()).unwrap_or(0),
        report["k"],
        report["density"].as_str().unwrap_or("")
    );
    emit(g, &if g.format == Format::Json { pretty(&report) } else { text })?;
    Ok(Status::Yes)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerateKind {
    Random,
    LowDensity,
    Worstcase,
    Pinwheelno,
    Divergent,
    Hardchain,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GenerateKind,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub j: u64,
    #[arg(long, default_value_t = 2)]
    pub dj: u64,
    #[arg(long, default_value_t = 2)]
    pub x: u64,
    #[arg(long, default_value_t = 40)]
    pub max_n: usize,
    #[arg(long, value_enum, default_value_t = ThresholdArg::Sqrt2Half)]
    pub threshold: ThresholdArg,
    /// Largest NMTS value for `hardchain`.
    #[arg(long, default_value_t = 9)]
    pub max_value: u64,
}

fn kvisits_file(d: Deadlines, k: u32) -> Result<String> {
    Ok(Instance::KVisits(KVisitsInstance::new(d, k)?).to_json())
}

fn generate(g: &Global, a: &GenerateArgs) -> Result<Status> {
    let text = match a.kind {
        GenerateKind::Random => {
            let mut rng = rng_for(seed_required(a.seed, "generate random")?, STREAM_GENERATE);
            if a.n == 0 || a.k == 0 {
                return Err(Usage("--n and --k must be positive".into()).into());
            }
            let top = a.k as u64 * a.n as u64;
            let d: Vec<u64> = (0..a.n).map(|_| rng.gen_range(1..=top)).collect();
            kvisits_file(Deadlines::new(d)?, a.k)?
        }
        GenerateKind::LowDensity => {
            let mut rng = rng_for(seed_required(a.seed, "generate low-density")?, STREAM_GENERATE);
            kvisits_file(sample_low_density(&mut rng, a.max_n, a.threshold.into())?, 2)?
        }
        GenerateKind::Worstcase => kvisits_file(worst_case_family(a.j, a.dj)?, 2)?,
        GenerateKind::Pinwheelno => Instance::KVisits(pinwheel_no_family(a.x)?).to_json(),
        GenerateKind::Divergent => Instance::KVisits(divergent_family(a.k, a.n)?.0).to_json(),
        GenerateKind::Hardchain => {
            let mut rng = rng_for(seed_required(a.seed, "generate hardchain")?, STREAM_GENERATE);
            serde_json::to_string(&random_nmts(&mut rng, a.n, a.max_value, NmtsDraw::Balanced)?)?
        }
    };
    emit(g, &text)?;
    Ok(Status::Yes)
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn bench(g: &Global, a: &BenchArgs) -> Result<Status> {
    let seed = seed_required(a.seed, "bench")?;
    if a.max_n == 0 {
        return Err(Usage("--max-n must be positive".into()).into());
    }
    let mut rng = rng_for(seed, STREAM_BENCH);
    let strategies = [Strategy::Auto, Strategy::Brute, Strategy::Randomized];
    let mut totals = [0f64; 3];
    let mut verdicts = [[0usize; 3]; 3];
    let mut sizes = BTreeSet::new();
    for _ in 0..a.count {
        let n = rng.gen_range(1..=a.max_n);
        let d = Deadlines::new((0..n).map(|_| rng.gen_range(1..=2 * n as u64)).collect::<Vec<_>>())?;
        sizes.insert(n);
        for (i, &strategy) in strategies.iter().enumerate() {
            let cfg = SolveConfig {
                strategy,
                brute_cap: g.brute_cap,
                p_cap: g.p_cap,
                exact_budget: g.state_cap,
                seed,
                ..SolveConfig::default()
            };
            let start = Instant::now();
            let o = solve_two_visits(&d, &cfg)?;
            totals[i] += start.elapsed().as_secs_f64() * 1e3;
            verdicts[i][match status_of(&o) {
                Status::Yes => 0,
                Status::No => 1,
                Status::Undecided => 2,
            }] += 1;
        }
    }
    let rows: Vec<Value> = strategies
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "algo": format!("{s:?}").to_lowercase(),
                "total_ms": totals[i],
                "feasible": verdicts[i][0],
                "infeasible": verdicts[i][1],
                "undecided": verdicts[i][2],
            })
        })
        .collect();
    let report = json!({"instances": a.count, "sizes": sizes, "seed": seed, "results": rows});
    let text = rows
        .iter()
        .map(|r| format!("{:<11} {:>10.2} ms", r["algo"].as_str().unwrap_or(""), r["total_ms"].as_f64().unwrap_or(0.0)))
        .collect::<Vec<_>>()
        .join("\n");
    emit(g, &if g.format == Format::Json { pretty(&report) } else { text })?;
    Ok(Status::Yes)
}
