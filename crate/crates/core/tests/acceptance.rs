//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line even when the run succeeds.

use std::time::{Duration, Instant};

use epool::entailment::ScorerFamily;
use epool::epistemic::{PropertySpace, Semantics};
use epool::logic::AtomTable;
use epool::numeric::{Rational, ScoreValue};
use epool::pooling::{check_principle, pool, PoolingOperator};
use epool::spaces::{
    decode, encode, gamma, registry_names, validate_config, DomainKind, DomainX, Encoding, Rule,
    ScoringFamily, SpaceConfig, Vector,
};
use epool::verifier::{
    candidate, candidate_names, check_max_downward_closure, check_sum_scaling, falsify, margin_sweep,
    verify_entailment, verify_space, verify_weighted, Outcome, Status, TrialPlan,
};
use epool::weighted::{decode_weighted, encode_weighted, WeightedState};

type Check = Result<String, String>;

fn v(s: &str) -> Vector {
    Vector::parse(s).unwrap()
}

fn indexed(name: &str, size: usize) -> SpaceConfig {
    SpaceConfig::named(name, PropertySpace::indexed(size)).unwrap()
}

fn logical(name: &str) -> Option<SpaceConfig> {
    let atoms = AtomTable::new(["a", "b"]).unwrap();
    SpaceConfig::named(name, PropertySpace::logical(atoms).unwrap()).ok()
}

fn require_clean(outcomes: &[Outcome]) -> Result<(u64, u64), String> {
    let mut checks = 0;
    for o in outcomes {
        if !o.passed() {
            return Err(o.to_string());
        }
        checks += o.trials;
    }
    Ok((checks, outcomes.len() as u64))
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_secs {
        Ok(())
    } else {
        Err(format!("took {:.2}s, target < {limit_secs}s", elapsed.as_secs_f64()))
    }
}

fn pooling_suite() -> Check {
    let start = Instant::now();
    let plan = TrialPlan::default().with_trials(100_000);
    let spaces = [
        "avg-strict-nonneg",
        "sum-strict-nonneg",
        "avg-weak-nonneg-step",
        "max-strict-reals",
        "max-weak-reals",
        "max-weak-nonpos",
        "had-strict-reals",
        "had-weak-reals",
        "had-weak-nonneg",
    ];
    let outcomes = spaces
        .iter()
        .map(|s| verify_space(&indexed(s, 3), &plan).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let (checks, n) = require_clean(&outcomes)?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("{n} constructions, {checks} checks, 0 violations"))
}

fn roundtrip() -> Check {
    let start = Instant::now();
    let mut states = 0;
    for name in registry_names() {
        let sizes: Vec<usize> = if *name == "example1" { vec![2] } else { (1..=4).collect() };
        for size in sizes {
            let c = indexed(name, size);
            for mask in 0u64..(1 << size) {
                let s = epool::epistemic::EpistemicState::from_bitset(epool::bitset::BitSet::from_mask(size, mask));
                let back = decode(&c, &encode(&c, &s).unwrap()).unwrap();
                if back != s {
                    return Err(format!("{}: {s} decodes to {back}", c.name));
                }
                states += 1;
            }
            if let Some(k) = c.levels {
                for w in WeightedState::all(size, k) {
                    let back = decode_weighted(&c, k, &encode_weighted(&c, &w).unwrap(), c.semantics).unwrap();
                    if back != w {
                        return Err(format!("{}: levels {w} decode to {back}", c.name));
                    }
                    states += 1;
                }
            }
        }
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("{} spaces, {states} states", registry_names().len()))
}

fn example1() -> Check {
    let c = indexed("example1", 2);
    let (e, f, g) = (v("1/4 0"), v("3/4 1"), v("10 10"));
    let pooled = pool(PoolingOperator::Avg, &e, &f).unwrap();
    if pooled != v("1/2 1/2") {
        return Err(format!("pooled {pooled}"));
    }
    let close = |s: ScoreValue, target: f64| (s.as_f64() - target).abs() < 1e-9;
    let third = 1.0 - 1.0 / 2f64.sqrt();
    let expect = [
        (&e, 0, 0.75),
        (&e, 1, -0.25),
        (&f, 0, -0.25),
        (&f, 1, 0.75),
        (&pooled, 0, third),
        (&pooled, 1, third),
    ];
    for (x, p, target) in expect {
        let s = gamma(&c, p, x).unwrap();
        let sign_ok = s.sign().unwrap() == target.partial_cmp(&0.0).unwrap();
        if !sign_ok || !close(s.clone(), target) {
            return Err(format!("gamma_{p}({x}) = {s}, expected {target}"));
        }
    }
    let members = |x: &Vector| decode(&c, x).unwrap().iter().collect::<Vec<_>>();
    let states = [members(&e), members(&f), members(&pooled), members(&g)];
    if states != [vec![0], vec![1], vec![0, 1], vec![]] {
        return Err(format!("states {states:?}"));
    }
    if check_principle(&c, &e, &f).unwrap().is_some() {
        return Err("(e, f) reported as a violation".into());
    }
    let bad = check_principle(&c, &e, &g).unwrap().ok_or("(e, g) not reported")?;
    if !(bad.property == 0 && bad.expected && !bad.observed && bad.replay(&c).unwrap()) {
        return Err(format!("unexpected witness {bad}"));
    }
    let plan = TrialPlan::default().with_grid(["0", "1/4", "3/4", "1", "10"].iter().map(|s| s.parse().unwrap()).collect());
    let out = verify_space(&c, &plan).map_err(|e| e.to_string())?;
    let w = out.witness.as_ref().ok_or("grid sweep found nothing")?;
    if out.status != Status::FalsifiedWithWitness || !w.replay(&c).unwrap() {
        return Err(out.to_string());
    }
    Ok(format!("signs and values match; (e, g) violates p0 ({bad})"))
}

fn entailment() -> Check {
    let start = Instant::now();
    let plan = TrialPlan::default();
    let mut outcomes = Vec::new();
    let mut linear = 0;
    for name in registry_names() {
        let Some(c) = logical(name) else { continue };
        for fam in ScorerFamily::all() {
            if !epool::entailment::compatible(&c, &fam) {
                continue;
            }
            if fam == ScorerFamily::LinearSum {
                linear += 1;
            }
            outcomes.push(verify_entailment(&c, &fam, &plan).map_err(|e| e.to_string())?);
        }
    }
    if linear != 2 {
        return Err(format!("expected the two linear pairs, found {linear}"));
    }
    let (checks, n) = require_clean(&outcomes)?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("{n} (space, scorer) pairs, {checks} formula checks, 0 disagreements"))
}

fn margins() -> Check {
    let mut outcomes = Vec::new();
    for (space, fams) in [
        ("avg-margin-nonneg(1)", vec![ScorerFamily::MarginRelu, ScorerFamily::SigmoidSum(None)]),
        ("avg-margin-nonneg(1/2)", vec![ScorerFamily::MarginRelu, ScorerFamily::SigmoidSum(None)]),
        (
            "avg-margin-unit(1/8)",
            vec![ScorerFamily::MarginRelu, ScorerFamily::SigmoidSum(None), ScorerFamily::MarginLinear],
        ),
    ] {
        let c = indexed(space, 4);
        for fam in fams {
            outcomes.push(margin_sweep(&c, &fam, 4).map_err(|e| e.to_string())?);
        }
    }
    let (checks, n) = require_clean(&outcomes)?;
    let mut floor = outcomes
        .iter()
        .flat_map(|o| o.notes.iter())
        .filter(|n| n.contains("sigmoid"))
        .cloned()
        .collect::<Vec<_>>();
    floor.dedup();
    Ok(format!("{n} sweeps, {checks} subset checks, 0 disagreements; {}", floor.join(", ")))
}

fn falsification() -> Check {
    let plan = TrialPlan::default();
    for name in candidate_names() {
        let w = falsify(name, &plan).map_err(|e| e.to_string())?.ok_or(format!("{name}: no witness"))?;
        if !candidate(name).unwrap().replay(&w).map_err(|e| e.to_string())? {
            return Err(format!("{name}: witness does not replay: {w}"));
        }
    }
    Ok(format!("{} candidates, every witness replays", candidate_names().len()))
}

fn weighted() -> Check {
    let plan = TrialPlan::default();
    let outcomes = ["weighted-max-reals", "weighted-had-unit"]
        .iter()
        .map(|s| verify_weighted(s, &plan).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let (checks, _) = require_clean(&outcomes)?;
    Ok(format!("{checks} checks under both semantics, 0 violations"))
}

fn lemmas() -> Check {
    let plan = TrialPlan::default();
    let outcomes = [check_max_downward_closure(&plan), check_sum_scaling(&plan)]
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let (checks, _) = require_clean(&outcomes)?;
    Ok(format!("{checks} seeded checks, 0 violations"))
}

fn custom(op: PoolingOperator, sem: Semantics, kind: DomainKind, family: ScoringFamily, p: usize, n: usize, levels: Option<u32>) -> SpaceConfig {
    SpaceConfig {
        name: "fixture".into(),
        operator: op,
        semantics: sem,
        domain: DomainX::new(kind, n),
        family,
        properties: PropertySpace::indexed(p),
        encoding: Encoding::Binary {
            member: Rational::one(),
            non_member: Rational::zero(),
        },
        margin: None,
        levels,
    }
}

fn dimension_guards() -> Check {
    let has = |c: &SpaceConfig, rule: Rule| validate_config(c).iter().any(|v| v.rule == rule);
    let mut fixtures = 0;
    for name in ["avg-strict-nonneg", "sum-strict-nonneg", "max-strict-reals", "had-strict-reals"] {
        let c = indexed(name, 3);
        if !has(&c.clone().with_dimension(2), Rule::Dimension) {
            return Err(format!("{name} accepted n = 2 < |P| = 3"));
        }
        if !validate_config(&c).is_empty() || !validate_config(&c.clone().with_dimension(4)).is_empty() {
            return Err(format!("{name} rejected n >= |P|"));
        }
        fixtures += 3;
    }
    use PoolingOperator::*;
    let weighted = [
        (Avg, DomainKind::Nonneg, ScoringFamily::Coordinate),
        (Sum, DomainKind::Nonneg, ScoringFamily::Coordinate),
        (Had, DomainKind::Reals, ScoringFamily::HadIndicator),
    ];
    for (op, kind, fam) in weighted {
        for k in [2u32, 3] {
            let needed = 2 * k as usize;
            let below = custom(op, Semantics::Strict, kind.clone(), fam, 2, needed - 1, Some(k));
            let equal = custom(op, Semantics::Strict, kind.clone(), fam, 2, needed, Some(k));
            if !has(&below, Rule::WeightedDimension) {
                return Err(format!("weighted {op} K = {k} accepted n = {}", needed - 1));
            }
            if !validate_config(&equal).is_empty() {
                return Err(format!("weighted {op} K = {k} rejected n = |P|K: {:?}", validate_config(&equal)));
            }
            fixtures += 2;
        }
    }
    let max = indexed("weighted-max-reals(3)", 2);
    if !validate_config(&max).is_empty() {
        return Err("weighted max rejected n = |P|".into());
    }
    Ok(format!("{} fixtures", fixtures + 1))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |file: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(file);
        let args = ["epool", "report", "--seed", "0xEP00", "--json", path.to_str().unwrap()];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = epool::cli::run(args, &mut out, &mut err);
        if code != 0 {
            return Err(format!("report exited {code}: {}", String::from_utf8_lossy(&err)));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let (a, b) = (run("a.json")?, run("b.json")?);
    if a != b {
        return Err("the two JSON reports differ".into());
    }
    Ok(format!("{} identical bytes", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("pooling-principle exhaustive suite", pooling_suite),
        ("realizability round trip", roundtrip),
        ("two-disk example", example1),
        ("entailment oracle equivalence", entailment),
        ("margin constructions", margins),
        ("falsification witnesses", falsification),
        ("weighted suite", weighted),
        ("structural lemmas", lemmas),
        ("dimension guards", dimension_guards),
        ("report determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
