use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{
    grid_points, random_point, random_search, stream_rng, Outcome, Status, TrialPlan, VerifyError,
    Witness, WitnessDetail,
};
use crate::bitset::{all_subsets, BitSet};
use crate::entailment::{compatible, gamma_q, psi, EntailmentError, ScorerFamily};
use crate::epistemic::{state_entails, EpistemicError, EpistemicState, PropertySpace, Semantics};
use crate::logic::{all_nonempty_clauses, pretty_print, random_formula, Formula};
use crate::numeric::Rational;
use crate::pooling::{check_principle, check_weighted_principle, pool, pool_in};
use crate::spaces::{
    decode_unchecked, encode, gamma, parse_space_name, satisfied, validate_config, DomainKind, Rule,
    SpaceConfig, Vector,
};
use crate::weighted::{decode_weighted, encode_weighted, WeightedState};

/// Checks the pooling principle on every grid pair inside `X` and on
/// `plan.trials` random pairs, plus the encode/decode round trip when
/// `|P| ≤ 4`. Weighted spaces are checked level by level.
pub fn verify_space(c: &SpaceConfig, plan: &TrialPlan) -> Result<Outcome, VerifyError> {
    plan.check()?;
    let start = Instant::now();
    let mut out = Outcome::new(format!("{} [{}]", c.name, c.semantics));
    let issues = validate_config(c);
    if !issues.is_empty() {
        let msgs: Vec<String> = issues.iter().map(|v| v.message.clone()).collect();
        out.notes.push(format!("configuration fails validation: {}", msgs.join("; ")));
    }
    match c.levels {
        None => principle_sweep(c, plan, &mut out)?,
        Some(k) => weighted_sweep(c, k, plan, &mut out)?,
    }
    roundtrip(c, &mut out)?;
    out.elapsed = start.elapsed();
    Ok(out)
}

fn pooling_witness(c: &SpaceConfig, v: crate::pooling::Violation) -> Witness {
    Witness {
        candidate: c.name.clone(),
        detail: WitnessDetail::Pooling(v),
    }
}

fn stream(kind: &str, c: &SpaceConfig) -> String {
    format!("{kind}/{}/{}/{}", c.name, c.semantics, c.properties.size())
}

/// Runs `row(i)` for every grid row in parallel and merges in row order.
fn merge_rows<F>(rows: usize, out: &mut Outcome, row: F) -> Result<(), VerifyError>
where
    F: Fn(usize) -> Result<(u64, u64, Option<Witness>), VerifyError> + Sync + Send,
{
    let results: Vec<_> = (0..rows).into_par_iter().map(row).collect();
    for r in results {
        let (checks, bad, w) = r?;
        out.record(checks, bad, w);
    }
    Ok(())
}

fn grid_allowed(c: &SpaceConfig, plan: &TrialPlan, out: &mut Outcome) -> bool {
    if c.n() > plan.max_dim {
        out.notes.push(format!(
            "grid sweep skipped: n = {} exceeds the plan's maximum dimension {}",
            c.n(),
            plan.max_dim
        ));
        return false;
    }
    true
}

fn principle_sweep(c: &SpaceConfig, plan: &TrialPlan, out: &mut Outcome) -> Result<(), VerifyError> {
    if grid_allowed(c, plan, out) {
        let points = grid_points(c, &plan.grid);
        let states = points
            .iter()
            .map(|v| decode_unchecked(c, v).map(|s| s.members().clone()))
            .collect::<Result<Vec<BitSet>, _>>()?;
        merge_rows(points.len(), out, |i| {
            let mut bad = 0;
            let mut first = None;
            for j in 0..points.len() {
                let pooled = pool(c.operator, &points[i], &points[j])?;
                c.check(&pooled)?;
                let got = decode_unchecked(c, &pooled)?;
                if *got.members() != states[i].union(&states[j]) {
                    bad += 1;
                    if first.is_none() {
                        first = check_principle(c, &points[i], &points[j])?.map(|v| pooling_witness(c, v));
                    }
                }
            }
            Ok((points.len() as u64, bad, first))
        })?;
    }
    let (bad, first) = random_search(plan.seed, &stream("principle", c), plan.trials, |rng| {
        let (e, f) = (random_point(rng, c), random_point(rng, c));
        Ok(check_principle(c, &e, &f)?.map(|v| pooling_witness(c, v)))
    })?;
    out.record(plan.trials, bad, first);
    Ok(())
}

fn weighted_sweep(c: &SpaceConfig, k: u32, plan: &TrialPlan, out: &mut Outcome) -> Result<(), VerifyError> {
    let levels = |v: &Vector| decode_weighted(c, k, v, c.semantics);
    let check_pair = |e: &Vector, f: &Vector, le: &WeightedState, lf: &WeightedState| {
        let pooled = pool_in(c, e, f)?;
        if levels(&pooled)? == le.combine(lf) {
            return Ok::<_, VerifyError>(None);
        }
        Ok(check_weighted_principle(c, k, e, f)?.map(|v| pooling_witness(c, v)))
    };
    if grid_allowed(c, plan, out) {
        let points = grid_points(c, &plan.grid);
        let decoded = points.iter().map(levels).collect::<Result<Vec<_>, _>>()?;
        merge_rows(points.len(), out, |i| {
            let mut bad = 0;
            let mut first = None;
            for j in 0..points.len() {
                if let Some(w) = check_pair(&points[i], &points[j], &decoded[i], &decoded[j])? {
                    bad += 1;
                    first.get_or_insert(w);
                }
            }
            Ok((points.len() as u64, bad, first))
        })?;
    }
    if c.properties.size() <= 3 {
        let encoded = WeightedState::all(c.properties.size(), k)
            .map(|s| encode_weighted(c, &s).map(|v| (s, v)))
            .collect::<Result<Vec<_>, _>>()?;
        merge_rows(encoded.len(), out, |i| {
            let mut bad = 0;
            let mut first = None;
            for j in 0..encoded.len() {
                let (se, e) = &encoded[i];
                let (sf, f) = &encoded[j];
                if let Some(w) = check_pair(e, f, se, sf)? {
                    bad += 1;
                    first.get_or_insert(w);
                }
            }
            Ok((encoded.len() as u64, bad, first))
        })?;
    }
    let (bad, first) = random_search(plan.seed, &stream("weighted", c), plan.trials, |rng| {
        let (e, f) = (random_point(rng, c), random_point(rng, c));
        Ok(check_weighted_principle(c, k, &e, &f)?.map(|v| pooling_witness(c, v)))
    })?;
    out.record(plan.trials, bad, first);
    Ok(())
}

fn roundtrip(c: &SpaceConfig, out: &mut Outcome) -> Result<(), VerifyError> {
    let size = c.properties.size();
    if size > 4 {
        out.notes.push(format!("round trip skipped: |P| = {size} exceeds 4"));
        return Ok(());
    }
    let mut checks = 0;
    let mut bad = 0;
    let mut first = None;
    let mut fail = |state: Vec<usize>, vector: Vector, decoded: Vec<usize>| {
        bad += 1;
        first.get_or_insert(Witness {
            candidate: c.name.clone(),
            detail: WitnessDetail::Roundtrip { state, vector, decoded },
        });
    };
    for members in all_subsets(size) {
        checks += 1;
        let s = EpistemicState::from_bitset(members);
        let v = encode(c, &s)?;
        let back = decode_unchecked(c, &v)?;
        if back != s {
            fail(s.iter().collect(), v, back.iter().collect());
        }
    }
    if let Some(k) = c.levels {
        for s in WeightedState::all(size, k) {
            checks += 1;
            let v = encode_weighted(c, &s)?;
            let back = decode_weighted(c, k, &v, c.semantics)?;
            if back != s {
                let as_usize = |w: &WeightedState| w.levels().iter().map(|&l| l as usize).collect();
                fail(as_usize(&s), v, as_usize(&back));
            }
        }
    }
    out.record(checks, bad, first);
    Ok(())
}

/// Runs [`verify_space`] over every size and level count the weighted suite
/// covers: `|P| ≤ 3`, `K ≤ 3` for the max construction and `K = 2` on the
/// `{0, 1/4, 1/2, 3/4, 1}` grid for the unit-interval Hadamard one, under
/// both semantics.
pub fn verify_weighted(base: &str, plan: &TrialPlan) -> Result<Outcome, VerifyError> {
    let start = Instant::now();
    let base = parse_space_name(base)?.base;
    let (levels, plan) = match base.as_str() {
        "weighted-max-reals" => (vec![1, 2, 3], plan.clone()),
        "weighted-had-unit" => {
            let grid = ["0", "1/4", "1/2", "3/4", "1"]
                .iter()
                .map(|s| s.parse().expect("valid literal"))
                .collect();
            (vec![2], plan.clone().with_grid(grid))
        }
        other => {
            return Err(VerifyError::Plan(format!("`{other}` is not a weighted space")));
        }
    };
    let mut total = Outcome::new(format!("{base} [strict, weak]"));
    for size in 1..=plan.max_dim.min(3) {
        for &k in &levels {
            for sem in [Semantics::Strict, Semantics::Weak] {
                let c = SpaceConfig::named(&format!("{base}({k})"), PropertySpace::indexed(size))?
                    .with_semantics(sem);
                total.absorb(verify_space(&c, &plan)?);
            }
        }
    }
    total.elapsed = start.elapsed();
    Ok(total)
}

/// Oracle sweep over every state of a logical space: each encoded state
/// (and, for non-margin scorers, each pooled pair of encoded states) against
/// the clauses, `⊤`, `⊥` and `plan.formulas` seeded random formulas. Margin
/// scorers additionally run [`margin_sweep`].
pub fn verify_entailment(
    c: &SpaceConfig,
    fam: &ScorerFamily,
    plan: &TrialPlan,
) -> Result<Outcome, VerifyError> {
    let start = Instant::now();
    if !compatible(c, fam) {
        return Err(EntailmentError::Incompatible {
            space: c.name.clone(),
            scorer: fam.to_string(),
        }
        .into());
    }
    let atoms = c.properties.atoms().ok_or(EpistemicError::NotLogical)?;
    if atoms.len() > 3 {
        return Err(VerifyError::Plan(format!(
            "entailment sweeps enumerate every state and support at most 3 atoms, got {}",
            atoms.len()
        )));
    }
    let m = atoms.len();
    let mut formulas: Vec<Formula> = all_nonempty_clauses(m).iter().map(|cl| cl.to_formula()).collect();
    formulas.push(Formula::Top);
    formulas.push(Formula::Bottom);
    let mut rng = stream_rng(plan.seed, "formulas", m);
    formulas.extend((0..plan.formulas).map(|_| random_formula(&mut rng, m, 3)));

    let size = c.properties.size();
    let mut cases: Vec<(EpistemicState, Vector)> = Vec::new();
    let states: Vec<EpistemicState> = all_subsets(size).map(EpistemicState::from_bitset).collect();
    let encoded = states
        .iter()
        .map(|s| encode(c, s))
        .collect::<Result<Vec<_>, _>>()?;
    cases.extend(states.iter().cloned().zip(encoded.iter().cloned()));
    if !fam.is_margin() {
        for (i, s) in states.iter().enumerate() {
            for (j, t) in states.iter().enumerate() {
                let union = EpistemicState::from_bitset(s.members().union(t.members()));
                cases.push((union, pool_in(c, &encoded[i], &encoded[j])?));
            }
        }
    }

    let mut out = Outcome::new(format!("{} [{}] with {}", c.name, c.semantics, fam.name()));
    merge_rows(cases.len(), &mut out, |i| {
        let (s, v) = &cases[i];
        let mut bad = 0;
        let mut first = None;
        for f in &formulas {
            let expected = state_entails(&c.properties, s, f)?;
            let observed = psi(c, fam, f, v)?;
            if expected != observed {
                bad += 1;
                first.get_or_insert_with(|| Witness {
                    candidate: c.name.clone(),
                    detail: WitnessDetail::Entailment {
                        scorer: fam.name().to_string(),
                        state: s.iter().collect(),
                        formula: pretty_print(f, atoms),
                        vector: v.clone(),
                        expected,
                        observed,
                    },
                });
            }
        }
        Ok((formulas.len() as u64, bad, first))
    })?;
    if fam.is_margin() {
        out.absorb(margin_sweep(c, fam, 4)?);
    }
    out.elapsed = start.elapsed();
    Ok(out)
}

/// Smallest certified sign margin a sigmoid scorer must keep on the
/// clear-cut grids.
pub const SIGMOID_MARGIN_FLOOR: f64 = 1e-6;

/// Conjunction check on the clear-cut grids `{0, Δ, 2Δ}ⁿ` (non-negative
/// domain) or `{0, Δ, 1}ⁿ` (unit interval, `Δ = 1 − ε`) for `n ≤ max_n` and
/// every `Q ⊆ P`.
pub fn margin_sweep(c: &SpaceConfig, fam: &ScorerFamily, max_n: usize) -> Result<Outcome, VerifyError> {
    let start = Instant::now();
    let delta = c
        .margin
        .clone()
        .ok_or_else(|| VerifyError::Plan(format!("`{}` has no margin", c.name)))?;
    let values = match c.domain.kind {
        DomainKind::UnitInterval => vec![Rational::zero(), delta.clone(), Rational::one()],
        _ => vec![Rational::zero(), delta.clone(), &delta + &delta],
    };
    let mut out = Outcome::new(format!("{} clear-cut grid with {}", c.name, fam.name()));
    let mut min_margin = f64::INFINITY;
    for n in 1..=max_n {
        let cn = SpaceConfig::named(&c.name, PropertySpace::indexed(n))?;
        if validate_config(&cn).iter().any(|v| v.rule == Rule::Margin) {
            out.notes.push(format!("n = {n} skipped: margin parameters out of range"));
            continue;
        }
        let points = grid_points(&cn, &values);
        let mut checks = 0;
        let mut bad = 0;
        let mut first = None;
        for v in &points {
            let scores = (0..n).map(|i| gamma(&cn, i, v)).collect::<Result<Vec<_>, _>>()?;
            for q in all_subsets(n) {
                checks += 1;
                let mut expected = true;
                for i in q.iter() {
                    expected &= satisfied(Semantics::Strict, &scores[i])?;
                }
                let score = gamma_q(&cn, fam, &q, v)?;
                let observed = satisfied(Semantics::Strict, &score)?;
                let thin = matches!(fam, ScorerFamily::SigmoidSum(_)) && {
                    let m = score.certified_margin();
                    min_margin = min_margin.min(m);
                    m < SIGMOID_MARGIN_FLOOR
                };
                if expected != observed || thin {
                    bad += 1;
                    first.get_or_insert_with(|| Witness {
                        candidate: cn.name.clone(),
                        detail: WitnessDetail::Conjunction {
                            scorer: fam.name().to_string(),
                            subset: q.iter().collect(),
                            vector: v.clone(),
                            expected,
                            observed,
                            semantics: Semantics::Strict,
                        },
                    });
                }
            }
        }
        out.record(checks, bad, first);
    }
    if min_margin.is_finite() {
        out.notes.push(format!("smallest certified sigmoid margin {min_margin:.6}"));
    }
    out.elapsed = start.elapsed();
    Ok(out)
}

fn random_le<R: Rng + ?Sized>(rng: &mut R, c: &SpaceConfig) -> (Vector, Vector) {
    let u = random_point(rng, c);
    let v = Vector(
        u.0.iter()
            .map(|x| {
                let bump = Rational::new(rng.gen_range(0..=8), rng.gen_range(1..=4));
                x + &bump
            })
            .collect(),
    );
    (u, v)
}

/// `u ≤ v` pointwise implies `Γ(u) ⊆ Γ(v)` in the max spaces, on
/// `plan.trials` seeded pairs per space.
pub fn check_max_downward_closure(plan: &TrialPlan) -> Result<Outcome, VerifyError> {
    let start = Instant::now();
    let mut out = Outcome::new("max downward closure");
    for name in ["max-strict-reals", "max-weak-reals"] {
        let c = SpaceConfig::named(name, PropertySpace::indexed(plan.max_dim))?;
        let (bad, first) = random_search(plan.seed, &stream("downward", &c), plan.trials, |rng| {
            let (u, v) = random_le(rng, &c);
            let (su, sv) = (decode_unchecked(&c, &u)?, decode_unchecked(&c, &v)?);
            let lost = su.iter().find(|&i| !sv.contains(i));
            Ok(lost.map(|property| Witness {
                candidate: c.name.clone(),
                detail: WitnessDetail::Lemma {
                    lemma: "downward-closure".into(),
                    left: u.clone(),
                    right: v.clone(),
                    property,
                },
            }))
        })?;
        out.record(plan.trials, bad, first);
    }
    out.elapsed = start.elapsed();
    Ok(out)
}

/// `sign γ(λv) = sign γ(v)` for `λ > 0` in the summation space, on
/// `plan.trials` seeded pairs.
pub fn check_sum_scaling(plan: &TrialPlan) -> Result<Outcome, VerifyError> {
    let start = Instant::now();
    let mut out = Outcome::new("sum scaling sign");
    let c = SpaceConfig::named("sum-strict-nonneg", PropertySpace::indexed(plan.max_dim))?;
    let (bad, first) = random_search(plan.seed, &stream("scaling", &c), plan.trials, |rng| {
        let v = random_point(rng, &c);
        let lambda = Rational::new(rng.gen_range(1..=16), rng.gen_range(1..=8));
        let w = v.scale(&lambda);
        for i in 0..c.properties.size() {
            if gamma(&c, i, &v)?.sign()? != gamma(&c, i, &w)?.sign()? {
                return Ok(Some(Witness {
                    candidate: c.name.clone(),
                    detail: WitnessDetail::Lemma {
                        lemma: "scaling".into(),
                        left: v,
                        right: w,
                        property: i,
                    },
                }));
            }
        }
        Ok(None)
    })?;
    out.record(plan.trials, bad, first);
    out.elapsed = start.elapsed();
    Ok(out)
}

pub(crate) fn rejected(subject: &str, c: &SpaceConfig) -> Outcome {
    let mut out = Outcome::new(subject);
    let issues = validate_config(c);
    if issues.is_empty() {
        out.status = Status::Skipped;
        out.notes.push("configuration unexpectedly passes validation".into());
    } else {
        out.status = Status::RejectedByValidation;
        out.notes.extend(issues.into_iter().map(|v| v.message));
    }
    out
}
