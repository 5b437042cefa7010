//! Deliberately doomed constructions. Each one is searched for a concrete
//! discrepancy: grid pairs (or points) in lexicographic order first, then
//! seeded random ones.

use std::time::Instant;

use super::{
    grid_points, random_point, random_search, Outcome, ProbeScorer, Status, TrialPlan, VerifyError,
    Witness, WitnessDetail,
};
use crate::epistemic::{PropertySpace, Semantics};
use crate::numeric::{Rational, ScoreValue};
use crate::pooling::{check_principle, PoolingOperator};
use crate::spaces::{gamma, satisfied, DomainKind, DomainX, Encoding, ScoringFamily, SpaceConfig, Vector};

#[derive(Debug, Clone, Copy)]
enum Kind {
    Pooling {
        operator: PoolingOperator,
        semantics: Semantics,
        family: ScoringFamily,
    },
    Linear {
        space: &'static str,
        scorer: ProbeScorer,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub name: &'static str,
    pub summary: &'static str,
    kind: Kind,
}

const fn pooling(
    name: &'static str,
    summary: &'static str,
    operator: PoolingOperator,
    semantics: Semantics,
    family: ScoringFamily,
) -> Candidate {
    Candidate {
        name,
        summary,
        kind: Kind::Pooling {
            operator,
            semantics,
            family,
        },
    }
}

const fn linear(name: &'static str, summary: &'static str, space: &'static str, scorer: ProbeScorer) -> Candidate {
    Candidate {
        name,
        summary,
        kind: Kind::Linear { space, scorer },
    }
}

const CANDIDATES: [Candidate; 8] = [
    pooling(
        "avg-strict-reals-coordinate",
        "averaging on all of R^n, strict, gamma_p(e) = e_p",
        PoolingOperator::Avg,
        Semantics::Strict,
        ScoringFamily::Coordinate,
    ),
    pooling(
        "avg-weak-reals-coordinate",
        "averaging on all of R^n, weak, gamma_p(e) = e_p",
        PoolingOperator::Avg,
        Semantics::Weak,
        ScoringFamily::Coordinate,
    ),
    pooling(
        "sum-strict-reals-coordinate",
        "summation on all of R^n, strict, gamma_p(e) = e_p",
        PoolingOperator::Sum,
        Semantics::Strict,
        ScoringFamily::Coordinate,
    ),
    pooling(
        "sum-weak-reals-coordinate",
        "summation on all of R^n, weak, gamma_p(e) = e_p",
        PoolingOperator::Sum,
        Semantics::Weak,
        ScoringFamily::Coordinate,
    ),
    pooling(
        "had-strict-reals-oneMinusSquare",
        "Hadamard on R^n, strict, continuous gamma_p(e) = 1 - e_p^2",
        PoolingOperator::Had,
        Semantics::Strict,
        ScoringFamily::OneMinusSquare,
    ),
    linear(
        "strict-linear-gammaQ-affine",
        "avg-strict-nonneg with gamma_Q(e) = sum of e_q minus 1, strict",
        "avg-strict-nonneg",
        ProbeScorer::AffineSum,
    ),
    linear(
        "max-weak-reals-linear-gammaQ",
        "max-weak-reals with gamma_Q(e) = sum of e_q, weak",
        "max-weak-reals",
        ProbeScorer::CoordinateSum,
    ),
    linear(
        "had-weak-reals-linear-gammaQ",
        "had-weak-reals with gamma_Q(e) = minus the sum of e_q, weak",
        "had-weak-reals",
        ProbeScorer::NegatedSum,
    ),
];

pub fn candidate_names() -> Vec<&'static str> {
    CANDIDATES.iter().map(|c| c.name).collect()
}

pub fn candidate(name: &str) -> Result<Candidate, VerifyError> {
    CANDIDATES
        .iter()
        .find(|c| c.name == name)
        .copied()
        .ok_or_else(|| VerifyError::UnknownCandidate(name.to_string()))
}

impl Candidate {
    /// The candidate's space over two properties.
    pub fn config(&self) -> SpaceConfig {
        match self.kind {
            Kind::Pooling {
                operator,
                semantics,
                family,
            } => SpaceConfig {
                name: self.name.to_string(),
                operator,
                semantics,
                domain: DomainX::new(DomainKind::Reals, 2),
                family,
                properties: PropertySpace::indexed(2),
                encoding: Encoding::Binary {
                    member: Rational::one(),
                    non_member: Rational::zero(),
                },
                margin: None,
                levels: None,
            },
            Kind::Linear { space, .. } => SpaceConfig {
                name: self.name.to_string(),
                ..SpaceConfig::named(space, PropertySpace::indexed(2)).expect("registry space")
            },
        }
    }

    /// Re-evaluates a witness found for this candidate.
    pub fn replay(&self, w: &Witness) -> Result<bool, VerifyError> {
        if w.candidate != self.name {
            return Ok(false);
        }
        w.replay(&self.config())
    }

    fn search(&self, plan: &TrialPlan) -> Result<Outcome, VerifyError> {
        plan.check()?;
        let start = Instant::now();
        let c = self.config();
        let points = grid_points(&c, &plan.grid);
        let mut out = Outcome::new(self.name);
        out.status = Status::VerifiedOnGrid;
        let mut checks = 0u64;
        let found = match self.kind {
            Kind::Pooling { .. } => {
                let mut found = None;
                'scan: for e in &points {
                    for f in &points {
                        checks += 1;
                        if let Some(v) = check_principle(&c, e, f)? {
                            found = Some(self.wrap(WitnessDetail::Pooling(v)));
                            break 'scan;
                        }
                    }
                }
                found
            }
            Kind::Linear { scorer, .. } => {
                let mut found = None;
                for v in &points {
                    checks += 1;
                    if let Some(w) = self.probe(&c, scorer, v)? {
                        found = Some(w);
                        break;
                    }
                }
                found
            }
        };
        if let Some(w) = found {
            out.record(checks, 1, Some(w));
        } else {
            out.record(checks, 0, None);
            let stream = format!("falsify/{}", self.name);
            let (bad, first) = random_search(plan.seed, &stream, plan.trials, |rng| match self.kind {
                Kind::Pooling { .. } => {
                    let (e, f) = (random_point(rng, &c), random_point(rng, &c));
                    Ok(check_principle(&c, &e, &f)?.map(|v| self.wrap(WitnessDetail::Pooling(v))))
                }
                Kind::Linear { scorer, .. } => self.probe(&c, scorer, &random_point(rng, &c)),
            })?;
            out.record(plan.trials, bad, first);
        }
        out.notes.push(match out.witness {
            Some(_) => format!("this candidate construction fails ({})", self.summary),
            None => format!("no witness within the plan's budget ({})", self.summary),
        });
        out.elapsed = start.elapsed();
        Ok(out)
    }

    fn wrap(&self, detail: WitnessDetail) -> Witness {
        Witness {
            candidate: self.name.to_string(),
            detail,
        }
    }

    /// Subsets with at least two members, by ascending bit mask. Singletons
    /// are left out: a single-property linear score is just a rescaled
    /// coordinate.
    fn probe(&self, c: &SpaceConfig, scorer: ProbeScorer, v: &Vector) -> Result<Option<Witness>, VerifyError> {
        let n = c.properties.size();
        for mask in 1u64..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let q: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut expected = true;
            for &i in &q {
                expected &= satisfied(c.semantics, &gamma(c, i, v)?)?;
            }
            let observed = satisfied(c.semantics, &ScoreValue::Exact(scorer.score(&q, v)))?;
            if expected != observed {
                return Ok(Some(self.wrap(WitnessDetail::Conjunction {
                    scorer: scorer.name().to_string(),
                    subset: q,
                    vector: v.clone(),
                    expected,
                    observed,
                    semantics: c.semantics,
                })));
            }
        }
        Ok(None)
    }
}

/// Search outcome for a candidate, including how many checks ran.
pub fn falsify_outcome(name: &str, plan: &TrialPlan) -> Result<Outcome, VerifyError> {
    candidate(name)?.search(plan)
}

/// First witness in scan order, or `None` within the plan's budget.
pub fn falsify(name: &str, plan: &TrialPlan) -> Result<Option<Witness>, VerifyError> {
    Ok(falsify_outcome(name, plan)?.witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_candidate_has_a_replayable_witness() {
        let plan = TrialPlan::default();
        for name in candidate_names() {
            let w = falsify(name, &plan).unwrap().unwrap_or_else(|| panic!("{name}"));
            assert!(candidate(name).unwrap().replay(&w).unwrap(), "{name}: {w}");
        }
    }

    #[test]
    fn grid_witnesses() {
        let plan = TrialPlan::default();
        let w = falsify("strict-linear-gammaQ-affine", &plan).unwrap().unwrap();
        match &w.detail {
            WitnessDetail::Conjunction { vector, expected, observed, .. } => {
                assert_eq!(*vector, Vector::from_ints(&[0, 2]));
                assert!(!expected && *observed);
            }
            other => panic!("{other:?}"),
        }
        let w = falsify("had-strict-reals-oneMinusSquare", &plan).unwrap().unwrap();
        match &w.detail {
            WitnessDetail::Pooling(v) => assert!(v.expected && !v.observed),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tampered_witness_does_not_replay() {
        let plan = TrialPlan::default();
        let mut w = falsify("avg-weak-reals-coordinate", &plan).unwrap().unwrap();
        let cand = candidate("avg-weak-reals-coordinate").unwrap();
        if let WitnessDetail::Pooling(v) = &mut w.detail {
            v.right = v.left.clone();
        }
        assert!(!cand.replay(&w).unwrap());
        assert!(matches!(candidate("nope"), Err(VerifyError::UnknownCandidate(_))));
    }
}
