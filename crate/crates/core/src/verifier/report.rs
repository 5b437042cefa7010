use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::candidates::{candidate_names, falsify_outcome};
use super::suites::{
    check_max_downward_closure, check_sum_scaling, rejected, verify_entailment, verify_space,
    verify_weighted,
};
use super::{Outcome, Status, TrialPlan, VerifyError, Witness};
use crate::entailment::{compatible, ScorerFamily};
use crate::epistemic::{PropertySpace, Semantics};
use crate::logic::AtomTable;
use crate::numeric::Rational;
use crate::pooling::PoolingOperator;
use crate::spaces::{registry_names, DomainKind, DomainX, Encoding, ScoringFamily, SpaceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Possible,
    Impossible,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub cell: String,
    pub expected: Expectation,
    pub status: Status,
    /// Whether the status agrees with the expected mark.
    pub matches: bool,
    pub subject: String,
    pub trials: u64,
    pub violations: u64,
    pub seed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub grid: Vec<Rational>,
    pub max_dim: usize,
    pub trials: u64,
    pub formulas: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: String,
    pub plan: PlanSummary,
    pub cells: Vec<Cell>,
    /// Wall-clock time per subject; kept out of the JSON so reruns compare
    /// byte for byte.
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

#[derive(Debug, Clone)]
enum Subject {
    Space(String),
    Weighted(&'static str),
    Candidate(&'static str),
    Entailment(String, ScorerFamily),
    Rejected(&'static str, SpaceConfig),
    DownwardClosure,
    SumScaling,
}

impl Subject {
    fn key(&self) -> String {
        match self {
            Subject::Space(s) => format!("space {s}"),
            Subject::Weighted(s) => format!("weighted {s}"),
            Subject::Candidate(s) => format!("candidate {s}"),
            Subject::Entailment(s, f) => format!("entailment {s} {f}"),
            Subject::Rejected(s, _) => format!("rejected {s}"),
            Subject::DownwardClosure => "lemma downward-closure".into(),
            Subject::SumScaling => "lemma sum-scaling".into(),
        }
    }

    fn run(&self, plan: &TrialPlan) -> Result<Outcome, VerifyError> {
        let start = Instant::now();
        let mut out = match self {
            Subject::Space(name) => {
                let size = if name == "example1" { 2 } else { plan.max_dim };
                verify_space(&SpaceConfig::named(name, PropertySpace::indexed(size))?, plan)?
            }
            Subject::Weighted(name) => verify_weighted(name, plan)?,
            Subject::Candidate(name) => falsify_outcome(name, plan)?,
            Subject::Entailment(name, fam) => verify_entailment(&logical(name)?, fam, plan)?,
            Subject::Rejected(label, c) => rejected(label, c),
            Subject::DownwardClosure => check_max_downward_closure(plan)?,
            Subject::SumScaling => check_sum_scaling(plan)?,
        };
        out.elapsed = start.elapsed();
        Ok(out)
    }
}

fn logical(name: &str) -> Result<SpaceConfig, VerifyError> {
    let atoms = AtomTable::new(["a", "b"])?;
    Ok(SpaceConfig::named(name, PropertySpace::logical(atoms)?)?)
}

/// A configuration outside the registry, used to cite validation failures.
fn custom(
    operator: PoolingOperator,
    semantics: Semantics,
    kind: DomainKind,
    family: ScoringFamily,
    size: usize,
    levels: Option<u32>,
) -> SpaceConfig {
    let (member, non_member) = match operator {
        PoolingOperator::Had => (Rational::zero(), Rational::one()),
        _ => (Rational::one(), Rational::zero()),
    };
    SpaceConfig {
        name: format!("{operator}-{semantics}-{}", family.label()),
        operator,
        semantics,
        domain: DomainX::new(kind, size),
        family,
        properties: PropertySpace::indexed(size),
        encoding: Encoding::Binary { member, non_member },
        margin: None,
        levels,
    }
}

struct Row {
    cell: String,
    expected: Expectation,
    subject: Subject,
}

fn row(cell: impl Into<String>, expected: Expectation, subject: Subject) -> Row {
    Row {
        cell: cell.into(),
        expected,
        subject,
    }
}

fn rows(plan: &TrialPlan) -> Vec<Row> {
    use Expectation::*;
    use PoolingOperator::*;
    use Semantics::*;
    let space = |s: &str| Subject::Space(s.to_string());
    let cand = |s: &'static str| Subject::Candidate(s);
    let p = plan.max_dim;
    let mut out = Vec::new();

    // realizability: X = R^n possible, continuous scores possible
    let realizability = [
        ("avg/strict", cand("avg-strict-reals-coordinate"), Impossible, space("avg-strict-nonneg"), Possible),
        ("avg/weak", cand("avg-weak-reals-coordinate"), Impossible, cand("avg-weak-reals-coordinate"), Impossible),
        ("sum/strict", cand("sum-strict-reals-coordinate"), Impossible, space("sum-strict-nonneg"), Possible),
        ("sum/weak", cand("sum-weak-reals-coordinate"), Impossible, cand("sum-weak-reals-coordinate"), Impossible),
        ("max/strict", space("max-strict-reals"), Possible, space("max-strict-reals"), Possible),
        ("max/weak", space("max-weak-reals"), Possible, space("max-weak-reals"), Possible),
        ("had/strict", space("had-strict-reals"), Possible, cand("had-strict-reals-oneMinusSquare"), Impossible),
        ("had/weak", space("had-weak-reals"), Possible, space("had-weak-reals"), Possible),
    ];
    for (label, unbounded, ue, continuous, ce) in realizability {
        out.push(row(format!("realizability/{label}/unbounded-domain"), ue, unbounded));
        out.push(row(format!("realizability/{label}/continuous-scores"), ce, continuous));
    }
    for name in [
        "avg-weak-nonneg-step",
        "max-weak-nonpos",
        "had-weak-nonneg",
        "avg-margin-nonneg",
        "avg-margin-unit",
    ] {
        out.push(row(format!("constructions/{name}"), Possible, space(name)));
    }
    out.push(row("constructions/example1", Impossible, space("example1")));

    // linear subset scores
    let strict_linear = || cand("strict-linear-gammaQ-affine");
    let avg_weak = || Subject::Rejected("avg-weak-nonneg-coordinate", custom(Avg, Weak, DomainKind::Nonneg, ScoringFamily::Coordinate, p, None));
    let sum_weak = || Subject::Rejected("sum-weak-nonneg-coordinate", custom(Sum, Weak, DomainKind::Nonneg, ScoringFamily::Coordinate, p, None));
    let linear = [
        ("avg/strict", strict_linear(), Impossible),
        ("avg/weak", avg_weak(), Impossible),
        ("sum/strict", strict_linear(), Impossible),
        ("sum/weak", sum_weak(), Impossible),
        ("max/reals/strict", strict_linear(), Impossible),
        ("max/reals/weak", cand("max-weak-reals-linear-gammaQ"), Impossible),
        ("max/bounded-above/strict", strict_linear(), Impossible),
        ("max/bounded-above/weak", Subject::Entailment("max-weak-nonpos".into(), ScorerFamily::LinearSum), Possible),
        ("had/reals/strict", strict_linear(), Impossible),
        ("had/reals/weak", cand("had-weak-reals-linear-gammaQ"), Impossible),
        ("had/nonneg/strict", strict_linear(), Impossible),
        ("had/nonneg/weak", Subject::Entailment("had-weak-nonneg".into(), ScorerFamily::LinearSum), Possible),
    ];
    for (label, subject, e) in linear {
        out.push(row(format!("linear-entailment/{label}"), e, subject));
    }

    // weighted realizability with n = |P|
    let weighted_rejected = |label: &'static str, op, sem, kind, fam| {
        Subject::Rejected(label, custom(op, sem, kind, fam, p, Some(2)))
    };
    let weighted = [
        ("avg/strict", weighted_rejected("weighted-avg-strict", Avg, Strict, DomainKind::Nonneg, ScoringFamily::Coordinate), Impossible),
        ("avg/weak", weighted_rejected("weighted-avg-weak", Avg, Weak, DomainKind::Nonneg, ScoringFamily::Coordinate), Impossible),
        ("sum/strict", weighted_rejected("weighted-sum-strict", Sum, Strict, DomainKind::Nonneg, ScoringFamily::Coordinate), Impossible),
        ("sum/weak", weighted_rejected("weighted-sum-weak", Sum, Weak, DomainKind::Nonneg, ScoringFamily::Coordinate), Impossible),
        ("max/strict", Subject::Weighted("weighted-max-reals"), Possible),
        ("max/weak", Subject::Weighted("weighted-max-reals"), Possible),
        ("had/strict", weighted_rejected("weighted-had-strict", Had, Strict, DomainKind::Reals, ScoringFamily::HadIndicator), Impossible),
        ("had/weak", weighted_rejected("weighted-had-weak", Had, Weak, DomainKind::Reals, ScoringFamily::HadNegSquare), Impossible),
    ];
    for (label, subject, e) in weighted {
        out.push(row(format!("weighted-realizability/{label}"), e, subject));
    }
    out.push(row(
        "weighted-realizability/had/unit-interval-three-levels",
        Possible,
        Subject::Weighted("weighted-had-unit"),
    ));

    for name in registry_names() {
        let Ok(c) = logical(name) else { continue };
        if c.levels.is_some() {
            continue;
        }
        for fam in ScorerFamily::all() {
            if compatible(&c, &fam) {
                out.push(row(
                    format!("entailment-oracle/{name}/{}", fam.name()),
                    Possible,
                    Subject::Entailment(name.to_string(), fam),
                ));
            }
        }
    }
    for name in candidate_names() {
        out.push(row(format!("falsification/{name}"), Impossible, cand(name)));
    }
    out.push(row("structural/max-downward-closure", Possible, Subject::DownwardClosure));
    out.push(row("structural/sum-scaling-sign", Possible, Subject::SumScaling));
    out
}

/// Runs the check behind every cell of the three result matrices plus the
/// supplementary constructions, oracle sweeps, candidates and lemmas.
/// Subjects shared by several cells run once.
pub fn table_report(plan: &TrialPlan) -> Result<Report, VerifyError> {
    plan.check()?;
    let rows = rows(plan);
    let mut done: BTreeMap<String, Outcome> = BTreeMap::new();
    let mut timings = Vec::new();
    for r in &rows {
        let key = r.subject.key();
        if let std::collections::btree_map::Entry::Vacant(slot) = done.entry(key) {
            let out = r.subject.run(plan)?;
            timings.push((slot.key().clone(), out.elapsed));
            slot.insert(out);
        }
    }
    let cells = rows
        .into_iter()
        .map(|r| {
            let out = &done[&r.subject.key()];
            let matches = match r.expected {
                Expectation::Possible => out.passed(),
                Expectation::Impossible => matches!(
                    out.status,
                    Status::FalsifiedWithWitness | Status::RejectedByValidation
                ),
            };
            Cell {
                cell: r.cell,
                expected: r.expected,
                status: out.status,
                matches,
                subject: out.subject.clone(),
                trials: out.trials,
                violations: out.violations,
                seed: plan.seed_text(),
                witness: out.witness.clone(),
                notes: out.notes.clone(),
            }
        })
        .collect();
    Ok(Report {
        seed: plan.seed_text(),
        plan: PlanSummary {
            grid: plan.grid.clone(),
            max_dim: plan.max_dim,
            trials: plan.trials,
            formulas: plan.formulas,
        },
        cells,
        timings,
    })
}

impl Report {
    pub fn all_match(&self) -> bool {
        self.cells.iter().all(|c| c.matches)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let grid: Vec<String> = self.plan.grid.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            s,
            "seed {}, grid {{{}}}, n <= {}, {} random trials per sweep, {} random formulas",
            self.seed,
            grid.join(", "),
            self.plan.max_dim,
            self.plan.trials,
            self.plan.formulas
        );
        let mut section = "";
        for c in &self.cells {
            let head = c.cell.split('/').next().unwrap_or("");
            if head != section {
                section = head;
                let _ = writeln!(s, "\n{head}");
            }
            let rest = &c.cell[head.len() + 1..];
            let expected = match c.expected {
                Expectation::Possible => "possible",
                Expectation::Impossible => "impossible",
            };
            let _ = writeln!(
                s,
                "  {:<44} {:<10} {:<22} {:<3} {} ({} checks)",
                rest,
                expected,
                c.status.to_string(),
                if c.matches { "ok" } else { "MISMATCH" },
                c.subject,
                c.trials
            );
            if let Some(w) = &c.witness {
                let _ = writeln!(s, "      witness {w}");
            }
            for n in &c.notes {
                let _ = writeln!(s, "      {n}");
            }
        }
        let total: Duration = self.timings.iter().map(|(_, d)| *d).sum();
        let _ = writeln!(
            s,
            "\nA falsified cell shows that the named candidate construction fails on a concrete \
             input; it does not prove the impossibility result. A rejected cell cites the \
             validation rule that forbids the configuration.\n\n{} of {} cells match, {:.2}s",
            self.cells.iter().filter(|c| c.matches).count(),
            self.cells.len(),
            total.as_secs_f64()
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::candidate;

    #[test]
    fn every_candidate_in_rows_exists() {
        for r in rows(&TrialPlan::default()) {
            if let Subject::Candidate(name) = r.subject {
                assert!(candidate(name).is_ok());
            }
        }
    }

    #[test]
    fn rejected_rows_are_rejected() {
        for r in rows(&TrialPlan::default()) {
            if let Subject::Rejected(label, c) = &r.subject {
                assert_eq!(rejected(label, c).status, Status::RejectedByValidation, "{label}");
            }
        }
    }

    #[test]
    fn small_report_matches_and_is_stable() {
        let plan = TrialPlan {
            max_dim: 2,
            trials: 200,
            formulas: 5,
            ..TrialPlan::default()
        };
        let a = table_report(&plan).unwrap();
        assert!(a.all_match(), "{}", a.to_text());
        assert_eq!(a.to_json(), table_report(&plan).unwrap().to_json());
    }
}
