//! Grid, exhaustive and seeded random checks of the pooling constructions,
//! falsification of doomed candidates, and the consolidated report.

mod candidates;
mod report;
mod suites;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::entailment::EntailmentError;
use crate::epistemic::{EpistemicError, EpistemicState, Semantics};
use crate::logic::LogicError;
use crate::numeric::{NumericError, Rational};
use crate::pooling::Violation;
use crate::spaces::{SpaceConfig, SpaceError, Vector};
use crate::weighted::WeightedError;

pub use candidates::{candidate, candidate_names, falsify, falsify_outcome, Candidate};
pub use report::{table_report, Cell, Expectation, Report};
pub use suites::{
    check_max_downward_closure, check_sum_scaling, margin_sweep, verify_entailment, verify_space,
    verify_weighted,
};

/// Number of independently seeded partitions for random trials.
pub const PARTITIONS: usize = 8;

/// Seed text used when neither a flag nor `EPOOL_SEED` provides one.
pub const DEFAULT_SEED_TEXT: &str = "0xEP00";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Entailment(#[from] EntailmentError),
    #[error(transparent)]
    Weighted(#[from] WeightedError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Epistemic(#[from] EpistemicError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Seeds are decimal, `0x` hex, or any other text, which is hashed with
/// 64-bit FNV-1a. `0xEP00` is not valid hex and therefore hashes.
pub fn parse_seed(text: &str) -> u64 {
    let t = text.trim();
    if let Ok(n) = t.parse::<u64>() {
        return n;
    }
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        if let Ok(n) = u64::from_str_radix(hex, 16) {
            return n;
        }
    }
    t.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed from `EPOOL_SEED`, falling back to [`DEFAULT_SEED_TEXT`].
pub fn default_seed() -> u64 {
    match std::env::var("EPOOL_SEED") {
        Ok(s) if !s.trim().is_empty() => parse_seed(&s),
        _ => parse_seed(DEFAULT_SEED_TEXT),
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for one partition of one named stream.
pub(crate) fn split_seed(seed: u64, stream: &str, partition: usize) -> u64 {
    let tag = parse_seed(stream);
    splitmix64(splitmix64(seed ^ tag).wrapping_add(partition as u64))
}

pub(crate) fn stream_rng(seed: u64, stream: &str, partition: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(seed, stream, partition))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialPlan {
    pub grid: Vec<Rational>,
    /// Largest property count swept exhaustively over the grid.
    pub max_dim: usize,
    pub trials: u64,
    pub seed: u64,
    /// Random formulas per entailment sweep.
    pub formulas: usize,
}

impl Default for TrialPlan {
    fn default() -> Self {
        TrialPlan {
            grid: ["-2", "-1", "-1/2", "0", "1/2", "1", "2"]
                .iter()
                .map(|s| s.parse().expect("valid literal"))
                .collect(),
            max_dim: 3,
            trials: 10_000,
            seed: parse_seed(DEFAULT_SEED_TEXT),
            formulas: 50,
        }
    }
}

impl TrialPlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_grid(mut self, grid: Vec<Rational>) -> Self {
        self.grid = grid;
        self
    }

    pub fn check(&self) -> Result<(), VerifyError> {
        if self.grid.is_empty() {
            return Err(VerifyError::Plan("grid must not be empty".into()));
        }
        if self.max_dim == 0 {
            return Err(VerifyError::Plan("max dimension must be positive".into()));
        }
        Ok(())
    }

    pub fn seed_text(&self) -> String {
        format!("{:#018x}", self.seed)
    }
}

/// Every vector of `grid^n` that lies in the space's domain, in
/// lexicographic order.
pub fn grid_points(c: &SpaceConfig, grid: &[Rational]) -> Vec<Vector> {
    let n = c.n();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let v = Vector(idx.iter().map(|&i| grid[i].clone()).collect());
        if c.contains(&v).unwrap_or(false) {
            out.push(v);
        }
        let mut d = n;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < grid.len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Rational with denominator at most 4 and numerator in `-8..=8`, zero about
/// a quarter of the time.
pub(crate) fn random_coord<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    if rng.gen_ratio(1, 4) {
        Rational::zero()
    } else {
        Rational::new(rng.gen_range(-8..=8), rng.gen_range(1..=4))
    }
}

pub(crate) fn random_point<R: Rng + ?Sized>(rng: &mut R, c: &SpaceConfig) -> Vector {
    let raw = Vector((0..c.n()).map(|_| random_coord(rng)).collect());
    c.domain.project(&raw)
}

/// Runs `trials` calls of `f` split over [`PARTITIONS`] seeded partitions.
/// Returns the number of failing trials and the first failure in partition
/// order.
pub(crate) fn random_search<T, F>(
    seed: u64,
    stream: &str,
    trials: u64,
    f: F,
) -> Result<(u64, Option<T>), VerifyError>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<Option<T>, VerifyError> + Sync,
{
    let parts = PARTITIONS as u64;
    let results: Vec<Result<(u64, Option<T>), VerifyError>> = (0..PARTITIONS)
        .into_par_iter()
        .map(|p| {
            let (lo, hi) = (trials * p as u64 / parts, trials * (p as u64 + 1) / parts);
            let mut rng = stream_rng(seed, stream, p);
            let mut count = 0;
            let mut first = None;
            for _ in lo..hi {
                if let Some(found) = f(&mut rng)? {
                    count += 1;
                    first.get_or_insert(found);
                }
            }
            Ok((count, first))
        })
        .collect();
    let mut total = 0;
    let mut first = None;
    for r in results {
        let (count, found) = r?;
        total += count;
        if first.is_none() {
            first = found;
        }
    }
    Ok((total, first))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    VerifiedOnGrid,
    FalsifiedWithWitness,
    RejectedByValidation,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::VerifiedOnGrid => "verified-on-grid",
            Status::FalsifiedWithWitness => "falsified-with-witness",
            Status::RejectedByValidation => "rejected-by-validation",
            Status::Skipped => "skipped",
        })
    }
}

/// Custom subset scorers used only by the falsification candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ProbeScorer {
    /// `Σ e_q − 1`
    AffineSum,
    /// `Σ e_q`
    CoordinateSum,
    /// `−Σ e_q`
    NegatedSum,
}

impl ProbeScorer {
    pub(crate) fn name(self) -> &'static str {
        match self {
            ProbeScorer::AffineSum => "affine-sum-minus-one",
            ProbeScorer::CoordinateSum => "coordinate-sum",
            ProbeScorer::NegatedSum => "negated-coordinate-sum",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        [ProbeScorer::AffineSum, ProbeScorer::CoordinateSum, ProbeScorer::NegatedSum]
            .into_iter()
            .find(|p| p.name() == name)
    }

    pub(crate) fn score(self, q: &[usize], v: &Vector) -> Rational {
        let sum: Rational = q.iter().map(|&i| &v.0[i]).sum();
        match self {
            ProbeScorer::AffineSum => &sum - &Rational::one(),
            ProbeScorer::CoordinateSum => sum,
            ProbeScorer::NegatedSum => -sum,
        }
    }
}

/// A concrete discrepancy that can be re-evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Candidate or space the witness was found for.
    pub candidate: String,
    #[serde(flatten)]
    pub detail: WitnessDetail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessDetail {
    /// Pooling disagrees with the union of the inputs' states.
    Pooling(Violation),
    /// A subset score disagrees with the conjunction of its members.
    Conjunction {
        scorer: String,
        subset: Vec<usize>,
        vector: Vector,
        expected: bool,
        observed: bool,
        semantics: Semantics,
    },
    /// `ψ` disagrees with the entailment oracle.
    Entailment {
        scorer: String,
        state: Vec<usize>,
        formula: String,
        vector: Vector,
        expected: bool,
        observed: bool,
    },
    /// Decoding an encoded state gives a different state.
    Roundtrip {
        state: Vec<usize>,
        vector: Vector,
        decoded: Vec<usize>,
    },
    /// `u ≤ v` pointwise but `Γ(u) ⊄ Γ(v)`, or a positive rescaling changed
    /// a sign.
    Lemma {
        lemma: String,
        left: Vector,
        right: Vector,
        property: usize,
    },
}

impl Witness {
    /// Re-evaluates the discrepancy in `c`; `true` when it is reproduced
    /// exactly.
    pub fn replay(&self, c: &SpaceConfig) -> Result<bool, VerifyError> {
        use crate::entailment::{gamma_q, psi, ScorerFamily};
        use crate::spaces::{decode, encode, gamma};
        match &self.detail {
            WitnessDetail::Pooling(v) => Ok(v.replay(c)?),
            WitnessDetail::Conjunction {
                scorer,
                subset,
                vector,
                expected,
                observed,
                semantics,
            } => {
                let holds = |s: &crate::numeric::ScoreValue| -> Result<bool, VerifyError> {
                    Ok(crate::spaces::satisfied(*semantics, s)?)
                };
                let mut conj = true;
                for &i in subset {
                    conj &= holds(&gamma(c, i, vector)?)?;
                }
                let obs = match ProbeScorer::from_name(scorer) {
                    Some(p) => holds(&crate::numeric::ScoreValue::Exact(p.score(subset, vector)))?,
                    None => {
                        let fam = ScorerFamily::from_str(scorer)
                            .map_err(|e| VerifyError::Plan(e.to_string()))?;
                        let q = crate::bitset::BitSet::from_indices(c.properties.size(), subset.iter().copied());
                        holds(&gamma_q(c, &fam, &q, vector)?)?
                    }
                };
                Ok(conj == *expected && obs == *observed && conj != obs)
            }
            WitnessDetail::Entailment {
                scorer,
                state,
                formula,
                vector,
                expected,
                observed,
            } => {
                let fam = ScorerFamily::from_str(scorer).map_err(|e| VerifyError::Plan(e.to_string()))?;
                let atoms = c.properties.atoms().ok_or(EpistemicError::NotLogical)?;
                let f = crate::logic::parse_formula(formula, atoms)?;
                let s = EpistemicState::from_indices(c.properties.size(), state.iter().copied())?;
                let truth = crate::epistemic::state_entails(&c.properties, &s, &f)?;
                let obs = psi(c, &fam, &f, vector)?;
                Ok(truth == *expected && obs == *observed && truth != obs)
            }
            WitnessDetail::Roundtrip { state, vector, decoded } => {
                if let Some(k) = c.levels {
                    use crate::weighted::{decode_weighted, encode_weighted, WeightedState};
                    let levels = state.iter().map(|&l| l as u32).collect();
                    let s = WeightedState::new(levels, k)?;
                    let v = encode_weighted(c, &s)?;
                    let back = decode_weighted(c, k, &v, c.semantics)?;
                    let back_levels: Vec<usize> = back.levels().iter().map(|&l| l as usize).collect();
                    return Ok(&v == vector && back_levels == *decoded && back != s);
                }
                let s = EpistemicState::from_indices(c.properties.size(), state.iter().copied())?;
                let v = encode(c, &s)?;
                let back = decode(c, &v)?;
                Ok(&v == vector && back.iter().collect::<Vec<_>>() == *decoded && back != s)
            }
            WitnessDetail::Lemma {
                lemma,
                left,
                right,
                property,
            } => {
                let (a, b) = (gamma(c, *property, left)?, gamma(c, *property, right)?);
                let (sa, sb) = (
                    crate::spaces::satisfied(c.semantics, &a)?,
                    crate::spaces::satisfied(c.semantics, &b)?,
                );
                Ok(match lemma.as_str() {
                    "downward-closure" => sa && !sb,
                    _ => a.sign()? != b.sign()?,
                })
            }
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yes = |b: bool| if b { "holds" } else { "fails" };
        write!(f, "{}: ", self.candidate)?;
        match &self.detail {
            WitnessDetail::Pooling(v) => write!(f, "{v}"),
            WitnessDetail::Conjunction {
                scorer,
                subset,
                vector,
                expected,
                observed,
                semantics,
            } => write!(
                f,
                "{scorer} on Q = {subset:?} at {vector}: conjunction {}, subset score {} ({semantics})",
                yes(*expected),
                yes(*observed)
            ),
            WitnessDetail::Entailment {
                scorer,
                state,
                formula,
                vector,
                expected,
                observed,
            } => write!(
                f,
                "{scorer} on `{formula}` at {vector} (state {state:?}): oracle {}, score {}",
                yes(*expected),
                yes(*observed)
            ),
            WitnessDetail::Roundtrip { state, vector, decoded } => {
                write!(f, "state {state:?} encodes to {vector} but decodes to {decoded:?}")
            }
            WitnessDetail::Lemma {
                lemma,
                left,
                right,
                property,
            } => write!(f, "{lemma} fails for p{property}: {left} vs {right}"),
        }
    }
}

/// Result of one verification or falsification run.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub subject: String,
    pub status: Status,
    /// Number of individual checks performed.
    pub trials: u64,
    pub violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Outcome {
    pub(crate) fn new(subject: impl Into<String>) -> Self {
        Outcome {
            subject: subject.into(),
            status: Status::VerifiedOnGrid,
            trials: 0,
            violations: 0,
            witness: None,
            notes: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub(crate) fn record(&mut self, checks: u64, violations: u64, witness: Option<Witness>) {
        self.trials += checks;
        self.violations += violations;
        if self.witness.is_none() {
            self.witness = witness;
        }
        if self.violations > 0 {
            self.status = Status::FalsifiedWithWitness;
        }
    }

    /// Folds another run into this one, keeping the earliest witness.
    pub(crate) fn absorb(&mut self, other: Outcome) {
        self.record(other.trials, other.violations, other.witness);
        self.notes.extend(other.notes);
        self.elapsed += other.elapsed;
        if other.status == Status::Skipped && self.status == Status::VerifiedOnGrid {
            self.status = Status::Skipped;
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::VerifiedOnGrid && self.violations == 0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} checks, {} violations)",
            self.subject, self.status, self.trials, self.violations
        )?;
        if let Some(w) = &self.witness {
            write!(f, "\n  witness {w}")?;
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epistemic::PropertySpace;

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("42"), 42);
        assert_eq!(parse_seed("0x10"), 16);
        assert_eq!(parse_seed("0xEP00"), parse_seed(" 0xEP00 "));
        assert_ne!(parse_seed("0xEP00"), parse_seed("0xEP01"));
        // FNV-1a reference value for "a"
        assert_eq!(parse_seed("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn grid_respects_domain() {
        let plan = TrialPlan::default();
        let c = SpaceConfig::named("avg-strict-nonneg", PropertySpace::indexed(2)).unwrap();
        let pts = grid_points(&c, &plan.grid);
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[0], Vector::from_ints(&[0, 0]));
        let c = SpaceConfig::named("max-strict-reals", PropertySpace::indexed(3)).unwrap();
        assert_eq!(grid_points(&c, &plan.grid).len(), 343);
    }

    #[test]
    fn random_search_is_deterministic_and_complete() {
        let run = || {
            random_search(7, "probe", 1000, |rng| {
                let x: u32 = rng.gen_range(0..10);
                Ok((x == 3).then_some(x))
            })
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert!(a.0 > 50 && a.0 < 150);
        let (count, _) = random_search(7, "count", 1001, |_| Ok(Some(()))).unwrap();
        assert_eq!(count, 1001);
    }
}
