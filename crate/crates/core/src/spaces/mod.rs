//! Embedding spaces: a domain `X ⊆ ℝⁿ`, one scoring function per property,
//! a pooling operator, a semantics, and a canonical encoder.

mod file;
mod registry;

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::epistemic::{EpistemicError, EpistemicState, PropertySpace, Semantics};
use crate::numeric::{sign_ge0, sign_gt0, NumericError, Rational, ScoreValue};
use crate::pooling::PoolingOperator;

pub use file::{NamedVector, VectorFile};
pub use registry::{parse_space_name, registry_names, SpaceName};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("expected a vector of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("vector {vector} lies outside the domain {domain}")]
    OutsideDomain { vector: String, domain: String },
    #[error("property index {index} outside a space of {size} properties")]
    PropertyOutOfRange { index: usize, size: usize },
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("bad parameter for `{name}`: {message}")]
    BadParameter { name: String, message: String },
    #[error("invalid configuration: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ConfigViolation>),
    #[error("state over {got} properties given to a space over {expected}")]
    StateSize { expected: usize, got: usize },
    #[error("vector file: {0}")]
    File(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Epistemic(#[from] EpistemicError),
}

/// A vector of exact coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(pub Vec<Rational>);

impl Vector {
    pub fn new(coords: Vec<Rational>) -> Self {
        Vector(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Vector(coords.iter().map(|c| Rational::from_integer(*c)).collect())
    }

    /// Parses `"1/4, 0"` (commas and/or whitespace between coordinates).
    pub fn parse(text: &str) -> Result<Self, NumericError> {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse())
            .collect::<Result<Vec<_>, _>>()
            .map(Vector)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn scale(&self, k: &Rational) -> Vector {
        Vector(self.0.iter().map(|c| c * k).collect())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Vector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Reals,
    /// `[0, ∞)ⁿ`
    Nonneg,
    /// `(−∞, 0]ⁿ`
    Nonpos,
    /// `(−∞, z]ⁿ`
    BoundedAbove(Rational),
    /// `[0, 1]ⁿ`
    UnitInterval,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DomainX {
    pub kind: DomainKind,
    pub n: usize,
}

impl DomainX {
    pub fn new(kind: DomainKind, n: usize) -> Self {
        DomainX { kind, n }
    }

    pub fn contains_coord(&self, x: &Rational) -> bool {
        match &self.kind {
            DomainKind::Reals => true,
            DomainKind::Nonneg => !x.is_negative(),
            DomainKind::Nonpos => !x.is_positive(),
            DomainKind::BoundedAbove(z) => x <= z,
            DomainKind::UnitInterval => !x.is_negative() && *x <= Rational::one(),
        }
    }

    pub fn contains(&self, v: &Vector) -> Result<bool, SpaceError> {
        if v.dim() != self.n {
            return Err(SpaceError::Dimension {
                expected: self.n,
                got: v.dim(),
            });
        }
        Ok(v.0.iter().all(|x| self.contains_coord(x)))
    }

    /// Whether pooling two points of `X` always stays in `X`.
    pub fn closed_under(&self, op: PoolingOperator) -> bool {
        use PoolingOperator::*;
        match (&self.kind, op) {
            (DomainKind::Reals | DomainKind::Nonneg, _) => true,
            (DomainKind::Nonpos, Avg | Sum | Max) => true,
            (DomainKind::Nonpos, Had) => false,
            (DomainKind::BoundedAbove(_), Avg | Max) => true,
            (DomainKind::BoundedAbove(z), Sum) => !z.is_positive(),
            (DomainKind::BoundedAbove(_), Had) => false,
            (DomainKind::UnitInterval, Sum) => false,
            (DomainKind::UnitInterval, _) => true,
        }
    }

    /// Nearest point of `X` in each coordinate.
    pub fn project(&self, v: &Vector) -> Vector {
        let clamp = |x: &Rational| -> Rational {
            match &self.kind {
                DomainKind::Reals => x.clone(),
                DomainKind::Nonneg => x.clone().max(Rational::zero()),
                DomainKind::Nonpos => x.clone().min(Rational::zero()),
                DomainKind::BoundedAbove(z) => x.clone().min(z.clone()),
                DomainKind::UnitInterval => x.clone().max(Rational::zero()).min(Rational::one()),
            }
        };
        Vector(v.0.iter().map(clamp).collect())
    }
}

impl fmt::Display for DomainX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n;
        match &self.kind {
            DomainKind::Reals => write!(f, "R^{n}"),
            DomainKind::Nonneg => write!(f, "[0,inf)^{n}"),
            DomainKind::Nonpos => write!(f, "(-inf,0]^{n}"),
            DomainKind::BoundedAbove(z) => write!(f, "(-inf,{z}]^{n}"),
            DomainKind::UnitInterval => write!(f, "[0,1]^{n}"),
        }
    }
}

/// Per-property scoring functions; property `i` reads coordinate `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoringFamily {
    /// `e_i`
    Coordinate,
    /// `1` if `e_i > 0`, else `−1`
    StepAvgWeak,
    /// `1` if `e_i = 0`, else `0`
    HadIndicator,
    /// `−e_i`
    HadNegCoord,
    /// `−e_i²`
    HadNegSquare,
    /// `−ReLU(−e_i)`
    ReluNegCoord,
    /// `1 − e_i²`
    OneMinusSquare,
    /// Two properties in the plane: `1 − d(x, (0,0))` and `1 − d(x, (1,1))`.
    Example1,
    /// `3/2` if `e_i = 0`, `−1/2` if `e_i = 1`, else `1/2`
    WeightedHad01,
}

impl ScoringFamily {
    pub fn is_continuous(self) -> bool {
        !matches!(
            self,
            ScoringFamily::StepAvgWeak | ScoringFamily::HadIndicator | ScoringFamily::WeightedHad01
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            ScoringFamily::Coordinate => "coordinate",
            ScoringFamily::StepAvgWeak => "step",
            ScoringFamily::HadIndicator => "zero-indicator",
            ScoringFamily::HadNegCoord => "negated-coordinate",
            ScoringFamily::HadNegSquare => "negated-square",
            ScoringFamily::ReluNegCoord => "negated-relu",
            ScoringFamily::OneMinusSquare => "one-minus-square",
            ScoringFamily::Example1 => "unit-disks",
            ScoringFamily::WeightedHad01 => "three-level",
        }
    }
}

/// How [`encode`] writes members and non-members.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Encoding {
    Binary { member: Rational, non_member: Rational },
    /// Fixed witness points of the two-disk demo space.
    Example1,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceConfig {
    pub name: String,
    pub operator: PoolingOperator,
    pub semantics: Semantics,
    pub domain: DomainX,
    pub family: ScoringFamily,
    pub properties: PropertySpace,
    pub encoding: Encoding,
    /// Clear-cut margin `Δ` for the margin spaces.
    pub margin: Option<Rational>,
    /// Top certainty level `K` for weighted spaces.
    pub levels: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Averaging or summing on all of `ℝⁿ` only admits trivial encoders.
    UnboundedDomain,
    /// Averaging or summing under weak semantics needs a discontinuous family.
    ContinuousWeak,
    /// Hadamard under strict semantics needs a discontinuous family.
    ContinuousStrictHadamard,
    /// Fewer dimensions than properties.
    Dimension,
    /// Fewer than `|P|·K` dimensions for weighted averaging, summing or Hadamard.
    WeightedDimension,
    /// The scoring family is not meaningful on this domain.
    FamilyDomain,
    /// The domain is not closed under the operator.
    NotClosed,
    /// Margin parameters out of range.
    Margin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Checks a configuration against the known realizability results. Returns
/// every violated rule; an empty list means the configuration is admissible.
pub fn validate_config(c: &SpaceConfig) -> Vec<ConfigViolation> {
    use PoolingOperator::*;
    let mut out = Vec::new();
    let mut flag = |rule, message: String| out.push(ConfigViolation { rule, message });
    let n = c.domain.n;
    let p = c.properties.size();
    let averaging = matches!(c.operator, Avg | Sum);

    if averaging && c.domain.kind == DomainKind::Reals {
        flag(
            Rule::UnboundedDomain,
            format!(
                "{} pooling on all of R^n: every vector encodes the same state, so only trivial encoders exist",
                c.operator
            ),
        );
    }
    if averaging && c.semantics == Semantics::Weak && c.family.is_continuous() {
        flag(
            Rule::ContinuousWeak,
            format!(
                "{} pooling under weak semantics with continuous scores forces every property to be always or never satisfied",
                c.operator
            ),
        );
    }
    if c.operator == Had && c.semantics == Semantics::Strict && c.family.is_continuous() {
        flag(
            Rule::ContinuousStrictHadamard,
            "Hadamard pooling under strict semantics with continuous scores forces every property to be always or never satisfied".into(),
        );
    }
    if n < p {
        flag(
            Rule::Dimension,
            format!("dimension {n} is below the number of properties {p}"),
        );
    }
    if let Some(k) = c.levels {
        let needed = p * k as usize;
        let exempt = c.operator == Had
            && c.domain.kind == DomainKind::UnitInterval
            && c.family == ScoringFamily::WeightedHad01
            && k <= 2;
        if matches!(c.operator, Avg | Sum | Had) && n < needed && !exempt {
            flag(
                Rule::WeightedDimension,
                format!("weighted {} pooling needs n >= |P|*K = {needed}, got {n}", c.operator),
            );
        }
    }
    let family_ok = match c.family {
        ScoringFamily::StepAvgWeak | ScoringFamily::HadNegCoord => {
            matches!(c.domain.kind, DomainKind::Nonneg | DomainKind::UnitInterval)
        }
        ScoringFamily::Example1 => c.domain.kind == DomainKind::Reals && n == 2 && p == 2,
        ScoringFamily::WeightedHad01 => {
            c.domain.kind == DomainKind::UnitInterval && c.levels == Some(2)
        }
        _ => true,
    };
    if !family_ok {
        flag(
            Rule::FamilyDomain,
            format!("{} scores are not supported on {}", c.family.label(), c.domain),
        );
    }
    if !c.domain.closed_under(c.operator) {
        flag(
            Rule::NotClosed,
            format!("{} is not closed under {} pooling", c.domain, c.operator),
        );
    }
    if let Some(delta) = &c.margin {
        if !delta.is_positive() {
            flag(Rule::Margin, format!("margin {delta} must be positive"));
        }
        if c.domain.kind == DomainKind::UnitInterval {
            // Δ = 1 − ε with 0 < ε < 1/n
            let eps = &Rational::one() - delta;
            let limit = Rational::new(1, n.max(1) as i64);
            if !eps.is_positive() || eps >= limit {
                flag(
                    Rule::Margin,
                    format!("epsilon {eps} must lie strictly between 0 and 1/{n}"),
                );
            }
        }
    }
    out
}

fn check_vector(c: &SpaceConfig, v: &Vector) -> Result<(), SpaceError> {
    if !c.domain.contains(v)? {
        return Err(SpaceError::OutsideDomain {
            vector: v.to_string(),
            domain: c.domain.to_string(),
        });
    }
    Ok(())
}

fn check_index(c: &SpaceConfig, i: usize) -> Result<(), SpaceError> {
    if i >= c.properties.size() {
        return Err(SpaceError::PropertyOutOfRange {
            index: i,
            size: c.properties.size(),
        });
    }
    Ok(())
}

/// Euclidean demo score with an exactly decided sign.
fn disk_score(v: &Vector, centre: i64) -> ScoreValue {
    let c = Rational::from_integer(centre);
    let d2: Rational = v.0.iter().map(|x| {
        let d = x - &c;
        &d * &d
    }).sum();
    ScoreValue::Approx {
        value: 1.0 - d2.to_f64().sqrt(),
        error_bound: crate::numeric::sigmoid_term_error_bound(),
        sign: Some(Rational::one().cmp(&d2)),
    }
}

/// Score of property `i` without checking domain membership.
pub(crate) fn gamma_unchecked(family: ScoringFamily, i: usize, v: &Vector) -> ScoreValue {
    let x = &v.0[i];
    let r = |n: i64, d: i64| ScoreValue::Exact(Rational::new(n, d));
    match family {
        ScoringFamily::Coordinate => ScoreValue::Exact(x.clone()),
        ScoringFamily::StepAvgWeak => r(if x.is_positive() { 1 } else { -1 }, 1),
        ScoringFamily::HadIndicator => r(i64::from(x.is_zero()), 1),
        ScoringFamily::HadNegCoord => ScoreValue::Exact(-x),
        ScoringFamily::HadNegSquare => ScoreValue::Exact(-(x * x)),
        ScoringFamily::ReluNegCoord => ScoreValue::Exact(x.clone().min(Rational::zero())),
        ScoringFamily::OneMinusSquare => ScoreValue::Exact(&Rational::one() - &(x * x)),
        ScoringFamily::Example1 => disk_score(v, i as i64),
        ScoringFamily::WeightedHad01 => {
            if x.is_zero() {
                r(3, 2)
            } else if *x == Rational::one() {
                r(-1, 2)
            } else {
                r(1, 2)
            }
        }
    }
}

/// Exact score `γ_{p_i}(v)` (the demo space yields an approximate value with
/// an exact sign).
pub fn gamma(c: &SpaceConfig, i: usize, v: &Vector) -> Result<ScoreValue, SpaceError> {
    check_vector(c, v)?;
    check_index(c, i)?;
    Ok(gamma_unchecked(c.family, i, v))
}

pub(crate) fn satisfied(semantics: Semantics, s: &ScoreValue) -> Result<bool, NumericError> {
    match semantics {
        Semantics::Strict => sign_gt0(s),
        Semantics::Weak => sign_ge0(s),
    }
}

pub(crate) fn decode_unchecked(c: &SpaceConfig, v: &Vector) -> Result<EpistemicState, SpaceError> {
    let mut s = c.properties.empty_state();
    for i in 0..c.properties.size() {
        if satisfied(c.semantics, &gamma_unchecked(c.family, i, v))? {
            s.insert(i)?;
        }
    }
    Ok(s)
}

/// `Γ(v)` under strict semantics, `Γ′(v)` under weak semantics.
pub fn decode(c: &SpaceConfig, v: &Vector) -> Result<EpistemicState, SpaceError> {
    check_vector(c, v)?;
    decode_unchecked(c, v)
}

/// Canonical witness vector with `decode(c, encode(c, s)) = s`.
pub fn encode(c: &SpaceConfig, s: &EpistemicState) -> Result<Vector, SpaceError> {
    if s.size() != c.properties.size() {
        return Err(SpaceError::StateSize {
            expected: c.properties.size(),
            got: s.size(),
        });
    }
    match &c.encoding {
        Encoding::Binary { member, non_member } => Ok(Vector(
            (0..c.domain.n)
                .map(|i| if s.contains(i) { member.clone() } else { non_member.clone() })
                .collect(),
        )),
        Encoding::Example1 => {
            let pick = |a: (i64, i64), b: (i64, i64)| {
                Vector(vec![Rational::new(a.0, a.1), Rational::new(b.0, b.1)])
            };
            Ok(match (s.contains(0), s.contains(1)) {
                (false, false) => Vector::from_ints(&[10, 10]),
                (true, false) => pick((1, 4), (0, 1)),
                (false, true) => pick((3, 4), (1, 1)),
                (true, true) => pick((1, 2), (1, 2)),
            })
        }
    }
}

impl SpaceConfig {
    /// Looks up a registry space (`avg-strict-nonneg`, `avg-margin-unit(1/8)`,
    /// ...) over the given properties with `n = |P|`.
    pub fn named(name: &str, properties: PropertySpace) -> Result<SpaceConfig, SpaceError> {
        registry::build(name, properties)
    }

    /// Same space with a different dimension; encoders pad with non-members.
    pub fn with_dimension(mut self, n: usize) -> SpaceConfig {
        self.domain.n = n;
        self
    }

    pub fn with_semantics(mut self, semantics: Semantics) -> SpaceConfig {
        self.semantics = semantics;
        self
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    /// `Err` with every violation when [`validate_config`] fails.
    pub fn validated(self) -> Result<SpaceConfig, SpaceError> {
        let violations = validate_config(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(SpaceError::Invalid(violations))
        }
    }

    pub fn contains(&self, v: &Vector) -> Result<bool, SpaceError> {
        self.domain.contains(v)
    }

    pub fn check(&self, v: &Vector) -> Result<(), SpaceError> {
        check_vector(self, v)
    }
}

/// Sign of a score compared against a threshold, for the certified paths.
pub(crate) fn compare_score(s: &ScoreValue, t: &Rational) -> Result<Ordering, NumericError> {
    match s {
        ScoreValue::Exact(r) => Ok(r.cmp(t)),
        ScoreValue::Approx { .. } if t.is_zero() => s.sign(),
        ScoreValue::Approx { value, error_bound, .. } => {
            let shifted = ScoreValue::approx(value - t.to_f64(), error_bound.clone());
            shifted.sign()
        }
    }
}
