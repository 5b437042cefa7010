//! Scores `γ_Q` for sets of properties and the formula checker `ψ_α`, whose
//! sign says whether the state encoded by a vector entails `α`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bitset::BitSet;
use crate::epistemic::{EpistemicError, Semantics};
use crate::logic::{models, Formula, LogicError};
use crate::numeric::{sigmoid_term_error_bound, NumericError, Rational, ScoreValue};
use crate::pooling::PoolingOperator;
use crate::spaces::{gamma_unchecked, satisfied, DomainKind, ScoringFamily, SpaceConfig, SpaceError, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntailmentError {
    #[error("scorer {scorer} cannot be used with space {space}")]
    Incompatible { space: String, scorer: String },
    #[error("vector {0} is not clear-cut, so the margin scorer makes no claim about it")]
    NotClearCut(String),
    #[error("property subset over {got} properties used with a space over {expected}")]
    SubsetSize { expected: usize, got: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Epistemic(#[from] EpistemicError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Sigmoid scorer parameters `μ − Σ σ(λ(Δ/2 − e_i))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigmoidParams {
    pub lambda: Rational,
    pub mu: Rational,
}

impl SigmoidParams {
    /// `μ = 1/2` and `λ = t/Δ` with `t = ⌈2(ln 2n + 1)⌉`. Then
    /// `σ(λΔ/2) ≥ μ` and `σ(−λΔ/2) < e^{-1}/(2n) < μ/k` for every `k ≤ n`.
    pub fn default_for(delta: &Rational, n: usize) -> Self {
        let t = (2.0 * ((2.0 * n.max(1) as f64).ln() + 1.0)).ceil() as i64;
        SigmoidParams {
            lambda: &Rational::from_integer(t) / delta,
            mu: Rational::new(1, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScorerFamily {
    /// `min_{q ∈ Q} γ_q`
    MinOfGammas,
    /// `Σ_{q ∈ Q} γ_q` for the two spaces where this is exact.
    LinearSum,
    /// `−Σ ReLU(−e_i)`
    ReluSum,
    /// `−Σ e_i²`
    SquaredSum,
    /// `μ − Σ σ(λ(Δ/2 − e_i))`; defaults from [`SigmoidParams::default_for`].
    SigmoidSum(Option<SigmoidParams>),
    /// `Δ − Σ ReLU(Δ − e_i)`
    MarginRelu,
    /// `Σ e_i − k + 1`
    MarginLinear,
}

impl ScorerFamily {
    pub fn all() -> [ScorerFamily; 7] {
        [
            ScorerFamily::MinOfGammas,
            ScorerFamily::LinearSum,
            ScorerFamily::ReluSum,
            ScorerFamily::SquaredSum,
            ScorerFamily::SigmoidSum(None),
            ScorerFamily::MarginRelu,
            ScorerFamily::MarginLinear,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScorerFamily::MinOfGammas => "minOfGammas",
            ScorerFamily::LinearSum => "linearSum",
            ScorerFamily::ReluSum => "reluSum",
            ScorerFamily::SquaredSum => "squaredSum",
            ScorerFamily::SigmoidSum(_) => "sigmoidSum",
            ScorerFamily::MarginRelu => "marginRelu",
            ScorerFamily::MarginLinear => "marginLinear",
        }
    }

    pub fn is_margin(&self) -> bool {
        matches!(
            self,
            ScorerFamily::SigmoidSum(_) | ScorerFamily::MarginRelu | ScorerFamily::MarginLinear
        )
    }
}

impl fmt::Display for ScorerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScorerFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "minOfGammas" | "min" => ScorerFamily::MinOfGammas,
            "linearSum" | "linear" => ScorerFamily::LinearSum,
            "reluSum" | "relu" => ScorerFamily::ReluSum,
            "squaredSum" | "squared" => ScorerFamily::SquaredSum,
            "sigmoidSum" | "sigmoid" => ScorerFamily::SigmoidSum(None),
            "marginRelu" | "margin-relu" => ScorerFamily::MarginRelu,
            "marginLinear" | "margin-linear" => ScorerFamily::MarginLinear,
            other => return Err(format!("unknown scorer `{other}`")),
        })
    }
}

/// Whether `fam` decides conjunctions correctly in space `c`.
pub fn compatible(c: &SpaceConfig, fam: &ScorerFamily) -> bool {
    use PoolingOperator::*;
    use Semantics::*;
    let coord = c.family == ScoringFamily::Coordinate;
    let margin_space = c.margin.is_some() && c.operator == Avg && c.semantics == Strict && coord;
    match fam {
        ScorerFamily::MinOfGammas => true,
        ScorerFamily::LinearSum => {
            (c.operator == Max && c.semantics == Weak && c.domain.kind == DomainKind::Nonpos && coord)
                || (c.operator == Had
                    && c.semantics == Weak
                    && c.domain.kind == DomainKind::Nonneg
                    && c.family == ScoringFamily::HadNegCoord)
        }
        ScorerFamily::ReluSum => {
            c.operator == Max
                && c.semantics == Weak
                && matches!(c.domain.kind, DomainKind::Reals | DomainKind::Nonpos)
                && (coord || c.family == ScoringFamily::ReluNegCoord)
        }
        ScorerFamily::SquaredSum => {
            c.operator == Had
                && c.semantics == Weak
                && c.domain.kind == DomainKind::Reals
                && c.family == ScoringFamily::HadNegSquare
        }
        ScorerFamily::SigmoidSum(_) | ScorerFamily::MarginRelu => margin_space,
        ScorerFamily::MarginLinear => margin_space && c.domain.kind == DomainKind::UnitInterval,
    }
}

fn require_compatible(c: &SpaceConfig, fam: &ScorerFamily) -> Result<(), EntailmentError> {
    if compatible(c, fam) {
        Ok(())
    } else {
        Err(EntailmentError::Incompatible {
            space: c.name.clone(),
            scorer: fam.to_string(),
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Score for the subset `q` (a set of property indices). The empty subset
/// scores `+1`. Margin scorers are only meaningful on clear-cut vectors; see
/// [`x_star_membership`].
pub fn gamma_q(
    c: &SpaceConfig,
    fam: &ScorerFamily,
    q: &BitSet,
    v: &Vector,
) -> Result<ScoreValue, EntailmentError> {
    require_compatible(c, fam)?;
    c.check(v)?;
    if q.universe() != c.properties.size() {
        return Err(EntailmentError::SubsetSize {
            expected: c.properties.size(),
            got: q.universe(),
        });
    }
    if q.is_empty() {
        return Ok(ScoreValue::Exact(Rational::one()));
    }
    let coords = || q.iter().map(|i| &v.0[i]);
    let exact = |r: Rational| Ok(ScoreValue::Exact(r));
    let delta = || c.margin.clone().unwrap_or_else(Rational::one);
    match fam {
        ScorerFamily::MinOfGammas => {
            let mut scores = q.iter().map(|i| gamma_unchecked(c.family, i, v));
            let first = scores.next().expect("q is nonempty");
            Ok(scores.try_fold(first, |acc, s| acc.min(s))?)
        }
        ScorerFamily::LinearSum => {
            let mut total = Rational::zero();
            for i in q.iter() {
                match gamma_unchecked(c.family, i, v) {
                    ScoreValue::Exact(r) => total = &total + &r,
                    ScoreValue::Approx { .. } => unreachable!("linear spaces have exact scores"),
                }
            }
            exact(total)
        }
        ScorerFamily::ReluSum => exact(coords().map(|x| x.clone().min(Rational::zero())).sum()),
        ScorerFamily::SquaredSum => exact(-coords().map(|x| x * x).sum::<Rational>()),
        ScorerFamily::MarginRelu => {
            let d = delta();
            let relu: Rational = coords().map(|x| (&d - x).max(Rational::zero())).sum();
            exact(&d - &relu)
        }
        ScorerFamily::MarginLinear => {
            let k = Rational::from_integer(q.len() as i64);
            exact(&(&coords().sum::<Rational>() - &k) + &Rational::one())
        }
        ScorerFamily::SigmoidSum(params) => {
            let d = delta();
            let params = params
                .clone()
                .unwrap_or_else(|| SigmoidParams::default_for(&d, c.properties.size()));
            let (lambda, half) = (params.lambda.to_f64(), d.to_f64() / 2.0);
            let total: f64 = coords().map(|x| sigmoid(lambda * (half - x.to_f64()))).sum();
            let bound = &sigmoid_term_error_bound() * &Rational::from_integer(q.len() as i64 + 1);
            Ok(ScoreValue::approx(params.mu.to_f64() - total, bound))
        }
    }
}

/// Every property score is `≤ 0` or `≥ Δ`.
pub fn x_star_membership(c: &SpaceConfig, delta: &Rational, v: &Vector) -> Result<bool, EntailmentError> {
    c.check(v)?;
    for i in 0..c.properties.size() {
        let s = gamma_unchecked(c.family, i, v);
        let ambiguous = match &s {
            ScoreValue::Exact(r) => r.is_positive() && r < delta,
            ScoreValue::Approx { .. } => {
                s.sign()? == std::cmp::Ordering::Greater && s.as_f64() < delta.to_f64()
            }
        };
        if ambiguous {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The properties `p_ω` for the worlds `ω` where `f` fails.
pub fn formula_subset(c: &SpaceConfig, f: &Formula) -> Result<BitSet, EntailmentError> {
    let atoms = c.properties.atoms().ok_or(EpistemicError::NotLogical)?;
    if let Some(max) = f.max_atom() {
        if max >= atoms.len() {
            return Err(LogicError::UnknownAtom(format!("#{max}")).into());
        }
    }
    Ok(models(&Formula::not(f.clone()), atoms)?)
}

/// `ψ_f(v)`: whether the state encoded by `v` entails `f`.
pub fn psi(c: &SpaceConfig, fam: &ScorerFamily, f: &Formula, v: &Vector) -> Result<bool, EntailmentError> {
    let q = formula_subset(c, f)?;
    if fam.is_margin() {
        let delta = c.margin.clone().unwrap_or_else(Rational::one);
        if !x_star_membership(c, &delta, v)? {
            return Err(EntailmentError::NotClearCut(v.to_string()));
        }
    }
    let score = gamma_q(c, fam, &q, v)?;
    Ok(satisfied(c.semantics, &score)?)
}
