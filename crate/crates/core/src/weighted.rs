//! Weighted epistemic states: each property carries a certainty level in
//! `0..=K`, and sources combine by taking the most confident one.

use std::fmt;

use thiserror::Error;

use crate::bitset::BitSet;
use crate::epistemic::{EpistemicState, PropertySpace, Semantics};
use crate::numeric::{Rational, ScoreValue};
use crate::pooling::PoolingOperator;
use crate::spaces::{gamma_unchecked, ScoringFamily, SpaceConfig, SpaceError, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightedError {
    #[error("K must be at least 1")]
    ZeroLevels,
    #[error("level {level} of property {property} exceeds K = {k}")]
    LevelTooHigh { property: usize, level: u32, k: u32 },
    #[error("space {0} has no weighted encoder for this K")]
    Unsupported(String),
    #[error("state over {got} properties given to a space over {expected}")]
    Size { expected: usize, got: usize },
    #[error("score {0} has no exact value")]
    Inexact(String),
    #[error("malformed level list `{0}`")]
    Malformed(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedState {
    levels: Vec<u32>,
    k: u32,
}

impl WeightedState {
    pub fn new(levels: Vec<u32>, k: u32) -> Result<Self, WeightedError> {
        if k == 0 {
            return Err(WeightedError::ZeroLevels);
        }
        if let Some((property, &level)) = levels.iter().enumerate().find(|(_, l)| **l > k) {
            return Err(WeightedError::LevelTooHigh { property, level, k });
        }
        Ok(WeightedState { levels, k })
    }

    /// Parses `2,0,1`.
    pub fn parse(text: &str, k: u32) -> Result<Self, WeightedError> {
        let levels = text
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| WeightedError::Malformed(text.to_string()))?;
        Self::new(levels, k)
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Pointwise maximum of levels.
    pub fn combine(&self, other: &WeightedState) -> WeightedState {
        WeightedState {
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| *a.max(b))
                .collect(),
            k: self.k.max(other.k),
        }
    }

    /// Every state over `size` properties with levels in `0..=k`.
    pub fn all(size: usize, k: u32) -> impl Iterator<Item = WeightedState> {
        let base = u64::from(k) + 1;
        let total = base.pow(size as u32);
        (0..total).map(move |mut code| {
            let levels = (0..size)
                .map(|_| {
                    let l = (code % base) as u32;
                    code /= base;
                    l
                })
                .collect();
            WeightedState { levels, k }
        })
    }
}

impl fmt::Display for WeightedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.levels.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

fn clamp_level(x: &num_bigint::BigInt, k: u32) -> u32 {
    if x.sign() == num_bigint::Sign::Minus {
        0
    } else {
        u32::try_from(x).map_or(k, |v| v.min(k))
    }
}

/// Levels `max(0, min(K, ⌈γ⌉))` (strict) or `max(0, min(K, 1 + ⌊γ⌋))` (weak).
pub fn decode_weighted(
    c: &SpaceConfig,
    k: u32,
    v: &Vector,
    semantics: Semantics,
) -> Result<WeightedState, WeightedError> {
    if k == 0 {
        return Err(WeightedError::ZeroLevels);
    }
    c.check(v)?;
    let levels = (0..c.properties.size())
        .map(|i| match gamma_unchecked(c.family, i, v) {
            ScoreValue::Exact(g) => Ok(match semantics {
                Semantics::Strict => clamp_level(&g.ceil(), k),
                Semantics::Weak => clamp_level(&(g.floor() + 1), k),
            }),
            other => Err(WeightedError::Inexact(other.to_string())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WeightedState { levels, k })
}

enum Encoder {
    Max,
    HadUnit,
}

fn encoder(c: &SpaceConfig, k: u32) -> Result<Encoder, WeightedError> {
    let unsupported = || WeightedError::Unsupported(c.name.clone());
    if c.levels != Some(k) {
        return Err(unsupported());
    }
    match (c.operator, c.family) {
        (PoolingOperator::Max, ScoringFamily::Coordinate) => Ok(Encoder::Max),
        (PoolingOperator::Had, ScoringFamily::WeightedHad01) if k == 2 => Ok(Encoder::HadUnit),
        _ => Err(unsupported()),
    }
}

/// Max spaces: `e_i = μ(p_i) − 1/2`. Three-level Hadamard space: `0`, `1/2`
/// and `1` for levels 2, 1 and 0.
pub fn encode_weighted(c: &SpaceConfig, s: &WeightedState) -> Result<Vector, WeightedError> {
    let enc = encoder(c, s.k)?;
    if s.len() != c.properties.size() {
        return Err(WeightedError::Size {
            expected: c.properties.size(),
            got: s.len(),
        });
    }
    let half = Rational::new(1, 2);
    let coord = |level: u32| match enc {
        Encoder::Max => &Rational::from_integer(i64::from(level)) - &half,
        Encoder::HadUnit => match level {
            2 => Rational::zero(),
            1 => half.clone(),
            _ => Rational::one(),
        },
    };
    Ok(Vector(
        (0..c.n())
            .map(|i| coord(s.levels.get(i).copied().unwrap_or(0)))
            .collect(),
    ))
}

/// Rewrites weighted states over `P` as ordinary states over
/// `P♯ = {p♯i}`, where `p♯i` records that the level of `p` is not `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharpReduction {
    base: usize,
    k: u32,
}

impl SharpReduction {
    pub fn new(p: &PropertySpace, k: u32) -> Result<Self, WeightedError> {
        if k == 0 {
            return Err(WeightedError::ZeroLevels);
        }
        Ok(SharpReduction { base: p.size(), k })
    }

    pub fn extended_size(&self) -> usize {
        self.base * (self.k as usize + 1)
    }

    /// Index of `p♯i`.
    pub fn index(&self, p: usize, i: u32) -> usize {
        assert!(p < self.base && i <= self.k);
        p * (self.k as usize + 1) + i as usize
    }

    pub fn extended_space(&self) -> PropertySpace {
        PropertySpace::named((0..self.base).flat_map(|p| (0..=self.k).map(move |i| format!("p{p}#{i}"))))
    }

    /// `Q_(p,i) = {p♯j : j < i}`: all its members hold iff the level of `p`
    /// is at least `i`.
    pub fn query_set(&self, p: usize, i: u32) -> BitSet {
        BitSet::from_indices(self.extended_size(), (0..i).map(|j| self.index(p, j)))
    }

    /// `{p♯j : j < μ(p)}`.
    pub fn state_of(&self, s: &WeightedState) -> Result<EpistemicState, WeightedError> {
        if s.len() != self.base {
            return Err(WeightedError::Size {
                expected: self.base,
                got: s.len(),
            });
        }
        let mut out = BitSet::new(self.extended_size());
        for (p, &level) in s.levels.iter().enumerate() {
            for j in 0..level.min(self.k) {
                out.insert(self.index(p, j));
            }
        }
        Ok(EpistemicState::from_bitset(out))
    }

    /// Highest `i` with `Q_(p,i)` contained in the state, per property.
    pub fn levels_of(&self, s: &EpistemicState) -> WeightedState {
        let levels = (0..self.base)
            .map(|p| {
                (1..=self.k)
                    .take_while(|i| self.query_set(p, *i).is_subset(s.members()))
                    .last()
                    .unwrap_or(0)
            })
            .collect();
        WeightedState { levels, k: self.k }
    }
}
