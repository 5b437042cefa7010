//! The four pooling operators and checkers for the pooling principle
//! `Γ(e ⋄ f) = Γ(e) ∪ Γ(f)` and its weighted form.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::epistemic::Semantics;
use crate::numeric::Rational;
use crate::spaces::{compare_score, decode_unchecked, gamma_unchecked, SpaceConfig, SpaceError, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolingOperator {
    Avg,
    Sum,
    Max,
    Had,
}

impl PoolingOperator {
    pub const ALL: [PoolingOperator; 4] = [
        PoolingOperator::Avg,
        PoolingOperator::Sum,
        PoolingOperator::Max,
        PoolingOperator::Had,
    ];

    fn combine(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            PoolingOperator::Avg => &(a + b) / &Rational::from_integer(2),
            PoolingOperator::Sum => a + b,
            PoolingOperator::Max => a.clone().max(b.clone()),
            PoolingOperator::Had => a * b,
        }
    }
}

impl fmt::Display for PoolingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolingOperator::Avg => "avg",
            PoolingOperator::Sum => "sum",
            PoolingOperator::Max => "max",
            PoolingOperator::Had => "had",
        })
    }
}

impl FromStr for PoolingOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "avg" => Ok(PoolingOperator::Avg),
            "sum" => Ok(PoolingOperator::Sum),
            "max" => Ok(PoolingOperator::Max),
            "had" => Ok(PoolingOperator::Had),
            other => Err(format!("unknown pooling operator `{other}`")),
        }
    }
}

fn same_dim(v: &Vector, w: &Vector) -> Result<(), SpaceError> {
    if v.dim() != w.dim() {
        return Err(SpaceError::Dimension {
            expected: v.dim(),
            got: w.dim(),
        });
    }
    Ok(())
}

/// Componentwise `e ⋄ f`.
pub fn pool(op: PoolingOperator, v: &Vector, w: &Vector) -> Result<Vector, SpaceError> {
    same_dim(v, w)?;
    Ok(Vector(
        v.0.iter().zip(&w.0).map(|(a, b)| op.combine(a, b)).collect(),
    ))
}

/// Pools any number of vectors. Averaging takes the arithmetic mean of all
/// inputs; the other operators fold left.
pub fn pool_many(op: PoolingOperator, vs: &[Vector]) -> Result<Vector, SpaceError> {
    let (first, rest) = vs
        .split_first()
        .ok_or_else(|| SpaceError::File("nothing to pool".into()))?;
    if op == PoolingOperator::Avg {
        let mut acc = first.clone();
        for v in rest {
            acc = pool(PoolingOperator::Sum, &acc, v)?;
        }
        return Ok(acc.scale(&Rational::new(1, vs.len() as i64)));
    }
    rest.iter().try_fold(first.clone(), |acc, v| pool(op, &acc, v))
}

/// Pools inside a configured space, rejecting inputs or results outside `X`.
pub fn pool_in(c: &SpaceConfig, v: &Vector, w: &Vector) -> Result<Vector, SpaceError> {
    c.check(v)?;
    c.check(w)?;
    let out = pool(c.operator, v, w)?;
    c.check(&out)?;
    Ok(out)
}

/// A pair of vectors on which pooling and union disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: usize,
    /// Certainty level for weighted checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub left: Vector,
    pub right: Vector,
    pub pooled: Vector,
    /// Membership according to the union of the inputs' states.
    pub expected: bool,
    /// Membership according to the pooled vector.
    pub observed: bool,
    pub semantics: Semantics,
}

impl Violation {
    /// Re-runs the check on the recorded pair; `true` when the same
    /// discrepancy appears again.
    pub fn replay(&self, c: &SpaceConfig) -> Result<bool, SpaceError> {
        let found = match self.level {
            None => check_principle(c, &self.left, &self.right)?,
            Some(_) => check_weighted_principle(c, c.levels.unwrap_or(1), &self.left, &self.right)?,
        };
        Ok(found.as_ref() == Some(self))
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let member = |b: bool| if b { "in" } else { "not in" };
        write!(f, "p{}", self.property)?;
        if let Some(i) = self.level {
            write!(f, " at level {i}")?;
        }
        write!(
            f,
            ": e = {}, f = {}, pooled = {}; union says {}, pooled says {} ({})",
            self.left,
            self.right,
            self.pooled,
            member(self.expected),
            member(self.observed),
            self.semantics
        )
    }
}

/// First property (ascending) where `Γ(v ⋄ w)` and `Γ(v) ∪ Γ(w)` differ.
pub fn check_principle(
    c: &SpaceConfig,
    v: &Vector,
    w: &Vector,
) -> Result<Option<Violation>, SpaceError> {
    let pooled = pool_in(c, v, w)?;
    let (sv, sw, sp) = (
        decode_unchecked(c, v)?,
        decode_unchecked(c, w)?,
        decode_unchecked(c, &pooled)?,
    );
    Ok((0..c.properties.size())
        .find(|i| (sv.contains(*i) || sw.contains(*i)) != sp.contains(*i))
        .map(|i| Violation {
            property: i,
            level: None,
            left: v.clone(),
            right: w.clone(),
            expected: sv.contains(i) || sw.contains(i),
            observed: sp.contains(i),
            pooled,
            semantics: c.semantics,
        }))
}

/// Level test `γ > i − 1` (strict) or `γ ≥ i − 1` (weak).
pub(crate) fn level_holds(
    c: &SpaceConfig,
    p: usize,
    i: u32,
    v: &Vector,
) -> Result<bool, SpaceError> {
    let t = Rational::from_integer(i64::from(i) - 1);
    let ord = compare_score(&gamma_unchecked(c.family, p, v), &t)?;
    Ok(match c.semantics {
        Semantics::Strict => ord == Ordering::Greater,
        Semantics::Weak => ord != Ordering::Less,
    })
}

/// Weighted principle for levels `1..=k`, scanning properties then levels in
/// ascending order.
pub fn check_weighted_principle(
    c: &SpaceConfig,
    k: u32,
    v: &Vector,
    w: &Vector,
) -> Result<Option<Violation>, SpaceError> {
    let pooled = pool_in(c, v, w)?;
    for p in 0..c.properties.size() {
        for i in 1..=k {
            let expected = level_holds(c, p, i, v)? || level_holds(c, p, i, w)?;
            let observed = level_holds(c, p, i, &pooled)?;
            if expected != observed {
                return Ok(Some(Violation {
                    property: p,
                    level: Some(i),
                    left: v.clone(),
                    right: w.clone(),
                    pooled,
                    expected,
                    observed,
                    semantics: c.semantics,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epistemic::PropertySpace;
    use proptest::prelude::*;

    fn v(s: &str) -> Vector {
        Vector::parse(s).unwrap()
    }

    fn space(name: &str, p: usize) -> SpaceConfig {
        SpaceConfig::named(name, PropertySpace::indexed(p)).unwrap()
    }

    #[test]
    fn pool_examples() {
        assert_eq!(pool(PoolingOperator::Avg, &v("1/4 0"), &v("3/4 1")).unwrap(), v("1/2 1/2"));
        assert_eq!(pool(PoolingOperator::Max, &v("1 -1"), &v("-1 1")).unwrap(), v("1 1"));
        assert_eq!(pool(PoolingOperator::Had, &v("0 1 1 1"), &v("1 0 1 1")).unwrap(), v("0 0 1 1"));
        assert!(pool(PoolingOperator::Sum, &v("1"), &v("1 2")).is_err());
    }

    #[test]
    fn pool_many_examples() {
        assert_eq!(
            pool_many(PoolingOperator::Max, &[v("1 -1"), v("-1 1"), v("-1 -1")]).unwrap(),
            v("1 1")
        );
        assert_eq!(
            pool_many(PoolingOperator::Avg, &[v("1 0 0"), v("0 1 0"), v("0 0 1")]).unwrap(),
            v("1/3 1/3 1/3")
        );
        assert_eq!(pool_many(PoolingOperator::Sum, &[v("1 0")]).unwrap(), v("1 0"));
        assert!(pool_many(PoolingOperator::Sum, &[]).is_err());
    }

    #[test]
    fn two_disk_pairs() {
        let c = space("example1", 2);
        assert_eq!(check_principle(&c, &v("1/4 0"), &v("3/4 1")).unwrap(), None);
        let bad = check_principle(&c, &v("1/4 0"), &v("10 10")).unwrap().unwrap();
        assert_eq!(bad.property, 0);
        assert!(bad.expected && !bad.observed);
        assert!(bad.replay(&c).unwrap());
    }

    #[test]
    fn pool_in_rejects_outside_points() {
        let c = space("avg-strict-nonneg", 2);
        assert!(matches!(
            check_principle(&c, &v("-1 0"), &v("1 0")),
            Err(SpaceError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn weighted_examples() {
        let c = space("weighted-max-reals(2)", 2);
        // levels (2,0) and (1,1)
        let e = v("3/2 -1/2");
        let f = v("1/2 1/2");
        assert_eq!(check_weighted_principle(&c, 2, &e, &f).unwrap(), None);
        let c = space("weighted-had-unit", 2);
        assert_eq!(check_weighted_principle(&c, 2, &v("0 1/2"), &v("1 1/2")).unwrap(), None);
        let c = space("weighted-max-reals(3)", 2);
        assert_eq!(check_weighted_principle(&c, 3, &e, &e).unwrap(), None);
    }

    #[test]
    fn weighted_violation_replays() {
        // averaging with the coordinate score breaks level thresholds
        let mut c = space("weighted-max-reals(2)", 1);
        c.operator = PoolingOperator::Avg;
        let bad = check_weighted_principle(&c, 2, &v("3/2"), &v("-1/2")).unwrap().unwrap();
        assert_eq!((bad.property, bad.level), (0, Some(2)));
        assert!(bad.replay(&c).unwrap());
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-6i64..=6, 1i64..=3).prop_map(|(n, d)| Rational::new(n, d))
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        proptest::collection::vec(small(), 3).prop_map(Vector)
    }

    proptest! {
        #[test]
        fn commutative(a in vec3(), b in vec3()) {
            for op in PoolingOperator::ALL {
                prop_assert_eq!(pool(op, &a, &b).unwrap(), pool(op, &b, &a).unwrap());
            }
        }

        #[test]
        fn associative_except_avg(a in vec3(), b in vec3(), c in vec3()) {
            for op in [PoolingOperator::Sum, PoolingOperator::Max, PoolingOperator::Had] {
                let left = pool(op, &pool(op, &a, &b).unwrap(), &c).unwrap();
                let right = pool(op, &a, &pool(op, &b, &c).unwrap()).unwrap();
                prop_assert_eq!(left, right);
            }
        }

        #[test]
        fn max_idempotent_and_had_absorbs_zero(a in vec3(), b in vec3()) {
            prop_assert_eq!(pool(PoolingOperator::Max, &a, &a).unwrap(), a.clone());
            let h = pool(PoolingOperator::Had, &a, &b).unwrap();
            for (x, y) in a.0.iter().zip(&h.0) {
                if x.is_zero() {
                    prop_assert!(y.is_zero());
                }
            }
        }
    }
}
