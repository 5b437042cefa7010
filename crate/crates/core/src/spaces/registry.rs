//! Named spaces. Parameterised names take their argument in parentheses:
//! `avg-margin-nonneg(1/2)`, `avg-margin-unit(1/8)`, `weighted-max-reals(3)`.

use super::{DomainKind, DomainX, Encoding, ScoringFamily, SpaceConfig, SpaceError};
use crate::epistemic::{PropertySpace, Semantics};
use crate::numeric::Rational;
use crate::pooling::PoolingOperator;

const NAMES: [&str; 14] = [
    "avg-strict-nonneg",
    "sum-strict-nonneg",
    "avg-weak-nonneg-step",
    "max-strict-reals",
    "max-weak-reals",
    "max-weak-nonpos",
    "had-strict-reals",
    "had-weak-reals",
    "had-weak-nonneg",
    "avg-margin-nonneg",
    "avg-margin-unit",
    "weighted-max-reals",
    "weighted-had-unit",
    "example1",
];

/// Base names of every registry space.
pub fn registry_names() -> &'static [&'static str] {
    &NAMES
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceName {
    pub base: String,
    pub param: Option<Rational>,
}

pub fn parse_space_name(name: &str) -> Result<SpaceName, SpaceError> {
    let name = name.trim();
    let Some(open) = name.find('(') else {
        return Ok(SpaceName {
            base: name.to_string(),
            param: None,
        });
    };
    let bad = |message: &str| SpaceError::BadParameter {
        name: name.to_string(),
        message: message.to_string(),
    };
    let inner = name[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| bad("missing `)`"))?;
    let param = inner.trim().parse::<Rational>().map_err(|e| bad(&e.to_string()))?;
    Ok(SpaceName {
        base: name[..open].to_string(),
        param: Some(param),
    })
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn binary(member: Rational, non_member: Rational) -> Encoding {
    Encoding::Binary { member, non_member }
}

pub(super) fn build(name: &str, properties: PropertySpace) -> Result<SpaceConfig, SpaceError> {
    use PoolingOperator::*;
    use Semantics::*;

    let parsed = parse_space_name(name)?;
    let base = parsed.base.as_str();
    let bad = |message: String| SpaceError::BadParameter {
        name: name.to_string(),
        message,
    };
    if !NAMES.contains(&base) {
        return Err(SpaceError::UnknownSpace(name.to_string()));
    }
    let parameterised = matches!(
        base,
        "avg-margin-nonneg" | "avg-margin-unit" | "weighted-max-reals" | "weighted-had-unit"
    );
    if parsed.param.is_some() && !parameterised {
        return Err(bad("this space takes no parameter".into()));
    }

    let p = properties.size();
    let plain = |op, sem, kind, family, encoding: Encoding| SpaceConfig {
        name: base.to_string(),
        operator: op,
        semantics: sem,
        domain: DomainX::new(kind, p),
        family,
        properties: properties.clone(),
        encoding,
        margin: None,
        levels: None,
    };
    let coord = ScoringFamily::Coordinate;

    let config = match base {
        "avg-strict-nonneg" => plain(Avg, Strict, DomainKind::Nonneg, coord, binary(r(1, 1), r(0, 1))),
        "sum-strict-nonneg" => plain(Sum, Strict, DomainKind::Nonneg, coord, binary(r(1, 1), r(0, 1))),
        "avg-weak-nonneg-step" => plain(
            Avg,
            Weak,
            DomainKind::Nonneg,
            ScoringFamily::StepAvgWeak,
            binary(r(1, 1), r(0, 1)),
        ),
        "max-strict-reals" => plain(Max, Strict, DomainKind::Reals, coord, binary(r(1, 1), r(-1, 1))),
        "max-weak-reals" => plain(Max, Weak, DomainKind::Reals, coord, binary(r(1, 1), r(-1, 1))),
        "max-weak-nonpos" => plain(Max, Weak, DomainKind::Nonpos, coord, binary(r(0, 1), r(-1, 1))),
        "had-strict-reals" => plain(
            Had,
            Strict,
            DomainKind::Reals,
            ScoringFamily::HadIndicator,
            binary(r(0, 1), r(1, 1)),
        ),
        "had-weak-reals" => plain(
            Had,
            Weak,
            DomainKind::Reals,
            ScoringFamily::HadNegSquare,
            binary(r(0, 1), r(1, 1)),
        ),
        "had-weak-nonneg" => plain(
            Had,
            Weak,
            DomainKind::Nonneg,
            ScoringFamily::HadNegCoord,
            binary(r(0, 1), r(1, 1)),
        ),
        "avg-margin-nonneg" => {
            let delta = parsed.param.clone().unwrap_or_else(Rational::one);
            if !delta.is_positive() {
                return Err(bad(format!("margin {delta} must be positive")));
            }
            SpaceConfig {
                name: format!("{base}({delta})"),
                margin: Some(delta.clone()),
                ..plain(Avg, Strict, DomainKind::Nonneg, coord, binary(delta, r(0, 1)))
            }
        }
        "avg-margin-unit" => {
            let eps = parsed
                .param
                .clone()
                .unwrap_or_else(|| r(1, 2 * p.max(1) as i64));
            if !eps.is_positive() || eps >= Rational::one() {
                return Err(bad(format!("epsilon {eps} must lie in (0, 1)")));
            }
            SpaceConfig {
                name: format!("{base}({eps})"),
                margin: Some(&Rational::one() - &eps),
                ..plain(Avg, Strict, DomainKind::UnitInterval, coord, binary(r(1, 1), r(0, 1)))
            }
        }
        "weighted-max-reals" => {
            let k = level_param(parsed.param.as_ref(), 2).map_err(bad)?;
            let top = &Rational::from_integer(i64::from(k)) - &r(1, 2);
            SpaceConfig {
                name: format!("{base}({k})"),
                levels: Some(k),
                ..plain(Max, Strict, DomainKind::Reals, coord, binary(top, r(-1, 2)))
            }
        }
        "weighted-had-unit" => {
            let k = level_param(parsed.param.as_ref(), 2).map_err(bad)?;
            if k != 2 {
                return Err(bad("the three-level unit-interval construction only exists for K = 2".into()));
            }
            SpaceConfig {
                name: format!("{base}(2)"),
                levels: Some(2),
                ..plain(
                    Had,
                    Strict,
                    DomainKind::UnitInterval,
                    ScoringFamily::WeightedHad01,
                    binary(r(0, 1), r(1, 1)),
                )
            }
        }
        "example1" => {
            if p != 2 {
                return Err(bad(format!("the two-disk space has exactly 2 properties, got {p}")));
            }
            SpaceConfig {
                properties: PropertySpace::named(["a", "b"]),
                domain: DomainX::new(DomainKind::Reals, 2),
                ..plain(Avg, Strict, DomainKind::Reals, ScoringFamily::Example1, Encoding::Example1)
            }
        }
        _ => unreachable!("checked against NAMES"),
    };
    Ok(config)
}

fn level_param(param: Option<&Rational>, default: u32) -> Result<u32, String> {
    match param {
        None => Ok(default),
        Some(k) => {
            let value = k.to_f64();
            if !k.is_integer() || !(1.0..=64.0).contains(&value) {
                return Err(format!("K = {k} must be an integer between 1 and 64"));
            }
            Ok(value as u32)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert_eq!(
            parse_space_name("avg-margin-unit(1/8)").unwrap(),
            SpaceName {
                base: "avg-margin-unit".into(),
                param: Some(r(1, 8))
            }
        );
        assert!(parse_space_name("avg-margin-unit(1/8").is_err());
        assert!(parse_space_name("avg-margin-unit(x)").is_err());
    }

    #[test]
    fn canonical_names() {
        let c = SpaceConfig::named("avg-margin-unit", PropertySpace::indexed(4)).unwrap();
        assert_eq!(c.name, "avg-margin-unit(1/8)");
        assert_eq!(c.margin, Some(r(7, 8)));
        let c = SpaceConfig::named("weighted-max-reals(3)", PropertySpace::indexed(2)).unwrap();
        assert_eq!(c.name, "weighted-max-reals(3)");
        assert_eq!(c.levels, Some(3));
        assert!(SpaceConfig::named("weighted-had-unit(3)", PropertySpace::indexed(2)).is_err());
        assert!(SpaceConfig::named("max-strict-reals(2)", PropertySpace::indexed(2)).is_err());
        assert!(matches!(
            SpaceConfig::named("nope", PropertySpace::indexed(2)),
            Err(SpaceError::UnknownSpace(_))
        ));
    }
}
