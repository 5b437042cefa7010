//! Epistemic states as sets of properties, and the logical reading in which
//! property `p_ω` records that world `ω` has been excluded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::logic::{
    models, AtomTable, Clause, Formula, KnowledgeBase, LogicError, World, DEFAULT_ATOM_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EpistemicError {
    #[error("state over {left} properties combined with state over {right}")]
    Mismatch { left: usize, right: usize },
    #[error("property index {index} outside a space of {size}")]
    OutOfRange { index: usize, size: usize },
    #[error("operation needs a logical property space")]
    NotLogical,
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// How a score is turned into membership: `> 0` or `>= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Strict,
    Weak,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Strict => "strict",
            Semantics::Weak => "weak",
        })
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Semantics::Strict),
            "weak" => Ok(Semantics::Weak),
            other => Err(format!("unknown semantics `{other}` (expected strict or weak)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropertyKind {
    /// Named properties; `p0, p1, ...` when no names are given.
    Abstract(Vec<String>),
    /// One property per world over these atoms.
    Logical(AtomTable),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropertySpace {
    size: usize,
    kind: PropertyKind,
}

impl PropertySpace {
    pub fn indexed(size: usize) -> Self {
        PropertySpace {
            size,
            kind: PropertyKind::Abstract((0..size).map(|i| format!("p{i}")).collect()),
        }
    }

    pub fn named<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        PropertySpace {
            size: names.len(),
            kind: PropertyKind::Abstract(names),
        }
    }

    pub fn logical(atoms: AtomTable) -> Result<Self, EpistemicError> {
        let size = atoms.world_count(DEFAULT_ATOM_CAP)?;
        Ok(PropertySpace {
            size,
            kind: PropertyKind::Logical(atoms),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> &PropertyKind {
        &self.kind
    }

    pub fn atoms(&self) -> Option<&AtomTable> {
        match &self.kind {
            PropertyKind::Logical(a) => Some(a),
            PropertyKind::Abstract(_) => None,
        }
    }

    /// Display name of property `i`; logical properties read `p[a=0 b=1]`.
    pub fn property_name(&self, i: usize) -> String {
        match &self.kind {
            PropertyKind::Abstract(names) => names[i].clone(),
            PropertyKind::Logical(atoms) => format!("p[{}]", atoms.describe(World(i))),
        }
    }

    /// Accepts an abstract name, `p<i>`, or (logically) the world index.
    pub fn property_index(&self, name: &str) -> Result<usize, EpistemicError> {
        if let PropertyKind::Abstract(names) = &self.kind {
            if let Some(i) = names.iter().position(|n| n == name) {
                return Ok(i);
            }
        }
        name.strip_prefix('p')
            .unwrap_or(name)
            .parse::<usize>()
            .ok()
            .filter(|i| *i < self.size)
            .ok_or_else(|| EpistemicError::UnknownProperty(name.to_string()))
    }

    pub fn empty_state(&self) -> EpistemicState {
        EpistemicState::new(self.size)
    }

    pub fn state_from_names<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<EpistemicState, EpistemicError> {
        let mut s = self.empty_state();
        for n in names {
            s.insert(self.property_index(n)?)?;
        }
        Ok(s)
    }

    pub fn render(&self, s: &EpistemicState) -> String {
        s.iter()
            .map(|i| self.property_name(i))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A subset of the property space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EpistemicState {
    members: BitSet,
}

impl EpistemicState {
    pub fn new(size: usize) -> Self {
        EpistemicState {
            members: BitSet::new(size),
        }
    }

    pub fn from_bitset(members: BitSet) -> Self {
        EpistemicState { members }
    }

    pub fn from_indices(
        size: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, EpistemicError> {
        let mut s = Self::new(size);
        for i in indices {
            s.insert(i)?;
        }
        Ok(s)
    }

    pub fn size(&self) -> usize {
        self.members.universe()
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn insert(&mut self, i: usize) -> Result<(), EpistemicError> {
        if i >= self.size() {
            return Err(EpistemicError::OutOfRange {
                index: i,
                size: self.size(),
            });
        }
        self.members.insert(i);
        Ok(())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset(&self, other: &EpistemicState) -> bool {
        self.members.is_subset(&other.members)
    }
}

impl fmt::Debug for EpistemicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "p{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for EpistemicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn union_states(
    s: &EpistemicState,
    t: &EpistemicState,
) -> Result<EpistemicState, EpistemicError> {
    if s.size() != t.size() {
        return Err(EpistemicError::Mismatch {
            left: s.size(),
            right: t.size(),
        });
    }
    Ok(EpistemicState {
        members: s.members.union(&t.members),
    })
}

/// Properties of the worlds a knowledge base rules out.
pub fn kb_to_state(kb: &KnowledgeBase) -> Result<EpistemicState, EpistemicError> {
    Ok(EpistemicState {
        members: models(kb, kb.atoms())?.complement(),
    })
}

/// One clause per excluded world; its models are exactly the remaining worlds.
pub fn state_to_kb(space: &PropertySpace, s: &EpistemicState) -> Result<KnowledgeBase, EpistemicError> {
    let atoms = space.atoms().ok_or(EpistemicError::NotLogical)?;
    check_size(space, s)?;
    let clauses = s
        .iter()
        .map(|w| Clause::excluding(World(w), atoms.len()))
        .collect();
    Ok(KnowledgeBase::new(atoms.clone(), clauses)?)
}

fn check_size(space: &PropertySpace, s: &EpistemicState) -> Result<(), EpistemicError> {
    if space.size() != s.size() {
        return Err(EpistemicError::Mismatch {
            left: space.size(),
            right: s.size(),
        });
    }
    Ok(())
}

/// Worlds not excluded by `s`.
pub fn remaining_worlds(space: &PropertySpace, s: &EpistemicState) -> Result<Vec<World>, EpistemicError> {
    space.atoms().ok_or(EpistemicError::NotLogical)?;
    check_size(space, s)?;
    Ok(s.members.complement().iter().map(World).collect())
}

/// True iff `f` holds in every world that `s` leaves open. Once a vector has
/// been decoded the strict and weak readings agree on this test, so no
/// semantics argument is needed here.
pub fn state_entails(
    space: &PropertySpace,
    s: &EpistemicState,
    f: &Formula,
) -> Result<bool, EpistemicError> {
    let atoms = space.atoms().ok_or(EpistemicError::NotLogical)?;
    if let Some(max) = f.max_atom() {
        if max >= atoms.len() {
            return Err(LogicError::UnknownAtom(format!("#{max}")).into());
        }
    }
    Ok(remaining_worlds(space, s)?
        .into_iter()
        .all(|w| crate::logic::eval_world(f, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitset::all_subsets;
    use crate::logic::{all_nonempty_clauses, oracle_entails, parse_formula, parse_kb, random_formula};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn logical(names: &[&str]) -> PropertySpace {
        PropertySpace::logical(AtomTable::new(names.iter().copied()).unwrap()).unwrap()
    }

    fn state(size: usize, ix: &[usize]) -> EpistemicState {
        EpistemicState::from_indices(size, ix.iter().copied()).unwrap()
    }

    #[test]
    fn union_examples() {
        assert_eq!(union_states(&state(3, &[0]), &state(3, &[1])).unwrap(), state(3, &[0, 1]));
        assert_eq!(union_states(&state(3, &[1]), &state(3, &[])).unwrap(), state(3, &[1]));
        assert_eq!(union_states(&state(3, &[0, 2]), &state(3, &[2])).unwrap(), state(3, &[0, 2]));
        assert!(matches!(
            union_states(&state(3, &[]), &state(4, &[])),
            Err(EpistemicError::Mismatch { .. })
        ));
    }

    #[test]
    fn kb_to_state_examples() {
        let kb = parse_kb("atoms: a b\na b\n").unwrap();
        assert_eq!(kb_to_state(&kb).unwrap(), state(4, &[0]));
        let kb = parse_kb("atoms: a b\n").unwrap();
        assert!(kb_to_state(&kb).unwrap().is_empty());
        let kb = parse_kb("atoms: a b\na\n-a\n").unwrap();
        assert_eq!(kb_to_state(&kb).unwrap().len(), 4);
    }

    #[test]
    fn state_entails_examples() {
        let space = logical(&["a", "b"]);
        let atoms = space.atoms().unwrap().clone();
        let b = parse_formula("b", &atoms).unwrap();
        let a = parse_formula("a", &atoms).unwrap();
        assert!(state_entails(&space, &state(4, &[0, 1]), &b).unwrap());
        assert!(!state_entails(&space, &state(4, &[0]), &a).unwrap());
        assert!(state_entails(&space, &state(4, &[0, 1, 2, 3]), &Formula::Bottom).unwrap());
        assert!(matches!(
            state_entails(&PropertySpace::indexed(4), &state(4, &[]), &a),
            Err(EpistemicError::NotLogical)
        ));
    }

    #[test]
    fn names_and_rendering() {
        let space = PropertySpace::named(["a", "b"]);
        assert_eq!(space.state_from_names(["b"]).unwrap(), state(2, &[1]));
        assert_eq!(space.property_index("p0").unwrap(), 0);
        assert!(space.property_index("c").is_err());
        let logical = logical(&["a", "b"]);
        assert_eq!(logical.render(&state(4, &[2])), "p[a=0 b=1]");
    }

    #[test]
    fn state_entailment_matches_oracle_exhaustively() {
        // every KB over up to two clauses of three atoms, against random formulas
        let atoms = AtomTable::new(["a", "b", "c"]).unwrap();
        let space = PropertySpace::logical(atoms.clone()).unwrap();
        let clauses = all_nonempty_clauses(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let formulas: Vec<Formula> = (0..40).map(|_| random_formula(&mut rng, 3, 3)).collect();
        for (i, c) in clauses.iter().enumerate() {
            for d in &clauses[i..] {
                let kb = KnowledgeBase::new(atoms.clone(), vec![c.clone(), d.clone()]).unwrap();
                let s = kb_to_state(&kb).unwrap();
                for f in &formulas {
                    assert_eq!(state_entails(&space, &s, f).unwrap(), oracle_entails(&kb, f).unwrap());
                }
            }
        }
    }

    #[test]
    fn state_to_kb_round_trips() {
        let space = logical(&["a", "b"]);
        for s in all_subsets(4).map(EpistemicState::from_bitset) {
            let kb = state_to_kb(&space, &s).unwrap();
            assert_eq!(kb_to_state(&kb).unwrap(), s);
        }
    }

    proptest! {
        #[test]
        fn union_entailment_matches_conjoined_kbs(s in 0u64..256, t in 0u64..256, seed in any::<u64>()) {
            let space = logical(&["a", "b", "c"]);
            let s = EpistemicState::from_bitset(BitSet::from_mask(8, s));
            let t = EpistemicState::from_bitset(BitSet::from_mask(8, t));
            let u = union_states(&s, &t).unwrap();
            let kb = state_to_kb(&space, &s).unwrap().conjoin(&state_to_kb(&space, &t).unwrap()).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = random_formula(&mut rng, 3, 3);
            prop_assert_eq!(state_entails(&space, &u, &f).unwrap(), oracle_entails(&kb, &f).unwrap());
            if state_entails(&space, &s, &f).unwrap() {
                prop_assert!(state_entails(&space, &u, &f).unwrap());
            }
        }
    }
}
