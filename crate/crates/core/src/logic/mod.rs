//! Propositional layer: atoms, worlds, clauses, formulas and the brute-force
//! entailment oracle that serves as ground truth for every embedding-level
//! check.
//!
//! Worlds are indexed canonically: atoms are sorted lexicographically and bit
//! `j` of a world index is the truth value of atom `j`. With two atoms `a, b`
//! world 1 is `a=1 b=0` and world 2 is `a=0 b=1`.

mod kb;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::bitset::BitSet;

pub use kb::{parse_kb, parse_kb_with_warnings, KbWarning, KnowledgeBase};
pub use parser::{parse_formula, parse_formula_collecting, pretty_print};

/// Largest atom count for which worlds are enumerated unless overridden.
pub const DEFAULT_ATOM_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("duplicate atom declaration `{0}`")]
    DuplicateAtom(String),
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("{atoms} atoms exceed the enumeration cap of {cap}")]
    AtomCapExceeded { atoms: usize, cap: usize },
}

/// Ordered, duplicate-free atom names; the order fixes world indexing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AtomTable {
    names: Vec<String>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "T"
        && name != "F"
}

impl AtomTable {
    /// Sorts the names; duplicates and non-identifiers are rejected.
    pub fn new<I, S>(names: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        for name in names {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(LogicError::InvalidAtom(name));
            }
            if !seen.insert(name.clone()) {
                return Err(LogicError::DuplicateAtom(name));
            }
        }
        Ok(AtomTable {
            names: seen.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    /// Number of worlds, `2^m`, after checking the enumeration cap.
    pub fn world_count(&self, cap: usize) -> Result<usize, LogicError> {
        if self.len() > cap || self.len() >= usize::BITS as usize - 1 {
            return Err(LogicError::AtomCapExceeded {
                atoms: self.len(),
                cap,
            });
        }
        Ok(1 << self.len())
    }

    pub fn worlds(&self, cap: usize) -> Result<impl Iterator<Item = World>, LogicError> {
        let n = self.world_count(cap)?;
        Ok((0..n).map(World))
    }

    /// `a=1 b=0` style rendering of a world.
    pub fn describe(&self, w: World) -> String {
        self.names
            .iter()
            .enumerate()
            .map(|(j, n)| format!("{n}={}", u8::from(w.value(j))))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A propositional interpretation: bit `j` is the value of atom `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub usize);

impl World {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn value(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: usize) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: usize) -> Self {
        Literal { atom, positive: false }
    }

    pub fn holds(self, w: World) -> bool {
        w.value(self.atom) == self.positive
    }
}

/// A disjunction of literals; the empty clause is the contradiction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    literals: BTreeSet<Literal>,
}

impl Clause {
    /// `None` when the literals contain a complementary pair (a tautology).
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Option<Self> {
        let literals: BTreeSet<Literal> = literals.into_iter().collect();
        let tautology = literals.iter().any(|l| {
            literals.contains(&Literal {
                atom: l.atom,
                positive: !l.positive,
            })
        });
        (!tautology).then_some(Clause { literals })
    }

    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_subset(&self, other: &Clause) -> bool {
        self.literals.is_subset(&other.literals)
    }

    pub fn holds(&self, w: World) -> bool {
        self.literals.iter().any(|l| l.holds(w))
    }

    /// The clause that is false exactly in `w`.
    pub fn excluding(w: World, atom_count: usize) -> Clause {
        Clause {
            literals: (0..atom_count)
                .map(|j| Literal {
                    atom: j,
                    positive: !w.value(j),
                })
                .collect(),
        }
    }

    pub fn to_formula(&self) -> Formula {
        self.literals
            .iter()
            .map(|l| {
                let a = Formula::Atom(l.atom);
                if l.positive {
                    a
                } else {
                    Formula::Not(Box::new(a))
                }
            })
            .reduce(|acc, f| Formula::Or(Box::new(acc), Box::new(f)))
            .unwrap_or(Formula::Bottom)
    }

    pub fn display<'a>(&'a self, atoms: &'a AtomTable) -> impl fmt::Display + 'a {
        ClauseDisplay { clause: self, atoms }
    }
}

struct ClauseDisplay<'a> {
    clause: &'a Clause,
    atoms: &'a AtomTable,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clause.is_empty() {
            return write!(f, "F");
        }
        let parts: Vec<String> = self
            .clause
            .literals
            .iter()
            .map(|l| {
                let sign = if l.positive { "" } else { "-" };
                format!("{sign}{}", self.atoms.name(l.atom))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Propositional formula over atom indices of a companion [`AtomTable`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(usize),
    Top,
    Bottom,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Largest atom index mentioned, if any.
    pub fn max_atom(&self) -> Option<usize> {
        match self {
            Formula::Atom(i) => Some(*i),
            Formula::Top | Formula::Bottom => None,
            Formula::Not(f) => f.max_atom(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.max_atom().max(b.max_atom())
            }
        }
    }
}

/// Standard satisfaction `w ⊨ f`.
pub fn eval_world(f: &Formula, w: World) -> bool {
    match f {
        Formula::Atom(i) => w.value(*i),
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Not(g) => !eval_world(g, w),
        Formula::And(a, b) => eval_world(a, w) && eval_world(b, w),
        Formula::Or(a, b) => eval_world(a, w) || eval_world(b, w),
        Formula::Implies(a, b) => !eval_world(a, w) || eval_world(b, w),
        Formula::Iff(a, b) => eval_world(a, w) == eval_world(b, w),
    }
}

/// Anything with a truth value per world.
pub trait Evaluate {
    fn holds(&self, w: World) -> bool;
}

impl Evaluate for Formula {
    fn holds(&self, w: World) -> bool {
        eval_world(self, w)
    }
}

impl Evaluate for Clause {
    fn holds(&self, w: World) -> bool {
        Clause::holds(self, w)
    }
}

impl Evaluate for KnowledgeBase {
    fn holds(&self, w: World) -> bool {
        self.clauses().iter().all(|c| c.holds(w))
    }
}

/// Models of `x` by exhaustive enumeration, as a set of world indices.
pub fn models<E: Evaluate + ?Sized>(x: &E, atoms: &AtomTable) -> Result<BitSet, LogicError> {
    models_with_cap(x, atoms, DEFAULT_ATOM_CAP)
}

pub fn models_with_cap<E: Evaluate + ?Sized>(
    x: &E,
    atoms: &AtomTable,
    cap: usize,
) -> Result<BitSet, LogicError> {
    let n = atoms.world_count(cap)?;
    Ok(BitSet::from_indices(
        n,
        (0..n).map(World).filter(|w| x.holds(*w)).map(World::index),
    ))
}

/// `kb ⊨ f`, i.e. `models(kb) ⊆ models(f)`. `f` must be built over `kb.atoms()`.
pub fn oracle_entails(kb: &KnowledgeBase, f: &Formula) -> Result<bool, LogicError> {
    let atoms = kb.atoms();
    Ok(models(kb, atoms)?.is_subset(&models(f, atoms)?))
}

/// Minimal clauses (under literal-set inclusion) that hold in every world of
/// `worlds`. Brute force over all `3^m` non-tautological clauses.
pub fn prime_implicates(atom_count: usize, worlds: &BitSet) -> Vec<Clause> {
    let mut implicates = Vec::new();
    let total = 3usize.pow(atom_count as u32);
    for code in 0..total {
        let mut c = code;
        let mut lits = Vec::new();
        for atom in 0..atom_count {
            match c % 3 {
                1 => lits.push(Literal::pos(atom)),
                2 => lits.push(Literal::neg(atom)),
                _ => {}
            }
            c /= 3;
        }
        let clause = Clause::new(lits).expect("one literal per atom");
        if worlds.iter().all(|w| clause.holds(World(w))) {
            implicates.push(clause);
        }
    }
    let mut primes: Vec<Clause> = implicates
        .iter()
        .filter(|c| !implicates.iter().any(|d| d != *c && d.is_subset(c)))
        .cloned()
        .collect();
    primes.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    primes
}

/// Every non-tautological, nonempty clause over `atom_count` atoms.
pub fn all_nonempty_clauses(atom_count: usize) -> Vec<Clause> {
    let total = 3usize.pow(atom_count as u32);
    (1..total)
        .map(|code| {
            let mut c = code;
            let mut lits = Vec::new();
            for atom in 0..atom_count {
                match c % 3 {
                    1 => lits.push(Literal::pos(atom)),
                    2 => lits.push(Literal::neg(atom)),
                    _ => {}
                }
                c /= 3;
            }
            Clause::new(lits).expect("one literal per atom")
        })
        .collect()
}

/// A random formula of depth at most `depth` over atoms `0..atom_count`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, atom_count: usize, depth: usize) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..10) {
        0 => Formula::Top,
        1 => Formula::Bottom,
        _ => Formula::Atom(rng.gen_range(0..atom_count.max(1))),
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(random_formula(rng, atom_count, depth - 1)),
        k => {
            let a = random_formula(rng, atom_count, depth - 1);
            let b = random_formula(rng, atom_count, depth - 1);
            match k {
                1 => Formula::and(a, b),
                2 => Formula::or(a, b),
                3 => Formula::implies(a, b),
                _ => Formula::iff(a, b),
            }
        }
    }
}
