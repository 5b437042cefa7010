//! Clausal knowledge bases and the `.kb` text format.
//!
//! ```text
//! # comment
//! atoms: a b c      optional, must precede every clause
//! a b               a ∨ b
//! -a c              ¬a ∨ c
//! F                 the empty clause (inconsistency)
//! ```
//!
//! Clauses containing a complementary pair (or the constant `T`) are dropped
//! with a warning. Without an `atoms:` directive the table is inferred from
//! the literals.

use std::collections::BTreeSet;
use std::fmt;

use super::{is_identifier, AtomTable, Clause, Literal, LogicError};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    atoms: AtomTable,
    clauses: Vec<Clause>,
}

impl KnowledgeBase {
    pub fn new(atoms: AtomTable, clauses: Vec<Clause>) -> Result<Self, LogicError> {
        let mut kb = KnowledgeBase {
            atoms,
            clauses: Vec::new(),
        };
        for c in clauses {
            kb.push(c)?;
        }
        Ok(kb)
    }

    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn push(&mut self, clause: Clause) -> Result<(), LogicError> {
        if let Some(bad) = clause.literals().find(|l| l.atom >= self.atoms.len()) {
            return Err(LogicError::UnknownAtom(format!("#{}", bad.atom)));
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Union of clause lists over a shared atom table.
    pub fn conjoin(&self, other: &KnowledgeBase) -> Result<KnowledgeBase, LogicError> {
        if self.atoms != other.atoms {
            return Err(LogicError::UnknownAtom(
                "knowledge bases over different atom tables".into(),
            ));
        }
        let mut out = self.clone();
        for c in &other.clauses {
            out.push(c.clone())?;
        }
        Ok(out)
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "atoms: {}", self.atoms.names().join(" "))?;
        for c in &self.clauses {
            writeln!(f, "{}", c.display(&self.atoms))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbWarning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for KbWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub fn parse_kb(text: &str) -> Result<KnowledgeBase, LogicError> {
    parse_kb_with_warnings(text).map(|(kb, _)| kb)
}

enum Entry {
    Clause(Vec<(String, bool)>),
    Empty,
}

pub fn parse_kb_with_warnings(text: &str) -> Result<(KnowledgeBase, Vec<KbWarning>), LogicError> {
    let mut declared: Option<AtomTable> = None;
    let mut entries: Vec<(usize, Entry)> = Vec::new();
    let mut warnings = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("atoms:") {
            if declared.is_some() || !entries.is_empty() {
                return Err(LogicError::MalformedLine {
                    line,
                    message: "`atoms:` must be the first directive".into(),
                });
            }
            declared = Some(AtomTable::new(rest.split_whitespace())?);
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens == ["F"] {
            entries.push((line, Entry::Empty));
            continue;
        }
        let mut lits = Vec::new();
        let mut tautology = false;
        for tok in tokens {
            let (negated, name) = match tok.strip_prefix('-') {
                Some(n) => (true, n),
                None => (false, tok),
            };
            match (negated, name) {
                (false, "T") | (true, "F") => tautology = true,
                (false, "F") | (true, "T") => {}
                _ if is_identifier(name) => lits.push((name.to_string(), !negated)),
                _ => {
                    return Err(LogicError::MalformedLine {
                        line,
                        message: format!("invalid literal `{tok}`"),
                    })
                }
            }
        }
        let names: BTreeSet<&str> = lits.iter().map(|(n, _)| n.as_str()).collect();
        let complementary = names.iter().any(|n| {
            lits.iter().any(|(m, p)| m == n && *p) && lits.iter().any(|(m, p)| m == n && !*p)
        });
        if tautology || complementary {
            warnings.push(KbWarning {
                line,
                message: format!("clause `{content}` is a tautology and was dropped"),
            });
            continue;
        }
        entries.push((line, if lits.is_empty() { Entry::Empty } else { Entry::Clause(lits) }));
    }

    let atoms = match declared {
        Some(t) => t,
        None => AtomTable::new(
            entries
                .iter()
                .flat_map(|(_, e)| match e {
                    Entry::Clause(l) => l.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
                    Entry::Empty => Vec::new(),
                })
                .collect::<BTreeSet<_>>(),
        )?,
    };

    let mut kb = KnowledgeBase {
        atoms,
        clauses: Vec::new(),
    };
    for (line, entry) in entries {
        let clause = match entry {
            Entry::Empty => Clause::empty(),
            Entry::Clause(lits) => {
                let mut resolved = Vec::new();
                for (name, positive) in lits {
                    let atom = kb.atoms.index_of(&name).ok_or_else(|| LogicError::MalformedLine {
                        line,
                        message: format!("undeclared atom `{name}`"),
                    })?;
                    resolved.push(Literal { atom, positive });
                }
                Clause::new(resolved).expect("tautologies filtered above")
            }
        };
        kb.clauses.push(clause);
    }
    Ok((kb, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declared_atoms() {
        let kb = parse_kb("atoms: a b c\na b\n-a c\n").unwrap();
        assert_eq!(kb.atoms().names(), ["a", "b", "c"]);
        assert_eq!(
            kb.clauses(),
            &[
                Clause::new([Literal::pos(0), Literal::pos(1)]).unwrap(),
                Clause::new([Literal::neg(0), Literal::pos(2)]).unwrap(),
            ]
        );
    }

    #[test]
    fn empty_file() {
        let kb = parse_kb("").unwrap();
        assert!(kb.clauses().is_empty());
        assert!(kb.atoms().is_empty());
        let kb = parse_kb("# only a comment\n\n").unwrap();
        assert!(kb.clauses().is_empty());
    }

    #[test]
    fn tautology_dropped_with_warning() {
        let (kb, warnings) = parse_kb_with_warnings("a -a\nb\n").unwrap();
        assert_eq!(kb.clauses().len(), 1);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].line, 1);
        // inferred table still only has the atoms of kept clauses
        assert_eq!(kb.atoms().names(), ["b"]);
    }

    #[test]
    fn empty_clause_is_kept() {
        let kb = parse_kb("atoms: a\nF\n").unwrap();
        assert_eq!(kb.clauses(), &[Clause::empty()]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_kb("atoms: a a\n"),
            Err(LogicError::DuplicateAtom(_))
        ));
        assert!(matches!(
            parse_kb("atoms: a\na b\n"),
            Err(LogicError::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(
            parse_kb("a\natoms: a\n"),
            Err(LogicError::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(
            parse_kb("a --b\n"),
            Err(LogicError::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn display_round_trip() {
        let kb = parse_kb("atoms: a b\na b\n-a b\nF\n").unwrap();
        assert_eq!(parse_kb(&kb.to_string()).unwrap(), kb);
    }
}
