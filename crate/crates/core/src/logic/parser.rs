//! Recursive-descent parser for propositional formulas.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! iff     := imp ( "<->" imp )*        left-associative
//! imp     := or ( "->" imp )?          right-associative
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "!" unary | primary
//! primary := "(" iff ")" | "T" | "F" | identifier
//! ```
//!
//! Error positions are 1-based character columns; end of input is reported
//! one past the last character.

use super::{AtomTable, Formula, LogicError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Bottom,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom `{s}`"),
            Tok::Top => "`T`".into(),
            Tok::Bottom => "`F`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> LogicError {
    LogicError::Syntax {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, LogicError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let pos = i + 1;
        let c = chars[i];
        let rest = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => out.push((Tok::Not, pos)),
            '&' => out.push((Tok::And, pos)),
            '|' => out.push((Tok::Or, pos)),
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            '-' if rest("->") => {
                out.push((Tok::Implies, pos));
                i += 1;
            }
            '<' if rest("<->") => {
                out.push((Tok::Iff, pos));
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "T" => Tok::Top,
                    "F" => Tok::Bottom,
                    _ => Tok::Ident(word),
                };
                out.push((tok, pos));
                continue;
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

/// Parse tree before atom resolution.
enum Raw {
    Atom(String),
    Top,
    Bottom,
    Not(Box<Raw>),
    Bin(Tok, Box<Raw>, Box<Raw>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn iff(&mut self) -> Result<Raw, LogicError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            lhs = Raw::Bin(Tok::Iff, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Raw, LogicError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Raw::Bin(Tok::Implies, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Raw, LogicError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Raw::Bin(Tok::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Raw, LogicError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::Bin(Tok::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Raw, LogicError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Raw::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Raw, LogicError> {
        let pos = self.pos();
        match self.bump().0 {
            Tok::Ident(name) => Ok(Raw::Atom(name)),
            Tok::Top => Ok(Raw::Top),
            Tok::Bottom => Ok(Raw::Bottom),
            Tok::LParen => {
                let inner = self.iff()?;
                let close = self.pos();
                match self.bump().0 {
                    Tok::RParen => Ok(inner),
                    other => Err(syntax(close, format!("expected `)`, found {}", other.describe()))),
                }
            }
            other => Err(syntax(pos, format!("expected a formula, found {}", other.describe()))),
        }
    }
}

fn parse_raw(text: &str) -> Result<Raw, LogicError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let raw = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.pos(),
            format!("unexpected {} after formula", p.peek().describe()),
        ));
    }
    Ok(raw)
}

fn collect_names(raw: &Raw, out: &mut Vec<String>) {
    match raw {
        Raw::Atom(name) => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        Raw::Top | Raw::Bottom => {}
        Raw::Not(f) => collect_names(f, out),
        Raw::Bin(_, a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
    }
}

fn resolve(raw: Raw, atoms: &AtomTable) -> Result<Formula, LogicError> {
    Ok(match raw {
        Raw::Atom(name) => Formula::Atom(
            atoms
                .index_of(&name)
                .ok_or(LogicError::UnknownAtom(name))?,
        ),
        Raw::Top => Formula::Top,
        Raw::Bottom => Formula::Bottom,
        Raw::Not(f) => Formula::not(resolve(*f, atoms)?),
        Raw::Bin(op, a, b) => {
            let (a, b) = (resolve(*a, atoms)?, resolve(*b, atoms)?);
            match op {
                Tok::And => Formula::and(a, b),
                Tok::Or => Formula::or(a, b),
                Tok::Implies => Formula::implies(a, b),
                Tok::Iff => Formula::iff(a, b),
                _ => unreachable!("only binary connectives reach Raw::Bin"),
            }
        }
    })
}

/// Parses `text` against a known atom table; unknown atoms are an error.
pub fn parse_formula(text: &str, atoms: &AtomTable) -> Result<Formula, LogicError> {
    resolve(parse_raw(text)?, atoms)
}

/// Parses `text`, collecting its atoms into a fresh (sorted) table.
pub fn parse_formula_collecting(text: &str) -> Result<(Formula, AtomTable), LogicError> {
    let raw = parse_raw(text)?;
    let mut names = Vec::new();
    collect_names(&raw, &mut names);
    let atoms = AtomTable::new(names)?;
    Ok((resolve(raw, &atoms)?, atoms))
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        Formula::Atom(_) | Formula::Top | Formula::Bottom => 6,
    }
}

fn write_formula(f: &Formula, atoms: &AtomTable, out: &mut String) {
    let child = |g: &Formula, parens: bool, out: &mut String| {
        if parens {
            out.push('(');
        }
        write_formula(g, atoms, out);
        if parens {
            out.push(')');
        }
    };
    let p = precedence(f);
    match f {
        Formula::Atom(i) => out.push_str(atoms.name(*i)),
        Formula::Top => out.push('T'),
        Formula::Bottom => out.push('F'),
        Formula::Not(g) => {
            out.push('!');
            child(g, precedence(g) < p, out);
        }
        Formula::Implies(a, b) => {
            child(a, precedence(a) <= p, out);
            out.push_str(" -> ");
            child(b, precedence(b) < p, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
            let sym = match f {
                Formula::And(..) => " & ",
                Formula::Or(..) => " | ",
                _ => " <-> ",
            };
            child(a, precedence(a) < p, out);
            out.push_str(sym);
            child(b, precedence(b) <= p, out);
        }
    }
}

/// Minimal-parenthesis rendering that parses back to the same tree.
pub fn pretty_print(f: &Formula, atoms: &AtomTable) -> String {
    let mut out = String::new();
    write_formula(f, atoms, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> AtomTable {
        AtomTable::new(["a", "b"]).unwrap()
    }

    #[test]
    fn implication_node() {
        let f = parse_formula("a -> b", &ab()).unwrap();
        assert_eq!(f, Formula::implies(Formula::Atom(0), Formula::Atom(1)));
    }

    #[test]
    fn precedence_and_associativity() {
        let t = ab();
        let f = parse_formula("!a & b | a -> b -> a <-> b", &t).unwrap();
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(
                    Formula::and(Formula::not(Formula::Atom(0)), Formula::Atom(1)),
                    Formula::Atom(0),
                ),
                Formula::implies(Formula::Atom(1), Formula::Atom(0)),
            ),
            Formula::Atom(1),
        );
        assert_eq!(f, expected);
        assert_eq!(pretty_print(&f, &t), "!a & b | a -> b -> a <-> b");
        let g = parse_formula("(a -> b) -> a", &t).unwrap();
        assert_eq!(pretty_print(&g, &t), "(a -> b) -> a");
    }

    #[test]
    fn syntax_error_positions() {
        match parse_formula("a ->", &ab()) {
            Err(LogicError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("(a & b", &ab()) {
            Err(LogicError::Syntax { position, .. }) => assert_eq!(position, 7),
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("a $ b", &ab()) {
            Err(LogicError::Syntax { position, .. }) => assert_eq!(position, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_formula("a b", &ab()), Err(LogicError::Syntax { position: 3, .. })));
    }

    #[test]
    fn unknown_atoms() {
        assert_eq!(
            parse_formula("a & c", &ab()),
            Err(LogicError::UnknownAtom("c".into()))
        );
        let (f, atoms) = parse_formula_collecting("zeta | alpha").unwrap();
        assert_eq!(atoms.names(), ["alpha", "zeta"]);
        assert_eq!(f, Formula::or(Formula::Atom(1), Formula::Atom(0)));
    }

    #[test]
    fn constants() {
        assert_eq!(parse_formula("T", &ab()).unwrap(), Formula::Top);
        assert_eq!(parse_formula("!F", &ab()).unwrap(), Formula::not(Formula::Bottom));
    }
}
