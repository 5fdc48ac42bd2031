//! Policies as extended definite logic programs.
//!
//! A policy is a finite set of clauses `head <- b1, ..., bn.` over
//! propositional atoms. Atoms may carry strong negation (`~a`), which the
//! engine treats as a fresh atom distinct from `a`; inconsistency is the
//! derivation of a complementary pair.
//!
//! Functor syntax such as `woman(director(x))` is part of the atom's
//! canonical text. The variable `x` is never instantiated here: grounding to
//! concrete inputs happens through topic bindings.
//!
//! Concrete syntax:
//!
//! ```text
//! clause := atom "." | atom "<-" body "."
//! body   := atom ("," atom)*
//! atom   := ["~"] ident ["(" termlist ")"]
//! ident  := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! `%` starts a comment running to the end of the line.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A syntax error, located at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A propositional atom, possibly strongly negated.
///
/// Two atoms are equal iff their canonical text and negation flag agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    text: String,
    negated: bool,
}

impl Atom {
    /// Parses a single atom such as `woman(director(x))` or `~c`.
    pub fn parse(source: &str) -> Result<Atom, SyntaxError> {
        let mut parser = Parser::new(source);
        parser.skip_trivia();
        let atom = parser.atom()?;
        parser.skip_trivia();
        if let Some(c) = parser.peek() {
            return Err(parser.error(format!("unexpected '{c}' after atom")));
        }
        Ok(atom)
    }

    /// Canonical text without the negation marker.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// The outermost functor name, e.g. `woman` for `woman(director(x))`.
    pub fn predicate(&self) -> &str {
        self.text.split('(').next().unwrap_or(&self.text)
    }

    /// The strongly negated counterpart: `a` for `~a` and vice versa.
    pub fn complement(&self) -> Atom {
        Atom {
            text: self.text.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        f.write_str(&self.text)
    }
}

impl FromStr for Atom {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Atom::parse(s)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Atom::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// An extended definite clause. An empty body stands for `head <- ⊤`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    head: Atom,
    body: Vec<Atom>,
}

impl Clause {
    /// Builds a clause; duplicate body atoms are dropped, first occurrence kept.
    pub fn new(head: Atom, body: impl IntoIterator<Item = Atom>) -> Clause {
        let mut seen = BTreeSet::new();
        let body = body.into_iter().filter(|a| seen.insert(a.clone())).collect();
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Clause {
        Clause { head, body: Vec::new() }
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    /// Body atoms in source order.
    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" <- ")?;
            for (i, atom) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{atom}")?;
            }
        }
        f.write_str(".")
    }
}

/// A finite list of clauses together with the atoms they mention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    language: BTreeSet<Atom>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        let language = clauses
            .iter()
            .flat_map(|c| std::iter::once(&c.head).chain(c.body.iter()))
            .cloned()
            .collect();
        Program { clauses, language }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Every atom occurring in some clause.
    pub fn language(&self) -> &BTreeSet<Atom> {
        &self.language
    }

    /// This program extended with one fact per extra atom.
    pub fn with_facts<'a>(&self, facts: impl IntoIterator<Item = &'a Atom>) -> Program {
        let mut clauses = self.clauses.clone();
        clauses.extend(facts.into_iter().cloned().map(Clause::fact));
        Program::new(clauses)
    }
}

/// One clause per line, each terminated by a newline.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for clause in &self.clauses {
            writeln!(f, "{clause}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_policy(s)
    }
}

/// Parses policy source text into a [`Program`].
pub fn parse_policy(source: &str) -> Result<Program, SyntaxError> {
    let mut parser = Parser::new(source);
    let mut clauses = Vec::new();
    loop {
        parser.skip_trivia();
        if parser.peek().is_none() {
            break;
        }
        clauses.push(parser.clause()?);
    }
    Ok(Program::new(clauses))
}

/// Least model by forward chaining, with `~a` treated as an atom of its own.
///
/// Each clause keeps a count of body atoms not yet derived; a clause fires
/// when its count reaches zero, so every clause is visited once per body atom.
pub fn least_model(program: &Program) -> BTreeSet<Atom> {
    let clauses = program.clauses();
    let mut remaining: Vec<usize> = clauses.iter().map(|c| c.body.len()).collect();
    let mut watchers: HashMap<&Atom, Vec<usize>> = HashMap::new();
    for (i, clause) in clauses.iter().enumerate() {
        for atom in &clause.body {
            watchers.entry(atom).or_default().push(i);
        }
    }

    let mut model: BTreeSet<Atom> = BTreeSet::new();
    let mut queue: VecDeque<&Atom> = clauses.iter().filter(|c| c.is_fact()).map(|c| &c.head).collect();
    while let Some(atom) = queue.pop_front() {
        if !model.insert(atom.clone()) {
            continue;
        }
        for &i in watchers.get(atom).map(Vec::as_slice).unwrap_or_default() {
            remaining[i] -= 1;
            if remaining[i] == 0 {
                queue.push_back(&clauses[i].head);
            }
        }
    }
    model
}

/// True iff `program` plus a fact for each extra atom derives no pair `a`, `~a`.
pub fn is_consistent<'a>(program: &Program, extra_atoms: impl IntoIterator<Item = &'a Atom>) -> bool {
    let model = least_model(&program.with_facts(extra_atoms));
    model
        .iter()
        .filter(|a| a.is_negated())
        .all(|a| !model.contains(&a.complement()))
}

struct Parser<'s> {
    chars: std::iter::Peekable<std::str::Chars<'s>>,
    line: usize,
    column: usize,
}

impl<'s> Parser<'s> {
    fn new(source: &'s str) -> Self {
        Parser {
            chars: source.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn clause(&mut self) -> Result<Clause, SyntaxError> {
        let head = self.atom()?;
        self.skip_trivia();
        let mut body = Vec::new();
        match self.peek() {
            Some('.') => {}
            Some('<') => {
                self.bump();
                if self.peek() != Some('-') {
                    return Err(self.error("expected '<-'"));
                }
                self.bump();
                loop {
                    self.skip_trivia();
                    body.push(self.atom()?);
                    self.skip_trivia();
                    match self.peek() {
                        Some(',') => {
                            self.bump();
                        }
                        Some('.') => break,
                        None => return Err(self.error("unterminated clause: expected '.'")),
                        Some(c) => return Err(self.error(format!("expected ',' or '.', found '{c}'"))),
                    }
                }
            }
            None => return Err(self.error("unterminated clause: expected '.'")),
            Some(c) => return Err(self.error(format!("expected '<-' or '.', found '{c}'"))),
        }
        self.bump(); // '.'
        Ok(Clause::new(head, body))
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let negated = if self.peek() == Some('~') {
            self.bump();
            self.skip_trivia();
            true
        } else {
            false
        };
        let mut text = String::new();
        self.term(&mut text)?;
        Ok(Atom { text, negated })
    }

    fn term(&mut self, out: &mut String) -> Result<(), SyntaxError> {
        self.ident(out)?;
        self.skip_trivia();
        if self.peek() != Some('(') {
            return Ok(());
        }
        self.bump();
        out.push('(');
        loop {
            self.skip_trivia();
            self.term(out)?;
            self.skip_trivia();
            match self.peek() {
                Some(',') => {
                    self.bump();
                    out.push(',');
                }
                Some(')') => {
                    self.bump();
                    out.push(')');
                    return Ok(());
                }
                None => return Err(self.error("unbalanced parentheses: expected ')'")),
                Some(c) => return Err(self.error(format!("expected ',' or ')', found '{c}'"))),
            }
        }
    }

    fn ident(&mut self, out: &mut String) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            Some(')') => return Err(self.error("unbalanced parentheses: unexpected ')'")),
            Some(c) => return Err(self.error(format!("bad identifier: unexpected '{c}'"))),
            None => return Err(self.error("unexpected end of input: expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    fn atoms(list: &[&str]) -> BTreeSet<Atom> {
        list.iter().map(|s| atom(s)).collect()
    }

    #[test]
    fn parses_running_example_clause() {
        let p = parse_policy("highVariety(x) <- woman(director(x)), independent(type(x)), action(genre(x)).").unwrap();
        assert_eq!(p.clauses().len(), 1);
        let c = &p.clauses()[0];
        assert_eq!(c.head(), &atom("highVariety(x)"));
        assert_eq!(c.body().len(), 3);
        assert_eq!(c.body()[0].text(), "woman(director(x))");
        assert_eq!(c.body()[0].predicate(), "woman");
    }

    #[test]
    fn empty_source_is_empty_program() {
        let p = parse_policy("").unwrap();
        assert!(p.clauses().is_empty());
        assert!(p.language().is_empty());
    }

    #[test]
    fn three_statement_source() {
        let p = parse_policy("a. b <- a. ~c <- b.").unwrap();
        assert_eq!(p.clauses().len(), 3);
        assert_eq!(p.language(), &atoms(&["a", "b", "~c"]));
        assert_eq!(p.to_string(), "a.\nb <- a.\n~c <- b.\n");
        assert_eq!(parse_policy(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn whitespace_and_comments_are_ignored() {
        let p = parse_policy("% policy\nf( g ( x ) , y ) <- ~ h .  % trailing\n").unwrap();
        assert_eq!(p.to_string(), "f(g(x),y) <- ~h.\n");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_policy("a <- b").unwrap_err();
        assert!(e.message.contains("unterminated"), "{e}");
        let e = parse_policy("a.\n1b.").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.message.contains("bad identifier"));
        let e = parse_policy("f(x.").unwrap_err();
        assert!(e.message.contains("expected ',' or ')'"), "{e}");
        let e = parse_policy("f(x").unwrap_err();
        assert!(e.message.contains("unbalanced"), "{e}");
        assert!(parse_policy("a <- .").is_err());
        assert!(parse_policy("a b.").is_err());
    }

    #[test]
    fn least_model_examples() {
        assert!(least_model(&Program::default()).is_empty());
        let p = parse_policy("a. b <- a.").unwrap();
        assert_eq!(least_model(&p), atoms(&["a", "b"]));
        let p = parse_policy("b <- a.").unwrap();
        assert!(least_model(&p).is_empty());
    }

    #[test]
    fn negated_atoms_are_distinct() {
        let p = parse_policy("~a. b <- a.").unwrap();
        assert_eq!(least_model(&p), atoms(&["~a"]));
    }

    #[test]
    fn consistency_examples() {
        assert!(is_consistent(&Program::default(), &atoms(&["a"])));
        let p = parse_policy("~a <- b.").unwrap();
        assert!(!is_consistent(&p, &atoms(&["a", "b"])));
        let p = parse_policy("highVariety(x) <- woman(director(x)), independent(type(x)), action(genre(x)).").unwrap();
        let extra = atoms(&["woman(director(x))", "independent(type(x))", "action(genre(x))"]);
        assert!(is_consistent(&p, &extra));
        let mut model_input = p.with_facts(&extra);
        assert!(least_model(&model_input).contains(&atom("highVariety(x)")));
        model_input = model_input.with_facts(&atoms(&["~highVariety(x)"]));
        assert!(!is_consistent(&model_input, &BTreeSet::new()));
    }

    #[test]
    fn duplicate_body_atoms_collapse() {
        let p = parse_policy("a <- b, b, c.").unwrap();
        assert_eq!(p.clauses()[0].body().len(), 2);
    }
}
