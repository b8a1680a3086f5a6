use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A first-order formula over a relational signature.
///
/// Conjunction and disjunction are binary; long ones are right-nested by
/// [`Formula::conj`] and [`Formula::disj`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Eq(String, String),
    Rel(String, Vec<String>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn eq(a: impl Into<String>, b: impl Into<String>) -> Formula {
        Formula::Eq(a.into(), b.into())
    }

    pub fn rel<S: Into<String>>(
        symbol: impl Into<String>,
        args: impl IntoIterator<Item = S>,
    ) -> Formula {
        Formula::Rel(symbol.into(), args.into_iter().map(Into::into).collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a => b`, written as `(or (not a) b)`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    /// `v = v`, used where an empty conjunction is needed.
    pub fn truth(v: &str) -> Formula {
        Formula::eq(v, v)
    }

    /// `not (v = v)`, used where an empty disjunction is needed.
    pub fn falsity(v: &str) -> Formula {
        Formula::not(Formula::truth(v))
    }

    /// Right-nested conjunction; [`Formula::truth`] on `v` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>, v: &str) -> Formula {
        Self::fold(items, Formula::and).unwrap_or_else(|| Formula::truth(v))
    }

    /// Right-nested disjunction; [`Formula::falsity`] on `v` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>, v: &str) -> Formula {
        Self::fold(items, Formula::or).unwrap_or_else(|| Formula::falsity(v))
    }

    fn fold(
        items: impl IntoIterator<Item = Formula>,
        op: fn(Formula, Formula) -> Formula,
    ) -> Option<Formula> {
        let items: Vec<Formula> = items.into_iter().collect();
        items.into_iter().rev().reduce(|acc, f| op(f, acc))
    }

    pub fn exists_all(vars: &[String], f: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(f, |acc, v| Formula::exists(v.clone(), acc))
    }

    pub fn forall_all(vars: &[String], f: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(f, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Eq(a, b) => {
                    for v in [a, b] {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Rel(_, args) => {
                    out.extend(args.iter().filter(|v| !bound.contains(v)).cloned());
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Nesting depth of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::Not(g) => g.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + g.quantifier_depth(),
        }
    }

    /// Symbols of all relational atoms, with the arities they are used at.
    pub fn atoms(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |name, args| {
            out.insert((name.to_string(), args.len()));
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&str, &[String])) {
        match self {
            Formula::Eq(..) => {}
            Formula::Rel(name, args) => f(name, args),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Rebuilds the tree, replacing every relational atom through `f`.
    pub fn try_map_atoms(
        &self,
        f: &mut impl FnMut(&str, &[String]) -> Result<Formula>,
    ) -> Result<Formula> {
        Ok(match self {
            Formula::Eq(a, b) => Formula::Eq(a.clone(), b.clone()),
            Formula::Rel(name, args) => f(name, args)?,
            Formula::Not(g) => Formula::not(g.try_map_atoms(f)?),
            Formula::And(a, b) => Formula::and(a.try_map_atoms(f)?, b.try_map_atoms(f)?),
            Formula::Or(a, b) => Formula::or(a.try_map_atoms(f)?, b.try_map_atoms(f)?),
            Formula::Exists(v, g) => Formula::exists(v.clone(), g.try_map_atoms(f)?),
            Formula::Forall(v, g) => Formula::forall(v.clone(), g.try_map_atoms(f)?),
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Rel(name, args) => {
                write!(f, "(rel {name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v} {g})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Word(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push((i, Token::Open));
                chars.next();
            }
            ')' => {
                out.push((i, Token::Close));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut end = text.len();
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                out.push((start, Token::Word(&text[start..end])));
            }
        }
    }
    out
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect_open(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some((_, Token::Open)) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail("expected `(`"),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some((_, Token::Close)) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail("expected `)`"),
        }
    }

    fn word(&mut self, what: &str) -> Result<String> {
        match self.tokens.get(self.pos) {
            Some((_, Token::Word(w))) => {
                self.pos += 1;
                Ok(w.to_string())
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.expect_open()?;
        let head_at = self.pos;
        let Some(Token::Word(head)) = self.next() else {
            self.pos = head_at;
            return self.fail("expected a connective");
        };
        let f = match head {
            "=" => {
                let a = self.word("a variable")?;
                let b = self.word("a variable")?;
                Formula::Eq(a, b)
            }
            "rel" => {
                let name = self.word("a relation symbol")?;
                let mut args = Vec::new();
                while let Some((_, Token::Word(w))) = self.tokens.get(self.pos) {
                    args.push(w.to_string());
                    self.pos += 1;
                }
                if args.is_empty() {
                    return self.fail("relational atom without arguments");
                }
                Formula::Rel(name, args)
            }
            "not" => Formula::not(self.formula()?),
            "and" => {
                let a = self.formula()?;
                Formula::and(a, self.formula()?)
            }
            "or" => {
                let a = self.formula()?;
                Formula::or(a, self.formula()?)
            }
            "exists" => {
                let v = self.word("a variable")?;
                Formula::exists(v, self.formula()?)
            }
            "forall" => {
                let v = self.word("a variable")?;
                Formula::forall(v, self.formula()?)
            }
            other => {
                self.pos = head_at;
                return self.fail(format!("unknown connective `{other}`"));
            }
        };
        self.expect_close()?;
        Ok(f)
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(text: &str) -> Result<Formula> {
        let mut p = Parser {
            tokens: tokenize(text),
            pos: 0,
            len: text.len(),
        };
        let f = p.formula()?;
        if p.pos < p.tokens.len() {
            return p.fail("trailing input");
        }
        Ok(f)
    }
}
