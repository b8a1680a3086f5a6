use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::Formula;
use crate::structure::Structure;

/// Variable assignment for free variables.
pub type Assignment = BTreeMap<String, usize>;

// Variables resolved to slots and symbols to signature indices; nested
// conjunctions and disjunctions are flattened.
enum Node {
    Eq(usize, usize),
    Rel(usize, Vec<usize>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
}

struct Resolver<'a> {
    y: &'a Structure,
    scope: Vec<(&'a str, usize)>,
    slots: usize,
}

impl<'a> Resolver<'a> {
    fn var(&self, v: &str) -> Result<usize> {
        self.scope
            .iter()
            .rev()
            .find(|(name, _)| *name == v)
            .map(|&(_, slot)| slot)
            .ok_or_else(|| Error::UnboundVariable(v.to_string()))
    }

    fn resolve(&mut self, f: &'a Formula) -> Result<Node> {
        Ok(match f {
            Formula::Eq(a, b) => Node::Eq(self.var(a)?, self.var(b)?),
            Formula::Rel(name, args) => {
                let sig = self.y.signature();
                let idx = sig
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                let arity = sig.symbols()[idx].arity;
                if arity != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: name.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                Node::Rel(
                    idx,
                    args.iter().map(|a| self.var(a)).collect::<Result<_>>()?,
                )
            }
            Formula::Not(g) => Node::Not(Box::new(self.resolve(g)?)),
            Formula::And(..) => {
                let mut parts = Vec::new();
                self.flatten(f, true, &mut parts)?;
                Node::And(parts)
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                self.flatten(f, false, &mut parts)?;
                Node::Or(parts)
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((v, slot));
                let body = Box::new(self.resolve(g)?);
                self.scope.pop();
                if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slot, body)
                } else {
                    Node::Forall(slot, body)
                }
            }
        })
    }

    fn flatten(&mut self, f: &'a Formula, conj: bool, out: &mut Vec<Node>) -> Result<()> {
        let mut cur = f;
        loop {
            match (cur, conj) {
                (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                    self.flatten(a, conj, out)?;
                    cur = b;
                }
                _ => {
                    out.push(self.resolve(cur)?);
                    return Ok(());
                }
            }
        }
    }
}

fn run(node: &Node, y: &Structure, env: &mut [usize], buf: &mut Vec<usize>) -> bool {
    match node {
        Node::Eq(a, b) => env[*a] == env[*b],
        Node::Rel(idx, args) => {
            let start = buf.len();
            buf.extend(args.iter().map(|&s| env[s]));
            let holds = y.holds(*idx, &buf[start..]);
            buf.truncate(start);
            holds
        }
        Node::Not(g) => !run(g, y, env, buf),
        Node::And(parts) => parts.iter().all(|p| run(p, y, env, buf)),
        Node::Or(parts) => parts.iter().any(|p| run(p, y, env, buf)),
        Node::Exists(slot, g) => (0..y.size()).any(|e| {
            env[*slot] = e;
            run(g, y, env, buf)
        }),
        Node::Forall(slot, g) => (0..y.size()).all(|e| {
            env[*slot] = e;
            run(g, y, env, buf)
        }),
    }
}

/// Tarskian truth of `f` in `y` under `assignment`.
pub fn eval_formula(f: &Formula, y: &Structure, assignment: &Assignment) -> Result<bool> {
    if let Some((v, &e)) = assignment.iter().find(|(_, &e)| e >= y.size()) {
        return Err(Error::Domain(format!(
            "`{v}` assigned {e}, outside domain of size {}",
            y.size()
        )));
    }
    let mut resolver = Resolver {
        y,
        scope: Vec::new(),
        slots: 0,
    };
    let mut env = Vec::new();
    for (v, &e) in assignment {
        resolver.scope.push((v.as_str(), resolver.slots));
        resolver.slots += 1;
        env.push(e);
    }
    let node = resolver.resolve(f)?;
    env.resize(resolver.slots, 0);
    Ok(run(&node, y, &mut env, &mut Vec::new()))
}

/// Evaluates a formula with free variables `v0, v1, ..` bound to `tuple`.
pub fn eval_at(f: &Formula, y: &Structure, vars: &[String], tuple: &[usize]) -> Result<bool> {
    let assignment = vars.iter().cloned().zip(tuple.iter().copied()).collect();
    eval_formula(f, y, &assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn parse(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn loop_witness() {
        let sig = Signature::from_pairs(&[("R", 2)]).unwrap();
        let y = Structure::from_tuples(sig, 3, &[("R", &[&[1, 1]])]).unwrap();
        assert!(eval_formula(&parse("(exists v (rel R v v))"), &y, &Assignment::new()).unwrap());
    }

    #[test]
    fn c5_symmetric() {
        let c5 = Structure::cycle(5, "E");
        let f = parse("(forall u (forall v (or (not (rel E u v)) (rel E v u))))");
        assert!(eval_formula(&f, &c5, &Assignment::new()).unwrap());
        let lo = Structure::linear_order(5, "E");
        assert!(!eval_formula(&f, &lo, &Assignment::new()).unwrap());
    }

    #[test]
    fn equality_under_assignment() {
        let c5 = Structure::cycle(5, "E");
        let a: Assignment = [("v0".to_string(), 2), ("v1".to_string(), 3)].into();
        assert!(!eval_formula(&parse("(= v0 v1)"), &c5, &a).unwrap());
        assert!(eval_formula(&parse("(rel E v0 v1)"), &c5, &a).unwrap());
    }

    #[test]
    fn shadowing() {
        let c5 = Structure::cycle(5, "E");
        let a: Assignment = [("v".to_string(), 0)].into();
        // inner v is bound, outer v stays 0
        let f = parse("(and (exists v (= v v)) (rel E v v))");
        assert!(!eval_formula(&f, &c5, &a).unwrap());
    }

    #[test]
    fn errors() {
        let c5 = Structure::cycle(5, "E");
        let none = Assignment::new();
        assert_eq!(
            eval_formula(&parse("(= v0 v0)"), &c5, &none),
            Err(Error::UnboundVariable("v0".into()))
        );
        assert_eq!(
            eval_formula(&parse("(exists v (rel F v v))"), &c5, &none),
            Err(Error::UnknownSymbol("F".into()))
        );
        assert!(matches!(
            eval_formula(&parse("(exists v (rel E v))"), &c5, &none),
            Err(Error::ArityMismatch { .. })
        ));
        let far: Assignment = [("v".to_string(), 9)].into();
        assert!(eval_formula(&parse("(= v v)"), &c5, &far).is_err());
    }

    #[test]
    fn empty_domain() {
        let y = Structure::linear_order(0, "E");
        let none = Assignment::new();
        assert!(!eval_formula(&parse("(exists v (= v v))"), &y, &none).unwrap());
        assert!(eval_formula(&parse("(forall v (rel E v v))"), &y, &none).unwrap());
    }
}
