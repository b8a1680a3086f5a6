//! Quantifier-free definitions of a structure over a companion.
//!
//! Tuples are grouped by the complete set of companion literals they
//! satisfy. A relation is simply definable over the companion exactly when
//! every class it meets lies inside it; its definition is then the
//! disjunction of the classes it meets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::Formula;
use crate::morphism::all_tuples;
use crate::structure::{unary_name, Companion, Signature, Structure, Tuple, ORDER_SYMBOL};

/// The complete quantifier-free description of a tuple in a companion.
///
/// `ranks[i]` is the position of the `i`-th entry among the distinct
/// entries, sorted by the companion order; equal ranks mean equal entries.
/// `constants[b]` is the constant index carried by block `b`, if any.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LiteralType {
    pub ranks: Vec<usize>,
    pub constants: Vec<Option<usize>>,
}

impl LiteralType {
    pub fn arity(&self) -> usize {
        self.ranks.len()
    }

    pub fn blocks(&self) -> usize {
        self.constants.len()
    }

    /// The conjunction of all companion literals in this type, over `vars`.
    ///
    /// Literals come in a fixed order: equalities, then order atoms, then
    /// unary atoms, each in lexicographic index order. Reflexive order
    /// atoms are omitted since the order is strict.
    pub fn render(&self, constant_count: usize, vars: &[String]) -> Formula {
        assert_eq!(vars.len(), self.arity(), "one variable per position");
        let r = self.arity();
        let mut lits = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                let eq = Formula::eq(vars[i].clone(), vars[j].clone());
                lits.push(if self.ranks[i] == self.ranks[j] {
                    eq
                } else {
                    Formula::not(eq)
                });
            }
        }
        for i in 0..r {
            for j in 0..r {
                if i == j {
                    continue;
                }
                let atom = Formula::rel(ORDER_SYMBOL, [vars[i].clone(), vars[j].clone()]);
                lits.push(if self.ranks[i] < self.ranks[j] {
                    atom
                } else {
                    Formula::not(atom)
                });
            }
        }
        for (var, &rank) in vars.iter().zip(&self.ranks) {
            for c in 0..constant_count {
                let atom = Formula::rel(unary_name(c), [var.clone()]);
                let holds = self.constants[rank] == Some(c);
                lits.push(if holds { atom } else { Formula::not(atom) });
            }
        }
        Formula::conj(lits, &vars[0])
    }
}

/// The literal type realized by `tuple` in the companion.
pub fn literal_type(x: &Companion, tuple: &[usize]) -> LiteralType {
    let mut distinct: Vec<usize> = tuple.to_vec();
    distinct.sort_unstable_by_key(|&e| x.position(e));
    distinct.dedup();
    let ranks = tuple
        .iter()
        .map(|&e| {
            distinct
                .iter()
                .position(|&d| d == e)
                .expect("entry is listed")
        })
        .collect();
    let constants = distinct.iter().map(|&e| x.constant_index(e)).collect();
    LiteralType { ranks, constants }
}

/// All literal types of `arity`-tuples realized in the companion.
pub fn realizable_types(x: &Companion, arity: usize) -> BTreeSet<LiteralType> {
    let elems: Vec<usize> = (0..x.size()).collect();
    let mut out = BTreeSet::new();
    all_tuples(&elems, arity, |t| {
        out.insert(literal_type(x, t));
        true
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definition {
    pub arity: usize,
    pub types: BTreeSet<LiteralType>,
}

/// One disjunctive definition per relation symbol, over a companion with
/// `constant_count` unary singletons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QfDefinitionSet {
    pub constant_count: usize,
    pub definitions: BTreeMap<String, Definition>,
}

impl QfDefinitionSet {
    /// The definition of `symbol` as a quantifier-free formula over `vars`.
    pub fn formula(&self, symbol: &str, vars: &[String]) -> Result<Formula> {
        let def = self
            .definitions
            .get(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
        if def.arity != vars.len() {
            return Err(Error::ArityMismatch {
                symbol: symbol.to_string(),
                expected: def.arity,
                found: vars.len(),
            });
        }
        let disjuncts = def
            .types
            .iter()
            .map(|t| t.render(self.constant_count, vars));
        Ok(Formula::disj(disjuncts, &vars[0]))
    }
}

/// Extracts the disjunctive definition of every relation of `y` over `x`.
///
/// Fails with [`Error::NotSimplyDefinable`] on the first class (in
/// lexicographic tuple order) that meets both a relation and its
/// complement.
pub fn extract_definitions(x: &Companion, y: &Structure) -> Result<QfDefinitionSet> {
    if x.size() != y.size() {
        return Err(Error::Domain(format!(
            "companion has {} elements, structure has {}",
            x.size(),
            y.size()
        )));
    }
    let elems: Vec<usize> = (0..y.size()).collect();
    let mut definitions = BTreeMap::new();
    for (idx, sym) in y.signature().symbols().iter().enumerate() {
        // per class: first member inside the relation, first outside
        let mut classes: BTreeMap<LiteralType, (Option<Tuple>, Option<Tuple>)> = BTreeMap::new();
        let mut conflict = None;
        all_tuples(&elems, sym.arity, |t| {
            let ty = literal_type(x, t);
            let entry = classes.entry(ty.clone()).or_default();
            let slot = if y.holds(idx, t) {
                &mut entry.0
            } else {
                &mut entry.1
            };
            if slot.is_none() {
                *slot = Some(t.to_vec());
            }
            if let (Some(inside), Some(outside)) = entry {
                conflict = Some((ty, inside.clone(), outside.clone()));
                return false;
            }
            true
        });
        if let Some((class, inside, outside)) = conflict {
            return Err(Error::NotSimplyDefinable {
                symbol: sym.name.clone(),
                class,
                inside,
                outside,
            });
        }
        let types = classes
            .into_iter()
            .filter(|(_, (inside, _))| inside.is_some())
            .map(|(ty, _)| ty)
            .collect();
        definitions.insert(
            sym.name.clone(),
            Definition {
                arity: sym.arity,
                types,
            },
        );
    }
    Ok(QfDefinitionSet {
        constant_count: x.constant_count(),
        definitions,
    })
}

/// The structure on the companion's domain whose relations are defined by `defs`.
pub fn apply_definitions(
    x: &Companion,
    defs: &QfDefinitionSet,
    sig: &Signature,
) -> Result<Structure> {
    if defs.constant_count != x.constant_count() {
        return Err(Error::Precondition(format!(
            "definitions use {} constants, companion has {}",
            defs.constant_count,
            x.constant_count()
        )));
    }
    let elems: Vec<usize> = (0..x.size()).collect();
    let mut relations = Vec::with_capacity(sig.len());
    for sym in sig.symbols() {
        let def = defs
            .definitions
            .get(&sym.name)
            .ok_or_else(|| Error::UnknownSymbol(sym.name.clone()))?;
        if def.arity != sym.arity {
            return Err(Error::ArityMismatch {
                symbol: sym.name.clone(),
                expected: sym.arity,
                found: def.arity,
            });
        }
        let mut rel = BTreeSet::new();
        all_tuples(&elems, sym.arity, |t| {
            if def.types.contains(&literal_type(x, t)) {
                rel.insert(t.to_vec());
            }
            true
        });
        relations.push(rel);
    }
    Structure::new(sig.clone(), x.size(), relations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval_at;

    fn vars(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn literal_types() {
        let x = Companion::new(3, &[], &[0, 1, 2]).unwrap();
        let diag = literal_type(&x, &[1, 1]);
        assert_eq!(diag.ranks, vec![0, 0]);
        assert_eq!(diag.blocks(), 1);
        let down = literal_type(&x, &[2, 0]);
        assert_eq!(down.ranks, vec![1, 0]);

        let x = Companion::new(3, &[0], &[1, 2]).unwrap();
        let ty = literal_type(&x, &[0, 2]);
        assert_eq!(ty.ranks, vec![0, 1]);
        assert_eq!(ty.constants, vec![Some(0), None]);
    }

    #[test]
    fn same_type_iff_same_literals() {
        let x = Companion::new(4, &[3], &[1, 0, 2]).unwrap();
        let xs = x.to_structure();
        let elems: Vec<usize> = (0..4).collect();
        let mut tuples = Vec::new();
        all_tuples(&elems, 2, |t| {
            tuples.push(t.to_vec());
            true
        });
        for a in &tuples {
            let ty = literal_type(&x, a);
            let phi = ty.render(1, &vars(2));
            for b in &tuples {
                let same = literal_type(&x, b) == ty;
                assert_eq!(
                    eval_at(&phi, &xs, &vars(2), b).unwrap(),
                    same,
                    "{a:?} {b:?}"
                );
            }
        }
    }

    #[test]
    fn chain_definition() {
        let lo = Structure::linear_order(3, "<");
        let x = Companion::new(3, &[], &[0, 1, 2]).unwrap();
        assert_eq!(realizable_types(&x, 2).len(), 3);
        let defs = extract_definitions(&x, &lo).unwrap();
        let def = &defs.definitions["<"];
        assert_eq!(def.types.len(), 1);
        assert_eq!(def.types.iter().next().unwrap().ranks, vec![0, 1]);
        assert_eq!(apply_definitions(&x, &defs, lo.signature()).unwrap(), lo);
    }

    #[test]
    fn singleton_definition() {
        let sig = Signature::from_pairs(&[("U", 1)]).unwrap();
        let y = Structure::from_tuples(sig, 3, &[("U", &[&[0]])]).unwrap();
        let x = Companion::new(3, &[0], &[1, 2]).unwrap();
        let defs = extract_definitions(&x, &y).unwrap();
        let types: Vec<_> = defs.definitions["U"].types.iter().cloned().collect();
        assert_eq!(
            types,
            vec![LiteralType {
                ranks: vec![0],
                constants: vec![Some(0)]
            }]
        );
        assert_eq!(
            defs.formula("U", &vars(1)).unwrap().to_string(),
            "(rel U0 v0)"
        );
    }

    #[test]
    fn c4_is_not_simply_definable() {
        let c4 = Structure::cycle(4, "E");
        let x = Companion::new(4, &[], &[0, 1, 2, 3]).unwrap();
        match extract_definitions(&x, &c4) {
            Err(Error::NotSimplyDefinable {
                symbol,
                class,
                inside,
                outside,
            }) => {
                assert_eq!(symbol, "E");
                assert_eq!(class.ranks, vec![0, 1]);
                assert_eq!(inside, vec![0, 1]);
                assert_eq!(outside, vec![0, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apply_edge_cases() {
        let x = Companion::new(3, &[], &[2, 0, 1]).unwrap();
        let sig = Signature::from_pairs(&[("E", 2)]).unwrap();
        let none = QfDefinitionSet {
            constant_count: 0,
            definitions: [(
                "E".to_string(),
                Definition {
                    arity: 2,
                    types: BTreeSet::new(),
                },
            )]
            .into(),
        };
        assert!(apply_definitions(&x, &none, &sig)
            .unwrap()
            .relation(0)
            .is_empty());
        assert_eq!(
            none.formula("E", &vars(2)).unwrap().to_string(),
            "(not (= v0 v0))"
        );

        let mut all = none.clone();
        all.definitions.get_mut("E").unwrap().types = realizable_types(&x, 2);
        assert_eq!(
            apply_definitions(&x, &all, &sig).unwrap().relation(0).len(),
            9
        );

        let other = Signature::from_pairs(&[("F", 2)]).unwrap();
        assert_eq!(
            apply_definitions(&x, &all, &other),
            Err(Error::UnknownSymbol("F".into()))
        );
        let unary = Signature::from_pairs(&[("E", 1)]).unwrap();
        assert!(matches!(
            apply_definitions(&x, &all, &unary),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn render_is_deterministic() {
        let x = Companion::new(3, &[1], &[0, 2]).unwrap();
        let ty = literal_type(&x, &[1, 2]);
        assert_eq!(
            ty.render(1, &vars(2)).to_string(),
            "(and (not (= v0 v1)) (and (rel R v0 v1) (and (not (rel R v1 v0)) \
             (and (rel U0 v0) (not (rel U0 v1))))))"
        );
    }
}
