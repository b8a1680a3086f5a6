//! Signatures, finite relational structures and the companion
//! "linear order with unary singletons" construction.
//!
//! Domains are always `{0, .., m-1}`. Substructures are relabeled
//! order-preservingly so that two structures are equal iff their
//! signatures, sizes and tuple sets are syntactically equal.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }
}

/// An ordered list of relation symbols. Order is significant.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::Signature(format!("symbol `{}` has arity 0", s.name)));
            }
            if s.name.is_empty()
                || s.name
                    .chars()
                    .any(|c| c.is_whitespace() || c == '(' || c == ')')
            {
                return Err(Error::Signature(format!("bad symbol name {:?}", s.name)));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::Signature(format!("duplicate symbol `{}`", s.name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    /// Convenience constructor for tests and fixtures.
    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Signature::new(pairs.iter().map(|&(n, a)| Symbol::new(n, a)).collect())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let symbols = Vec::<Symbol>::deserialize(d)?;
        Signature::new(symbols).map_err(serde::de::Error::custom)
    }
}

pub type Tuple = Vec<usize>;

/// A finite relational structure on the domain `{0, .., size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "StructureDoc", into = "StructureDoc")]
pub struct Structure {
    sig: Signature,
    size: usize,
    relations: Vec<BTreeSet<Tuple>>,
    // bit tables mirroring `relations` when `size^arity` is small
    dense: Vec<Option<Vec<u64>>>,
}

const DENSE_LIMIT: usize = 1 << 16;

fn dense_table(size: usize, arity: usize, rel: &BTreeSet<Tuple>) -> Option<Vec<u64>> {
    let cells = size
        .checked_pow(arity as u32)
        .filter(|&c| c <= DENSE_LIMIT)?;
    let mut bits = vec![0u64; cells.div_ceil(64).max(1)];
    for t in rel {
        let idx = t.iter().fold(0usize, |acc, &e| acc * size + e);
        bits[idx / 64] |= 1 << (idx % 64);
    }
    Some(bits)
}

impl Structure {
    fn assemble(sig: Signature, size: usize, relations: Vec<BTreeSet<Tuple>>) -> Structure {
        let dense = sig
            .symbols()
            .iter()
            .zip(&relations)
            .map(|(sym, rel)| dense_table(size, sym.arity, rel))
            .collect();
        Structure {
            sig,
            size,
            relations,
            dense,
        }
    }

    /// Builds a structure, checking tuple arities and ranges.
    pub fn new(sig: Signature, size: usize, relations: Vec<BTreeSet<Tuple>>) -> Result<Self> {
        if relations.len() != sig.len() {
            return Err(Error::Domain(format!(
                "{} relations for {} symbols",
                relations.len(),
                sig.len()
            )));
        }
        for (sym, rel) in sig.symbols().iter().zip(&relations) {
            for t in rel {
                if t.len() != sym.arity {
                    return Err(Error::ArityMismatch {
                        symbol: sym.name.clone(),
                        expected: sym.arity,
                        found: t.len(),
                    });
                }
                if let Some(&e) = t.iter().find(|&&e| e >= size) {
                    return Err(Error::Domain(format!(
                        "element {e} in `{}` outside domain of size {size}",
                        sym.name
                    )));
                }
            }
        }
        Ok(Structure::assemble(sig, size, relations))
    }

    /// A structure with every relation empty.
    pub fn empty(sig: Signature, size: usize) -> Self {
        let relations = vec![BTreeSet::new(); sig.len()];
        Structure::assemble(sig, size, relations)
    }

    /// Builds from `(symbol name, tuples)` pairs; symbols not mentioned are empty.
    pub fn from_tuples(sig: Signature, size: usize, rels: &[(&str, &[&[usize]])]) -> Result<Self> {
        let mut relations = vec![BTreeSet::new(); sig.len()];
        for (name, tuples) in rels {
            let i = sig
                .index_of(name)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
            relations[i].extend(tuples.iter().map(|t| t.to_vec()));
        }
        Structure::new(sig, size, relations)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, index: usize) -> &BTreeSet<Tuple> {
        &self.relations[index]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&BTreeSet<Tuple>> {
        self.sig.index_of(name).map(|i| &self.relations[i])
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    #[inline]
    pub fn holds(&self, index: usize, tuple: &[usize]) -> bool {
        match &self.dense[index] {
            Some(bits) => {
                let idx = tuple.iter().fold(0usize, |acc, &e| acc * self.size + e);
                bits[idx / 64] >> (idx % 64) & 1 == 1
            }
            None => self.relations[index].contains(tuple),
        }
    }

    /// Restriction to `subset`, relabeled order-preservingly onto `{0, .., |subset|-1}`.
    pub fn induced_substructure(&self, subset: &[usize]) -> Result<Structure> {
        if subset.is_empty() {
            return Err(Error::Domain("induced substructure of an empty set".into()));
        }
        let mut elems: Vec<usize> = subset.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if let Some(&e) = elems.iter().find(|&&e| e >= self.size) {
            return Err(Error::Domain(format!(
                "element {e} outside domain of size {}",
                self.size
            )));
        }
        let mut relabel = vec![usize::MAX; self.size];
        for (new, &old) in elems.iter().enumerate() {
            relabel[old] = new;
        }
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .filter(|t| t.iter().all(|&e| relabel[e] != usize::MAX))
                    .map(|t| t.iter().map(|&e| relabel[e]).collect())
                    .collect()
            })
            .collect();
        Ok(Structure::assemble(
            self.sig.clone(),
            elems.len(),
            relations,
        ))
    }

    /// Keeps only the named symbols, preserving signature order.
    pub fn reduct(&self, keep: &[&str]) -> Result<Structure> {
        if let Some(bad) = keep.iter().find(|k| self.sig.index_of(k).is_none()) {
            return Err(Error::UnknownSymbol(bad.to_string()));
        }
        let mut symbols = Vec::new();
        let mut relations = Vec::new();
        for (sym, rel) in self.sig.symbols().iter().zip(&self.relations) {
            if keep.contains(&sym.name.as_str()) {
                symbols.push(sym.clone());
                relations.push(rel.clone());
            }
        }
        Ok(Structure::assemble(
            Signature { symbols },
            self.size,
            relations,
        ))
    }

    /// Applies a bijection `perm` (old element -> new element).
    pub fn relabel(&self, perm: &[usize]) -> Structure {
        debug_assert_eq!(perm.len(), self.size);
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .map(|t| t.iter().map(|&e| perm[e]).collect())
                    .collect()
            })
            .collect();
        Structure::assemble(self.sig.clone(), self.size, relations)
    }

    /// The strict linear order `<` on `{0, .., m-1}` under symbol `name`.
    pub fn linear_order(size: usize, name: &str) -> Structure {
        let sig = Signature::new(vec![Symbol::new(name, 2)]).expect("valid name");
        let rel = (0..size)
            .flat_map(|a| (a + 1..size).map(move |b| vec![a, b]))
            .collect();
        Structure::assemble(sig, size, vec![rel])
    }

    /// Symmetric cycle graph `0-1-..-(m-1)-0` under symbol `name`.
    pub fn cycle(size: usize, name: &str) -> Structure {
        let sig = Signature::new(vec![Symbol::new(name, 2)]).expect("valid name");
        let mut rel = BTreeSet::new();
        if size >= 2 {
            for a in 0..size {
                let b = (a + 1) % size;
                if a != b {
                    rel.insert(vec![a, b]);
                    rel.insert(vec![b, a]);
                }
            }
        }
        Structure::assemble(sig, size, vec![rel])
    }

    /// Symmetric path graph `0-1-..-(m-1)` under symbol `name`.
    pub fn path(size: usize, name: &str) -> Structure {
        let sig = Signature::new(vec![Symbol::new(name, 2)]).expect("valid name");
        let rel = (1..size)
            .flat_map(|b| [vec![b - 1, b], vec![b, b - 1]])
            .collect();
        Structure::assemble(sig, size, vec![rel])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    signature: Signature,
    size: usize,
    #[serde(default)]
    relations: BTreeMap<String, BTreeSet<Tuple>>,
}

impl TryFrom<StructureDoc> for Structure {
    type Error = Error;

    fn try_from(mut doc: StructureDoc) -> Result<Structure> {
        let mut relations = Vec::with_capacity(doc.signature.len());
        for sym in doc.signature.symbols() {
            relations.push(doc.relations.remove(&sym.name).unwrap_or_default());
        }
        if let Some(name) = doc.relations.keys().next() {
            return Err(Error::UnknownSymbol(name.clone()));
        }
        Structure::new(doc.signature, doc.size, relations)
    }
}

impl From<Structure> for StructureDoc {
    fn from(s: Structure) -> StructureDoc {
        let relations = s
            .sig
            .symbols()
            .iter()
            .map(|sym| sym.name.clone())
            .zip(s.relations)
            .collect();
        StructureDoc {
            signature: s.sig,
            size: s.size,
            relations,
        }
    }
}

/// A linear order on the domain whose first `k` positions carry the
/// constants `a_0, .., a_{k-1}` as unary singletons.
///
/// Values built through [`Companion::new`] satisfy all four companion
/// axioms. [`Companion::from_parts`] only checks that `order` is a
/// permutation, so hand-built values may violate the constant axioms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CompanionDoc", into = "CompanionDoc")]
pub struct Companion {
    size: usize,
    order: Vec<usize>,
    constants: Vec<usize>,
    position: Vec<usize>,
}

/// Outcome of checking the four companion axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompanionAxioms {
    pub linear_order: bool,
    pub distinct_singletons: bool,
    pub ordered_as_indices: bool,
    pub initial_segment: bool,
}

impl CompanionAxioms {
    pub fn all(&self) -> bool {
        self.linear_order
            && self.distinct_singletons
            && self.ordered_as_indices
            && self.initial_segment
    }

    pub fn as_array(&self) -> [bool; 4] {
        [
            self.linear_order,
            self.distinct_singletons,
            self.ordered_as_indices,
            self.initial_segment,
        ]
    }
}

fn check_permutation(size: usize, order: &[usize]) -> Result<Vec<usize>> {
    if order.len() != size {
        return Err(Error::Domain(format!(
            "order lists {} elements, domain has {size}",
            order.len()
        )));
    }
    let mut position = vec![usize::MAX; size];
    for (i, &e) in order.iter().enumerate() {
        if e >= size {
            return Err(Error::Domain(format!(
                "element {e} outside domain of size {size}"
            )));
        }
        if position[e] != usize::MAX {
            return Err(Error::Domain(format!("element {e} listed twice")));
        }
        position[e] = i;
    }
    Ok(position)
}

impl Companion {
    /// Companion whose order is `constants` followed by `rest_order`.
    pub fn new(size: usize, constants: &[usize], rest_order: &[usize]) -> Result<Self> {
        let mut order = Vec::with_capacity(size);
        order.extend_from_slice(constants);
        order.extend_from_slice(rest_order);
        let position = check_permutation(size, &order)?;
        Ok(Companion {
            size,
            order,
            constants: constants.to_vec(),
            position,
        })
    }

    pub fn from_parts(size: usize, order: Vec<usize>, constants: Vec<usize>) -> Result<Self> {
        let position = check_permutation(size, &order)?;
        if let Some(&c) = constants.iter().find(|&&c| c >= size) {
            return Err(Error::Domain(format!(
                "constant {c} outside domain of size {size}"
            )));
        }
        Ok(Companion {
            size,
            order,
            constants,
            position,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn constants(&self) -> &[usize] {
        &self.constants
    }

    /// Number of unary symbols `U0, .., U{k-1}`.
    pub fn constant_count(&self) -> usize {
        self.constants.len()
    }

    /// The elements after the constant block, in companion order.
    pub fn rest_order(&self) -> &[usize] {
        &self.order[self.constants.len().min(self.size)..]
    }

    #[inline]
    pub fn position(&self, e: usize) -> usize {
        self.position[e]
    }

    #[inline]
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    /// Index of the first constant equal to `e`.
    #[inline]
    pub fn constant_index(&self, e: usize) -> Option<usize> {
        self.constants.iter().position(|&c| c == e)
    }

    pub fn axioms(&self) -> CompanionAxioms {
        let k = self.constants.len();
        let distinct = {
            let set: BTreeSet<_> = self.constants.iter().collect();
            set.len() == k
        };
        let ordered = self
            .constants
            .windows(2)
            .all(|w| self.position[w[0]] < self.position[w[1]]);
        let initial = {
            let set: BTreeSet<usize> = self.constants.iter().copied().collect();
            set.iter().all(|&c| self.position[c] < set.len())
        };
        CompanionAxioms {
            linear_order: true,
            distinct_singletons: distinct,
            ordered_as_indices: ordered,
            initial_segment: initial,
        }
    }

    /// The companion rendered as a structure over `R` (strict order) and `U0..U{k-1}`.
    pub fn to_structure(&self) -> Structure {
        let sig = companion_signature(self.constants.len());
        let mut relations = Vec::with_capacity(sig.len());
        let mut lt = BTreeSet::new();
        for (i, &a) in self.order.iter().enumerate() {
            for &b in &self.order[i + 1..] {
                lt.insert(vec![a, b]);
            }
        }
        relations.push(lt);
        for &c in &self.constants {
            relations.push(BTreeSet::from([vec![c]]));
        }
        Structure::assemble(sig, self.size, relations)
    }
}

/// Checks the companion axioms. Every value from [`Companion::new`] passes.
pub fn validate_companion_axioms(x: &Companion) -> CompanionAxioms {
    x.axioms()
}

/// Name of the `j`-th unary companion symbol.
pub fn unary_name(j: usize) -> String {
    format!("U{j}")
}

pub const ORDER_SYMBOL: &str = "R";

/// `R/2, U0/1, .., U{k-1}/1`.
pub fn companion_signature(k: usize) -> Signature {
    let mut symbols = vec![Symbol::new(ORDER_SYMBOL, 2)];
    symbols.extend((0..k).map(|j| Symbol::new(unary_name(j), 1)));
    Signature::new(symbols).expect("companion signature is well formed")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompanionDoc {
    size: usize,
    order: Vec<usize>,
    #[serde(default)]
    constants: Vec<usize>,
}

impl TryFrom<CompanionDoc> for Companion {
    type Error = Error;

    fn try_from(doc: CompanionDoc) -> Result<Companion> {
        Companion::from_parts(doc.size, doc.order, doc.constants)
    }
}

impl From<Companion> for CompanionDoc {
    fn from(c: Companion) -> CompanionDoc {
        CompanionDoc {
            size: c.size,
            order: c.order,
            constants: c.constants,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(size: usize, edges: &[&[usize]]) -> Structure {
        Structure::from_tuples(
            Signature::from_pairs(&[("E", 2)]).unwrap(),
            size,
            &[("E", edges)],
        )
        .unwrap()
    }

    #[test]
    fn c5_restricted_to_three_is_a_path() {
        let c5 = Structure::cycle(5, "E");
        let sub = c5.induced_substructure(&[0, 1, 2]).unwrap();
        assert_eq!(sub, Structure::path(3, "E"));
    }

    #[test]
    fn full_subset_is_identity() {
        let c5 = Structure::cycle(5, "E");
        assert_eq!(c5.induced_substructure(&[4, 3, 2, 1, 0]).unwrap(), c5);
    }

    #[test]
    fn chain_restriction_is_chain() {
        let lo = Structure::linear_order(5, "<");
        assert_eq!(
            lo.induced_substructure(&[1, 3]).unwrap(),
            Structure::linear_order(2, "<")
        );
    }

    #[test]
    fn substructure_errors() {
        let lo = Structure::linear_order(3, "<");
        assert!(matches!(
            lo.induced_substructure(&[]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            lo.induced_substructure(&[0, 3]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn reducts() {
        let sig = Signature::from_pairs(&[("E", 2), ("U", 1)]).unwrap();
        let y = Structure::from_tuples(sig, 3, &[("E", &[&[0, 1]]), ("U", &[&[2]])]).unwrap();
        let e = y.reduct(&["E"]).unwrap();
        assert_eq!(e, graph(3, &[&[0, 1]]));
        assert_eq!(y.reduct(&["U", "E"]).unwrap(), y);
        let bare = y.reduct(&[]).unwrap();
        assert!(bare.signature().is_empty());
        assert_eq!(bare.size(), 3);
        assert_eq!(y.reduct(&["F"]), Err(Error::UnknownSymbol("F".into())));
    }

    #[test]
    fn structure_rejects_bad_tuples() {
        let sig = Signature::from_pairs(&[("E", 2)]).unwrap();
        assert!(Structure::from_tuples(sig.clone(), 2, &[("E", &[&[0, 2]])]).is_err());
        assert!(Structure::from_tuples(sig, 2, &[("E", &[&[0]])]).is_err());
        assert!(Signature::from_pairs(&[("E", 2), ("E", 1)]).is_err());
        assert!(Signature::from_pairs(&[("E", 0)]).is_err());
    }

    #[test]
    fn companion_construction() {
        let x = Companion::new(5, &[4], &[0, 1, 2, 3]).unwrap();
        assert_eq!(x.order(), &[4, 0, 1, 2, 3]);
        assert_eq!(x.constants(), &[4]);
        let x = Companion::new(3, &[], &[2, 1, 0]).unwrap();
        assert_eq!(x.order(), &[2, 1, 0]);
        assert!(x.constants().is_empty());
        let x = Companion::new(4, &[1, 0], &[3, 2]).unwrap();
        assert_eq!(x.order(), &[1, 0, 3, 2]);
        assert_eq!(x.constants(), &[1, 0]);
        assert!(x.axioms().all());

        assert!(Companion::new(4, &[1], &[1, 2, 3]).is_err());
        assert!(Companion::new(4, &[1], &[0, 2]).is_err());
    }

    #[test]
    fn companion_axiom_violations() {
        let swapped = Companion::from_parts(4, vec![1, 0, 2, 3], vec![0, 1]).unwrap();
        assert_eq!(swapped.axioms().as_array(), [true, true, false, true]);
        let late = Companion::from_parts(4, vec![0, 1, 2, 3], vec![2]).unwrap();
        assert_eq!(late.axioms().as_array(), [true, true, true, false]);
        let dup = Companion::from_parts(3, vec![0, 1, 2], vec![0, 0]).unwrap();
        assert!(!dup.axioms().distinct_singletons);
    }

    #[test]
    fn json_formats() {
        let text =
            r#"{"signature":[{"name":"E","arity":2}],"size":5,"relations":{"E":[[0,1],[1,0]]}}"#;
        let y: Structure = serde_json::from_str(text).unwrap();
        assert_eq!(y.relation(0).len(), 2);
        assert_eq!(serde_json::to_string(&y).unwrap(), text);

        let text = r#"{"size":5,"order":[4,0,1,2,3],"constants":[4]}"#;
        let x: Companion = serde_json::from_str(text).unwrap();
        assert_eq!(x, Companion::new(5, &[4], &[0, 1, 2, 3]).unwrap());
        assert_eq!(serde_json::to_string(&x).unwrap(), text);

        let bad = r#"{"signature":[],"size":2,"relations":{"E":[[0,1]]}}"#;
        assert!(serde_json::from_str::<Structure>(bad).is_err());
        let bad = r#"{"signature":[{"name":"E","arity":2}],"size":2,"relations":{"E":[[0,2]]}}"#;
        assert!(serde_json::from_str::<Structure>(bad).is_err());
    }

    #[test]
    fn companion_as_structure() {
        let x = Companion::new(3, &[2], &[0, 1]).unwrap();
        let s = x.to_structure();
        assert_eq!(s.signature(), &companion_signature(1));
        assert!(s.holds(0, &[2, 0]));
        assert!(s.holds(0, &[0, 1]));
        assert!(!s.holds(0, &[1, 0]));
        assert!(s.holds(1, &[2]));
    }
}
