//! Chainability over a finite set `F`, chaining-order search, kernels,
//! ages and profiles.
//!
//! A structure is `(F, <)`-chainable when every partial automorphism of the
//! chain `(Y \ F, <)` extended by the identity on `F` is a partial
//! automorphism of the structure. Partial automorphisms of a chain are the
//! order-preserving injections, and a tuple mentions at most `max_arity`
//! elements outside `F`, so only maps with at most `max_arity` pairs need to
//! be checked. The full quantification is kept as an oracle in
//! [`crate::verify`].

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphism::{all_tuples, canonical_form, find_isomorphism, CanonicalForm, CANON_BOUND};
use crate::structure::Structure;

/// A finite set `F` together with a linear arrangement of its complement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChainWitness {
    #[serde(rename = "f")]
    pub f_set: Vec<usize>,
    #[serde(rename = "order")]
    pub rest_order: Vec<usize>,
}

impl ChainWitness {
    pub fn new(mut f_set: Vec<usize>, rest_order: Vec<usize>) -> Self {
        f_set.sort_unstable();
        ChainWitness { f_set, rest_order }
    }

    /// Checks that `f_set` and `rest_order` partition `{0, .., size-1}`.
    pub fn validate(&self, size: usize) -> Result<()> {
        let mut seen = vec![false; size];
        for &e in self.f_set.iter().chain(&self.rest_order) {
            if e >= size {
                return Err(Error::Domain(format!(
                    "element {e} outside domain of size {size}"
                )));
            }
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::Domain(format!(
                    "element {e} occurs twice in the witness"
                )));
            }
        }
        match seen.iter().position(|s| !s) {
            Some(e) => Err(Error::Domain(format!(
                "element {e} missing from the witness"
            ))),
            None => Ok(()),
        }
    }

    pub fn reversed(&self) -> ChainWitness {
        let mut rest_order = self.rest_order.clone();
        rest_order.reverse();
        ChainWitness {
            f_set: self.f_set.clone(),
            rest_order,
        }
    }
}

/// Incremental checker for chaining prefixes.
///
/// The order among already placed elements never changes when more
/// elements are appended, so a prefix violation rules out every extension.
struct PrefixChecker<'a> {
    y: &'a Structure,
    f_set: &'a [usize],
    bound: usize,
    image: Vec<usize>,
    in_moved: Vec<bool>,
    dom: Vec<usize>,
    mapped: Vec<usize>,
}

impl<'a> PrefixChecker<'a> {
    fn new(y: &'a Structure, f_set: &'a [usize]) -> Self {
        let mut image = vec![usize::MAX; y.size()];
        for &a in f_set {
            image[a] = a;
        }
        PrefixChecker {
            y,
            f_set,
            bound: y.signature().max_arity(),
            image,
            in_moved: vec![false; y.size()],
            dom: Vec::new(),
            mapped: Vec::new(),
        }
    }

    /// Checks every order-preserving map between position sets of `prefix`
    /// that involves the last position.
    fn last_ok(&mut self, prefix: &[usize]) -> bool {
        let Some(last) = prefix.len().checked_sub(1) else {
            return true;
        };
        let top = self.bound.min(prefix.len());
        for size in 1..=top {
            for src in (0..prefix.len()).combinations(size) {
                for dst in (0..prefix.len()).combinations(size) {
                    if src == dst || (!src.contains(&last) && !dst.contains(&last)) {
                        continue;
                    }
                    if !self.map_ok(prefix, &src, &dst) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn map_ok(&mut self, prefix: &[usize], src: &[usize], dst: &[usize]) -> bool {
        self.dom.clear();
        self.dom.extend_from_slice(self.f_set);
        for (&i, &j) in src.iter().zip(dst) {
            let (s, t) = (prefix[i], prefix[j]);
            self.image[s] = t;
            self.in_moved[s] = true;
            self.dom.push(s);
        }
        let y = self.y;
        let (image, in_moved, mapped) = (&self.image, &self.in_moved, &mut self.mapped);
        let ok = y.signature().symbols().iter().enumerate().all(|(r, sym)| {
            all_tuples(&self.dom, sym.arity, |t| {
                if !t.iter().any(|&e| in_moved[e]) {
                    return true;
                }
                mapped.clear();
                mapped.extend(t.iter().map(|&e| image[e]));
                y.holds(r, t) == y.holds(r, mapped)
            })
        });
        for &i in src {
            let s = prefix[i];
            self.image[s] = usize::MAX;
            self.in_moved[s] = false;
        }
        ok
    }
}

/// Decides `(F, <)`-chainability, quantifying over maps of size at most the maximal arity.
pub fn is_chainable_with(y: &Structure, w: &ChainWitness) -> Result<bool> {
    w.validate(y.size())?;
    if y.signature().is_empty() {
        return Ok(true);
    }
    let mut checker = PrefixChecker::new(y, &w.f_set);
    Ok((1..=w.rest_order.len()).all(|p| checker.last_ok(&w.rest_order[..p])))
}

fn complement(size: usize, f_set: &[usize]) -> Result<Vec<usize>> {
    let mut in_f = vec![false; size];
    for &a in f_set {
        if a >= size {
            return Err(Error::Domain(format!(
                "element {a} outside domain of size {size}"
            )));
        }
        if std::mem::replace(&mut in_f[a], true) {
            return Err(Error::Domain(format!("element {a} listed twice in F")));
        }
    }
    Ok((0..size).filter(|&e| !in_f[e]).collect())
}

/// Backtracking over chaining prefixes. Calls `found` on each complete
/// arrangement in lexicographic order; stops when it returns `false`.
pub(crate) fn search_orders(
    y: &Structure,
    f_set: &[usize],
    mut found: impl FnMut(&[usize]) -> bool,
) -> Result<()> {
    let rest = complement(y.size(), f_set)?;
    let mut checker = PrefixChecker::new(y, f_set);
    let trivial = y.signature().is_empty();
    let mut prefix = Vec::with_capacity(rest.len());
    let mut used = vec![false; rest.len()];

    fn go(
        rest: &[usize],
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        checker: &mut PrefixChecker<'_>,
        trivial: bool,
        found: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if prefix.len() == rest.len() {
            return found(prefix);
        }
        for i in 0..rest.len() {
            if used[i] {
                continue;
            }
            prefix.push(rest[i]);
            if trivial || checker.last_ok(prefix) {
                used[i] = true;
                let more = go(rest, prefix, used, checker, trivial, found);
                used[i] = false;
                if !more {
                    prefix.pop();
                    return false;
                }
            }
            prefix.pop();
        }
        true
    }

    go(
        &rest,
        &mut prefix,
        &mut used,
        &mut checker,
        trivial,
        &mut found,
    );
    Ok(())
}

/// The first chaining arrangement of `Y \ F` in lexicographic order, if any.
pub fn find_chain_order(y: &Structure, f_set: &[usize]) -> Result<Option<Vec<usize>>> {
    let mut out = None;
    search_orders(y, f_set, |order| {
        out = Some(order.to_vec());
        false
    })?;
    Ok(out)
}

/// Result of the minimal-`F` search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    /// `None` when no `F` of size at most `search_bound` admits a chaining order.
    pub min_size: Option<usize>,
    pub minimal_sets: Vec<ChainWitness>,
    pub search_bound: usize,
}

/// Searches `|F| = 0, 1, .., max_f` and reports every chainable `F` of the
/// first size that admits one, with its first chaining order.
pub fn kernel(y: &Structure, max_f: usize) -> Result<KernelReport> {
    let m = y.size();
    if max_f > m {
        return Err(Error::Precondition(format!(
            "kernel search bound {max_f} exceeds domain size {m}"
        )));
    }
    for size in 0..=max_f {
        let mut minimal_sets = Vec::new();
        for f_set in (0..m).combinations(size) {
            if let Some(order) = find_chain_order(y, &f_set)? {
                minimal_sets.push(ChainWitness::new(f_set, order));
            }
        }
        if !minimal_sets.is_empty() {
            return Ok(KernelReport {
                min_size: Some(size),
                minimal_sets,
                search_bound: max_f,
            });
        }
    }
    Ok(KernelReport {
        min_size: None,
        minimal_sets: Vec::new(),
        search_bound: max_f,
    })
}

/// Canonical forms of all `n`-element induced substructures.
pub fn age_forms(y: &Structure, n: usize) -> Result<BTreeSet<CanonicalForm>> {
    if n == 0 || n > y.size() {
        return Err(Error::Precondition(format!(
            "age level {n} outside 1..={}",
            y.size()
        )));
    }
    if n > CANON_BOUND {
        return Err(Error::UnsupportedSize {
            what: "age level",
            size: n,
            bound: CANON_BOUND,
        });
    }
    (0..y.size())
        .combinations(n)
        .map(|h| canonical_form(&y.induced_substructure(&h)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileReport {
    /// `values[n-1]` is the number of isomorphism types of `n`-element substructures.
    pub values: Vec<usize>,
    #[serde(skip)]
    pub age_forms: Vec<BTreeSet<CanonicalForm>>,
}

pub fn profile(y: &Structure, up_to: usize) -> Result<ProfileReport> {
    let cap = y.size().min(CANON_BOUND);
    if up_to > cap {
        return Err(Error::UnsupportedSize {
            what: "profile length",
            size: up_to,
            bound: cap,
        });
    }
    let age_forms = (1..=up_to)
        .map(|n| age_forms(y, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileReport {
        values: age_forms.iter().map(BTreeSet::len).collect(),
        age_forms,
    })
}

/// True iff every profile value up to `up_to` is at most `2^kernel_size`.
pub fn check_profile_bound(y: &Structure, kernel_size: usize, up_to: usize) -> Result<bool> {
    let report = profile(y, up_to)?;
    let bound = 1usize.checked_shl(kernel_size as u32).unwrap_or(usize::MAX);
    Ok(report.values.iter().all(|&v| v <= bound))
}

/// Checks that `n`-sets with the same trace on `F` induce isomorphic substructures.
pub fn check_trace_isomorphism(y: &Structure, w: &ChainWitness, n: usize) -> Result<bool> {
    if !is_chainable_with(y, w)? {
        return Err(Error::Precondition(
            "witness does not chain the structure".into(),
        ));
    }
    if n == 0 || n > y.size() {
        return Ok(true);
    }
    let mut representative: BTreeMap<Vec<usize>, Structure> = BTreeMap::new();
    for k in (0..y.size()).combinations(n) {
        let trace: Vec<usize> = k.iter().copied().filter(|e| w.f_set.contains(e)).collect();
        let sub = y.induced_substructure(&k)?;
        match representative.get(&trace) {
            Some(rep) => {
                if find_isomorphism(rep, &sub)?.is_none() {
                    return Ok(false);
                }
            }
            None => {
                representative.insert(trace, sub);
            }
        }
    }
    Ok(true)
}

/// True iff every `n`-element type of `z` occurs among those of `y`.
pub fn age_subset(z: &Structure, y: &Structure, n: usize) -> Result<bool> {
    if z.signature() != y.signature() {
        return Err(Error::SignatureMismatch(
            "age comparison needs equal signatures".into(),
        ));
    }
    let zs = age_forms(z, n)?;
    let ys = age_forms(y, n)?;
    Ok(zs.is_subset(&ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn unary(size: usize, members: &[usize]) -> Structure {
        let sig = Signature::from_pairs(&[("U", 1)]).unwrap();
        let tuples: Vec<Vec<usize>> = members.iter().map(|&e| vec![e]).collect();
        let refs: Vec<&[usize]> = tuples.iter().map(Vec::as_slice).collect();
        Structure::from_tuples(sig, size, &[("U", &refs)]).unwrap()
    }

    fn witness(f: &[usize], order: &[usize]) -> ChainWitness {
        ChainWitness::new(f.to_vec(), order.to_vec())
    }

    #[test]
    fn chain_chains_itself() {
        let lo = Structure::linear_order(5, "<");
        assert!(is_chainable_with(&lo, &witness(&[], &[0, 1, 2, 3, 4])).unwrap());
        assert!(is_chainable_with(&lo, &witness(&[], &[4, 3, 2, 1, 0])).unwrap());
        assert!(!is_chainable_with(&lo, &witness(&[], &[0, 2, 1, 3, 4])).unwrap());
    }

    #[test]
    fn c4_counterexample() {
        // {0->0, 2->1} sends the non-edge (0,2) to the edge (0,1)
        let c4 = Structure::cycle(4, "E");
        assert!(!is_chainable_with(&c4, &witness(&[], &[0, 1, 2, 3])).unwrap());
    }

    #[test]
    fn unary_fixed_point() {
        let y = unary(5, &[4]);
        assert!(is_chainable_with(&y, &witness(&[4], &[3, 1, 0, 2])).unwrap());
        assert!(!is_chainable_with(&y, &witness(&[], &[0, 1, 2, 3, 4])).unwrap());
    }

    #[test]
    fn witness_must_partition() {
        let lo = Structure::linear_order(3, "<");
        assert!(is_chainable_with(&lo, &witness(&[0], &[0, 1, 2])).is_err());
        assert!(is_chainable_with(&lo, &witness(&[], &[0, 1])).is_err());
        assert!(is_chainable_with(&lo, &witness(&[], &[0, 1, 3])).is_err());
    }

    #[test]
    fn degenerate_domains() {
        let empty = Structure::linear_order(0, "<");
        assert!(is_chainable_with(&empty, &witness(&[], &[])).unwrap());
        assert_eq!(find_chain_order(&empty, &[]).unwrap(), Some(vec![]));
        let one = Structure::linear_order(1, "<");
        assert_eq!(kernel(&one, 1).unwrap().min_size, Some(0));
    }

    #[test]
    fn find_orders() {
        let lo = Structure::linear_order(5, "<");
        assert_eq!(
            find_chain_order(&lo, &[]).unwrap(),
            Some(vec![0, 1, 2, 3, 4])
        );
        let c5 = Structure::cycle(5, "E");
        for f in (0..5).combinations(3) {
            assert_eq!(find_chain_order(&c5, &f).unwrap(), None, "F = {f:?}");
        }
        let pure = Structure::empty(Signature::empty(), 4);
        assert_eq!(find_chain_order(&pure, &[2]).unwrap(), Some(vec![0, 1, 3]));
    }

    #[test]
    fn kernels() {
        let report = kernel(&Structure::linear_order(6, "<"), 6).unwrap();
        assert_eq!(report.min_size, Some(0));
        assert_eq!(report.minimal_sets[0].f_set, Vec::<usize>::new());

        let report = kernel(&unary(5, &[2]), 5).unwrap();
        assert_eq!(report.min_size, Some(1));
        assert_eq!(report.minimal_sets, vec![witness(&[2], &[0, 1, 3, 4])]);

        let report = kernel(&Structure::cycle(5, "E"), 5).unwrap();
        assert_eq!(report.min_size, Some(4));
        assert_eq!(report.minimal_sets.len(), 5);

        let report = kernel(&Structure::cycle(5, "E"), 3).unwrap();
        assert_eq!(report.min_size, None);
        assert_eq!(report.search_bound, 3);

        assert!(kernel(&Structure::cycle(5, "E"), 6).is_err());
    }

    #[test]
    fn kernel_report_json() {
        let report = kernel(&Structure::cycle(5, "E"), 5).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.starts_with(r#"{"min_size":4,"minimal_sets":[{"f":[0,1,2,3],"order":[4]}"#));
        assert!(text.ends_with(r#""search_bound":5}"#));
    }

    #[test]
    fn profiles() {
        assert_eq!(
            profile(&Structure::linear_order(6, "<"), 6).unwrap().values,
            vec![1; 6]
        );
        assert_eq!(
            profile(&Structure::cycle(5, "E"), 2).unwrap().values,
            vec![1, 2]
        );
        let pure = Structure::empty(Signature::empty(), 4);
        assert_eq!(profile(&pure, 4).unwrap().values, vec![1; 4]);
        assert_eq!(
            profile(&unary(5, &[2]), 5).unwrap().values,
            vec![2, 2, 2, 2, 1]
        );
        assert!(profile(&pure, 5).is_err());
    }

    #[test]
    fn profile_bounds() {
        assert!(check_profile_bound(&Structure::linear_order(6, "<"), 0, 6).unwrap());
        assert!(check_profile_bound(&unary(5, &[2]), 1, 5).unwrap());
        assert!(check_profile_bound(&Structure::cycle(5, "E"), 4, 5).unwrap());
        assert!(!check_profile_bound(&Structure::cycle(5, "E"), 0, 5).unwrap());
    }

    #[test]
    fn trace_isomorphism() {
        let lo = Structure::linear_order(5, "<");
        let w = witness(&[], &[0, 1, 2, 3, 4]);
        for n in 0..=6 {
            assert!(check_trace_isomorphism(&lo, &w, n).unwrap());
        }
        let y = unary(5, &[2]);
        assert!(check_trace_isomorphism(&y, &witness(&[2], &[4, 0, 3, 1]), 3).unwrap());
        assert!(check_trace_isomorphism(&y, &witness(&[], &[0, 1, 2, 3, 4]), 1).is_err());
    }

    #[test]
    fn age_containment() {
        let c5 = Structure::cycle(5, "E");
        let sub = c5.induced_substructure(&[0, 1, 3]).unwrap();
        for n in 1..=3 {
            assert!(age_subset(&sub, &c5, n).unwrap());
        }
        let empty_edges = Structure::empty(c5.signature().clone(), 5);
        assert!(!age_subset(&c5, &empty_edges, 2).unwrap());
        assert!(age_subset(&Structure::path(4, "E"), &c5, 2).unwrap());
        assert!(age_subset(&c5, &Structure::linear_order(5, "<"), 2).is_err());
    }
}
