//! Partial maps, partial-automorphism tests, isomorphism search and
//! brute-force canonical forms for small structures.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::Structure;

/// Largest domain for which [`canonical_form`] is computed.
pub const CANON_BOUND: usize = 8;

/// A finite injective partial function on domain elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct PartialMap {
    pairs: BTreeMap<usize, usize>,
}

impl PartialMap {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut targets = std::collections::BTreeSet::new();
        for (s, t) in pairs {
            if map.insert(s, t).is_some() {
                return Err(Error::Domain(format!("source {s} mapped twice")));
            }
            if !targets.insert(t) {
                return Err(Error::Domain(format!("target {t} hit twice")));
            }
        }
        Ok(PartialMap { pairs: map })
    }

    pub fn empty() -> Self {
        PartialMap::default()
    }

    pub fn identity(elems: impl IntoIterator<Item = usize>) -> Self {
        PartialMap {
            pairs: elems.into_iter().map(|e| (e, e)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, s: usize) -> Option<usize> {
        self.pairs.get(&s).copied()
    }

    /// Pairs sorted by source.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|(&s, &t)| (s, t))
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs.keys().copied().collect()
    }

    pub fn range(&self) -> Vec<usize> {
        self.pairs.values().copied().collect()
    }

    /// Restriction to sources in `keep`.
    pub fn restrict(&self, keep: &[usize]) -> PartialMap {
        PartialMap {
            pairs: self
                .pairs
                .iter()
                .filter(|(s, _)| keep.contains(s))
                .map(|(&s, &t)| (s, t))
                .collect(),
        }
    }
}

impl<'de> Deserialize<'de> for PartialMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = BTreeMap::<usize, usize>::deserialize(d)?;
        PartialMap::new(pairs).map_err(serde::de::Error::custom)
    }
}

/// Calls `f` on every tuple of length `arity` over `elems`, in
/// lexicographic position order. Stops early when `f` returns `false`.
pub(crate) fn all_tuples(
    elems: &[usize],
    arity: usize,
    mut f: impl FnMut(&[usize]) -> bool,
) -> bool {
    if arity == 0 {
        return f(&[]);
    }
    if elems.is_empty() {
        return true;
    }
    let mut idx = vec![0usize; arity];
    let mut tuple: Vec<usize> = vec![elems[0]; arity];
    loop {
        if !f(&tuple) {
            return false;
        }
        let mut pos = arity;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                tuple[pos] = elems[idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = elems[0];
        }
    }
}

/// Does the map `image` (indexed by source element) carry every tuple over
/// `dom` of `a` to a tuple of `b` and back? Only tuples mentioning `must`
/// are checked when it is given.
fn preserves(
    a: &Structure,
    b: &Structure,
    dom: &[usize],
    image: &[usize],
    must: Option<usize>,
) -> bool {
    let mut mapped = Vec::new();
    a.signature().symbols().iter().enumerate().all(|(i, sym)| {
        all_tuples(dom, sym.arity, |t| {
            if let Some(m) = must {
                if !t.contains(&m) {
                    return true;
                }
            }
            mapped.clear();
            mapped.extend(t.iter().map(|&e| image[e]));
            a.holds(i, t) == b.holds(i, &mapped)
        })
    })
}

fn check_range(y: &Structure, p: &PartialMap) -> Result<()> {
    let m = y.size();
    match p.pairs().find(|&(s, t)| s >= m || t >= m) {
        Some((s, t)) => Err(Error::Domain(format!(
            "pair {s}->{t} outside domain of size {m}"
        ))),
        None => Ok(()),
    }
}

/// True iff `p` is an isomorphism between the substructures on its domain and range.
pub fn is_partial_automorphism(y: &Structure, p: &PartialMap) -> Result<bool> {
    check_range(y, p)?;
    let mut image = vec![usize::MAX; y.size()];
    for (s, t) in p.pairs() {
        image[s] = t;
    }
    Ok(preserves(y, y, &p.domain(), &image, None))
}

/// Depth-first stream over the partial automorphisms of a structure.
///
/// Maps are yielded in lexicographic order of their sorted pair lists;
/// the search never extends a map that already fails, since failures are
/// inherited by every extension.
pub struct PartialAutomorphisms<'a> {
    y: &'a Structure,
    max_dom: usize,
    // (source, target) pairs of the current map
    current: Vec<(usize, usize)>,
    image: Vec<usize>,
    used: Vec<bool>,
    // next candidate (source, target) to try as an extension
    next: Option<(usize, usize)>,
    started: bool,
}

impl<'a> PartialAutomorphisms<'a> {
    fn advance(&self, (s, t): (usize, usize)) -> Option<(usize, usize)> {
        let m = self.y.size();
        if t + 1 < m {
            Some((s, t + 1))
        } else if s + 1 < m {
            Some((s + 1, 0))
        } else {
            None
        }
    }

    fn first_extension(&self) -> Option<(usize, usize)> {
        if self.current.len() >= self.max_dom {
            return None;
        }
        let s = self.current.last().map_or(0, |&(s, _)| s + 1);
        (s < self.y.size()).then_some((s, 0))
    }

    fn accepts(&mut self, (s, t): (usize, usize)) -> bool {
        if self.used[t] {
            return false;
        }
        let mut dom: Vec<usize> = self.current.iter().map(|&(s, _)| s).collect();
        dom.push(s);
        self.image[s] = t;
        let ok = preserves(self.y, self.y, &dom, &self.image, Some(s));
        self.image[s] = usize::MAX;
        ok
    }
}

impl Iterator for PartialAutomorphisms<'_> {
    type Item = PartialMap;

    fn next(&mut self) -> Option<PartialMap> {
        if !self.started {
            self.started = true;
            self.next = self.first_extension();
            return Some(PartialMap::empty());
        }
        loop {
            match self.next {
                Some(cand) => {
                    if self.accepts(cand) {
                        let (s, t) = cand;
                        self.current.push(cand);
                        self.image[s] = t;
                        self.used[t] = true;
                        self.next = self.first_extension();
                        return Some(PartialMap {
                            pairs: self.current.iter().copied().collect(),
                        });
                    }
                    self.next = self.advance(cand);
                }
                None => {
                    let (s, t) = self.current.pop()?;
                    self.image[s] = usize::MAX;
                    self.used[t] = false;
                    self.next = self.advance((s, t));
                }
            }
        }
    }
}

/// All partial automorphisms with at most `max_dom` pairs, each once, in
/// lexicographic order of sorted pair lists.
pub fn enumerate_partial_automorphisms(y: &Structure, max_dom: usize) -> PartialAutomorphisms<'_> {
    PartialAutomorphisms {
        y,
        max_dom,
        current: Vec::new(),
        image: vec![usize::MAX; y.size()],
        used: vec![false; y.size()],
        next: None,
        started: false,
    }
}

/// The first isomorphism `a -> b` in lexicographic permutation order.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Result<Option<PartialMap>> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(
            "isomorphism search needs equal signatures".into(),
        ));
    }
    if a.size() != b.size() {
        return Ok(None);
    }
    let m = a.size();
    let mut image = vec![usize::MAX; m];
    let mut used = vec![false; m];
    let dom: Vec<usize> = (0..m).collect();

    fn search(
        a: &Structure,
        b: &Structure,
        dom: &[usize],
        depth: usize,
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == dom.len() {
            return true;
        }
        for t in 0..dom.len() {
            if used[t] {
                continue;
            }
            image[depth] = t;
            if preserves(a, b, &dom[..=depth], image, Some(depth)) {
                used[t] = true;
                if search(a, b, dom, depth + 1, image, used) {
                    return true;
                }
                used[t] = false;
            }
            image[depth] = usize::MAX;
        }
        false
    }

    if search(a, b, &dom, 0, &mut image, &mut used) {
        Ok(Some(PartialMap {
            pairs: image.into_iter().enumerate().collect(),
        }))
    } else {
        Ok(None)
    }
}

/// An encoding of an isomorphism class, comparable and hashable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

/// All permutations of `0..m` in lexicographic order, cached per `m`.
pub(crate) fn permutations(m: usize) -> &'static [Vec<u8>] {
    static TABLES: [OnceLock<Vec<Vec<u8>>>; CANON_BOUND + 1] =
        [const { OnceLock::new() }; CANON_BOUND + 1];
    assert!(m <= CANON_BOUND, "permutation table requested for m = {m}");
    TABLES[m].get_or_init(|| {
        let mut out = Vec::new();
        let mut perm: Vec<u8> = (0..m as u8).collect();
        loop {
            out.push(perm.clone());
            // next lexicographic permutation
            let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
                break;
            };
            let j = (i..perm.len())
                .rev()
                .find(|&j| perm[j] > perm[i - 1])
                .unwrap();
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        out
    })
}

/// Minimum over all relabelings of the characteristic bit vectors of the relations.
///
/// The header records the domain size and the arities, so forms of
/// structures with different shapes never coincide.
pub fn canonical_form(y: &Structure) -> Result<CanonicalForm> {
    let m = y.size();
    if m > CANON_BOUND {
        return Err(Error::UnsupportedSize {
            what: "canonical form domain",
            size: m,
            bound: CANON_BOUND,
        });
    }
    let mut header = vec![m as u8];
    header.extend(y.signature().symbols().iter().map(|s| s.arity as u8));
    let widths: Vec<usize> = y
        .signature()
        .symbols()
        .iter()
        .map(|s| m.pow(s.arity as u32).div_ceil(8))
        .collect();
    let body_len: usize = widths.iter().sum();
    let tuples: Vec<Vec<&[usize]>> = y
        .relations()
        .iter()
        .map(|r| r.iter().map(|t| t.as_slice()).collect())
        .collect();

    let mut best: Option<Vec<u8>> = None;
    let mut buf = vec![0u8; body_len];
    for perm in permutations(m) {
        buf.iter_mut().for_each(|b| *b = 0);
        let mut offset = 0;
        for (rel, width) in tuples.iter().zip(&widths) {
            for t in rel {
                let idx = t.iter().fold(0usize, |acc, &e| acc * m + perm[e] as usize);
                buf[offset + idx / 8] |= 0x80 >> (idx % 8);
            }
            offset += width;
        }
        if best.as_ref().is_none_or(|b| buf < *b) {
            best = Some(buf.clone());
        }
    }
    header.extend(best.unwrap_or_default());
    Ok(CanonicalForm(header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn pm(pairs: &[(usize, usize)]) -> PartialMap {
        PartialMap::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn partial_automorphisms_of_chain() {
        let lo = Structure::linear_order(5, "<");
        assert!(is_partial_automorphism(&lo, &pm(&[(0, 1), (2, 3)])).unwrap());
        assert!(!is_partial_automorphism(&lo, &pm(&[(0, 1), (2, 0)])).unwrap());
        assert!(is_partial_automorphism(&lo, &PartialMap::empty()).unwrap());
        assert!(is_partial_automorphism(&lo, &pm(&[(5, 1)])).is_err());
    }

    #[test]
    fn c5_edge_to_edge() {
        // tuples over {0,1}: 00, 01, 10, 11 -> 00, 04, 40, 44
        let c5 = Structure::cycle(5, "E");
        assert!(is_partial_automorphism(&c5, &pm(&[(0, 0), (1, 4)])).unwrap());
        assert!(!is_partial_automorphism(&c5, &pm(&[(0, 0), (1, 2)])).unwrap());
    }

    #[test]
    fn partial_map_rejects_non_injective() {
        assert!(PartialMap::new([(0, 1), (2, 1)]).is_err());
        assert!(PartialMap::new([(0, 1), (0, 2)]).is_err());
    }

    #[test]
    fn enumerate_pure_set() {
        let y = Structure::empty(Signature::empty(), 3);
        let maps: Vec<_> = enumerate_partial_automorphisms(&y, 1).collect();
        assert_eq!(maps.len(), 10);
        assert!(maps[0].is_empty());
        assert_eq!(maps[1], pm(&[(0, 0)]));
        assert_eq!(maps[9], pm(&[(2, 2)]));
    }

    #[test]
    fn enumerate_chain_counts() {
        let lo = Structure::linear_order(3, "<");
        let maps: Vec<_> = enumerate_partial_automorphisms(&lo, 3).collect();
        let mut by_size = [0usize; 4];
        for m in &maps {
            by_size[m.len()] += 1;
        }
        assert_eq!(by_size, [1, 9, 9, 1]);
        assert_eq!(maps.len(), 20);
    }

    #[test]
    fn enumerate_unary() {
        let sig = Signature::from_pairs(&[("U", 1)]).unwrap();
        let y = Structure::from_tuples(sig, 2, &[("U", &[&[0]])]).unwrap();
        let maps: Vec<_> = enumerate_partial_automorphisms(&y, 1).collect();
        assert_eq!(
            maps,
            vec![PartialMap::empty(), pm(&[(0, 0)]), pm(&[(1, 1)])]
        );
    }

    #[test]
    fn enumeration_is_sorted_and_complete() {
        let c4 = Structure::cycle(4, "E");
        let maps: Vec<_> = enumerate_partial_automorphisms(&c4, 4).collect();
        let keys: Vec<Vec<(usize, usize)>> = maps.iter().map(|m| m.pairs().collect()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        assert!(maps
            .iter()
            .all(|m| is_partial_automorphism(&c4, m).unwrap()));
        // the 8 automorphisms of the square
        assert_eq!(maps.iter().filter(|m| m.len() == 4).count(), 8);
    }

    #[test]
    fn isomorphisms() {
        let a = Structure::path(3, "E");
        let sig = a.signature().clone();
        let b = Structure::from_tuples(sig, 3, &[("E", &[&[1, 0], &[0, 1], &[0, 2], &[2, 0]])])
            .unwrap();
        let iso = find_isomorphism(&a, &b).unwrap().unwrap();
        // endpoints 0, 2 of a go to endpoints 1, 2 of b
        assert_eq!(iso, pm(&[(0, 1), (1, 0), (2, 2)]));

        let c5 = Structure::cycle(5, "E");
        assert_eq!(
            find_isomorphism(&c5, &Structure::path(5, "E")).unwrap(),
            None
        );
        assert_eq!(
            find_isomorphism(&c5, &c5).unwrap(),
            Some(PartialMap::identity(0..5))
        );
        assert!(find_isomorphism(&c5, &Structure::linear_order(5, "<")).is_err());
    }

    #[test]
    fn canonical_forms() {
        let c5 = Structure::cycle(5, "E");
        let shuffled = c5.relabel(&[3, 0, 4, 1, 2]);
        assert_eq!(
            canonical_form(&c5).unwrap(),
            canonical_form(&shuffled).unwrap()
        );
        assert_ne!(
            canonical_form(&c5).unwrap(),
            canonical_form(&Structure::path(5, "E")).unwrap()
        );
        let pure = Structure::empty(Signature::empty(), 4);
        assert_eq!(canonical_form(&pure).unwrap().to_hex(), "04");
        let big = Structure::empty(Signature::empty(), 9);
        assert!(matches!(
            canonical_form(&big),
            Err(Error::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn permutation_tables() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(5).len(), 120);
    }
}
