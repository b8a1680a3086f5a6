//! Exhaustive corpora of small structures on one binary symbol `E`, one
//! representative per isomorphism type.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::morphism::canonical_form;
use crate::structure::{Signature, Structure, Tuple};

/// Largest size for [`binary_corpus`]; size 5 would mean 2^25 relations.
pub const BINARY_CORPUS_BOUND: usize = 4;
/// Largest size for [`graph_corpus`].
pub const GRAPH_CORPUS_BOUND: usize = 6;

fn binary_signature() -> Signature {
    Signature::from_pairs(&[("E", 2)]).expect("valid signature")
}

fn dedup_by_type(
    candidates: impl Iterator<Item = Structure>,
    out: &mut Vec<Structure>,
) -> Result<()> {
    let mut seen = BTreeSet::new();
    for y in candidates {
        if seen.insert(canonical_form(&y)?) {
            out.push(y);
        }
    }
    Ok(())
}

fn from_mask(sig: &Signature, size: usize, pairs: &[(usize, usize)], mask: u64) -> Structure {
    let rel: BTreeSet<Tuple> = pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .flat_map(|(_, &(a, b))| {
            if a == b || pairs.contains(&(b, a)) {
                vec![vec![a, b]]
            } else {
                // undirected edge stored once in `pairs`
                vec![vec![a, b], vec![b, a]]
            }
        })
        .collect();
    Structure::new(sig.clone(), size, vec![rel]).expect("pairs are in range")
}

/// Every binary relation on `0..m` for `m <= max_size`, up to isomorphism,
/// ordered by size and then by the bitmask of the first representative.
pub fn binary_corpus(max_size: usize) -> Result<Vec<Structure>> {
    if max_size > BINARY_CORPUS_BOUND {
        return Err(Error::UnsupportedSize {
            what: "binary corpus",
            size: max_size,
            bound: BINARY_CORPUS_BOUND,
        });
    }
    let sig = binary_signature();
    let mut out = Vec::new();
    for m in 0..=max_size {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
        let candidates = (0..1u64 << pairs.len()).map(|mask| from_mask(&sig, m, &pairs, mask));
        dedup_by_type(candidates, &mut out)?;
    }
    Ok(out)
}

/// Every loopless undirected graph (symmetric irreflexive `E`) on `0..m`
/// for `m <= max_size`, up to isomorphism.
pub fn graph_corpus(max_size: usize) -> Result<Vec<Structure>> {
    if max_size > GRAPH_CORPUS_BOUND {
        return Err(Error::UnsupportedSize {
            what: "graph corpus",
            size: max_size,
            bound: GRAPH_CORPUS_BOUND,
        });
    }
    let sig = binary_signature();
    let mut out = Vec::new();
    for m in 0..=max_size {
        let edges: Vec<(usize, usize)> = (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .collect();
        let candidates = (0..1u64 << edges.len()).map(|mask| from_mask(&sig, m, &edges, mask));
        dedup_by_type(candidates, &mut out)?;
    }
    Ok(out)
}

/// The default exhaustive corpus: all binary relations up to size 4 and
/// all graphs of size 5.
pub fn standard_corpus() -> Result<Vec<Structure>> {
    let mut out = binary_corpus(BINARY_CORPUS_BOUND)?;
    out.extend(graph_corpus(5)?.into_iter().filter(|g| g.size() == 5));
    Ok(out)
}
