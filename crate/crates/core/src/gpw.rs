//! The family of all chaining orders over a fixed `F`, and its
//! classification against the three shapes of the Gibson-Pouzet-Woodrow
//! description: every order; the rotations of one order and their
//! reverses; or arbitrary rearrangements of bounded end segments `K`, `H`
//! around a fixed middle `M`, together with the reverses.
//!
//! The description is a theorem about infinite structures. Here it is a
//! pattern to match, and [`GpwCase::Unmatched`] is an ordinary result.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::chainability::search_orders;
use crate::error::{Error, Result};
use crate::structure::Structure;

/// Largest `|Y \ F|` for which the family is enumerated.
pub const FAMILY_BOUND: usize = 8;

/// All arrangements of `Y \ F` that chain the structure over `F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainOrderFamily {
    #[serde(rename = "f")]
    pub f_set: Vec<usize>,
    /// Sorted lexicographically.
    pub orders: Vec<Vec<usize>>,
}

impl ChainOrderFamily {
    /// Builds a family from arbitrary orders, sorting and deduplicating them.
    pub fn new(mut f_set: Vec<usize>, orders: impl IntoIterator<Item = Vec<usize>>) -> Self {
        f_set.sort_unstable();
        let orders: BTreeSet<Vec<usize>> = orders.into_iter().collect();
        ChainOrderFamily {
            f_set,
            orders: orders.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Whether every member's reverse is a member.
    pub fn is_reversal_closed(&self) -> bool {
        let set: BTreeSet<&Vec<usize>> = self.orders.iter().collect();
        self.orders.iter().all(|o| {
            let rev: Vec<usize> = o.iter().rev().copied().collect();
            set.contains(&rev)
        })
    }
}

/// Filters the arrangements of `Y \ F` through chainability, in lexicographic order.
pub fn enumerate_chaining_orders(y: &Structure, f_set: &[usize]) -> Result<ChainOrderFamily> {
    let rest = y.size().saturating_sub(f_set.len());
    if rest > FAMILY_BOUND {
        return Err(Error::UnsupportedSize {
            what: "chaining-order family over a complement",
            size: rest,
            bound: FAMILY_BOUND,
        });
    }
    let mut orders = Vec::new();
    search_orders(y, f_set, |o| {
        orders.push(o.to_vec());
        true
    })?;
    let mut f_set = f_set.to_vec();
    f_set.sort_unstable();
    Ok(ChainOrderFamily { f_set, orders })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "tag")]
pub enum GpwCase {
    /// Every linear order of `Y \ F` chains.
    AllOrders,
    /// Rotations `F' + I` of `base = I + F'` and their reverses.
    RotationFamily { base: Vec<usize> },
    /// Rearrangements of the end segments `k` (prefix) and `h` (suffix)
    /// of `base` around the fixed `middle`, plus reverses.
    BoundedPerturbation {
        k: Vec<usize>,
        h: Vec<usize>,
        middle: Vec<usize>,
        base: Vec<usize>,
    },
    /// No shape fits. `witness` is a family member outside the two-element
    /// pattern of the least member, or, when `in_family` is false, that
    /// member's reverse, which the family lacks.
    Unmatched {
        witness: Vec<usize>,
        in_family: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub family_size: usize,
    pub rest_size: usize,
    /// Less specific shapes that also describe the family exactly.
    pub also_matches: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GpwClassification {
    #[serde(flatten)]
    pub case: GpwCase,
    pub evidence: Evidence,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn reversed(o: &[usize]) -> Vec<usize> {
    o.iter().rev().copied().collect()
}

/// Rotations of `base` and their reverses.
pub fn rotation_pattern(base: &[usize]) -> BTreeSet<Vec<usize>> {
    let n = base.len();
    let mut out = BTreeSet::new();
    for s in 0..=n {
        let rot: Vec<usize> = base[s..].iter().chain(&base[..s]).copied().collect();
        out.insert(reversed(&rot));
        out.insert(rot);
    }
    out
}

/// `perm(K) + M + perm(H)` over all rearrangements, plus reverses, where
/// `K` is the first `a` and `H` the last `b` entries of `base`.
pub fn perturbation_pattern(base: &[usize], a: usize, b: usize) -> BTreeSet<Vec<usize>> {
    let n = base.len();
    assert!(a + b <= n, "segments overlap");
    let (k, rest) = base.split_at(a);
    let (middle, h) = rest.split_at(n - a - b);
    let mut out = BTreeSet::new();
    for pk in k.iter().copied().permutations(a) {
        for ph in h.iter().copied().permutations(b) {
            let o: Vec<usize> = pk.iter().chain(middle).chain(&ph).copied().collect();
            out.insert(reversed(&o));
            out.insert(o);
        }
    }
    out
}

fn matches_perturbation(base: &[usize], a: usize, b: usize, target: &BTreeSet<Vec<usize>>) -> bool {
    let block = factorial(a) * factorial(b);
    // the pattern has |P| or 2|P| members
    if target.len() < block || target.len() > 2 * block {
        return false;
    }
    perturbation_pattern(base, a, b) == *target
}

/// Classifies the family, preferring all orders, then rotations, then
/// bounded perturbations.
pub fn classify_family(fam: &ChainOrderFamily) -> Result<GpwClassification> {
    let orders: BTreeSet<Vec<usize>> = fam.orders.iter().cloned().collect();
    let first = orders
        .iter()
        .next()
        .ok_or_else(|| Error::Precondition("empty chaining-order family".into()))?
        .clone();
    let elems: BTreeSet<usize> = first.iter().copied().collect();
    if elems.len() != first.len()
        || orders
            .iter()
            .any(|o| o.len() != first.len() || o.iter().copied().collect::<BTreeSet<_>>() != elems)
    {
        return Err(Error::Domain(
            "family members are not arrangements of one set".into(),
        ));
    }
    let n = first.len();
    let evidence = |also_matches| Evidence {
        family_size: orders.len(),
        rest_size: n,
        also_matches,
    };

    if orders.len() == factorial(n) {
        let mut also = Vec::new();
        if rotation_pattern(&first) == orders {
            also.push("RotationFamily");
        }
        // K = everything always matches
        also.push("BoundedPerturbation");
        return Ok(GpwClassification {
            case: GpwCase::AllOrders,
            evidence: evidence(also),
        });
    }

    if orders.len() <= 2 * (n + 1) {
        if let Some(base) = orders.iter().find(|base| rotation_pattern(base) == orders) {
            let mut also = Vec::new();
            if (0..=n).any(|a| (0..=n - a).any(|b| matches_perturbation(base, a, b, &orders))) {
                also.push("BoundedPerturbation");
            }
            return Ok(GpwClassification {
                case: GpwCase::RotationFamily { base: base.clone() },
                evidence: evidence(also),
            });
        }
    }

    // smallest |K| + |H|, then lexicographic K, then H, then base;
    // the trailing pair is the split (|K|, |H|) inside `base`
    type Candidate = (usize, Vec<usize>, Vec<usize>, Vec<usize>, usize, usize);
    let mut best: Option<Candidate> = None;
    for total in 0..=n {
        for base in &orders {
            for a in 0..=total {
                let b = total - a;
                if !matches_perturbation(base, a, b, &orders) {
                    continue;
                }
                let mut k = base[..a].to_vec();
                let mut h = base[n - b..].to_vec();
                k.sort_unstable();
                h.sort_unstable();
                let cand = (total, k, h, base.clone(), a, b);
                if best.as_ref().is_none_or(|cur| cand < *cur) {
                    best = Some(cand);
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    if let Some((_, k, h, base, a, b)) = best {
        let middle = base[a..n - b].to_vec();
        return Ok(GpwClassification {
            case: GpwCase::BoundedPerturbation { k, h, middle, base },
            evidence: evidence(Vec::new()),
        });
    }

    let pair = BTreeSet::from([first.clone(), reversed(&first)]);
    let case = match orders.iter().find(|o| !pair.contains(*o)) {
        Some(w) => GpwCase::Unmatched {
            witness: w.clone(),
            in_family: true,
        },
        None => GpwCase::Unmatched {
            witness: reversed(&first),
            in_family: false,
        },
    };
    Ok(GpwClassification {
        case,
        evidence: evidence(Vec::new()),
    })
}

/// A structure's chaining-order family over `F` with its classification;
/// `class` is absent when no order chains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifiedFamily {
    #[serde(rename = "f")]
    pub f_set: Vec<usize>,
    pub orders: Vec<Vec<usize>>,
    pub class: Option<GpwClassification>,
}

pub fn classify_orders(y: &Structure, f_set: &[usize]) -> Result<ClassifiedFamily> {
    let fam = enumerate_chaining_orders(y, f_set)?;
    let class = if fam.is_empty() {
        None
    } else {
        Some(classify_family(&fam)?)
    };
    Ok(ClassifiedFamily {
        f_set: fam.f_set,
        orders: fam.orders,
        class,
    })
}

/// The set of orders described by a classification, for soundness checks.
pub fn expand_case(case: &GpwCase, rest: &[usize]) -> Option<BTreeSet<Vec<usize>>> {
    match case {
        GpwCase::AllOrders => Some(rest.iter().copied().permutations(rest.len()).collect()),
        GpwCase::RotationFamily { base } => Some(rotation_pattern(base)),
        GpwCase::BoundedPerturbation { k, h, base, .. } => {
            Some(perturbation_pattern(base, k.len(), h.len()))
        }
        GpwCase::Unmatched { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    /// Clockwise triples of the regular pentagon `0, .., 4`.
    fn pentagon() -> Structure {
        let sig = Signature::from_pairs(&[("C", 3)]).unwrap();
        let mut triples = Vec::new();
        for a in 0..5usize {
            for b in 0..5usize {
                for c in 0..5usize {
                    let (db, dc) = ((b + 5 - a) % 5, (c + 5 - a) % 5);
                    if db != 0 && dc != 0 && db < dc {
                        triples.push(vec![a, b, c]);
                    }
                }
            }
        }
        let refs: Vec<&[usize]> = triples.iter().map(Vec::as_slice).collect();
        Structure::from_tuples(sig, 5, &[("C", &refs)]).unwrap()
    }

    fn single_unary() -> Structure {
        let sig = Signature::from_pairs(&[("U", 1)]).unwrap();
        Structure::from_tuples(sig, 5, &[("U", &[&[0]])]).unwrap()
    }

    #[test]
    fn chain_family() {
        let fam = enumerate_chaining_orders(&Structure::linear_order(5, "<"), &[]).unwrap();
        assert_eq!(fam.orders, vec![vec![0, 1, 2, 3, 4], vec![4, 3, 2, 1, 0]]);
        let class = classify_family(&fam).unwrap();
        assert_eq!(
            class.case,
            GpwCase::BoundedPerturbation {
                k: vec![],
                h: vec![],
                middle: vec![0, 1, 2, 3, 4],
                base: vec![0, 1, 2, 3, 4],
            }
        );
    }

    #[test]
    fn pentagon_family() {
        let fam = enumerate_chaining_orders(&pentagon(), &[]).unwrap();
        assert_eq!(fam.len(), 10);
        assert!(fam.is_reversal_closed());
        let class = classify_family(&fam).unwrap();
        assert_eq!(
            class.case,
            GpwCase::RotationFamily {
                base: vec![0, 1, 2, 3, 4]
            }
        );
        assert_eq!(rotation_pattern(&[0, 1, 2, 3, 4]).len(), 10);
    }

    #[test]
    fn unary_family() {
        let fam = enumerate_chaining_orders(&single_unary(), &[0]).unwrap();
        assert_eq!(fam.len(), 24);
        let class = classify_family(&fam).unwrap();
        assert_eq!(class.case, GpwCase::AllOrders);
        assert_eq!(class.evidence.also_matches, vec!["BoundedPerturbation"]);
    }

    #[test]
    fn json_shape() {
        let fam = enumerate_chaining_orders(&pentagon(), &[]).unwrap();
        let class = classify_family(&fam).unwrap();
        let text = serde_json::to_string(&class).unwrap();
        assert!(
            text.starts_with(r#"{"tag":"RotationFamily","base":[0,1,2,3,4],"evidence":"#),
            "{text}"
        );
    }

    #[test]
    fn presentation_order_is_irrelevant() {
        let fam = enumerate_chaining_orders(&pentagon(), &[]).unwrap();
        let mut shuffled = fam.clone();
        shuffled.orders.reverse();
        shuffled.orders.rotate_left(3);
        assert_eq!(
            classify_family(&shuffled).unwrap(),
            classify_family(&fam).unwrap()
        );
    }

    #[test]
    fn end_perturbation() {
        let base = vec![0, 1, 2, 3, 4, 5];
        let fam = ChainOrderFamily::new(vec![], perturbation_pattern(&base, 2, 2));
        let class = classify_family(&fam).unwrap();
        match class.case {
            GpwCase::BoundedPerturbation { k, h, middle, .. } => {
                assert_eq!((k, h), (vec![0, 1], vec![4, 5]));
                assert_eq!(middle, vec![2, 3]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unmatched_and_errors() {
        let fam = ChainOrderFamily::new(vec![], [vec![0, 1, 2, 3], vec![1, 0, 3, 2]]);
        let class = classify_family(&fam).unwrap();
        assert_eq!(
            class.case,
            GpwCase::Unmatched {
                witness: vec![1, 0, 3, 2],
                in_family: true
            }
        );
        let lone = ChainOrderFamily::new(vec![], [vec![0, 1, 2, 3]]);
        assert!(matches!(
            classify_family(&lone).unwrap().case,
            GpwCase::Unmatched {
                in_family: false,
                ..
            }
        ));
        assert!(classify_family(&ChainOrderFamily::new(vec![], [])).is_err());
        let mixed = ChainOrderFamily::new(vec![], [vec![0, 1], vec![0, 2]]);
        assert!(classify_family(&mixed).is_err());
    }

    #[test]
    fn size_cap() {
        let big = Structure::empty(Signature::empty(), 9);
        assert!(enumerate_chaining_orders(&big, &[]).is_err());
        assert!(enumerate_chaining_orders(&big, &[0]).is_ok());
    }
}
