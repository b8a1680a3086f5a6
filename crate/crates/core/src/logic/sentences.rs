//! Sentence families: age sentences for a finite family of types, the
//! companion axioms, and the two endpoint sentences.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::logic::{eval_formula, Assignment, Formula};
use crate::morphism::{all_tuples, canonical_form, permutations};
use crate::structure::{unary_name, Structure, ORDER_SYMBOL};

/// Largest family member size accepted by [`age_sentence`]; the sentence
/// contains one disjunct per permutation of the variables.
pub const AGE_SENTENCE_BOUND: usize = 6;

fn var_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Conjunction of the literals over `keep` true of the enumeration
/// `0, .., n-1` of `k`, with position `i` written as `names[i]`.
fn diagram(k: &Structure, keep: &[usize], names: &[String]) -> Formula {
    let n = k.size();
    let mut lits = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            lits.push(Formula::not(Formula::eq(
                names[i].clone(),
                names[j].clone(),
            )));
        }
    }
    let elems: Vec<usize> = (0..n).collect();
    for &idx in keep {
        let sym = &k.signature().symbols()[idx];
        all_tuples(&elems, sym.arity, |t| {
            let atom = Formula::rel(sym.name.clone(), t.iter().map(|&e| names[e].clone()));
            lits.push(if k.holds(idx, t) {
                atom
            } else {
                Formula::not(atom)
            });
            true
        });
    }
    Formula::conj(lits, &names[0])
}

/// The sentence true in `y` iff the `keep`-reducts of the `n`-element
/// substructures of `y` realize exactly the types of the family's reducts.
///
/// Each member contributes the disjunction, over all permutations of the
/// variables, of its literal diagram; the sentence asserts that every member
/// is realized and that every `n` distinct elements realize some member.
pub fn age_sentence(family: &[Structure], keep: &[&str]) -> Result<Formula> {
    let first = family
        .first()
        .ok_or_else(|| Error::Precondition("empty family".into()))?;
    let n = first.size();
    let sig = first.signature();
    for k in family {
        if k.size() != n {
            return Err(Error::Domain(format!(
                "family mixes sizes {n} and {}",
                k.size()
            )));
        }
        if k.signature() != sig {
            return Err(Error::SignatureMismatch(
                "family members differ in signature".into(),
            ));
        }
    }
    if n == 0 {
        return Err(Error::Precondition(
            "family members must be non-empty".into(),
        ));
    }
    if n > AGE_SENTENCE_BOUND {
        return Err(Error::UnsupportedSize {
            what: "age sentence arity",
            size: n,
            bound: AGE_SENTENCE_BOUND,
        });
    }
    let keep_idx = keep_indices(first, keep)?;

    let vars = var_names(n);
    let types: Vec<Formula> = family
        .iter()
        .map(|k| {
            let disjuncts = permutations(n).iter().map(|pi| {
                let names: Vec<String> = pi.iter().map(|&p| vars[p as usize].clone()).collect();
                diagram(k, &keep_idx, &names)
            });
            Formula::disj(disjuncts, &vars[0])
        })
        .collect();

    let mut conjuncts: Vec<Formula> = types
        .iter()
        .map(|phi| Formula::exists_all(&vars, phi.clone()))
        .collect();
    let any = Formula::disj(types, &vars[0]);
    let distinct: Vec<Formula> = (0..n)
        .tuple_combinations()
        .map(|(i, j)| Formula::not(Formula::eq(vars[i].clone(), vars[j].clone())))
        .collect();
    let body = if distinct.is_empty() {
        any
    } else {
        Formula::implies(Formula::conj(distinct, &vars[0]), any)
    };
    conjuncts.push(Formula::forall_all(&vars, body));
    Ok(Formula::conj(conjuncts, &vars[0]))
}

fn keep_indices(y: &Structure, keep: &[&str]) -> Result<Vec<usize>> {
    let sig = y.signature();
    let mut idx: Vec<usize> = keep
        .iter()
        .map(|name| {
            sig.index_of(name)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
        })
        .collect::<Result<_>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

/// Compares the truth value of [`age_sentence`] in `y` with a direct
/// comparison of reduct types. Returns `true` when they agree.
pub fn check_age_sentence_agreement(
    family: &[Structure],
    keep: &[&str],
    y: &Structure,
) -> Result<bool> {
    let sentence = age_sentence(family, keep)?;
    if y.signature() != family[0].signature() {
        return Err(Error::SignatureMismatch(
            "structure and family differ in signature".into(),
        ));
    }
    let syntactic = eval_formula(&sentence, y, &Assignment::new())?;
    Ok(syntactic == reduct_ages_match(family, keep, y)?)
}

/// Direct semantic side: do the `keep`-reducts of `n`-subsets of `y` have
/// exactly the isomorphism types of the family's reducts?
pub fn reduct_ages_match(family: &[Structure], keep: &[&str], y: &Structure) -> Result<bool> {
    let n = family[0].size();
    let wanted: BTreeSet<_> = family
        .iter()
        .map(|k| canonical_form(&k.reduct(keep)?))
        .collect::<Result<_>>()?;
    let reduced = y.reduct(keep)?;
    let realized: BTreeSet<_> = if n > reduced.size() {
        BTreeSet::new()
    } else {
        (0..reduced.size())
            .combinations(n)
            .map(|h| canonical_form(&reduced.induced_substructure(&h)?))
            .collect::<Result<_>>()?
    };
    Ok(wanted == realized)
}

fn order(a: &str, b: &str) -> Formula {
    Formula::rel(ORDER_SYMBOL, [a, b])
}

fn unary(j: usize, v: &str) -> Formula {
    Formula::rel(unary_name(j), [v])
}

/// Companion-language sentences stating that `R` is a strict linear order,
/// the `U_j` are distinct singletons ordered as their indices, and their
/// union is an initial segment.
pub fn theory_star_sentences(k: usize) -> Vec<Formula> {
    let mut out = vec![
        Formula::forall("u", Formula::not(order("u", "u"))),
        Formula::forall(
            "u",
            Formula::forall(
                "v",
                Formula::forall(
                    "w",
                    Formula::implies(
                        Formula::and(order("u", "v"), order("v", "w")),
                        order("u", "w"),
                    ),
                ),
            ),
        ),
        Formula::forall(
            "u",
            Formula::forall(
                "v",
                Formula::or(
                    Formula::eq("u", "v"),
                    Formula::or(order("u", "v"), order("v", "u")),
                ),
            ),
        ),
    ];
    for j in 0..k {
        out.push(Formula::exists(
            "u",
            Formula::and(
                unary(j, "u"),
                Formula::forall("v", Formula::implies(unary(j, "v"), Formula::eq("v", "u"))),
            ),
        ));
    }
    for (i, j) in (0..k).tuple_combinations() {
        out.push(Formula::forall(
            "u",
            Formula::not(Formula::and(unary(i, "u"), unary(j, "u"))),
        ));
    }
    for (i, j) in (0..k).tuple_combinations() {
        out.push(Formula::forall(
            "u",
            Formula::forall(
                "v",
                Formula::implies(Formula::and(unary(i, "u"), unary(j, "v")), order("u", "v")),
            ),
        ));
    }
    if k > 0 {
        let outside = Formula::conj((0..k).map(|j| Formula::not(unary(j, "v"))), "v");
        out.push(Formula::forall(
            "u",
            Formula::forall(
                "v",
                Formula::implies(Formula::and(unary(k - 1, "u"), outside), order("u", "v")),
            ),
        ));
    }
    out
}

/// `(theta0, theta1)`: the last constant has an immediate successor, and
/// the order has a maximum.
pub fn endpoint_sentences(k: usize) -> Result<(Formula, Formula)> {
    if k == 0 {
        return Err(Error::Precondition(
            "the successor sentence needs at least one constant".into(),
        ));
    }
    let no_between = Formula::not(Formula::exists(
        "w",
        Formula::and(order("u", "w"), order("w", "v")),
    ));
    let theta0 = Formula::exists(
        "v",
        Formula::forall(
            "u",
            Formula::implies(unary(k - 1, "u"), Formula::and(order("u", "v"), no_between)),
        ),
    );
    let theta1 = Formula::exists(
        "v",
        Formula::forall(
            "u",
            Formula::implies(Formula::not(Formula::eq("u", "v")), order("u", "v")),
        ),
    );
    Ok((theta0, theta1))
}
