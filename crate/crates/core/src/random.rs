//! Seeded generation of structures, companions, definition sets and
//! formulas.
//!
//! All randomness comes from SplitMix64 (state initialized to the seed,
//! increment `0x9e3779b97f4a7c15`). A draw in `[0, 1)` is `(x >> 11) * 2^-53`;
//! a draw below `n` is `x % n`. [`generate`] visits symbols in signature
//! order and, for each symbol, first draws its arity (only when the arity
//! bounds differ) and then one float per candidate tuple in lexicographic
//! order, keeping the tuple when the float is below the density.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{realizable_types, Definition, Formula, QfDefinitionSet};
use crate::morphism::all_tuples;
use crate::structure::{Companion, Signature, Structure, Symbol};

pub const MAX_SIZE: usize = 8;
pub const MAX_ARITY: usize = 4;
pub const MAX_SYMBOLS: usize = 8;

#[derive(Debug, Clone)]
pub struct SeededRng(SplitMix64);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform-ish draw in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn subset(&mut self, elems: &[usize], p: f64) -> Vec<usize> {
        elems.iter().copied().filter(|_| self.chance(p)).collect()
    }
}

/// Parameters of a seeded random structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub size: usize,
    pub symbols: usize,
    pub min_arity: usize,
    pub max_arity: usize,
    pub density: f64,
}

impl RandomSpec {
    fn validate(&self) -> Result<()> {
        let cap = |what, size, bound| {
            if size > bound {
                Err(Error::UnsupportedSize { what, size, bound })
            } else {
                Ok(())
            }
        };
        cap("random structure size", self.size, MAX_SIZE)?;
        cap("random symbol count", self.symbols, MAX_SYMBOLS)?;
        cap("random arity", self.max_arity, MAX_ARITY)?;
        if self.min_arity == 0 || self.min_arity > self.max_arity {
            return Err(Error::Domain(format!(
                "arity bounds {}..={} are empty or include 0",
                self.min_arity, self.max_arity
            )));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::Domain(format!(
                "density {} outside [0, 1]",
                self.density
            )));
        }
        Ok(())
    }
}

/// Symbol names used by [`generate`]: `E` alone, or `E0, E1, ..`.
pub fn symbol_name(index: usize, count: usize) -> String {
    if count == 1 {
        "E".to_string()
    } else {
        format!("E{index}")
    }
}

/// Deterministic structure for `spec`.
pub fn generate(spec: &RandomSpec) -> Result<Structure> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let mut symbols = Vec::with_capacity(spec.symbols);
    let mut relations = Vec::with_capacity(spec.symbols);
    let elems: Vec<usize> = (0..spec.size).collect();
    for i in 0..spec.symbols {
        let arity = if spec.min_arity < spec.max_arity {
            rng.range(spec.min_arity, spec.max_arity)
        } else {
            spec.min_arity
        };
        symbols.push(Symbol::new(symbol_name(i, spec.symbols), arity));
        let mut rel = std::collections::BTreeSet::new();
        all_tuples(&elems, arity, |t| {
            if rng.chance(spec.density) {
                rel.insert(t.to_vec());
            }
            true
        });
        relations.push(rel);
    }
    Structure::new(Signature::new(symbols)?, spec.size, relations)
}

/// Structure over a given signature, continuing the stream of `rng`.
pub fn random_structure(
    rng: &mut SeededRng,
    sig: &Signature,
    size: usize,
    density: f64,
) -> Structure {
    let elems: Vec<usize> = (0..size).collect();
    let relations = sig
        .symbols()
        .iter()
        .map(|s| {
            let mut rel = std::collections::BTreeSet::new();
            all_tuples(&elems, s.arity, |t| {
                if rng.chance(density) {
                    rel.insert(t.to_vec());
                }
                true
            });
            rel
        })
        .collect();
    Structure::new(sig.clone(), size, relations).expect("tuples are in range")
}

/// Signature with `count` symbols of arities drawn from `min..=max`.
pub fn random_signature(rng: &mut SeededRng, count: usize, min: usize, max: usize) -> Signature {
    let symbols = (0..count)
        .map(|i| Symbol::new(symbol_name(i, count), rng.range(min, max)))
        .collect();
    Signature::new(symbols).expect("generated names are distinct")
}

/// Companion with `constants` marked elements, everything shuffled.
pub fn random_companion(rng: &mut SeededRng, size: usize, constants: usize) -> Companion {
    let mut order: Vec<usize> = (0..size).collect();
    rng.shuffle(&mut order);
    let (c, rest) = order.split_at(constants.min(size));
    Companion::new(size, c, rest).expect("a shuffled domain is a valid companion")
}

/// Definition set keeping each realizable literal type with probability `p`.
pub fn random_definitions(
    rng: &mut SeededRng,
    x: &Companion,
    sig: &Signature,
    p: f64,
) -> QfDefinitionSet {
    let definitions = sig
        .symbols()
        .iter()
        .map(|s| {
            let types = realizable_types(x, s.arity)
                .into_iter()
                .filter(|_| rng.chance(p))
                .collect();
            (
                s.name.clone(),
                Definition {
                    arity: s.arity,
                    types,
                },
            )
        })
        .collect();
    QfDefinitionSet {
        constant_count: x.constant_count(),
        definitions,
    }
}

/// Random formula over `sig` with the given free variables and quantifier
/// depth at most `depth`. Bound variables are `u0, u1, ..` by nesting level.
///
/// Panics when there are neither free variables nor quantifiers to bind one.
pub fn random_formula(
    rng: &mut SeededRng,
    sig: &Signature,
    free: &[String],
    depth: usize,
) -> Formula {
    assert!(
        !free.is_empty() || depth > 0,
        "no variable available for atoms"
    );
    let mut scope = free.to_vec();
    formula_at(rng, sig, &mut scope, depth, 0, 4)
}

fn formula_at(
    rng: &mut SeededRng,
    sig: &Signature,
    scope: &mut Vec<String>,
    depth: usize,
    level: usize,
    budget: usize,
) -> Formula {
    let can_quantify = level < depth;
    let choice = if scope.is_empty() {
        5
    } else if budget == 0 {
        0
    } else {
        rng.below(if can_quantify { 6 } else { 4 })
    };
    match choice {
        0 | 1 => {
            if sig.is_empty() || rng.chance(0.25) {
                let a = scope[rng.below(scope.len())].clone();
                let b = scope[rng.below(scope.len())].clone();
                Formula::eq(a, b)
            } else {
                atom(rng, sig, scope)
            }
        }
        2 => Formula::not(formula_at(rng, sig, scope, depth, level, budget - 1)),
        3 => {
            let a = formula_at(rng, sig, scope, depth, level, budget - 1);
            let b = formula_at(rng, sig, scope, depth, level, budget - 1);
            if rng.chance(0.5) {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        _ => {
            let v = format!("u{level}");
            scope.push(v.clone());
            let body = formula_at(rng, sig, scope, depth, level + 1, budget.max(1));
            scope.pop();
            if rng.chance(0.5) {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
    }
}

fn atom(rng: &mut SeededRng, sig: &Signature, scope: &[String]) -> Formula {
    let s = &sig.symbols()[rng.below(sig.len())];
    let args: Vec<String> = (0..s.arity)
        .map(|_| scope[rng.below(scope.len())].clone())
        .collect();
    Formula::rel(s.name.clone(), args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainability::{is_chainable_with, ChainWitness};
    use crate::logic::apply_definitions;

    fn spec(seed: u64, density: f64) -> RandomSpec {
        RandomSpec {
            seed,
            size: 5,
            symbols: 2,
            min_arity: 1,
            max_arity: 3,
            density,
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs of SplitMix64 seeded with 1234567
        let mut rng = SeededRng::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
    }

    #[test]
    fn density_extremes() {
        let empty = generate(&spec(3, 0.0)).unwrap();
        assert!(empty.relations().iter().all(|r| r.is_empty()));
        let full = generate(&spec(3, 1.0)).unwrap();
        for (s, r) in full.signature().symbols().iter().zip(full.relations()) {
            assert_eq!(r.len(), 5usize.pow(s.arity as u32));
        }
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&generate(&spec(7, 0.4)).unwrap()).unwrap();
        let b = serde_json::to_string(&generate(&spec(7, 0.4)).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&generate(&spec(8, 0.4)).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn caps() {
        let mut s = spec(1, 0.5);
        s.size = 9;
        assert!(generate(&s).is_err());
        let mut s = spec(1, 0.5);
        s.max_arity = 5;
        assert!(generate(&s).is_err());
        let mut s = spec(1, 0.5);
        s.min_arity = 0;
        assert!(generate(&s).is_err());
        let mut s = spec(1, 1.5);
        s.density = 1.5;
        assert!(generate(&s).is_err());
    }

    #[test]
    fn names() {
        let one = RandomSpec {
            symbols: 1,
            ..spec(1, 0.5)
        };
        assert_eq!(generate(&one).unwrap().signature().symbols()[0].name, "E");
        assert_eq!(
            generate(&spec(1, 0.5)).unwrap().signature().symbols()[1].name,
            "E1"
        );
    }

    #[test]
    fn formulas_respect_depth_and_scope() {
        let mut rng = SeededRng::new(5);
        let sig = Signature::from_pairs(&[("E", 2), ("U", 1)]).unwrap();
        let free = vec!["v0".to_string(), "v1".to_string()];
        for _ in 0..500 {
            let f = random_formula(&mut rng, &sig, &free, 3);
            assert!(f.quantifier_depth() <= 3);
            assert!(f.free_variables().iter().all(|v| free.contains(v)));
        }
        let f = random_formula(&mut rng, &Signature::empty(), &[], 2);
        assert!(f.is_sentence());
    }

    #[test]
    fn random_definitions_chain() {
        let mut rng = SeededRng::new(11);
        let sig = Signature::from_pairs(&[("E", 2), ("T", 3)]).unwrap();
        for _ in 0..20 {
            let x = random_companion(&mut rng, 5, 2);
            let defs = random_definitions(&mut rng, &x, &sig, 0.5);
            let y = apply_definitions(&x, &defs, &sig).unwrap();
            let w = ChainWitness::new(x.constants().to_vec(), x.rest_order().to_vec());
            assert!(is_chainable_with(&y, &w).unwrap());
        }
    }
}
