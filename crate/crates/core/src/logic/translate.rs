use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{Formula, QfDefinitionSet};
use crate::structure::Signature;

/// Renames every atom's symbol to its representative; symbols absent from
/// `symbol_map` are kept. Arities are checked against `sig`.
pub fn quotient_translate(
    f: &Formula,
    symbol_map: &BTreeMap<String, String>,
    sig: &Signature,
) -> Result<Formula> {
    for (from, to) in symbol_map {
        let a = sig
            .arity_of(from)
            .ok_or_else(|| Error::UnknownSymbol(from.clone()))?;
        let b = sig
            .arity_of(to)
            .ok_or_else(|| Error::UnknownSymbol(to.clone()))?;
        if a != b {
            return Err(Error::ArityMismatch {
                symbol: to.clone(),
                expected: a,
                found: b,
            });
        }
    }
    f.try_map_atoms(&mut |name, args| {
        let target = symbol_map.get(name).map_or(name, String::as_str);
        Ok(Formula::rel(target, args.iter().cloned()))
    })
}

/// Replaces each object-language atom `R(x, ..)` by the definition of `R`
/// instantiated at `x, ..`, leaving equalities and connectives in place.
pub fn star_translate(f: &Formula, defs: &QfDefinitionSet) -> Result<Formula> {
    f.try_map_atoms(&mut |name, args| defs.formula(name, args))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval_formula, extract_definitions, Assignment};
    use crate::structure::{Companion, Structure};

    #[test]
    fn quotient_of_duplicate_symbol() {
        let sig = Signature::from_pairs(&[("E", 2), ("E2", 2)]).unwrap();
        let y = Structure::from_tuples(
            sig.clone(),
            3,
            &[("E", &[&[1, 1], &[0, 2]]), ("E2", &[&[1, 1], &[0, 2]])],
        )
        .unwrap();
        let f: Formula = "(exists v (rel E2 v v))".parse().unwrap();
        let map = BTreeMap::from([("E2".to_string(), "E".to_string())]);
        let g = quotient_translate(&f, &map, &sig).unwrap();
        assert_eq!(g.to_string(), "(exists v (rel E v v))");
        let none = Assignment::new();
        assert_eq!(
            eval_formula(&f, &y, &none).unwrap(),
            eval_formula(&g, &y.reduct(&["E"]).unwrap(), &none).unwrap()
        );
    }

    #[test]
    fn quotient_identity_and_errors() {
        let sig = Signature::from_pairs(&[("E", 2), ("U", 1)]).unwrap();
        let f: Formula = "(forall u (or (rel U u) (= u u)))".parse().unwrap();
        assert_eq!(quotient_translate(&f, &BTreeMap::new(), &sig).unwrap(), f);
        let g: Formula = "(= a b)".parse().unwrap();
        let map = BTreeMap::from([("E".to_string(), "E".to_string())]);
        assert_eq!(quotient_translate(&g, &map, &sig).unwrap(), g);
        let bad = BTreeMap::from([("U".to_string(), "E".to_string())]);
        assert!(matches!(
            quotient_translate(&f, &bad, &sig),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn star_of_chain_sentence() {
        let lo = Structure::linear_order(4, "E");
        let x = Companion::new(4, &[], &[0, 1, 2, 3]).unwrap();
        let defs = extract_definitions(&x, &lo).unwrap();
        let none = Assignment::new();
        for text in [
            "(exists u (exists v (rel E u v)))",
            "(forall u (not (rel E u u)))",
            "(exists u (forall v (or (= u v) (rel E v u))))",
        ] {
            let f: Formula = text.parse().unwrap();
            let star = star_translate(&f, &defs).unwrap();
            assert_eq!(
                eval_formula(&star, &x.to_structure(), &none).unwrap(),
                eval_formula(&f, &lo, &none).unwrap(),
                "{text}"
            );
        }
    }

    #[test]
    fn star_is_homomorphic() {
        let lo = Structure::linear_order(3, "E");
        let x = Companion::new(3, &[], &[0, 1, 2]).unwrap();
        let defs = extract_definitions(&x, &lo).unwrap();
        let eq: Formula = "(= v0 v1)".parse().unwrap();
        assert_eq!(star_translate(&eq, &defs).unwrap(), eq);
        let neg: Formula = "(not (rel E v0 v0))".parse().unwrap();
        let inner = defs.formula("E", &["v0".into(), "v0".into()]).unwrap();
        assert_eq!(star_translate(&neg, &defs).unwrap(), Formula::not(inner));
        let missing: Formula = "(rel F v0)".parse().unwrap();
        assert!(star_translate(&missing, &defs).is_err());
    }
}
