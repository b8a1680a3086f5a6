//! Named invariant suites over the exhaustive corpus and seeded random
//! inputs. Each suite counts cases and keeps the first few failures.

use std::cell::OnceCell;
use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;

use crate::chainability::{
    age_forms, age_subset, check_profile_bound, check_trace_isomorphism, is_chainable_with, kernel,
    ChainWitness, KernelReport,
};
use crate::corpus::standard_corpus;
use crate::error::{Error, Result};
use crate::gpw::{
    classify_family, enumerate_chaining_orders, expand_case, ChainOrderFamily, GpwCase,
};
use crate::logic::{
    apply_definitions, check_age_sentence_agreement, eval_at, eval_formula, extract_definitions,
    literal_type, quotient_translate, realizable_types, star_translate, theory_star_sentences,
    Assignment, LiteralType,
};
use crate::morphism::{
    all_tuples, canonical_form, enumerate_partial_automorphisms, find_isomorphism,
    is_partial_automorphism, PartialMap,
};
use crate::random::{
    random_companion, random_definitions, random_formula, random_signature, random_structure,
    SeededRng,
};
use crate::structure::{Companion, Signature, Structure, Symbol};

pub const SUITES: &[&str] = &[
    "reduction-oracle",
    "chain-reversal",
    "f-monotonicity",
    "profile-bound",
    "trace-isomorphism",
    "age-transfer",
    "definability-round-trip",
    "star-translation",
    "quotient-translation",
    "age-sentence",
    "literal-partition",
    "family-reversal",
    "classification-soundness",
    "classification-determinism",
    "trichotomy-coverage",
    "substructure-coherence",
    "reduct-commutes",
    "companion-axioms",
    "restriction-closure",
    "chain-reversal-pa",
    "iso-vs-canon",
];

const KEPT_FAILURES: usize = 5;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub only: Option<String>,
    pub seed: u64,
    /// Randomized cases per randomized suite.
    pub cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            only: None,
            seed: 1,
            cases: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub all_passed: bool,
    pub suites: Vec<SuiteReport>,
}

struct Tally(SuiteReport);

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally(SuiteReport {
            name,
            cases: 0,
            passed: 0,
            failed: 0,
            failures: Vec::new(),
        })
    }

    fn check(&mut self, ok: Result<bool>, describe: impl FnOnce() -> String) {
        self.0.cases += 1;
        match ok {
            Ok(true) => self.0.passed += 1,
            other => {
                self.0.failed += 1;
                if self.0.failures.len() < KEPT_FAILURES {
                    let mut text = describe();
                    if let Err(e) = other {
                        text.push_str(&format!(" ({e})"));
                    }
                    self.0.failures.push(text);
                }
            }
        }
    }
}

fn show(y: &Structure) -> String {
    serde_json::to_string(y).unwrap_or_default()
}

/// Chainability by quantifying over every partial automorphism of the
/// chain on `Y \ F`, each extended by the identity on `F`.
pub fn chainable_by_full_quantification(y: &Structure, w: &ChainWitness) -> Result<bool> {
    w.validate(y.size())?;
    let r = w.rest_order.len();
    let chain = Structure::linear_order(r, "<");
    for p in enumerate_partial_automorphisms(&chain, r) {
        let pairs = p
            .pairs()
            .map(|(s, t)| (w.rest_order[s], w.rest_order[t]))
            .chain(w.f_set.iter().map(|&f| (f, f)));
        if !is_partial_automorphism(y, &PartialMap::new(pairs)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every `(F, order)` pair on `0..m`.
pub fn all_witnesses(m: usize) -> Vec<ChainWitness> {
    let mut out = Vec::new();
    for f_size in 0..=m {
        for f in (0..m).combinations(f_size) {
            let rest: Vec<usize> = (0..m).filter(|e| !f.contains(e)).collect();
            for order in rest.iter().copied().permutations(rest.len()) {
                out.push(ChainWitness::new(f.clone(), order));
            }
        }
    }
    out
}

fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1u32 << m).map(move |mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
}

struct Context {
    opts: VerifyOptions,
    corpus: Vec<Structure>,
    kernels: OnceCell<Vec<KernelReport>>,
}

impl Context {
    fn kernels(&self) -> Result<&Vec<KernelReport>> {
        if self.kernels.get().is_none() {
            let ks = self
                .corpus
                .iter()
                .map(|y| kernel(y, y.size()))
                .collect::<Result<Vec<_>>>()?;
            let _ = self.kernels.set(ks);
        }
        Ok(self.kernels.get().expect("just set"))
    }

    fn rng(&self, suite: &str) -> SeededRng {
        // one independent stream per suite, so --only does not shift draws
        let salt = suite.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        });
        SeededRng::new(self.opts.seed ^ salt)
    }

    /// Small mixed-arity structure for randomized suites.
    fn random_small(&self, rng: &mut SeededRng, max_size: usize) -> Structure {
        let count = rng.range(1, 2);
        let sig = random_signature(rng, count, 1, 3);
        let size = rng.range(0, max_size);
        let density = rng.unit();
        random_structure(rng, &sig, size, density)
    }

    fn chainable_pairs(&self) -> Result<Vec<(usize, ChainWitness)>> {
        let mut out = Vec::new();
        for (i, y) in self.corpus.iter().enumerate() {
            for w in all_witnesses(y.size()) {
                if is_chainable_with(y, &w)? {
                    out.push((i, w));
                }
            }
        }
        Ok(out)
    }
}

/// Runs the selected suites. An unknown `only` name is an error.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(name) = &opts.only {
        if !SUITES.contains(&name.as_str()) {
            return Err(Error::Precondition(format!(
                "unknown suite `{name}`; expected one of {}",
                SUITES.join(", ")
            )));
        }
    }
    let ctx = Context {
        opts: opts.clone(),
        corpus: standard_corpus()?,
        kernels: OnceCell::new(),
    };
    let mut suites = Vec::new();
    for &name in SUITES {
        if opts.only.as_deref().is_some_and(|o| o != name) {
            continue;
        }
        let mut t = Tally::new(name);
        run_suite(&ctx, &mut t)?;
        suites.push(t.0);
    }
    Ok(VerifyReport {
        seed: opts.seed,
        cases: opts.cases,
        all_passed: suites.iter().all(|s| s.failed == 0),
        suites,
    })
}

fn run_suite(ctx: &Context, t: &mut Tally) -> Result<()> {
    match t.0.name {
        "reduction-oracle" => reduction_oracle(ctx, t),
        "chain-reversal" => chain_reversal(ctx, t),
        "f-monotonicity" => f_monotonicity(ctx, t),
        "profile-bound" => profile_bound(ctx, t),
        "trace-isomorphism" => trace_isomorphism(ctx, t),
        "age-transfer" => age_transfer(ctx, t),
        "definability-round-trip" => definability_round_trip(ctx, t),
        "star-translation" => star_translation(ctx, t),
        "quotient-translation" => quotient_translation(ctx, t),
        "age-sentence" => age_sentence_suite(ctx, t),
        "literal-partition" => literal_partition(ctx, t),
        "family-reversal" => family_reversal(ctx, t),
        "classification-soundness" => classification_soundness(ctx, t),
        "classification-determinism" => classification_determinism(ctx, t),
        "trichotomy-coverage" => trichotomy_coverage(ctx, t),
        "substructure-coherence" => substructure_coherence(ctx, t),
        "reduct-commutes" => reduct_commutes(ctx, t),
        "companion-axioms" => companion_axioms(ctx, t),
        "restriction-closure" => restriction_closure(ctx, t),
        "chain-reversal-pa" => chain_reversal_pa(t),
        "iso-vs-canon" => iso_vs_canon(ctx, t),
        other => Err(Error::Precondition(format!("unknown suite `{other}`"))),
    }
}

fn reduction_oracle(ctx: &Context, t: &mut Tally) -> Result<()> {
    let compare = |y: &Structure, w: &ChainWitness| -> Result<bool> {
        Ok(is_chainable_with(y, w)? == chainable_by_full_quantification(y, w)?)
    };
    for y in &ctx.corpus {
        for w in all_witnesses(y.size()) {
            t.check(compare(y, &w), || format!("{} with {w:?}", show(y)));
        }
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let y = ctx.random_small(&mut rng, 5);
        let w = random_witness(&mut rng, y.size());
        t.check(compare(&y, &w), || format!("{} with {w:?}", show(&y)));
    }
    Ok(())
}

fn random_witness(rng: &mut SeededRng, m: usize) -> ChainWitness {
    let elems: Vec<usize> = (0..m).collect();
    let p = rng.unit();
    let f = rng.subset(&elems, p * 0.6);
    let mut rest: Vec<usize> = elems.into_iter().filter(|e| !f.contains(e)).collect();
    rng.shuffle(&mut rest);
    ChainWitness::new(f, rest)
}

fn chain_reversal(ctx: &Context, t: &mut Tally) -> Result<()> {
    for y in &ctx.corpus {
        for w in all_witnesses(y.size()) {
            let ok = is_chainable_with(y, &w)
                .and_then(|a| Ok(a == is_chainable_with(y, &w.reversed())?));
            t.check(ok, || format!("{} with {w:?}", show(y)));
        }
    }
    Ok(())
}

fn f_monotonicity(ctx: &Context, t: &mut Tally) -> Result<()> {
    // only endpoints: fixing an interior point can break chainability
    // (the chain 0 < 1 < 2 is not chainable over {1} by any order)
    for (i, w) in ctx.chainable_pairs()? {
        let y = &ctx.corpus[i];
        let ends: BTreeSet<usize> = w
            .rest_order
            .first()
            .into_iter()
            .chain(w.rest_order.last())
            .copied()
            .collect();
        for e in ends {
            let mut f = w.f_set.clone();
            f.push(e);
            let order: Vec<usize> = w.rest_order.iter().copied().filter(|&x| x != e).collect();
            let bigger = ChainWitness::new(f, order);
            t.check(is_chainable_with(y, &bigger), || {
                format!("{} with {bigger:?}", show(y))
            });
        }
    }
    Ok(())
}

fn profile_bound(ctx: &Context, t: &mut Tally) -> Result<()> {
    for (y, k) in ctx.corpus.iter().zip(ctx.kernels()?) {
        let Some(min) = k.min_size else {
            t.check(Ok(false), || format!("{} has no kernel", show(y)));
            continue;
        };
        t.check(check_profile_bound(y, min, y.size()), || show(y));
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases / 10 {
        let y = ctx.random_small(&mut rng, 6);
        let ok = kernel(&y, y.size()).and_then(|k| match k.min_size {
            Some(min) => check_profile_bound(&y, min, y.size()),
            None => Ok(false),
        });
        t.check(ok, || show(&y));
    }
    Ok(())
}

fn trace_isomorphism(ctx: &Context, t: &mut Tally) -> Result<()> {
    for (i, w) in ctx.chainable_pairs()? {
        let y = &ctx.corpus[i];
        for n in 0..=y.size() {
            t.check(check_trace_isomorphism(y, &w, n), || {
                format!("{} with {w:?}, n = {n}", show(y))
            });
        }
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases / 10 {
        // chainable by construction
        let m = rng.range(1, 6);
        let k = rng.range(0, m.min(2));
        let x = random_companion(&mut rng, m, k);
        let sig = random_signature(&mut rng, 2, 1, 3);
        let defs = random_definitions(&mut rng, &x, &sig, 0.5);
        let y = apply_definitions(&x, &defs, &sig)?;
        let w = ChainWitness::new(x.constants().to_vec(), x.rest_order().to_vec());
        let n = rng.range(0, m);
        t.check(check_trace_isomorphism(&y, &w, n), || {
            format!("{} with {w:?}, n = {n}", show(&y))
        });
    }
    Ok(())
}

fn age_transfer(ctx: &Context, t: &mut Tally) -> Result<()> {
    let kernels = ctx.kernels()?;
    let mut by_form = BTreeMap::new();
    for (i, z) in ctx.corpus.iter().enumerate() {
        by_form.insert(canonical_form(z)?, i);
    }
    for (y, ky) in ctx.corpus.iter().zip(kernels) {
        for n in 1..=y.size() {
            for form in age_forms(y, n)? {
                // every z whose age sits inside Age(y) embeds, so it is one of these
                let Some(&j) = by_form.get(&form) else {
                    continue;
                };
                let z = &ctx.corpus[j];
                let ok = (|| {
                    for l in 1..=z.size() {
                        if !age_subset(z, y, l)? {
                            return Ok(false);
                        }
                    }
                    Ok(kernels[j].min_size <= ky.min_size)
                })();
                t.check(ok, || format!("{} inside {}", show(z), show(y)));
            }
        }
    }
    Ok(())
}

fn definability_round_trip(ctx: &Context, t: &mut Tally) -> Result<()> {
    for (i, w) in ctx.chainable_pairs()? {
        let y = &ctx.corpus[i];
        let ok = Companion::new(y.size(), &w.f_set, &w.rest_order).and_then(|x| {
            let defs = extract_definitions(&x, y)?;
            Ok(apply_definitions(&x, &defs, y.signature())? == *y)
        });
        t.check(ok, || format!("{} with {w:?}", show(y)));
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let m = rng.range(0, 5);
        let k = rng.range(0, m.min(2));
        let x = random_companion(&mut rng, m, k);
        let sig = random_signature(&mut rng, 2, 1, 3);
        let p = rng.unit();
        let defs = random_definitions(&mut rng, &x, &sig, p);
        let w = ChainWitness::new(x.constants().to_vec(), x.rest_order().to_vec());
        let ok = apply_definitions(&x, &defs, &sig).and_then(|y| is_chainable_with(&y, &w));
        t.check(ok, || format!("{x:?} with {defs:?}"));
    }
    Ok(())
}

fn star_translation(ctx: &Context, t: &mut Tally) -> Result<()> {
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let m = rng.range(1, 5);
        let k = rng.range(0, m.min(2));
        let x = random_companion(&mut rng, m, k);
        let count = rng.range(1, 3);
        let sig = random_signature(&mut rng, count, 1, 3);
        let p = rng.unit();
        let defs = random_definitions(&mut rng, &x, &sig, p);
        let free: Vec<String> = (0..rng.range(0, 2)).map(|i| format!("v{i}")).collect();
        let f = random_formula(&mut rng, &sig, &free, 3);
        let a: Assignment = free.iter().map(|v| (v.clone(), rng.below(m))).collect();
        let ok = (|| {
            let star = star_translate(&f, &defs)?;
            let y = apply_definitions(&x, &defs, &sig)?;
            Ok(eval_formula(&star, &x.to_structure(), &a)? == eval_formula(&f, &y, &a)?)
        })();
        t.check(ok, || format!("{f} on {x:?} with {defs:?} at {a:?}"));
    }
    Ok(())
}

fn quotient_translation(ctx: &Context, t: &mut Tally) -> Result<()> {
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let arity = rng.range(1, 3);
        let base = Signature::new(vec![Symbol::new("E0", arity), Symbol::new("E2", 1)])?;
        let m = rng.range(1, 5);
        let d = rng.unit();
        let small = random_structure(&mut rng, &base, m, d);
        let sig = Signature::new(vec![
            Symbol::new("E0", arity),
            Symbol::new("E1", arity),
            Symbol::new("E2", 1),
        ])?;
        let y = Structure::new(
            sig.clone(),
            m,
            vec![
                small.relation(0).clone(),
                small.relation(0).clone(),
                small.relation(1).clone(),
            ],
        )?;
        let free: Vec<String> = (0..rng.range(0, 2)).map(|i| format!("v{i}")).collect();
        let f = random_formula(&mut rng, &sig, &free, 3);
        let a: Assignment = free.iter().map(|v| (v.clone(), rng.below(m))).collect();
        let map = BTreeMap::from([("E1".to_string(), "E0".to_string())]);
        let ok = (|| {
            let g = quotient_translate(&f, &map, &sig)?;
            Ok(eval_formula(&f, &y, &a)? == eval_formula(&g, &small, &a)?)
        })();
        t.check(ok, || format!("{f} on {}", show(&y)));
    }
    Ok(())
}

/// One structure per isomorphism type among the `n`-subsets of `y`.
pub fn age_representatives(y: &Structure, n: usize) -> Result<Vec<Structure>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if n > y.size() {
        return Ok(out);
    }
    for h in (0..y.size()).combinations(n) {
        let s = y.induced_substructure(&h)?;
        if seen.insert(canonical_form(&s)?) {
            out.push(s);
        }
    }
    Ok(out)
}

fn age_sentence_suite(ctx: &Context, t: &mut Tally) -> Result<()> {
    let sub_signatures = |y: &Structure| -> Vec<Vec<String>> {
        let names: Vec<String> = y
            .signature()
            .symbols()
            .iter()
            .map(|s| s.name.clone())
            .collect();
        subsets(names.len())
            .map(|idx| idx.iter().map(|&i| names[i].clone()).collect())
            .collect()
    };
    let check = |y: &Structure, other: &Structure, t: &mut Tally| -> Result<()> {
        for n in 1..=y.size().min(3) {
            for own in [true, false] {
                let family = age_representatives(if own { y } else { other }, n)?;
                if family.is_empty() {
                    continue;
                }
                for keep in sub_signatures(y) {
                    let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
                    t.check(check_age_sentence_agreement(&family, &keep, y), || {
                        format!(
                            "{} against {} at n = {n}, J = {keep:?}",
                            show(y),
                            show(other)
                        )
                    });
                }
            }
        }
        Ok(())
    };
    for (i, y) in ctx.corpus.iter().enumerate().filter(|(_, y)| y.size() <= 3) {
        let other = &ctx.corpus[(i + 1) % ctx.corpus.len()];
        check(y, other, t)?;
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases / 20 {
        let sig = random_signature(&mut rng, 2, 1, 2);
        let m = rng.range(1, 5);
        let (d1, d2) = (rng.unit(), rng.unit());
        let y = random_structure(&mut rng, &sig, m, d1);
        let other = random_structure(&mut rng, &sig, m, d2);
        check(&y, &other, t)?;
    }
    Ok(())
}

fn literal_partition(ctx: &Context, t: &mut Tally) -> Result<()> {
    let mut rng = ctx.rng(t.0.name);
    for m in 1..=5 {
        for k in 0..=m {
            let natural: Vec<usize> = (0..m).collect();
            let companions = [
                Companion::new(m, &natural[..k], &natural[k..])?,
                random_companion(&mut rng, m, k),
            ];
            for x in &companions {
                for arity in 1..=3 {
                    t.check(partition_holds(x, arity), || {
                        format!("{x:?}, arity {arity}")
                    });
                }
            }
        }
    }
    Ok(())
}

fn partition_holds(x: &Companion, arity: usize) -> Result<bool> {
    let xs = x.to_structure();
    let elems: Vec<usize> = (0..x.size()).collect();
    let mut classes: BTreeMap<LiteralType, Vec<Vec<usize>>> = BTreeMap::new();
    all_tuples(&elems, arity, |tup| {
        classes
            .entry(literal_type(x, tup))
            .or_default()
            .push(tup.to_vec());
        true
    });
    if classes.keys().cloned().collect::<BTreeSet<_>>() != realizable_types(x, arity) {
        return Ok(false);
    }
    let vars: Vec<String> = (0..arity).map(|i| format!("v{i}")).collect();
    for ty in classes.keys() {
        let phi = ty.render(x.constant_count(), &vars);
        for (other, tuples) in &classes {
            for tup in tuples {
                if eval_at(&phi, &xs, &vars, tup)? != (other == ty) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Complements of all `F` with at most five remaining elements.
fn families(ctx: &Context, kernel_sets_only: bool) -> Result<Vec<(usize, ChainOrderFamily)>> {
    let mut out = Vec::new();
    let kernels = if kernel_sets_only {
        Some(ctx.kernels()?)
    } else {
        None
    };
    for (i, y) in ctx.corpus.iter().enumerate() {
        let sets: Vec<Vec<usize>> = match kernels {
            Some(ks) => ks[i].minimal_sets.iter().map(|w| w.f_set.clone()).collect(),
            None => subsets(y.size()).collect(),
        };
        for f in sets {
            if y.size() - f.len() <= 5 {
                out.push((i, enumerate_chaining_orders(y, &f)?));
            }
        }
    }
    Ok(out)
}

fn family_reversal(ctx: &Context, t: &mut Tally) -> Result<()> {
    for (i, fam) in families(ctx, false)? {
        t.check(Ok(fam.is_reversal_closed()), || {
            format!("{} over {:?}", show(&ctx.corpus[i]), fam.f_set)
        });
    }
    Ok(())
}

fn classification_soundness(ctx: &Context, t: &mut Tally) -> Result<()> {
    for (i, fam) in families(ctx, false)? {
        if fam.is_empty() {
            continue;
        }
        let ok = classify_family(&fam).map(|c| {
            let set: BTreeSet<Vec<usize>> = fam.orders.iter().cloned().collect();
            let first = &fam.orders[0];
            match &c.case {
                GpwCase::Unmatched { witness, in_family } => {
                    *in_family == set.contains(witness)
                        && witness != first
                        && *witness != first.iter().rev().copied().collect::<Vec<_>>()
                }
                case => expand_case(case, first).as_ref() == Some(&set),
            }
        });
        t.check(ok, || {
            format!("{} over {:?}", show(&ctx.corpus[i]), fam.f_set)
        });
    }
    Ok(())
}

fn classification_determinism(ctx: &Context, t: &mut Tally) -> Result<()> {
    let mut rng = ctx.rng(t.0.name);
    for (i, fam) in families(ctx, false)? {
        if fam.is_empty() {
            continue;
        }
        let mut shuffled = fam.clone();
        rng.shuffle(&mut shuffled.orders);
        let ok = (|| Ok(classify_family(&fam)? == classify_family(&shuffled)?))();
        t.check(ok, || {
            format!("{} over {:?}", show(&ctx.corpus[i]), fam.f_set)
        });
    }
    Ok(())
}

fn trichotomy_coverage(ctx: &Context, t: &mut Tally) -> Result<()> {
    for (i, fam) in families(ctx, true)? {
        if fam.is_empty() {
            continue;
        }
        let ok = classify_family(&fam).map(|c| !matches!(c.case, GpwCase::Unmatched { .. }));
        t.check(ok, || {
            format!(
                "Unmatched: {} over {:?}: {:?}",
                show(&ctx.corpus[i]),
                fam.f_set,
                fam.orders
            )
        });
    }
    Ok(())
}

fn substructure_coherence(ctx: &Context, t: &mut Tally) -> Result<()> {
    let coherent = |y: &Structure, h: &[usize], g: &[usize]| -> Result<bool> {
        let two_step = y.induced_substructure(h)?.induced_substructure(g)?;
        let composed: Vec<usize> = g.iter().map(|&i| h[i]).collect();
        Ok(two_step == y.induced_substructure(&composed)?)
    };
    for y in ctx.corpus.iter().filter(|y| y.size() <= 4) {
        for h in subsets(y.size()).filter(|h| !h.is_empty()) {
            for g in subsets(h.len()).filter(|g| !g.is_empty()) {
                t.check(coherent(y, &h, &g), || {
                    format!("{} on {h:?} then {g:?}", show(y))
                });
            }
        }
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let y = ctx.random_small(&mut rng, 6);
        if y.size() == 0 {
            continue;
        }
        let h = nonempty_subset(&mut rng, y.size());
        let g = nonempty_subset(&mut rng, h.len());
        t.check(coherent(&y, &h, &g), || {
            format!("{} on {h:?} then {g:?}", show(&y))
        });
    }
    Ok(())
}

fn nonempty_subset(rng: &mut SeededRng, m: usize) -> Vec<usize> {
    let elems: Vec<usize> = (0..m).collect();
    let mut s = rng.subset(&elems, 0.5);
    if s.is_empty() {
        s.push(rng.below(m));
    }
    s
}

fn reduct_commutes(ctx: &Context, t: &mut Tally) -> Result<()> {
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let sig = random_signature(&mut rng, 3, 1, 3);
        let m = rng.range(1, 5);
        let d = rng.unit();
        let y = random_structure(&mut rng, &sig, m, d);
        let names: Vec<&str> = sig.symbols().iter().map(|s| s.name.as_str()).collect();
        let keep: Vec<&str> = names.iter().copied().filter(|_| rng.chance(0.5)).collect();
        let h = nonempty_subset(&mut rng, m);
        let ok = (|| {
            Ok(y.induced_substructure(&h)?.reduct(&keep)?
                == y.reduct(&keep)?.induced_substructure(&h)?)
        })();
        t.check(ok, || format!("{} to {keep:?} on {h:?}", show(&y)));
    }
    Ok(())
}

fn companion_axioms(ctx: &Context, t: &mut Tally) -> Result<()> {
    let holds = |x: &Companion| -> Result<bool> {
        let xs = x.to_structure();
        let none = Assignment::new();
        for s in theory_star_sentences(x.constant_count()) {
            if !eval_formula(&s, &xs, &none)? {
                return Ok(false);
            }
        }
        Ok(x.axioms().all())
    };
    for m in 0..=5 {
        for order in (0..m).permutations(m) {
            for k in 0..=m {
                let x = Companion::new(m, &order[..k], &order[k..])?;
                t.check(holds(&x), || format!("{x:?}"));
            }
        }
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases / 10 {
        let m = rng.range(0, 8);
        let k = rng.range(0, m);
        let x = random_companion(&mut rng, m, k);
        t.check(holds(&x), || format!("{x:?}"));
    }
    Ok(())
}

fn restriction_closure(ctx: &Context, t: &mut Tally) -> Result<()> {
    for y in &ctx.corpus {
        for p in enumerate_partial_automorphisms(y, y.size()) {
            // one-pair removals suffice by induction
            let pairs: Vec<(usize, usize)> = p.pairs().collect();
            for skip in 0..pairs.len() {
                let keep: Vec<usize> = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &(s, _))| s)
                    .collect();
                t.check(is_partial_automorphism(y, &p.restrict(&keep)), || {
                    format!("{} under {p:?}", show(y))
                });
            }
        }
    }
    Ok(())
}

fn chain_reversal_pa(t: &mut Tally) -> Result<()> {
    for m in 0..=5 {
        let l = Structure::linear_order(m, "<");
        let reversed: Vec<usize> = (0..m).rev().collect();
        let l_star = l.relabel(&reversed);
        let a: BTreeSet<PartialMap> = enumerate_partial_automorphisms(&l, m).collect();
        let b: BTreeSet<PartialMap> = enumerate_partial_automorphisms(&l_star, m).collect();
        t.check(Ok(a == b), || format!("chain of size {m}"));
    }
    Ok(())
}

fn iso_vs_canon(ctx: &Context, t: &mut Tally) -> Result<()> {
    let agree = |a: &Structure, b: &Structure| -> Result<bool> {
        let same = canonical_form(a)? == canonical_form(b)?;
        Ok(match find_isomorphism(a, b)? {
            Some(p) => {
                let perm: Vec<usize> = (0..a.size())
                    .map(|e| p.get(e).expect("total map"))
                    .collect();
                same && a.relabel(&perm) == *b
            }
            None => !same,
        })
    };
    let sig = Signature::from_pairs(&[("E", 2)])?;
    for m in 0..=3usize {
        let reps: Vec<&Structure> = ctx.corpus.iter().filter(|y| y.size() == m).collect();
        let pairs: Vec<Vec<usize>> = (0..m)
            .flat_map(|a| (0..m).map(move |b| vec![a, b]))
            .collect();
        for mask in 0..1u64 << pairs.len() {
            let rel = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect();
            let a = Structure::new(sig.clone(), m, vec![rel])?;
            for b in &reps {
                t.check(agree(&a, b), || format!("{} vs {}", show(&a), show(b)));
            }
        }
    }
    let mut rng = ctx.rng(t.0.name);
    for _ in 0..ctx.opts.cases {
        let a = ctx.random_small(&mut rng, 5);
        let mut perm: Vec<usize> = (0..a.size()).collect();
        rng.shuffle(&mut perm);
        let mut b = a.relabel(&perm);
        if a.size() > 0 && rng.chance(0.5) {
            // toggle one tuple, usually breaking the isomorphism
            let idx = rng.below(a.signature().len());
            let arity = a.signature().symbols()[idx].arity;
            let tuple: Vec<usize> = (0..arity).map(|_| rng.below(a.size())).collect();
            let mut rels = b.relations().to_vec();
            if !rels[idx].remove(&tuple) {
                rels[idx].insert(tuple);
            }
            b = Structure::new(b.signature().clone(), b.size(), rels)?;
        }
        t.check(agree(&a, &b), || format!("{} vs {}", show(&a), show(&b)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witnesses_count() {
        assert_eq!(all_witnesses(4).len(), 65);
        assert_eq!(all_witnesses(5).len(), 326);
        assert_eq!(all_witnesses(0).len(), 1);
    }

    #[test]
    fn full_oracle_on_chain() {
        let lo = Structure::linear_order(4, "<");
        let natural = ChainWitness::new(vec![], vec![0, 1, 2, 3]);
        assert!(chainable_by_full_quantification(&lo, &natural).unwrap());
        let scrambled = ChainWitness::new(vec![], vec![1, 0, 2, 3]);
        assert!(!chainable_by_full_quantification(&lo, &scrambled).unwrap());
    }

    #[test]
    fn only_filters_and_rejects_unknown() {
        let opts = VerifyOptions {
            only: Some("chain-reversal-pa".into()),
            ..VerifyOptions::default()
        };
        let report = run_verify(&opts).unwrap();
        assert_eq!(report.suites.len(), 1);
        assert!(report.all_passed);
        let bad = VerifyOptions {
            only: Some("nope".into()),
            ..VerifyOptions::default()
        };
        assert!(run_verify(&bad).is_err());
    }

    #[test]
    fn star_cases_follow_parameter() {
        let opts = VerifyOptions {
            only: Some("star-translation".into()),
            seed: 7,
            cases: 50,
        };
        let report = run_verify(&opts).unwrap();
        assert_eq!(report.suites[0].cases, 50);
        assert_eq!(
            report.suites[0].failed, 0,
            "{:?}",
            report.suites[0].failures
        );
    }
}
