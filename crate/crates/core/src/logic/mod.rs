//! First-order formulas over relational signatures, finite evaluation,
//! quantifier-free definability over companions, sentence families and
//! the two syntactic translations.

mod definability;
mod eval;
mod formula;
mod sentences;
mod translate;

pub use definability::{
    apply_definitions, extract_definitions, literal_type, realizable_types, Definition,
    LiteralType, QfDefinitionSet,
};
pub use eval::{eval_at, eval_formula, Assignment};
pub use formula::Formula;
pub use sentences::{
    age_sentence, check_age_sentence_agreement, endpoint_sentences, reduct_ages_match,
    theory_star_sentences, AGE_SENTENCE_BOUND,
};
pub use translate::{quotient_translate, star_translate};
