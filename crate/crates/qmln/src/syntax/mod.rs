//! Modeling language: AST, parser, printer, and symbolic operations on
//! formulas and quantified sentences.

mod ast;
mod parse;
mod print;

pub(crate) use ast::rename_free_var;
pub use ast::{
    hardening, substitute, Atom, Formula, ModelError, Qmln, QuantifiedSentence, Quantifier,
    QuantifierKind, Term, Vocabulary, Weight, WeightedSentence, RESERVED_PREFIX,
};
pub use parse::{parse_constraints, parse_ground_atoms, parse_model, parse_sentence, ParseError};
pub use print::print_model;

use crate::worlds::Domain;


/// All groundings of a formula over a domain: one substituted formula per
/// assignment of the free variables, `|domain|^k` in total, in mixed-radix
/// order over the canonical domain order. Duplicates after substitution are
/// kept, since groundings are counted per substitution.
pub fn groundings(formula: &Formula, domain: &Domain) -> Vec<Formula> {
    let free = formula.free_vars();
    let k = free.len();
    let n = domain.len();
    let mut out = Vec::with_capacity(n.pow(k as u32));
    let mut digits = vec![0usize; k];
    loop {
        let bindings: std::collections::BTreeMap<String, String> = free
            .iter()
            .zip(&digits)
            .map(|(v, &d)| (v.clone(), domain.constant(d).to_string()))
            .collect();
        out.push(substitute(formula, &bindings).expect("free variables only"));
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
        }
    }
}
