//! Printers for formulas, sentences, and model files. Printing and parsing
//! round-trip: `parse_model(print_model(m, d))` reproduces `(m, d)`.

use std::fmt;

use super::ast::{Atom, Formula, Qmln, QuantifiedSentence, QuantifierKind, Term, Weight};
use crate::worlds::Domain;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Pred { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a.name())?;
                }
                write!(f, ")")
            }
            Atom::Equal(l, r) => write!(f, "{} = {}", l.name(), r.name()),
        }
    }
}

// Binding strength, loosest first: => < | < & < unary/primary.
const LVL_IMPLIES: u8 = 0;
const LVL_OR: u8 = 1;
const LVL_AND: u8 = 2;
const LVL_UNARY: u8 = 3;

fn write_formula(f: &mut fmt::Formatter<'_>, formula: &Formula, min_level: u8) -> fmt::Result {
    let level = match formula {
        Formula::Implies(_, _) => LVL_IMPLIES,
        Formula::Or(_, _) => LVL_OR,
        Formula::And(_, _) => LVL_AND,
        Formula::Not(_) | Formula::Atom(_) | Formula::Forall(_, _) | Formula::Exists(_, _) => {
            LVL_UNARY
        }
    };
    // Equality atoms contain spaces; parenthesize them under `!` for clarity.
    let needs_parens = level < min_level;
    if needs_parens {
        write!(f, "(")?;
    }
    match formula {
        Formula::Atom(a) => write!(f, "{a}")?,
        Formula::Not(inner) => {
            write!(f, "!")?;
            match inner.as_ref() {
                Formula::Atom(Atom::Equal(_, _)) => {
                    write!(f, "(")?;
                    write_formula(f, inner, LVL_IMPLIES)?;
                    write!(f, ")")?;
                }
                _ => write_formula(f, inner, LVL_UNARY)?,
            }
        }
        Formula::And(a, b) => {
            write_formula(f, a, LVL_AND)?;
            write!(f, " & ")?;
            write_formula(f, b, LVL_AND + 1)?;
        }
        Formula::Or(a, b) => {
            write_formula(f, a, LVL_OR)?;
            write!(f, " | ")?;
            write_formula(f, b, LVL_OR + 1)?;
        }
        Formula::Implies(a, b) => {
            write_formula(f, a, LVL_IMPLIES + 1)?;
            write!(f, " => ")?;
            write_formula(f, b, LVL_IMPLIES)?;
        }
        Formula::Forall(v, body) => {
            write!(f, "(forall {v} : ")?;
            write_formula(f, body, LVL_IMPLIES)?;
            write!(f, ")")?;
        }
        Formula::Exists(v, body) => {
            write!(f, "(exists {v} : ")?;
            write_formula(f, body, LVL_IMPLIES)?;
            write!(f, ")")?;
        }
    }
    if needs_parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, LVL_IMPLIES)
    }
}

impl fmt::Display for QuantifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantifierKind::Forall => write!(f, "forall"),
            QuantifierKind::Exists => write!(f, "exists"),
            QuantifierKind::Avg => write!(f, "avg"),
        }
    }
}

impl fmt::Display for QuantifiedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in self.prefix() {
            write!(f, "{} {} ", q.kind, q.var)?;
        }
        write!(f, ": {}", self.matrix())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(v) => write!(f, "{v}"),
            Weight::PlusInfinity => write!(f, "inf"),
            Weight::MinusInfinity => write!(f, "-inf"),
        }
    }
}

/// Renders a model and its domain in the model-file grammar.
pub fn print_model(model: &Qmln, domain: &Domain) -> String {
    let mut out = String::new();
    out.push_str("domain = {");
    for (i, c) in domain.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(c);
    }
    out.push_str("}\n");
    for (name, arity) in model.vocabulary().iter() {
        out.push_str(&format!("predicate {name}/{arity}\n"));
    }
    for ws in model.sentences() {
        out.push_str(&format!("{} :: {}\n", ws.weight, ws.sentence));
    }
    out
}
