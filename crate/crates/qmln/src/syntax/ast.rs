//! Abstract syntax for the modeling language: terms, formulas, quantified
//! sentences, weights, vocabularies, and whole models.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

/// Prefix reserved for predicates introduced by the compiler.
pub const RESERVED_PREFIX: &str = "__";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("predicate `{0}` is not declared")]
    UndeclaredPredicate(String),
    #[error("predicate `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("predicate `{0}` is declared twice")]
    DuplicatePredicate(String),
    #[error("predicate name `{0}` uses the reserved `__` prefix")]
    ReservedPredicateName(String),
    #[error("empty name")]
    EmptyName,
    #[error("weight is NaN")]
    NanWeight,
    #[error("variable `{0}` is bound more than once")]
    ShadowedVariable(String),
    #[error("prefix variable `{0}` is declared twice")]
    DuplicatePrefixVariable(String),
    #[error("prefix variable `{0}` does not occur in the matrix")]
    UnusedPrefixVariable(String),
    #[error("free variable `{0}` is not bound by the prefix")]
    FreeVariable(String),
    #[error("substitution binds `{0}`, which is a quantified variable")]
    BindsBoundVariable(String),
    #[error("duplicate weighted sentence")]
    DuplicateSentence,
    #[error("model contains a sentence with both weight inf and weight -inf")]
    ConflictingHardWeights,
}

/// A term is either a variable or a domain constant. The two namespaces are
/// disjoint; the parser resolves names by binding context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Pred { name: String, args: Vec<Term> },
    Equal(Term, Term),
}

impl Atom {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom::Pred {
            name: name.into(),
            args,
        }
    }
}

/// First-order formula. `Avg` never occurs here: statistical quantifiers live
/// only in sentence prefixes. Biconditionals and `!=` are desugared by the
/// parser.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    /// Negation with double-negation elimination, so that negating twice is
    /// the structural identity.
    pub fn negated(self) -> Formula {
        match self {
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    /// Conjunction of a non-empty list.
    pub fn and_all(mut parts: Vec<Formula>) -> Formula {
        let first = parts.remove(0);
        parts.into_iter().fold(first, Formula::and)
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.walk_free(&mut bound, &mut out);
        out
    }

    fn walk_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::Atom(a) => {
                let mut see = |t: &Term| {
                    if let Term::Var(v) = t {
                        if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                            out.push(v.clone());
                        }
                    }
                };
                match a {
                    Atom::Pred { args, .. } => args.iter().for_each(&mut see),
                    Atom::Equal(l, r) => {
                        see(l);
                        see(r);
                    }
                }
            }
            Formula::Not(f) => f.walk_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.walk_free(bound, out);
                b.walk_free(bound, out);
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                bound.push(v.clone());
                f.walk_free(bound, out);
                bound.pop();
            }
        }
    }

    /// All quantifier-bound variables, in traversal order.
    pub fn bound_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Forall(v, _) | Formula::Exists(v, _) = f {
                out.push(v.clone());
            }
        });
        out
    }

    /// Every variable name occurring anywhere (free or bound).
    pub fn all_var_names(&self) -> HashSet<String> {
        let mut out: HashSet<String> = self.bound_vars().into_iter().collect();
        self.walk(&mut |f| {
            if let Formula::Atom(a) = f {
                let mut see = |t: &Term| {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                };
                match a {
                    Atom::Pred { args, .. } => args.iter().for_each(&mut see),
                    Atom::Equal(l, r) => {
                        see(l);
                        see(r);
                    }
                }
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Atom(_) => {}
            Formula::Not(x) => x.walk(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Formula::Forall(_, x) | Formula::Exists(_, x) => x.walk(f),
        }
    }

    /// Checks the no-shadowing discipline: no variable is bound twice along
    /// any path, and none of `outer` is rebound.
    pub fn check_binders(&self, outer: &[String]) -> Result<(), ModelError> {
        fn rec(f: &Formula, seen: &mut Vec<String>) -> Result<(), ModelError> {
            match f {
                Formula::Atom(_) => Ok(()),
                Formula::Not(x) => rec(x, seen),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    rec(a, seen)?;
                    rec(b, seen)
                }
                Formula::Forall(v, x) | Formula::Exists(v, x) => {
                    if seen.iter().any(|s| s == v) {
                        return Err(ModelError::ShadowedVariable(v.clone()));
                    }
                    seen.push(v.clone());
                    let r = rec(x, seen);
                    seen.pop();
                    r
                }
            }
        }
        let mut seen = outer.to_vec();
        rec(self, &mut seen)
    }

    /// Checks predicates against a vocabulary (declaration and arity).
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<(), ModelError> {
        let mut err = None;
        self.walk(&mut |f| {
            if err.is_some() {
                return;
            }
            if let Formula::Atom(Atom::Pred { name, args }) = f {
                match vocab.arity(name) {
                    None => err = Some(ModelError::UndeclaredPredicate(name.clone())),
                    Some(a) if a != args.len() => {
                        err = Some(ModelError::ArityMismatch {
                            name: name.clone(),
                            expected: a,
                            got: args.len(),
                        })
                    }
                    _ => {}
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Substitutes constants for free variables. Bound variables must not appear
/// among the binding keys.
pub fn substitute(
    formula: &Formula,
    bindings: &BTreeMap<String, String>,
) -> Result<Formula, ModelError> {
    for b in formula.bound_vars() {
        if bindings.contains_key(&b) {
            return Err(ModelError::BindsBoundVariable(b));
        }
    }
    Ok(substitute_unchecked(formula, bindings))
}

fn substitute_unchecked(formula: &Formula, bindings: &BTreeMap<String, String>) -> Formula {
    let term = |t: &Term| match t {
        Term::Var(v) => match bindings.get(v) {
            Some(c) => Term::Const(c.clone()),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
    };
    match formula {
        Formula::Atom(Atom::Pred { name, args }) => Formula::Atom(Atom::Pred {
            name: name.clone(),
            args: args.iter().map(term).collect(),
        }),
        Formula::Atom(Atom::Equal(l, r)) => Formula::Atom(Atom::Equal(term(l), term(r))),
        Formula::Not(f) => Formula::Not(Box::new(substitute_unchecked(f, bindings))),
        Formula::And(a, b) => Formula::And(
            Box::new(substitute_unchecked(a, bindings)),
            Box::new(substitute_unchecked(b, bindings)),
        ),
        Formula::Or(a, b) => Formula::Or(
            Box::new(substitute_unchecked(a, bindings)),
            Box::new(substitute_unchecked(b, bindings)),
        ),
        Formula::Implies(a, b) => Formula::Implies(
            Box::new(substitute_unchecked(a, bindings)),
            Box::new(substitute_unchecked(b, bindings)),
        ),
        Formula::Forall(v, f) => {
            Formula::Forall(v.clone(), Box::new(substitute_unchecked(f, bindings)))
        }
        Formula::Exists(v, f) => {
            Formula::Exists(v.clone(), Box::new(substitute_unchecked(f, bindings)))
        }
    }
}

/// Renames free occurrences of one variable to another variable. The new name
/// must not occur anywhere in the formula (checked by the caller; asserted).
pub(crate) fn rename_free_var(formula: &Formula, old: &str, new: &str) -> Formula {
    debug_assert!(!formula.all_var_names().contains(new));
    let term = |t: &Term| match t {
        Term::Var(v) if v == old => Term::Var(new.to_string()),
        other => other.clone(),
    };
    match formula {
        Formula::Atom(Atom::Pred { name, args }) => Formula::Atom(Atom::Pred {
            name: name.clone(),
            args: args.iter().map(term).collect(),
        }),
        Formula::Atom(Atom::Equal(l, r)) => Formula::Atom(Atom::Equal(term(l), term(r))),
        Formula::Not(f) => Formula::Not(Box::new(rename_free_var(f, old, new))),
        Formula::And(a, b) => Formula::And(
            Box::new(rename_free_var(a, old, new)),
            Box::new(rename_free_var(b, old, new)),
        ),
        Formula::Or(a, b) => Formula::Or(
            Box::new(rename_free_var(a, old, new)),
            Box::new(rename_free_var(b, old, new)),
        ),
        Formula::Implies(a, b) => Formula::Implies(
            Box::new(rename_free_var(a, old, new)),
            Box::new(rename_free_var(b, old, new)),
        ),
        Formula::Forall(v, f) if v != old => {
            Formula::Forall(v.clone(), Box::new(rename_free_var(f, old, new)))
        }
        Formula::Exists(v, f) if v != old => {
            Formula::Exists(v.clone(), Box::new(rename_free_var(f, old, new)))
        }
        // `old` is bound here; nothing free below.
        other => other.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantifierKind {
    Forall,
    Exists,
    /// The statistical quantifier, written `avg` in the surface syntax: the
    /// statistic of the body is averaged uniformly over the domain.
    Avg,
}

impl QuantifierKind {
    pub fn is_classical(self) -> bool {
        !matches!(self, QuantifierKind::Avg)
    }

    /// Dual under sentence negation: forall and exists swap, avg is its own
    /// dual.
    pub fn dual(self) -> QuantifierKind {
        match self {
            QuantifierKind::Forall => QuantifierKind::Exists,
            QuantifierKind::Exists => QuantifierKind::Forall,
            QuantifierKind::Avg => QuantifierKind::Avg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quantifier {
    pub kind: QuantifierKind,
    pub var: String,
}

impl Quantifier {
    pub fn new(kind: QuantifierKind, var: impl Into<String>) -> Quantifier {
        Quantifier {
            kind,
            var: var.into(),
        }
    }
}

/// A quantifier prefix over {forall, exists, avg} and a first-order matrix
/// whose free variables are exactly the prefix variables.
///
/// Trailing classical quantifiers are absorbed into the matrix on
/// construction, so every sentence either has an empty prefix or a prefix
/// ending with `avg`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuantifiedSentence {
    prefix: Vec<Quantifier>,
    matrix: Formula,
}

impl QuantifiedSentence {
    pub fn new(prefix: Vec<Quantifier>, matrix: Formula) -> Result<Self, ModelError> {
        let mut seen: HashSet<&str> = HashSet::new();
        for q in &prefix {
            if q.var.is_empty() {
                return Err(ModelError::EmptyName);
            }
            if !seen.insert(q.var.as_str()) {
                return Err(ModelError::DuplicatePrefixVariable(q.var.clone()));
            }
        }
        let prefix_vars: Vec<String> = prefix.iter().map(|q| q.var.clone()).collect();
        matrix.check_binders(&prefix_vars)?;
        let free = matrix.free_vars();
        for v in &free {
            if !seen.contains(v.as_str()) {
                return Err(ModelError::FreeVariable(v.clone()));
            }
        }
        for q in &prefix {
            if !free.contains(&q.var) {
                return Err(ModelError::UnusedPrefixVariable(q.var.clone()));
            }
        }
        // Canonical shape: absorb trailing classical quantifiers into the
        // matrix.
        let mut prefix = prefix;
        let mut matrix = matrix;
        while let Some(last) = prefix.last() {
            if !last.kind.is_classical() {
                break;
            }
            let q = prefix.pop().expect("nonempty");
            matrix = match q.kind {
                QuantifierKind::Forall => Formula::forall(q.var, matrix),
                QuantifierKind::Exists => Formula::exists(q.var, matrix),
                QuantifierKind::Avg => unreachable!(),
            };
        }
        Ok(QuantifiedSentence { prefix, matrix })
    }

    pub fn prefix(&self) -> &[Quantifier] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    pub fn has_avg(&self) -> bool {
        self.prefix.iter().any(|q| q.kind == QuantifierKind::Avg)
    }

    /// True when the prefix contains only `avg` quantifiers (possibly none).
    pub fn is_pure_avg(&self) -> bool {
        self.prefix.iter().all(|q| q.kind == QuantifierKind::Avg)
    }

    /// Index of the rightmost classical quantifier in the prefix, if any.
    pub fn rightmost_classical(&self) -> Option<usize> {
        self.prefix.iter().rposition(|q| q.kind.is_classical())
    }

    /// Sentence negation: every prefix kind is dualized and the matrix is
    /// negated (with double-negation elimination), so negating twice gives
    /// back the original sentence.
    pub fn negated(&self) -> QuantifiedSentence {
        let prefix = self
            .prefix
            .iter()
            .map(|q| Quantifier::new(q.kind.dual(), q.var.clone()))
            .collect();
        QuantifiedSentence {
            prefix,
            matrix: self.matrix.clone().negated(),
        }
    }

    /// The classical reading: every `avg` in the prefix becomes `forall` and
    /// the whole sentence is folded into a closed first-order formula.
    pub fn strip_avg(&self) -> Formula {
        let mut out = self.matrix.clone();
        for q in self.prefix.iter().rev() {
            out = match q.kind {
                QuantifierKind::Exists => Formula::exists(q.var.clone(), out),
                QuantifierKind::Forall | QuantifierKind::Avg => Formula::forall(q.var.clone(), out),
            };
        }
        out
    }

    /// The hard reading of a sentence with weight -inf: prefix kinds are
    /// mapped avg -> forall, forall -> exists, exists -> forall, and the
    /// matrix is negated.
    pub fn negative_hard_form(&self) -> Formula {
        let mut out = self.matrix.clone().negated();
        for q in self.prefix.iter().rev() {
            out = match q.kind {
                QuantifierKind::Forall => Formula::exists(q.var.clone(), out),
                QuantifierKind::Exists | QuantifierKind::Avg => Formula::forall(q.var.clone(), out),
            };
        }
        out
    }
}

/// Weight of a sentence: a finite real or an explicit infinity.
#[derive(Debug, Clone, Copy)]
pub enum Weight {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl Weight {
    pub fn finite(value: f64) -> Result<Weight, ModelError> {
        if value.is_nan() {
            return Err(ModelError::NanWeight);
        }
        Ok(Weight::Finite(value))
    }

    pub fn is_hard(&self) -> bool {
        !matches!(self, Weight::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Weight::Finite(v) => Some(*v),
            _ => None,
        }
    }

    pub fn negated(&self) -> Weight {
        match self {
            Weight::Finite(v) => Weight::Finite(-v),
            Weight::PlusInfinity => Weight::MinusInfinity,
            Weight::MinusInfinity => Weight::PlusInfinity,
        }
    }

    fn bits(&self) -> u64 {
        match self {
            // Normalize -0.0 so Eq and Hash agree.
            Weight::Finite(v) => {
                let v = if *v == 0.0 { 0.0 } else { *v };
                v.to_bits()
            }
            Weight::PlusInfinity => u64::MAX,
            Weight::MinusInfinity => u64::MAX - 1,
        }
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.bits() == other.bits()
    }
}

impl Eq for Weight {}

impl std::hash::Hash for Weight {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.bits().hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedSentence {
    pub sentence: QuantifiedSentence,
    pub weight: Weight,
}

impl WeightedSentence {
    pub fn new(sentence: QuantifiedSentence, weight: Weight) -> WeightedSentence {
        WeightedSentence { sentence, weight }
    }
}

/// Predicate names with arities, in declaration order. Declaration order is
/// load-bearing: it fixes the ground-atom index layout.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<(String, usize)>,
    by_name: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Vocabulary {
        Vocabulary {
            entries: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    /// Declares a user predicate. Reserved `__` names are rejected.
    pub fn declare(&mut self, name: impl Into<String>, arity: usize) -> Result<(), ModelError> {
        let name = name.into();
        if name.starts_with(RESERVED_PREFIX) {
            return Err(ModelError::ReservedPredicateName(name));
        }
        self.declare_internal(name, arity)
    }

    /// Declares a predicate without the reserved-prefix check. Used by the
    /// compiler for its fresh predicates.
    pub(crate) fn declare_internal(
        &mut self,
        name: impl Into<String>,
        arity: usize,
    ) -> Result<(), ModelError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        if self.by_name.contains_key(&name) {
            return Err(ModelError::DuplicatePredicate(name));
        }
        self.by_name.insert(name.clone(), self.entries.len());
        self.entries.push((name, arity));
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).map(|&i| self.entries[i].1)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Predicates in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().map(|(n, a)| (n.as_str(), *a))
    }

    /// True when `prefix` lists exactly the leading entries of `self`.
    pub fn extends(&self, prefix: &Vocabulary) -> bool {
        prefix.entries.len() <= self.entries.len()
            && prefix
                .entries
                .iter()
                .zip(&self.entries)
                .all(|(a, b)| a == b)
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new()
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Vocabulary {}

/// A weighted-sentence model: a vocabulary plus a list of weighted quantified
/// sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qmln {
    vocabulary: Vocabulary,
    sentences: Vec<WeightedSentence>,
}

impl Qmln {
    pub fn new(
        vocabulary: Vocabulary,
        sentences: Vec<WeightedSentence>,
    ) -> Result<Qmln, ModelError> {
        let mut seen: HashSet<&WeightedSentence> = HashSet::new();
        for ws in &sentences {
            ws.sentence.matrix().check_vocabulary(&vocabulary)?;
            if !seen.insert(ws) {
                return Err(ModelError::DuplicateSentence);
            }
        }
        for ws in &sentences {
            if ws.weight == Weight::PlusInfinity
                && sentences
                    .iter()
                    .any(|o| o.weight == Weight::MinusInfinity && o.sentence == ws.sentence)
            {
                return Err(ModelError::ConflictingHardWeights);
            }
        }
        Ok(Qmln {
            vocabulary,
            sentences,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn sentences(&self) -> &[WeightedSentence] {
        &self.sentences
    }

    pub fn soft(&self) -> impl Iterator<Item = (&QuantifiedSentence, f64)> {
        self.sentences.iter().filter_map(|ws| match ws.weight {
            Weight::Finite(w) => Some((&ws.sentence, w)),
            _ => None,
        })
    }

    pub fn hard(&self) -> impl Iterator<Item = &WeightedSentence> {
        self.sentences.iter().filter(|ws| ws.weight.is_hard())
    }
}

/// The hard first-order constraints carried by a model: sentences with weight
/// +inf contribute their classical reading, sentences with weight -inf the
/// negative hard form, soft sentences contribute nothing. Duplicates are
/// dropped, keeping first occurrence.
pub fn hardening(model: &Qmln) -> Vec<Formula> {
    let mut out = Vec::new();
    let mut seen: HashSet<Formula> = HashSet::new();
    for ws in model.sentences() {
        let f = match ws.weight {
            Weight::PlusInfinity => ws.sentence.strip_avg(),
            Weight::MinusInfinity => ws.sentence.negative_hard_form(),
            Weight::Finite(_) => continue,
        };
        if seen.insert(f.clone()) {
            out.push(f);
        }
    }
    out
}
