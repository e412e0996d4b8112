//! Source-to-source compilation of quantified models: classical quantifiers
//! in soft-sentence prefixes are eliminated one at a time, rightmost first,
//! in favor of fresh predicates pinned down by hard constraints. The result
//! is a model whose soft sentences carry pure-`avg` prefixes plus first-order
//! hard constraints; it preserves MAP worlds, and in marginal-preserving mode
//! also preserves marginal probabilities (every base world acquires exactly
//! `|domain|!` extensions).

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::syntax::{
    rename_free_var, Atom, Formula, ModelError, Qmln, QuantifiedSentence, Quantifier,
    QuantifierKind, Term, Vocabulary, Weight, WeightedSentence, RESERVED_PREFIX,
};
use crate::worlds::{evaluate, AtomIndex, Domain, World, WorldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("sentence has no classical quantifier in its prefix")]
    NoClassicalQuantifier,
    #[error("cannot eliminate from a hard sentence")]
    HardSentence,
    #[error("vocabulary already contains the reserved name `{0}`")]
    ReservedNameCollision(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationMode {
    /// Preserves the MAP world set only.
    MapOnly,
    /// Additionally pins a global order and tie-breaking constraints so every
    /// base world has the same number of extensions; preserves marginals.
    MarginalPreserving,
}

/// Where an elimination step came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSource {
    /// Index into the input model's sentence list.
    Sentence(usize),
    /// A translated query sentence.
    Query,
}

/// Audit record for one quantifier elimination, carrying everything the
/// brute-force verifier needs to reconstruct witness sets.
#[derive(Debug, Clone)]
pub struct EliminationStep {
    pub step: usize,
    pub source: StepSource,
    /// The quantifier kind found at the elimination position, before any
    /// sign flip.
    pub eliminated: QuantifierKind,
    pub eliminated_var: String,
    /// True when the target was `forall` and the sentence was replaced by
    /// its negation with the weight sign inverted.
    pub flipped: bool,
    /// Prefix variables left of the target (the per-block parameters).
    pub outer_vars: Vec<String>,
    pub target_var: String,
    /// The `avg` variables right of the target.
    pub avg_vars: Vec<String>,
    /// The matrix at elimination time (after the flip, before the fresh
    /// max-atom is conjoined). Witness sets are defined against this.
    pub psi: Formula,
    pub max_pred: String,
    pub leq_pred: String,
    pub fn_pred: String,
    /// Weight multiplier applied by this step: plus or minus the domain size.
    pub weight_factor: f64,
}

/// Allocator for the compiler's fresh predicates. Step predicates are
/// per-step; the global order predicate is introduced once.
#[derive(Debug, Clone)]
pub struct FreshRegistry {
    vocabulary: Vocabulary,
    next_step: usize,
    ord: Option<String>,
}

impl FreshRegistry {
    pub fn new(base: &Vocabulary) -> Result<FreshRegistry, TranslateError> {
        for (name, _) in base.iter() {
            if name.starts_with(RESERVED_PREFIX) {
                return Err(TranslateError::ReservedNameCollision(name.to_string()));
            }
        }
        Ok(FreshRegistry {
            vocabulary: base.clone(),
            next_step: 0,
            ord: None,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn ord_pred(&self) -> Option<&str> {
        self.ord.as_deref()
    }

    /// Declares the global binary order predicate on first use and returns
    /// its linear-order axioms.
    fn ensure_ord(&mut self) -> Result<Option<Vec<Formula>>, TranslateError> {
        if self.ord.is_some() {
            return Ok(None);
        }
        let name = format!("{RESERVED_PREFIX}ord");
        self.vocabulary.declare_internal(name.clone(), 2)?;
        let axioms = linear_order_axioms(&name, &[], &HashSet::new());
        self.ord = Some(name);
        Ok(Some(axioms))
    }

    fn fresh_step(
        &mut self,
        k: usize,
        l: usize,
    ) -> Result<(usize, String, String, String), TranslateError> {
        let i = self.next_step;
        let max_pred = format!("{RESERVED_PREFIX}max_{i}");
        let leq_pred = format!("{RESERVED_PREFIX}leq_{i}");
        let fn_pred = format!("{RESERVED_PREFIX}fn_{i}");
        self.vocabulary.declare_internal(max_pred.clone(), k)?;
        self.vocabulary.declare_internal(leq_pred.clone(), k + 1)?;
        self.vocabulary
            .declare_internal(fn_pred.clone(), (k - 1) + 2 + 2 * l)?;
        self.next_step = i + 1;
        Ok((i, max_pred, leq_pred, fn_pred))
    }
}

/// Output of a single elimination step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub sentence: WeightedSentence,
    pub constraints: Vec<Formula>,
    pub step: EliminationStep,
}

fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

fn atom(pred: &str, vars: &[String]) -> Formula {
    Formula::Atom(Atom::Pred {
        name: pred.to_string(),
        args: vars.iter().map(|v| var(v)).collect(),
    })
}

fn forall_chain(vars: &[String], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, v| Formula::forall(v.clone(), acc))
}

fn exists_chain(vars: &[String], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, v| Formula::exists(v.clone(), acc))
}

fn eq_var(a: &str, b: &str) -> Formula {
    Formula::Atom(Atom::Equal(var(a), var(b)))
}

fn concat(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// Componentwise equality of two variable tuples; `None` for empty tuples.
fn tuple_eq(a: &[String], b: &[String]) -> Option<Formula> {
    if a.is_empty() {
        return None;
    }
    Some(Formula::and_all(
        a.iter().zip(b).map(|(x, y)| eq_var(x, y)).collect(),
    ))
}

/// Lexicographic `<=` between equal-length variable tuples over a base
/// order predicate, expanded inline.
fn lex_leq(ord: &str, a: &[String], b: &[String]) -> Formula {
    assert!(!a.is_empty());
    let head = atom(ord, &[a[0].clone(), b[0].clone()]);
    if a.len() == 1 {
        return head;
    }
    let strict = Formula::and(head, Formula::Not(Box::new(eq_var(&a[0], &b[0]))));
    Formula::or(
        strict,
        Formula::and(eq_var(&a[0], &b[0]), lex_leq(ord, &a[1..], &b[1..])),
    )
}

fn fresh_names(count: usize, avoid: &HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let name = format!("v{i}");
        i += 1;
        if !avoid.contains(&name) && !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

/// Antisymmetry, transitivity, and totality for `pred(outer, ., .)`, one
/// order per assignment of the outer variables.
fn linear_order_axioms(pred: &str, outer: &[String], avoid: &HashSet<String>) -> Vec<Formula> {
    let names = fresh_names(3, avoid);
    let (a, b, c) = (names[0].clone(), names[1].clone(), names[2].clone());
    let args =
        |x: &String, y: &String| -> Vec<String> { concat(&[outer, &[x.clone(), y.clone()]]) };
    let quant2 = concat(&[outer, &[a.clone(), b.clone()]]);
    let quant3 = concat(&[outer, &[a.clone(), b.clone(), c.clone()]]);
    vec![
        forall_chain(
            &quant2,
            Formula::implies(
                Formula::and(atom(pred, &args(&a, &b)), atom(pred, &args(&b, &a))),
                eq_var(&a, &b),
            ),
        ),
        forall_chain(
            &quant3,
            Formula::implies(
                Formula::and(atom(pred, &args(&a, &b)), atom(pred, &args(&b, &c))),
                atom(pred, &args(&a, &c)),
            ),
        ),
        forall_chain(
            &quant2,
            Formula::or(atom(pred, &args(&a, &b)), atom(pred, &args(&b, &a))),
        ),
    ]
}

/// Performs one quantifier elimination on a soft sentence whose rightmost
/// classical quantifier is followed only by `avg` quantifiers.
///
/// A `forall` target is first replaced by negating the sentence and the
/// weight sign, so the eliminated quantifier is always `exists`. The target
/// becomes `avg`, a fresh max-atom is conjoined to the matrix, the weight
/// scales by the domain size, and hard constraints pin the fresh predicates:
/// a per-block linear order, an injective comparison map between witness
/// sets, and the max marker. Marginal-preserving mode adds the global-order
/// axioms (once) and the tie-breaking constraints.
pub fn eliminate_step(
    ws: &WeightedSentence,
    domain: &Domain,
    registry: &mut FreshRegistry,
    mode: TranslationMode,
) -> Result<StepOutput, TranslateError> {
    eliminate_step_from(ws, domain, registry, mode, StepSource::Sentence(0))
}

fn eliminate_step_from(
    ws: &WeightedSentence,
    domain: &Domain,
    registry: &mut FreshRegistry,
    mode: TranslationMode,
    source: StepSource,
) -> Result<StepOutput, TranslateError> {
    let Weight::Finite(weight) = ws.weight else {
        return Err(TranslateError::HardSentence);
    };
    let pos = ws
        .sentence
        .rightmost_classical()
        .ok_or(TranslateError::NoClassicalQuantifier)?;
    let eliminated = ws.sentence.prefix()[pos].kind;
    let eliminated_var = ws.sentence.prefix()[pos].var.clone();

    // Make the target existential: a forall target flips the sentence to
    // its negation and the weight changes sign.
    let (sentence, weight, flipped) = if eliminated == QuantifierKind::Forall {
        (ws.sentence.negated(), -weight, true)
    } else {
        (ws.sentence.clone(), weight, false)
    };
    debug_assert_eq!(sentence.prefix()[pos].kind, QuantifierKind::Exists);

    let prefix = sentence.prefix().to_vec();
    let outer_vars: Vec<String> = prefix[..pos].iter().map(|q| q.var.clone()).collect();
    let target_var = prefix[pos].var.clone();
    let avg_vars: Vec<String> = prefix[pos + 1..].iter().map(|q| q.var.clone()).collect();
    let psi = sentence.matrix().clone();
    let k = pos + 1;
    let l = avg_vars.len();

    let mut constraints = Vec::new();
    if mode == TranslationMode::MarginalPreserving {
        if let Some(axioms) = registry.ensure_ord()? {
            constraints.extend(axioms);
        }
    }
    let (step_index, max_pred, leq_pred, fn_pred) = registry.fresh_step(k, l)?;

    // Fresh variable names must avoid everything in psi and the domain, so
    // substitution into the constraint formulas stays capture-free.
    let mut avoid: HashSet<String> = psi.all_var_names();
    for c in domain.iter() {
        avoid.insert(c.to_string());
    }

    constraints.extend(linear_order_axioms(&leq_pred, &outer_vars, &avoid));

    // psi with the target renamed and the avg tuple renamed.
    let psi_at = |t: &String, tuple: &[String]| -> Formula {
        let mut f = rename_free_var(&psi, &target_var, t);
        for (old, new) in avg_vars.iter().zip(tuple) {
            f = rename_free_var(&f, old, new);
        }
        f
    };

    let scalars = fresh_names(2, &avoid);
    let (a, b) = (scalars[0].clone(), scalars[1].clone());
    let mut avoid2 = avoid.clone();
    avoid2.extend(scalars.iter().cloned());
    let tuples: Vec<Vec<String>> = {
        let flat = fresh_names(4 * l, &avoid2);
        flat.chunks(l.max(1)).map(|c| c.to_vec()).take(4).collect()
    };
    let empty: Vec<String> = Vec::new();
    let (z1, z2, z3, z4): (&[String], &[String], &[String], &[String]) = if l == 0 {
        (&empty, &empty, &empty, &empty)
    } else {
        (&tuples[0], &tuples[1], &tuples[2], &tuples[3])
    };

    let outer = outer_vars.as_slice();
    let pair = [a.clone(), b.clone()];
    let leq_args = |x: &String, y: &String| concat(&[outer, &[x.clone(), y.clone()]]);
    let fn_args = |x: &String, y: &String, t1: &[String], t2: &[String]| {
        concat(&[outer, &[x.clone(), y.clone()], t1, t2])
    };

    // Existence: comparable blocks admit an image for every witness.
    {
        let quant = concat(&[outer, &pair, z1]);
        let body = Formula::implies(
            Formula::and(atom(&leq_pred, &leq_args(&a, &b)), psi_at(&a, z1)),
            exists_chain(
                z2,
                Formula::and(psi_at(&b, z2), atom(&fn_pred, &fn_args(&a, &b, z1, z2))),
            ),
        );
        constraints.push(forall_chain(&quant, body));
    }
    // Functionality and injectivity of the comparison map.
    if l > 0 {
        let quant = concat(&[outer, &pair, z1, z2, z3]);
        constraints.push(forall_chain(
            &quant,
            Formula::implies(
                Formula::and(
                    atom(&fn_pred, &fn_args(&a, &b, z1, z2)),
                    atom(&fn_pred, &fn_args(&a, &b, z1, z3)),
                ),
                tuple_eq(z2, z3).expect("l > 0"),
            ),
        ));
        constraints.push(forall_chain(
            &quant,
            Formula::implies(
                Formula::and(
                    atom(&fn_pred, &fn_args(&a, &b, z1, z3)),
                    atom(&fn_pred, &fn_args(&a, &b, z2, z3)),
                ),
                tuple_eq(z1, z2).expect("l > 0"),
            ),
        ));
    }
    // The max marker exists and is maximal in the block order.
    {
        let max_args = concat(&[outer, std::slice::from_ref(&a)]);
        constraints.push(forall_chain(
            outer,
            Formula::exists(a.clone(), atom(&max_pred, &max_args)),
        ));
        let quant = concat(&[outer, &pair]);
        constraints.push(forall_chain(
            &quant,
            Formula::implies(
                Formula::and(
                    atom(&max_pred, &max_args),
                    atom(&leq_pred, &leq_args(&a, &b)),
                ),
                eq_var(&a, &b),
            ),
        ));
    }

    if mode == TranslationMode::MarginalPreserving {
        let ord = registry.ord.clone().expect("ord declared above");
        // Domain restriction: the map lives on comparable blocks and inside
        // the witness sets.
        {
            let quant = concat(&[outer, &pair, z1, z2]);
            constraints.push(forall_chain(
                &quant,
                Formula::implies(
                    atom(&fn_pred, &fn_args(&a, &b, z1, z2)),
                    Formula::and_all(vec![
                        atom(&leq_pred, &leq_args(&a, &b)),
                        psi_at(&a, z1),
                        psi_at(&b, z2),
                    ]),
                ),
            ));
        }
        // Tie-break: a surjective comparison forces agreement with the
        // global order.
        {
            let quant = concat(&[outer, &pair]);
            let surjective = forall_chain(
                z2,
                Formula::implies(
                    psi_at(&b, z2),
                    exists_chain(z1, atom(&fn_pred, &fn_args(&a, &b, z1, z2))),
                ),
            );
            constraints.push(forall_chain(
                &quant,
                Formula::implies(
                    Formula::and(atom(&leq_pred, &leq_args(&a, &b)), surjective),
                    atom(&ord, &pair),
                ),
            ));
        }
        if l > 0 {
            // Order preservation with respect to the lexicographic extension
            // of the global order.
            {
                let quant = concat(&[outer, &pair, z1, z2, z3, z4]);
                constraints.push(forall_chain(
                    &quant,
                    Formula::implies(
                        Formula::and_all(vec![
                            lex_leq(&ord, z1, z3),
                            atom(&fn_pred, &fn_args(&a, &b, z1, z2)),
                            atom(&fn_pred, &fn_args(&a, &b, z3, z4)),
                        ]),
                        lex_leq(&ord, z2, z4),
                    ),
                ));
            }
            // Minimality: images are downward closed in the codomain witness
            // set, so every witness maps to the smallest element possible.
            {
                let quant = concat(&[outer, &pair, z1, z2]);
                let inner = forall_chain(
                    z4,
                    Formula::implies(
                        Formula::and(psi_at(&b, z4), lex_leq(&ord, z4, z2)),
                        exists_chain(z3, atom(&fn_pred, &fn_args(&a, &b, z3, z4))),
                    ),
                );
                constraints.push(forall_chain(
                    &quant,
                    Formula::implies(atom(&fn_pred, &fn_args(&a, &b, z1, z2)), inner),
                ));
            }
        }
    }

    // Rebuild the sentence: target becomes avg, matrix gains the max-atom.
    let mut new_prefix = prefix.clone();
    new_prefix[pos] = Quantifier::new(QuantifierKind::Avg, target_var.clone());
    let max_atom_args = concat(&[outer, std::slice::from_ref(&target_var)]);
    let new_matrix = Formula::and(atom(&max_pred, &max_atom_args), psi.clone());
    let new_sentence = QuantifiedSentence::new(new_prefix, new_matrix)?;
    let factor = domain.len() as f64;
    let new_weight = Weight::finite(factor * weight)?;

    Ok(StepOutput {
        sentence: WeightedSentence::new(new_sentence, new_weight),
        constraints,
        step: EliminationStep {
            step: step_index,
            source,
            eliminated,
            eliminated_var,
            flipped,
            outer_vars,
            target_var,
            avg_vars,
            psi,
            max_pred,
            leq_pred,
            fn_pred,
            weight_factor: if flipped { -factor } else { factor },
        },
    })
}

/// A translated query: the pure-`avg` residual sentence plus the affine
/// relation between its statistic on extensions and the original statistic
/// on base worlds: `Q_original(base) = scale * Q_residual(extension) +
/// offset`.
#[derive(Debug, Clone)]
pub struct TranslatedQuery {
    pub sentence: QuantifiedSentence,
    pub scale: f64,
    pub offset: f64,
}

/// Result of compiling a model (and optionally a query).
#[derive(Debug, Clone)]
pub struct TranslationResult {
    /// The compiled model: soft sentences with pure-`avg` prefixes first (in
    /// input order), then the hard constraints with weight `inf`.
    pub model: Qmln,
    pub mode: TranslationMode,
    pub steps: Vec<EliminationStep>,
    /// The global order predicate, when marginal-preserving mode introduced
    /// one.
    pub ord_pred: Option<String>,
    pub base_vocabulary: Vocabulary,
    /// The hard first-order readings of the input model's sentences; a base
    /// world violating them has no extensions.
    pub base_hard: Vec<Formula>,
    soft_index: BTreeMap<usize, usize>,
}

impl TranslationResult {
    /// The compiled soft sentence corresponding to an input sentence index.
    pub fn translated_soft(&self, input_index: usize) -> Option<&WeightedSentence> {
        self.soft_index
            .get(&input_index)
            .map(|&i| &self.model.sentences()[i])
    }

    /// Elimination steps applied to one input sentence, in order.
    pub fn steps_for(&self, input_index: usize) -> Vec<&EliminationStep> {
        self.steps
            .iter()
            .filter(|s| s.source == StepSource::Sentence(input_index))
            .collect()
    }
}

/// Compiles a model so that every soft sentence has a pure-`avg` prefix.
/// Soft sentences are processed in model order, eliminating the rightmost
/// classical quantifier until none remains; hard input sentences pass
/// through hardening into first-order constraints.
pub fn translate(
    model: &Qmln,
    domain: &Domain,
    mode: TranslationMode,
) -> Result<TranslationResult, TranslateError> {
    translate_impl(model, domain, mode, None).map(|(tr, _)| tr)
}

/// Compiles a model and a quantified query together: the query's classical
/// quantifiers are eliminated with the same registry (sharing the global
/// order), its hard constraints join the model's, and the returned query
/// carries the affine statistic relation.
pub fn translate_with_query(
    model: &Qmln,
    domain: &Domain,
    mode: TranslationMode,
    query: &QuantifiedSentence,
) -> Result<(TranslationResult, TranslatedQuery), TranslateError> {
    let (tr, q) = translate_impl(model, domain, mode, Some(query))?;
    Ok((tr, q.expect("query requested")))
}

fn translate_impl(
    model: &Qmln,
    domain: &Domain,
    mode: TranslationMode,
    query: Option<&QuantifiedSentence>,
) -> Result<(TranslationResult, Option<TranslatedQuery>), TranslateError> {
    let mut registry = FreshRegistry::new(model.vocabulary())?;
    let mut steps = Vec::new();
    let mut constraints: Vec<Formula> = Vec::new();
    let mut soft_out: Vec<(usize, WeightedSentence)> = Vec::new();
    let mut hardened: Vec<Formula> = Vec::new();

    for (idx, ws) in model.sentences().iter().enumerate() {
        match ws.weight {
            Weight::PlusInfinity => hardened.push(ws.sentence.strip_avg()),
            Weight::MinusInfinity => hardened.push(ws.sentence.negative_hard_form()),
            Weight::Finite(_) => {
                let mut current = ws.clone();
                while current.sentence.rightmost_classical().is_some() {
                    let out = eliminate_step_from(
                        &current,
                        domain,
                        &mut registry,
                        mode,
                        StepSource::Sentence(idx),
                    )?;
                    current = out.sentence;
                    constraints.extend(out.constraints);
                    steps.push(out.step);
                }
                soft_out.push((idx, current));
            }
        }
    }

    let translated_query = match query {
        None => None,
        Some(q) => {
            let mut current = WeightedSentence::new(q.clone(), Weight::Finite(1.0));
            let mut scale = 1.0f64;
            let mut offset = 0.0f64;
            while current.sentence.rightmost_classical().is_some() {
                let out =
                    eliminate_step_from(&current, domain, &mut registry, mode, StepSource::Query)?;
                if out.step.flipped {
                    // Q_old = 1 - Q_new
                    offset += scale;
                    scale = -scale;
                }
                scale *= domain.len() as f64;
                current = out.sentence;
                constraints.extend(out.constraints);
                steps.push(out.step);
            }
            Some(TranslatedQuery {
                sentence: current.sentence,
                scale,
                offset,
            })
        }
    };

    // Assemble the output model: soft results in input order, then the
    // step constraints, then the hardened input sentences (deduplicated).
    let mut sentences = Vec::new();
    let mut soft_index = BTreeMap::new();
    for (idx, ws) in soft_out {
        soft_index.insert(idx, sentences.len());
        sentences.push(ws);
    }
    let mut seen: HashSet<Formula> = HashSet::new();
    for f in constraints.into_iter().chain(hardened.iter().cloned()) {
        if !seen.insert(f.clone()) {
            continue;
        }
        sentences.push(WeightedSentence::new(
            QuantifiedSentence::new(Vec::new(), f)?,
            Weight::PlusInfinity,
        ));
    }
    let out_model = Qmln::new(registry.vocabulary.clone(), sentences)?;
    debug_assert!(out_model.vocabulary().extends(model.vocabulary()));

    Ok((
        TranslationResult {
            model: out_model,
            mode,
            steps,
            ord_pred: registry.ord,
            base_vocabulary: model.vocabulary().clone(),
            base_hard: hardened,
            soft_index,
        },
        translated_query,
    ))
}

/// The witness set of a formula at fixed outer and target values: all
/// assignments of the `avg` variables under which the world satisfies the
/// formula, enumerated in mixed-radix order over the canonical domain order.
pub fn witness_set(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    psi: &Formula,
    outer: &[(String, String)],
    target: (&str, &str),
    avg_vars: &[String],
) -> Result<Vec<Vec<String>>, WorldError> {
    let l = avg_vars.len();
    let n = domain.len();
    let mut env: Vec<(String, String)> = outer.to_vec();
    env.push((target.0.to_string(), target.1.to_string()));
    let base = env.len();
    for v in avg_vars {
        env.push((v.clone(), String::new()));
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; l];
    loop {
        for (slot, &d) in env[base..].iter_mut().zip(&digits) {
            slot.1 = domain.constant(d).to_string();
        }
        if evaluate(index, domain, world, psi, &env)? {
            out.push(
                digits
                    .iter()
                    .map(|&d| domain.constant(d).to_string())
                    .collect(),
            );
        }
        let mut i = l;
        loop {
            if i == 0 {
                return Ok(out);
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
