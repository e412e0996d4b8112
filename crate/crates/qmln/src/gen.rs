//! Deterministic seeded generators for randomized tests: formulas,
//! quantified sentences, models, and weighted-formula sets. Every generator
//! is a pure function of its `Rng`, so a fixed seed reproduces the exact
//! same artifacts on every run.

use crate::inference::{Mln, WeightedFormula};
use crate::syntax::{
    Atom, Formula, Qmln, QuantifiedSentence, Quantifier, QuantifierKind, Term, Vocabulary, Weight,
    WeightedSentence,
};
use crate::worlds::{Domain, World};

/// Small splittable PRNG (splitmix64). Not for cryptography; chosen for
/// stability across platforms and releases.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi].
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// Knobs for formula generation.
#[derive(Debug, Clone)]
pub struct FormulaOptions {
    pub max_depth: usize,
    pub allow_inner_quantifiers: bool,
    pub allow_equality: bool,
    pub allow_constants: bool,
}

impl Default for FormulaOptions {
    fn default() -> Self {
        FormulaOptions {
            max_depth: 3,
            allow_inner_quantifiers: true,
            allow_equality: true,
            allow_constants: true,
        }
    }
}

fn random_term(rng: &mut Rng, vars: &[String], domain: &Domain, opts: &FormulaOptions) -> Term {
    if !vars.is_empty() && (!opts.allow_constants || rng.chance(0.7)) {
        Term::Var(rng.pick(vars).clone())
    } else {
        Term::Const(rng.pick(&domain.iter().collect::<Vec<_>>()).to_string())
    }
}

fn random_atom(
    rng: &mut Rng,
    vocabulary: &Vocabulary,
    vars: &[String],
    domain: &Domain,
    opts: &FormulaOptions,
) -> Formula {
    let preds: Vec<(String, usize)> = vocabulary.iter().map(|(n, a)| (n.to_string(), a)).collect();
    if opts.allow_equality && rng.chance(0.15) {
        let l = random_term(rng, vars, domain, opts);
        let r = random_term(rng, vars, domain, opts);
        return Formula::Atom(Atom::Equal(l, r));
    }
    let (name, arity) = rng.pick(&preds).clone();
    let args = (0..arity)
        .map(|_| random_term(rng, vars, domain, opts))
        .collect();
    Formula::Atom(Atom::Pred { name, args })
}

/// A random formula whose free variables are a subset of `vars`. Inner
/// quantifier variables are drawn from a fresh namespace, so the no-shadowing
/// discipline holds by construction.
pub fn random_formula(
    rng: &mut Rng,
    vocabulary: &Vocabulary,
    vars: &[String],
    domain: &Domain,
    opts: &FormulaOptions,
) -> Formula {
    let mut inner_counter = 0usize;
    formula_rec(
        rng,
        vocabulary,
        &mut vars.to_vec(),
        domain,
        opts,
        opts.max_depth,
        &mut inner_counter,
    )
}

fn formula_rec(
    rng: &mut Rng,
    vocabulary: &Vocabulary,
    vars: &mut Vec<String>,
    domain: &Domain,
    opts: &FormulaOptions,
    depth: usize,
    inner_counter: &mut usize,
) -> Formula {
    if depth == 0 || rng.chance(0.3) {
        return random_atom(rng, vocabulary, vars, domain, opts);
    }
    match rng.below(if opts.allow_inner_quantifiers { 6 } else { 5 }) {
        0 => Formula::Not(Box::new(formula_rec(
            rng,
            vocabulary,
            vars,
            domain,
            opts,
            depth - 1,
            inner_counter,
        ))),
        1 => Formula::and(
            formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            ),
            formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            ),
        ),
        2 => Formula::or(
            formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            ),
            formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            ),
        ),
        3 | 4 => Formula::implies(
            formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            ),
            formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            ),
        ),
        _ => {
            let v = loop {
                let candidate = format!("z{}", inner_counter);
                *inner_counter += 1;
                if !vars.contains(&candidate) && !domain.contains(&candidate) {
                    break candidate;
                }
            };
            vars.push(v.clone());
            let body = formula_rec(
                rng,
                vocabulary,
                vars,
                domain,
                opts,
                depth - 1,
                inner_counter,
            );
            vars.pop();
            if rng.chance(0.5) {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            }
        }
    }
}

/// A random quantified sentence with the given prefix kinds. Every prefix
/// variable is guaranteed to occur in the matrix: a coverage conjunction of
/// atoms mentions each variable, and a random subformula is mixed in.
pub fn random_sentence(
    rng: &mut Rng,
    vocabulary: &Vocabulary,
    domain: &Domain,
    prefix_kinds: &[QuantifierKind],
    opts: &FormulaOptions,
) -> QuantifiedSentence {
    let mut vars = Vec::with_capacity(prefix_kinds.len());
    let mut i = 0usize;
    while vars.len() < prefix_kinds.len() {
        let candidate = format!("x{i}");
        i += 1;
        if !domain.contains(&candidate) {
            vars.push(candidate);
        }
    }
    let prefix: Vec<Quantifier> = prefix_kinds
        .iter()
        .zip(&vars)
        .map(|(&kind, v)| Quantifier::new(kind, v.clone()))
        .collect();

    let preds: Vec<(String, usize)> = vocabulary
        .iter()
        .filter(|&(_, a)| a > 0)
        .map(|(n, a)| (n.to_string(), a))
        .collect();
    assert!(!preds.is_empty(), "need a predicate with positive arity");
    // Coverage: one atom per prefix variable, so the sentence is well formed.
    let mut cover = Vec::with_capacity(vars.len());
    for v in &vars {
        let (name, arity) = rng.pick(&preds).clone();
        let slot = rng.below(arity);
        let args = (0..arity)
            .map(|j| {
                if j == slot {
                    Term::Var(v.clone())
                } else {
                    random_term(rng, &vars, domain, opts)
                }
            })
            .collect();
        cover.push(Formula::Atom(Atom::Pred { name, args }));
    }
    let mut matrix = Formula::and_all(cover);
    if rng.chance(0.8) {
        let extra = random_formula(rng, vocabulary, &vars, domain, opts);
        matrix = match rng.below(3) {
            0 => Formula::and(matrix, extra),
            1 => Formula::or(matrix, extra),
            _ => Formula::implies(extra, matrix),
        };
    }
    if rng.chance(0.25) {
        matrix = Formula::Not(Box::new(matrix));
    }
    QuantifiedSentence::new(prefix, matrix).expect("generator maintains the invariants")
}

/// A random prefix of the given length over the allowed kinds.
pub fn random_prefix_kinds(
    rng: &mut Rng,
    len: usize,
    kinds: &[QuantifierKind],
) -> Vec<QuantifierKind> {
    (0..len).map(|_| *rng.pick(kinds)).collect()
}

/// A random model with `n_sentences` soft sentences (weights uniform in
/// `weight_range`), with duplicate sentences retried away.
pub fn random_model(
    rng: &mut Rng,
    vocabulary: &Vocabulary,
    domain: &Domain,
    n_sentences: usize,
    weight_range: (f64, f64),
    max_prefix: usize,
    opts: &FormulaOptions,
) -> Qmln {
    let all_kinds = [
        QuantifierKind::Forall,
        QuantifierKind::Exists,
        QuantifierKind::Avg,
    ];
    let mut sentences: Vec<WeightedSentence> = Vec::with_capacity(n_sentences);
    while sentences.len() < n_sentences {
        let len = 1 + rng.below(max_prefix);
        let kinds = random_prefix_kinds(rng, len, &all_kinds);
        let s = random_sentence(rng, vocabulary, domain, &kinds, opts);
        let w = Weight::Finite(rng.range(weight_range.0, weight_range.1));
        let ws = WeightedSentence::new(s, w);
        if !sentences.contains(&ws) {
            sentences.push(ws);
        }
    }
    Qmln::new(vocabulary.clone(), sentences).expect("generator maintains the invariants")
}

/// A random set of quantifier-free weighted formulas over free variables
/// `x0..`, as used by the classical-model bridge tests.
pub fn random_mln(
    rng: &mut Rng,
    vocabulary: &Vocabulary,
    domain: &Domain,
    n_formulas: usize,
    max_free_vars: usize,
    weight_range: (f64, f64),
) -> Mln {
    let opts = FormulaOptions {
        max_depth: 2,
        allow_inner_quantifiers: false,
        allow_equality: true,
        allow_constants: true,
    };
    let mut formulas = Vec::with_capacity(n_formulas);
    while formulas.len() < n_formulas {
        let k = rng.below(max_free_vars + 1);
        let vars: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        let formula = random_formula(rng, vocabulary, &vars, domain, &opts);
        let wf = WeightedFormula {
            formula,
            weight: Weight::Finite(rng.range(weight_range.0, weight_range.1)),
        };
        if !formulas.contains(&wf) {
            formulas.push(wf);
        }
    }
    Mln::new(vocabulary.clone(), formulas).expect("finite weights only")
}

/// A uniformly random world over `n_atoms` ground atoms.
pub fn random_world(rng: &mut Rng, n_atoms: usize) -> World {
    let mut w = World::empty(n_atoms);
    for i in 0..n_atoms {
        if rng.chance(0.5) {
            w.set(i, true);
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_model;

    #[test]
    fn generators_are_deterministic() {
        let (scaffold, domain) =
            parse_model("domain = {a,b}\npredicate smoker/1\npredicate knows/2\n").unwrap();
        let make = || {
            let mut rng = Rng::new(42);
            random_model(
                &mut rng,
                scaffold.vocabulary(),
                &domain,
                3,
                (-2.0, 2.0),
                3,
                &FormulaOptions::default(),
            )
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn generated_sentences_satisfy_the_invariants() {
        let (scaffold, domain) =
            parse_model("domain = {a,b}\npredicate smoker/1\npredicate knows/2\n").unwrap();
        let mut rng = Rng::new(7);
        let kinds = [
            QuantifierKind::Forall,
            QuantifierKind::Exists,
            QuantifierKind::Avg,
        ];
        for _ in 0..200 {
            let len = 1 + rng.below(3);
            let prefix = random_prefix_kinds(&mut rng, len, &kinds);
            // Construction panics if any invariant breaks.
            let s = random_sentence(
                &mut rng,
                scaffold.vocabulary(),
                &domain,
                &prefix,
                &FormulaOptions::default(),
            );
            s.matrix().check_vocabulary(scaffold.vocabulary()).unwrap();
        }
    }

    #[test]
    fn random_worlds_cover_the_space() {
        let mut rng = Rng::new(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            seen.insert(random_world(&mut rng, 4));
        }
        assert_eq!(seen.len(), 16);
    }
}
