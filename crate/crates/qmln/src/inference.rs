//! Exact inference by world enumeration: log-linear world distributions,
//! partition function, MAP worlds, marginal probabilities of first-order
//! sentences, marginal queries of quantified sentences, and the bridges
//! between classical weighted-formula models and quantified models.

use rayon::prelude::*;
use thiserror::Error;

use crate::statistics::{sentence_statistic, StatisticError};
use crate::syntax::{
    hardening, Formula, Qmln, QuantifiedSentence, Quantifier, QuantifierKind, Vocabulary, Weight,
    WeightedSentence,
};
use crate::worlds::{
    evaluate, ground_true_count, AtomIndex, Domain, World, WorldError, WorldSpace,
};

/// Cap on ground atoms for operations that enumerate the full world space.
pub const FULL_ENUM_CAP: usize = 24;

/// Log-potential tie tolerance for MAP world sets.
pub const MAP_TIE_TOLERANCE: f64 = 1e-12;

const CHUNK_BITS: usize = 13;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Model(#[from] crate::syntax::ModelError),
    #[error("inconsistent hard constraints: no world satisfies them")]
    Infeasible,
    #[error("soft sentence `{0}` does not have a pure avg prefix; run translate first")]
    NotMlnExpressible(String),
    #[error("weighted formulas only admit finite weights or inf")]
    InvalidMlnWeight,
}

impl From<StatisticError> for InferenceError {
    fn from(e: StatisticError) -> Self {
        match e {
            StatisticError::World(w) => InferenceError::World(w),
            StatisticError::NotBinary(p) => {
                InferenceError::World(WorldError::UndeclaredPredicate(p))
            }
        }
    }
}

/// Streaming log-sum-exp accumulator with an associative merge.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> LogSumExp {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp::new()
    }
}

/// An explicit world distribution in log space, with the worlds indexed in
/// canonical bit-pattern order. Worlds violating the hard constraints carry
/// log-probability negative infinity.
#[derive(Debug, Clone)]
pub struct Distribution {
    vocabulary: Vocabulary,
    domain: Domain,
    log_probs: Vec<f64>,
    log_z: f64,
}

impl Distribution {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_prob(&self, world_index: u64) -> f64 {
        self.log_probs[world_index as usize]
    }

    pub fn prob(&self, world_index: u64) -> f64 {
        self.log_probs[world_index as usize].exp()
    }

    pub fn probs(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_probs.iter().map(|lp| lp.exp())
    }

    pub fn entropy(&self) -> f64 {
        self.log_probs
            .iter()
            .map(|&lp| {
                let p = lp.exp();
                if p > 0.0 {
                    -p * lp
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Total-variation distance to another distribution on the same space.
    pub fn tv_distance(&self, other: &[f64]) -> f64 {
        assert_eq!(self.log_probs.len(), other.len());
        0.5 * self
            .log_probs
            .iter()
            .zip(other)
            .map(|(&lp, &q)| (lp.exp() - q).abs())
            .sum::<f64>()
    }

    /// Pointwise maximum absolute probability difference.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        assert_eq!(self.log_probs.len(), other.log_probs.len());
        self.log_probs
            .iter()
            .zip(&other.log_probs)
            .map(|(&a, &b)| (a.exp() - b.exp()).abs())
            .fold(0.0, f64::max)
    }
}

struct Prepared<'a> {
    index: AtomIndex,
    hard: Vec<Formula>,
    soft: Vec<(&'a QuantifiedSentence, f64)>,
}

fn prepare<'a>(model: &'a Qmln, domain: &Domain) -> Result<Prepared<'a>, InferenceError> {
    let index = AtomIndex::new(model.vocabulary(), domain)?;
    let hard = hardening(model);
    let soft = model.soft().collect();
    Ok(Prepared { index, hard, soft })
}

fn potential(p: &Prepared, domain: &Domain, world: &World) -> Result<f64, InferenceError> {
    // Hard constraints gate first, so infinite weights never meet statistics.
    for h in &p.hard {
        if !evaluate(&p.index, domain, world, h, &[])? {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let mut sum = 0.0;
    for (sentence, w) in &p.soft {
        sum += w * sentence_statistic(&p.index, domain, world, sentence)?;
    }
    Ok(sum)
}

/// Log-potential of a world: negative infinity when a hard constraint fails,
/// otherwise the weighted sum of soft sentence statistics.
pub fn log_potential(model: &Qmln, domain: &Domain, world: &World) -> Result<f64, InferenceError> {
    let p = prepare(model, domain)?;
    potential(&p, domain, world)
}

fn enumerate_potentials<'a>(
    model: &'a Qmln,
    domain: &Domain,
) -> Result<(Prepared<'a>, Vec<f64>), InferenceError> {
    let p = prepare(model, domain)?;
    let space = WorldSpace::with_cap(model.vocabulary(), domain, FULL_ENUM_CAP)?;
    let n = space.len();
    let n_atoms = space.n_atoms();
    let chunk = 1u64 << CHUNK_BITS.min(n_atoms);
    let n_chunks = n.div_ceil(chunk);
    // Fixed-size chunks keep results identical for any thread count.
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = n.min(lo + chunk);
            let mut out = Vec::with_capacity((hi - lo) as usize);
            for i in lo..hi {
                out.push(potential(&p, domain, &World::from_index(i, n_atoms))?);
            }
            Ok(out)
        })
        .collect::<Result<_, InferenceError>>()?;
    let mut potentials = Vec::with_capacity(n as usize);
    for c in chunks {
        potentials.extend(c);
    }
    Ok((p, potentials))
}

/// Fits the explicit world distribution of a model: computes all potentials,
/// normalizes by a streaming log-sum-exp, and stores log-probabilities.
pub fn fit_distribution(model: &Qmln, domain: &Domain) -> Result<Distribution, InferenceError> {
    let (_, mut potentials) = enumerate_potentials(model, domain)?;
    let mut lse = LogSumExp::new();
    for &v in &potentials {
        lse.add(v);
    }
    let log_z = lse.value();
    if log_z == f64::NEG_INFINITY {
        return Err(InferenceError::Infeasible);
    }
    for v in &mut potentials {
        *v -= log_z;
    }
    Ok(Distribution {
        vocabulary: model.vocabulary().clone(),
        domain: domain.clone(),
        log_probs: potentials,
        log_z,
    })
}

/// The most probable worlds of a model.
#[derive(Debug, Clone)]
pub struct MapResult {
    /// All argmax worlds in ascending canonical index order; the first is the
    /// representative.
    pub worlds: Vec<World>,
    /// Normalized log-probability of the representative.
    pub log_prob: f64,
}

/// All maximizers of the world distribution, with ties resolved at
/// [`MAP_TIE_TOLERANCE`] in log-potential.
pub fn map_worlds(model: &Qmln, domain: &Domain) -> Result<MapResult, InferenceError> {
    let dist = fit_distribution(model, domain)?;
    let best = dist
        .log_probs
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let n_atoms = AtomIndex::new(model.vocabulary(), domain)?.len();
    let worlds = dist
        .log_probs
        .iter()
        .enumerate()
        .filter(|(_, &lp)| best - lp <= MAP_TIE_TOLERANCE)
        .map(|(i, _)| World::from_index(i as u64, n_atoms))
        .collect();
    Ok(MapResult {
        worlds,
        log_prob: best,
    })
}

/// Probability that a closed first-order sentence holds under the model
/// distribution.
pub fn marginal_prob(
    model: &Qmln,
    domain: &Domain,
    query: &Formula,
) -> Result<f64, InferenceError> {
    let p = prepare(model, domain)?;
    let dist = fit_distribution(model, domain)?;
    let n_atoms = p.index.len();
    let mut total = 0.0;
    for (i, &lp) in dist.log_probs.iter().enumerate() {
        if lp == f64::NEG_INFINITY {
            continue;
        }
        if evaluate(
            &p.index,
            domain,
            &World::from_index(i as u64, n_atoms),
            query,
            &[],
        )? {
            total += lp.exp();
        }
    }
    Ok(total)
}

/// Expected statistic of a quantified sentence under the model distribution.
pub fn marginal_query(
    model: &Qmln,
    domain: &Domain,
    query: &QuantifiedSentence,
) -> Result<f64, InferenceError> {
    let p = prepare(model, domain)?;
    let dist = fit_distribution(model, domain)?;
    let n_atoms = p.index.len();
    let mut total = 0.0;
    for (i, &lp) in dist.log_probs.iter().enumerate() {
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let q = sentence_statistic(
            &p.index,
            domain,
            &World::from_index(i as u64, n_atoms),
            query,
        )?;
        total += lp.exp() * q;
    }
    Ok(total)
}

/// The conjunction of the classical readings of all sentences in a model.
/// Worlds satisfying it are the "models" of the theory; as all weights grow,
/// the distribution concentrates uniformly on them.
pub fn classical_conjunction(model: &Qmln) -> Option<Formula> {
    let parts: Vec<Formula> = model
        .sentences()
        .iter()
        .map(|ws| ws.sentence.strip_avg())
        .collect();
    if parts.is_empty() {
        None
    } else {
        Some(Formula::and_all(parts))
    }
}

/// Total-variation distance between a fitted distribution and the uniform
/// distribution over the worlds satisfying the classical conjunction of the
/// model's sentences.
pub fn tv_to_uniform_models(
    model: &Qmln,
    domain: &Domain,
    dist: &Distribution,
) -> Result<f64, InferenceError> {
    let index = AtomIndex::new(model.vocabulary(), domain)?;
    let n_atoms = index.len();
    let conj = classical_conjunction(model);
    let mut satisfying = vec![false; dist.len()];
    let mut count = 0usize;
    for (i, slot) in satisfying.iter_mut().enumerate() {
        let holds = match &conj {
            Some(f) => evaluate(
                &index,
                domain,
                &World::from_index(i as u64, n_atoms),
                f,
                &[],
            )?,
            None => true,
        };
        *slot = holds;
        count += holds as usize;
    }
    if count == 0 {
        return Err(InferenceError::Infeasible);
    }
    let u = 1.0 / count as f64;
    let uniform: Vec<f64> = satisfying
        .iter()
        .map(|&s| if s { u } else { 0.0 })
        .collect();
    Ok(dist.tv_distance(&uniform))
}

/// A weighted formula in the classical style: free variables are implicitly
/// averaged over, and `inf` marks a hard constraint (its universal closure
/// must hold).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedFormula {
    pub formula: Formula,
    pub weight: Weight,
}

/// A classical weighted-formula model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mln {
    vocabulary: Vocabulary,
    formulas: Vec<WeightedFormula>,
}

impl Mln {
    pub fn new(
        vocabulary: Vocabulary,
        formulas: Vec<WeightedFormula>,
    ) -> Result<Mln, InferenceError> {
        for wf in &formulas {
            if matches!(wf.weight, Weight::MinusInfinity) {
                return Err(InferenceError::InvalidMlnWeight);
            }
        }
        Ok(Mln {
            vocabulary,
            formulas,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn formulas(&self) -> &[WeightedFormula] {
        &self.formulas
    }
}

/// Lifts a classical weighted-formula model to a quantified one: each
/// formula's free variables become an `avg` prefix and finite weights scale
/// by `|domain|^k`. The two models induce the same world distribution.
pub fn mln_to_qmln(mln: &Mln, domain: &Domain) -> Result<Qmln, InferenceError> {
    let n = domain.len() as f64;
    let mut sentences = Vec::with_capacity(mln.formulas().len());
    for wf in mln.formulas() {
        let free = wf.formula.free_vars();
        let prefix: Vec<Quantifier> = free
            .iter()
            .map(|v| Quantifier::new(QuantifierKind::Avg, v.clone()))
            .collect();
        let sentence = QuantifiedSentence::new(prefix, wf.formula.clone())?;
        let weight = match wf.weight {
            Weight::Finite(w) => Weight::Finite(w * n.powi(free.len() as i32)),
            hard => hard,
        };
        sentences.push(WeightedSentence::new(sentence, weight));
    }
    Ok(Qmln::new(mln.vocabulary().clone(), sentences)?)
}

/// Inverse of [`mln_to_qmln`]: soft sentences must carry pure-`avg` prefixes
/// (their weights divide by `|domain|^k`); hard sentences are emitted as
/// their first-order hard readings with weight `inf`.
pub fn qmln_to_mln(model: &Qmln, domain: &Domain) -> Result<Mln, InferenceError> {
    let n = domain.len() as f64;
    let mut formulas = Vec::with_capacity(model.sentences().len());
    for ws in model.sentences() {
        match ws.weight {
            Weight::Finite(w) => {
                if !ws.sentence.is_pure_avg() {
                    return Err(InferenceError::NotMlnExpressible(ws.sentence.to_string()));
                }
                let k = ws.sentence.prefix().len();
                formulas.push(WeightedFormula {
                    formula: ws.sentence.matrix().clone(),
                    weight: Weight::Finite(w / n.powi(k as i32)),
                });
            }
            Weight::PlusInfinity => formulas.push(WeightedFormula {
                formula: ws.sentence.strip_avg(),
                weight: Weight::PlusInfinity,
            }),
            Weight::MinusInfinity => formulas.push(WeightedFormula {
                formula: ws.sentence.negative_hard_form(),
                weight: Weight::PlusInfinity,
            }),
        }
    }
    Mln::new(model.vocabulary().clone(), formulas)
}

/// Log-potential of a world under the classical weighted-formula semantics:
/// hard constraints are universal closures that must hold; soft formulas
/// contribute weight times the number of satisfied groundings.
pub fn mln_log_potential(
    mln: &Mln,
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
) -> Result<f64, InferenceError> {
    for wf in mln.formulas() {
        if wf.weight.is_hard() {
            let mut closed = wf.formula.clone();
            for v in wf.formula.free_vars().into_iter().rev() {
                closed = Formula::forall(v, closed);
            }
            if !evaluate(index, domain, world, &closed, &[])? {
                return Ok(f64::NEG_INFINITY);
            }
        }
    }
    let mut sum = 0.0;
    for wf in mln.formulas() {
        if let Weight::Finite(w) = wf.weight {
            sum += w * ground_true_count(index, domain, world, &wf.formula)? as f64;
        }
    }
    Ok(sum)
}

/// Fits the explicit world distribution of a classical weighted-formula
/// model. Independent of [`fit_distribution`]; used to cross-check the
/// bridges between the two model classes.
pub fn mln_distribution(mln: &Mln, domain: &Domain) -> Result<Distribution, InferenceError> {
    let space = WorldSpace::with_cap(mln.vocabulary(), domain, FULL_ENUM_CAP)?;
    let index = space.atom_index();
    let mut potentials = Vec::with_capacity(space.len() as usize);
    let mut lse = LogSumExp::new();
    for world in space.iter() {
        let v = mln_log_potential(mln, index, domain, &world)?;
        lse.add(v);
        potentials.push(v);
    }
    let log_z = lse.value();
    if log_z == f64::NEG_INFINITY {
        return Err(InferenceError::Infeasible);
    }
    for v in &mut potentials {
        *v -= log_z;
    }
    Ok(Distribution {
        vocabulary: mln.vocabulary().clone(),
        domain: domain.clone(),
        log_probs: potentials,
        log_z,
    })
}
