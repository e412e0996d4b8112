//! Max-entropy fitting of expected-statistic constraints. Each constraint
//! asks that a sentence's expected statistic under the sought distribution
//! equal a target probability. Targets of exactly 0 or 1 become hard
//! constraints (carving the feasible world set); interior targets are fitted
//! by maximizing the smooth concave dual with gradient ascent, which yields
//! the weights of a log-linear model over the input sentences.

use thiserror::Error;

use crate::inference::LogSumExp;
use crate::statistics::{check_models, sentence_statistic, StatisticError};
use crate::syntax::{ModelError, Qmln, QuantifiedSentence, Vocabulary, Weight, WeightedSentence};
use crate::worlds::{AtomIndex, Domain, World, WorldError, WorldSpace};

/// Targets within this distance of 0 or 1 are treated as hard.
pub const HARD_TARGET_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxEntError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constraint target {0} is outside [0, 1]")]
    BadTarget(f64),
    #[error("duplicate constraint sentence")]
    DuplicateConstraint,
    #[error("hard constraints unsatisfiable: no world attains statistic 1 on all of them")]
    HardUnsatisfiable,
    #[error(
        "constraint {index} is unreachable: target {target} outside the attainable range [{min}, {max}]"
    )]
    ConstraintUnreachable {
        index: usize,
        target: f64,
        min: f64,
        max: f64,
    },
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
}

impl From<StatisticError> for MaxEntError {
    fn from(e: StatisticError) -> Self {
        match e {
            StatisticError::World(w) => MaxEntError::World(w),
            StatisticError::NotBinary(p) => MaxEntError::World(WorldError::UndeclaredPredicate(p)),
        }
    }
}

/// One expected-statistic constraint: `E[Q(sentence)] = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalConstraint {
    pub sentence: QuantifiedSentence,
    pub target: f64,
}

impl MarginalConstraint {
    pub fn new(sentence: QuantifiedSentence, target: f64) -> Result<Self, MaxEntError> {
        if !(0.0..=1.0).contains(&target) || target.is_nan() {
            return Err(MaxEntError::BadTarget(target));
        }
        Ok(MarginalConstraint { sentence, target })
    }
}

/// A prepared max-entropy problem: the hard/soft constraint split, the
/// feasible world set, and the per-world statistics of the soft sentences.
#[derive(Debug, Clone)]
pub struct MaxEntProblem {
    vocabulary: Vocabulary,
    domain: Domain,
    /// Sentences forced to statistic 1 (targets of 1, and negations of
    /// targets of 0).
    hard: Vec<QuantifiedSentence>,
    /// Interior-target constraints, in input order.
    soft: Vec<MarginalConstraint>,
    /// Canonical indices of the worlds where every hard sentence holds.
    feasible: Vec<u64>,
    /// `stats[w][i]`: statistic of soft sentence `i` in feasible world `w`.
    stats: Vec<Vec<f64>>,
    n_atoms: usize,
}

/// Splits targets into hard and soft, materializes the feasible world set,
/// and pre-checks that each soft target lies in its attainable range.
pub fn build_problem(
    constraints: &[MarginalConstraint],
    vocabulary: &Vocabulary,
    domain: &Domain,
) -> Result<MaxEntProblem, MaxEntError> {
    for (i, c) in constraints.iter().enumerate() {
        if !(0.0..=1.0).contains(&c.target) || c.target.is_nan() {
            return Err(MaxEntError::BadTarget(c.target));
        }
        if constraints[..i]
            .iter()
            .any(|o| o.sentence == c.sentence && o.target == c.target)
        {
            return Err(MaxEntError::DuplicateConstraint);
        }
    }
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for c in constraints {
        if c.target >= 1.0 - HARD_TARGET_EPS {
            hard.push(c.sentence.clone());
        } else if c.target <= HARD_TARGET_EPS {
            hard.push(c.sentence.negated());
        } else {
            soft.push(c.clone());
        }
    }

    let space = WorldSpace::with_cap(vocabulary, domain, crate::inference::FULL_ENUM_CAP)?;
    let index = space.atom_index();
    let mut feasible = Vec::new();
    let mut stats = Vec::new();
    'world: for w in 0..space.len() {
        let world = space.world(w);
        for h in &hard {
            if !check_models(index, domain, &world, h)? {
                continue 'world;
            }
        }
        let mut row = Vec::with_capacity(soft.len());
        for c in &soft {
            row.push(sentence_statistic(index, domain, &world, &c.sentence)?);
        }
        feasible.push(w);
        stats.push(row);
    }
    if feasible.is_empty() {
        return Err(MaxEntError::HardUnsatisfiable);
    }
    for (i, c) in soft.iter().enumerate() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for row in &stats {
            lo = lo.min(row[i]);
            hi = hi.max(row[i]);
        }
        if lo > c.target || hi < c.target {
            return Err(MaxEntError::ConstraintUnreachable {
                index: i,
                target: c.target,
                min: lo,
                max: hi,
            });
        }
    }
    Ok(MaxEntProblem {
        vocabulary: vocabulary.clone(),
        domain: domain.clone(),
        hard,
        soft,
        feasible,
        stats,
        n_atoms: space.n_atoms(),
    })
}

impl MaxEntProblem {
    pub fn hard(&self) -> &[QuantifiedSentence] {
        &self.hard
    }

    pub fn soft(&self) -> &[MarginalConstraint] {
        &self.soft
    }

    pub fn feasible_worlds(&self) -> impl Iterator<Item = World> + '_ {
        self.feasible
            .iter()
            .map(|&i| World::from_index(i, self.n_atoms))
    }

    pub fn n_feasible(&self) -> usize {
        self.feasible.len()
    }

    pub fn atom_index(&self) -> Result<AtomIndex, WorldError> {
        AtomIndex::new(&self.vocabulary, &self.domain)
    }

    fn exponents(&self, weights: &[f64]) -> Vec<f64> {
        self.stats
            .iter()
            .map(|row| row.iter().zip(weights).map(|(s, w)| s * w).sum())
            .collect()
    }

    /// Probabilities over the feasible worlds at the given weights.
    pub fn distribution_at(&self, weights: &[f64]) -> Vec<f64> {
        let exps = self.exponents(weights);
        let mut lse = LogSumExp::new();
        for &e in &exps {
            lse.add(e);
        }
        let log_z = lse.value();
        exps.into_iter().map(|e| (e - log_z).exp()).collect()
    }
}

/// The concave dual objective: the weighted targets minus the log partition
/// sum over the feasible worlds.
pub fn dual_objective(problem: &MaxEntProblem, weights: &[f64]) -> f64 {
    assert_eq!(weights.len(), problem.soft.len());
    let linear: f64 = problem
        .soft
        .iter()
        .zip(weights)
        .map(|(c, w)| w * c.target)
        .sum();
    let mut lse = LogSumExp::new();
    for e in problem.exponents(weights) {
        lse.add(e);
    }
    linear - lse.value()
}

/// Gradient of the dual: target minus expected statistic at the current
/// weights, one component per soft constraint.
pub fn dual_gradient(problem: &MaxEntProblem, weights: &[f64]) -> Vec<f64> {
    assert_eq!(weights.len(), problem.soft.len());
    let probs = problem.distribution_at(weights);
    let mut expected = vec![0.0; problem.soft.len()];
    for (row, p) in problem.stats.iter().zip(&probs) {
        for (e, s) in expected.iter_mut().zip(row) {
            *e += p * s;
        }
    }
    problem
        .soft
        .iter()
        .zip(&expected)
        .map(|(c, e)| c.target - e)
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Convergence threshold on the gradient infinity norm.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-8,
            max_iterations: 100_000,
        }
    }
}

/// A fitted max-entropy model.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Dual weights of the soft constraints, in input order.
    pub weights: Vec<f64>,
    /// The fitted model: soft sentences with their dual weights plus the
    /// hard sentences with weight `inf`.
    pub model: Qmln,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Maximizes the dual by gradient ascent with Armijo backtracking from a
/// zero start. The concavity of the dual makes the starting point
/// irrelevant; termination is on the gradient infinity norm.
pub fn solve(problem: &MaxEntProblem, options: SolveOptions) -> Result<Solution, MaxEntError> {
    const ARMIJO_C: f64 = 1e-4;
    const SHRINK: f64 = 0.5;
    const MIN_STEP: f64 = 1e-18;

    let n = problem.soft.len();
    let mut weights = vec![0.0; n];
    let mut iterations = 0;
    let mut grad = dual_gradient(problem, &weights);
    let inf_norm = |g: &[f64]| g.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    while inf_norm(&grad) > options.tolerance {
        if iterations >= options.max_iterations {
            return Err(MaxEntError::NonConvergence {
                iterations,
                gradient_norm: inf_norm(&grad),
            });
        }
        let value = dual_objective(problem, &weights);
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        let mut step = 1.0;
        loop {
            let candidate: Vec<f64> = weights
                .iter()
                .zip(&grad)
                .map(|(w, g)| w + step * g)
                .collect();
            if dual_objective(problem, &candidate) >= value + ARMIJO_C * step * grad_sq {
                weights = candidate;
                break;
            }
            step *= SHRINK;
            if step < MIN_STEP {
                return Err(MaxEntError::NonConvergence {
                    iterations,
                    gradient_norm: inf_norm(&grad),
                });
            }
        }
        grad = dual_gradient(problem, &weights);
        iterations += 1;
    }

    let mut sentences = Vec::with_capacity(n + problem.hard.len());
    for (c, &w) in problem.soft.iter().zip(&weights) {
        sentences.push(WeightedSentence::new(
            c.sentence.clone(),
            Weight::finite(w)?,
        ));
    }
    for h in &problem.hard {
        sentences.push(WeightedSentence::new(h.clone(), Weight::PlusInfinity));
    }
    let model = Qmln::new(problem.vocabulary.clone(), sentences)?;
    Ok(Solution {
        gradient_norm: inf_norm(&grad),
        weights,
        model,
        iterations,
    })
}
