//! Independent brute-force reference implementations used by the test suite
//! and the `verify` subcommand: a substitution-based statistic, canonical
//! extension construction for compiled models, structural enumeration of all
//! valid extensions, and end-to-end checks that compilation preserves MAP
//! worlds, marginal probabilities, and extension counts.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::inference::{
    fit_distribution, map_worlds, marginal_prob, InferenceError, LogSumExp, FULL_ENUM_CAP,
};
use crate::statistics::{sentence_statistic, StatisticError};
use crate::syntax::{hardening, substitute, Formula, Qmln, QuantifiedSentence, QuantifierKind};
use crate::translate::{
    translate, translate_with_query, witness_set, EliminationStep, TranslateError, TranslationMode,
    TranslationResult,
};
use crate::worlds::{evaluate, AtomIndex, Domain, World, WorldError, WorldSpace};

/// Largest domain for which extension enumeration is attempted.
pub const EXTENSION_DOMAIN_CAP: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("domain size {domain} exceeds the extension-enumeration cap of {cap}")]
    CapExceeded { domain: usize, cap: usize },
    #[error("operation requires a marginal-preserving translation")]
    WrongMode,
    #[error("the base world violates the model's hard constraints and has no extensions")]
    InfeasibleBase,
    #[error("constructed extension violates a hard constraint: {0}")]
    ConstructionInvalid(String),
}

impl From<StatisticError> for OracleError {
    fn from(e: StatisticError) -> Self {
        match e {
            StatisticError::World(w) => OracleError::World(w),
            StatisticError::NotBinary(p) => OracleError::World(WorldError::UndeclaredPredicate(p)),
        }
    }
}

/// Statistic computed by the literal recursive definition: substitute the
/// leading prefix variable and recurse on whole sentences, applying the
/// satisfaction indicator as soon as the remainder is `avg`-free. Kept
/// independent of the environment-passing implementation it cross-checks.
pub fn substitution_statistic(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    sentence: &QuantifiedSentence,
) -> Result<f64, OracleError> {
    if !sentence.has_avg() {
        let holds = evaluate(index, domain, world, &sentence.strip_avg(), &[])?;
        return Ok(if holds { 1.0 } else { 0.0 });
    }
    let q = sentence.prefix()[0].clone();
    let rest = sentence.prefix()[1..].to_vec();
    let mut values = Vec::with_capacity(domain.len());
    for i in 0..domain.len() {
        let bindings = BTreeMap::from([(q.var.clone(), domain.constant(i).to_string())]);
        let matrix = substitute(sentence.matrix(), &bindings)
            .map_err(|e| OracleError::Translate(TranslateError::Model(e)))?;
        let sub = QuantifiedSentence::new(rest.clone(), matrix)
            .map_err(|e| OracleError::Translate(TranslateError::Model(e)))?;
        values.push(substitution_statistic(index, domain, world, &sub)?);
    }
    Ok(match q.kind {
        QuantifierKind::Forall => values.iter().copied().fold(f64::INFINITY, f64::min),
        QuantifierKind::Exists => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        QuantifierKind::Avg => values.iter().sum::<f64>() / domain.len() as f64,
    })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    fn rec(
        n: usize,
        depth: usize,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current[depth] = i;
                rec(n, depth + 1, current, used, out);
                used[i] = false;
            }
        }
    }
    rec(n, 0, &mut current, &mut used, &mut out);
    out
}

/// Valid extensions grouped by the global-order choice that produced them
/// (`None` in map-only mode).
pub type ExtensionsByOrder = Vec<(Option<Vec<usize>>, Vec<World>)>;

/// Extension machinery for a compiled model: builds and enumerates worlds
/// over the extended vocabulary that agree with a base world on the original
/// predicates and satisfy the emitted hard constraints.
pub struct ExtensionSpace<'a> {
    tr: &'a TranslationResult,
    domain: &'a Domain,
    base_index: AtomIndex,
    ext_index: AtomIndex,
    hard: Vec<Formula>,
    base_atoms: usize,
}

impl<'a> ExtensionSpace<'a> {
    pub fn new(tr: &'a TranslationResult, domain: &'a Domain) -> Result<Self, OracleError> {
        if domain.len() > EXTENSION_DOMAIN_CAP {
            return Err(OracleError::CapExceeded {
                domain: domain.len(),
                cap: EXTENSION_DOMAIN_CAP,
            });
        }
        let base_index = AtomIndex::new(&tr.base_vocabulary, domain)?;
        let ext_index = AtomIndex::new(tr.model.vocabulary(), domain)?;
        assert!(tr.model.vocabulary().extends(&tr.base_vocabulary));
        Ok(ExtensionSpace {
            tr,
            domain,
            base_atoms: base_index.len(),
            base_index,
            ext_index,
            hard: hardening(&tr.model),
        })
    }

    pub fn base_index(&self) -> &AtomIndex {
        &self.base_index
    }

    pub fn ext_index(&self) -> &AtomIndex {
        &self.ext_index
    }

    pub fn lift(&self, base: &World) -> World {
        base.resized(self.base_atoms, self.ext_index.len())
    }

    pub fn restrict(&self, ext: &World) -> World {
        ext.truncated(self.base_atoms)
    }

    pub fn satisfies_hard(&self, ext: &World) -> Result<bool, OracleError> {
        for h in &self.hard {
            if !evaluate(&self.ext_index, self.domain, ext, h, &[])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether a base world satisfies the input model's hard constraints.
    /// Infeasible base worlds have no extensions.
    pub fn base_feasible(&self, base: &World) -> Result<bool, OracleError> {
        for h in &self.tr.base_hard {
            if !evaluate(&self.base_index, self.domain, base, h, &[])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn first_violated(&self, ext: &World) -> Result<Option<&Formula>, OracleError> {
        for h in &self.hard {
            if !evaluate(&self.ext_index, self.domain, ext, h, &[])? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    fn outer_assignments(&self, step: &EliminationStep) -> Vec<Vec<usize>> {
        let k1 = step.outer_vars.len();
        let n = self.domain.len();
        let mut out = Vec::with_capacity(n.pow(k1 as u32));
        let mut digits = vec![0usize; k1];
        loop {
            out.push(digits.clone());
            let mut i = k1;
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

    /// Witness sets of one step block, as domain-position tuples, for every
    /// candidate value of the eliminated variable.
    fn block_witnesses(
        &self,
        ext: &World,
        step: &EliminationStep,
        outer: &[usize],
    ) -> Result<Vec<Vec<Vec<usize>>>, OracleError> {
        let outer_bindings: Vec<(String, String)> = step
            .outer_vars
            .iter()
            .zip(outer)
            .map(|(v, &p)| (v.clone(), self.domain.constant(p).to_string()))
            .collect();
        let mut out = Vec::with_capacity(self.domain.len());
        for c in 0..self.domain.len() {
            let tuples = witness_set(
                &self.ext_index,
                self.domain,
                ext,
                &step.psi,
                &outer_bindings,
                (&step.target_var, self.domain.constant(c)),
                &step.avg_vars,
            )?;
            out.push(
                tuples
                    .into_iter()
                    .map(|t| {
                        t.iter()
                            .map(|c| self.domain.position(c).expect("domain constant"))
                            .collect()
                    })
                    .collect(),
            );
        }
        Ok(out)
    }

    /// Fills one step block: the block order `leq_order` lists candidate
    /// values from least to greatest; the max marker goes to the greatest;
    /// the comparison map sends the i-th smallest witness (in the
    /// lexicographic order induced by `rank`) to the i-th smallest.
    fn fill_block(
        &self,
        ext: &mut World,
        step: &EliminationStep,
        outer: &[usize],
        witnesses: &[Vec<Vec<usize>>],
        leq_order: &[usize],
        rank: &[usize],
    ) -> Result<(), OracleError> {
        let leq_pos = invert(leq_order);
        let n = self.domain.len();
        let mut args: Vec<usize> = outer.to_vec();
        // leq atoms.
        for ci in 0..n {
            for cj in 0..n {
                if leq_pos[ci] <= leq_pos[cj] {
                    args.truncate(outer.len());
                    args.push(ci);
                    args.push(cj);
                    let idx = self.ext_index.encode_positions(&step.leq_pred, &args)?;
                    ext.set(idx, true);
                }
            }
        }
        // max marker on the top of the block order.
        let top = *leq_order.last().expect("nonempty domain");
        args.truncate(outer.len());
        args.push(top);
        let idx = self.ext_index.encode_positions(&step.max_pred, &args)?;
        ext.set(idx, true);
        // Comparison maps on comparable pairs.
        let by_rank = |t: &Vec<usize>| -> Vec<usize> { t.iter().map(|&p| rank[p]).collect() };
        for ci in 0..n {
            for cj in 0..n {
                if leq_pos[ci] > leq_pos[cj] {
                    continue;
                }
                let mut dom: Vec<&Vec<usize>> = witnesses[ci].iter().collect();
                let mut cod: Vec<&Vec<usize>> = witnesses[cj].iter().collect();
                dom.sort_by_key(|t| by_rank(t));
                cod.sort_by_key(|t| by_rank(t));
                for (t1, t2) in dom.iter().zip(&cod) {
                    args.truncate(outer.len());
                    args.push(ci);
                    args.push(cj);
                    args.extend(t1.iter());
                    args.extend(t2.iter());
                    let idx = self.ext_index.encode_positions(&step.fn_pred, &args)?;
                    ext.set(idx, true);
                }
            }
        }
        Ok(())
    }

    fn set_global_order(&self, ext: &mut World, rank: &[usize]) -> Result<(), OracleError> {
        let ord = self.tr.ord_pred.as_deref().ok_or(OracleError::WrongMode)?;
        let n = self.domain.len();
        for p in 0..n {
            for q in 0..n {
                if rank[p] <= rank[q] {
                    let idx = self.ext_index.encode_positions(ord, &[p, q])?;
                    ext.set(idx, true);
                }
            }
        }
        Ok(())
    }

    /// The unique extension of a base world for one choice of the global
    /// order. `order` lists domain positions from least to greatest. Blocks
    /// are ordered by witness count with ties following the global order; the
    /// comparison maps are the minimal order-preserving ones. The result is
    /// checked against every hard constraint.
    pub fn canonical_extension(&self, base: &World, order: &[usize]) -> Result<World, OracleError> {
        if self.tr.mode != TranslationMode::MarginalPreserving {
            return Err(OracleError::WrongMode);
        }
        if !self.base_feasible(base)? {
            return Err(OracleError::InfeasibleBase);
        }
        assert_eq!(order.len(), self.domain.len());
        let rank = invert(order);
        let mut ext = self.lift(base);
        if self.tr.ord_pred.is_some() {
            self.set_global_order(&mut ext, &rank)?;
        }
        for step in &self.tr.steps {
            // Witness sets are read from the world built so far: earlier
            // steps' predicates may occur in this step's matrix.
            let snapshot = ext.clone();
            for outer in self.outer_assignments(step) {
                let witnesses = self.block_witnesses(&snapshot, step, &outer)?;
                let mut cands: Vec<usize> = (0..self.domain.len()).collect();
                cands.sort_by_key(|&c| (witnesses[c].len(), rank[c]));
                self.fill_block(&mut ext, step, &outer, &witnesses, &cands, &rank)?;
            }
        }
        if let Some(violated) = self.first_violated(&ext)? {
            return Err(OracleError::ConstructionInvalid(violated.to_string()));
        }
        debug_assert_eq!(self.restrict(&ext), *base);
        Ok(ext)
    }

    /// All worlds over the extended vocabulary that restrict to `base` and
    /// satisfy the hard constraints, enumerated structurally: global orders
    /// (marginal mode) times per-block linear orders, with the forced max
    /// markers and minimal order-preserving comparison maps, each candidate
    /// model-checked. In map-only mode the comparison maps are not pinned by
    /// the constraints, so the enumeration returns one representative per
    /// block-order choice.
    pub fn structural_extensions(&self, base: &World) -> Result<Vec<World>, OracleError> {
        let per_order = self.structural_by_order(base)?;
        let mut set: BTreeSet<World> = BTreeSet::new();
        for (_, worlds) in per_order {
            set.extend(worlds);
        }
        Ok(set.into_iter().collect())
    }

    /// Valid structural extensions grouped by global-order choice. Map-only
    /// mode has no global order; everything lands in one group.
    pub fn structural_by_order(&self, base: &World) -> Result<ExtensionsByOrder, OracleError> {
        let n = self.domain.len();
        // A translation without elimination steps introduces no global
        // order; the only candidate extension is the world itself.
        let orders: Vec<Option<Vec<usize>>> = match self.tr.mode {
            TranslationMode::MarginalPreserving if self.tr.ord_pred.is_some() => {
                permutations(n).into_iter().map(Some).collect()
            }
            _ => vec![None],
        };
        let mut out = Vec::new();
        for order in orders {
            let identity: Vec<usize> = (0..n).collect();
            let rank = match &order {
                Some(o) => invert(o),
                None => identity,
            };
            let mut frontier = vec![self.lift(base)];
            if order.is_some() {
                for ext in &mut frontier {
                    self.set_global_order(ext, &rank)?;
                }
            }
            for step in &self.tr.steps {
                let mut next = Vec::new();
                for ext in &frontier {
                    // Block fills for this step do not affect its own witness
                    // sets, so they are computed against the incoming world.
                    let mut variants = vec![ext.clone()];
                    for outer in self.outer_assignments(step) {
                        let witnesses = self.block_witnesses(ext, step, &outer)?;
                        let mut grown = Vec::new();
                        for leq_order in permutations(n) {
                            // A block order is only viable when witness
                            // counts are nondecreasing along it.
                            let viable = leq_order
                                .windows(2)
                                .all(|w| witnesses[w[0]].len() <= witnesses[w[1]].len());
                            if !viable {
                                continue;
                            }
                            for v in &variants {
                                let mut e = v.clone();
                                self.fill_block(
                                    &mut e, step, &outer, &witnesses, &leq_order, &rank,
                                )?;
                                grown.push(e);
                            }
                        }
                        variants = grown;
                    }
                    next.extend(variants);
                }
                frontier = next;
            }
            let mut valid = Vec::new();
            for ext in frontier {
                if self.satisfies_hard(&ext)? {
                    valid.push(ext);
                }
            }
            valid.sort();
            valid.dedup();
            out.push((order, valid));
        }
        Ok(out)
    }

    /// The number of extensions every feasible base world must have: one per
    /// global order when an order predicate exists, otherwise exactly one.
    pub fn expected_extensions(&self) -> usize {
        if self.tr.ord_pred.is_some() {
            (1..=self.domain.len()).product()
        } else {
            1
        }
    }

    /// Counts the extensions of a base world in marginal-preserving mode,
    /// cross-checking the canonical per-order construction against the
    /// structural enumeration. Infeasible base worlds count zero.
    pub fn count_extensions(&self, base: &World) -> Result<ExtensionCount, OracleError> {
        if self.tr.mode != TranslationMode::MarginalPreserving {
            return Err(OracleError::WrongMode);
        }
        if !self.base_feasible(base)? {
            let structural = self.structural_extensions(base)?;
            return Ok(ExtensionCount {
                count: structural.len(),
                canonical_matches: structural.is_empty(),
                per_order_unique: structural.is_empty(),
            });
        }
        let n = self.domain.len();
        let mut canonical: BTreeSet<World> = BTreeSet::new();
        if self.tr.ord_pred.is_some() {
            for order in permutations(n) {
                canonical.insert(self.canonical_extension(base, &order)?);
            }
        } else {
            let identity: Vec<usize> = (0..n).collect();
            canonical.insert(self.canonical_extension(base, &identity)?);
        }
        let by_order = self.structural_by_order(base)?;
        let mut structural: BTreeSet<World> = BTreeSet::new();
        let mut per_order_unique = true;
        for (_, worlds) in &by_order {
            if worlds.len() != 1 {
                per_order_unique = false;
            }
            structural.extend(worlds.iter().cloned());
        }
        Ok(ExtensionCount {
            count: structural.len(),
            canonical_matches: canonical == structural,
            per_order_unique,
        })
    }

    /// Soft log-potential of an extension under the compiled model. Hard
    /// constraints are assumed to hold (enumerated extensions are checked).
    pub fn ext_potential(&self, ext: &World) -> Result<f64, OracleError> {
        let mut sum = 0.0;
        for (sentence, w) in self.tr.model.soft() {
            sum += w * sentence_statistic(&self.ext_index, self.domain, ext, sentence)?;
        }
        Ok(sum)
    }
}

fn invert(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0usize; order.len()];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    rank
}

/// Result of counting the extensions of one base world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionCount {
    pub count: usize,
    /// Canonical per-order constructions produce exactly the structural set.
    pub canonical_matches: bool,
    /// Every global-order choice admits exactly one valid extension. A
    /// violation would mean the tie-breaking constraints underdetermine the
    /// auxiliary predicates.
    pub per_order_unique: bool,
}

/// Report of the MAP-preservation check.
#[derive(Debug, Clone)]
pub struct MapReport {
    /// Canonical indices of the base argmax worlds.
    pub base_argmax: Vec<u64>,
    /// Canonical indices of the restrictions of the extended argmax worlds.
    pub translated_argmax_bases: Vec<u64>,
    pub n_extensions: usize,
}

impl MapReport {
    pub fn pass(&self) -> bool {
        self.base_argmax == self.translated_argmax_bases
    }
}

/// Compiles the model in map-only mode, enumerates extensions of every base
/// world, and checks that the MAP set of the compiled model restricts to
/// exactly the base MAP set.
pub fn verify_map_theorem(model: &Qmln, domain: &Domain) -> Result<MapReport, OracleError> {
    let base_map = map_worlds(model, domain)?;
    let base_argmax: Vec<u64> = base_map
        .worlds
        .iter()
        .map(|w| w.index().expect("enumerable base space"))
        .collect();

    let tr = translate(model, domain, TranslationMode::MapOnly)?;
    let space = ExtensionSpace::new(&tr, domain)?;
    let base_space = WorldSpace::with_cap(&tr.base_vocabulary, domain, FULL_ENUM_CAP)?;

    let mut all: Vec<(u64, f64)> = Vec::new();
    for base in base_space.iter() {
        let base_idx = base.index().expect("enumerable");
        for ext in space.structural_extensions(&base)? {
            all.push((base_idx, space.ext_potential(&ext)?));
        }
    }
    let best = all
        .iter()
        .map(|&(_, p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut bases: Vec<u64> = all
        .iter()
        .filter(|&&(_, p)| best - p <= crate::inference::MAP_TIE_TOLERANCE)
        .map(|&(b, _)| b)
        .collect();
    bases.sort_unstable();
    bases.dedup();
    Ok(MapReport {
        base_argmax,
        translated_argmax_bases: bases,
        n_extensions: all.len(),
    })
}

/// Report of the marginal-preservation check.
#[derive(Debug, Clone)]
pub struct MarginalReport {
    pub base_probability: f64,
    pub translated_probability: f64,
    /// Worst deviation of an extension's probability from base probability
    /// divided by `|domain|!`.
    pub max_scaling_deviation: f64,
    pub extensions_per_world: Vec<usize>,
}

impl MarginalReport {
    pub fn difference(&self) -> f64 {
        (self.base_probability - self.translated_probability).abs()
    }

    pub fn pass(&self) -> bool {
        self.difference() <= 1e-9 && self.max_scaling_deviation <= 1e-12
    }
}

/// Compiles the model in marginal-preserving mode and compares the
/// probability of a first-order query computed on the base distribution
/// against the compiled distribution over the enumerated extension space,
/// including the per-extension probability scaling by `1/|domain|!`.
pub fn verify_marginal_theorem(
    model: &Qmln,
    domain: &Domain,
    query: &Formula,
) -> Result<MarginalReport, OracleError> {
    let base_dist = fit_distribution(model, domain)?;
    let base_probability = marginal_prob(model, domain, query)?;

    let tr = translate(model, domain, TranslationMode::MarginalPreserving)?;
    let space = ExtensionSpace::new(&tr, domain)?;
    let base_space = WorldSpace::with_cap(&tr.base_vocabulary, domain, FULL_ENUM_CAP)?;

    // Enumerate every extension with its soft potential.
    let mut entries: Vec<(u64, World, f64)> = Vec::new();
    let mut extensions_per_world = Vec::with_capacity(base_space.len() as usize);
    for base in base_space.iter() {
        let base_idx = base.index().expect("enumerable");
        let exts = space.structural_extensions(&base)?;
        extensions_per_world.push(exts.len());
        for ext in exts {
            let p = space.ext_potential(&ext)?;
            entries.push((base_idx, ext, p));
        }
    }
    let mut lse = LogSumExp::new();
    for &(_, _, p) in &entries {
        lse.add(p);
    }
    let log_z = lse.value();
    if log_z == f64::NEG_INFINITY {
        return Err(OracleError::Inference(InferenceError::Infeasible));
    }

    let factorial: f64 = (1..=domain.len()).product::<usize>() as f64;
    let mut translated_probability = 0.0;
    let mut max_scaling_deviation = 0.0f64;
    for (base_idx, ext, pot) in &entries {
        let p_ext = (pot - log_z).exp();
        let p_base = base_dist.prob(*base_idx);
        max_scaling_deviation = max_scaling_deviation.max((p_ext - p_base / factorial).abs());
        if evaluate(space.ext_index(), domain, ext, query, &[])? {
            translated_probability += p_ext;
        }
    }
    Ok(MarginalReport {
        base_probability,
        translated_probability,
        max_scaling_deviation,
        extensions_per_world,
    })
}

/// Report of the per-world extension-count check.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub n_worlds: usize,
    /// Expected count for every feasible world (`|domain|!` when the
    /// compilation introduced a global order, 1 otherwise); infeasible
    /// worlds must count zero.
    pub expected: usize,
    pub counts: Vec<usize>,
    pub feasible: Vec<bool>,
    pub canonical_matches: bool,
    pub per_order_unique: bool,
}

impl CountReport {
    pub fn n_infeasible(&self) -> usize {
        self.feasible.iter().filter(|&&f| !f).count()
    }

    pub fn pass(&self) -> bool {
        self.canonical_matches
            && self.per_order_unique
            && self
                .counts
                .iter()
                .zip(&self.feasible)
                .all(|(&c, &f)| c == if f { self.expected } else { 0 })
    }
}

/// Counts extensions of every base world under the marginal-preserving
/// compilation and checks that every feasible world has exactly `|domain|!`
/// (worlds excluded by the input's hard constraints have none).
pub fn verify_count(model: &Qmln, domain: &Domain) -> Result<CountReport, OracleError> {
    let tr = translate(model, domain, TranslationMode::MarginalPreserving)?;
    let space = ExtensionSpace::new(&tr, domain)?;
    let base_space = WorldSpace::with_cap(&tr.base_vocabulary, domain, FULL_ENUM_CAP)?;
    let expected = space.expected_extensions();
    let mut counts = Vec::with_capacity(base_space.len() as usize);
    let mut feasible = Vec::with_capacity(base_space.len() as usize);
    let mut canonical_matches = true;
    let mut per_order_unique = true;
    for base in base_space.iter() {
        let c = space.count_extensions(&base)?;
        counts.push(c.count);
        feasible.push(space.base_feasible(&base)?);
        canonical_matches &= c.canonical_matches;
        per_order_unique &= c.per_order_unique;
    }
    Ok(CountReport {
        n_worlds: counts.len(),
        expected,
        counts,
        feasible,
        canonical_matches,
        per_order_unique,
    })
}

/// Report of the per-extension statistic scaling check.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub checks: usize,
    pub max_deviation: f64,
}

impl ScalingReport {
    pub fn pass(&self) -> bool {
        self.max_deviation <= 1e-12
    }
}

/// For every base world and every global order, verifies on the canonical
/// extension that each compiled soft sentence's statistic equals the
/// original statistic divided by `|domain|` once per elimination step.
pub fn verify_scaling(model: &Qmln, domain: &Domain) -> Result<ScalingReport, OracleError> {
    let tr = translate(model, domain, TranslationMode::MarginalPreserving)?;
    let space = ExtensionSpace::new(&tr, domain)?;
    let base_space = WorldSpace::with_cap(&tr.base_vocabulary, domain, FULL_ENUM_CAP)?;
    let mut checks = 0usize;
    let mut max_deviation = 0.0f64;
    for base in base_space.iter() {
        if !space.base_feasible(&base)? {
            continue;
        }
        for order in permutations(domain.len()) {
            let ext = space.canonical_extension(&base, &order)?;
            for (input_idx, ws) in model.sentences().iter().enumerate() {
                if ws.weight.is_hard() {
                    continue;
                }
                let steps = tr.steps_for(input_idx).len();
                let Some(out) = tr.translated_soft(input_idx) else {
                    continue;
                };
                let base_stat =
                    sentence_statistic(space.base_index(), domain, &base, &ws.sentence)?;
                let ext_stat = sentence_statistic(space.ext_index(), domain, &ext, &out.sentence)?;
                let expected = base_stat / (domain.len() as f64).powi(steps as i32);
                max_deviation = max_deviation.max((ext_stat - expected).abs());
                checks += 1;
            }
        }
    }
    Ok(ScalingReport {
        checks,
        max_deviation,
    })
}

/// Expected statistic of a quantified query computed through the compiler:
/// the model and the query are compiled together in marginal-preserving
/// mode, the pure-`avg` residual query is averaged over the enumerated
/// extension space, and the affine statistic relation maps the value back.
/// Must agree with direct evaluation.
pub fn translated_marginal_query(
    model: &Qmln,
    domain: &Domain,
    query: &QuantifiedSentence,
) -> Result<f64, OracleError> {
    let (tr, tq) = translate_with_query(model, domain, TranslationMode::MarginalPreserving, query)?;
    let space = ExtensionSpace::new(&tr, domain)?;
    let base_space = WorldSpace::with_cap(&tr.base_vocabulary, domain, FULL_ENUM_CAP)?;

    let mut entries: Vec<(World, f64)> = Vec::new();
    for base in base_space.iter() {
        for ext in space.structural_extensions(&base)? {
            let p = space.ext_potential(&ext)?;
            entries.push((ext, p));
        }
    }
    let mut lse = LogSumExp::new();
    for &(_, p) in &entries {
        lse.add(p);
    }
    let log_z = lse.value();
    if log_z == f64::NEG_INFINITY {
        return Err(OracleError::Inference(InferenceError::Infeasible));
    }
    let mut residual = 0.0;
    for (ext, pot) in &entries {
        let p = (pot - log_z).exp();
        residual += p * sentence_statistic(space.ext_index(), domain, ext, &tq.sentence)?;
    }
    Ok(tq.scale * residual + tq.offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_model;
    use crate::worlds::{parse_world, print_world};

    fn example() -> (Qmln, Domain) {
        parse_model("domain = {a,b}\npredicate knows/2\n2.0 :: exists x avg y : knows(x,y)\n")
            .unwrap()
    }

    #[test]
    fn canonical_extension_marks_the_highest_out_degree_element() {
        let (model, domain) = example();
        let tr = translate(&model, &domain, TranslationMode::MarginalPreserving).unwrap();
        let space = ExtensionSpace::new(&tr, &domain).unwrap();
        let base = parse_world(space.base_index(), &domain, "{knows(a,a), knows(a,b)}").unwrap();
        let ext = space.canonical_extension(&base, &[0, 1]).unwrap();
        let printed = print_world(space.ext_index(), &domain, &ext);
        assert!(printed.contains("__max_0(a)"), "{printed}");
        assert!(!printed.contains("__max_0(b)"), "{printed}");
        // The compiled sentence's statistic halves the original.
        let out = tr.translated_soft(0).unwrap();
        let got = sentence_statistic(space.ext_index(), &domain, &ext, &out.sentence).unwrap();
        assert_eq!(got, 0.5);
        assert_eq!(space.restrict(&ext), base);
    }

    #[test]
    fn canonical_extension_breaks_all_ties_by_the_global_order() {
        let (model, domain) = example();
        let tr = translate(&model, &domain, TranslationMode::MarginalPreserving).unwrap();
        let space = ExtensionSpace::new(&tr, &domain).unwrap();
        let empty = parse_world(space.base_index(), &domain, "{}").unwrap();
        // All witness sets are empty; the max marker follows the order's top.
        let ext = space.canonical_extension(&empty, &[0, 1]).unwrap();
        let printed = print_world(space.ext_index(), &domain, &ext);
        assert!(printed.contains("__max_0(b)"), "{printed}");
        let ext = space.canonical_extension(&empty, &[1, 0]).unwrap();
        let printed = print_world(space.ext_index(), &domain, &ext);
        assert!(printed.contains("__max_0(a)"), "{printed}");
    }

    #[test]
    fn different_orders_give_different_extensions_of_the_same_world() {
        let (model, domain) = example();
        let tr = translate(&model, &domain, TranslationMode::MarginalPreserving).unwrap();
        let space = ExtensionSpace::new(&tr, &domain).unwrap();
        let base = parse_world(space.base_index(), &domain, "{knows(a,b)}").unwrap();
        let e1 = space.canonical_extension(&base, &[0, 1]).unwrap();
        let e2 = space.canonical_extension(&base, &[1, 0]).unwrap();
        assert_ne!(e1, e2);
        assert_eq!(space.restrict(&e1), base);
        assert_eq!(space.restrict(&e2), base);
    }

    #[test]
    fn every_base_world_has_factorial_many_extensions() {
        let (model, domain) = example();
        let report = verify_count(&model, &domain).unwrap();
        assert_eq!(report.n_worlds, 16);
        assert_eq!(report.expected, 2);
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn map_set_is_preserved_by_compilation() {
        let (model, domain) = example();
        let report = verify_map_theorem(&model, &domain).unwrap();
        assert!(report.pass(), "{report:?}");
        // The argmax worlds are exactly those with a full out-neighborhood
        // row: 4 + 4 - 1 of the 16 worlds.
        assert_eq!(report.base_argmax.len(), 7);
    }

    #[test]
    fn marginal_probability_is_preserved_by_compilation() {
        let (model, domain) = example();
        let index = AtomIndex::new(model.vocabulary(), &domain).unwrap();
        let query = crate::syntax::parse_sentence(": knows(a,b)", model.vocabulary(), &domain)
            .unwrap()
            .strip_avg();
        let _ = index;
        let report = verify_marginal_theorem(&model, &domain, &query).unwrap();
        assert!(report.pass(), "{report:?}");
        assert!(report.extensions_per_world.iter().all(|&c| c == 2));
    }

    #[test]
    fn statistic_scaling_holds_on_every_canonical_extension() {
        let (model, domain) = example();
        let report = verify_scaling(&model, &domain).unwrap();
        assert_eq!(report.checks, 16 * 2);
        assert!(report.pass(), "max deviation {}", report.max_deviation);
    }

    #[test]
    fn translated_query_pipeline_matches_direct_evaluation() {
        let (model, domain) = example();
        let query = crate::syntax::parse_sentence(
            "forall x avg y : !knows(x,y)",
            model.vocabulary(),
            &domain,
        )
        .unwrap();
        let direct = crate::inference::marginal_query(&model, &domain, &query).unwrap();
        let piped = translated_marginal_query(&model, &domain, &query).unwrap();
        assert!(
            (direct - piped).abs() <= 1e-9,
            "direct {direct} vs piped {piped}"
        );
    }

    #[test]
    fn every_extension_has_a_unique_maximal_marker() {
        // In every valid extension, each block has exactly one max atom and
        // its witness set is at least as large as every candidate's.
        let (model, domain) = example();
        for mode in [
            TranslationMode::MapOnly,
            TranslationMode::MarginalPreserving,
        ] {
            let tr = translate(&model, &domain, mode).unwrap();
            let space = ExtensionSpace::new(&tr, &domain).unwrap();
            let basis = WorldSpace::new(&tr.base_vocabulary, &domain).unwrap();
            for base in basis.iter() {
                for ext in space.structural_extensions(&base).unwrap() {
                    for step in &tr.steps {
                        for outer in space.outer_assignments(step) {
                            let witnesses = space.block_witnesses(&ext, step, &outer).unwrap();
                            let mut markers = Vec::new();
                            for c in 0..domain.len() {
                                let mut args = outer.clone();
                                args.push(c);
                                let idx = space
                                    .ext_index()
                                    .encode_positions(&step.max_pred, &args)
                                    .unwrap();
                                if ext.get(idx) {
                                    markers.push(c);
                                }
                            }
                            assert_eq!(markers.len(), 1, "mode {mode:?}");
                            let best = witnesses[markers[0]].len();
                            for w in &witnesses {
                                assert!(w.len() <= best);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn flipping_any_auxiliary_atom_breaks_a_constraint() {
        // Local rigidity of valid extensions: the constraints pin every
        // auxiliary atom, so flipping one always violates something.
        let (model, domain) = example();
        let tr = translate(&model, &domain, TranslationMode::MarginalPreserving).unwrap();
        let space = ExtensionSpace::new(&tr, &domain).unwrap();
        let basis = WorldSpace::new(&tr.base_vocabulary, &domain).unwrap();
        let n_base = space.base_index().len();
        for base in basis.iter() {
            for ext in space.structural_extensions(&base).unwrap() {
                for atom in n_base..space.ext_index().len() {
                    let mut flipped = ext.clone();
                    flipped.set(atom, !flipped.get(atom));
                    assert!(
                        !space.satisfies_hard(&flipped).unwrap(),
                        "flipping atom {atom} kept all constraints satisfied"
                    );
                }
            }
        }
    }

    #[test]
    fn permutations_are_exhaustive_and_lexicographic() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[0], vec![0, 1, 2]);
        assert_eq!(permutations(3)[5], vec![2, 1, 0]);
    }
}
