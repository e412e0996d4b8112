//! Finite domains, ground-atom indexing, possible worlds, world enumeration,
//! and first-order model checking.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Atom, Formula, Term, Vocabulary};

/// Default cap on the number of ground atoms for enumerable world spaces.
pub const DEFAULT_ATOM_CAP: usize = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("duplicate domain constant `{0}`")]
    DuplicateConstant(String),
    #[error("constant `{0}` is not in the domain")]
    UnknownConstant(String),
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("predicate `{0}` is not declared")]
    UndeclaredPredicate(String),
    #[error("predicate `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("atom argument `{0}` is not a domain constant (worlds must be ground)")]
    NotGround(String),
    #[error("world space too large: {atoms} ground atoms exceeds the cap of {cap}")]
    SpaceTooLarge { atoms: usize, cap: usize },
    #[error("ground-atom count overflows")]
    AtomCountOverflow,
    #[error("world has {got} atoms, expected {expected}")]
    WorldLengthMismatch { expected: usize, got: usize },
    #[error("world syntax error at offset {offset}: {message}")]
    WorldSyntax { offset: usize, message: String },
}

/// An ordered set of distinct constant names. The order is canonical: it
/// drives atom indexing, world serialization, and tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    constants: Vec<String>,
    positions: HashMap<String, usize>,
}

impl Domain {
    pub fn new(constants: Vec<String>) -> Result<Domain, WorldError> {
        if constants.is_empty() {
            return Err(WorldError::EmptyDomain);
        }
        let mut positions = HashMap::new();
        for (i, c) in constants.iter().enumerate() {
            if positions.insert(c.clone(), i).is_some() {
                return Err(WorldError::DuplicateConstant(c.clone()));
            }
        }
        Ok(Domain {
            constants,
            positions,
        })
    }

    /// Domain of generated constants `e0..e(n-1)`.
    pub fn generated(n: usize) -> Result<Domain, WorldError> {
        Domain::new((0..n).map(|i| format!("e{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.constants.iter().map(|c| c.as_str())
    }

    pub fn constant(&self, i: usize) -> &str {
        &self.constants[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.positions.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.positions.contains_key(name)
    }
}

/// A fully ground atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

#[derive(Debug, Clone)]
struct PredicateBlock {
    name: String,
    arity: usize,
    offset: usize,
    size: usize,
}

/// Bijection between ground atoms and `0..n_atoms`. Predicates are laid out
/// in declaration order; argument tuples in mixed-radix order over the
/// canonical domain order, most significant digit first.
#[derive(Debug, Clone)]
pub struct AtomIndex {
    blocks: Vec<PredicateBlock>,
    by_name: HashMap<String, usize>,
    domain_size: usize,
    n_atoms: usize,
}

impl AtomIndex {
    pub fn new(vocabulary: &Vocabulary, domain: &Domain) -> Result<AtomIndex, WorldError> {
        let mut blocks = Vec::new();
        let mut by_name = HashMap::new();
        let mut offset: usize = 0;
        for (name, arity) in vocabulary.iter() {
            let size = domain
                .len()
                .checked_pow(u32::try_from(arity).map_err(|_| WorldError::AtomCountOverflow)?)
                .ok_or(WorldError::AtomCountOverflow)?;
            by_name.insert(name.to_string(), blocks.len());
            blocks.push(PredicateBlock {
                name: name.to_string(),
                arity,
                offset,
                size,
            });
            offset = offset
                .checked_add(size)
                .ok_or(WorldError::AtomCountOverflow)?;
        }
        Ok(AtomIndex {
            blocks,
            by_name,
            domain_size: domain.len(),
            n_atoms: offset,
        })
    }

    /// Total number of ground atoms.
    pub fn len(&self) -> usize {
        self.n_atoms
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.by_name.get(predicate).map(|&i| self.blocks[i].arity)
    }

    pub fn is_empty(&self) -> bool {
        self.n_atoms == 0
    }

    /// Index of a ground atom given the predicate and argument positions in
    /// the canonical domain order.
    pub fn encode_positions(&self, predicate: &str, args: &[usize]) -> Result<usize, WorldError> {
        let block = self
            .by_name
            .get(predicate)
            .map(|&i| &self.blocks[i])
            .ok_or_else(|| WorldError::UndeclaredPredicate(predicate.to_string()))?;
        if args.len() != block.arity {
            return Err(WorldError::ArityMismatch {
                name: predicate.to_string(),
                expected: block.arity,
                got: args.len(),
            });
        }
        let mut idx = 0usize;
        for &a in args {
            debug_assert!(a < self.domain_size);
            idx = idx * self.domain_size + a;
        }
        Ok(block.offset + idx)
    }

    pub fn encode(&self, atom: &GroundAtom, domain: &Domain) -> Result<usize, WorldError> {
        let mut positions = Vec::with_capacity(atom.args.len());
        for a in &atom.args {
            positions.push(
                domain
                    .position(a)
                    .ok_or_else(|| WorldError::UnknownConstant(a.clone()))?,
            );
        }
        self.encode_positions(&atom.predicate, &positions)
    }

    pub fn decode(&self, index: usize, domain: &Domain) -> GroundAtom {
        assert!(index < self.n_atoms);
        let block = self
            .blocks
            .iter()
            .rev()
            .find(|b| b.offset <= index)
            .expect("index within some block");
        let mut rest = index - block.offset;
        let mut args = vec![0usize; block.arity];
        for slot in args.iter_mut().rev() {
            *slot = rest % self.domain_size;
            rest /= self.domain_size;
        }
        GroundAtom {
            predicate: block.name.clone(),
            args: args
                .into_iter()
                .map(|p| domain.constant(p).to_string())
                .collect(),
        }
    }

    /// Number of atoms belonging to the leading predicates shared with
    /// `other`; used for restriction between a base index and an extension.
    pub fn shared_prefix_len(&self, other: &AtomIndex) -> usize {
        let mut atoms = 0;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            if a.name != b.name || a.arity != b.arity {
                break;
            }
            atoms += a.size;
        }
        atoms
    }
}

/// A possible world: one bit per ground atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct World {
    len: usize,
    words: Vec<u64>,
}

impl World {
    pub fn empty(len: usize) -> World {
        World {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// World whose bit pattern, read as an integer with atom 0 least
    /// significant, equals `index`. Requires at most 63 atoms.
    pub fn from_index(index: u64, len: usize) -> World {
        assert!(len <= 63, "index-addressable worlds need at most 63 atoms");
        assert!(len == 63 || index < (1u64 << len));
        let mut w = World::empty(len);
        if !w.words.is_empty() {
            w.words[0] = index;
        }
        w
    }

    /// The bit pattern as an integer, when it fits in a u64.
    pub fn index(&self) -> Option<u64> {
        if self.len <= 63 {
            Some(self.words.first().copied().unwrap_or(0))
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_true(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Copies the first `n` atoms into a fresh world of length `new_len`.
    pub fn resized(&self, n: usize, new_len: usize) -> World {
        assert!(n <= self.len && n <= new_len);
        let mut out = World::empty(new_len);
        for i in 0..n {
            if self.get(i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn truncated(&self, n: usize) -> World {
        self.resized(n, n)
    }
}

impl PartialOrd for World {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for World {
    /// Bit-pattern-as-integer order (for equal lengths), then by length.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

/// The full space of worlds over a vocabulary and domain, enumerable in
/// ascending bit-pattern order.
#[derive(Debug, Clone)]
pub struct WorldSpace {
    index: AtomIndex,
    n_atoms: usize,
}

impl WorldSpace {
    pub fn new(vocabulary: &Vocabulary, domain: &Domain) -> Result<WorldSpace, WorldError> {
        WorldSpace::with_cap(vocabulary, domain, DEFAULT_ATOM_CAP)
    }

    pub fn with_cap(
        vocabulary: &Vocabulary,
        domain: &Domain,
        cap: usize,
    ) -> Result<WorldSpace, WorldError> {
        let index = AtomIndex::new(vocabulary, domain)?;
        let n_atoms = index.len();
        if n_atoms > cap {
            return Err(WorldError::SpaceTooLarge {
                atoms: n_atoms,
                cap,
            });
        }
        Ok(WorldSpace { index, n_atoms })
    }

    pub fn atom_index(&self) -> &AtomIndex {
        &self.index
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Number of worlds, `2^n_atoms`.
    pub fn len(&self) -> u64 {
        1u64 << self.n_atoms
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn world(&self, index: u64) -> World {
        World::from_index(index, self.n_atoms)
    }

    pub fn iter(&self) -> impl Iterator<Item = World> + '_ {
        (0..self.len()).map(|i| self.world(i))
    }
}

/// Variable environment for evaluation: variable name to constant name.
pub type Env = Vec<(String, String)>;

fn lookup<'a>(env: &'a [(String, String)], var: &str) -> Option<&'a str> {
    env.iter()
        .rev()
        .find(|(v, _)| v == var)
        .map(|(_, c)| c.as_str())
}

fn resolve_term<'a>(
    term: &'a Term,
    env: &'a [(String, String)],
    domain: &Domain,
) -> Result<&'a str, WorldError> {
    let name = match term {
        Term::Var(v) => lookup(env, v).ok_or_else(|| WorldError::UnboundVariable(v.clone()))?,
        Term::Const(c) => c.as_str(),
    };
    if !domain.contains(name) {
        return Err(WorldError::UnknownConstant(name.to_string()));
    }
    Ok(name)
}

/// Tarskian satisfaction of a formula in a world, under an environment that
/// binds all free variables. Equality means identity of constants; inner
/// quantifiers range over the domain.
pub fn evaluate(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    formula: &Formula,
    env: &[(String, String)],
) -> Result<bool, WorldError> {
    let mut env: Env = env.to_vec();
    eval_rec(index, domain, world, formula, &mut env)
}

fn eval_rec(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    formula: &Formula,
    env: &mut Env,
) -> Result<bool, WorldError> {
    match formula {
        Formula::Atom(Atom::Pred { name, args }) => {
            let mut positions = Vec::with_capacity(args.len());
            for t in args {
                let c = resolve_term(t, env, domain)?;
                positions.push(domain.position(c).expect("checked by resolve_term"));
            }
            Ok(world.get(index.encode_positions(name, &positions)?))
        }
        Formula::Atom(Atom::Equal(l, r)) => {
            let a = resolve_term(l, env, domain)?;
            let b = resolve_term(r, env, domain)?;
            Ok(a == b)
        }
        Formula::Not(f) => Ok(!eval_rec(index, domain, world, f, env)?),
        Formula::And(a, b) => {
            Ok(eval_rec(index, domain, world, a, env)? && eval_rec(index, domain, world, b, env)?)
        }
        Formula::Or(a, b) => {
            Ok(eval_rec(index, domain, world, a, env)? || eval_rec(index, domain, world, b, env)?)
        }
        Formula::Implies(a, b) => {
            Ok(!eval_rec(index, domain, world, a, env)? || eval_rec(index, domain, world, b, env)?)
        }
        Formula::Forall(v, f) => {
            for i in 0..domain.len() {
                env.push((v.clone(), domain.constant(i).to_string()));
                let holds = eval_rec(index, domain, world, f, env)?;
                env.pop();
                if !holds {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(v, f) => {
            for i in 0..domain.len() {
                env.push((v.clone(), domain.constant(i).to_string()));
                let holds = eval_rec(index, domain, world, f, env)?;
                env.pop();
                if holds {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Number of substitutions of the free variables of `formula` by domain
/// elements under which the world satisfies the formula. Substitutions are
/// counted, not distinct ground formulas; a closed formula counts 1 or 0.
pub fn ground_true_count(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    formula: &Formula,
) -> Result<u64, WorldError> {
    let free = formula.free_vars();
    let mut env: Env = free.iter().map(|v| (v.clone(), String::new())).collect();
    let mut count = 0u64;
    let n = domain.len();
    let k = free.len();
    let mut digits = vec![0usize; k];
    loop {
        for (slot, &d) in env.iter_mut().zip(&digits) {
            slot.1 = domain.constant(d).to_string();
        }
        if eval_rec(index, domain, world, formula, &mut env)? {
            count += 1;
        }
        // Advance mixed-radix counter, most significant digit first.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(count);
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

/// Parses a world of the form `{atom, atom, ...}`; atoms must be ground.
pub fn parse_world(index: &AtomIndex, domain: &Domain, text: &str) -> Result<World, WorldError> {
    let atoms = crate::syntax::parse_ground_atoms(text)
        .map_err(|(offset, message)| WorldError::WorldSyntax { offset, message })?;
    let mut world = World::empty(index.len());
    for atom in atoms {
        for arg in &atom.args {
            if !domain.contains(arg) {
                return Err(WorldError::NotGround(arg.clone()));
            }
        }
        let i = index.encode(&atom, domain)?;
        world.set(i, true);
    }
    Ok(world)
}

/// Prints a world as `{atom, atom, ...}` with atoms in index order.
pub fn print_world(index: &AtomIndex, domain: &Domain, world: &World) -> String {
    assert_eq!(world.len(), index.len());
    let mut parts = Vec::new();
    for i in 0..index.len() {
        if world.get(i) {
            parts.push(index.decode(i, domain).to_string());
        }
    }
    format!("{{{}}}", parts.join(", "))
}
