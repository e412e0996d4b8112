//! Exact reasoning for Markov logic networks with statistical quantifiers.
//!
//! A model is a set of weighted quantified sentences over a finite domain.
//! Prefix quantifiers come in three kinds: `forall` (minimum over the
//! domain), `exists` (maximum), and `avg` (uniform average), so a sentence
//! holds in a world to a degree in [0, 1] rather than just true/false. The
//! crate provides:
//!
//! - the modeling language ([`syntax`]): parser, printer, and symbolic
//!   operations on sentences;
//! - possible worlds and model checking over finite domains ([`worlds`]);
//! - sentence statistics ([`statistics`]);
//! - exact distribution fitting, MAP, and marginal inference by world
//!   enumeration ([`inference`]);
//! - a compiler that eliminates classical quantifiers in favor of fresh
//!   predicates and hard constraints, reducing any model to one whose soft
//!   sentences carry pure-`avg` prefixes ([`translate`]);
//! - a max-entropy solver that fits weights to expected-statistic
//!   constraints via the concave dual ([`maxent`]);
//! - brute-force reference implementations used by the test suite and the
//!   `verify` subcommand ([`oracle`]);
//! - seeded generators for randomized tests ([`gen`]);
//! - the command-line interface ([`cli`]).

pub mod cli;
pub mod gen;
pub mod inference;
pub mod maxent;
pub mod oracle;
pub mod statistics;
pub mod syntax;
pub mod translate;
pub mod worlds;
