//! Sentence statistics: the degree in [0, 1] to which a quantified sentence
//! holds in a world. `forall` takes the minimum over the domain, `exists` the
//! maximum, and `avg` the uniform mean; an empty prefix is the satisfaction
//! indicator of the matrix.

use thiserror::Error;

use crate::syntax::{Atom, Formula, QuantifiedSentence, Quantifier, QuantifierKind, Term};
use crate::worlds::{evaluate, AtomIndex, Domain, World, WorldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatisticError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("predicate `{0}` is not binary")]
    NotBinary(String),
}

/// Computes the statistic of a closed quantified sentence in a world.
///
/// The prefix is consumed left to right; each quantifier binds its variable
/// to every domain element and the sub-statistics are combined by min, max,
/// or mean according to the kind. Means are computed as an exact sum divided
/// once by the domain size.
pub fn sentence_statistic(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    sentence: &QuantifiedSentence,
) -> Result<f64, StatisticError> {
    let mut env = Vec::with_capacity(sentence.prefix().len());
    let v = stat_rec(
        index,
        domain,
        world,
        sentence.prefix(),
        sentence.matrix(),
        &mut env,
    )?;
    debug_assert!((0.0..=1.0).contains(&v));
    Ok(v)
}

fn stat_rec(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    prefix: &[Quantifier],
    matrix: &Formula,
    env: &mut Vec<(String, String)>,
) -> Result<f64, StatisticError> {
    let Some(q) = prefix.first() else {
        let holds = evaluate(index, domain, world, matrix, env)?;
        return Ok(if holds { 1.0 } else { 0.0 });
    };
    let rest = &prefix[1..];
    match q.kind {
        QuantifierKind::Forall => {
            let mut acc = f64::INFINITY;
            for i in 0..domain.len() {
                env.push((q.var.clone(), domain.constant(i).to_string()));
                let v = stat_rec(index, domain, world, rest, matrix, env)?;
                env.pop();
                if v < acc {
                    acc = v;
                }
            }
            Ok(acc)
        }
        QuantifierKind::Exists => {
            let mut acc = f64::NEG_INFINITY;
            for i in 0..domain.len() {
                env.push((q.var.clone(), domain.constant(i).to_string()));
                let v = stat_rec(index, domain, world, rest, matrix, env)?;
                env.pop();
                if v > acc {
                    acc = v;
                }
            }
            Ok(acc)
        }
        QuantifierKind::Avg => {
            let mut sum = 0.0;
            for i in 0..domain.len() {
                env.push((q.var.clone(), domain.constant(i).to_string()));
                sum += stat_rec(index, domain, world, rest, matrix, env)?;
                env.pop();
            }
            Ok(sum / domain.len() as f64)
        }
    }
}

/// Classical satisfaction of a sentence: the statistic equals 1 exactly when
/// the world models the sentence with every `avg` read as `forall`.
pub fn check_models(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    sentence: &QuantifiedSentence,
) -> Result<bool, StatisticError> {
    Ok(evaluate(index, domain, world, &sentence.strip_avg(), &[])?)
}

/// The statistic of `exists x avg y : R(x,y)` for a binary predicate R: the
/// maximum out-degree in the world, as a fraction of the domain size.
pub fn max_out_degree(
    index: &AtomIndex,
    domain: &Domain,
    world: &World,
    predicate: &str,
) -> Result<f64, StatisticError> {
    match index.arity(predicate) {
        Some(2) => {}
        Some(_) => return Err(StatisticError::NotBinary(predicate.to_string())),
        None => {
            return Err(StatisticError::World(WorldError::UndeclaredPredicate(
                predicate.to_string(),
            )))
        }
    }
    let sentence = QuantifiedSentence::new(
        vec![
            Quantifier::new(QuantifierKind::Exists, "x"),
            Quantifier::new(QuantifierKind::Avg, "y"),
        ],
        Formula::Atom(Atom::Pred {
            name: predicate.to_string(),
            args: vec![Term::Var("x".into()), Term::Var("y".into())],
        }),
    )
    .expect("well-formed by construction");
    sentence_statistic(index, domain, world, &sentence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::substitution_statistic;
    use crate::syntax::{parse_model, parse_sentence, Qmln};
    use crate::worlds::{parse_world, AtomIndex, WorldSpace};

    fn knows_setup() -> (Qmln, Domain, AtomIndex) {
        let (model, domain) = parse_model("domain = {a,b}\npredicate knows/2\n").unwrap();
        let index = AtomIndex::new(model.vocabulary(), &domain).unwrap();
        (model, domain, index)
    }

    fn stat(text: &str, world: &str) -> f64 {
        let (model, domain, index) = knows_setup();
        let s = parse_sentence(text, model.vocabulary(), &domain).unwrap();
        let w = parse_world(&index, &domain, world).unwrap();
        sentence_statistic(&index, &domain, &w, &s).unwrap()
    }

    #[test]
    fn influencer_statistic_on_two_element_domain() {
        // Frozen values, confirmed by the substitution-based reference below.
        assert_eq!(
            stat("exists x avg y : knows(x,y)", "{knows(a,a), knows(a,b)}"),
            1.0
        );
        assert_eq!(stat("exists x avg y : knows(x,y)", "{}"), 0.0);
        assert_eq!(stat("exists x avg y : knows(x,y)", "{knows(a,b)}"), 0.5);
        assert_eq!(
            stat("forall x avg y : !knows(x,y)", "{knows(a,a), knows(a,b)}"),
            0.0
        );
    }

    #[test]
    fn recursive_and_substitution_statistics_agree_bit_for_bit() {
        let (model, domain, index) = knows_setup();
        let space = WorldSpace::new(model.vocabulary(), &domain).unwrap();
        let sentences = [
            "exists x avg y : knows(x,y)",
            "forall x avg y : !knows(x,y)",
            "avg x avg y : knows(x,y) => knows(y,x)",
            "avg x : (exists y : knows(x,y))",
            "avg x exists y : knows(x,y) & x != y",
            ": knows(a,b)",
        ];
        for text in sentences {
            let s = parse_sentence(text, model.vocabulary(), &domain).unwrap();
            for w in space.iter() {
                let fast = sentence_statistic(&index, &domain, &w, &s).unwrap();
                let literal = substitution_statistic(&index, &domain, &w, &s).unwrap();
                assert_eq!(fast.to_bits(), literal.to_bits(), "{text}");
            }
        }
    }

    #[test]
    fn negation_complements_the_statistic() {
        let (model, domain, index) = knows_setup();
        let space = WorldSpace::new(model.vocabulary(), &domain).unwrap();
        for text in [
            "exists x avg y : knows(x,y)",
            "avg x forall y : knows(x,y) | knows(y,x)",
            "avg x avg y : knows(x,y)",
        ] {
            let s = parse_sentence(text, model.vocabulary(), &domain).unwrap();
            let n = s.negated();
            for w in space.iter() {
                let q = sentence_statistic(&index, &domain, &w, &s).unwrap();
                let nq = sentence_statistic(&index, &domain, &w, &n).unwrap();
                assert!((nq - (1.0 - q)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn statistic_is_one_iff_classical_reading_holds() {
        let (model, domain, index) = knows_setup();
        let space = WorldSpace::new(model.vocabulary(), &domain).unwrap();
        let s = parse_sentence("exists x avg y : knows(x,y)", model.vocabulary(), &domain).unwrap();
        for w in space.iter() {
            let q = sentence_statistic(&index, &domain, &w, &s).unwrap();
            let models = check_models(&index, &domain, &w, &s).unwrap();
            assert_eq!(q == 1.0, models);
        }
    }

    #[test]
    fn avg_only_statistics_are_multiples_of_the_grid() {
        let (model, domain, index) = knows_setup();
        let space = WorldSpace::new(model.vocabulary(), &domain).unwrap();
        let s = parse_sentence("avg x avg y : knows(x,y)", model.vocabulary(), &domain).unwrap();
        let grid = (domain.len() as f64).powi(2);
        for w in space.iter() {
            let q = sentence_statistic(&index, &domain, &w, &s).unwrap();
            assert!((q * grid - (q * grid).round()).abs() <= 1e-12);
        }
    }

    #[test]
    fn max_out_degree_matches_graph_reading() {
        let (model, domain) =
            parse_model("domain = {a,b,c}\npredicate r/2\npredicate s/1\n").unwrap();
        let index = AtomIndex::new(model.vocabulary(), &domain).unwrap();
        let star = parse_world(&index, &domain, "{r(a,a), r(a,b), r(a,c)}").unwrap();
        assert_eq!(max_out_degree(&index, &domain, &star, "r").unwrap(), 1.0);
        let empty = parse_world(&index, &domain, "{}").unwrap();
        assert_eq!(max_out_degree(&index, &domain, &empty, "r").unwrap(), 0.0);
        let single = parse_world(&index, &domain, "{r(a,b)}").unwrap();
        let got = max_out_degree(&index, &domain, &single, "r").unwrap();
        assert!((got - 1.0 / 3.0).abs() <= 1e-15);
        assert_eq!(
            max_out_degree(&index, &domain, &empty, "s").unwrap_err(),
            StatisticError::NotBinary("s".into())
        );
    }
}
