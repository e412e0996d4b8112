//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them). The final test runs
//! the whole report twice and checks the two runs are byte-identical.

use std::time::{Duration, Instant};

use qmln::gen::{self, FormulaOptions, Rng};
use qmln::inference::{
    fit_distribution, marginal_query, mln_distribution, mln_to_qmln, tv_to_uniform_models,
};
use qmln::maxent::{
    build_problem, dual_gradient, dual_objective, solve, MarginalConstraint, SolveOptions,
};
use qmln::oracle::{
    substitution_statistic, translated_marginal_query, verify_count, verify_map_theorem,
    verify_marginal_theorem, verify_scaling, ExtensionSpace,
};
use qmln::statistics::sentence_statistic;
use qmln::syntax::{
    parse_model, parse_sentence, Qmln, QuantifiedSentence, QuantifierKind, Weight, WeightedSentence,
};
use qmln::translate::{translate, TranslationMode};
use qmln::worlds::{AtomIndex, Domain, WorldSpace};

const EXAMPLE: &str = "domain = {a,b}\npredicate knows/2\n2.0 :: exists x avg y : knows(x,y)\n";

/// Seeded generators use fixed per-criterion seeds, optionally offset by the
/// `QMLN_TEST_SEED` environment variable so the whole suite can be re-rolled
/// reproducibly.
fn seed(base: u64) -> u64 {
    match std::env::var("QMLN_TEST_SEED") {
        Ok(v) => base ^ v.parse::<u64>().expect("QMLN_TEST_SEED must be an integer"),
        Err(_) => base,
    }
}

fn example() -> (Qmln, Domain) {
    parse_model(EXAMPLE).unwrap()
}

fn two_predicate_scaffold() -> (Qmln, Domain) {
    parse_model("domain = {a,b}\npredicate smoker/1\npredicate knows/2\n").unwrap()
}

fn sentence(text: &str, model: &Qmln, domain: &Domain) -> QuantifiedSentence {
    parse_sentence(text, model.vocabulary(), domain).unwrap()
}

fn check(test_name: &str, budget: Duration, criterion: impl Fn() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = criterion();
    let elapsed = start.elapsed();
    match outcome {
        Ok(line) => println!("{line} [{:.2}s]", elapsed.as_secs_f64()),
        Err(detail) => panic!("{test_name}: FAIL — {detail}"),
    }
    assert!(
        elapsed <= budget,
        "{test_name} exceeded its time budget: {elapsed:?} > {budget:?}"
    );
}

fn c01_statistic_values() -> Result<String, String> {
    let (model, domain) = example();
    let index = AtomIndex::new(model.vocabulary(), &domain).unwrap();
    let s = sentence("exists x avg y : knows(x,y)", &model, &domain);
    let cases = [
        ("{knows(a,a), knows(a,b)}", 1.0),
        ("{}", 0.0),
        ("{knows(a,b)}", 0.5),
    ];
    for (world_text, expected) in cases {
        let world = qmln::worlds::parse_world(&index, &domain, world_text).unwrap();
        let got = sentence_statistic(&index, &domain, &world, &s).unwrap();
        if (got - expected).abs() > 1e-12 {
            return Err(format!("statistic of {world_text}: {got} != {expected}"));
        }
        // Cross-check against the substitution-based reference.
        let reference = substitution_statistic(&index, &domain, &world, &s).unwrap();
        if got.to_bits() != reference.to_bits() {
            return Err(format!("implementations disagree on {world_text}"));
        }
    }
    Ok("criterion 01 statistic-values: PASS (1, 0, 0.5 reproduced exactly)".into())
}

fn c02_negation_duality() -> Result<String, String> {
    let (model, domain) = example();
    let index = AtomIndex::new(model.vocabulary(), &domain).unwrap();
    let space = WorldSpace::new(model.vocabulary(), &domain).unwrap();
    let mut rng = Rng::new(seed(0x5eed_0002));
    let kinds = [
        QuantifierKind::Forall,
        QuantifierKind::Exists,
        QuantifierKind::Avg,
    ];
    let opts = FormulaOptions {
        max_depth: 3,
        ..FormulaOptions::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let len = 1 + rng.below(3);
        let prefix = gen::random_prefix_kinds(&mut rng, len, &kinds);
        let s = gen::random_sentence(&mut rng, model.vocabulary(), &domain, &prefix, &opts);
        let n = s.negated();
        for world in space.iter() {
            let q = sentence_statistic(&index, &domain, &world, &s).unwrap();
            let nq = sentence_statistic(&index, &domain, &world, &n).unwrap();
            worst = worst.max((nq - (1.0 - q)).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("duality deviation {worst:e} exceeds 1e-12"));
    }
    Ok(format!(
        "criterion 02 negation-duality: PASS (200 sentences x 16 worlds, max deviation {worst:e})"
    ))
}

fn c03_lifting_preserves_distributions() -> Result<String, String> {
    let (scaffold, domain) = two_predicate_scaffold();
    let mut rng = Rng::new(seed(0x5eed_0003));
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n_formulas = 1 + rng.below(3);
        let mln = gen::random_mln(
            &mut rng,
            scaffold.vocabulary(),
            &domain,
            n_formulas,
            2,
            (-2.0, 2.0),
        );
        let direct = mln_distribution(&mln, &domain).map_err(|e| format!("model {i}: {e}"))?;
        let lifted = fit_distribution(&mln_to_qmln(&mln, &domain).unwrap(), &domain)
            .map_err(|e| format!("model {i}: {e}"))?;
        worst = worst.max(direct.max_abs_diff(&lifted));
    }
    if worst > 1e-9 {
        return Err(format!("pointwise deviation {worst:e} exceeds 1e-9"));
    }
    Ok(format!(
        "criterion 03 weighted-formula-lifting: PASS (50 models, max pointwise deviation {worst:e})"
    ))
}

fn c04_sign_flips_are_invisible() -> Result<String, String> {
    let (scaffold, domain) = two_predicate_scaffold();
    let mut rng = Rng::new(seed(0x5eed_0004));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n_sentences = 1 + rng.below(3);
        let model = gen::random_model(
            &mut rng,
            scaffold.vocabulary(),
            &domain,
            n_sentences,
            (-2.0, 2.0),
            3,
            &FormulaOptions::default(),
        );
        let base = fit_distribution(&model, &domain).unwrap();
        for flip in 0..model.sentences().len() {
            let mut sentences = model.sentences().to_vec();
            let ws = &sentences[flip];
            sentences[flip] = WeightedSentence::new(ws.sentence.negated(), ws.weight.negated());
            let Ok(flipped) = Qmln::new(model.vocabulary().clone(), sentences) else {
                // The negation can collide with another sentence; skip.
                continue;
            };
            let dist = fit_distribution(&flipped, &domain).unwrap();
            worst = worst.max(base.max_abs_diff(&dist));
        }
    }
    if worst > 1e-9 {
        return Err(format!("pointwise deviation {worst:e} exceeds 1e-9"));
    }
    Ok(format!(
        "criterion 04 sign-flip-invariance: PASS (50 models, max pointwise deviation {worst:e})"
    ))
}

fn c05_large_weights_concentrate_uniformly() -> Result<String, String> {
    let (model, domain) =
        parse_model("domain = {a,b}\npredicate knows/2\n100.0 :: exists x avg y : knows(x,y)\n")
            .unwrap();
    let dist = fit_distribution(&model, &domain).unwrap();
    let tv = tv_to_uniform_models(&model, &domain, &dist).unwrap();
    if tv > 1e-6 {
        return Err(format!("total variation {tv:e} exceeds 1e-6"));
    }
    // Sanity: the classical models are exactly the 7 worlds with a full row.
    let index = AtomIndex::new(model.vocabulary(), &domain).unwrap();
    let space = WorldSpace::new(model.vocabulary(), &domain).unwrap();
    let conj = qmln::inference::classical_conjunction(&model).unwrap();
    let n_models = space
        .iter()
        .filter(|w| qmln::worlds::evaluate(&index, &domain, w, &conj, &[]).unwrap())
        .count();
    if n_models != 7 {
        return Err(format!("expected 7 classical models, found {n_models}"));
    }
    Ok(format!(
        "criterion 05 weight-limit-uniformity: PASS (tv {tv:e} to uniform over 7 models)"
    ))
}

fn c06_extension_statistics_scale() -> Result<String, String> {
    let (model, domain) = example();
    let report = verify_scaling(&model, &domain).map_err(|e| e.to_string())?;
    if report.checks != 32 {
        return Err(format!("expected 32 checks, ran {}", report.checks));
    }
    if !report.pass() {
        return Err(format!(
            "scaling deviation {:e} exceeds 1e-12",
            report.max_deviation
        ));
    }
    Ok(format!(
        "criterion 06 extension-statistic-scaling: PASS (16 worlds x 2 orders, max deviation {:e})",
        report.max_deviation
    ))
}

fn one_elimination_model(rng: &mut Rng, scaffold: &Qmln, domain: &Domain) -> Qmln {
    // Exactly one classical quantifier in the prefix, somewhere before an
    // avg block.
    let classical = if rng.chance(0.5) {
        QuantifierKind::Forall
    } else {
        QuantifierKind::Exists
    };
    let prefix = match rng.below(3) {
        0 => vec![classical, QuantifierKind::Avg],
        1 => vec![QuantifierKind::Avg, classical, QuantifierKind::Avg],
        _ => vec![classical, QuantifierKind::Avg, QuantifierKind::Avg],
    };
    let opts = FormulaOptions {
        max_depth: 2,
        allow_inner_quantifiers: false,
        ..FormulaOptions::default()
    };
    let mut sentences = vec![WeightedSentence::new(
        gen::random_sentence(rng, scaffold.vocabulary(), domain, &prefix, &opts),
        Weight::Finite(rng.range(-1.5, 1.5)),
    )];
    if rng.chance(0.5) {
        let extra = gen::random_sentence(
            rng,
            scaffold.vocabulary(),
            domain,
            &[QuantifierKind::Avg],
            &opts,
        );
        let ws = WeightedSentence::new(extra, Weight::Finite(rng.range(-1.5, 1.5)));
        if ws.sentence != sentences[0].sentence {
            sentences.push(ws);
        }
    }
    Qmln::new(scaffold.vocabulary().clone(), sentences).unwrap()
}

fn c07_map_preservation() -> Result<String, String> {
    let (model, domain) = example();
    let report = verify_map_theorem(&model, &domain).map_err(|e| e.to_string())?;
    if !report.pass() || report.base_argmax.len() != 7 {
        return Err(format!("example model failed: {report:?}"));
    }
    let (scaffold, domain) = two_predicate_scaffold();
    let mut rng = Rng::new(seed(0x5eed_0007));
    for i in 0..20 {
        let model = one_elimination_model(&mut rng, &scaffold, &domain);
        let report = verify_map_theorem(&model, &domain).map_err(|e| format!("model {i}: {e}"))?;
        if !report.pass() {
            return Err(format!(
                "model {i}: base argmax {:?} != translated {:?}",
                report.base_argmax, report.translated_argmax_bases
            ));
        }
    }
    Ok(
        "criterion 07 map-preservation: PASS (example model + 20 seeded one-elimination models)"
            .into(),
    )
}

fn c08_extension_counts_and_marginals() -> Result<String, String> {
    // All 16 worlds have exactly 2 extensions on the two-element domain.
    let (model, domain) = example();
    let count = verify_count(&model, &domain).map_err(|e| e.to_string())?;
    if !count.pass() || count.expected != 2 || count.n_worlds != 16 {
        return Err(format!("two-element count check failed: {count:?}"));
    }

    // Spot check on a three-element domain: 3! = 6 extensions per world.
    let (model3, domain3) =
        parse_model("domain = {a,b,c}\npredicate knows/2\n2.0 :: exists x avg y : knows(x,y)\n")
            .unwrap();
    let tr3 = translate(&model3, &domain3, TranslationMode::MarginalPreserving)
        .map_err(|e| e.to_string())?;
    let space3 = ExtensionSpace::new(&tr3, &domain3).map_err(|e| e.to_string())?;
    let index3 = space3.base_index().clone();
    let spot_worlds = [
        qmln::worlds::parse_world(&index3, &domain3, "{}").unwrap(),
        qmln::worlds::parse_world(&index3, &domain3, "{knows(a,a), knows(a,b)}").unwrap(),
        qmln::worlds::parse_world(&index3, &domain3, "{knows(a,b), knows(b,a), knows(c,c)}")
            .unwrap(),
    ];
    for (i, w) in spot_worlds.iter().enumerate() {
        let c = space3.count_extensions(w).map_err(|e| e.to_string())?;
        if c.count != 6 || !c.canonical_matches || !c.per_order_unique {
            return Err(format!("three-element spot world {i}: {c:?}"));
        }
    }

    // Marginal preservation for ten first-order queries, with the
    // per-extension probability scaling.
    let queries = [
        ": knows(a,b)",
        ": knows(a,a)",
        ": !knows(b,a)",
        ": knows(a,b) & knows(b,a)",
        ": knows(a,a) | knows(b,b)",
        ": (exists x : (forall y : knows(x,y)))",
        ": (forall x : (exists y : knows(x,y)))",
        ": (exists x : knows(x,x))",
        ": (forall x : (forall y : knows(x,y) => knows(y,x)))",
        ": a = a",
    ];
    let mut worst_diff = 0.0f64;
    let mut worst_scaling = 0.0f64;
    for text in queries {
        let q = sentence(text, &model, &domain).strip_avg();
        let report = verify_marginal_theorem(&model, &domain, &q).map_err(|e| e.to_string())?;
        if report.extensions_per_world.iter().any(|&c| c != 2) {
            return Err(format!(
                "{text}: extension counts {:?}",
                report.extensions_per_world
            ));
        }
        worst_diff = worst_diff.max(report.difference());
        worst_scaling = worst_scaling.max(report.max_scaling_deviation);
    }
    if worst_diff > 1e-9 {
        return Err(format!("marginal deviation {worst_diff:e} exceeds 1e-9"));
    }
    if worst_scaling > 1e-12 {
        return Err(format!("scaling deviation {worst_scaling:e} exceeds 1e-12"));
    }
    Ok(format!(
        "criterion 08 extension-counts-and-marginals: PASS (16x2 and 3x6 extensions; 10 queries, max |diff| {worst_diff:e}, scaling {worst_scaling:e})"
    ))
}

fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 })
        .sum()
}

/// Projection-heuristic sampler: random start, then alternating projections
/// onto the constraint hyperplanes and the probability simplex.
fn sample_feasible(
    rng: &mut Rng,
    stats: &[Vec<f64>],
    targets: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let n = stats.len();
    let m = targets.len();
    let mut p: Vec<f64> = (0..n).map(|_| rng.unit() + 1e-3).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    for _ in 0..400 {
        // Project onto each statistic hyperplane.
        for j in 0..m {
            let a: Vec<f64> = stats.iter().map(|row| row[j]).collect();
            let dot: f64 = a.iter().zip(&p).map(|(x, y)| x * y).sum();
            let norm: f64 = a.iter().map(|x| x * x).sum();
            if norm > 0.0 {
                let shift = (targets[j] - dot) / norm;
                for (pi, ai) in p.iter_mut().zip(&a) {
                    *pi += shift * ai;
                }
            }
        }
        // Normalization hyperplane, then clip to the simplex.
        let total: f64 = p.iter().sum();
        let shift = (1.0 - total) / n as f64;
        p.iter_mut().for_each(|x| *x += shift);
        p.iter_mut().for_each(|x| *x = x.max(0.0));
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let feasible = (0..m).all(|j| {
            let got: f64 = stats.iter().zip(&p).map(|(row, pi)| row[j] * pi).sum();
            (got - targets[j]).abs() <= tol
        });
        if feasible {
            return Some(p);
        }
    }
    None
}

fn c09_maxent() -> Result<String, String> {
    // Closed-form single constraint.
    let (scaffold1, domain1) = parse_model("domain = {a}\npredicate smoker/1\n").unwrap();
    let s = sentence("avg x : smoker(x)", &scaffold1, &domain1);
    let problem = build_problem(
        &[MarginalConstraint::new(s, 0.75).unwrap()],
        scaffold1.vocabulary(),
        &domain1,
    )
    .map_err(|e| e.to_string())?;
    let solution = solve(&problem, SolveOptions::default()).map_err(|e| e.to_string())?;
    if (solution.weights[0] - 3f64.ln()).abs() > 1e-6 {
        return Err(format!("expected log 3, got {}", solution.weights[0]));
    }

    // Twenty seeded two-constraint problems with feasible interior targets.
    let (scaffold, domain) = two_predicate_scaffold();
    let mut rng = Rng::new(seed(0x5eed_0009));
    let kinds = [
        QuantifierKind::Forall,
        QuantifierKind::Exists,
        QuantifierKind::Avg,
    ];
    let opts = FormulaOptions {
        max_depth: 2,
        allow_inner_quantifiers: false,
        ..FormulaOptions::default()
    };
    let mut worst_marginal = 0.0f64;
    let mut worst_grad = 0.0f64;
    for i in 0..20 {
        let len1 = 1 + rng.below(2);
        let prefix1 = gen::random_prefix_kinds(&mut rng, len1, &kinds);
        let s1 = gen::random_sentence(&mut rng, scaffold.vocabulary(), &domain, &prefix1, &opts);
        let mut s2 = s1.clone();
        while s2 == s1 {
            let len2 = 1 + rng.below(2);
            let prefix2 = gen::random_prefix_kinds(&mut rng, len2, &kinds);
            s2 = gen::random_sentence(&mut rng, scaffold.vocabulary(), &domain, &prefix2, &opts);
        }
        // Realizable targets: the marginals of a random model over the
        // same sentences.
        let w1 = rng.range(-2.0, 2.0);
        let w2 = rng.range(-2.0, 2.0);
        let source = Qmln::new(
            scaffold.vocabulary().clone(),
            vec![
                WeightedSentence::new(s1.clone(), Weight::Finite(w1)),
                WeightedSentence::new(s2.clone(), Weight::Finite(w2)),
            ],
        )
        .unwrap();
        let q1 = marginal_query(&source, &domain, &s1)
            .unwrap()
            .clamp(0.0, 1.0);
        let q2 = marginal_query(&source, &domain, &s2)
            .unwrap()
            .clamp(0.0, 1.0);
        let problem = build_problem(
            &[
                MarginalConstraint::new(s1.clone(), q1).map_err(|e| e.to_string())?,
                MarginalConstraint::new(s2.clone(), q2).map_err(|e| e.to_string())?,
            ],
            scaffold.vocabulary(),
            &domain,
        )
        .map_err(|e| format!("problem {i}: {e}"))?;

        // Gradient vs central finite differences at a few points.
        let dim = problem.soft().len();
        for point in [vec![0.0; dim], vec![0.4; dim], vec![-1.1; dim]] {
            let grad = dual_gradient(&problem, &point);
            for j in 0..dim {
                let h = 1e-5;
                let mut hi = point.clone();
                let mut lo = point.clone();
                hi[j] += h;
                lo[j] -= h;
                let fd =
                    (dual_objective(&problem, &hi) - dual_objective(&problem, &lo)) / (2.0 * h);
                worst_grad = worst_grad.max((grad[j] - fd).abs());
            }
        }

        // A 1e-7 gradient tolerance leaves a 10x margin on the 1e-6
        // marginal requirement; the default 1e-8 can stall on
        // near-dependent statistic pairs.
        let solution = solve(
            &problem,
            SolveOptions {
                tolerance: 1e-7,
                max_iterations: 100_000,
            },
        )
        .map_err(|e| format!("problem {i}: {e}"))?;
        for (s, q) in [(&s1, q1), (&s2, q2)] {
            let got = marginal_query(&solution.model, &domain, s).unwrap();
            worst_marginal = worst_marginal.max((got - q).abs());
        }

        // Entropy dominance against projection-sampled feasible
        // distributions, using the exact duality bound for the slack.
        if i == 0 {
            let stats: Vec<Vec<f64>> = {
                let index = AtomIndex::new(scaffold.vocabulary(), &domain).unwrap();
                let space = WorldSpace::new(scaffold.vocabulary(), &domain).unwrap();
                space
                    .iter()
                    .map(|w| {
                        problem
                            .soft()
                            .iter()
                            .map(|c| sentence_statistic(&index, &domain, &w, &c.sentence).unwrap())
                            .collect()
                    })
                    .collect()
            };
            let targets: Vec<f64> = problem.soft().iter().map(|c| c.target).collect();
            let fitted = fit_distribution(&solution.model, &domain).unwrap();
            let fitted_entropy = fitted.entropy();
            let mut sampled = 0usize;
            let mut attempts = 0usize;
            while sampled < 1000 {
                attempts += 1;
                if attempts > 20_000 {
                    return Err("projection sampler starved".into());
                }
                let Some(p) = sample_feasible(&mut rng, &stats, &targets, 1e-3) else {
                    continue;
                };
                sampled += 1;
                // H(p) <= H(p*) + sum_i |w_i| * |violation_i| for any p
                // meeting the constraints up to the violations.
                let mut slack = 1e-9;
                for (j, c) in problem.soft().iter().enumerate() {
                    let got: f64 = stats.iter().zip(&p).map(|(row, pi)| row[j] * pi).sum();
                    slack += solution.weights[j].abs() * (got - c.target).abs();
                }
                let h = entropy(&p);
                if h > fitted_entropy + slack {
                    return Err(format!(
                        "sampled entropy {h} exceeds fitted {fitted_entropy} + slack {slack}"
                    ));
                }
            }
        }
    }
    if worst_marginal > 1e-6 {
        return Err(format!("marginal reproduction off by {worst_marginal:e}"));
    }
    if worst_grad > 1e-6 {
        return Err(format!(
            "gradient vs finite differences off by {worst_grad:e}"
        ));
    }
    Ok(format!(
        "criterion 09 maxent: PASS (log-3 closed form; 20 problems, marginals within {worst_marginal:e}, gradient within {worst_grad:e}; entropy dominates 1000 samples)"
    ))
}

fn c10_translated_queries_agree() -> Result<String, String> {
    let (scaffold, domain) = two_predicate_scaffold();
    let mut rng = Rng::new(seed(0x5eed_0010));
    let opts = FormulaOptions {
        max_depth: 2,
        allow_inner_quantifiers: false,
        ..FormulaOptions::default()
    };
    let mut worst = 0.0f64;
    for i in 0..10 {
        let model = one_elimination_model(&mut rng, &scaffold, &domain);
        let classical = if rng.chance(0.5) {
            QuantifierKind::Forall
        } else {
            QuantifierKind::Exists
        };
        let query_prefix = if rng.chance(0.5) {
            vec![classical, QuantifierKind::Avg]
        } else {
            vec![QuantifierKind::Avg, classical, QuantifierKind::Avg]
        };
        let query = gen::random_sentence(
            &mut rng,
            scaffold.vocabulary(),
            &domain,
            &query_prefix,
            &opts,
        );
        let direct =
            marginal_query(&model, &domain, &query).map_err(|e| format!("pair {i}: {e}"))?;
        let piped = translated_marginal_query(&model, &domain, &query)
            .map_err(|e| format!("pair {i}: {e}"))?;
        worst = worst.max((direct - piped).abs());
    }
    if worst > 1e-9 {
        return Err(format!("pipeline deviation {worst:e} exceeds 1e-9"));
    }
    Ok(format!(
        "criterion 10 translated-queries: PASS (10 pairs, max |direct - pipeline| {worst:e})"
    ))
}

type Criterion = fn() -> Result<String, String>;

fn full_report() -> Result<String, String> {
    let criteria: [(&str, Criterion); 10] = [
        ("01", c01_statistic_values),
        ("02", c02_negation_duality),
        ("03", c03_lifting_preserves_distributions),
        ("04", c04_sign_flips_are_invisible),
        ("05", c05_large_weights_concentrate_uniformly),
        ("06", c06_extension_statistics_scale),
        ("07", c07_map_preservation),
        ("08", c08_extension_counts_and_marginals),
        ("09", c09_maxent),
        ("10", c10_translated_queries_agree),
    ];
    let mut report = String::new();
    for (name, f) in criteria {
        match f() {
            Ok(line) => {
                report.push_str(&line);
                report.push('\n');
            }
            Err(detail) => return Err(format!("criterion {name} failed: {detail}")),
        }
    }
    Ok(report)
}

#[test]
fn criterion_01_statistic_values() {
    check("criterion 01", Duration::from_secs(1), c01_statistic_values);
}

#[test]
fn criterion_02_negation_duality() {
    check(
        "criterion 02",
        Duration::from_secs(10),
        c02_negation_duality,
    );
}

#[test]
fn criterion_03_weighted_formula_lifting() {
    check(
        "criterion 03",
        Duration::from_secs(30),
        c03_lifting_preserves_distributions,
    );
}

#[test]
fn criterion_04_sign_flip_invariance() {
    check(
        "criterion 04",
        Duration::from_secs(30),
        c04_sign_flips_are_invisible,
    );
}

#[test]
fn criterion_05_weight_limit_uniformity() {
    check(
        "criterion 05",
        Duration::from_secs(1),
        c05_large_weights_concentrate_uniformly,
    );
}

#[test]
fn criterion_06_extension_statistic_scaling() {
    check(
        "criterion 06",
        Duration::from_secs(10),
        c06_extension_statistics_scale,
    );
}

#[test]
fn criterion_07_map_preservation() {
    check(
        "criterion 07",
        Duration::from_secs(300),
        c07_map_preservation,
    );
}

#[test]
fn criterion_08_extension_counts_and_marginals() {
    check(
        "criterion 08",
        Duration::from_secs(600),
        c08_extension_counts_and_marginals,
    );
}

#[test]
fn criterion_09_maxent() {
    check("criterion 09", Duration::from_secs(300), c09_maxent);
}

#[test]
fn criterion_10_translated_queries() {
    check(
        "criterion 10",
        Duration::from_secs(300),
        c10_translated_queries_agree,
    );
}

#[test]
fn maxent_on_single_world_targets_matches_maximum_likelihood() {
    // When the targets are the statistics of one observed world, the dual
    // objective is exactly that world's log-likelihood as a function of the
    // weights, so the fitted weights are the maximum-likelihood weights.
    // Checked through an independent route: fit the weighted model and read
    // the observed world's probability.
    let (scaffold, domain) = two_predicate_scaffold();
    let index = AtomIndex::new(scaffold.vocabulary(), &domain).unwrap();
    let observed =
        qmln::worlds::parse_world(&index, &domain, "{smoker(a), knows(a,b), knows(b,a)}").unwrap();
    let s1 = sentence("avg x : smoker(x)", &scaffold, &domain);
    let s2 = sentence("exists x avg y : knows(x,y)", &scaffold, &domain);
    let q1 = sentence_statistic(&index, &domain, &observed, &s1).unwrap();
    let q2 = sentence_statistic(&index, &domain, &observed, &s2).unwrap();
    let problem = build_problem(
        &[
            MarginalConstraint::new(s1.clone(), q1).unwrap(),
            MarginalConstraint::new(s2.clone(), q2).unwrap(),
        ],
        scaffold.vocabulary(),
        &domain,
    )
    .unwrap();
    let solution = solve(
        &problem,
        SolveOptions {
            tolerance: 1e-7,
            max_iterations: 100_000,
        },
    )
    .unwrap();

    let log_likelihood = |w: &[f64]| -> f64 {
        let model = Qmln::new(
            scaffold.vocabulary().clone(),
            vec![
                WeightedSentence::new(s1.clone(), Weight::Finite(w[0])),
                WeightedSentence::new(s2.clone(), Weight::Finite(w[1])),
            ],
        )
        .unwrap();
        let dist = fit_distribution(&model, &domain).unwrap();
        dist.log_prob(observed.index().unwrap())
    };
    let best = log_likelihood(&solution.weights);
    // Stationarity of the likelihood at the fitted weights.
    let h = 1e-5;
    for i in 0..2 {
        let mut hi = solution.weights.clone();
        let mut lo = solution.weights.clone();
        hi[i] += h;
        lo[i] -= h;
        let slope = (log_likelihood(&hi) - log_likelihood(&lo)) / (2.0 * h);
        assert!(slope.abs() <= 1e-6, "likelihood slope {slope:e} in direction {i}");
    }
    // Local dominance along the axes.
    for i in 0..2 {
        for eps in [-0.1, -0.01, 0.01, 0.1] {
            let mut w = solution.weights.clone();
            w[i] += eps;
            assert!(log_likelihood(&w) <= best + 1e-9);
        }
    }
}

#[test]
fn criterion_11_determinism() {
    let first = full_report().expect("first run");
    let second = full_report().expect("second run");
    assert_eq!(
        first.as_bytes(),
        second.as_bytes(),
        "reports differ between runs"
    );
    println!("criterion 11 determinism: PASS (two full runs byte-identical)");
    print!("{first}");
}
