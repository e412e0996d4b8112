//! Batch command-line interface. One subcommand per reasoning task; results
//! go to stdout (probabilities and statistics with 12 decimal digits, worlds
//! in world syntax), diagnostics to stderr. Exit codes: 0 success, 1 usage
//! error, 2 model error, 3 resource cap exceeded, 4 verification failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::inference::{
    self, fit_distribution, map_worlds, marginal_prob, marginal_query, mln_to_qmln, qmln_to_mln,
    InferenceError,
};
use crate::maxent::{self, MarginalConstraint, MaxEntError, SolveOptions};
use crate::oracle::{self, OracleError};
use crate::statistics::{check_models, max_out_degree, sentence_statistic, StatisticError};
use crate::syntax::{
    parse_constraints, parse_model, parse_sentence, print_model, ParseError, Qmln, Weight,
    WeightedSentence,
};
use crate::translate::{translate, StepSource, TranslateError, TranslationMode};
use crate::worlds::{parse_world, print_world, AtomIndex, Domain, WorldError};

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn model(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::model(e.to_string())
    }
}

impl From<WorldError> for Failure {
    fn from(e: WorldError) -> Self {
        let code = match e {
            WorldError::SpaceTooLarge { .. } | WorldError::AtomCountOverflow => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::World(w) => w.into(),
            other => Failure::model(other.to_string()),
        }
    }
}

impl From<StatisticError> for Failure {
    fn from(e: StatisticError) -> Self {
        match e {
            StatisticError::World(w) => w.into(),
            other => Failure::model(other.to_string()),
        }
    }
}

impl From<TranslateError> for Failure {
    fn from(e: TranslateError) -> Self {
        Failure::model(e.to_string())
    }
}

impl From<MaxEntError> for Failure {
    fn from(e: MaxEntError) -> Self {
        match e {
            MaxEntError::World(w) => w.into(),
            other => Failure::model(other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::World(w) => w.into(),
            OracleError::Inference(i) => i.into(),
            OracleError::CapExceeded { .. } => Failure {
                code: 3,
                message: e.to_string(),
            },
            other => Failure::model(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::model(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Map,
    Marginal,
}

impl From<ModeArg> for TranslationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Map => TranslationMode::MapOnly,
            ModeArg::Marginal => TranslationMode::MarginalPreserving,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitArg {
    Qmln,
    Mln,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    Map,
    Marginal,
    Count,
    Lemma2,
}

#[derive(Parser, Debug)]
#[command(
    name = "qmln",
    version,
    about = "Exact reasoning for Markov logic networks with statistical quantifiers",
    disable_help_subcommand = true
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker thread cap (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sentence statistic in a given world.
    Stat {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        world: PathBuf,
        /// Sentence `prefix : formula`.
        #[arg(long, conflicts_with = "max_out_degree")]
        sentence: Option<String>,
        /// Statistic of `exists x avg y : R(x,y)` for a binary predicate R.
        #[arg(long)]
        max_out_degree: Option<String>,
    },
    /// Most probable worlds.
    Map {
        #[arg(long)]
        model: PathBuf,
    },
    /// Marginal probability of a query sentence (expected statistic when the
    /// query contains `avg`).
    Prob {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        query: String,
    },
    /// Log partition function.
    Z {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated weights; for each, every soft weight is replaced
        /// and the distance to the uniform distribution over the classical
        /// models is reported.
        #[arg(long, value_delimiter = ',')]
        weight_sweep: Option<Vec<f64>>,
    },
    /// Compile away classical prefix quantifiers.
    Translate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = EmitArg::Qmln)]
        emit: EmitArg,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit a max-entropy model to expected-statistic constraints.
    Maxent {
        /// Constraint file: lines `q :: prefix : formula`.
        #[arg(long)]
        constraints: PathBuf,
        /// Model file providing the vocabulary and domain (its sentences are
        /// ignored).
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Brute-force checks that compilation preserves MAP worlds, marginals,
    /// extension counts, and the per-extension statistic scaling.
    Verify {
        #[arg(long)]
        model: PathBuf,
        /// Which check to run (all of them when omitted).
        #[arg(long, value_enum)]
        theorem: Option<TheoremArg>,
        /// First-order query for the marginal check (defaults to the first
        /// ground atom).
        #[arg(long)]
        query: Option<String>,
    },
}

struct Output {
    text: String,
    json: Value,
    exit: i32,
}

impl Output {
    fn ok(text: String, json: Value) -> Output {
        Output {
            text,
            json,
            exit: 0,
        }
    }
}

/// Runs the CLI with explicit streams; returns the process exit code.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };

    let format = cli.format;
    let dispatch = || match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::model(e.to_string()))?
            .install(|| execute(&cli.command)),
        None => execute(&cli.command),
    };
    match dispatch() {
        Ok(out) => {
            match format {
                Format::Text => {
                    let _ = write!(stdout, "{}", out.text);
                }
                Format::Json => {
                    let _ = writeln!(stdout, "{}", out.json);
                }
            }
            out.exit
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load_model(path: &PathBuf) -> Result<(Qmln, Domain), Failure> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_model(&text)?)
}

fn execute(command: &Command) -> Result<Output, Failure> {
    match command {
        Command::Stat {
            model,
            world,
            sentence,
            max_out_degree: mod_pred,
        } => {
            let (model, domain) = load_model(model)?;
            let index = AtomIndex::new(model.vocabulary(), &domain)?;
            let world_text = std::fs::read_to_string(world)?;
            let w = parse_world(&index, &domain, world_text.trim())?;
            match (sentence, mod_pred) {
                (Some(text), None) => {
                    let s = parse_sentence(text, model.vocabulary(), &domain)?;
                    let value = sentence_statistic(&index, &domain, &w, &s)?;
                    let models = check_models(&index, &domain, &w, &s)?;
                    Ok(Output::ok(
                        format!("{value:.12}\n"),
                        json!({"command": "stat", "statistic": value, "models": models}),
                    ))
                }
                (None, Some(pred)) => {
                    let value = max_out_degree(&index, &domain, &w, pred)?;
                    Ok(Output::ok(
                        format!("{value:.12}\n"),
                        json!({"command": "stat", "statistic": value, "predicate": pred}),
                    ))
                }
                _ => Err(Failure {
                    code: 1,
                    message: "exactly one of --sentence and --max-out-degree is required".into(),
                }),
            }
        }
        Command::Map { model } => {
            let (model, domain) = load_model(model)?;
            let index = AtomIndex::new(model.vocabulary(), &domain)?;
            let result = map_worlds(&model, &domain)?;
            let mut text = format!("log-probability: {:.12}\n", result.log_prob);
            let mut worlds = Vec::with_capacity(result.worlds.len());
            for w in &result.worlds {
                let printed = print_world(&index, &domain, w);
                let _ = writeln!(text, "{printed}");
                worlds.push(printed);
            }
            Ok(Output::ok(
                text,
                json!({"command": "map", "log_probability": result.log_prob, "worlds": worlds}),
            ))
        }
        Command::Prob { model, query } => {
            let (model, domain) = load_model(model)?;
            let s = parse_sentence(query, model.vocabulary(), &domain)?;
            let (kind, value) = if s.has_avg() {
                ("marginal_query", marginal_query(&model, &domain, &s)?)
            } else {
                (
                    "marginal_prob",
                    marginal_prob(&model, &domain, &s.strip_avg())?,
                )
            };
            Ok(Output::ok(
                format!("{value:.12}\n"),
                json!({"command": "prob", "kind": kind, "probability": value}),
            ))
        }
        Command::Z {
            model,
            weight_sweep,
        } => {
            let (model, domain) = load_model(model)?;
            match weight_sweep {
                None => {
                    let dist = fit_distribution(&model, &domain)?;
                    Ok(Output::ok(
                        format!("{:.12}\n", dist.log_z()),
                        json!({"command": "z", "log_z": dist.log_z()}),
                    ))
                }
                Some(weights) => {
                    let mut text = String::new();
                    let mut rows = Vec::new();
                    for &w in weights {
                        let reweighted: Vec<WeightedSentence> = model
                            .sentences()
                            .iter()
                            .map(|ws| {
                                let weight = match ws.weight {
                                    Weight::Finite(_) => Weight::Finite(w),
                                    hard => hard,
                                };
                                WeightedSentence::new(ws.sentence.clone(), weight)
                            })
                            .collect();
                        let swept = Qmln::new(model.vocabulary().clone(), reweighted)
                            .map_err(|e| Failure::model(e.to_string()))?;
                        let dist = fit_distribution(&swept, &domain)?;
                        let tv = inference::tv_to_uniform_models(&swept, &domain, &dist)?;
                        let _ = writeln!(
                            text,
                            "w={w} log_z={:.12} tv_uniform={:.12}",
                            dist.log_z(),
                            tv
                        );
                        rows.push(json!({"weight": w, "log_z": dist.log_z(), "tv_uniform": tv}));
                    }
                    Ok(Output::ok(text, json!({"command": "z", "sweep": rows})))
                }
            }
        }
        Command::Translate {
            model,
            mode,
            emit,
            output,
        } => {
            let (model, domain) = load_model(model)?;
            let tr = translate(&model, &domain, (*mode).into())?;
            let mut header = String::new();
            for step in &tr.steps {
                let source = match step.source {
                    StepSource::Sentence(i) => i.to_string(),
                    StepSource::Query => "query".to_string(),
                };
                let _ = writeln!(
                    header,
                    "# step {}: sentence {}, eliminated {} {}, weight factor {}",
                    step.step, source, step.eliminated, step.eliminated_var, step.weight_factor
                );
            }
            let body = match emit {
                EmitArg::Qmln => print_model(&tr.model, &domain),
                EmitArg::Mln => {
                    let mln = qmln_to_mln(&tr.model, &domain)?;
                    // Round-trip self-check: lifting the emitted formulas
                    // must reproduce the compiled model's weights.
                    let back = mln_to_qmln(&mln, &domain)?;
                    for (a, b) in tr.model.sentences().iter().zip(back.sentences()) {
                        let close = match (a.weight, b.weight) {
                            (Weight::Finite(x), Weight::Finite(y)) => {
                                (x - y).abs() <= 1e-9 * (1.0 + x.abs())
                            }
                            (x, y) => x == y,
                        };
                        if a.sentence != b.sentence || !close {
                            return Err(Failure::model(
                                "round-trip check of the emitted weighted formulas failed",
                            ));
                        }
                    }
                    let mut out = String::new();
                    let _ = writeln!(out, "# weighted formulas; free variables are implicit");
                    for wf in mln.formulas() {
                        let _ = writeln!(out, "{} :: : {}", wf.weight, wf.formula);
                    }
                    out
                }
            };
            let file_text = format!("{header}{body}");
            let summary = format!(
                "translated: {} steps, {} hard constraints\n",
                tr.steps.len(),
                tr.model.hard().count()
            );
            let json = json!({
                "command": "translate",
                "steps": tr.steps.iter().map(|s| json!({
                    "step": s.step,
                    "sentence": match s.source {
                        StepSource::Sentence(i) => Value::from(i),
                        StepSource::Query => Value::from("query"),
                    },
                    "eliminated": s.eliminated.to_string(),
                    "variable": s.eliminated_var,
                    "weight_factor": s.weight_factor,
                })).collect::<Vec<_>>(),
                "hard_constraints": tr.model.hard().count(),
            });
            match output {
                Some(path) => {
                    std::fs::write(path, &file_text)?;
                    Ok(Output::ok(summary, json))
                }
                None => Ok(Output::ok(file_text, json)),
            }
        }
        Command::Maxent {
            constraints,
            sigma,
            tol,
            max_iter,
            output,
        } => {
            let (scaffold, domain) = load_model(sigma)?;
            let text = std::fs::read_to_string(constraints)?;
            let parsed = parse_constraints(&text, scaffold.vocabulary(), &domain)?;
            let constraints: Vec<MarginalConstraint> = parsed
                .into_iter()
                .map(|(s, q)| MarginalConstraint::new(s, q))
                .collect::<Result<_, _>>()?;
            let problem = maxent::build_problem(&constraints, scaffold.vocabulary(), &domain)?;
            let solution = maxent::solve(
                &problem,
                SolveOptions {
                    tolerance: *tol,
                    max_iterations: *max_iter,
                },
            )?;
            let model_text = print_model(&solution.model, &domain);
            let json = json!({
                "command": "maxent",
                "weights": solution.weights,
                "iterations": solution.iterations,
                "gradient_norm": solution.gradient_norm,
                "model": model_text,
            });
            match output {
                Some(path) => {
                    std::fs::write(path, &model_text)?;
                    Ok(Output::ok(
                        format!(
                            "converged in {} iterations (gradient norm {:e})\n",
                            solution.iterations, solution.gradient_norm
                        ),
                        json,
                    ))
                }
                None => Ok(Output::ok(model_text, json)),
            }
        }
        Command::Verify {
            model,
            theorem,
            query,
        } => {
            let (model, domain) = load_model(model)?;
            let theorems = match theorem {
                Some(t) => vec![*t],
                None => vec![
                    TheoremArg::Map,
                    TheoremArg::Marginal,
                    TheoremArg::Count,
                    TheoremArg::Lemma2,
                ],
            };
            let mut text = String::new();
            let mut results = Vec::new();
            let mut all_pass = true;
            for t in theorems {
                let (name, pass, detail) = run_theorem(&model, &domain, t, query.as_deref())?;
                all_pass &= pass;
                let line = format!("{}: {detail}", if pass { "PASS" } else { "FAIL" });
                let _ = writeln!(text, "{line}");
                results.push(json!({"theorem": name, "pass": pass, "detail": detail}));
            }
            Ok(Output {
                text,
                json: json!({"command": "verify", "results": results, "pass": all_pass}),
                exit: if all_pass { 0 } else { 4 },
            })
        }
    }
}

fn run_theorem(
    model: &Qmln,
    domain: &Domain,
    theorem: TheoremArg,
    query: Option<&str>,
) -> Result<(&'static str, bool, String), Failure> {
    match theorem {
        TheoremArg::Map => {
            let report = oracle::verify_map_theorem(model, domain)?;
            let detail = if report.pass() {
                format!(
                    "MAP worlds preserved ({} argmax worlds, {} extensions examined)",
                    report.base_argmax.len(),
                    report.n_extensions
                )
            } else {
                format!(
                    "base argmax {:?} != translated argmax {:?}",
                    report.base_argmax, report.translated_argmax_bases
                )
            };
            Ok(("map", report.pass(), detail))
        }
        TheoremArg::Marginal => {
            let index = AtomIndex::new(model.vocabulary(), domain)?;
            let q = match query {
                Some(text) => {
                    let s = parse_sentence(text, model.vocabulary(), domain)?;
                    if s.has_avg() {
                        return Err(Failure::model(
                            "the marginal check takes a first-order query without avg",
                        ));
                    }
                    s.strip_avg()
                }
                None => {
                    // Default query: the first ground atom.
                    let atom = index.decode(0, domain);
                    let text = format!(": {atom}");
                    parse_sentence(&text, model.vocabulary(), domain)?.strip_avg()
                }
            };
            let report = oracle::verify_marginal_theorem(model, domain, &q)?;
            let detail = format!(
                "marginal {} (|diff| = {:.3e}, scaling deviation = {:.3e})",
                if report.pass() {
                    "preserved"
                } else {
                    "NOT preserved"
                },
                report.difference(),
                report.max_scaling_deviation
            );
            Ok(("marginal", report.pass(), detail))
        }
        TheoremArg::Count => {
            let report = oracle::verify_count(model, domain)?;
            let detail = if report.pass() {
                let infeasible = report.n_infeasible();
                if infeasible == 0 {
                    format!(
                        "all {} worlds have {} extensions",
                        report.n_worlds, report.expected
                    )
                } else {
                    format!(
                        "all {} feasible worlds have {} extensions ({} infeasible worlds have none)",
                        report.n_worlds - infeasible,
                        report.expected,
                        infeasible
                    )
                }
            } else {
                format!(
                    "extension counts {:?} (expected {} everywhere; canonical match: {}, unique per order: {})",
                    report.counts, report.expected, report.canonical_matches, report.per_order_unique
                )
            };
            Ok(("count", report.pass(), detail))
        }
        TheoremArg::Lemma2 => {
            let report = oracle::verify_scaling(model, domain)?;
            let detail = format!(
                "statistic scaling {} (max deviation = {:.3e}, {} checks)",
                if report.pass() { "holds" } else { "violated" },
                report.max_deviation,
                report.checks
            );
            Ok(("lemma2", report.pass(), detail))
        }
    }
}
