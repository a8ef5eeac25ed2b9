mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use serde_json::{json, Value};
use tlae::action::ActionType;
use tlae::formula::{expand_all, neg_closure, parse, parse_action, Formula};
use tlae::instrumentality::{analyze, AnalysisOptions};
use tlae::model::{export_dot, validate_doc, ModelDoc, TreeModel};
use tlae::sat::{satisfiable, SatResult};
use tlae::suites::{self, Outcome};
use tlae::EvalContext;

use config::{Format, SessionConfig};

const CONFIG_ENV: &str = "TLAE_CONFIG";

#[derive(Parser)]
#[command(name = "tlae", version, about = "Models, formulas and instrumentality judgments for the logic of actions and expectations")]
struct Cli {
    /// Session configuration (TOML). Defaults to $TLAE_CONFIG when set.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Output format; overrides the configuration.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the frame properties of a model file.
    Validate { model: PathBuf },
    /// Evaluate a formula at a moment.
    Check { model: PathBuf, moment: String, formula: String },
    /// Witness sets, ratios and orderings of instruments at a moment.
    Analyze {
        model: PathBuf,
        moment: String,
        #[arg(long, default_value = "a1")]
        agent: String,
        #[arg(long)]
        goal: String,
        /// Minimum success ratio for Good/Poor, as an exact fraction such as 3/4.
        #[arg(long)]
        ratio_min: Option<String>,
        /// Minimum number of witnesses.
        #[arg(long)]
        witness_min: Option<usize>,
        /// How far back to look; the whole past when omitted.
        #[arg(long)]
        interval: Option<u32>,
        /// Restrict the analysis to these action terms (repeatable).
        #[arg(long = "candidate")]
        candidates: Vec<String>,
        /// Print the ordering as a DOT Hasse diagram.
        #[arg(long)]
        dot: bool,
    },
    /// Decide satisfiability of a formula.
    Sat {
        formula: String,
        #[arg(long)]
        bound_depth: Option<usize>,
        /// Write the witness model to this file.
        #[arg(long)]
        emit_model: Option<PathBuf>,
    },
    /// Run the axiom and theorem suites.
    Theorems {
        #[arg(long, default_value = "default")]
        corpus: String,
    },
    /// Print a model as a DOT graph.
    ExportDot { model: PathBuf },
    /// Print the negation closure of a formula with indices.
    Closure { formula: String },
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Usage(String),
}

type Run = Result<(u8, String), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_doc(path: &Path) -> Result<ModelDoc, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    ModelDoc::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<TreeModel, Failure> {
    TreeModel::build(&read_doc(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn moment(m: &TreeModel, id: &str) -> Result<usize, Failure> {
    m.index_of(id).ok_or_else(|| usage(format!("no moment {id}")))
}

fn formula(text: &str) -> Result<Formula, Failure> {
    parse(text).map_err(|e| usage(format!("formula: {e}")))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn run(cli: Cli) -> Run {
    let mut cfg = match &cli.config {
        Some(p) => SessionConfig::load(p).map_err(usage)?,
        None => SessionConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    match cli.command {
        Command::Validate { model } => {
            let report = validate_doc(&read_doc(&model)?);
            let code = if report.ok() { 0 } else { 1 };
            let out = match cfg.format {
                Format::Text => report
                    .properties
                    .iter()
                    .map(|p| {
                        let status = if p.ok { "ok".to_string() } else { format!("FAIL {}", p.offending.join(", ")) };
                        format!("{:<32} {status}", p.property)
                    })
                    .collect::<Vec<_>>()
                    .join("\n"),
                _ => serde_json::to_string_pretty(&report).expect("reports serialize"),
            };
            Ok((code, out))
        }
        Command::Check { model, moment: id, formula: text } => {
            let m = read_model(&model)?;
            let w = moment(&m, &id)?;
            let f = formula(&text)?;
            let value = EvalContext::new(&m).eval_extended(w, &f).map_err(usage)?;
            let out = match cfg.format {
                Format::Text => value.to_string(),
                _ => pretty(&json!({ "value": value, "moment": id, "formula": f.to_string() })),
            };
            Ok((if value { 0 } else { 1 }, out))
        }
        Command::Analyze { model, moment: id, agent, goal, ratio_min, witness_min, interval, candidates, dot } => {
            let m = read_model(&model)?;
            let w = moment(&m, &id)?;
            let a = m.signature().agent_index(&agent).ok_or_else(|| usage(format!("no agent {agent}")))?;
            let goal = formula(&goal)?;
            let ratio_min = ratio_min
                .map(|r| r.trim().parse::<Ratio<u64>>().map_err(|e| usage(format!("ratio {r}: {e}"))))
                .transpose()?;
            let candidates = if candidates.is_empty() {
                if m.signature().action_count() > cfg.max_actions {
                    return Err(usage(format!(
                        "enumerating classes over {} actions exceeds max_actions = {}; pass --candidate",
                        m.signature().action_count(),
                        cfg.max_actions
                    )));
                }
                None
            } else {
                Some(candidates.iter().map(|c| parse_action(c).map_err(usage)).collect::<Result<Vec<ActionType>, _>>()?)
            };
            let opts = AnalysisOptions { interval, witness_min, ratio_min, candidates };
            let report = analyze(&m, w, a, &goal, &opts).map_err(usage)?;
            let out = if dot || cfg.format == Format::Dot { report.hasse_dot() } else { report.to_json() };
            Ok((0, out))
        }
        Command::Sat { formula: text, bound_depth, emit_model } => {
            let f = formula(&text)?;
            let mut sat_cfg = cfg.sat().map_err(usage)?;
            if let Some(d) = bound_depth {
                sat_cfg.bound_depth = d;
            }
            let result = satisfiable(&f, &sat_cfg).map_err(usage)?;
            if let (SatResult::Sat { model, .. }, Some(path)) = (&result, &emit_model) {
                std::fs::write(path, model.to_doc().to_json()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            let (code, value) = match &result {
                SatResult::Sat { model, moment } => {
                    (0, json!({ "result": "sat", "formula": f.to_string(), "moment": model.id(*moment), "moments": model.len() }))
                }
                SatResult::Unsat { trace } => (1, json!({ "result": "unsat", "formula": f.to_string(), "trace": trace })),
                SatResult::Unknown { reason } => (3, json!({ "result": "unknown", "formula": f.to_string(), "reason": reason })),
            };
            let out = match cfg.format {
                Format::Text => result.to_string(),
                _ => pretty(&value),
            };
            Ok((code, out))
        }
        Command::Theorems { corpus } => {
            let outcomes: Vec<Outcome> = match corpus.as_str() {
                "default" => vec![
                    suites::soundness(1, 200, 50),
                    suites::theorem_suite(2, 100),
                    suites::monotonicity(3, 100),
                    suites::sat_axioms(4, 50),
                    suites::non_theorem(),
                ],
                "full" => vec![
                    suites::soundness(1, 1000, 50),
                    suites::theorem_suite(2, 300),
                    suites::monotonicity(3, 300),
                    suites::sat_axioms(4, 50),
                    suites::non_theorem(),
                ],
                other => return Err(usage(format!("unknown corpus {other} (expected default or full)"))),
            };
            let code = if outcomes.iter().all(Outcome::passed) { 0 } else { 1 };
            let out = match cfg.format {
                Format::Text => outcomes
                    .iter()
                    .map(|o| {
                        let status = if o.passed() { "PASS" } else { "FAIL" };
                        let mut line = format!("{:<42} {:>8} {status}", o.name, o.checked);
                        for f in &o.failures {
                            line += &format!("\n    {f}");
                        }
                        line
                    })
                    .collect::<Vec<_>>()
                    .join("\n"),
                _ => pretty(&Value::Array(
                    outcomes
                        .iter()
                        .map(|o| json!({ "suite": o.name, "checked": o.checked, "passed": o.passed(), "failures": o.failures, "notes": o.notes }))
                        .collect(),
                )),
            };
            Ok((code, out))
        }
        Command::ExportDot { model } => Ok((0, export_dot(&read_model(&model)?))),
        Command::Closure { formula: text } => {
            let sig = cfg.signature().map_err(usage)?;
            let f = formula(&text)?;
            let (agents, actions) = f.required_counts();
            let sig = sig.widened(agents, actions);
            let f = expand_all(&f, sig.agent_count()).map_err(usage)?;
            let items = neg_closure(&[f], &sig);
            let out = match cfg.format {
                Format::Text => items.iter().enumerate().map(|(i, g)| format!("{:>4}  {g}", i + 1)).collect::<Vec<_>>().join("\n"),
                _ => pretty(&Value::Array(
                    items.iter().enumerate().map(|(i, g)| json!({ "index": i + 1, "formula": g.to_string() })).collect(),
                )),
            };
            Ok((0, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((code, out)) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{}", out.trim_end());
            ExitCode::from(code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
