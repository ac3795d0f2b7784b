//! Command-line definitions and dispatch for the `ahp` binary.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ahp_core::banking::{reconstructed_banking_model, validate_against_paper, BUNDLED_MODEL};
use ahp_core::document::{load_model, load_session, save_model, save_session, Model};
use ahp_core::elicitation::JudgmentSet;
use ahp_core::report::{export_report, ExportFormat};
use ahp_core::{build_hierarchy, ElicitationSession, Mode, Node, NodeKind, SolverOptions};
use clap::{Args, Parser, Subcommand};

use crate::ask::{run_ask, AskOutcome};
use crate::ops::{self, to_pretty, Failure, SensitivityRequest};
use crate::server::{self, AppState, SessionStore, DEFAULT_BIND};

#[derive(Debug, Parser)]
#[command(name = "ahp", version, about = "Build AHP models, elicit judgments and compute priorities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a new model document with every judgment left blank.
    New(NewArgs),
    /// Answer a model's pairwise comparisons interactively.
    Ask(AskArgs),
    /// Derive priorities, synthesize and print a report.
    Compute(ComputeArgs),
    /// Change one top-level criterion weight and show the effect.
    Sensitivity(SensitivityArgs),
    /// Check the built-in banking model against its published table.
    ValidatePaper(ValidateArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Power-iteration stopping tolerance (L1 change between iterates).
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> Result<SolverOptions, Failure> {
        if !(self.tolerance > 0.0) || self.max_iter == 0 {
            return Err(Failure::new("priority", "--tolerance must be positive and --max-iter at least 1"));
        }
        Ok(SolverOptions { tolerance: self.tolerance, max_iter: self.max_iter })
    }
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Model document, `-` for stdin.
    #[arg(required_unless_present = "banking", conflicts_with = "banking")]
    pub model: Option<PathBuf>,
    /// Use the bundled e-banking security policy model.
    #[arg(long)]
    pub banking: bool,
}

#[derive(Debug, Args)]
pub struct NewArgs {
    /// Write the bundled e-banking model instead of a blank one.
    #[arg(long, conflicts_with_all = ["criteria", "alternatives", "goal"])]
    pub banking: bool,
    #[arg(long, default_value = "Goal")]
    pub goal: String,
    /// Comma-separated criterion labels.
    #[arg(long, value_delimiter = ',', required_unless_present = "banking")]
    pub criteria: Vec<String>,
    /// Comma-separated alternative labels.
    #[arg(long, value_delimiter = ',', required_unless_present = "banking")]
    pub alternatives: Vec<String>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AskArgs {
    /// Model document.
    #[arg(required_unless_present = "banking", conflicts_with = "banking")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub banking: bool,
    /// Session file; resumed if it exists, written on exit.
    #[arg(long)]
    pub session: PathBuf,
    /// Accept any positive ratio instead of the 1-9 scale.
    #[arg(long)]
    pub continuous: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Use this session's answers instead of the model's judgments.
    #[arg(long)]
    pub session: Option<PathBuf>,
    #[arg(long, default_value = "structured")]
    pub format: ExportFormat,
    /// Digits after the decimal point (tabular and text default to 6).
    #[arg(long)]
    pub decimals: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long)]
    pub session: Option<PathBuf>,
    /// Top-level criterion id.
    #[arg(long)]
    pub criterion: String,
    /// New local weight in [0, 1].
    #[arg(long)]
    pub weight: f64,
    /// Also sweep the weight over [0, 1] in this many steps.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value = "text")]
    pub format: ExportFormat,
    #[arg(long)]
    pub decimals: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Validate this model document instead of the weights reconstructed
    /// from the table.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Print the checks as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "AHP_BIND", default_value = DEFAULT_BIND)]
    pub bind: String,
    /// Mirror models and sessions to this directory and reload them on start.
    #[arg(long)]
    pub snapshot_dir: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn read_input(path: &Path, stdin: &mut dyn BufRead) -> Result<Vec<u8>, Failure> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        stdin.read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, bytes).map_err(|e| Failure::new("io", format!("{}: {e}", p.display())))
        }
        _ => Ok(out.write_all(bytes)?),
    }
}

fn load_source(
    model: Option<&Path>,
    banking: bool,
    opts: &SolverOptions,
    stdin: &mut dyn BufRead,
) -> Result<Model, Failure> {
    let bytes = match (model, banking) {
        (_, true) => BUNDLED_MODEL.as_bytes().to_vec(),
        (Some(p), false) => read_input(p, stdin)?,
        (None, false) => return Err(Failure::new("usage", "no model given")),
    };
    Ok(load_model(&bytes, opts)?)
}

fn load_session_for(path: Option<&Path>, model: &Model) -> Result<Option<ElicitationSession>, Failure> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| Failure::new("io", format!("{}: {e}", p.display())));
    path.map(|p| Ok(load_session(&read(p)?, Some(&model.hash()))?)).transpose()
}

fn slug(label: &str) -> String {
    let s: String = label
        .trim()
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

/// goal -> criteria -> alternatives with every judgment blank.
pub fn scaffold(name: Option<String>, goal: &str, criteria: &[String], alternatives: &[String]) -> Result<Model, Failure> {
    let crit_ids: Vec<String> = criteria.iter().map(|c| slug(c)).collect();
    let alt_ids: Vec<String> = alternatives.iter().map(|a| slug(a)).collect();
    let goal_id = slug(goal);
    let mut nodes = vec![Node::new(goal_id.clone(), goal.trim(), NodeKind::Goal).with_children(crit_ids.clone())];
    for (id, label) in crit_ids.iter().zip(criteria) {
        nodes.push(Node::new(id.as_str(), label.trim(), NodeKind::Criterion).with_children(alt_ids.clone()));
    }
    for (id, label) in alt_ids.iter().zip(alternatives) {
        nodes.push(Node::new(id.as_str(), label.trim(), NodeKind::Alternative));
    }
    let h = build_hierarchy(nodes)?;
    let partial = h.internal_nodes().into_iter().map(|n| JudgmentSet::new(n.id.clone(), n.children.clone())).collect();
    let mut model = Model::new(h);
    model.name = name;
    model.partial = partial;
    Ok(model)
}

/// Runs one command. `input` and `out` stand in for stdin and stdout.
pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::New(a) => {
            let bytes = if a.banking {
                BUNDLED_MODEL.as_bytes().to_vec()
            } else {
                save_model(&scaffold(a.name, &a.goal, &a.criteria, &a.alternatives)?)
            };
            write_output(a.output.as_deref(), &bytes, out)
        }
        Command::Ask(a) => {
            let opts = a.solver.options()?;
            let model = load_source(a.model.as_deref(), a.banking, &opts, &mut std::io::empty())?;
            let mode = if a.continuous { Mode::Continuous } else { Mode::Discrete };
            let mut session = if a.session.exists() {
                let s = load_session(&std::fs::read(&a.session)?, Some(&model.hash()))?;
                if a.continuous && s.mode != Mode::Continuous {
                    return Err(Failure::new("elicitation", "existing session is discrete; --continuous cannot change it"));
                }
                s
            } else {
                let id = a.session.file_stem().and_then(|s| s.to_str()).unwrap_or("session").to_string();
                ElicitationSession::new(id, model.hash(), &model.hierarchy, mode)
            };
            let outcome = run_ask(&model.hierarchy, &mut session, &opts, input, out);
            std::fs::write(&a.session, save_session(&session))?;
            match outcome? {
                AskOutcome::Complete => writeln!(out, "Session complete; saved to {}", a.session.display())?,
                AskOutcome::Stopped => writeln!(
                    out,
                    "Saved {} with {} comparisons pending",
                    a.session.display(),
                    session.pending().len()
                )?,
            }
            Ok(())
        }
        Command::Compute(a) => {
            let opts = a.solver.options()?;
            let model = load_source(a.source.model.as_deref(), a.source.banking, &opts, input)?;
            let session = load_session_for(a.session.as_deref(), &model)?;
            let report = ops::results(&model, session.as_ref(), &opts)?;
            let bytes = export_report(&report, a.format, a.decimals)?;
            write_output(a.output.as_deref(), &bytes, out)
        }
        Command::Sensitivity(a) => {
            let opts = a.solver.options()?;
            let model = load_source(a.source.model.as_deref(), a.source.banking, &opts, input)?;
            let session = load_session_for(a.session.as_deref(), &model)?;
            let req = SensitivityRequest { criterion: a.criterion, weight: a.weight, steps: a.steps };
            let doc = ops::sensitivity_query(&model, session.as_ref(), &req, &opts)?;
            let d = a.decimals.unwrap_or(ahp_core::report::DEFAULT_DECIMALS);
            match a.format {
                ExportFormat::Structured => out.write_all(&to_pretty(&doc))?,
                ExportFormat::Tabular => {
                    let label = |id: &str| doc.report.labels.get(id).cloned().unwrap_or_else(|| id.to_string());
                    match &doc.sweep {
                        Some(sweep) => {
                            let names: Vec<String> = doc.baseline.iter().map(|s| label(&s.id)).collect();
                            writeln!(out, "weight,{}", names.join(","))?;
                            for p in sweep {
                                let cells: Vec<String> = p.scores.iter().map(|x| format!("{x:.d$}")).collect();
                                writeln!(out, "{:.d$},{}", p.weight, cells.join(","))?;
                            }
                        }
                        None => {
                            writeln!(out, "alternative,before,after")?;
                            for (b, a) in doc.baseline.iter().zip(&doc.report.alternatives) {
                                writeln!(out, "{},{:.d$},{:.d$}", label(&b.id), b.score, a.score)?;
                            }
                        }
                    }
                }
                ExportFormat::Text => {
                    let label = |id: &str| doc.report.labels.get(id).cloned().unwrap_or_else(|| id.to_string());
                    writeln!(out, "{} set to {:.d$}", label(&doc.criterion), doc.weight)?;
                    writeln!(out, "{:<24} {:>12} {:>12}", "alternative", "before", "after")?;
                    for (b, a) in doc.baseline.iter().zip(&doc.report.alternatives) {
                        writeln!(out, "{:<24} {:>12.d$} {:>12.d$}", label(&b.id), b.score, a.score)?;
                    }
                    if doc.rank_changes.is_empty() {
                        writeln!(out, "No rank changes.")?;
                    }
                    for c in &doc.rank_changes {
                        writeln!(out, "{} moves from rank {} to {}", label(&c.id), c.before, c.after)?;
                    }
                }
            }
            Ok(())
        }
        Command::ValidatePaper(a) => {
            let start = Instant::now();
            let h = match &a.model {
                Some(p) => load_model(&read_input(p, input)?, &SolverOptions::default())?.complete_hierarchy()?.clone(),
                None => reconstructed_banking_model(),
            };
            let v = validate_against_paper(&h);
            let elapsed = start.elapsed();
            if a.json {
                out.write_all(&to_pretty(&v))?;
            } else {
                for c in &v.checks {
                    let mark = if c.passed { "ok  " } else { "FAIL" };
                    match (c.expected, c.actual) {
                        (Some(e), Some(x)) => writeln!(
                            out,
                            "{mark} {:<34} expected {e:.3}  got {x:.6}  diff {:+.6}",
                            c.name,
                            x - e
                        )?,
                        _ => writeln!(out, "{mark} {:<34} {}", c.name, c.note.as_deref().unwrap_or(""))?,
                    }
                }
                let passed = v.checks.iter().filter(|c| c.passed).count();
                let verdict = if v.passed() { "PASS" } else { "FAIL" };
                writeln!(
                    out,
                    "{verdict}: {passed}/{} checks within 0.002 ({:.1} ms)",
                    v.checks.len(),
                    elapsed.as_secs_f64() * 1e3
                )?;
            }
            if v.passed() {
                Ok(())
            } else {
                Err(Failure::new("banking", format!("{} checks failed", v.failures().count())))
            }
        }
        Command::Serve(a) => {
            let opts = a.solver.options()?;
            let store = SessionStore::new(a.snapshot_dir);
            let restored = store.restore()?;
            if restored > 0 {
                eprintln!("restored {restored} sessions");
            }
            let state = Arc::new(AppState::new(store, opts)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(&a.bind, state))
        }
    }
}
