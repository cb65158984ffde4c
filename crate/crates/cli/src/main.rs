mod prompt;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cnl_core::dl::Axiom;
use cnl_core::merge::{partition_senses, MergeError, SenseInventory};
use cnl_core::parser::load_ontology;
use cnl_core::pipeline::{Background, PipelineError};
use cnl_core::query::{evaluate, parse_queries, render_answer};
use cnl_core::rdf::Trace;
use cnl_core::templates::parse_templates;
use cnl_core::wsd::{parse_choices, ChoiceProvider, NoPrompt};

use prompt::Prompter;

#[derive(Parser)]
#[command(name = "cnl", version, about = "Merge micro-ontologies, analyse factual stories, query their traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge micro-ontologies into a sense inventory.
    Merge {
        #[arg(required = true)]
        ontologies: Vec<PathBuf>,
        /// Where to write the merge report (default: standard output).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Where to save the sense inventory as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paraphrase, compile and execute a factual text.
    Run {
        text: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Recorded `site = candidate` answers.
        #[arg(long, conflicts_with = "interactive")]
        choices: Option<PathBuf>,
        /// Ask for every open ambiguity on the terminal.
        #[arg(long)]
        interactive: bool,
        /// Save the interactive answers as a choices file.
        #[arg(long, requires = "interactive")]
        record: Option<PathBuf>,
        /// Where to write the trace (`.nq` for quads, JSON otherwise).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Where to write the statement report (default: standard output).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Answer step-qualified queries over a saved trace.
    Query {
        trace: PathBuf,
        queries: PathBuf,
        /// Inventory whose class hierarchy widens type patterns.
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::new(e.exit_code() as u8, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_inventory(path: &Path) -> Result<SenseInventory, Failure> {
    SenseInventory::from_json(&read(path)?).map_err(|e| Failure::new(1, format!("inventory {}: {e}", path.display())))
}

fn merge(ontologies: &[PathBuf], report: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let mut loaded = Vec::new();
    for path in ontologies {
        let o = load_ontology(&read(path)?).map_err(|e| Failure::new(1, format!("parse: {}: {e}", path.display())))?;
        loaded.push(o);
    }
    let inv = partition_senses(&loaded).map_err(|e| {
        let mut message = format!("merge: {e}");
        if let MergeError::MergeInconsistent { log, .. } = &e {
            for i in log {
                let verdict = if i.kept { "kept" } else { "rejected" };
                message.push_str(&format!("\n  {} ⊑ {}: {verdict}; {}", i.sub, i.sup, i.reason));
            }
        }
        let code = match e {
            MergeError::InconsistentInput { .. } | MergeError::MergeInconsistent { .. } | MergeError::Reasoner(_) => 2,
            _ => 1,
        };
        Failure::new(code, message)
    })?;
    emit(report, &inv.report())?;
    if let Some(out) = out {
        write(out, &inv.to_json())?;
    }
    Ok(())
}

struct RunArgs<'a> {
    text: &'a Path,
    inventory: &'a Path,
    templates: Option<&'a Path>,
    choices: Option<&'a Path>,
    interactive: bool,
    record: Option<&'a Path>,
    trace_out: Option<&'a Path>,
    report: Option<&'a Path>,
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let inventory = load_inventory(args.inventory)?;
    let templates = match args.templates {
        Some(p) => parse_templates(&read(p)?).map_err(|e| Failure::new(1, format!("templates: {e}")))?,
        None => Vec::new(),
    };
    let choices = match args.choices {
        Some(p) => parse_choices(&read(p)?).map_err(|e| Failure::new(1, format!("choices: {e}")))?,
        None => Vec::new(),
    };
    let text = read(args.text)?;
    let bg = Background::new(inventory, templates);
    let mut prompter = Prompter::new(io::stdin().lock(), io::stderr());
    let mut silent = NoPrompt;
    let provider: &mut dyn ChoiceProvider = if args.interactive { &mut prompter } else { &mut silent };
    let outcome = bg.analyze(&text, &choices, provider);
    if let Some(path) = args.record {
        write(path, &prompter.transcript())?;
    }
    let analysis = outcome?;
    println!("{}", analysis.paraphrase.trim_end());
    if !analysis.inline.is_empty() {
        println!();
        println!("{}", analysis.inline);
    }
    println!();
    emit(args.report, &analysis.execution.render_report())?;
    if let Some(path) = args.trace_out {
        let trace = &analysis.execution.trace;
        let body = if path.extension().is_some_and(|x| x == "nq") { trace.to_quads() } else { trace.to_json() };
        write(path, &body)?;
    }
    Ok(())
}

fn query(trace: &Path, queries: &Path, inventory: Option<&Path>) -> Result<(), Failure> {
    let body = read(trace)?;
    let parsed = if trace.extension().is_some_and(|x| x == "nq") { Trace::from_quads(&body) } else { Trace::from_json(&body) };
    let trace = parsed.map_err(|e| Failure::new(1, format!("trace: {e}")))?;
    let tbox: Vec<Axiom> = match inventory {
        Some(p) => load_inventory(p)?.merged_tbox,
        None => Vec::new(),
    };
    let qs = parse_queries(&read(queries)?).map_err(|e| Failure::new(1, format!("query: {e}")))?;
    for (i, q) in qs.iter().enumerate() {
        let answers = evaluate(q, &trace, &tbox).map_err(|e| Failure::new(1, format!("query {}: {e}", i + 1)))?;
        if i > 0 {
            println!();
        }
        println!("# Query {}", i + 1);
        println!("{}", render_answer(q, &answers).trim_end());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Merge { ontologies, report, out } => merge(ontologies, report.as_deref(), out.as_deref()),
        Command::Run { text, inventory, templates, choices, interactive, record, trace_out, report } => run(RunArgs {
            text,
            inventory,
            templates: templates.as_deref(),
            choices: choices.as_deref(),
            interactive: *interactive,
            record: record.as_deref(),
            trace_out: trace_out.as_deref(),
            report: report.as_deref(),
        }),
        Command::Query { trace, queries, inventory } => query(trace, queries, inventory.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
