//! fdtrace command line: solve models with trace emission and live
//! analyzers, analyze recorded traces, and cross-check with the oracle.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fdtrace_core::analyzers::{
    build_search_tree, detect_useless_activations, emit_dot, evolution_matrix, oracle_solve,
    rows_to_csv, validate_trace, EvolutionBuilder, StatsCollector, TreeBuilder, UselessTracker,
    Validator,
};
use fdtrace_core::model::{generate_nqueens, generate_random, generate_sorted, parse_model, Model};
use fdtrace_core::search::{solve_model, SolveOptions, ValStrategy, VarStrategy};
use fdtrace_core::trace::{
    read_jsonl, CompactWriter, FanoutSink, JsonLinesWriter, TraceEvent, TraceSink,
};

#[derive(Parser)]
#[command(name = "fdtrace", version, about = "Traceable finite-domain constraint solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model: propagate, label, print solutions
    Solve(SolveArgs),
    /// Run an analyzer over a recorded .fdtrace.jsonl stream
    Analyze(AnalyzeArgs),
    /// Enumerate all solutions by brute force
    Oracle(SourceArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in model: sorted, nqueens:<n> or random:<seed>
    #[arg(long, value_name = "NAME[:N]", conflicts_with = "model")]
    builtin: Option<String>,
    /// Model file (.fd)
    #[arg(short, long, value_name = "PATH")]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Trace destination: a path, or '-' for stdout
    #[arg(long, value_name = "PATH|-")]
    trace: Option<String>,
    /// Trace format (jsonl is the default; selecting a format without
    /// --trace sends the trace to stdout)
    #[arg(long, value_name = "jsonl|compact")]
    format: Option<String>,
    /// Live analyzers to attach, comma separated:
    /// tree,evolution,stats,useless,validate
    #[arg(long, value_delimiter = ',', value_name = "KIND[,KIND]")]
    analyze: Vec<String>,
    /// Stop after this many solutions
    #[arg(long, value_name = "N")]
    max_solutions: Option<usize>,
    /// Override the model's variable strategy:
    /// input_order|first_fail|middle_first
    #[arg(long, value_name = "STRATEGY")]
    var_strategy: Option<String>,
    /// Override the model's value strategy: min|middle
    #[arg(long, value_name = "STRATEGY")]
    val_strategy: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Analyzer kind: tree, evolution, stats, useless or validate
    kind: String,
    /// Input trace (.fdtrace.jsonl)
    input: PathBuf,
    /// Output path (stdout when omitted)
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn load_model(source: &SourceArgs) -> Result<Model> {
    if let Some(spec) = &source.builtin {
        return builtin_model(spec);
    }
    let Some(path) = &source.model else {
        bail!("no model given: use --builtin or --model");
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read model file {}", path.display()))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_model(&text, &name).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn builtin_model(spec: &str) -> Result<Model> {
    let (name, arg) = match spec.split_once(':') {
        Some((name, arg)) => (name, Some(arg)),
        None => (spec, None),
    };
    match (name, arg) {
        ("sorted", None) => Ok(generate_sorted()),
        ("nqueens", Some(n)) => {
            let n: u32 = n.parse().with_context(|| format!("bad queens count '{n}'"))?;
            generate_nqueens(n).map_err(|e| anyhow!(e))
        }
        ("random", Some(seed)) => {
            let seed: u64 = seed.parse().with_context(|| format!("bad seed '{seed}'"))?;
            Ok(generate_random(seed))
        }
        _ => bail!("unknown builtin '{spec}' (expected sorted, nqueens:<n> or random:<seed>)"),
    }
}

enum WriterSink {
    Jsonl(JsonLinesWriter<Box<dyn Write>>),
    Compact(CompactWriter<Box<dyn Write>>),
}

impl TraceSink for WriterSink {
    fn emit(&mut self, event: &TraceEvent) {
        match self {
            WriterSink::Jsonl(w) => w.emit(event),
            WriterSink::Compact(w) => w.emit(event),
        }
    }
}

impl WriterSink {
    fn finish(self) -> io::Result<()> {
        match self {
            WriterSink::Jsonl(w) => w.finish().map(|_| ()),
            WriterSink::Compact(w) => w.finish().map(|_| ()),
        }
    }
}

enum LiveAnalyzer {
    Tree(TreeBuilder),
    Evolution(EvolutionBuilder),
    Stats(StatsCollector),
    Useless(UselessTracker),
    Validate(Validator),
}

impl LiveAnalyzer {
    fn new(kind: &str) -> Result<Self> {
        match kind {
            "tree" => Ok(LiveAnalyzer::Tree(TreeBuilder::new())),
            "evolution" => Ok(LiveAnalyzer::Evolution(EvolutionBuilder::new())),
            "stats" => Ok(LiveAnalyzer::Stats(StatsCollector::new())),
            "useless" => Ok(LiveAnalyzer::Useless(UselessTracker::new())),
            "validate" => Ok(LiveAnalyzer::Validate(Validator::new())),
            other => bail!("unknown analyzer '{other}'"),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            LiveAnalyzer::Tree(_) => "tree",
            LiveAnalyzer::Evolution(_) => "evolution",
            LiveAnalyzer::Stats(_) => "stats",
            LiveAnalyzer::Useless(_) => "useless",
            LiveAnalyzer::Validate(_) => "validate",
        }
    }

    fn finish(self) -> Result<String> {
        match self {
            LiveAnalyzer::Tree(b) => Ok(emit_dot(&b.finish()?)),
            LiveAnalyzer::Evolution(b) => Ok(rows_to_csv(&b.finish())),
            LiveAnalyzer::Stats(b) => Ok(b.finish().render()),
            LiveAnalyzer::Useless(b) => Ok(render_activations(&b.finish())),
            LiveAnalyzer::Validate(b) => Ok(b.finish().render()),
        }
    }
}

impl TraceSink for LiveAnalyzer {
    fn emit(&mut self, event: &TraceEvent) {
        match self {
            LiveAnalyzer::Tree(b) => b.emit(event),
            LiveAnalyzer::Evolution(b) => b.emit(event),
            LiveAnalyzer::Stats(b) => b.emit(event),
            LiveAnalyzer::Useless(b) => b.emit(event),
            LiveAnalyzer::Validate(b) => b.emit(event),
        }
    }
}

fn render_activations(records: &[fdtrace_core::analyzers::ActivationRecord]) -> String {
    if records.is_empty() {
        return "no useless activations\n".to_string();
    }
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "constraint={} select_chrono={} reduces={} terminal={}\n",
            r.constraint_id,
            r.select_chrono,
            r.reduce_count,
            r.terminal.display_name().to_lowercase()
        ));
    }
    out
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let model = load_model(&args.source)?;
    let mut options = SolveOptions {
        max_solutions: args.max_solutions,
        ..Default::default()
    };
    if let Some(vs) = &args.var_strategy {
        options.var_strategy = Some(VarStrategy::from_str(vs).map_err(|e| anyhow!(e))?);
    }
    if let Some(vs) = &args.val_strategy {
        options.val_strategy = Some(ValStrategy::from_str(vs).map_err(|e| anyhow!(e))?);
    }

    let format = match args.format.as_deref() {
        None | Some("jsonl") => "jsonl",
        Some("compact") => "compact",
        Some(other) => bail!("unknown trace format '{other}' (expected jsonl or compact)"),
    };
    // A format without a destination means: trace to stdout.
    let destination = match (&args.trace, &args.format) {
        (Some(dest), _) => Some(dest.clone()),
        (None, Some(_)) => Some("-".to_string()),
        (None, None) => None,
    };
    let mut writer = match destination {
        None => None,
        Some(dest) => {
            let out: Box<dyn Write> = if dest == "-" {
                Box::new(io::stdout())
            } else {
                Box::new(BufWriter::new(File::create(&dest).with_context(|| {
                    format!("cannot create trace file {dest}")
                })?))
            };
            Some(match format {
                "compact" => WriterSink::Compact(CompactWriter::new(out)),
                _ => WriterSink::Jsonl(JsonLinesWriter::new(out)),
            })
        }
    };

    let mut analyzers: Vec<LiveAnalyzer> = args
        .analyze
        .iter()
        .map(|kind| LiveAnalyzer::new(kind))
        .collect::<Result<_>>()?;

    let summary = {
        let mut sinks: Vec<&mut dyn TraceSink> = Vec::new();
        if let Some(w) = writer.as_mut() {
            sinks.push(w);
        }
        for analyzer in analyzers.iter_mut() {
            sinks.push(analyzer);
        }
        let mut fanout = FanoutSink::new(sinks);
        solve_model(&model, &options, &mut fanout, &mut |solution| {
            println!("{solution}");
        })?
    };

    if let Some(w) = writer.take() {
        w.finish().context("trace output failed")?;
    }
    for analyzer in analyzers {
        let kind = analyzer.kind();
        let rendered = analyzer.finish()?;
        println!("--- {kind} ---");
        print!("{rendered}");
    }

    Ok(if summary.solutions > 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn read_trace(path: &PathBuf) -> Result<Vec<TraceEvent>> {
    let file = File::open(path).with_context(|| format!("cannot open trace {}", path.display()))?;
    read_jsonl(BufReader::new(file))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_output(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let events = read_trace(&args.input)?;
    let mut exit = ExitCode::SUCCESS;
    let rendered = match args.kind.as_str() {
        "tree" => emit_dot(&build_search_tree(&events).map_err(|e| anyhow!(e))?),
        "evolution" => rows_to_csv(&evolution_matrix(&events)),
        "stats" => {
            let mut collector = StatsCollector::new();
            for event in &events {
                collector.observe(event);
            }
            collector.finish().render()
        }
        "useless" => render_activations(&detect_useless_activations(&events)),
        "validate" => {
            let report = validate_trace(&events);
            if !report.is_ok() {
                exit = ExitCode::from(1);
            }
            report.render()
        }
        other => bail!("unknown analyzer '{other}' (expected tree, evolution, stats, useless or validate)"),
    };
    write_output(&args.output, &rendered)?;
    Ok(exit)
}

fn cmd_oracle(source: &SourceArgs) -> Result<ExitCode> {
    let model = load_model(source)?;
    let solutions = oracle_solve(&model).map_err(|e| anyhow!(e))?;
    for solution in &solutions {
        println!("{solution}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("fdtrace: {err:#}");
            ExitCode::from(2)
        }
    }
}
