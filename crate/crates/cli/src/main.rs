//! `tinylinks`: run, analyse or legacy-check TinyLinks programs, or fuzz the
//! analyser against the interpreter.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use tinylinks_core::analysis::{Analyzer, Verdict};
use tinylinks_core::concrete::{run_with_budget, RunVerdict, DEFAULT_MAX_STEPS};
use tinylinks_core::frontend::pretty_value;
use tinylinks_core::harness::{check_programs, gen_programs, gen_random, gen_typed, GenConfig};
use tinylinks_core::legacy::{self, render_effects};
use tinylinks_core::{parse, Expr};

const EXIT_OK: u8 = 0;
const EXIT_REJECTED: u8 = 1;
const EXIT_WRONG: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_USAGE: u8 = 4;

/// Depth 4 already has billions of programs.
const MAX_EXHAUSTIVE_DEPTH: usize = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tinylinks",
    version,
    about = "TinyLinks interpreter, analyser and legacy checker"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Evaluation step budget for concrete runs.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a program and print its value and events environment.
    Run(Input),
    /// Run the types-and-effects analysis.
    Analyze(Input),
    /// Check a program with the original type-and-effect rules.
    Legacy(Input),
    /// Compare the three semantics on generated programs.
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
struct Input {
    /// Source file, or `-` for standard input.
    path: PathBuf,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    /// Maximum program depth.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Seed for the random modes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Event predicates used by generated programs.
    #[arg(long, value_delimiter = ',', default_value = "p,q")]
    preds: Vec<String>,
    /// Integer literals used by generated programs.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,1",
        allow_hyphen_values = true
    )]
    ints: Vec<i64>,
    /// Check this many seeded random programs instead of enumerating.
    #[arg(long)]
    random: Option<usize>,
    /// With --random, generate mostly well-typed programs.
    #[arg(long, requires = "random")]
    typed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match &cli.command {
        Command::Run(input) => with_program(input, |p| cmd_run(&cli, p)),
        Command::Analyze(input) => with_program(input, |p| cmd_analyze(&cli, p)),
        Command::Legacy(input) => with_program(input, |p| cmd_legacy(&cli, p)),
        Command::Fuzz(args) => cmd_fuzz(&cli, args),
    };
    ExitCode::from(code)
}

fn read_source(path: &PathBuf) -> io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn with_program(input: &Input, f: impl FnOnce(&Expr) -> u8) -> u8 {
    let name = input.path.display();
    let src = match read_source(&input.path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("tinylinks: {name}: {e}");
            return EXIT_USAGE;
        }
    };
    match parse(&src) {
        Ok(p) => f(&p),
        Err(e) => {
            eprintln!("{name}:{e}");
            EXIT_PARSE
        }
    }
}

fn emit_json(value: &impl Serialize) {
    let mut out = io::stdout().lock();
    let _ = serde_json::to_writer_pretty(&mut out, value);
    let _ = writeln!(out);
}

fn cmd_run(cli: &Cli, program: &Expr) -> u8 {
    let r = run_with_budget(program, cli.max_steps);
    if cli.json {
        let events: BTreeMap<&String, (i64, String)> = r
            .events
            .iter()
            .map(|(q, (d, m))| (q, (*d, m.to_string())))
            .collect();
        emit_json(&json!({
            "verdict": r.verdict,
            "value": r.value,
            "events": events,
            "steps": r.steps,
        }));
    } else {
        println!("{r}");
    }
    match r.verdict {
        RunVerdict::WrongFree => EXIT_OK,
        RunVerdict::Wrong => EXIT_WRONG,
        RunVerdict::Skipped => EXIT_REJECTED,
    }
}

fn cmd_analyze(cli: &Cli, program: &Expr) -> u8 {
    let r = Analyzer::new().analyze(program);
    if cli.json {
        emit_json(&r.view());
    } else {
        println!("{r}");
        match (&r.reason, &r.message) {
            (Some(reason), Some(m)) => println!("verdict: unsafe ({}): {m}", reason.as_str()),
            _ => println!("verdict: safe"),
        }
    }
    match r.verdict {
        Verdict::Safe => EXIT_OK,
        Verdict::Unsafe => EXIT_REJECTED,
    }
}

fn cmd_legacy(cli: &Cli, program: &Expr) -> u8 {
    let r = legacy::check_program(program);
    if cli.json {
        let body = match &r.outcome {
            Ok(j) => json!({
                "accepted": r.accepted,
                "type": j.ty.to_string(),
                "effects": j.post.iter().map(|ev| format!("{}({})", ev.pred, pretty_value(&ev.arg))).collect::<Vec<_>>(),
                "judgment": r.to_string(),
            }),
            Err(e) => json!({
                "accepted": false,
                "rule": e.rule,
                "premise": e.premise,
                "judgment": r.to_string(),
            }),
        };
        emit_json(&body);
    } else {
        println!("{r}");
        if let Ok(j) = &r.outcome {
            if r.accepted && !j.post.is_empty() {
                println!("effects: {}", render_effects(&j.post));
            }
        }
    }
    if r.accepted {
        EXIT_OK
    } else {
        EXIT_REJECTED
    }
}

fn cmd_fuzz(cli: &Cli, args: &FuzzArgs) -> u8 {
    if args.depth == 0 || args.preds.is_empty() || args.ints.is_empty() {
        eprintln!("tinylinks: fuzz needs a positive depth, predicates and integer literals");
        return EXIT_USAGE;
    }
    if args.random.is_none() && args.depth > MAX_EXHAUSTIVE_DEPTH {
        eprintln!(
            "tinylinks: exhaustive enumeration is limited to depth {MAX_EXHAUSTIVE_DEPTH}; use --random N for deeper programs"
        );
        return EXIT_USAGE;
    }
    let cfg = GenConfig {
        max_depth: args.depth,
        preds: args.preds.clone(),
        ints: args.ints.clone(),
        seed: args.seed,
        max_steps: cli.max_steps,
    };
    let programs = match (args.random, args.typed) {
        (Some(n), true) => gen_typed(&cfg, n),
        (Some(n), false) => gen_random(&cfg, n),
        (None, _) => gen_programs(&cfg),
    };
    let report = check_programs(&programs, cfg.max_steps);
    if cli.json {
        emit_json(&json!({
            "config": cfg,
            "mode": match (args.random, args.typed) {
                (Some(_), true) => "typed",
                (Some(_), false) => "random",
                (None, _) => "exhaustive",
            },
            "counts": report.counts,
            "analyzer_violations": report.analyzer_violations,
            "effects_violations": report.effects_violations,
            "legacy_violations": report.legacy_violations,
            "skipped": report.skipped,
        }));
    } else {
        let mut out = io::stdout().lock();
        for line in report.lines() {
            if writeln!(out, "{line}").is_err() {
                break;
            }
        }
    }
    if report.analyzer_sound() {
        EXIT_OK
    } else {
        eprintln!(
            "tinylinks: {} analyser violations",
            report.analyzer_violations.len() + report.effects_violations.len()
        );
        EXIT_REJECTED
    }
}
