use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpassert::pipeline::{run_on_file, PipelineFlags};
use mpassert::presburger::{QeConfig, Solver};
use mpassert::typing::TypingMode;

/// Checker, projector, type-checker and simulator for asserted multiparty
/// session protocols.
#[derive(Parser)]
#[command(name = "mpassert", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Protocol file to check (shorthand for `check`).
    #[command(flatten)]
    check: Option<CheckArgs>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a protocol file and optionally run it (the default command).
    Check(CheckArgs),
    /// Eliminate quantifiers from a formula and print the result.
    Qe(QeArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// The protocol file: a global description followed by one process per
    /// participant.
    file: PathBuf,

    /// Simulate the system after successful verification.
    #[arg(long)]
    run: bool,

    /// Typing discipline for stream 2.
    #[arg(long, value_parser = parse_mode, default_value = "multiparty")]
    mode: TypingMode,

    /// Emit the report as JSON instead of text.
    #[arg(long)]
    json: bool,

    /// Use a seeded random scheduler instead of round robin.
    #[arg(long)]
    seed: Option<u64>,

    /// Treat every assertion as `[-]`.
    #[arg(long)]
    no_assertions: bool,

    /// Step budget for the decision procedure.
    #[arg(long)]
    qe_budget: Option<u64>,

    /// Simulate even when verification failed.
    #[arg(long)]
    force: bool,

    /// Keep running later stages after a failure.
    #[arg(long)]
    keep_going: bool,

    /// Print the trace as JSON after the report.
    #[arg(long)]
    trace_json: bool,

    /// Disable runtime assertion monitoring.
    #[arg(long)]
    no_monitor: bool,
}

#[derive(Args)]
struct QeArgs {
    /// The formula, e.g. "exists x:int. x > c && x < c + 2".
    formula: String,

    /// Step budget for the decision procedure.
    #[arg(long)]
    qe_budget: Option<u64>,

    /// Emit the result as JSON.
    #[arg(long)]
    json: bool,
}

fn parse_mode(s: &str) -> Result<TypingMode, String> {
    match s {
        "binary" => Ok(TypingMode::Binary),
        "multiparty" => Ok(TypingMode::Multiparty),
        other => Err(format!("unknown mode `{other}` (use binary or multiparty)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Some(Command::Check(args)) => check(args),
        Some(Command::Qe(args)) => qe(args),
        None => match cli.check {
            Some(args) => check(args),
            None => {
                eprintln!("usage: mpassert <FILE> or mpassert <COMMAND>; try --help");
                2
            }
        },
    };
    ExitCode::from(code)
}

fn check(args: CheckArgs) -> u8 {
    let flags = PipelineFlags {
        run: args.run,
        mode: args.mode,
        seed: args.seed,
        no_assertions: args.no_assertions,
        qe_budget: args.qe_budget,
        force: args.force,
        keep_going: args.keep_going,
        monitor: !args.no_monitor,
    };
    let report = match run_on_file(&args.file, &flags) {
        Ok(report) => report,
        Err(message) => {
            eprintln!("{message}");
            return 2;
        }
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
    } else {
        print!("{}", report.render_text());
        if args.trace_json {
            if let Some(trace) = report.to_json().get("trace").filter(|t| !t.is_null()) {
                println!("{}", serde_json::to_string(trace).unwrap());
            }
        }
    }
    report.exit_code as u8
}

fn qe(args: QeArgs) -> u8 {
    let formula = match mpassert::parse_formula(&args.formula) {
        Ok(f) => f,
        Err(err) => {
            eprintln!("formula: {err}");
            return 2;
        }
    };
    let solver = match args.qe_budget {
        Some(max_steps) => Solver::with_config(QeConfig { max_steps }),
        None => Solver::new(),
    };
    match solver.eliminate_quantifiers(&formula) {
        Ok(result) => {
            let satisfiable = solver.is_satisfiable(&result.formula);
            let valid = solver.is_valid(&result.formula);
            if args.json {
                let json = serde_json::json!({
                    "input": formula.compact(),
                    "result": result.formula.compact(),
                    "eliminated_quantifiers": result.eliminated_quantifiers,
                    "atom_count": result.atom_count,
                    "satisfiable": satisfiable.ok(),
                    "valid": valid.ok(),
                });
                println!("{}", serde_json::to_string_pretty(&json).unwrap());
            } else {
                println!("Input:       {}", formula.compact());
                println!("Result:      {}", result.formula.compact());
                println!("Eliminated:  {} quantifier(s)", result.eliminated_quantifiers);
                println!("Atoms:       {}", result.atom_count);
                if let (Ok(sat), Ok(valid)) = (satisfiable, valid) {
                    println!("Satisfiable: {sat}");
                    println!("Valid:       {valid}");
                }
            }
            0
        }
        Err(err) => {
            eprintln!("qe: {err}");
            1
        }
    }
}
