//! `oblig`: check process models against obligations from the command line.
//!
//! Exit codes: 0 when the verdict (or verification) holds, 1 when it does
//! not, 2 on usage, input or engine errors.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use oblig_core::bench::{run_suite, write_csv, Suite};
use oblig_core::io::{load_model, load_rules, save_model, save_rules};
use oblig_core::{
    build_interpretation_model, check, classify_variant, derive_trace, parse_formula, verify_reduction_steps,
    CheckOptions, EngineKind, Error, FastPathError, Mode, WfNet, DEFAULT_EXECUTION_CAP,
};

#[derive(Parser)]
#[command(name = "oblig", version, about = "Compliance checking of annotated process models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a model as fully, partially or non compliant with a rule set.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        mode: Mode,
        #[arg(long, default_value = "brute")]
        engine: EngineKind,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_EXECUTION_CAP)]
        cap: u64,
        /// Any deadline state before the achieving state violates an achievement instance.
        #[arg(long)]
        strict_deadline: bool,
    },
    /// Build the interpretation model and rules for a formula.
    Reduce {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_rules: PathBuf,
        /// Run the proof-step checks on the built instance.
        #[arg(long)]
        verify: bool,
    },
    /// Print executions and traces of a model, one row each.
    Enumerate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Print the variant tag of a rule set.
    Classify {
        #[arg(long)]
        rules: PathBuf,
    },
    /// Time the engines and write a CSV report.
    Bench {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check {
            model,
            rules,
            mode,
            engine,
            jobs,
            cap,
            strict_deadline,
        } => {
            let m = load_model(&model)?;
            let rs = load_rules(&rules)?;
            let opts = CheckOptions {
                jobs: jobs.max(1),
                cap,
                strict_deadline,
                engine,
            };
            let report = check(&m, &rs, mode, &opts)?;
            println!("{}", report.to_json());
            if let Some(w) = &report.witness {
                let steps: Vec<usize> = w.execution.iter().filter_map(|id| m.task_index(id)).collect();
                let tr = derive_trace(&m, &oblig_core::Execution::new(steps));
                eprintln!("witness: {}", tr.table_row());
            }
            Ok(exit(report.verdict))
        }
        Command::Reduce {
            formula,
            out_model,
            out_rules,
            verify,
        } => {
            let f = parse_formula(&formula).with_context(|| format!("cannot parse formula `{formula}`"))?;
            let inst = build_interpretation_model(&f)?;
            save_model(&out_model, &inst.model)?;
            save_rules(&out_rules, &inst.rules)?;
            if !verify {
                return Ok(ExitCode::SUCCESS);
            }
            let diag = verify_reduction_steps(&f)?;
            println!("{diag}");
            Ok(exit(diag.all_passed()))
        }
        Command::Enumerate { model, limit } => {
            let m = load_model(&model)?;
            let net = WfNet::compile(&m);
            for e in net.executions().take(limit.unwrap_or(usize::MAX)) {
                println!("{}", derive_trace(&m, &e).table_row());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { rules } => {
            println!("{}", classify_variant(&load_rules(&rules)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            suite,
            n_min,
            n_max,
            out,
            jobs,
        } => {
            let opts = CheckOptions {
                jobs: jobs.max(1),
                ..CheckOptions::default()
            };
            let records = run_suite(suite, n_min, n_max, &opts)?;
            let file = File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            write_csv(BufWriter::new(file), &records).with_context(|| format!("cannot write {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::FastPath(FastPathError::WrongVariant(tag))) => {
                    let msg = serde_json::json!({
                        "error": "WrongVariant",
                        "variant": tag.to_string(),
                        "message": e.to_string(),
                    });
                    eprintln!("{msg}");
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(2)
        }
    }
}
