use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use bergbal_cli::{parse_config_with_default, run_experiment, write_report, Command, Status};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const DEFAULT_OUT: &str = "bergbal-out";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Balance,
    Tbalance,
    Newton,
    Family,
    Expand,
    Beta,
    Fourier,
    Probe,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Balance => Command::Balance,
            Cmd::Tbalance => Command::Tbalance,
            Cmd::Newton => Command::Newton,
            Cmd::Family => Command::Family,
            Cmd::Expand => Command::Expand,
            Cmd::Beta => Command::Beta,
            Cmd::Fourier => Command::Fourier,
            Cmd::Probe => Command::Probe,
        }
    }
}

/// Bergman kernels and balanced metrics on the projective line.
#[derive(Debug, Parser)]
#[command(name = "bergbal", version)]
struct Args {
    command: Cmd,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` and BERGBAL_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reject unknown configuration keys instead of warning.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let wanted = Command::from(args.command);
    let parsed = match parse_config_with_default(&text, Some(wanted), args.strict) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if parsed.config.command != wanted {
        eprintln!(
            "error: config declares command `{}` but `{wanted}` was requested",
            parsed.config.command
        );
        return ExitCode::from(EXIT_USAGE);
    }
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let dir = args
        .out
        .or_else(|| parsed.config.output.dir.clone())
        .or_else(|| std::env::var_os("BERGBAL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let mut report = run_experiment(&parsed.config);
    report.warnings.extend(parsed.warnings);
    match write_report(&report, &dir, parsed.config.output.tables) {
        Ok(paths) => println!("wrote {} file(s) to {}", paths.len(), dir.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    for v in &report.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    match report.status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(EXIT_FAIL),
        Status::Error => ExitCode::from(EXIT_INTERNAL),
    }
}
