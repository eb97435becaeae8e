use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use macdfs_cli::commands::{analyze, load_certificate, oracle, run_examples, verify};
use macdfs_cli::error::CliError;
use macdfs_cli::problem::{LambdaChoice, Problem, ProblemFile};
use macdfs_cli::report::{render_analyze, render_examples, render_oracle, render_verify};
use serde::Serialize;

/// Decide, construct and verify product decoherence-free subspaces.
#[derive(Parser)]
#[command(name = "macdfs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an MxN product code exists and print certificates.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Re-check a certificate (bare, or taken from an analyze JSON report).
    Verify {
        file: PathBuf,
        certificate: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the brute-force zero-block search on every eigenspace.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the bundled worked examples against their known answers.
    Examples {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Args)]
struct Opts {
    /// Local dimension d (required when the file omits it).
    #[arg(long)]
    dims: Option<usize>,
    /// Code dimensions, e.g. 2x2.
    #[arg(long, value_parser = parse_code)]
    code: Option<(usize, usize)>,
    /// Eigenvalue branches to report: +1, -1, both or auto.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Search and verification tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Grid points per angle in the exhaustive scan.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print only the final status.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_code(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s.split_once(['x', 'X']).ok_or("expected MxN")?;
    let m = m.trim().parse().map_err(|_| format!("bad M in '{s}'"))?;
    let n = n.trim().parse().map_err(|_| format!("bad N in '{s}'"))?;
    Ok((m, n))
}

impl Opts {
    fn problem(&self, path: &Path) -> Result<Problem, CliError> {
        let mut f = ProblemFile::load(path)?;
        if let Some(d) = self.dims {
            if f.d.is_some_and(|fd| fd != d) {
                return Err(CliError::Input(format!(
                    "--dims {d} conflicts with d = {} in the file",
                    f.d.unwrap()
                )));
            }
            f.d = Some(d);
        }
        if let Some(c) = self.code {
            f.code_dims = Some(c);
        }
        if let Some(l) = &self.lambda {
            f.lambda = Some(LambdaChoice::parse(l)?);
        }
        if let Some(t) = self.tol {
            f.budget.tol = Some(t);
        }
        if let Some(s) = self.seed {
            f.seed = Some(s);
        }
        if let Some(r) = self.restarts {
            f.budget.restarts = Some(r);
        }
        if let Some(g) = self.grid {
            f.budget.grid_density = Some(g);
        }
        f.resolve()
    }
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("reports serialize")),
        Format::Text => print!("{}", text(value)),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { file, opts } => {
            let p = opts.problem(&file)?;
            let (rep, _) = analyze(&p)?;
            emit(opts.format, &rep, |r| render_analyze(r, opts.quiet));
        }
        Command::Verify {
            file,
            certificate,
            opts,
        } => {
            let p = opts.problem(&file)?;
            let text = std::fs::read_to_string(&certificate)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", certificate.display())))?;
            let code = load_certificate(&text, p.lambda)?;
            let rep = verify(&p, &code, p.budget.tol)?;
            emit(opts.format, &rep, |r| render_verify(r, opts.quiet));
        }
        Command::Oracle { file, opts } => {
            let p = opts.problem(&file)?;
            let rep = oracle(&p)?;
            emit(opts.format, &rep, |r| render_oracle(r, opts.quiet));
        }
        Command::Examples { format, quiet } => {
            let (rep, _) = run_examples()?;
            emit(format, &rep, |r| render_examples(r, quiet));
            if rep.matched != rep.total {
                return Err(CliError::Mismatch(format!(
                    "{} of {} examples do not match",
                    rep.total - rep.matched,
                    rep.total
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
