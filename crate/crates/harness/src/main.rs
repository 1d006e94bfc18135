use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qms_core::SignConvention;
use qms_harness::decomposition::{decompose_spec, emit_decomposition};
use qms_harness::generate::{generate, InstanceParameters, InstanceSpec};
use qms_harness::spec::from_json;
use qms_harness::{emit, emit_spec, parse_spec, run, Format, RunError, RunOptions, TOL_SCALE_ENV};

#[derive(Parser)]
#[command(
    name = "qms",
    version,
    about = "Check quantum Markov semigroups against their induced Hilbert–Schmidt picture"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a problem spec and emit a report.
    Check(SpecArgs),
    /// Emit the spectral decomposition of L̃ − I and the derived GKSL form.
    Decompose(SpecArgs),
    /// Expand an instance spec into a problem spec.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Minus,
    Plus,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Overrides the seed in the input.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every verdict threshold.
    #[arg(long, env = TOL_SCALE_ENV, default_value_t = 1.0)]
    tol_scale: f64,
    /// Sign in the ccp sandwich (Id ∓ T_e).
    #[arg(long, value_enum, default_value = "minus")]
    sign_convention: SignArg,
    /// Largest dimension for the ccp check.
    #[arg(long, default_value_t = 6)]
    max_dim: usize,
    /// Record per-check wall time (reports are then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SpecArgs {
    /// Problem spec (JSON); `-` or absent reads stdin.
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance spec (JSON); omit to build one from the flags below.
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    kind: Option<String>,
    #[arg(long, conflicts_with = "input")]
    dim: Option<usize>,
    #[arg(long, conflicts_with = "input")]
    num_jumps: Option<usize>,
    #[arg(long, conflicts_with = "input")]
    hamiltonian_scale: Option<f64>,
    #[command(flatten)]
    common: Common,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            tol_scale: self.tol_scale,
            sign_convention: match self.sign_convention {
                SignArg::Minus => SignConvention::Minus,
                SignArg::Plus => SignConvention::Plus,
            },
            max_dim: self.max_dim,
            timing: self.timing,
            seed: self.seed,
        }
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<Vec<u8>, String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read(p).map_err(|e| format!("{}: {e}", p.display())),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).map_err(|e| format!("stdin: {e}"))?;
            Ok(buf)
        }
    }
}

fn write_out(bytes: &[u8]) {
    let mut out = io::stdout().lock();
    // A closed pipe is not worth a panic.
    let _ = out.write_all(bytes).and_then(|_| out.flush());
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("qms: {msg}");
    ExitCode::from(code)
}

fn run_error(e: RunError) -> ExitCode {
    fail(e.exit_code() as u8, e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(args) => {
            let bytes = match read_input(&args.input) {
                Ok(b) => b,
                Err(e) => return fail(2, e),
            };
            let spec = match parse_spec(&bytes) {
                Ok(s) => s,
                Err(e) => return fail(2, e),
            };
            match run(&spec, &args.common.options()) {
                Ok(report) => {
                    write_out(&emit(&report, args.common.format()));
                    ExitCode::from(report.exit_code as u8)
                }
                Err(e) => run_error(e),
            }
        }
        Command::Decompose(args) => {
            let bytes = match read_input(&args.input) {
                Ok(b) => b,
                Err(e) => return fail(2, e),
            };
            let spec = match parse_spec(&bytes) {
                Ok(s) => s,
                Err(e) => return fail(2, e),
            };
            match decompose_spec(&spec, &args.common.options()) {
                Ok(r) => {
                    write_out(&emit_decomposition(&r, args.common.format()));
                    ExitCode::SUCCESS
                }
                Err(e) => run_error(e),
            }
        }
        Command::Generate(args) => {
            let mut inst = if args.input.is_some() {
                let bytes = match read_input(&args.input) {
                    Ok(b) => b,
                    Err(e) => return fail(2, e),
                };
                match from_json::<InstanceSpec>(&bytes) {
                    Ok(i) => i,
                    Err(e) => return fail(2, e),
                }
            } else {
                let (Some(kind), Some(dim)) = (args.kind.clone(), args.dim) else {
                    return fail(2, "generate needs an instance spec file or both --kind and --dim");
                };
                InstanceSpec {
                    dim,
                    kind,
                    parameters: InstanceParameters {
                        num_jumps: args.num_jumps,
                        hamiltonian_scale: args.hamiltonian_scale,
                        ..Default::default()
                    },
                    seed: 0,
                }
            };
            if let Some(s) = args.common.seed {
                inst.seed = s;
            }
            match generate(&inst) {
                Ok(spec) => {
                    write_out(&emit_spec(&spec));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(2, e),
            }
        }
    }
}
