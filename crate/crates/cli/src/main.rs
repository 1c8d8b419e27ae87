//! `abtrust`: compute center points and global trust, reproduce the
//! reference tables, analyse matrices and simulate distributed runs.

mod commands;
mod manifest;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use absolute_trust::golden::EXAMPLE_MATRIX;
use absolute_trust::simulator::NetworkSpec;
use clap::{Args, Parser, Subcommand};

use commands::{default_network, execute, exit, Failure};
use manifest::{parse_alpha, CommandKind, OutputFormat, RunManifest};

#[derive(Parser)]
#[command(name = "abtrust", version, about = "Absolute trust for peer-to-peer networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate to the center point of the received-ratings matrix.
    CenterPoint(CenterArgs),
    /// Iterate to the global trust vector.
    Solve(SolveArgs),
    /// Recompute the five reference tables and compare every cell.
    VerifyPaper(VerifyArgs),
    /// Run the error-dynamics and center-point property checks.
    Analyze(AnalyzeArgs),
    /// Compare synchronous and asynchronous distributed runs.
    Simulate(SimulateArgs),
    /// Execute a saved run manifest.
    Run(RunArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Rating matrix file (CSV or JSON); row i holds the ratings given by peer i.
    #[arg(long, conflicts_with = "example")]
    matrix: Option<PathBuf>,
    /// Use the built-in 4-peer example matrix.
    #[arg(long)]
    example: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save the manifest describing this run.
    #[arg(long)]
    save_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct IterationArgs {
    /// Stop once the ∞-norm step falls below this (required).
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap [default: 1000].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Initial trust vector, e.g. `1,2,3,4` (required).
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    initial: Option<Vec<f64>>,
}

#[derive(Args)]
struct CenterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    iteration: IterationArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Weight of the second-moment factor, e.g. `1/3` or `0.25` (required).
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<f64>,
    #[command(flatten)]
    iteration: IterationArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Added to alpha of the global-trust tables (negative control).
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_offset: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Accept any square nonnegative matrix (no rating scale or diagonal rule).
    #[arg(long)]
    unrestricted: bool,
    /// Weight of the second-moment factor [default: 1/3].
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<f64>,
    /// Convergence threshold [default: 5e-5].
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Weight of the second-moment factor [default: 1/3].
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<f64>,
    /// Convergence threshold [default: 5e-5].
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep cap per run.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seeds for the asynchronous runs [default: 1,2,3].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    seeds: Vec<u64>,
    /// Generated network: number of peers [default: 50].
    #[arg(long)]
    peers: Option<usize>,
    /// Generated network: probability that a peer rates another [default: 0.1].
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Generated network: fraction of honest peers [default: 0.8].
    #[arg(long)]
    honest_fraction: Option<f64>,
    /// Generated network: seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Manifest written by `--save-manifest` (or by hand).
    #[arg(long)]
    manifest: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InputArgs {
    fn apply(self, m: &mut RunManifest) {
        if self.example {
            m.matrix = Some(EXAMPLE_MATRIX.iter().map(|r| r.to_vec()).collect());
        }
        m.matrix_path = self.matrix;
    }
}

impl IterationArgs {
    fn apply(self, m: &mut RunManifest) {
        m.tol = self.tol;
        m.max_iters = self.max_iters;
        m.initial = self.initial;
    }
}

struct Plan {
    manifest: RunManifest,
    out: Option<PathBuf>,
    save_manifest: Option<PathBuf>,
}

fn plan(command: Command) -> Result<Plan, Failure> {
    let with_output = |manifest: RunManifest, o: OutputArgs| {
        let mut manifest = manifest;
        manifest.format = o.format;
        Plan {
            manifest,
            out: o.out,
            save_manifest: o.save_manifest,
        }
    };
    Ok(match command {
        Command::CenterPoint(a) => {
            let mut m = RunManifest::new(CommandKind::CenterPoint);
            a.input.apply(&mut m);
            a.iteration.apply(&mut m);
            with_output(m, a.output)
        }
        Command::Solve(a) => {
            let mut m = RunManifest::new(CommandKind::Solve);
            a.input.apply(&mut m);
            a.iteration.apply(&mut m);
            m.alpha = a.alpha;
            with_output(m, a.output)
        }
        Command::VerifyPaper(a) => {
            let mut m = RunManifest::new(CommandKind::VerifyPaper);
            m.alpha_offset = a.alpha_offset;
            with_output(m, a.output)
        }
        Command::Analyze(a) => {
            let mut m = RunManifest::new(CommandKind::Analyze);
            a.input.apply(&mut m);
            m.unrestricted = a.unrestricted;
            m.alpha = a.alpha;
            m.tol = a.tol;
            with_output(m, a.output)
        }
        Command::Simulate(a) => {
            let mut m = RunManifest::new(CommandKind::Simulate);
            let has_matrix = a.input.example || a.input.matrix.is_some();
            a.input.apply(&mut m);
            m.alpha = a.alpha;
            m.tol = a.tol;
            m.max_iters = a.max_iters;
            m.seeds = a.seeds;
            let network_flags =
                a.peers.is_some() || a.edge_prob.is_some() || a.honest_fraction.is_some() || a.seed.is_some();
            if has_matrix && network_flags {
                return Err(Failure {
                    code: exit::INVALID,
                    message: "error: network generation flags cannot be combined with an input matrix".into(),
                });
            }
            if !has_matrix {
                let d = default_network();
                m.network = Some(NetworkSpec::new(
                    a.peers.unwrap_or(d.n_peers),
                    a.edge_prob.unwrap_or(d.edge_prob),
                    a.honest_fraction.unwrap_or(d.honest_fraction),
                    a.seed.unwrap_or(d.seed),
                ));
            }
            with_output(m, a.output)
        }
        Command::Run(a) => {
            let text = fs::read_to_string(&a.manifest).map_err(|e| Failure {
                code: exit::INVALID,
                message: format!("error: cannot read {}: {e}", a.manifest.display()),
            })?;
            let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Failure {
                code: exit::INVALID,
                message: format!("error: invalid manifest {}: {e}", a.manifest.display()),
            })?;
            Plan {
                manifest,
                out: a.out,
                save_manifest: None,
            }
        }
    })
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: exit::INVALID,
        message: format!("error: cannot write {}: {e}", path.display()),
    })
}

fn run(command: Command) -> Result<(), Failure> {
    let plan = plan(command)?;
    let output = execute(&plan.manifest)?;
    if let Some(path) = &plan.save_manifest {
        let mut text = serde_json::to_string_pretty(&plan.manifest).expect("manifest serialization is infallible");
        text.push('\n');
        write_file(path, &text)?;
    }
    match &plan.out {
        Some(path) => write_file(path, &output),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Failure {
                    code: exit::INVALID,
                    message: format!("error: cannot write output: {e}"),
                })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(f) => {
            eprint!("{}", f.message);
            if !f.message.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(f.code)
        }
    }
}
