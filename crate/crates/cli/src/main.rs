mod commands;
mod inputs;
mod report;
mod trace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmip_core::exec::BackendChoice;

#[derive(Parser)]
#[command(
    name = "cmip",
    version,
    about = "Run, de-simulate and compare strategies for multi-prover games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a strategy exactly or by sampling and report the acceptance rate.
    Run(RunArgs),
    /// Turn a Clifford strategy into an equivalent classical one.
    Declifford(DecliffordArgs),
    /// Compare the history distributions of two strategies.
    Verify(VerifyArgs),
    /// Time Pauli conjugation through long random Clifford circuits.
    Bench(BenchArgs),
    /// List the bundled games and their strategies.
    ListGames,
}

#[derive(Args, Clone)]
struct GameArgs {
    /// Bundled game name (see `list-games`).
    #[arg(long, conflicts_with = "protocol")]
    game: Option<String>,
    /// Protocol JSON file.
    #[arg(long)]
    protocol: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Auto,
    Dense,
    Stabilizer,
}

#[derive(Args, Clone)]
struct ExecArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate every history exactly.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Number of sampled runs.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum, default_value_t = Backend::Auto)]
    backend: Backend,
    /// Largest register the dense backend may hold.
    #[arg(long, default_value_t = cmip_core::dense::DEFAULT_QUBIT_CAP)]
    cap: usize,
    /// Add wall time to the report. Reports are otherwise byte-identical
    /// for equal inputs.
    #[arg(long)]
    timing: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Strategy JSON file, or a strategy name of the bundled game.
    #[arg(long)]
    strategy: String,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lambda {
    Precomputed,
    Table,
}

#[derive(Args)]
struct DecliffordArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long)]
    strategy: String,
    /// Hard-coded questions, provers separated by `,` and rounds by `;`,
    /// e.g. `0,1;10,01`. Defaults to all zeros.
    #[arg(long)]
    hardcoded_q: Option<String>,
    /// Representation of the shared randomness.
    #[arg(long, value_enum, default_value_t = Lambda::Precomputed)]
    lambda: Lambda,
    /// Allow one prover outside the Clifford model (single-round games).
    #[arg(long)]
    mostly: bool,
    /// Compare the result with the input strategy by exact enumeration.
    #[arg(long)]
    check: bool,
    /// Log the correction operator of every prover and round of one run.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    timing: bool,
    /// Write the classical strategy here and print a report; without it the
    /// strategy is printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long)]
    strategy: String,
    /// The second strategy.
    #[arg(long)]
    against: String,
    /// Largest TV distance that passes in exact mode.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Smallest chi-square p-value that passes in sampling mode.
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 512)]
    qubits: usize,
    #[arg(long, default_value_t = 1_000_000)]
    gates: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExecArgs {
    fn config(&self) -> cmip_core::ExecConfig {
        cmip_core::ExecConfig {
            backend: match self.backend {
                Backend::Auto => BackendChoice::Auto,
                Backend::Dense => BackendChoice::Dense,
                Backend::Stabilizer => BackendChoice::Stabilizer,
            },
            dense_cap: self.cap,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Declifford(a) => commands::declifford(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::ListGames => commands::list_games(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
