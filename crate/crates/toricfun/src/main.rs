use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use toricfun::{run_suite, ExperimentConfig, ExponentSetArg, SuiteKind, VolumeArg};

#[derive(Parser)]
#[command(
    name = "toricfun",
    about = "Verification suites for canonical functional bounds on torus-invariant metrics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Dimension of the projective space (1..=3).
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Degree m (start of the range).
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Inclusive end of the m range.
    #[arg(long)]
    m_max: Option<usize>,
    /// Number of seeded admissible metrics.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// First seed of the family.
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    /// Random pieces per generated metric.
    #[arg(long, default_value_t = 4)]
    complexity: usize,
    /// Transform grid resolution override (0 = automatic).
    #[arg(long, default_value_t = 0)]
    resolution: usize,
    /// Margin tolerance for the exit code.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory for report.json, summary.csv, margins.dat.
    #[arg(long, default_value = "toricfun-out")]
    out: PathBuf,
    /// Metric spec JSON file replacing the seeded family.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExponentSetArg::Displayed)]
    exponent_set: ExponentSetArg,
    #[arg(long, value_enum, default_value_t = VolumeArg::Canonical)]
    volume: VolumeArg,
}

impl SuiteArgs {
    fn into_config(self, suite: SuiteKind) -> ExperimentConfig {
        ExperimentConfig {
            suite,
            n: self.n,
            m: self.m,
            m_max: self.m_max,
            seeds: self.seeds,
            seed_base: self.seed_base,
            complexity: self.complexity,
            resolution: self.resolution,
            tol: self.tol,
            jobs: self.jobs,
            out: self.out,
            spec: self.spec,
            exponent_set: self.exponent_set,
            volume: self.volume,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Transform zero/entropy laws on grids.
    Fenchel(SuiteArgs),
    /// V values and the scaling identity.
    Vfun(SuiteArgs),
    /// The explicit bound constant c_m.
    Cm(SuiteArgs),
    /// Per-monomial inequality margins.
    Nu(SuiteArgs),
    /// V ≤ c_m over seeded admissible metrics.
    #[command(name = "main-bound")]
    MainBound(SuiteArgs),
    /// Comparison with the Berman-style functional.
    Berman(SuiteArgs),
    /// Mixed Bott-Chern coefficient bounds.
    Qbounds(SuiteArgs),
    /// Todd threshold and torsion-variation bounds.
    Torsion(SuiteArgs),
    /// Execute a JSON config that mirrors the CLI flags.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the closed-form canonical norm table (exact rationals).
    #[command(name = "oracle-dump")]
    OracleDump {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Command::Fenchel(a) => a.into_config(SuiteKind::Fenchel),
        Command::Vfun(a) => a.into_config(SuiteKind::Vfun),
        Command::Cm(a) => a.into_config(SuiteKind::Cm),
        Command::Nu(a) => a.into_config(SuiteKind::Nu),
        Command::MainBound(a) => a.into_config(SuiteKind::MainBound),
        Command::Berman(a) => a.into_config(SuiteKind::Berman),
        Command::Qbounds(a) => a.into_config(SuiteKind::Qbounds),
        Command::Torsion(a) => a.into_config(SuiteKind::Torsion),
        Command::Run { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            match serde_json::from_str::<ExperimentConfig>(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: bad config {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            }
        }
        Command::OracleDump { n, m } => {
            return match toricfun::oracle_dump(n, m) {
                Ok(table) => {
                    println!("nu\texact\tfloat");
                    for (nu, exact, float) in table {
                        println!("{nu:?}\t{exact}\t{float}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };

    match run_suite(&config) {
        Ok(outcome) => {
            let min = outcome
                .report
                .min_margin
                .map(|m| m.to_string())
                .unwrap_or_else(|| "n/a".into());
            println!(
                "suite {} finished: {} margin rows, min margin {min}, outputs in {}",
                outcome.report.suite,
                outcome.report.margins.len(),
                outcome.out_dir.display()
            );
            if outcome.exit_code != 0 {
                eprintln!("margin violation below -{}", config.tol);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
