use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperell_cli::config::{Command, Settings};

#[derive(Parser)]
#[command(name = "hyperell", version, about = "Low-lying zero statistics of hyperelliptic L-functions against USp predictions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the invariant suites and print a summary table
    Verify(Flags),
    /// Dump L*-coefficients for one polynomial or a whole family
    Lpoly(Flags),
    /// Ensemble average of the n-level density
    AvgNlevel(Flags),
    /// The combinatorial prediction A(f)
    Gao(Flags),
    /// Integral of f against the USp kernel determinant
    RmtKernel(Flags),
    /// Monte Carlo average over Haar USp(2g)
    RmtEmpirical(Flags),
    /// Ensemble averages across genera, against A(f)
    ScanG(Flags),
    /// Ensemble averages across field sizes, against a USp(2g) Monte Carlo run
    ScanQ(Flags),
}

/// Flags mirror the config keys and win over the file.
#[derive(Args, Clone, Default)]
struct Flags {
    /// Config file (`key = value`, `[section]` headers, `#` comments)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field sizes, comma-separated odd primes
    #[arg(long)]
    q: Option<String>,
    /// Genera, comma-separated
    #[arg(long)]
    g: Option<String>,
    /// Number of test functions (n-level)
    #[arg(long)]
    n: Option<String>,
    /// Test functions such as `triangle:s=1.5` or `sinc4:s=0.6`, comma-separated
    #[arg(long)]
    tf: Option<String>,
    /// `exhaustive` or `sampled`
    #[arg(long)]
    mode: Option<String>,
    /// Sample count for sampled and Monte Carlo runs
    #[arg(long)]
    samples: Option<String>,
    /// Master seed (decimal or 0x-hex)
    #[arg(long)]
    seed: Option<String>,
    /// Elementary-operation budget
    #[arg(long)]
    budget: Option<String>,
    /// Output path; stdout when absent
    #[arg(long)]
    output: Option<String>,
    /// Worker threads
    #[arg(long)]
    threads: Option<String>,
    /// Ensemble chunk size
    #[arg(long)]
    chunk: Option<String>,
    /// Verify suites, comma-separated
    #[arg(long)]
    suite: Option<String>,
    /// Polynomial for `lpoly`, e.g. `x^5+2x+1`
    #[arg(long)]
    poly: Option<String>,
}

impl Flags {
    fn settings(&self) -> Result<Settings, String> {
        let mut s = Settings::default();
        let pairs = [
            ("q", &self.q),
            ("g", &self.g),
            ("n", &self.n),
            ("tf", &self.tf),
            ("mode", &self.mode),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("budget", &self.budget),
            ("output", &self.output),
            ("threads", &self.threads),
            ("chunk", &self.chunk),
            ("suite", &self.suite),
            ("poly", &self.poly),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v).map_err(|m| format!("--{key}: {m}"))?;
            }
        }
        Ok(s)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Verify(f) => (Command::Verify, f),
        Cmd::Lpoly(f) => (Command::Lpoly, f),
        Cmd::AvgNlevel(f) => (Command::AvgNlevel, f),
        Cmd::Gao(f) => (Command::Gao, f),
        Cmd::RmtKernel(f) => (Command::RmtKernel, f),
        Cmd::RmtEmpirical(f) => (Command::RmtEmpirical, f),
        Cmd::ScanG(f) => (Command::ScanG, f),
        Cmd::ScanQ(f) => (Command::ScanQ, f),
    };
    let settings = match flags.settings() {
        Ok(s) => s,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    let cfg = match hyperell_cli::load(command, flags.config.as_ref(), &settings) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    eprint!("{cfg}");
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
        eprintln!("warning: thread pool: {e}");
    }
    ExitCode::from(hyperell_cli::execute(&cfg) as u8)
}
