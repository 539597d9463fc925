//! `gbf`: nonexistence certificates for generalized bent functions.

mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gbf_core::Exec;
use num_bigint::BigUint;

use report::{exit, Format};

#[derive(Parser, Debug)]
#[command(name = "gbf", version, about = "Nonexistence certificates for generalized bent functions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Shorthand for --format json.
    #[arg(long, global = true, conflicts_with_all = ["table", "jsonl"])]
    json: bool,
    /// Shorthand for --format table.
    #[arg(long, global = true, conflicts_with = "jsonl")]
    table: bool,
    /// Shorthand for --format jsonl: one JSON object per result row.
    #[arg(long, global = true)]
    jsonl: bool,
    /// Seed for every randomized step (factoring, probabilistic primality, sampling).
    #[arg(long, global = true, default_value_t = gbf_core::arith::DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; 1 runs sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl Global {
    fn format(&self) -> Format {
        if self.table {
            Format::Table
        } else if self.jsonl {
            Format::Jsonl
        } else if self.json {
            Format::Json
        } else {
            self.format
        }
    }

    pub fn exec(&self) -> Exec {
        if self.threads == Some(1) {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    pub fn factor_config(&self) -> gbf_core::FactorConfig {
        gbf_core::FactorConfig { seed: self.seed, ..Default::default() }
    }
}

pub fn big(s: &str) -> Result<BigUint, String> {
    s.trim().parse::<BigUint>().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the criterion for one (n, p, e) and print its certificate.
    Certify(commands::CertifyArgs),
    /// List primes matching order, residue and certification filters.
    Scan(commands::ScanArgs),
    /// Least certified prime for given n and g.
    Smallest(commands::SmallestArgs),
    /// Count primes with (p - 1)/ord_p(q) = g, optionally above the bound.
    Density(commands::DensityArgs),
    /// Base-q Wieferich primes up to a limit.
    Wieferich(commands::WieferichArgs),
    /// Exact checks on gamma, xi and delta for a complex subfield of Q(zeta_p).
    CycloVerify(commands::CycloArgs),
    /// Exhaustive GBF search at a tiny type [n, t].
    GbfSearch(commands::GbfSearchArgs),
    /// Relation search on one class-group fixture.
    Relsearch(commands::RelsearchArgs),
    /// Relation search for n <= 3 over every qualifying prime below a bound.
    RelsearchBatch(commands::BatchArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(exit::USAGE as u8);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let start = Instant::now();
    let g = &cli.global;
    let (name, result) = match &cli.command {
        Command::Certify(a) => ("certify", commands::certify(a, g)),
        Command::Scan(a) => ("scan", commands::scan(a, g)),
        Command::Smallest(a) => ("smallest", commands::smallest(a, g)),
        Command::Density(a) => ("density", commands::density(a, g)),
        Command::Wieferich(a) => ("wieferich", commands::wieferich(a, g)),
        Command::CycloVerify(a) => ("cyclo-verify", commands::cyclo_verify(a, g)),
        Command::GbfSearch(a) => ("gbf-search", commands::gbf_search(a, g)),
        Command::Relsearch(a) => ("relsearch", commands::relsearch(a, g)),
        Command::RelsearchBatch(a) => ("relsearch-batch", commands::relsearch_batch(a, g)),
    };
    let (parameters, outcome) = result;
    let code = match outcome {
        Ok(outcome) => match report::emit(name, parameters, outcome, start.elapsed(), g.format()) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: writing output: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message);
            let outcome = report::Outcome::new(e.status, e.code, serde_json::json!({ "error": e.message }));
            report::emit(name, parameters, outcome, start.elapsed(), g.format()).unwrap_or(e.code)
        }
    };
    ExitCode::from(code as u8)
}
