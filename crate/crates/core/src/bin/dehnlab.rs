use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dehnlab::acceptance::{run_suite, SuiteLevel, DEFAULT_SUITE_SEED};
use dehnlab::filling::{verify_certificate, FillingCertificate};
use dehnlab::runner::{self, ExperimentConfig, EXIT_ERROR, EXIT_INVALID};
use dehnlab::walk::SamplerKind;
use dehnlab::{Error, GroupSpec, LazyWord};

#[derive(Parser)]
#[command(name = "dehnlab", version = runner::record::version(), about = "Random loops and filling areas in nilpotent groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        /// Worker threads; the DEHNLAB_WORKERS variable takes precedence.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_parser = parse_sampler)]
        sampler: Option<SamplerKind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print the JSON record to stdout.
        #[arg(long)]
        print: bool,
    },
    /// Check a filling certificate (TSV) for a word: exit 0 if valid, 1 if not,
    /// 2 if the inputs do not parse.
    Verify {
        #[arg(short, long)]
        group: String,
        #[arg(short, long)]
        word: String,
        certificate: PathBuf,
    },
    /// Run the acceptance suite.
    Suite {
        #[arg(long, default_value = "smoke")]
        level: String,
        #[arg(long, default_value_t = DEFAULT_SUITE_SEED)]
        seed: u64,
        /// Print one JSON object per criterion instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown sampler `{s}` (auto, rejection, bridge, quotient-bridge)"))
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn invalid(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("dehnlab: invalid input: {e}");
    code(EXIT_INVALID)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, samples, workers, sampler, n, n_list, json, csv, print } => {
            let mut cfg = match ExperimentConfig::from_file(&config) {
                Ok(c) => c,
                Err(e) => return invalid(format!("{}: {e}", config.display())),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.workers = workers.or(cfg.workers);
            cfg.sampler = sampler.unwrap_or(cfg.sampler);
            cfg.n = n.or(cfg.n);
            cfg.n_list = n_list.unwrap_or(cfg.n_list);
            cfg.output.json = json.or(cfg.output.json);
            cfg.output.csv = csv.or(cfg.output.csv);
            if let Err(e) = cfg.check().and_then(|_| runner::effective_workers(&cfg)) {
                return invalid(e);
            }
            match runner::run_and_write(&cfg) {
                Ok(record) => {
                    if print {
                        println!("{}", record.to_json());
                    }
                    for w in &record.warnings {
                        eprintln!("dehnlab: warning: {w}");
                    }
                    code(runner::exit_code(&record))
                }
                Err(e @ Error::Parse(_)) => invalid(e),
                Err(e) => {
                    eprintln!("dehnlab: {e}");
                    code(EXIT_ERROR)
                }
            }
        }
        Command::Verify { group, word, certificate } => {
            let spec = match GroupSpec::parse(&group) {
                Ok(s) => s,
                Err(e) => return invalid(format!("--group: {e}")),
            };
            let target: LazyWord = match word.parse() {
                Ok(w) => w,
                Err(e) => return invalid(format!("--word: {e}")),
            };
            let text = match std::fs::read_to_string(&certificate) {
                Ok(t) => t,
                Err(e) => return invalid(format!("{}: {e}", certificate.display())),
            };
            let cert = match FillingCertificate::from_tsv(&text, target) {
                Ok(c) => c,
                Err(e) => return invalid(format!("{}: {e}", certificate.display())),
            };
            if verify_certificate(&spec, &cert) {
                println!("valid: area {}", cert.area());
                code(0)
            } else {
                println!("invalid");
                code(1)
            }
        }
        Command::Suite { level, seed, json } => {
            let level: SuiteLevel = match level.parse() {
                Ok(l) => l,
                Err(e) => return invalid(e),
            };
            let results = run_suite(level, seed, |r| {
                if json {
                    println!("{}", serde_json::to_string(r).expect("results serialize"));
                } else {
                    println!("{r}");
                    for line in &r.detail {
                        println!("    {line}");
                    }
                }
            });
            let failed: Vec<&str> =
                results.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
            if failed.is_empty() {
                eprintln!("suite: all {} passed", results.len());
                code(0)
            } else {
                eprintln!("suite: failed {}", failed.join(", "));
                code(EXIT_ERROR)
            }
        }
    }
}
