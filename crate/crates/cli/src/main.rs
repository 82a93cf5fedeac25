use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;
use tempnet::bench::{self, running, BenchmarkFixture, BENCHMARKS};
use tempnet::io::{self, Problem};
use tempnet::model::{check_merge_laws, validate_network};
use tempnet::modular::{check_modular, check_strawperson, CheckError, CheckOptions, CheckReport, Status};
use tempnet::monolithic::check_monolithic;
use tempnet::sim::{delayed_simulate, simulate};
use tempnet::smt::solver::{SolverConfig, SOLVER_ENV};
use tempnet::temporal::Annotation;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "tempnet", version, about = "Modular verification of routing control planes with temporal interfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// SMT solver executable (SMT-LIB 2 on stdin).
    #[arg(long, global = true, env = SOLVER_ENV)]
    solver: Option<PathBuf>,
    /// Per-query solver timeout in seconds.
    #[arg(long, global = true)]
    timeout: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Write every solver script to this directory.
    #[arg(long, global = true, value_name = "DIR")]
    dump_smt: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Modular,
    Monolithic,
    Strawperson,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network against its interfaces and properties.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Modular)]
        mode: Mode,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Time-free modular check (unsound; for demonstration).
    Strawperson {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Simulate a closed network and print its states over time.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        /// Deliver routes up to this many steps late, on a seeded schedule.
        #[arg(long, default_value_t = 0)]
        delay: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a built-in benchmark, or write it out as a problem file.
    Bench {
        /// Benchmark name; see --list.
        #[arg(long, required_unless_present = "list")]
        name: Option<String>,
        /// Fattree size.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Symbolic destination (fattree benchmarks).
        #[arg(long)]
        all_prefix: bool,
        #[arg(long, value_enum, default_value_t = Mode::Modular)]
        mode: Mode,
        #[command(flatten)]
        run: RunArgs,
        /// Write the benchmark as JSON instead of checking it.
        #[arg(long, value_name = "FILE")]
        dump: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
    /// Report sort errors, malformed annotations and merge-law violations.
    Validate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Args)]
struct Input {
    /// Problem file: {"network": …, "interfaces": …, "properties": …}.
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    file: Option<PathBuf>,
    /// A running-example fixture instead of a file.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(running::FIXTURES))]
    fixture: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    /// Maximum message delay in steps (modular mode only).
    #[arg(long, default_value_t = 0)]
    delay: u64,
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// An error reported with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn load(input: &Input) -> Result<Problem, InputError> {
    if let Some(id) = &input.fixture {
        return Ok(problem_of(running::by_id(id)?));
    }
    let path = input.file.as_deref().expect("clap requires a file or fixture");
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    io::problem_from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn problem_of(f: BenchmarkFixture) -> Problem {
    Problem {
        network: f.network,
        interfaces: Some(f.interfaces),
        properties: Some(f.properties),
    }
}

impl Global {
    fn solver(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(p) = &self.solver {
            cfg.program = p.clone();
        }
        cfg.timeout = self.timeout.map(Duration::from_secs);
        cfg.dump_dir = self.dump_smt.clone();
        cfg
    }
}

fn annotations(p: &Problem, mode: Mode) -> Result<(Annotation, Annotation), InputError> {
    let props = p.properties.clone().or_else(|| p.interfaces.clone());
    match mode {
        Mode::Monolithic => {
            let props = props.ok_or_else(|| InputError("no properties to check".into()))?;
            Ok((Annotation::new(), props))
        }
        _ => {
            let a = p
                .interfaces
                .clone()
                .ok_or_else(|| InputError("no interfaces to check".into()))?;
            Ok((a, props.unwrap_or_default()))
        }
    }
}

fn run_check(g: &Global, p: &Problem, mode: Mode, run: &RunArgs) -> Result<CheckReport, InputError> {
    if run.delay > 0 && mode != Mode::Modular {
        return Err(InputError("--delay applies only to --mode modular".into()));
    }
    let (a, props) = annotations(p, mode)?;
    let opts = CheckOptions {
        delay: run.delay,
        jobs: run.jobs,
        solver: g.solver(),
    };
    let report = match mode {
        Mode::Modular => check_modular(&p.network, &a, &props, &opts),
        Mode::Monolithic => check_monolithic(&p.network, &props, &opts.solver),
        Mode::Strawperson => check_strawperson(&p.network, &a, &opts),
    };
    report.map_err(|e: CheckError| InputError(e.to_string()))
}

fn emit_report(g: &Global, r: &CheckReport) -> u8 {
    match g.report {
        Format::Text => print!("{}", r.to_text()),
        Format::Json => {
            let mut j = serde_json::to_value(r).expect("report serializes");
            j["status"] = serde_json::to_value(r.status()).expect("status serializes");
            println!("{}", serde_json::to_string_pretty(&j).expect("json"));
        }
    }
    match r.status() {
        Status::Pass => 0,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn write_json(path: &Path, j: &serde_json::Value) -> Result<(), InputError> {
    let text = serde_json::to_string_pretty(j)? + "\n";
    std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn validate(g: &Global, p: &Problem, seed: u64, samples: usize) -> Result<u8, InputError> {
    let mut problems = Vec::new();
    for d in validate_network(&p.network) {
        problems.push(format!("network: {d}"));
    }
    for (which, a) in [("interfaces", &p.interfaces), ("properties", &p.properties)] {
        if let Some(a) = a {
            for e in a.validate(&p.network) {
                problems.push(format!("{which}: {e}"));
            }
        }
    }
    if problems.is_empty() {
        let laws = check_merge_laws(&p.network, samples, seed)?;
        if let Some(v) = &laws.violation {
            log::warn!("merge is not {:?} on {:?}", v.law, v.routes);
        }
        match g.report {
            Format::Json => println!("{}", serde_json::json!({ "valid": true, "merge_laws": laws })),
            Format::Text => {
                println!("valid");
                match &laws.violation {
                    None => println!("merge laws hold on {} samples", laws.samples),
                    Some(v) => {
                        let routes: Vec<String> = v.routes.iter().map(ToString::to_string).collect();
                        println!(
                            "warning: merge violates {:?} on {}: {} vs {}",
                            v.law,
                            routes.join(", "),
                            v.lhs,
                            v.rhs
                        );
                    }
                }
            }
        }
        return Ok(0);
    }
    match g.report {
        Format::Json => println!("{}", serde_json::json!({ "valid": false, "errors": problems })),
        Format::Text => problems.iter().for_each(|e| println!("{e}")),
    }
    Ok(EXIT_INPUT)
}

fn run(cli: Cli) -> Result<u8, InputError> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { input, mode, run } => {
            let p = load(input)?;
            Ok(emit_report(g, &run_check(g, &p, *mode, run)?))
        }
        Command::Strawperson { input, jobs } => {
            let p = load(input)?;
            let run = RunArgs { delay: 0, jobs: *jobs };
            Ok(emit_report(g, &run_check(g, &p, Mode::Strawperson, &run)?))
        }
        Command::Simulate {
            input,
            steps,
            delay,
            seed,
        } => {
            let p = load(input)?;
            let trace = if *delay == 0 {
                simulate(&p.network, *steps)?
            } else {
                delayed_simulate(&p.network, *delay, *seed, *steps)?
            };
            match g.report {
                Format::Text => print!("{}", trace.to_table()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&trace.to_json())?),
            }
            Ok(0)
        }
        Command::Bench {
            name,
            k,
            all_prefix,
            mode,
            run,
            dump,
            list,
        } => {
            if *list {
                for b in BENCHMARKS {
                    println!("{b}");
                }
                return Ok(0);
            }
            let f = bench::by_name(name.as_deref().expect("clap requires a name"), *k, *all_prefix)?;
            if let Some(path) = dump {
                write_json(path, &io::fixture_to_json(&f))?;
                return Ok(0);
            }
            log::info!("checking {}", f.name);
            Ok(emit_report(g, &run_check(g, &problem_of(f), *mode, run)?))
        }
        Command::Validate {
            input,
            seed,
            samples,
        } => {
            let p = load(input)?;
            validate(g, &p, *seed, *samples)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
