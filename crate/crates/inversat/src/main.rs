//! Command-line front end for the inversion pipeline.
//!
//! Exit codes: 0 on success (key found / run completed), 1 when the whole
//! family is unsatisfiable (first-SAT found nothing), 2 when a budget or
//! deadline cut the run short, 10 for usage errors, 11 for I/O errors,
//! 12 for internal inconsistencies.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inversat::decomposition::{
    default_g_budget, minimize, predict, CostModel, DecompositionSet, MinimizeStrategy,
    PredictionParams, PredictionStatus,
};
use inversat::encoder::{encode, Encoding};
use inversat::generators::GeneratorSpec;
use inversat::runner::{
    export_manifest, run_attack, AttackConfig, AttackMode, AttackOutcome, AttackStatus,
};
use inversat::solver::SolverConfig;

const EXIT_EXHAUSTED: i32 = 1;
const EXIT_BUDGET: i32 = 2;
const EXIT_USAGE: i32 = 10;
const EXIT_IO: i32 = 11;
const EXIT_INTERNAL: i32 = 12;

#[derive(Parser)]
#[command(
    name = "inversat",
    version,
    about = "SAT-based inversion of keystream generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenArgs {
    /// Built-in generator: a51 | threshold5 | summation4 | gifford.
    #[arg(long, conflicts_with = "spec")]
    gen: Option<String>,
    /// TOML file describing a custom generator.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl GenArgs {
    fn resolve(&self) -> Result<GeneratorSpec, CliError> {
        match (&self.gen, &self.spec) {
            (Some(name), None) => {
                GeneratorSpec::by_name(name).map_err(|e| CliError::usage(e.to_string()))
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
                GeneratorSpec::from_toml_str(&text).map_err(|e| CliError::usage(e.to_string()))
            }
            _ => Err(CliError::usage("exactly one of --gen or --spec is required".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum CostArg {
    #[default]
    Wall,
    Conflicts,
    Cells,
}

impl From<CostArg> for CostModel {
    fn from(c: CostArg) -> CostModel {
        match c {
            CostArg::Wall => CostModel::WallSeconds,
            CostArg::Conflicts => CostModel::Conflicts,
            CostArg::Cells => CostModel::CellCount,
        }
    }
}

#[derive(Args)]
struct PredictionArgs {
    /// Sample size for large families.
    #[arg(long, default_value_t = 1000)]
    q: u64,
    /// Families of at most this many cells are enumerated exactly.
    #[arg(long, default_value_t = 4096)]
    r: u64,
    /// Cumulative budget in cost units; default derives from a pilot sample.
    #[arg(long)]
    g_budget: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// What solving a cell costs: wall seconds, conflicts, or a flat 1.
    #[arg(long, value_enum, default_value_t)]
    cost: CostArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    First,
    All,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    gen: GenArgs,
    /// Observed keystream bits as a 0/1 string.
    #[arg(long)]
    keystream: Option<String>,
    /// Plant a key instead of observing a keystream (simulates it first).
    #[arg(long)]
    key_hex: Option<String>,
    /// Keystream length when simulating from --key-hex.
    #[arg(long, default_value_t = 144)]
    len: usize,
    /// Decomposition set as a range list, e.g. 1-9,20-30,42-52.
    #[arg(long)]
    decomp: Option<String>,
    /// Batch prefix length; defaults so there are at least 4 batches per
    /// worker.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Overall wall-clock deadline in seconds.
    #[arg(long)]
    deadline: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report to a file as well as stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-batch timings as CSV.
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    /// Write the batch manifest before running.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the first --len keystream bits for a key.
    Keystream {
        #[command(flatten)]
        gen: GenArgs,
        /// Key as colon-separated hex fields, one per register.
        #[arg(long)]
        key_hex: String,
        #[arg(long, default_value_t = 144)]
        len: usize,
    },
    /// Write the generator encoding as annotated DIMACS.
    Encode {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 144)]
        len: usize,
        /// Bind these observed bits into the formula as unit clauses.
        #[arg(long)]
        keystream: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the predictive function T on one decomposition set.
    Predict {
        #[command(flatten)]
        gen: GenArgs,
        /// Annotated DIMACS file instead of --gen/--spec.
        #[arg(long, conflicts_with_all = ["gen", "spec"])]
        cnf: Option<PathBuf>,
        #[arg(long)]
        keystream: Option<String>,
        #[arg(long)]
        key_hex: Option<String>,
        #[arg(long, default_value_t = 144)]
        len: usize,
        #[arg(long)]
        decomp: Option<String>,
        #[command(flatten)]
        params: PredictionArgs,
    },
    /// Minimize T over a chain of shrinking decomposition sets.
    Optimize {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, conflicts_with_all = ["gen", "spec"])]
        cnf: Option<PathBuf>,
        #[arg(long)]
        keystream: Option<String>,
        #[arg(long)]
        key_hex: Option<String>,
        #[arg(long, default_value_t = 144)]
        len: usize,
        #[arg(long)]
        decomp: Option<String>,
        /// remove-last or greedy-best.
        #[arg(long, default_value = "remove-last")]
        strategy: String,
        /// Write the per-candidate trace as CSV.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        #[command(flatten)]
        params: PredictionArgs,
    },
    /// Recover a key from an observed keystream (first-SAT by default).
    Attack {
        #[command(flatten)]
        args: AttackArgs,
        #[arg(long, value_enum, default_value = "first")]
        mode: ModeArg,
    },
    /// Find every key producing the observed keystream (find-all attack).
    Collisions {
        #[command(flatten)]
        args: AttackArgs,
    },
}

struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn usage(message: String) -> CliError {
        CliError {
            message,
            code: EXIT_USAGE,
        }
    }
    fn io(message: String) -> CliError {
        CliError {
            message,
            code: EXIT_IO,
        }
    }
    fn internal(message: String) -> CliError {
        CliError {
            message,
            code: EXIT_INTERNAL,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Keystream { gen, key_hex, len } => cmd_keystream(&gen, &key_hex, len),
        Command::Encode {
            gen,
            len,
            keystream,
            out,
        } => cmd_encode(&gen, len, keystream.as_deref(), &out),
        Command::Predict {
            gen,
            cnf,
            keystream,
            key_hex,
            len,
            decomp,
            params,
        } => cmd_predict(
            &gen,
            cnf.as_deref(),
            keystream.as_deref(),
            key_hex.as_deref(),
            len,
            decomp.as_deref(),
            &params,
        ),
        Command::Optimize {
            gen,
            cnf,
            keystream,
            key_hex,
            len,
            decomp,
            strategy,
            trace_csv,
            params,
        } => cmd_optimize(
            &gen,
            cnf.as_deref(),
            keystream.as_deref(),
            key_hex.as_deref(),
            len,
            decomp.as_deref(),
            &strategy,
            trace_csv.as_deref(),
            &params,
        ),
        Command::Attack { args, mode } => cmd_attack(
            &args,
            match mode {
                ModeArg::First => AttackMode::FirstSat,
                ModeArg::All => AttackMode::FindAll,
            },
        ),
        Command::Collisions { args } => cmd_attack(&args, AttackMode::FindAll),
    }
}

fn parse_bits(text: &str) -> Result<Vec<bool>, CliError> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CliError::usage(format!(
                "keystream must be a 0/1 string, found {other:?}"
            ))),
        })
        .collect()
}

fn render_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// The keystream to attack: observed bits, or bits simulated from a planted
/// key.
fn obtain_keystream(
    gen: &GeneratorSpec,
    keystream: Option<&str>,
    key_hex: Option<&str>,
    len: usize,
) -> Result<Vec<bool>, CliError> {
    match (keystream, key_hex) {
        (Some(bits), None) => parse_bits(bits),
        (None, Some(hex)) => {
            let key = gen
                .parse_key(hex)
                .map_err(|e| CliError::usage(e.to_string()))?;
            gen.keystream(&key, len)
                .map_err(|e| CliError::usage(e.to_string()))
        }
        (Some(_), Some(_)) => Err(CliError::usage(
            "--keystream and --key-hex are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::usage(
            "one of --keystream or --key-hex is required".into(),
        )),
    }
}

/// Default decomposition: the documented A5/1 set for the standard A5/1
/// generator, otherwise all key variables.
fn resolve_decomp(
    decomp: Option<&str>,
    gen: &GeneratorSpec,
) -> Result<DecompositionSet, CliError> {
    match decomp {
        Some(text) => DecompositionSet::parse(text).map_err(|e| CliError::usage(e.to_string())),
        None => {
            let default = if *gen == GeneratorSpec::by_name("a51").unwrap() {
                DecompositionSet::parse("1-9,20-30,42-52")
            } else {
                DecompositionSet::new((1..=gen.key_len() as u32).collect())
            };
            default.map_err(|e| CliError::usage(e.to_string()))
        }
    }
}

fn cmd_keystream(gen: &GenArgs, key_hex: &str, len: usize) -> Result<i32, CliError> {
    let gen = gen.resolve()?;
    let key = gen
        .parse_key(key_hex)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let bits = gen
        .keystream(&key, len)
        .map_err(|e| CliError::usage(e.to_string()))?;
    println!("{}", render_bits(&bits));
    Ok(0)
}

fn cmd_encode(
    gen: &GenArgs,
    len: usize,
    keystream: Option<&str>,
    out: &std::path::Path,
) -> Result<i32, CliError> {
    let gen = gen.resolve()?;
    let enc = encode(&gen, len).map_err(|e| CliError::usage(e.to_string()))?;
    let mut num_clauses = enc.cnf.num_clauses();
    let text = match keystream {
        None => enc.to_dimacs(),
        Some(bits) => {
            let bits = parse_bits(bits)?;
            let bound = enc
                .bound_cnf(&bits)
                .map_err(|e| CliError::usage(e.to_string()))?;
            num_clauses = bound.num_clauses();
            let bound_enc = Encoding {
                cnf: bound,
                key_vars: enc.key_vars.clone(),
                keystream_vars: enc.keystream_vars.clone(),
                aux_count: enc.aux_count,
            };
            bound_enc.to_dimacs()
        }
    };
    write_file(out, &text)?;
    println!(
        "wrote {} ({} vars, {} clauses, {} inputs)",
        out.display(),
        enc.cnf.num_vars(),
        num_clauses,
        enc.key_vars.len()
    );
    Ok(0)
}

/// The bound CNF and decomposition set shared by predict and optimize.
fn prediction_instance(
    gen_args: &GenArgs,
    cnf_path: Option<&std::path::Path>,
    keystream: Option<&str>,
    key_hex: Option<&str>,
    len: usize,
    decomp: Option<&str>,
) -> Result<(inversat::cnf::Cnf, DecompositionSet), CliError> {
    match cnf_path {
        Some(path) => {
            let text = std::fs::read(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let enc =
                Encoding::from_dimacs(&text).map_err(|e| CliError::usage(e.to_string()))?;
            let cnf = match keystream {
                Some(bits) => enc
                    .bound_cnf(&parse_bits(bits)?)
                    .map_err(|e| CliError::usage(e.to_string()))?,
                None => enc.cnf.clone(),
            };
            let set = match decomp {
                Some(text) => {
                    DecompositionSet::parse(text).map_err(|e| CliError::usage(e.to_string()))?
                }
                None => DecompositionSet::new(enc.key_vars.clone())
                    .map_err(|e| CliError::usage(e.to_string()))?,
            };
            Ok((cnf, set))
        }
        None => {
            let gen = gen_args.resolve()?;
            let stream = obtain_keystream(&gen, keystream, key_hex, len)?;
            let enc = encode(&gen, stream.len()).map_err(|e| CliError::usage(e.to_string()))?;
            let cnf = enc
                .bound_cnf(&stream)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let set = resolve_decomp(decomp, &gen)?;
            Ok((cnf, set))
        }
    }
}

fn build_params(
    args: &PredictionArgs,
    cnf: &inversat::cnf::Cnf,
    set: &DecompositionSet,
    config: &SolverConfig,
) -> Result<PredictionParams, CliError> {
    let mut params = PredictionParams {
        q: args.q,
        r: args.r,
        g_budget: args.g_budget.unwrap_or(60.0),
        seed: args.seed,
        cost_model: args.cost.into(),
    };
    if args.g_budget.is_none() {
        params.g_budget = default_g_budget(cnf, set, &params, config)
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(params)
}

fn cmd_predict(
    gen: &GenArgs,
    cnf_path: Option<&std::path::Path>,
    keystream: Option<&str>,
    key_hex: Option<&str>,
    len: usize,
    decomp: Option<&str>,
    args: &PredictionArgs,
) -> Result<i32, CliError> {
    let (cnf, set) = prediction_instance(gen, cnf_path, keystream, key_hex, len, decomp)?;
    let config = SolverConfig {
        seed: args.seed,
        ..SolverConfig::input_guided()
    };
    let params = build_params(args, &cnf, &set, &config)?;
    let outcome = predict(&cnf, &set, &params, &config)
        .map_err(|e| CliError::usage(e.to_string()))?;
    println!("decomposition={}", set.format());
    println!("power={}", set.power());
    println!("status={}", outcome.status.as_str());
    println!("cells_solved={}", outcome.cells_solved);
    println!("tau={:.6}", outcome.tau);
    match outcome.t {
        Some(t) => println!("T={t:.6}"),
        None => println!("T=undefined"),
    }
    Ok(if outcome.status == PredictionStatus::Undefined {
        EXIT_BUDGET
    } else {
        0
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    gen: &GenArgs,
    cnf_path: Option<&std::path::Path>,
    keystream: Option<&str>,
    key_hex: Option<&str>,
    len: usize,
    decomp: Option<&str>,
    strategy: &str,
    trace_csv: Option<&std::path::Path>,
    args: &PredictionArgs,
) -> Result<i32, CliError> {
    let strategy = match strategy {
        "remove-last" => MinimizeStrategy::RemoveLast,
        "greedy-best" => MinimizeStrategy::GreedyBest,
        other => {
            return Err(CliError::usage(format!(
                "unknown strategy {other:?}; use remove-last or greedy-best"
            )))
        }
    };
    let (cnf, set) = prediction_instance(gen, cnf_path, keystream, key_hex, len, decomp)?;
    let config = SolverConfig {
        seed: args.seed,
        ..SolverConfig::input_guided()
    };
    let params = build_params(args, &cnf, &set, &config)?;
    let (best, outcome, trace) = minimize(&cnf, &set, strategy, &params, &config)
        .map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(path) = trace_csv {
        write_file(path, trace.to_csv().as_bytes())?;
    }
    println!("initial={}", set.format());
    println!("best={}", best.format());
    println!("power={}", best.power());
    println!("status={}", outcome.status.as_str());
    println!("tau={:.6}", outcome.tau);
    println!("T={:.6}", outcome.t.expect("minimize returns a defined T"));
    println!("candidates={}", trace.records.len());
    Ok(0)
}

fn cmd_attack(args: &AttackArgs, mode: AttackMode) -> Result<i32, CliError> {
    let gen = args.gen.resolve()?;
    let stream = obtain_keystream(&gen, args.keystream.as_deref(), args.key_hex.as_deref(), args.len)?;
    let enc = encode(&gen, stream.len()).map_err(|e| CliError::usage(e.to_string()))?;
    let set = resolve_decomp(args.decomp.as_deref(), &gen)?;
    set.validate_against(&enc.cnf)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let d = set.power();
    let k = match args.k {
        Some(k) if k <= d => k,
        Some(k) => {
            return Err(CliError::usage(format!(
                "k={k} exceeds decomposition power {d}"
            )))
        }
        // at least four batches per worker for load balance
        None => {
            let target = (4 * args.workers.max(1) as u64).next_power_of_two();
            (target.trailing_zeros() as usize).min(d)
        }
    };
    if let Some(path) = &args.manifest {
        let manifest =
            export_manifest(&set, k).map_err(|e| CliError::usage(e.to_string()))?;
        write_file(path, manifest.as_bytes())?;
    }
    let cancel = Arc::new(AtomicBool::new(false));
    {
        let cancel = cancel.clone();
        let _ = ctrlc::set_handler(move || {
            cancel.store(true, Ordering::Relaxed);
        });
    }
    let config = AttackConfig {
        workers: args.workers.max(1),
        k,
        mode,
        solver_config: SolverConfig {
            seed: args.seed,
            ..SolverConfig::input_guided()
        },
        deadline: args.deadline.map(Duration::from_secs_f64),
        cancel: Some(cancel.clone()),
    };
    let outcome = run_attack(&enc, &gen, &stream, &set, &config).map_err(|e| {
        use inversat::runner::RunnerError;
        match e {
            RunnerError::VerificationFailed { .. } => CliError::internal(e.to_string()),
            other => CliError::usage(other.to_string()),
        }
    })?;
    let report = render_attack_report(&gen, &set, k, &config, &outcome)?;
    print!("{report}");
    if let Some(path) = &args.out {
        write_file(path, report.as_bytes())?;
    }
    if let Some(path) = &args.trace_csv {
        write_file(path, outcome.timings_csv().as_bytes())?;
    }
    Ok(match outcome.status {
        AttackStatus::KeyFound => 0,
        AttackStatus::Exhausted => EXIT_EXHAUSTED,
        AttackStatus::DeadlineExceeded => EXIT_BUDGET,
    })
}

fn render_attack_report(
    gen: &GeneratorSpec,
    set: &DecompositionSet,
    k: usize,
    config: &AttackConfig,
    outcome: &AttackOutcome,
) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str(&format!("decomposition={}\n", set.format()));
    out.push_str(&format!("power={}\n", set.power()));
    out.push_str(&format!("k={k}\n"));
    out.push_str(&format!("workers={}\n", config.workers));
    out.push_str(&format!(
        "mode={}\n",
        match config.mode {
            AttackMode::FirstSat => "first",
            AttackMode::FindAll => "all",
        }
    ));
    out.push_str(&format!(
        "status={}\n",
        match outcome.status {
            AttackStatus::KeyFound => "found",
            AttackStatus::Exhausted => "exhausted",
            AttackStatus::DeadlineExceeded => "deadline",
        }
    ));
    out.push_str(&format!("cells_solved={}\n", outcome.cells_solved));
    out.push_str(&format!("cells_skipped={}\n", outcome.cells_skipped));
    out.push_str(&format!("wall_seconds={:.3}\n", outcome.wall.as_secs_f64()));
    out.push_str(&format!("keys={}\n", outcome.keys.len()));
    for key in &outcome.keys {
        let rendered = gen
            .format_key(key)
            .map_err(|e| CliError::internal(e.to_string()))?;
        out.push_str(&format!("key={rendered}\n"));
    }
    Ok(out)
}
