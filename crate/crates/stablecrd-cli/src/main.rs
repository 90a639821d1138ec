//! Command-line front end: parse and validate decider sources, compute the
//! minimal unstable set, answer batch stability queries, run the exhaustive
//! oracle, and diff the two.
//!
//! Exit codes are a contract:
//!   0 success, 1 comparison mismatch, 2 parse or input error,
//!   3 cap exceeded, 4 unsupported reaction class, 5 uncertifiable query.
//!
//! Verdicts and machine output go to stdout; diagnostics and timing go to
//! stderr, so stdout is byte-identical across repeated invocations.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stablecrd::minu::{self, GenOptions, GenResult, GenStats};
use stablecrd::model::{Configuration, Crd};
use stablecrd::oracle::{self, DecidesFailureReason, DecidesOutcome, StabilityKind};
use stablecrd::textio;
use stablecrd::{Antichain, IndexBackend, MinuError, OracleError, ParseError};

#[derive(Parser)]
#[command(name = "stablecrd", version, about = "Analyzer for chemical reaction deciders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a decider source and report its shape.
    Validate {
        /// `.crd` decider or `.pp` protocol table
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compute the minimal output-unstable set.
    Minu {
        file: PathBuf,
        /// Dominance-index backend (auto: linear scan below 64 elements).
        #[arg(long, value_enum, default_value_t = IndexChoice::Auto)]
        index: IndexChoice,
        /// Drop candidates above this size (result flagged truncated).
        #[arg(long)]
        size_cap: Option<u64>,
        /// Bound on emitted antichain elements.
        #[arg(long, default_value_t = minu::DEFAULT_ELEMENT_CAP)]
        element_cap: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check configurations for output (or total) stability.
    Check {
        file: PathBuf,
        /// Configuration literals, e.g. `A + 3Y`
        #[arg(required = true)]
        configs: Vec<String>,
        /// Reuse a cached min-unstable report instead of recomputing.
        #[arg(long)]
        minu: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::O)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = IndexChoice::Auto)]
        index: IndexChoice,
        #[arg(long)]
        size_cap: Option<u64>,
        #[arg(long, default_value_t = minu::DEFAULT_ELEMENT_CAP)]
        element_cap: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exhaustive ground truth up to a size bound.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum)]
        what: WhatArg,
        #[arg(long, default_value_t = 6)]
        max_size: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::O)]
        mode: ModeArg,
        /// Bound on visited configurations per search.
        #[arg(long, default_value_t = oracle::DEFAULT_VISIT_CAP)]
        cap: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Diff the fast minimal-unstable set against the oracle.
    Compare {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_size: u64,
        #[arg(long, default_value_t = oracle::DEFAULT_VISIT_CAP)]
        cap: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexChoice {
    Naive,
    Tree,
    Auto,
}

impl IndexChoice {
    /// The linear scan wins on small antichains; the tree pays off above a
    /// few dozen elements.
    fn resolve(self, len: usize) -> IndexBackend {
        match self {
            IndexChoice::Naive => IndexBackend::Naive,
            IndexChoice::Tree => IndexBackend::Tree,
            IndexChoice::Auto => {
                if len >= 64 {
                    IndexBackend::Tree
                } else {
                    IndexBackend::Naive
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    O,
    T,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhatArg {
    Minu,
    Stability,
    Decides,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_CLASS: u8 = 4;
const EXIT_UNCERTIFIABLE: u8 = 5;

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { message: message.into(), code }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn parse_error(path: &Path, err: &ParseError) -> CliError {
    let mut message = String::new();
    for (i, d) in err.diagnostics.iter().enumerate() {
        if i > 0 {
            message.push('\n');
        }
        message.push_str(&format!("{}:{}", path.display(), d));
    }
    CliError::new(EXIT_INPUT, message)
}

fn oracle_error(err: OracleError) -> CliError {
    let code = match &err {
        OracleError::CapExceeded { .. } => EXIT_CAP,
        OracleError::UnsupportedClass(_) => EXIT_CLASS,
        _ => EXIT_INPUT,
    };
    CliError::new(code, format!("error: {err}"))
}

fn minu_error(err: MinuError) -> CliError {
    let code = match &err {
        MinuError::UnsupportedClass(_) => EXIT_CLASS,
        MinuError::Uncertifiable { .. } => EXIT_UNCERTIFIABLE,
        _ => EXIT_INPUT,
    };
    CliError::new(code, format!("error: {err}"))
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes early (e.g. `... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Validate { file, format } => cmd_validate(&file, format),
        Command::Minu { file, index, size_cap, element_cap, format } => {
            cmd_minu(&file, index, size_cap, element_cap, format)
        }
        Command::Check { file, configs, minu, mode, index, size_cap, element_cap, format } => {
            cmd_check(&file, &configs, minu.as_deref(), mode, index, size_cap, element_cap, format)
        }
        Command::Oracle { file, what, max_size, mode, cap, format } => {
            cmd_oracle(&file, what, max_size, mode, cap, format)
        }
        Command::Compare { file, max_size, cap } => cmd_compare(&file, max_size, cap),
    }
}

/// Loaded decider plus provenance for reporting.
struct Source {
    crd: Crd,
    transitions: Option<usize>,
}

fn load_source(path: &Path) -> Result<Source, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_INPUT, format!("error: {}: {e}", path.display())))?;
    if path.extension().is_some_and(|ext| ext == "pp") {
        let table = textio::parse_protocol(&text).map_err(|e| parse_error(path, &e))?;
        let crd = textio::import_protocol(&table);
        Ok(Source { crd, transitions: Some(table.delta.len()) })
    } else {
        let crd = textio::parse_crd(&text).map_err(|e| parse_error(path, &e))?;
        Ok(Source { crd, transitions: None })
    }
}

fn threads_from_env() -> usize {
    match std::env::var("STABLECRD_THREADS") {
        Ok(v) => v.trim().parse().unwrap_or(1),
        Err(_) => 1,
    }
}

fn gen_options(index: IndexChoice, size_cap: Option<u64>, element_cap: u64) -> GenOptions {
    GenOptions {
        size_cap,
        element_cap,
        backend: index.resolve(0),
        threads: threads_from_env(),
    }
}

fn names_of(crd: &Crd, positions: impl IntoIterator<Item = usize>) -> Vec<&str> {
    positions.into_iter().map(|p| crd.species().name(p)).collect()
}

fn cmd_validate(path: &Path, format: Format) -> Result<u8, CliError> {
    let source = load_source(path)?;
    let crd = &source.crd;
    let mute = crd.reactions().iter().filter(|r| r.is_mute()).count();
    let yes = names_of(crd, (0..crd.dim()).filter(|&p| crd.vote(p) == stablecrd::Vote::Yes));
    let no = names_of(crd, (0..crd.dim()).filter(|&p| crd.vote(p) == stablecrd::Vote::No));
    let inputs = names_of(crd, crd.inputs().iter().copied());
    let or_none = |names: &[&str]| {
        if names.is_empty() {
            "(none)".to_string()
        } else {
            names.join(", ")
        }
    };
    match format {
        Format::Text => {
            if let Some(n) = source.transitions {
                println!("imported population protocol ({n} transitions)");
            }
            println!("class: {}", crd.classify());
            println!(
                "species: {} ({})",
                crd.dim(),
                crd.species().names().join(", ")
            );
            println!("reactions: {} ({} mute)", crd.reactions().len(), mute);
            println!("inputs: {}", or_none(&inputs));
            println!("yes: {}", or_none(&yes));
            println!("no: {}", or_none(&no));
        }
        Format::Json => {
            let report = json!({
                "schema": textio::SCHEMA,
               "kind": "validate",
                "class": crd.classify().to_string(),
                "species": crd.species().names(),
                "reactions": crd.reactions().len(),
                "mute_reactions": mute,
                "inputs": inputs,
                "yes": yes,
                "no": no,
                "protocol_transitions": source.transitions,
                "crd_sha256": textio::crd_content_hash(crd),
            });
            print!("{}", textio::to_json_string(&report));
        }
    }
    Ok(0)
}

fn precondition_caveat() {
    eprintln!(
        "note: completeness of the minimal unstable set assumes the decider is \
         output stable; that precondition is not checked"
    );
}

fn cmd_minu(
    path: &Path,
    index: IndexChoice,
    size_cap: Option<u64>,
    element_cap: u64,
    format: Format,
) -> Result<u8, CliError> {
    let source = load_source(path)?;
    let crd = &source.crd;
    precondition_caveat();
    let options = gen_options(index, size_cap, element_cap);
    let result = minu::gen_min_unstable(crd, &options).map_err(minu_error)?;
    let elements = result.min_unstable.canonical_list();
    match format {
        Format::Text => {
            println!("min(U): {} configurations", elements.len());
            for c in &elements {
                println!("  {}", textio::serialize_config(c, crd.species()));
            }
            let layers: Vec<String> = result
                .stats
                .layers
                .iter()
                .map(|(k, n)| format!("size {k} -> {n}"))
                .collect();
            println!("layers: {}", layers.join(", "));
            println!("comparisons: {}", result.stats.comparisons);
            println!("predecessor computations: {}", result.stats.predecessor_computations);
            if result.truncated {
                println!(
                    "truncated: complete up to size {}",
                    result.complete_up_to.unwrap_or(0)
                );
            }
            eprintln!("elapsed: {:?}", result.stats.wall_time);
        }
        Format::Json => {
            let report = textio::min_unstable_report(
                crd,
                &elements,
                result.truncated,
                result.complete_up_to,
                result.stats.comparisons,
                result.stats.predecessor_computations,
                &result.stats.layers,
            );
            print!("{}", textio::to_json_string(&report));
        }
    }
    Ok(if result.truncated { EXIT_CAP } else { 0 })
}

/// Obtains the minimal unstable set for `check`: from a verified cache or by
/// running the generator.
fn obtain_min_unstable(
    crd: &Crd,
    cache_path: Option<&Path>,
    index: IndexChoice,
    size_cap: Option<u64>,
    element_cap: u64,
) -> Result<GenResult, CliError> {
    let (elements, truncated, complete_up_to) = match cache_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::new(EXIT_INPUT, format!("error: {}: {e}", path.display()))
            })?;
            let cache = textio::read_minu_json(&text).map_err(|e| parse_error(path, &e))?;
            if cache.crd_sha256 != textio::crd_content_hash(crd) {
                return Err(CliError::new(
                    EXIT_INPUT,
                    format!(
                        "error: {} was computed for a different decider (content hash mismatch)",
                        path.display()
                    ),
                ));
            }
            if cache.species != crd.species().names() {
                return Err(CliError::new(
                    EXIT_INPUT,
                    format!("error: {} species list does not match", path.display()),
                ));
            }
            (cache.elements, cache.truncated, cache.complete_up_to)
        }
        None => {
            precondition_caveat();
            let options = gen_options(index, size_cap, element_cap);
            let result = minu::gen_min_unstable(crd, &options).map_err(minu_error)?;
            (result.min_unstable.into_elements(), result.truncated, result.complete_up_to)
        }
    };
    let backend = index.resolve(elements.len());
    let antichain = Antichain::from_elements(crd.dim(), elements, backend)
        .map_err(|e| CliError::new(EXIT_INPUT, format!("error: {e}")))?;
    Ok(GenResult {
        min_unstable: antichain,
        stats: GenStats {
            comparisons: 0,
            predecessor_computations: 0,
            layers: Vec::new(),
            wall_time: Duration::ZERO,
        },
        truncated,
        complete_up_to,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    path: &Path,
    literals: &[String],
    cache_path: Option<&Path>,
    mode: ModeArg,
    index: IndexChoice,
    size_cap: Option<u64>,
    element_cap: u64,
    format: Format,
) -> Result<u8, CliError> {
    let source = load_source(path)?;
    let crd = &source.crd;
    let configs: Vec<Configuration> = literals
        .iter()
        .map(|lit| {
            textio::parse_config(lit, crd.species())
                .map_err(|e| CliError::new(EXIT_INPUT, format!("error: `{lit}`: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let result = match mode {
        ModeArg::O => Some(obtain_min_unstable(crd, cache_path, index, size_cap, element_cap)?),
        ModeArg::T => None,
    };

    let mut rows: Vec<(String, bool)> = Vec::new();
    for (lit, c) in literals.iter().zip(&configs) {
        let stable = match mode {
            ModeArg::O => {
                minu::check_o_stable(result.as_ref().expect("computed"), c).map_err(|e| {
                    let mut err = minu_error(e);
                    err.message = format!("error: `{lit}`: {}", err.message.trim_start_matches("error: "));
                    err
                })?
            }
            ModeArg::T => oracle::is_t_stable(crd, c)
                .map_err(|e| {
                    let mut err = oracle_error(e);
                    err.message =
                        format!("error: `{lit}`: {}", err.message.trim_start_matches("error: "));
                    err
                })?
                .stable,
        };
        rows.push((lit.clone(), stable));
    }

    let key = match mode {
        ModeArg::O => "o",
        ModeArg::T => "t",
    };
    match format {
        Format::Text => {
            for (lit, stable) in &rows {
                println!("{lit}: {key}-{}", if *stable { "stable" } else { "unstable" });
            }
        }
        Format::Json => {
            let verdicts: Vec<Value> = rows
                .iter()
                .zip(&configs)
                .map(|((_, stable), c)| verdict_json(crd, c, key, *stable))
                .collect();
            let report = json!({
                "schema": textio::SCHEMA,
                "kind": "check",
                "mode": key,
                "crd_sha256": textio::crd_content_hash(crd),
                "verdicts": verdicts,
            });
            print!("{}", textio::to_json_string(&report));
        }
    }
    Ok(0)
}

/// `{"config": {...}, "<key>_stable": bool}` with the key picked by mode.
fn verdict_json(crd: &Crd, c: &Configuration, key: &str, stable: bool) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("config".into(), textio::config_json(c, crd.species()));
    map.insert(format!("{key}_stable"), json!(stable));
    Value::Object(map)
}

fn cmd_oracle(
    path: &Path,
    what: WhatArg,
    max_size: u64,
    mode: ModeArg,
    cap: u64,
    format: Format,
) -> Result<u8, CliError> {
    let source = load_source(path)?;
    let crd = &source.crd;
    match what {
        WhatArg::Minu => {
            let antichain = oracle::min_unstable(crd, max_size, cap).map_err(oracle_error)?;
            let elements = antichain.canonical_list();
            let mut layers: Vec<(u64, u64)> = Vec::new();
            for c in &elements {
                match layers.last_mut() {
                    Some((k, n)) if *k == c.size() => *n += 1,
                    _ => layers.push((c.size(), 1)),
                }
            }
            match format {
                Format::Text => {
                    println!("min(U) up to size {max_size}: {} configurations", elements.len());
                    for c in &elements {
                        println!("  {}", textio::serialize_config(c, crd.species()));
                    }
                }
                Format::Json => {
                    let report = textio::min_unstable_report(
                        crd,
                        &elements,
                        true,
                        Some(max_size),
                        antichain.stats().comparisons,
                        0,
                        &layers,
                    );
                    print!("{}", textio::to_json_string(&report));
                }
            }
            Ok(0)
        }
        WhatArg::Stability => {
            let key = match mode {
                ModeArg::O => "o",
                ModeArg::T => "t",
            };
            let table: Vec<(Configuration, bool)> = match mode {
                ModeArg::O => oracle::o_stability_table(crd, max_size, cap).map_err(oracle_error)?,
                ModeArg::T => {
                    let mut rows = Vec::new();
                    for size in 1..=max_size {
                        for c in oracle::enumerate_exact_size(crd.dim(), size) {
                            let verdict = oracle::is_t_stable(crd, &c).map_err(oracle_error)?;
                            rows.push((c, verdict.stable));
                        }
                    }
                    rows
                }
            };
            match format {
                Format::Text => {
                    for (c, stable) in &table {
                        println!(
                            "{}: {key}-{}",
                            textio::serialize_config(c, crd.species()),
                            if *stable { "stable" } else { "unstable" }
                        );
                    }
                }
                Format::Json => {
                    let verdicts: Vec<Value> = table
                        .iter()
                        .map(|(c, stable)| verdict_json(crd, c, key, *stable))
                        .collect();
                    let report = json!({
                        "schema": textio::SCHEMA,
                        "kind": "stability-table",
                        "mode": key,
                        "max_size": max_size,
                        "crd_sha256": textio::crd_content_hash(crd),
                        "verdicts": verdicts,
                    });
                    print!("{}", textio::to_json_string(&report));
                }
            }
            Ok(0)
        }
        WhatArg::Decides => {
            let kind = match mode {
                ModeArg::O => StabilityKind::O,
                ModeArg::T => StabilityKind::T,
            };
            let outcome = oracle::decides(crd, max_size, kind, cap).map_err(oracle_error)?;
            print_decides(crd, &outcome, mode, max_size, format);
            Ok(0)
        }
    }
}

fn print_decides(crd: &Crd, outcome: &DecidesOutcome, mode: ModeArg, max_size: u64, format: Format) {
    let key = match mode {
        ModeArg::O => "o",
        ModeArg::T => "t",
    };
    match outcome {
        DecidesOutcome::Table(entries) => match format {
            Format::Text => {
                println!("decides ({key}-stable verdicts, inputs up to size {max_size}):");
                for entry in entries {
                    println!(
                        "  {}: {}",
                        textio::serialize_config(&entry.input, crd.species()),
                        entry.verdict
                    );
                }
            }
            Format::Json => {
                let rows: Vec<Value> = entries
                    .iter()
                    .map(|e| {
                        json!({
                            "input": textio::config_json(&e.input, crd.species()),
                            "verdict": e.verdict.to_string(),
                        })
                    })
                    .collect();
                let report = json!({
                    "schema": textio::SCHEMA,
                    "kind": "decides",
                    "mode": key,
                    "max_size": max_size,
                    "crd_sha256": textio::crd_content_hash(crd),
                    "inputs": rows,
                });
                print!("{}", textio::to_json_string(&report));
            }
        },
        DecidesOutcome::Failure(failure) => {
            let initial = textio::serialize_config(&failure.initial, crd.species());
            match format {
                Format::Text => {
                    println!("not a stable decider: counterexample from initial {initial}");
                    match &failure.reason {
                        DecidesFailureReason::NoStableReachable { from } => println!(
                            "  {} reaches no {key}-stable configuration",
                            textio::serialize_config(from, crd.species())
                        ),
                        DecidesFailureReason::ConflictingVerdicts { yes_witness, no_witness } => {
                            println!(
                                "  conflicting stable verdicts: yes at {}, no at {}",
                                textio::serialize_config(yes_witness, crd.species()),
                                textio::serialize_config(no_witness, crd.species())
                            )
                        }
                    }
                }
                Format::Json => {
                    let reason = match &failure.reason {
                        DecidesFailureReason::NoStableReachable { from } => json!({
                            "reason": "no-stable-reachable",
                            "from": textio::config_json(from, crd.species()),
                        }),
                        DecidesFailureReason::ConflictingVerdicts { yes_witness, no_witness } => {
                            json!({
                                "reason": "conflicting-verdicts",
                                "yes_witness": textio::config_json(yes_witness, crd.species()),
                                "no_witness": textio::config_json(no_witness, crd.species()),
                            })
                        }
                    };
                    let report = json!({
                        "schema": textio::SCHEMA,
                        "kind": "decides",
                        "mode": key,
                        "max_size": max_size,
                        "crd_sha256": textio::crd_content_hash(crd),
                        "failure": {
                            "initial": textio::config_json(&failure.initial, crd.species()),
                            "detail": reason,
                        },
                    });
                    print!("{}", textio::to_json_string(&report));
                }
            }
        }
    }
}

fn cmd_compare(path: &Path, max_size: u64, cap: u64) -> Result<u8, CliError> {
    let source = load_source(path)?;
    let crd = &source.crd;
    precondition_caveat();
    let options = GenOptions { threads: threads_from_env(), ..GenOptions::default() };
    let fast = minu::gen_min_unstable(crd, &options).map_err(minu_error)?;
    if fast.truncated && fast.complete_up_to.is_none_or(|s| s < max_size) {
        return Err(CliError::new(
            EXIT_CAP,
            "error: generator result is truncated below the comparison bound".to_string(),
        ));
    }
    let slow = oracle::min_unstable(crd, max_size, cap).map_err(oracle_error)?;

    let fast_list: Vec<Configuration> = fast
        .min_unstable
        .canonical_list()
        .into_iter()
        .filter(|c| c.size() <= max_size)
        .collect();
    let slow_list = slow.canonical_list();

    if fast_list == slow_list {
        println!(
            "PASS: {} minimal unstable configurations up to size {max_size} match the oracle",
            slow_list.len()
        );
        return Ok(0);
    }
    println!("FAIL: minimal unstable sets differ up to size {max_size}");
    let fast_set: HashSet<&Configuration> = fast_list.iter().collect();
    let slow_set: HashSet<&Configuration> = slow_list.iter().collect();
    for c in &fast_list {
        if !slow_set.contains(c) {
            println!("  generator only: {}", textio::serialize_config(c, crd.species()));
        }
    }
    for c in &slow_list {
        if !fast_set.contains(c) {
            println!("  oracle only:    {}", textio::serialize_config(c, crd.species()));
        }
    }
    Ok(EXIT_MISMATCH)
}
