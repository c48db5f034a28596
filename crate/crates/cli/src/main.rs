use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lambda_sync::catalog::{catalog_entries, from_name};
use lambda_sync::flow::{compare_invariants, expand, InvarianceParams, DEFAULT_FRESH};
use lambda_sync::ktheory::{bowen_franks, extract_matrix_system, k0_tower, k1_tower, DEFAULT_WINDOW};
use lambda_sync::lgs::{build_with_report, validate_lgs, LambdaGraphSystem};
use lambda_sync::sync::{check_lambda_synchronizing, Budget};
use lambda_sync::{Error, Subshift, SubshiftSpec};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lsync", version, about = "λ-synchronizing λ-graph systems and their invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the canonical λ-graph system of a subshift and validate it
    Build {
        /// spec file (JSON) or catalog name such as `dyck:2`
        #[arg(long)]
        spec: String,
        #[arg(long)]
        levels: usize,
        /// longest word searched for class representatives [default: 2L+4]
        #[arg(long)]
        word_cap: Option<usize>,
        /// horizon of the bounded fallback check [default: L+4]
        #[arg(long)]
        horizon: Option<usize>,
        /// where to write the system; printed to stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the structural conditions of a stored λ-graph system
    Validate { graph: PathBuf },
    /// Matrix system, K-group towers and Bowen–Franks groups of a stored system
    Groups {
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Table of λ-synchronization verdicts
    Sync {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        kmax: usize,
        /// [default: 2·kmax+4]
        #[arg(long)]
        word_cap: Option<usize>,
        /// [default: kmax+4]
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Write the spec of the expansion replacing a symbol by `fresh symbol`
    Expand {
        #[arg(long)]
        spec: String,
        /// [default: first symbol of the alphabet]
        #[arg(long)]
        symbol: Option<String>,
        #[arg(long, default_value = DEFAULT_FRESH)]
        fresh: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the invariants of two subshifts at L levels and at L vs 2L
    Compare {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        word_cap: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Graphviz rendering of levels l and l+1
    Dot {
        graph: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in subshifts
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

/// Success, or a verdict that failed.
enum Outcome {
    Ok,
    VerdictFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerdictFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_subshift(arg: &str) -> Result<Subshift, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        Subshift::from_json(&std::fs::read_to_string(path)?)
    } else {
        from_name(arg)
    }
}

fn load_graph(path: &Path) -> Result<LambdaGraphSystem, Error> {
    LambdaGraphSystem::from_json(&std::fs::read_to_string(path)?)
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn print_out(text: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    let newline = if text.ends_with('\n') { "" } else { "\n" };
    match out.write_all(text.as_bytes()).and_then(|()| out.write_all(newline.as_bytes())) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(value: &Value) -> Result<(), Error> {
    print_out(&serde_json::to_string_pretty(value)?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => print_out(text),
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Build { spec, levels, word_cap, horizon, out } => {
            let sub = load_subshift(&spec)?;
            let w = word_cap.unwrap_or(2 * levels + 4);
            let h = horizon.unwrap_or(levels + 4);
            let (lgs, unknown) = build_with_report(&sub, levels, w, h, Budget::default())?;
            let report = validate_lgs(&lgs);
            let ok = report.all_pass();
            if let Some(path) = &out {
                std::fs::write(path, lgs.to_json())?;
                emit(&json!({
                    "out": path.display().to_string(),
                    "levels": levels,
                    "word_cap": w,
                    "horizon": h,
                    "vertex_counts": lgs.vertex_counts(),
                    "unknown_words_per_level": unknown,
                    "validation": report,
                }))?;
            } else {
                write_or_print(None, &lgs.to_json())?;
            }
            if !ok {
                eprintln!("validation failed: {}", serde_json::to_string(&report).expect("serializable"));
                return Ok(Outcome::VerdictFailed);
            }
            Ok(Outcome::Ok)
        }
        Command::Validate { graph } => {
            let lgs = load_graph(&graph)?;
            let report = validate_lgs(&lgs);
            emit(&json!({ "vertex_counts": lgs.vertex_counts(), "all_pass": report.all_pass(), "report": report }))?;
            Ok(if report.all_pass() { Outcome::Ok } else { Outcome::VerdictFailed })
        }
        Command::Groups { graph, window } => {
            let lgs = load_graph(&graph)?;
            let ms = extract_matrix_system(&lgs);
            let k0 = k0_tower(&ms, window)?;
            let k1 = k1_tower(&ms, window)?;
            let bf = match bowen_franks(&k0, &k1) {
                Ok((bf0, bf1)) => json!({ "bf0": bf0.to_string(), "bf1": bf1.to_string() }),
                Err(e) => json!({ "undetermined": e.to_string() }),
            };
            emit(&json!({
                "matrix_system": ms.to_json(),
                "k0": k0.to_json(),
                "k1": k1.to_json(),
                "bowen_franks": bf,
            }))?;
            Ok(Outcome::Ok)
        }
        Command::Sync { spec, lmax, kmax, word_cap, horizon } => {
            let sub = load_subshift(&spec)?;
            let rows = check_lambda_synchronizing(
                &sub,
                lmax,
                kmax,
                word_cap.unwrap_or(2 * kmax + 4),
                horizon.unwrap_or(kmax + 4),
            )?;
            let failed = rows.iter().any(|r| r.verdict == "fail");
            emit(&serde_json::to_value(&rows)?)?;
            Ok(if failed { Outcome::VerdictFailed } else { Outcome::Ok })
        }
        Command::Expand { spec, symbol, fresh, out } => {
            let sub = load_subshift(&spec)?;
            let symbol = symbol.unwrap_or_else(|| sub.alphabet().name(0).to_string());
            let expanded: SubshiftSpec = expand(sub.spec(), &symbol, &fresh)?;
            write_or_print(out.as_deref(), &expanded.to_json())?;
            Ok(Outcome::Ok)
        }
        Command::Compare { left, right, levels, word_cap, horizon, window } => {
            let (l, r) = (load_subshift(&left)?, load_subshift(&right)?);
            let params = InvarianceParams { word_cap, horizon, window };
            let report = compare_invariants(&l, &r, levels, &params)?;
            emit(&serde_json::to_value(&report.rows)?)?;
            Ok(if report.has_mismatch() { Outcome::VerdictFailed } else { Outcome::Ok })
        }
        Command::Dot { graph, level, out } => {
            let lgs = load_graph(&graph)?;
            write_or_print(out.as_deref(), &lgs.to_dot(level)?)?;
            Ok(Outcome::Ok)
        }
        Command::Catalog { action: CatalogAction::List } => {
            let entries: Vec<Value> =
                catalog_entries().into_iter().map(|(name, about)| json!({ "name": name, "description": about })).collect();
            emit(&Value::Array(entries))?;
            Ok(Outcome::Ok)
        }
    }
}
