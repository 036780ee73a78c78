//! `strategia`: solve small endgame classes, follow optimal-play paths
//! through configuration space and measure how perturbed paths separate.

mod artifacts;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use strategia::dynamics::{
    is_atypical, pairs_csv, perturbation_pairs, sample_decisive, sample_experiment, AtypicalityThresholds,
    ExperimentConfig,
};
use strategia::encoding::EncodingMode;
use strategia::evalprobe::{capacity_sweep, sweep_csv, Dataset, FeatureSet};
use strategia::rules::{format_fen, parse_fen, BoardSpec, Position};
use strategia::strategy::{f_control, generate_path};
use strategia::tablebase::{self, MaterialClass, SolveOptions, Tablebase};

use artifacts::{commit, RunManifest};
use error::{CliError, EXIT_USAGE};

/// File names inside an experiment output directory.
const REPORT_FILE: &str = "report.json";
const PAIRS_FILE: &str = "pairs.csv";

#[derive(Parser)]
#[command(name = "strategia", version, about = "Endgame tablebases, strategy paths and divergence probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a material class and write the table.
    Solve(SolveArgs),
    /// Print the solved value and best move of one position.
    Probe(ProbeArgs),
    /// Write the optimal-play path from one position as CSV.
    Path(PathArgs),
    /// Write divergence records for every one-step perturbation of a position.
    Perturb(PerturbArgs),
    /// Run the seeded perturbation experiment over a sample of decisive positions.
    Experiment(ExperimentArgs),
    /// Fit nested linear evaluators and write the capacity sweep.
    Evalprobe(EvalprobeArgs),
    /// Print the atypicality verdict for one position.
    Atypical(AtypicalArgs),
    /// Print a table's header, tallies and checksum.
    Info(InfoArgs),
}

#[derive(Args)]
struct Workers {
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
}

#[derive(Args)]
struct SolveArgs {
    /// Board size as WxH, each edge 2 to 8.
    #[arg(long)]
    board: String,
    /// Material such as KRvK.
    #[arg(long)]
    material: String,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    workers: Workers,
}

#[derive(Args)]
struct TableArg {
    /// Table written by `solve`.
    #[arg(long)]
    tb: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Augmented,
}

impl From<ModeArg> for EncodingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => EncodingMode::Strict,
            ModeArg::Augmented => EncodingMode::Augmented,
        }
    }
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    table: TableArg,
    #[arg(long)]
    fen: String,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    table: TableArg,
    #[arg(long)]
    fen: String,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    table: TableArg,
    #[arg(long)]
    fen: String,
    #[arg(long, value_enum, default_value = "augmented")]
    mode: ModeArg,
    /// TOML file of atypicality thresholds; defaults apply when omitted.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
    Both,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    table: TableArg,
    /// Decisive base positions to draw.
    #[arg(long)]
    sample: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "augmented")]
    mode: ModeArg,
    /// Which artifacts to write: the JSON report, the pairs CSV, or both.
    #[arg(long, value_enum, default_value = "both")]
    format: ReportFormat,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    workers: Workers,
}

#[derive(Args)]
struct EvalprobeArgs {
    #[command(flatten)]
    table: TableArg,
    /// `chain` or a comma-separated list of feature names.
    #[arg(long, default_value = "chain")]
    features: String,
    /// Inclusive capacity range A..B.
    #[arg(long)]
    capacity_sweep: String,
    #[arg(long)]
    seed: u64,
    /// Size of the seeded evaluation sample.
    #[arg(long, default_value_t = 10_000)]
    eval_sample: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AtypicalArgs {
    #[command(flatten)]
    table: TableArg,
    #[arg(long)]
    fen: String,
    #[arg(long)]
    thresholds: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    table: TableArg,
}

fn parse_board(text: &str) -> Result<BoardSpec, CliError> {
    let bad = || CliError::Validation(format!("board {text:?} is not WxH"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: u8 = w.trim().parse().map_err(|_| bad())?;
    let h: u8 = h.trim().parse().map_err(|_| bad())?;
    if (w, h) == (8, 8) {
        return Ok(BoardSpec::standard());
    }
    Ok(BoardSpec::sized(w, h)?)
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let bad = || CliError::Validation(format!("capacity range {text:?} is not A..B"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn read_thresholds(path: Option<&Path>) -> Result<AtypicalityThresholds, CliError> {
    let Some(path) = path else { return Ok(AtypicalityThresholds::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let th: AtypicalityThresholds =
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    th.validate()?;
    Ok(th)
}

fn load_table(path: &Path, workers: usize) -> Result<Tablebase, CliError> {
    Ok(tablebase::load(path, &SolveOptions::from_env().with_workers(workers))?)
}

fn position(tb: &Tablebase, fen: &str) -> Result<Position, CliError> {
    Ok(parse_fen(fen, tb.material().spec())?)
}

/// Stdout may be a closed pipe; the artifacts are already committed by then.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn print_json(v: &serde_json::Value) {
    say(&serde_json::to_string_pretty(v).expect("json serializes"));
}

fn solve(a: &SolveArgs) -> Result<(), CliError> {
    let spec = parse_board(&a.board)?;
    let mc = MaterialClass::parse(&a.material, spec)?;
    let tb = tablebase::solve_with(&mc, &SolveOptions::from_env().with_workers(a.workers.workers as usize))?;
    let mut bytes = Vec::new();
    tablebase::write_to(&tb, &mut bytes)?;
    let config = json!({"command": "solve", "board": a.board, "material": mc.name()});
    let manifest = RunManifest::new(&config, None, Some(tb.checksum()));
    commit(vec![(a.out.clone(), bytes)], manifest)?;
    let stats = tb.stats();
    print_json(&json!({
        "material": mc.name(),
        "board": format!("{}x{}", spec.width(), spec.height()),
        "index_space": mc.index_space(),
        "stats": stats,
        "checksum": format!("{:08x}", tb.checksum()),
        "out": a.out,
    }));
    Ok(())
}

fn probe(a: &ProbeArgs) -> Result<(), CliError> {
    let tb = load_table(&a.table.tb, 1)?;
    let pos = position(&tb, &a.fen)?;
    let value = tb.value(&pos)?;
    let best = if value.is_decisive() && !pos_is_terminal(&pos)? {
        Some(f_control(&pos, &tb)?.mv.to_uci(pos.spec()))
    } else {
        None
    };
    print_json(&json!({"fen": format_fen(&pos), "wdl": value.wdl, "dtm": value.dtm, "best_move": best}));
    Ok(())
}

fn pos_is_terminal(pos: &Position) -> Result<bool, CliError> {
    Ok(strategia::rules::outcome(pos)?.is_terminal())
}

fn path(a: &PathArgs) -> Result<(), CliError> {
    let tb = load_table(&a.table.tb, 1)?;
    let pos = position(&tb, &a.fen)?;
    let mode: EncodingMode = a.mode.into();
    let p = generate_path(&pos, &tb, mode)?;
    let config = json!({"command": "path", "fen": format_fen(&pos), "mode": mode});
    let manifest = RunManifest::new(&config, None, Some(tb.checksum()));
    commit(vec![(a.out.clone(), p.to_csv().into_bytes())], manifest)?;
    say(&format!("{} plies, {}", p.plies(), p.initial_value));
    Ok(())
}

fn perturb(a: &PerturbArgs) -> Result<(), CliError> {
    let th = read_thresholds(a.thresholds.as_deref())?;
    let tb = load_table(&a.table.tb, 1)?;
    let pos = position(&tb, &a.fen)?;
    let mode: EncodingMode = a.mode.into();
    let atyp = is_atypical(&pos, &tb, &th)?;
    let pairs = perturbation_pairs(&tb, &pos, mode, &atyp.reasons)?;
    let config = json!({"command": "perturb", "fen": format_fen(&pos), "mode": mode, "thresholds": th});
    let manifest = RunManifest::new(&config, None, Some(tb.checksum()));
    commit(vec![(a.out.clone(), pairs_csv(&pairs).into_bytes())], manifest)?;
    say(&format!("{} perturbations", pairs.len()));
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    let th = read_thresholds(a.thresholds.as_deref())?;
    let tb = load_table(&a.table.tb, a.workers.workers as usize)?;
    let mut cfg = ExperimentConfig::new(a.sample, a.seed);
    cfg.thresholds = th;
    cfg.mode = a.mode.into();
    cfg.workers = a.workers.workers as usize;
    let out = sample_experiment(&tb, &cfg)?;
    let mut files = Vec::new();
    if a.format != ReportFormat::Csv {
        files.push((a.out.join(REPORT_FILE), out.report.to_json().into_bytes()));
    }
    if a.format != ReportFormat::Json {
        files.push((a.out.join(PAIRS_FILE), pairs_csv(&out.pairs).into_bytes()));
    }
    let config = json!({"command": "experiment", "config": cfg, "material": tb.material().name()});
    let manifest = RunManifest::new(&config, Some(a.seed), Some(tb.checksum()));
    commit(files, manifest)?;
    say(&format!("{} bases, {} pairs", out.report.bases, out.report.pairs));
    Ok(())
}

fn evalprobe(a: &EvalprobeArgs) -> Result<(), CliError> {
    let features = FeatureSet::parse(&a.features)?;
    let range = parse_range(&a.capacity_sweep)?;
    if *range.end() > features.len() {
        return Err(CliError::Validation(format!(
            "capacity {} exceeds the {} available features",
            range.end(),
            features.len()
        )));
    }
    let tb = load_table(&a.table.tb, 1)?;
    let train = Dataset::full(&tb, &features)?;
    let eval_indices = sample_decisive(&tb, a.eval_sample, a.seed)?;
    let eval = Dataset::from_indices(&tb, &eval_indices, &features)?;
    let rows = capacity_sweep(&train, &eval, range.clone())?;
    let config = json!({
        "command": "evalprobe",
        "features": features.names(),
        "capacities": [range.start(), range.end()],
        "eval_sample": a.eval_sample,
    });
    let manifest = RunManifest::new(&config, Some(a.seed), Some(tb.checksum()));
    commit(vec![(a.out.clone(), sweep_csv(&rows).into_bytes())], manifest)?;
    say(&format!("{} capacities, {} training rows", rows.len(), train.len()));
    Ok(())
}

fn atypical(a: &AtypicalArgs) -> Result<(), CliError> {
    let th = read_thresholds(a.thresholds.as_deref())?;
    let tb = load_table(&a.table.tb, 1)?;
    let pos = position(&tb, &a.fen)?;
    let verdict = is_atypical(&pos, &tb, &th)?;
    print_json(&json!({"fen": format_fen(&pos), "atypical": verdict.is_atypical(), "detail": verdict}));
    Ok(())
}

fn info(a: &InfoArgs) -> Result<(), CliError> {
    let tb = load_table(&a.table.tb, 1)?;
    let mc = tb.material();
    print_json(&json!({
        "format_version": tablebase::FORMAT_VERSION,
        "material": mc.name(),
        "board": format!("{}x{}", mc.spec().width(), mc.spec().height()),
        "index_space": mc.index_space(),
        "stats": tb.stats(),
        "checksum": format!("{:08x}", tb.checksum()),
        "subtables": tb.subtable_names(),
    }));
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Probe(a) => probe(a),
        Command::Path(a) => path(a),
        Command::Perturb(a) => perturb(a),
        Command::Experiment(a) => experiment(a),
        Command::Evalprobe(a) => evalprobe(a),
        Command::Atypical(a) => atypical(a),
        Command::Info(a) => info(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = json!({"error": e.kind(), "exit_code": e.exit_code(), "message": e.to_string()});
            eprintln!("{msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boards_and_ranges() {
        assert_eq!(parse_board("8x8").unwrap(), BoardSpec::standard());
        assert_eq!(parse_board("4x5").unwrap(), BoardSpec::sized(4, 5).unwrap());
        assert!(parse_board("9x9").is_err());
        assert!(parse_board("44").is_err());
        assert_eq!(parse_range("0..16").unwrap(), 0..=16);
        assert_eq!(parse_range("3..=5").unwrap(), 3..=5);
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("x..3").is_err());
    }

    #[test]
    fn grammar() {
        Cli::command_for_tests().debug_assert();
        assert!(Cli::try_parse_from(["strategia", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["strategia", "solve", "-b", "4x4"]).is_err());
        let ok = Cli::try_parse_from(["strategia", "solve", "--board", "4x4", "--material", "KQvK", "--out", "t.ctb"]);
        assert!(matches!(ok.unwrap().command, Command::Solve(SolveArgs { workers: Workers { workers: 1 }, .. })));
        let bad_format = Cli::try_parse_from([
            "strategia",
            "experiment",
            "--tb",
            "t",
            "--sample",
            "1",
            "--seed",
            "1",
            "--out",
            "d",
            "--format",
            "xml",
        ]);
        assert!(bad_format.is_err());
    }

    impl Cli {
        fn command_for_tests() -> clap::Command {
            <Cli as clap::CommandFactory>::command()
        }
    }
}
