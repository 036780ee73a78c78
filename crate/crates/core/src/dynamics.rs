//! Sensitivity of strategy paths to the smallest change of a starting point.
//!
//! A perturbation moves one piece one king step. Both starting points are
//! followed under the control function and the distance between their
//! configuration vectors is tracked ply by ply.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{self, EncodingError, EncodingMode};
use crate::parallel::Workers;
use crate::rules::{format_fen, Color, Piece, PieceKind, Position, Square};
use crate::strategy::{generate_path, StrategyError, StrategyPath};
use crate::tablebase::{index, Tablebase, TablebaseError, Wdl, WdlDtm};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const REPORT_LABEL: &str = "desk-scale observation on one solvable endgame class; \
it neither confirms nor refutes sensitive dependence in full chess";

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("paths use different encodings ({0} and {1})")]
    ModeMismatch(EncodingMode, EncodingMode),
    #[error("exponent is only defined when both starts are won by the same side")]
    NotSameWinner,
    #[error("common prefix has {0} plies; at least 2 are needed")]
    PrefixTooShort(usize),
    #[error("initial distance is zero")]
    ZeroInitialDistance,
    #[error("paths coincide at the end of the common prefix")]
    Converged,
    #[error("table has no decisive entries to sample")]
    EmptyDecisive,
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Tablebase(#[from] TablebaseError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbation {
    pub base: Position,
    pub from: Square,
    pub to: Square,
    pub perturbed: Position,
}

const KING_STEPS: [(i8, i8); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Every valid relocation of one piece to an empty king-step neighbour, in
/// (piece square, target square) order. Side to move is kept. Moving the
/// pawn that just double-stepped drops the en-passant square; moving a king
/// or rook drops the castling rights it carried.
pub fn perturbations(pos: &Position) -> Vec<Perturbation> {
    let spec = *pos.spec();
    let placed: Vec<(Square, Piece)> = pos.pieces().collect();
    let ep_pawn = pos.ep_square().and_then(|ep| {
        let forward = if pos.side_to_move() == Color::White { -1 } else { 1 };
        spec.offset(ep, 0, forward)
    });
    let mut out = Vec::new();
    for (idx, &(from, piece)) in placed.iter().enumerate() {
        let mut targets: Vec<Square> = KING_STEPS.iter().filter_map(|&(df, dr)| spec.offset(from, df, dr)).collect();
        targets.sort();
        for to in targets {
            if pos.piece_at(to).is_some() {
                continue;
            }
            let mut placement = placed.clone();
            placement[idx].0 = to;
            let ep = if ep_pawn == Some(from) { None } else { pos.ep_square() };
            let mut castling = pos.castle_rights();
            if matches!(piece.kind, PieceKind::King | PieceKind::Rook) {
                for king_side in [true, false] {
                    if let Some(g) = spec.castle_geometry(piece.color, king_side) {
                        if from == g.king_from || from == g.rook_from {
                            castling = castling.with(piece.color, king_side, false);
                        }
                    }
                }
            }
            if let Ok(p) = Position::new(spec, &placement, pos.side_to_move(), ep, castling, pos.ply()) {
                out.push(Perturbation { base: *pos, from, to, perturbed: p });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeClass {
    BothDecisiveSameWinner,
    OutcomeFlip,
    DrawInvolved,
}

impl OutcomeClass {
    pub fn of(a: WdlDtm, b: WdlDtm) -> OutcomeClass {
        if a.wdl == Wdl::Draw || b.wdl == Wdl::Draw {
            OutcomeClass::DrawInvolved
        } else if a.wdl != b.wdl {
            // same side to move, so a different value is a different winner
            OutcomeClass::OutcomeFlip
        } else {
            OutcomeClass::BothDecisiveSameWinner
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeClass::BothDecisiveSameWinner => "both-decisive-same-winner",
            OutcomeClass::OutcomeFlip => "outcome-flip",
            OutcomeClass::DrawInvolved => "draw-involved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRecord {
    pub base: Position,
    pub perturbed: Position,
    pub outcome_class: OutcomeClass,
    /// Euclidean distance between `x_a(n)` and `x_b(n)` over the common prefix.
    pub d_series: Vec<f64>,
    pub hamming_series: Vec<usize>,
    /// First `n` at which the moves played differ.
    pub first_divergence_ply: Option<usize>,
    pub lambda_ft: Option<f64>,
}

impl DivergenceRecord {
    /// Index of the last common point.
    pub fn m(&self) -> usize {
        self.d_series.len() - 1
    }

    /// Checks the record's own invariants against the paths it came from.
    pub fn check(&self, a: &StrategyPath, b: &StrategyPath) -> Result<(), String> {
        let common = a.len().min(b.len());
        if self.d_series.len() != common || self.hamming_series.len() != common {
            return Err(format!("series length {} != common prefix {common}", self.d_series.len()));
        }
        if (self.d_series[0] > 0.0) != !a.initial.same_state(&b.initial) {
            return Err("d(0) must be positive for distinct starts".into());
        }
        for (d, h) in self.d_series.iter().zip(&self.hamming_series) {
            if (*d == 0.0) != (*h == 0) || !d.is_finite() {
                return Err(format!("distance {d} inconsistent with hamming {h}"));
            }
        }
        if self.lambda_ft.is_some() && self.outcome_class != OutcomeClass::BothDecisiveSameWinner {
            return Err("exponent on a pair with different outcomes".into());
        }
        Ok(())
    }
}

/// Paths of drawn starts have no steps: the start is the whole path.
pub fn path_or_start(pos: &Position, tb: &Tablebase, mode: EncodingMode) -> Result<StrategyPath, DynamicsError> {
    let value = tb.value(pos)?;
    if value.is_decisive() {
        return Ok(generate_path(pos, tb, mode)?);
    }
    Ok(StrategyPath {
        initial: *pos,
        initial_vector: encoding::encode(pos, mode),
        initial_value: value,
        steps: Vec::new(),
        mode,
        terminal: crate::rules::outcome(pos).map_err(StrategyError::from)?,
    })
}

pub fn divergence(a: &StrategyPath, b: &StrategyPath) -> Result<DivergenceRecord, DynamicsError> {
    if a.mode != b.mode {
        return Err(DynamicsError::ModeMismatch(a.mode, b.mode));
    }
    let common = a.len().min(b.len());
    let mut d_series = Vec::with_capacity(common);
    let mut hamming_series = Vec::with_capacity(common);
    for n in 0..common {
        d_series.push(a.vector(n).distance(b.vector(n))?);
        hamming_series.push(a.vector(n).hamming(b.vector(n))?);
    }
    let first_divergence_ply = (0..a.plies().min(b.plies())).find(|&n| a.move_at(n) != b.move_at(n));
    let mut rec = DivergenceRecord {
        base: a.initial,
        perturbed: b.initial,
        outcome_class: OutcomeClass::of(a.initial_value, b.initial_value),
        d_series,
        hamming_series,
        first_divergence_ply,
        lambda_ft: None,
    };
    rec.lambda_ft = finite_time_lyapunov(&rec).ok();
    Ok(rec)
}

/// `(1/m) ln(d(m)/d(0))` in nats per ply, `m` the last common ply.
pub fn finite_time_lyapunov(rec: &DivergenceRecord) -> Result<f64, DynamicsError> {
    if rec.outcome_class != OutcomeClass::BothDecisiveSameWinner {
        return Err(DynamicsError::NotSameWinner);
    }
    let m = rec.m();
    if m < 2 {
        return Err(DynamicsError::PrefixTooShort(m));
    }
    let d0 = rec.d_series[0];
    if d0 == 0.0 {
        return Err(DynamicsError::ZeroInitialDistance);
    }
    let dm = rec.d_series[m];
    if dm == 0.0 {
        return Err(DynamicsError::Converged);
    }
    Ok((dm / d0).ln() / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtypicalityThresholds {
    pub depletion_max_pieces: u32,
    /// Plies.
    pub forced_mate_max_dtm: u32,
    /// Standard points: P 1, N 3, B 3, R 5, Q 9.
    pub material_gap_min: u32,
}

impl Default for AtypicalityThresholds {
    fn default() -> Self {
        AtypicalityThresholds { depletion_max_pieces: 3, forced_mate_max_dtm: 10, material_gap_min: 5 }
    }
}

impl AtypicalityThresholds {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.depletion_max_pieces == 0 || self.forced_mate_max_dtm == 0 || self.material_gap_min == 0 {
            return Err(DynamicsError::Thresholds("all thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtypicalReason {
    Depletion,
    ForcedMate,
    MaterialGap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Atypicality {
    pub reasons: Vec<AtypicalReason>,
    pub piece_count: u32,
    pub material_gap: u32,
    pub value: WdlDtm,
}

impl Atypicality {
    pub fn is_atypical(&self) -> bool {
        !self.reasons.is_empty()
    }
}

pub fn is_atypical(pos: &Position, tb: &Tablebase, th: &AtypicalityThresholds) -> Result<Atypicality, DynamicsError> {
    let value = tb.value(pos)?;
    let piece_count = pos.piece_count() as u32;
    let material_gap = pos.material_points(Color::White).abs_diff(pos.material_points(Color::Black));
    let mut reasons = Vec::new();
    if piece_count <= th.depletion_max_pieces {
        reasons.push(AtypicalReason::Depletion);
    }
    if value.dtm.is_some_and(|d| u32::from(d) <= th.forced_mate_max_dtm) {
        reasons.push(AtypicalReason::ForcedMate);
    }
    if material_gap >= th.material_gap_min {
        reasons.push(AtypicalReason::MaterialGap);
    }
    Ok(Atypicality { reasons, piece_count, material_gap, value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sample_size: usize,
    pub seed: u64,
    pub thresholds: AtypicalityThresholds,
    pub mode: EncodingMode,
    /// Worker threads; does not affect the output.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(sample_size: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            sample_size,
            seed,
            thresholds: AtypicalityThresholds::default(),
            mode: EncodingMode::Augmented,
            workers: 1,
        }
    }
}

/// One perturbation pair, flattened for the companion CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub base_index: u64,
    pub base_fen: String,
    pub moved_from: String,
    pub moved_to: String,
    pub perturbed_fen: String,
    pub base_value: WdlDtm,
    pub perturbed_value: WdlDtm,
    pub outcome_class: OutcomeClass,
    pub common_points: usize,
    pub d0: f64,
    pub d_last: f64,
    pub hamming0: usize,
    pub hamming_last: usize,
    pub first_divergence_ply: Option<usize>,
    pub lambda_ft: Option<f64>,
    pub base_atypical: Vec<AtypicalReason>,
}

pub const PAIR_CSV_HEADER: &str = "base_index,base_fen,moved_from,moved_to,perturbed_fen,base_wdl,base_dtm,\
perturbed_wdl,perturbed_dtm,outcome_class,common_points,d0,d_last,hamming0,hamming_last,\
first_divergence_ply,lambda_ft,base_atypical";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl PairRecord {
    pub fn csv_row(&self) -> String {
        let reasons: Vec<&str> = self
            .base_atypical
            .iter()
            .map(|r| match r {
                AtypicalReason::Depletion => "depletion",
                AtypicalReason::ForcedMate => "forced-mate",
                AtypicalReason::MaterialGap => "material-gap",
            })
            .collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.base_index,
            self.base_fen,
            self.moved_from,
            self.moved_to,
            self.perturbed_fen,
            self.base_value.wdl,
            opt(self.base_value.dtm),
            self.perturbed_value.wdl,
            opt(self.perturbed_value.dtm),
            self.outcome_class.as_str(),
            self.common_points,
            self.d0,
            self.d_last,
            self.hamming0,
            self.hamming_last,
            opt(self.first_divergence_ply),
            opt(self.lambda_ft),
            reasons.join(";"),
        )
    }
}

pub fn pairs_csv(pairs: &[PairRecord]) -> String {
    let mut out = String::with_capacity(pairs.len() * 160);
    out.push_str(PAIR_CSV_HEADER);
    out.push('\n');
    for p in pairs {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub count: usize,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    /// Nearest-rank 10th..90th percentiles.
    pub deciles: Vec<f64>,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Distribution {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return Distribution { count: 0, min: None, median: None, max: None, mean: None, deciles: Vec::new() };
        }
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        let deciles = (1..10).map(|k| v[(k * n).div_ceil(10).max(1) - 1]).collect();
        Distribution {
            count: n,
            min: Some(v[0]),
            median: Some(median),
            max: Some(v[n - 1]),
            mean: Some(v.iter().sum::<f64>() / n as f64),
            deciles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LambdaExclusions {
    /// Pairs whose paths meet again at the end of the common prefix.
    pub converged: usize,
    pub prefix_too_short: usize,
    pub not_same_winner: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AtypicalityBreakdown {
    pub bases: usize,
    pub typical: usize,
    pub atypical: usize,
    pub depletion: usize,
    pub forced_mate: usize,
    pub material_gap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub label: String,
    pub material: String,
    pub board: String,
    pub table_checksum: String,
    pub seed: u64,
    pub mode: EncodingMode,
    pub thresholds: AtypicalityThresholds,
    pub sample_size_requested: usize,
    pub decisive_entries: usize,
    pub bases: usize,
    pub bases_without_perturbations: usize,
    pub pairs: usize,
    pub outcome_classes: BTreeMap<String, usize>,
    pub outcome_flip_rate: Option<f64>,
    pub lambda: Distribution,
    pub lambda_excluded: LambdaExclusions,
    /// Keyed by ply; pairs whose moves never differ are under `none`.
    pub first_divergence_histogram: BTreeMap<String, usize>,
    pub atypicality: AtypicalityBreakdown,
}

impl ExperimentReport {
    /// Pretty JSON with a trailing newline; identical for identical input.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub pairs: Vec<PairRecord>,
}

struct BaseResult {
    atypical: Atypicality,
    pairs: Vec<PairRecord>,
}

/// Pair records for every perturbation of one decisive base position.
pub fn perturbation_pairs(
    tb: &Tablebase,
    base: &Position,
    mode: EncodingMode,
    base_atypical: &[AtypicalReason],
) -> Result<Vec<PairRecord>, DynamicsError> {
    let spec = *base.spec();
    let base_index = index(base, tb.material())?;
    let path_a = generate_path(base, tb, mode)?;
    let mut pairs = Vec::new();
    for p in perturbations(base) {
        let path_b = path_or_start(&p.perturbed, tb, mode)?;
        let rec = divergence(&path_a, &path_b)?;
        pairs.push(PairRecord {
            base_index,
            base_fen: format_fen(base),
            moved_from: spec.square_name(p.from),
            moved_to: spec.square_name(p.to),
            perturbed_fen: format_fen(&p.perturbed),
            base_value: path_a.initial_value,
            perturbed_value: path_b.initial_value,
            outcome_class: rec.outcome_class,
            common_points: rec.d_series.len(),
            d0: rec.d_series[0],
            d_last: rec.d_series[rec.m()],
            hamming0: rec.hamming_series[0],
            hamming_last: rec.hamming_series[rec.m()],
            first_divergence_ply: rec.first_divergence_ply,
            lambda_ft: rec.lambda_ft,
            base_atypical: base_atypical.to_vec(),
        });
    }
    Ok(pairs)
}

fn run_base(tb: &Tablebase, index: u64, cfg: &ExperimentConfig) -> Result<BaseResult, DynamicsError> {
    let base = tb.position(index)?;
    let atypical = is_atypical(&base, tb, &cfg.thresholds)?;
    let pairs = perturbation_pairs(tb, &base, cfg.mode, &atypical.reasons)?;
    Ok(BaseResult { atypical, pairs })
}

/// Decisive indices drawn uniformly without replacement, ascending.
pub fn sample_decisive(tb: &Tablebase, sample_size: usize, seed: u64) -> Result<Vec<u64>, DynamicsError> {
    let decisive = tb.decisive_indices();
    if decisive.is_empty() {
        return Err(DynamicsError::EmptyDecisive);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = sample_size.min(decisive.len());
    let mut picked: Vec<u64> =
        rand::seq::index::sample(&mut rng, decisive.len(), k).into_iter().map(|i| decisive[i]).collect();
    picked.sort_unstable();
    Ok(picked)
}

pub fn sample_experiment(tb: &Tablebase, cfg: &ExperimentConfig) -> Result<ExperimentOutput, DynamicsError> {
    cfg.thresholds.validate()?;
    let bases = sample_decisive(tb, cfg.sample_size, cfg.seed)?;
    let workers = Workers::new(cfg.workers);
    let results = workers.map_chunks(&bases, 1, |c| run_base(tb, c[0], cfg));

    let mut pairs = Vec::new();
    let mut atyp = AtypicalityBreakdown { bases: bases.len(), ..Default::default() };
    let mut bases_without_perturbations = 0;
    for r in results {
        let r = r?;
        if r.pairs.is_empty() {
            bases_without_perturbations += 1;
        }
        if r.atypical.is_atypical() {
            atyp.atypical += 1;
        } else {
            atyp.typical += 1;
        }
        for reason in &r.atypical.reasons {
            match reason {
                AtypicalReason::Depletion => atyp.depletion += 1,
                AtypicalReason::ForcedMate => atyp.forced_mate += 1,
                AtypicalReason::MaterialGap => atyp.material_gap += 1,
            }
        }
        pairs.extend(r.pairs);
    }

    let mut outcome_classes: BTreeMap<String, usize> =
        [OutcomeClass::BothDecisiveSameWinner, OutcomeClass::OutcomeFlip, OutcomeClass::DrawInvolved]
            .iter()
            .map(|c| (c.as_str().to_string(), 0))
            .collect();
    let mut lambdas = Vec::new();
    let mut excluded = LambdaExclusions::default();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut never = 0;
    for p in &pairs {
        *outcome_classes.get_mut(p.outcome_class.as_str()).unwrap() += 1;
        match p.lambda_ft {
            Some(l) => lambdas.push(l),
            None if p.outcome_class != OutcomeClass::BothDecisiveSameWinner => excluded.not_same_winner += 1,
            None if p.common_points < 3 => excluded.prefix_too_short += 1,
            None => excluded.converged += 1,
        }
        match p.first_divergence_ply {
            Some(n) => *histogram.entry(n).or_default() += 1,
            None => never += 1,
        }
    }
    let flips = outcome_classes[OutcomeClass::OutcomeFlip.as_str()];
    let mut first_divergence_histogram: BTreeMap<String, usize> =
        histogram.into_iter().map(|(k, v)| (format!("{k:03}"), v)).collect();
    first_divergence_histogram.insert("none".into(), never);

    let mc = tb.material();
    let report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        label: REPORT_LABEL.to_string(),
        material: mc.name(),
        board: format!("{}x{}", mc.spec().width(), mc.spec().height()),
        table_checksum: format!("{:08x}", tb.checksum()),
        seed: cfg.seed,
        mode: cfg.mode,
        thresholds: cfg.thresholds,
        sample_size_requested: cfg.sample_size,
        decisive_entries: tb.decisive_indices().len(),
        bases: bases.len(),
        bases_without_perturbations,
        pairs: pairs.len(),
        outcome_classes,
        outcome_flip_rate: (!pairs.is_empty()).then(|| flips as f64 / pairs.len() as f64),
        lambda: Distribution::of(&lambdas),
        lambda_excluded: excluded,
        first_divergence_histogram,
        atypicality: atyp,
    };
    Ok(ExperimentOutput { report, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{parse_fen, BoardSpec};
    use crate::tablebase::{solve_with, MaterialClass, SolveOptions};

    fn table(name: &str, w: u8) -> Tablebase {
        let mc = MaterialClass::parse(name, BoardSpec::sized(w, w).unwrap()).unwrap();
        solve_with(&mc, &SolveOptions { workers: 1, mem_budget_mb: 512 }).unwrap()
    }

    #[test]
    fn rook_in_the_open_has_eight_neighbours() {
        let spec = BoardSpec::standard();
        let p = parse_fen("7k/8/8/8/3R4/8/8/K7 w - -", &spec).unwrap();
        let from_d4: Vec<_> =
            perturbations(&p).into_iter().filter(|q| q.from == spec.parse_square("d4").unwrap()).collect();
        assert_eq!(from_d4.len(), 8);
        assert!(from_d4.windows(2).all(|w| w[0].to < w[1].to));
    }

    #[test]
    fn perturbations_exclude_occupied_and_illegal() {
        let spec = BoardSpec::standard();
        let p = parse_fen("8/8/8/8/8/8/1r6/K1k5 w - -", &spec).unwrap();
        for q in perturbations(&p) {
            assert!(q.perturbed.validate().is_ok());
            assert_eq!(q.perturbed.side_to_move(), p.side_to_move());
            assert!(q.base.piece_at(q.to).is_none());
        }
        let kings_adjacent = perturbations(&p).iter().any(|q| {
            let wk = q.perturbed.king_square(Color::White).unwrap();
            let bk = q.perturbed.king_square(Color::Black).unwrap();
            spec.file_of(wk).abs_diff(spec.file_of(bk)) <= 1 && spec.rank_of(wk).abs_diff(spec.rank_of(bk)) <= 1
        });
        assert!(!kings_adjacent);
    }

    #[test]
    fn self_divergence_is_zero_and_lambda_undefined() {
        let tb = table("KQvK", 4);
        let i = tb.decisive_indices()[100];
        let path = generate_path(&tb.position(i).unwrap(), &tb, EncodingMode::Augmented).unwrap();
        let rec = divergence(&path, &path).unwrap();
        assert!(rec.d_series.iter().all(|&d| d == 0.0));
        assert!(rec.first_divergence_ply.is_none());
        assert!(rec.lambda_ft.is_none());
        assert!(finite_time_lyapunov(&rec).is_err());
    }

    #[test]
    fn lambda_formula() {
        let mut rec = DivergenceRecord {
            base: parse_fen("k7/8/8/8/8/8/8/K7 w - -", &BoardSpec::standard()).unwrap(),
            perturbed: parse_fen("k7/8/8/8/8/8/8/1K6 w - -", &BoardSpec::standard()).unwrap(),
            outcome_class: OutcomeClass::BothDecisiveSameWinner,
            d_series: vec![2.0, 3.0, 2.0],
            hamming_series: vec![2, 2, 2],
            first_divergence_ply: None,
            lambda_ft: None,
        };
        assert_eq!(finite_time_lyapunov(&rec).unwrap(), 0.0);
        let m = 4;
        rec.d_series = (0..=m).map(|n| 1.5 * (n as f64).exp()).collect();
        assert!((finite_time_lyapunov(&rec).unwrap() - 1.0).abs() < 1e-12);
        rec.d_series = vec![1.0, 1.0];
        assert!(matches!(finite_time_lyapunov(&rec), Err(DynamicsError::PrefixTooShort(1))));
        rec.d_series = vec![0.0, 1.0, 1.0];
        assert!(matches!(finite_time_lyapunov(&rec), Err(DynamicsError::ZeroInitialDistance)));
        rec.d_series = vec![1.0, 1.0, 0.0];
        assert!(matches!(finite_time_lyapunov(&rec), Err(DynamicsError::Converged)));
        rec.outcome_class = OutcomeClass::OutcomeFlip;
        assert!(matches!(finite_time_lyapunov(&rec), Err(DynamicsError::NotSameWinner)));
    }

    #[test]
    fn divergence_is_symmetric_with_positive_start() {
        let tb = table("KQvK", 4);
        for &i in tb.decisive_indices().iter().step_by(211).take(20) {
            let base = tb.position(i).unwrap();
            let a = generate_path(&base, &tb, EncodingMode::Strict).unwrap();
            for p in perturbations(&base) {
                let b = path_or_start(&p.perturbed, &tb, EncodingMode::Strict).unwrap();
                let ab = divergence(&a, &b).unwrap();
                let ba = divergence(&b, &a).unwrap();
                assert_eq!(ab.d_series, ba.d_series);
                assert_eq!(ab.hamming_series, ba.hamming_series);
                assert!(ab.d_series[0] > 0.0);
                ab.check(&a, &b).unwrap();
            }
        }
    }

    #[test]
    fn modes_must_match() {
        let tb = table("KQvK", 4);
        let p = tb.position(tb.decisive_indices()[0]).unwrap();
        let a = generate_path(&p, &tb, EncodingMode::Strict).unwrap();
        let b = generate_path(&p, &tb, EncodingMode::Augmented).unwrap();
        assert!(matches!(divergence(&a, &b), Err(DynamicsError::ModeMismatch(..))));
    }

    #[test]
    fn atypicality_reasons() {
        let tb = table("KQvK", 4);
        let th = AtypicalityThresholds::default();
        let spec = *tb.material().spec();
        let p = parse_fen("k3/4/1K2/2Q1 w - -", &spec).unwrap();
        let a = is_atypical(&p, &tb, &th).unwrap();
        assert_eq!(a.reasons, [AtypicalReason::Depletion, AtypicalReason::ForcedMate, AtypicalReason::MaterialGap]);
        assert_eq!(a.material_gap, 9);
        let loose = AtypicalityThresholds { depletion_max_pieces: 2, forced_mate_max_dtm: 1, material_gap_min: 10 };
        let p2 =
            tb.position(tb.decisive_indices().into_iter().find(|&i| tb.entry(i).dtm() > Some(4)).unwrap()).unwrap();
        assert!(!is_atypical(&p2, &tb, &loose).unwrap().is_atypical());
    }

    #[test]
    fn experiment_is_deterministic() {
        let tb = table("KQvK", 4);
        let cfg = ExperimentConfig::new(40, 7);
        let a = sample_experiment(&tb, &cfg).unwrap();
        let b = sample_experiment(&tb, &ExperimentConfig { workers: 3, ..cfg.clone() }).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(pairs_csv(&a.pairs), pairs_csv(&b.pairs));
        assert_eq!(a.report.bases, 40);
        assert_eq!(a.report.pairs, a.pairs.len());
        let other = sample_experiment(&tb, &ExperimentConfig::new(40, 8)).unwrap();
        assert_ne!(a.report.to_json(), other.report.to_json());
    }

    #[test]
    fn empty_decisive_set() {
        let tb = table("KvK", 4);
        assert!(matches!(sample_experiment(&tb, &ExperimentConfig::new(5, 1)), Err(DynamicsError::EmptyDecisive)));
    }

    #[test]
    fn deciles_nearest_rank() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        let d = Distribution::of(&v);
        assert_eq!(d.deciles, [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0]);
        assert_eq!(d.median, Some(10.5));
        assert_eq!(Distribution::of(&[]).count, 0);
    }
}
