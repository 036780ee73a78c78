//! Static evaluators of bounded size fitted against the solved tables.
//!
//! A feature chain names simple board statistics. A model of capacity `c`
//! is an ordinary least-squares fit of distance to mate on the first `c`
//! features plus a bias, so models along the chain are nested. The error
//! that remains is the floor for evaluators of that size.

use serde::Serialize;
use thiserror::Error;

use crate::rules::{pseudo_legal_count, Color, PieceKind, Position};
use crate::tablebase::{Tablebase, TablebaseError, Wdl};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("capacity {capacity} out of range 0..={max}")]
    Capacity { capacity: usize, max: usize },
    #[error("empty dataset")]
    Empty,
    #[error("dataset rows have {found} features, model expects {expected}")]
    Shape { expected: usize, found: usize },
    #[error(transparent)]
    Tablebase(#[from] TablebaseError),
}

/// The default chain, in order.
pub const FEATURE_CHAIN: [&str; 16] = [
    "white_pawns",
    "white_knights",
    "white_bishops",
    "white_rooks",
    "white_queens",
    "black_pawns",
    "black_knights",
    "black_bishops",
    "black_rooks",
    "black_queens",
    "king_distance",
    "defender_edge_distance",
    "defender_corner_distance",
    "side_to_move",
    "white_mobility",
    "black_mobility",
];

/// An ordered list of feature names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSet {
    names: Vec<String>,
}

impl FeatureSet {
    pub fn chain() -> FeatureSet {
        FeatureSet { names: FEATURE_CHAIN.iter().map(|s| s.to_string()).collect() }
    }

    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<FeatureSet, EvalError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().trim().to_string()).collect();
        for n in &names {
            if !FEATURE_CHAIN.contains(&n.as_str()) {
                return Err(EvalError::UnknownFeature(n.clone()));
            }
        }
        Ok(FeatureSet { names })
    }

    /// `chain`, or a comma-separated list of names.
    pub fn parse(text: &str) -> Result<FeatureSet, EvalError> {
        if text.trim() == "chain" {
            return Ok(FeatureSet::chain());
        }
        let parts: Vec<&str> = text.split(',').filter(|s| !s.trim().is_empty()).collect();
        FeatureSet::new(&parts)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// The side with less material, Black on equal material.
fn defender(pos: &Position) -> Color {
    if pos.material_points(Color::Black) > pos.material_points(Color::White) {
        Color::White
    } else {
        Color::Black
    }
}

fn count(pos: &Position, color: Color, kind: PieceKind) -> f64 {
    pos.pieces().filter(|(_, p)| p.color == color && p.kind == kind).count() as f64
}

fn feature(pos: &Position, name: &str) -> Option<f64> {
    let spec = pos.spec();
    let (w, h) = (spec.width(), spec.height());
    let king = |c| pos.king_square(c).expect("valid position has both kings");
    let v = match name {
        "white_pawns" => count(pos, Color::White, PieceKind::Pawn),
        "white_knights" => count(pos, Color::White, PieceKind::Knight),
        "white_bishops" => count(pos, Color::White, PieceKind::Bishop),
        "white_rooks" => count(pos, Color::White, PieceKind::Rook),
        "white_queens" => count(pos, Color::White, PieceKind::Queen),
        "black_pawns" => count(pos, Color::Black, PieceKind::Pawn),
        "black_knights" => count(pos, Color::Black, PieceKind::Knight),
        "black_bishops" => count(pos, Color::Black, PieceKind::Bishop),
        "black_rooks" => count(pos, Color::Black, PieceKind::Rook),
        "black_queens" => count(pos, Color::Black, PieceKind::Queen),
        "king_distance" => {
            let (a, b) = (king(Color::White), king(Color::Black));
            let df = spec.file_of(a).abs_diff(spec.file_of(b));
            let dr = spec.rank_of(a).abs_diff(spec.rank_of(b));
            df.max(dr) as f64
        }
        "defender_edge_distance" | "defender_corner_distance" => {
            let k = king(defender(pos));
            let (f, r) = (spec.file_of(k), spec.rank_of(k));
            let fd = f.min(w - 1 - f);
            let rd = r.min(h - 1 - r);
            if name == "defender_edge_distance" {
                fd.min(rd) as f64
            } else {
                fd.max(rd) as f64
            }
        }
        "side_to_move" => f64::from(u8::from(pos.side_to_move() == Color::White)),
        "white_mobility" => pseudo_legal_count(pos, Color::White) as f64,
        "black_mobility" => pseudo_legal_count(pos, Color::Black) as f64,
        _ => return None,
    };
    Some(v)
}

pub fn extract_features(pos: &Position, set: &FeatureSet) -> Result<FeatureVector, EvalError> {
    let values = set
        .names
        .iter()
        .map(|n| feature(pos, n).ok_or_else(|| EvalError::UnknownFeature(n.clone())))
        .collect::<Result<_, _>>()?;
    Ok(FeatureVector { values })
}

/// Decisive positions with their features and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureSet,
    pub rows: Vec<Vec<f64>>,
    pub dtm: Vec<f64>,
    /// +1 won for the side to move, -1 lost.
    pub wdl_sign: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows for the given table indices, in the given order; draws and
    /// invalid indices are skipped.
    pub fn from_indices(tb: &Tablebase, indices: &[u64], features: &FeatureSet) -> Result<Dataset, EvalError> {
        let mut ds = Dataset { features: features.clone(), rows: Vec::new(), dtm: Vec::new(), wdl_sign: Vec::new() };
        for &i in indices {
            let Some(v) = tb.entry(i).value() else { continue };
            let Some(d) = v.dtm else { continue };
            let pos = tb.position(i)?;
            ds.rows.push(extract_features(&pos, features)?.values);
            ds.dtm.push(f64::from(d));
            ds.wdl_sign.push(if v.wdl == Wdl::Win { 1.0 } else { -1.0 });
        }
        Ok(ds)
    }

    /// Every decisive position of the table.
    pub fn full(tb: &Tablebase, features: &FeatureSet) -> Result<Dataset, EvalError> {
        Dataset::from_indices(tb, &tb.decisive_indices(), features)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluatorModel {
    pub features: FeatureSet,
    /// One weight per feature; zero past the capacity and for features that
    /// add nothing to the ones before them.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub capacity: usize,
    /// Active features dropped as constant or linearly dependent.
    pub degenerate_features: Vec<String>,
    /// Separate fit of the WDL sign on the same features.
    pub wdl_weights: Vec<f64>,
    pub wdl_bias: f64,
}

impl EvaluatorModel {
    pub fn predict_dtm(&self, x: &[f64]) -> f64 {
        self.bias + dot(&self.weights, x)
    }

    /// Predicted value sign: true for a win of the side to move.
    pub fn predict_win(&self, x: &[f64]) -> bool {
        self.wdl_bias + dot(&self.wdl_weights, x) >= 0.0
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Relative pivot below which a column counts as dependent on earlier ones.
const PIVOT_TOL: f64 = 1e-9;

/// Least squares over a bias column and `cols` feature columns. Columns
/// are taken in order; one whose residual against the columns before it
/// vanishes gets weight 0 and is reported as degenerate.
fn least_squares(ds: &Dataset, cols: usize, target: &[f64]) -> (f64, Vec<f64>, Vec<usize>) {
    let k = cols + 1;
    let n = ds.len() as f64;
    // Gram matrix of the centred feature columns and their products with
    // the centred target; slot 0 stands for the bias and stays empty.
    let mut mean = vec![0.0; k];
    for row in &ds.rows {
        for j in 0..cols {
            mean[j + 1] += row[j];
        }
    }
    for m in mean.iter_mut().skip(1) {
        *m /= n;
    }
    let ty_mean = target.iter().sum::<f64>() / n;
    let mut g = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    let mut z = vec![0.0; k];
    for (row, &y) in ds.rows.iter().zip(target) {
        for j in 0..cols {
            z[j + 1] = row[j] - mean[j + 1];
        }
        let yc = y - ty_mean;
        for a in 1..k {
            b[a] += z[a] * yc;
            for c in 1..=a {
                g[a][c] += z[a] * z[c];
            }
        }
    }
    // incremental Cholesky on the centred block; the bias is then the mean
    let mut l = vec![vec![0.0; k]; k];
    let mut active = vec![false; k];
    let mut degenerate = Vec::new();
    for a in 1..k {
        for c in 1..a {
            if !active[c] {
                continue;
            }
            let mut s = g[a][c];
            for t in 1..c {
                if active[t] {
                    s -= l[a][t] * l[c][t];
                }
            }
            l[a][c] = s / l[c][c];
        }
        let mut d = g[a][a];
        for t in 1..a {
            if active[t] {
                d -= l[a][t] * l[a][t];
            }
        }
        if d > PIVOT_TOL * g[a][a].max(1.0) && g[a][a] > 0.0 {
            l[a][a] = d.sqrt();
            active[a] = true;
        } else {
            degenerate.push(a - 1);
        }
    }
    // forward then back substitution over the active set
    let idx: Vec<usize> = (1..k).filter(|&a| active[a]).collect();
    let mut y = vec![0.0; k];
    for &a in &idx {
        let mut s = b[a];
        for &c in idx.iter().take_while(|&&c| c < a) {
            s -= l[a][c] * y[c];
        }
        y[a] = s / l[a][a];
    }
    let mut w = vec![0.0; k];
    for &a in idx.iter().rev() {
        let mut s = y[a];
        for &c in idx.iter().filter(|&&c| c > a) {
            s -= l[c][a] * w[c];
        }
        w[a] = s / l[a][a];
    }
    let bias = ty_mean - (1..k).map(|j| w[j] * mean[j]).sum::<f64>();
    (bias, w[1..].to_vec(), degenerate)
}

/// Fits the first `capacity` features of the dataset's feature set.
pub fn fit_evaluator(ds: &Dataset, capacity: usize) -> Result<EvaluatorModel, EvalError> {
    let max = ds.features.len();
    if capacity > max {
        return Err(EvalError::Capacity { capacity, max });
    }
    if ds.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(r) = ds.rows.iter().find(|r| r.len() != max) {
        return Err(EvalError::Shape { expected: max, found: r.len() });
    }
    let (bias, w, degenerate) = least_squares(ds, capacity, &ds.dtm);
    let (wdl_bias, ww, _) = least_squares(ds, capacity, &ds.wdl_sign);
    let pad = |mut v: Vec<f64>| {
        v.resize(max, 0.0);
        v
    };
    Ok(EvaluatorModel {
        features: ds.features.clone(),
        weights: pad(w),
        bias,
        capacity,
        degenerate_features: degenerate.iter().map(|&j| ds.features.names[j].clone()).collect(),
        wdl_weights: pad(ww),
        wdl_bias,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub dtm_mae: f64,
    pub wdl_misclassification: f64,
    pub sample_size: usize,
    pub capacity: usize,
}

pub fn dataset_error(model: &EvaluatorModel, ds: &Dataset) -> Result<ErrorReport, EvalError> {
    if ds.is_empty() {
        return Err(EvalError::Empty);
    }
    if ds.features != model.features {
        return Err(EvalError::Shape { expected: model.features.len(), found: ds.features.len() });
    }
    let mut abs = 0.0;
    let mut wrong = 0usize;
    for ((x, &d), &s) in ds.rows.iter().zip(&ds.dtm).zip(&ds.wdl_sign) {
        abs += (model.predict_dtm(x) - d).abs();
        if model.predict_win(x) != (s > 0.0) {
            wrong += 1;
        }
    }
    Ok(ErrorReport {
        dtm_mae: abs / ds.len() as f64,
        wdl_misclassification: wrong as f64 / ds.len() as f64,
        sample_size: ds.len(),
        capacity: model.capacity,
    })
}

/// Error on a seeded uniform sample of decisive positions.
pub fn evaluator_error(
    model: &EvaluatorModel,
    tb: &Tablebase,
    sample_size: usize,
    seed: u64,
) -> Result<ErrorReport, EvalError> {
    let indices = crate::dynamics::sample_decisive(tb, sample_size, seed).map_err(|_| EvalError::Empty)?;
    let ds = Dataset::from_indices(tb, &indices, &model.features)?;
    dataset_error(model, &ds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub capacity: usize,
    pub train_mae: f64,
    pub eval_mae: f64,
    pub wdl_misclassification: f64,
    pub train_size: usize,
    pub eval_size: usize,
    pub degenerate_features: Vec<String>,
}

pub const SWEEP_CSV_HEADER: &str =
    "capacity,train_mae,eval_mae,wdl_misclassification,train_size,eval_size,degenerate_features";

/// Fits each capacity in `capacities` on `train` and scores it on `eval`.
pub fn capacity_sweep(
    train: &Dataset,
    eval: &Dataset,
    capacities: std::ops::RangeInclusive<usize>,
) -> Result<Vec<SweepRow>, EvalError> {
    capacities
        .map(|c| {
            let model = fit_evaluator(train, c)?;
            let t = dataset_error(&model, train)?;
            let e = dataset_error(&model, eval)?;
            Ok(SweepRow {
                capacity: c,
                train_mae: t.dtm_mae,
                eval_mae: e.dtm_mae,
                wdl_misclassification: e.wdl_misclassification,
                train_size: t.sample_size,
                eval_size: e.sample_size,
                degenerate_features: model.degenerate_features,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.capacity,
            r.train_mae,
            r.eval_mae,
            r.wdl_misclassification,
            r.train_size,
            r.eval_size,
            r.degenerate_features.join(";")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{parse_fen, BoardSpec};

    fn krk(fen: &str) -> Position {
        parse_fen(fen, &BoardSpec::standard()).unwrap()
    }

    fn get(pos: &Position, name: &str) -> f64 {
        extract_features(pos, &FeatureSet::new(&[name]).unwrap()).unwrap().values[0]
    }

    #[test]
    fn geometry_features() {
        let p = krk("8/8/4k3/8/4K3/8/8/R7 w - -");
        assert_eq!(get(&p, "king_distance"), 2.0);
        assert_eq!(get(&p, "white_rooks"), 1.0);
        assert_eq!(get(&p, "black_rooks"), 0.0);
        assert_eq!(get(&p, "side_to_move"), 1.0);
        let corner = krk("8/8/8/8/8/8/2K5/k6R b - -");
        assert_eq!(get(&corner, "defender_edge_distance"), 0.0);
        assert_eq!(get(&corner, "defender_corner_distance"), 0.0);
        assert_eq!(get(&corner, "side_to_move"), 0.0);
        let centre = krk("8/8/8/3k4/8/8/R7/K7 w - -");
        assert_eq!(get(&centre, "defender_edge_distance"), 3.0);
        assert_eq!(get(&centre, "defender_corner_distance"), 3.0);
        let d7 = krk("8/3k4/8/8/8/8/R7/K7 w - -");
        assert_eq!(get(&d7, "defender_edge_distance"), 1.0);
        assert_eq!(get(&d7, "defender_corner_distance"), 3.0);
    }

    #[test]
    fn unknown_feature() {
        assert!(matches!(FeatureSet::parse("king_distance,tempo"), Err(EvalError::UnknownFeature(_))));
        assert_eq!(FeatureSet::parse("chain").unwrap().len(), 16);
    }

    fn synthetic(rows: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> Dataset {
        let names: Vec<&str> = FEATURE_CHAIN[..rows[0].len()].to_vec();
        let dtm = rows.iter().map(|r| f(r)).collect();
        let wdl_sign = rows.iter().map(|r| if f(r) > 5.0 { 1.0 } else { -1.0 }).collect();
        Dataset { features: FeatureSet::new(&names).unwrap(), rows, dtm, wdl_sign }
    }

    #[test]
    fn exact_linear_relation_has_zero_residual() {
        let rows: Vec<Vec<f64>> =
            (0..50).map(|i| vec![(i % 7) as f64, (i * i % 11) as f64, ((i * 3) % 5) as f64]).collect();
        let ds = synthetic(rows, |r| 2.0 + 0.5 * r[0] - 3.0 * r[1] + 1.25 * r[2]);
        let m = fit_evaluator(&ds, 3).unwrap();
        assert!(dataset_error(&m, &ds).unwrap().dtm_mae < 1e-9);
        assert!((m.weights[1] + 3.0).abs() < 1e-9);
        assert!(m.degenerate_features.is_empty());
    }

    #[test]
    fn capacity_zero_is_the_mean() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ds = synthetic(rows, |r| r[0] * r[0]);
        let m = fit_evaluator(&ds, 0).unwrap();
        let mean = ds.dtm.iter().sum::<f64>() / 10.0;
        assert!((m.bias - mean).abs() < 1e-12);
        let mad = ds.dtm.iter().map(|d| (d - mean).abs()).sum::<f64>() / 10.0;
        assert!((dataset_error(&m, &ds).unwrap().dtm_mae - mad).abs() < 1e-12);
        assert!(matches!(fit_evaluator(&ds, 2), Err(EvalError::Capacity { .. })));
    }

    #[test]
    fn dependent_and_constant_columns_are_dropped() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![4.0, i as f64, 2.0 * i as f64 + 1.0]).collect();
        let ds = synthetic(rows, |r| 3.0 * r[1] + 1.0);
        let m = fit_evaluator(&ds, 3).unwrap();
        assert_eq!(m.degenerate_features, ["white_pawns", "white_bishops"]);
        assert_eq!(m.weights[0], 0.0);
        assert_eq!(m.weights[2], 0.0);
        assert!(dataset_error(&m, &ds).unwrap().dtm_mae < 1e-9);
    }
}
