//! Optimal-play control function and the strategy paths it generates.
//!
//! The side to move in a won position plays the first move (in canonical
//! move order) that reaches a lost successor with the smallest distance to
//! mate. The losing side plays the first move whose won successor has the
//! largest one. One ply is one time step.

use std::fmt::Write as _;

use thiserror::Error;

use crate::encoding::{self, ConfigVector, EncodingError, EncodingMode, SparseDelta};
use crate::rules::{legal_moves, play_unchecked, Color, Move, Outcome, Position, RulesError};
use crate::tablebase::{Tablebase, TablebaseError, Wdl, WdlDtm};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("position is drawn; drawn play is not supported by the control function")]
    Drawn,
    #[error("position is terminal ({0:?}); there is no move to choose")]
    Terminal(Outcome),
    #[error("path did not descend in distance to mate at ply {0}")]
    Cycle(usize),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Tablebase(#[from] TablebaseError),
    #[error(transparent)]
    Rules(#[from] RulesError),
}

/// One application of the control function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Choice {
    pub mv: Move,
    pub position: Position,
    /// Value of `position` for its own side to move.
    pub value: WdlDtm,
}

/// `f(x_n) = x_{n+1}` on positions.
pub fn f_control(pos: &Position, tb: &Tablebase) -> Result<Choice, StrategyError> {
    let value = tb.value(pos)?;
    let moves = legal_moves(pos)?;
    if moves.is_empty() {
        let o = if pos.in_check() { Outcome::Checkmate } else { Outcome::Stalemate };
        return Err(StrategyError::Terminal(o));
    }
    let winning = match value.wdl {
        Wdl::Draw => return Err(StrategyError::Drawn),
        Wdl::Win => true,
        Wdl::Loss => false,
    };
    let mut best: Option<Choice> = None;
    for m in moves {
        let next = play_unchecked(pos, m);
        let v = tb.value(&next)?;
        let better = match (&best, winning) {
            (_, true) if v.wdl != Wdl::Loss => false,
            (None, _) => true,
            (Some(b), true) => v.dtm < b.value.dtm,
            (Some(b), false) => v.dtm > b.value.dtm,
        };
        if better {
            best = Some(Choice { mv: m, position: next, value: v });
        }
    }
    let best = best.expect("a won position has a losing successor");
    debug_assert_eq!(best.value.dtm.map(|d| d + 1), value.dtm);
    Ok(best)
}

/// `g(x_n) = x_{n+1} - x_n`. Strict vectors need the side to move.
pub fn g_control(x: &ConfigVector, tb: &Tablebase, side: Option<Color>) -> Result<SparseDelta, StrategyError> {
    let pos = encoding::decode(x, side)?;
    let next = f_control(&pos, tb)?;
    Ok(encoding::delta(x, &encoding::encode(&next.position, x.mode()))?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub mv: Move,
    pub position: Position,
    pub vector: ConfigVector,
    pub dtm: u16,
}

/// `x_0, x_1, ...` under optimal play, ending in checkmate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyPath {
    pub initial: Position,
    pub initial_vector: ConfigVector,
    pub initial_value: WdlDtm,
    pub steps: Vec<PathStep>,
    pub mode: EncodingMode,
    pub terminal: Outcome,
}

impl StrategyPath {
    /// Number of points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn plies(&self) -> usize {
        self.steps.len()
    }

    /// `x_n`.
    pub fn vector(&self, n: usize) -> &ConfigVector {
        if n == 0 {
            &self.initial_vector
        } else {
            &self.steps[n - 1].vector
        }
    }

    pub fn position(&self, n: usize) -> &Position {
        if n == 0 {
            &self.initial
        } else {
            &self.steps[n - 1].position
        }
    }

    /// Move played at `x_n`, if the path continues past it.
    pub fn move_at(&self, n: usize) -> Option<Move> {
        self.steps.get(n).map(|s| s.mv)
    }

    /// Distance to mate at `x_n`.
    pub fn dtm(&self, n: usize) -> Option<u16> {
        if n == 0 {
            self.initial_value.dtm
        } else {
            Some(self.steps[n - 1].dtm)
        }
    }

    /// One row per point: `n,move,dtm`, then every component. The move
    /// column holds the move that produced the row (`-` for the start).
    pub fn to_csv(&self) -> String {
        let spec = self.initial.spec();
        let mut out = String::from("n,move,dtm");
        for sq in spec.squares() {
            out.push(',');
            out.push_str(&spec.square_name(sq));
        }
        if self.mode == EncodingMode::Augmented {
            out.push_str(",side");
        }
        out.push('\n');
        for n in 0..self.len() {
            let mv = match n {
                0 => "-".to_string(),
                _ => self.steps[n - 1].mv.to_uci(spec),
            };
            let dtm = self.dtm(n).map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{n},{mv},{dtm},{}", self.vector(n).dump());
        }
        out
    }
}

/// Follows the control function from `pos` to checkmate.
pub fn generate_path(pos: &Position, tb: &Tablebase, mode: EncodingMode) -> Result<StrategyPath, StrategyError> {
    let initial_value = tb.value(pos)?;
    let Some(start_dtm) = initial_value.dtm else {
        return Err(StrategyError::Drawn);
    };
    let mut steps: Vec<PathStep> = Vec::with_capacity(start_dtm as usize);
    let mut current = *pos;
    let mut dtm = start_dtm;
    while dtm > 0 {
        let c = f_control(&current, tb)?;
        let next_dtm = c.value.dtm.ok_or(StrategyError::Cycle(steps.len()))?;
        if next_dtm + 1 != dtm || steps.len() >= start_dtm as usize {
            return Err(StrategyError::Cycle(steps.len()));
        }
        steps.push(PathStep {
            mv: c.mv,
            position: c.position,
            vector: encoding::encode(&c.position, mode),
            dtm: next_dtm,
        });
        current = c.position;
        dtm = next_dtm;
    }
    let terminal = crate::rules::outcome(&current)?;
    Ok(StrategyPath {
        initial: *pos,
        initial_vector: encoding::encode(pos, mode),
        initial_value,
        steps,
        mode,
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{parse_fen, BoardSpec};
    use crate::tablebase::{solve_with, MaterialClass, SolveOptions};

    fn kqk4() -> (BoardSpec, Tablebase) {
        let spec = BoardSpec::sized(4, 4).unwrap();
        let mc = MaterialClass::parse("KQvK", spec).unwrap();
        (spec, solve_with(&mc, &SolveOptions { workers: 1, mem_budget_mb: 256 }).unwrap())
    }

    #[test]
    fn dtm_one_mates() {
        let (spec, tb) = kqk4();
        let p = parse_fen("k3/4/1K2/2Q1 w - -", &spec).unwrap();
        let c = f_control(&p, &tb).unwrap();
        assert_eq!(crate::rules::outcome(&c.position).unwrap(), Outcome::Checkmate);
        assert_eq!(c.value, WdlDtm::loss(0));
    }

    #[test]
    fn terminal_and_drawn_are_errors() {
        let (spec, tb) = kqk4();
        let mated = parse_fen("k3/1Q2/1K2/4 b - -", &spec).unwrap();
        assert!(matches!(f_control(&mated, &tb), Err(StrategyError::Terminal(Outcome::Checkmate))));
        let path = generate_path(&mated, &tb, EncodingMode::Strict).unwrap();
        assert_eq!(path.plies(), 0);
        assert_eq!(path.terminal, Outcome::Checkmate);
        let stalemate = parse_fen("k3/2Q1/1K2/4 b - -", &spec).unwrap();
        assert!(matches!(f_control(&stalemate, &tb), Err(StrategyError::Terminal(Outcome::Stalemate))));
        // black to move takes the undefended queen
        let drawn = parse_fen("4/4/kQ2/3K b - -", &spec).unwrap();
        assert!(matches!(generate_path(&drawn, &tb, EncodingMode::Strict), Err(StrategyError::Drawn)));
    }

    #[test]
    fn paths_follow_dtm_and_eq1() {
        let (_, tb) = kqk4();
        for i in tb.decisive_indices().into_iter().step_by(37) {
            let p = tb.position(i).unwrap();
            let path = generate_path(&p, &tb, EncodingMode::Augmented).unwrap();
            assert_eq!(path.plies() as u16, path.initial_value.dtm.unwrap());
            assert_eq!(path.terminal, Outcome::Checkmate);
            for n in 0..path.plies() {
                let g = g_control(path.vector(n), &tb, None).unwrap();
                assert_eq!(&path.vector(n).apply(&g), path.vector(n + 1));
                assert_eq!(path.dtm(n + 1).unwrap() + 1, path.dtm(n).unwrap());
            }
        }
    }

    #[test]
    fn strict_needs_side() {
        let (spec, tb) = kqk4();
        let p = parse_fen("k3/4/1K2/2Q1 w - -", &spec).unwrap();
        let x = encoding::encode(&p, EncodingMode::Strict);
        assert!(matches!(g_control(&x, &tb, None), Err(StrategyError::Encoding(EncodingError::MissingSide))));
        assert!(g_control(&x, &tb, Some(Color::White)).is_ok());
    }

    #[test]
    fn csv_shape() {
        let (spec, tb) = kqk4();
        let p = parse_fen("k3/4/1K2/2Q1 w - -", &spec).unwrap();
        let csv = generate_path(&p, &tb, EncodingMode::Augmented).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("n,move,dtm,a1,b1,"));
        assert!(lines[0].ends_with(",d4,side"));
        assert!(lines[1].starts_with("0,-,1,"));
        assert!(lines[2].starts_with("1,c1c4,0,"));
        assert_eq!(lines[2].split(',').count(), 3 + 17);
    }
}
