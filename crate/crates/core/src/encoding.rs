//! Integer configuration vectors: one coordinate per square.
//!
//! Codes for White are 0 (empty), 1 (pawn that just made a double step and
//! can be taken en passant), 2 (any other pawn), 3 knight, 4 bishop, 5 rook,
//! 6 queen, 7 king that still holds a castling right, 8 king without one.
//! Black uses the negated codes. The augmented mode appends one trailing
//! component, +1 when White is to move and -1 when Black is.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{BoardSpec, CastleRights, Color, Move, Piece, PieceKind, Position, RulesError, Square, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingMode {
    /// One component per square; side to move is not recorded.
    Strict,
    /// Board components plus a trailing side-to-move component.
    Augmented,
}

impl std::str::FromStr for EncodingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(EncodingMode::Strict),
            "augmented" => Ok(EncodingMode::Augmented),
            _ => Err(format!("unknown encoding mode {s:?} (expected strict or augmented)")),
        }
    }
}

impl fmt::Display for EncodingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingMode::Strict => "strict",
            EncodingMode::Augmented => "augmented",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("component {value} at square {square} is not a valid piece code")]
    BadCode { square: u8, value: i8 },
    #[error("side component must be +1 or -1, found {0}")]
    BadSide(i8),
    #[error("strict vectors do not carry the side to move; pass it explicitly")]
    MissingSide,
    #[error("augmented vectors carry their own side to move")]
    UnexpectedSide,
    #[error("vector length {found} does not fit a {expected}-component {mode} vector")]
    Length { expected: usize, found: usize, mode: EncodingMode },
    #[error("cannot compare a {0} vector with a {1} vector")]
    ModeMismatch(EncodingMode, EncodingMode),
    #[error("king code 7 at square {0} has no reconstructable castling right")]
    Castle(u8),
    #[error("pawn code 1 is inconsistent: {0}")]
    EnPassant(&'static str),
    #[error(transparent)]
    Invalid(#[from] RulesError),
}

impl From<Violation> for EncodingError {
    fn from(v: Violation) -> Self {
        EncodingError::Invalid(RulesError::Invalid(v))
    }
}

/// A position written as integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigVector {
    mode: EncodingMode,
    spec: BoardSpec,
    components: Vec<i8>,
}

impl ConfigVector {
    /// Wraps raw components. Only the length is checked here; [`decode`]
    /// performs the full validation.
    pub fn from_components(
        spec: BoardSpec,
        mode: EncodingMode,
        components: Vec<i8>,
    ) -> Result<ConfigVector, EncodingError> {
        let expected = expected_len(&spec, mode);
        if components.len() != expected {
            return Err(EncodingError::Length { expected, found: components.len(), mode });
        }
        Ok(ConfigVector { mode, spec, components })
    }

    pub fn mode(&self) -> EncodingMode {
        self.mode
    }

    pub fn spec(&self) -> &BoardSpec {
        &self.spec
    }

    /// All components, including the trailing side component when augmented.
    pub fn components(&self) -> &[i8] {
        &self.components
    }

    pub fn board(&self) -> &[i8] {
        &self.components[..self.spec.num_squares()]
    }

    pub fn side_component(&self) -> Option<i8> {
        match self.mode {
            EncodingMode::Strict => None,
            EncodingMode::Augmented => self.components.last().copied(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Comma-separated components, a1 first, side component last.
    pub fn dump(&self) -> String {
        let mut s = String::with_capacity(self.components.len() * 3);
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&c.to_string());
        }
        s
    }

    /// Euclidean distance over every component.
    pub fn distance(&self, other: &ConfigVector) -> Result<f64, EncodingError> {
        self.check_compatible(other)?;
        let sq: i64 = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(&a, &b)| {
                let d = a as i64 - b as i64;
                d * d
            })
            .sum();
        Ok((sq as f64).sqrt())
    }

    /// Number of differing components.
    pub fn hamming(&self, other: &ConfigVector) -> Result<usize, EncodingError> {
        self.check_compatible(other)?;
        Ok(self.components.iter().zip(&other.components).filter(|(a, b)| a != b).count())
    }

    /// `self + delta`, componentwise.
    pub fn apply(&self, delta: &SparseDelta) -> ConfigVector {
        let mut out = self.clone();
        for &(sq, d) in &delta.entries {
            out.components[sq.index()] += d;
        }
        if let (Some(d), EncodingMode::Augmented) = (delta.side, self.mode) {
            *out.components.last_mut().unwrap() += d;
        }
        out
    }

    fn check_compatible(&self, other: &ConfigVector) -> Result<(), EncodingError> {
        if self.mode != other.mode {
            return Err(EncodingError::ModeMismatch(self.mode, other.mode));
        }
        if self.components.len() != other.components.len() || self.spec != other.spec {
            return Err(EncodingError::Length {
                expected: self.components.len(),
                found: other.components.len(),
                mode: other.mode,
            });
        }
        Ok(())
    }
}

/// Nonzero components of a vector difference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseDelta {
    /// `(square, change)` in ascending square order, never zero.
    pub entries: Vec<(Square, i8)>,
    /// Change of the side component (always +-2 between successive plies).
    pub side: Option<i8>,
}

impl SparseDelta {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.side.is_none()
    }

    pub fn negated(&self) -> SparseDelta {
        SparseDelta { entries: self.entries.iter().map(|&(s, d)| (s, -d)).collect(), side: self.side.map(|d| -d) }
    }
}

fn expected_len(spec: &BoardSpec, mode: EncodingMode) -> usize {
    spec.num_squares() + usize::from(mode == EncodingMode::Augmented)
}

/// Square whose pawn just double-stepped, if any.
fn ep_pawn_square(pos: &Position) -> Option<Square> {
    let ep = pos.ep_square()?;
    let forward = match pos.side_to_move().opposite() {
        Color::White => 1,
        Color::Black => -1,
    };
    pos.spec().offset(ep, 0, forward)
}

/// Code of a single piece in its position context.
pub fn piece_code(pos: &Position, sq: Square, piece: Piece) -> i8 {
    let magnitude = match piece.kind {
        PieceKind::Pawn => {
            if ep_pawn_square(pos) == Some(sq) {
                1
            } else {
                2
            }
        }
        PieceKind::Knight => 3,
        PieceKind::Bishop => 4,
        PieceKind::Rook => 5,
        PieceKind::Queen => 6,
        PieceKind::King => {
            if pos.castle_rights().has_any(piece.color) {
                7
            } else {
                8
            }
        }
    };
    magnitude * piece.color.sign()
}

pub fn encode(pos: &Position, mode: EncodingMode) -> ConfigVector {
    let spec = *pos.spec();
    let mut components = vec![0i8; expected_len(&spec, mode)];
    for (sq, piece) in pos.pieces() {
        components[sq.index()] = piece_code(pos, sq, piece);
    }
    if mode == EncodingMode::Augmented {
        *components.last_mut().unwrap() = pos.side_to_move().sign();
    }
    ConfigVector { mode, spec, components }
}

/// Inverse of [`encode`]. Strict vectors need `side`; augmented vectors
/// must not be given one. The ply counter of the result is 0 or 1.
pub fn decode(v: &ConfigVector, side: Option<Color>) -> Result<Position, EncodingError> {
    let spec = v.spec;
    let side = match (v.mode, side) {
        (EncodingMode::Strict, Some(s)) => s,
        (EncodingMode::Strict, None) => return Err(EncodingError::MissingSide),
        (EncodingMode::Augmented, Some(_)) => return Err(EncodingError::UnexpectedSide),
        (EncodingMode::Augmented, None) => match v.side_component() {
            Some(1) => Color::White,
            Some(-1) => Color::Black,
            Some(other) => return Err(EncodingError::BadSide(other)),
            None => unreachable!("augmented vectors have a side component"),
        },
    };

    let mut placement = Vec::new();
    let mut ep_pawns = Vec::new();
    let mut castle_kings = Vec::new();
    for (i, &code) in v.board().iter().enumerate() {
        if code == 0 {
            continue;
        }
        let sq = Square(i as u8);
        let color = if code > 0 { Color::White } else { Color::Black };
        let kind = match code.unsigned_abs() {
            1 => {
                ep_pawns.push((sq, color));
                PieceKind::Pawn
            }
            2 => PieceKind::Pawn,
            3 => PieceKind::Knight,
            4 => PieceKind::Bishop,
            5 => PieceKind::Rook,
            6 => PieceKind::Queen,
            7 => {
                castle_kings.push((sq, color));
                PieceKind::King
            }
            8 => PieceKind::King,
            _ => return Err(EncodingError::BadCode { square: i as u8, value: code }),
        };
        placement.push((sq, Piece::new(color, kind)));
    }

    let ep = match ep_pawns.as_slice() {
        [] => None,
        [(sq, color)] => {
            if *color == side {
                return Err(EncodingError::EnPassant("double-stepped pawn belongs to the side to move"));
            }
            let back = match color {
                Color::White => -1,
                Color::Black => 1,
            };
            Some(spec.offset(*sq, 0, back).ok_or(EncodingError::EnPassant("pawn on an edge rank"))?)
        }
        _ => return Err(EncodingError::EnPassant("more than one double-stepped pawn")),
    };

    let mut castling = CastleRights::NONE;
    for &(sq, color) in &castle_kings {
        let mut any = false;
        for king_side in [true, false] {
            let Some(g) = spec.castle_geometry(color, king_side) else { continue };
            let rook_home = placement.iter().any(|&(s, p)| s == g.rook_from && p == Piece::new(color, PieceKind::Rook));
            if g.king_from == sq && rook_home {
                castling = castling.with(color, king_side, true);
                any = true;
            }
        }
        if !any {
            return Err(EncodingError::Castle(sq.0));
        }
    }

    Ok(Position::new(spec, &placement, side, ep, castling, side.index() as u32)?)
}

/// `pos` with the castle rights that survive an encode/decode round trip:
/// a side holding any right is credited with every castle whose king and
/// rook stand on their home squares. Rooks share one code, so a rook that
/// lost its right but stands at home cannot be told apart.
pub fn reconstructable(pos: &Position) -> Position {
    let spec = *pos.spec();
    let mut castling = CastleRights::NONE;
    for color in [Color::White, Color::Black] {
        if !pos.castle_rights().has_any(color) {
            continue;
        }
        for king_side in [true, false] {
            let Some(g) = spec.castle_geometry(color, king_side) else { continue };
            let home = pos.piece_at(g.king_from) == Some(Piece::new(color, PieceKind::King))
                && pos.piece_at(g.rook_from) == Some(Piece::new(color, PieceKind::Rook));
            if home {
                castling = castling.with(color, king_side, true);
            }
        }
    }
    let placement: Vec<(Square, Piece)> = pos.pieces().collect();
    Position::new(spec, &placement, pos.side_to_move(), pos.ep_square(), castling, pos.ply())
        .expect("adding rights with king and rook at home keeps the position valid")
}

/// Nonzero entries of `b - a`.
pub fn delta(a: &ConfigVector, b: &ConfigVector) -> Result<SparseDelta, EncodingError> {
    a.check_compatible(b)?;
    let n = a.spec.num_squares();
    let entries = (0..n)
        .filter_map(|i| {
            let d = b.components[i] - a.components[i];
            (d != 0).then_some((Square(i as u8), d))
        })
        .collect();
    let side = match a.mode {
        EncodingMode::Strict => None,
        EncodingMode::Augmented => {
            let d = b.components[n] - a.components[n];
            (d != 0).then_some(d)
        }
    };
    Ok(SparseDelta { entries, side })
}

/// Kind of a legal move, for predicting how many squares its delta touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveCase {
    Quiet,
    Capture,
    EnPassant,
    Castle,
    Promotion,
}

pub fn move_case(pos: &Position, m: Move) -> MoveCase {
    let Some(piece) = pos.piece_at(m.from) else { return MoveCase::Quiet };
    let spec = pos.spec();
    if m.promotion.is_some() {
        return MoveCase::Promotion;
    }
    if piece.kind == PieceKind::King && spec.file_of(m.from).abs_diff(spec.file_of(m.to)) == 2 {
        return MoveCase::Castle;
    }
    if piece.kind == PieceKind::Pawn && Some(m.to) == pos.ep_square() && spec.file_of(m.from) != spec.file_of(m.to) {
        return MoveCase::EnPassant;
    }
    if pos.piece_at(m.to).is_some() {
        MoveCase::Capture
    } else {
        MoveCase::Quiet
    }
}

/// Board entries of `delta(encode(pos), encode(next))` for the legal move
/// `m` from `pos` to `next`: 2 for a quiet move, capture or promotion, 3
/// for en passant, 4 for castling, plus one for a double-stepped pawn that
/// stays on the board and loses its code 1, plus one for each king that
/// stays put while its side loses its last castling right.
pub fn expected_delta_entries(pos: &Position, m: Move, next: &Position) -> usize {
    let case = move_case(pos, m);
    let mut n = match case {
        MoveCase::Quiet | MoveCase::Capture | MoveCase::Promotion => 2,
        MoveCase::EnPassant => 3,
        MoveCase::Castle => 4,
    };
    if let Some(sq) = ep_pawn_square(pos) {
        if case != MoveCase::EnPassant && m.to != sq {
            n += 1;
        }
    }
    for c in Color::ALL {
        let king_moves = c == pos.side_to_move() && pos.piece_at(m.from).is_some_and(|p| p.kind == PieceKind::King);
        if !king_moves && pos.castle_rights().has_any(c) && !next.castle_rights().has_any(c) {
            n += 1;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{apply_move, parse_fen};

    fn std_pos(fen: &str) -> Position {
        parse_fen(fen, &BoardSpec::standard()).unwrap()
    }

    fn sq(name: &str) -> Square {
        BoardSpec::standard().parse_square(name).unwrap()
    }

    #[test]
    fn piece_codes() {
        let pos = std_pos("3rk3/8/8/8/8/8/8/3QK3 b - -");
        let v = encode(&pos, EncodingMode::Augmented);
        assert_eq!(v.components()[sq("d1").index()], 6);
        assert_eq!(v.components()[sq("d8").index()], -5);
        assert_eq!(v.components()[sq("e1").index()], 8);
        assert_eq!(v.components()[sq("e4").index()], 0);
        assert_eq!(v.side_component(), Some(-1));
        assert_eq!(v.len(), 65);
        assert_eq!(encode(&pos, EncodingMode::Strict).len(), 64);
    }

    #[test]
    fn pawn_and_king_rights_codes() {
        let pos = std_pos("r3k3/pppp4/8/8/4P3/8/PPPP4/4K2R b Kq e3");
        let v = encode(&pos, EncodingMode::Strict);
        assert_eq!(v.components()[sq("e4").index()], 1);
        assert_eq!(v.components()[sq("a2").index()], 2);
        assert_eq!(v.components()[sq("a7").index()], -2);
        assert_eq!(v.components()[sq("e1").index()], 7);
        assert_eq!(v.components()[sq("e8").index()], -7);
    }

    #[test]
    fn round_trip_simple() {
        let pos = std_pos("8/8/4k3/8/4K3/8/8/8 w - -");
        let v = encode(&pos, EncodingMode::Augmented);
        assert_eq!(decode(&v, None).unwrap(), pos);
        let s = encode(&pos, EncodingMode::Strict);
        assert_eq!(decode(&s, Some(Color::White)).unwrap(), pos);
    }

    #[test]
    fn lost_right_beside_a_home_rook_is_restored() {
        let pos = std_pos("rn1qk1nr/1pp3p1/p3b3/2bppp1p/3PP2P/P2B1P2/1PPN2P1/R1BQK1NR b Kkq -");
        let back = decode(&encode(&pos, EncodingMode::Augmented), None).unwrap();
        assert!(!back.same_state(&pos));
        assert!(back.same_state(&reconstructable(&pos)));
        assert!(back.castle_rights().has(Color::White, false));
        let canonical = std_pos("r3k3/pppp4/8/8/4P3/8/PPPP4/4K2R b Kq e3");
        assert!(reconstructable(&canonical).same_state(&canonical));
    }

    #[test]
    fn decode_errors() {
        let spec = BoardSpec::standard();
        let mut c = vec![0i8; 64];
        c[3] = 6;
        c[10] = 6;
        c[60] = -8;
        let v = ConfigVector::from_components(spec, EncodingMode::Strict, c.clone()).unwrap();
        assert_eq!(
            decode(&v, Some(Color::White)).unwrap_err(),
            EncodingError::from(Violation::KingCount(Color::White, 0))
        );
        assert_eq!(decode(&v, None).unwrap_err(), EncodingError::MissingSide);
        c[20] = 9;
        let v = ConfigVector::from_components(spec, EncodingMode::Strict, c).unwrap();
        assert!(matches!(decode(&v, Some(Color::White)), Err(EncodingError::BadCode { value: 9, .. })));
        let aug = encode(&std_pos("8/8/4k3/8/4K3/8/8/8 w - -"), EncodingMode::Augmented);
        assert_eq!(decode(&aug, Some(Color::White)).unwrap_err(), EncodingError::UnexpectedSide);
    }

    #[test]
    fn king_code_seven_needs_home_rook() {
        let spec = BoardSpec::standard();
        let mut c = vec![0i8; 64];
        c[sq("e1").index()] = 7;
        c[sq("e8").index()] = -8;
        let v = ConfigVector::from_components(spec, EncodingMode::Strict, c.clone()).unwrap();
        assert_eq!(decode(&v, Some(Color::White)).unwrap_err(), EncodingError::Castle(sq("e1").0));
        c[sq("h1").index()] = 5;
        let v = ConfigVector::from_components(spec, EncodingMode::Strict, c).unwrap();
        let p = decode(&v, Some(Color::White)).unwrap();
        assert!(p.castle_rights().has(Color::White, true));
        assert!(!p.castle_rights().has(Color::White, false));
    }

    #[test]
    fn deltas_for_quiet_move_and_capture() {
        let pos = std_pos("3rk3/8/8/8/8/8/8/3QK3 w - -");
        let a = encode(&pos, EncodingMode::Strict);
        assert!(delta(&a, &a).unwrap().is_empty());

        let quiet = apply_move(&pos, Move::new(sq("d1"), sq("d4"))).unwrap();
        let d = delta(&a, &encode(&quiet, EncodingMode::Strict)).unwrap();
        assert_eq!(d.entries, vec![(sq("d1"), -6), (sq("d4"), 6)]);

        let capture = apply_move(&pos, Move::new(sq("d1"), sq("d8"))).unwrap();
        let b = encode(&capture, EncodingMode::Strict);
        let d = delta(&a, &b).unwrap();
        assert_eq!(d.entries, vec![(sq("d1"), -6), (sq("d8"), 11)]);
        assert_eq!(delta(&b, &a).unwrap(), d.negated());
        assert_eq!(a.apply(&d), b);
    }

    #[test]
    fn delta_mode_mismatch() {
        let pos = std_pos("8/8/4k3/8/4K3/8/8/8 w - -");
        let a = encode(&pos, EncodingMode::Strict);
        let b = encode(&pos, EncodingMode::Augmented);
        assert!(matches!(delta(&a, &b), Err(EncodingError::ModeMismatch(..))));
    }

    #[test]
    fn augmented_side_delta_is_two() {
        let pos = std_pos("8/8/4k3/8/4K3/8/8/8 w - -");
        let next = apply_move(&pos, Move::new(sq("e4"), sq("d4"))).unwrap();
        let d = delta(&encode(&pos, EncodingMode::Augmented), &encode(&next, EncodingMode::Augmented)).unwrap();
        assert_eq!(d.side, Some(-2));
        assert_eq!(d.entries.len(), 2);
    }

    #[test]
    fn dump_format() {
        let spec = BoardSpec::sized(2, 2).unwrap();
        let v = ConfigVector::from_components(spec, EncodingMode::Augmented, vec![8, 0, 0, -8, 1]).unwrap();
        assert_eq!(v.dump(), "8,0,0,-8,1");
    }
}
