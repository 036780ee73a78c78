//! Chess rules on rectangular boards from 2x2 up to 8x8.
//!
//! Squares are numbered `rank * width + file` with a1 = 0. Positions are
//! immutable values: every operation returns a fresh [`Position`].

mod fen;
mod movegen;
mod position;
pub mod random;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fen::{format_fen, parse_fen};
pub use movegen::{apply_move, legal_moves, outcome, pseudo_legal_count};
pub use position::{CastleRights, Position, Violation};

pub(crate) use movegen::{legal_moves_into, play_unchecked};

/// Largest supported board edge.
pub const MAX_EDGE: u8 = 8;
/// Size of the fixed square array backing every position.
pub const MAX_SQUARES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::White, Color::Black];

    #[inline]
    pub fn opposite(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// +1 for White, -1 for Black.
    #[inline]
    pub fn sign(self) -> i8 {
        match self {
            Color::White => 1,
            Color::Black => -1,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::White => "white",
            Color::Black => "black",
        })
    }
}

/// Piece kinds in promotion-rank order (knight < bishop < rook < queen).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    pub const ALL: [PieceKind; 6] =
        [PieceKind::Pawn, PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen, PieceKind::King];

    /// Uppercase FEN letter.
    pub fn letter(self) -> char {
        match self {
            PieceKind::Pawn => 'P',
            PieceKind::Knight => 'N',
            PieceKind::Bishop => 'B',
            PieceKind::Rook => 'R',
            PieceKind::Queen => 'Q',
            PieceKind::King => 'K',
        }
    }

    pub fn from_letter(c: char) -> Option<PieceKind> {
        Some(match c.to_ascii_uppercase() {
            'P' => PieceKind::Pawn,
            'N' => PieceKind::Knight,
            'B' => PieceKind::Bishop,
            'R' => PieceKind::Rook,
            'Q' => PieceKind::Queen,
            'K' => PieceKind::King,
            _ => return None,
        })
    }

    /// Conventional material value; the king is not counted.
    pub fn material_value(self) -> u32 {
        match self {
            PieceKind::Pawn => 1,
            PieceKind::Knight | PieceKind::Bishop => 3,
            PieceKind::Rook => 5,
            PieceKind::Queen => 9,
            PieceKind::King => 0,
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Piece {
    pub kind: PieceKind,
    pub color: Color,
}

impl Piece {
    pub const fn new(color: Color, kind: PieceKind) -> Piece {
        Piece { kind, color }
    }

    /// FEN letter: uppercase for White, lowercase for Black.
    pub fn fen_char(self) -> char {
        let c = self.kind.letter();
        match self.color {
            Color::White => c,
            Color::Black => c.to_ascii_lowercase(),
        }
    }

    pub fn from_fen_char(c: char) -> Option<Piece> {
        let kind = PieceKind::from_letter(c)?;
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        Some(Piece { kind, color })
    }
}

/// A square index, `rank * width + file`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Square(pub u8);

impl Square {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of piece kinds a pawn may promote to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PromotionSet(u8);

impl PromotionSet {
    pub const STANDARD: PromotionSet = PromotionSet(
        (1 << PieceKind::Knight as u8)
            | (1 << PieceKind::Bishop as u8)
            | (1 << PieceKind::Rook as u8)
            | (1 << PieceKind::Queen as u8),
    );

    pub fn from_kinds(kinds: &[PieceKind]) -> PromotionSet {
        PromotionSet(kinds.iter().fold(0, |acc, k| acc | k.bit()))
    }

    pub fn contains(self, kind: PieceKind) -> bool {
        self.0 & kind.bit() != 0
    }

    /// Members in ascending kind order.
    pub fn kinds(self) -> impl Iterator<Item = PieceKind> {
        PieceKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Board geometry and which special rules are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardSpec {
    width: u8,
    height: u8,
    promotions: PromotionSet,
    castling: bool,
    en_passant: bool,
}

impl BoardSpec {
    pub fn new(
        width: u8,
        height: u8,
        promotions: PromotionSet,
        castling: bool,
        en_passant: bool,
    ) -> Result<BoardSpec, RulesError> {
        if !(2..=MAX_EDGE).contains(&width) || !(2..=MAX_EDGE).contains(&height) {
            return Err(RulesError::BoardSpec(format!("board {width}x{height} outside 2x2..8x8")));
        }
        if (width as usize) * (height as usize) < 4 {
            return Err(RulesError::BoardSpec("board needs at least 4 squares".into()));
        }
        if promotions.contains(PieceKind::King) || promotions.contains(PieceKind::Pawn) {
            return Err(RulesError::BoardSpec("promotion kinds may not include king or pawn".into()));
        }
        if castling && (width != 8 || height != 8) {
            return Err(RulesError::BoardSpec("castling requires the 8x8 board".into()));
        }
        if en_passant && width < 4 {
            return Err(RulesError::BoardSpec("en passant requires width >= 4".into()));
        }
        Ok(BoardSpec { width, height, promotions, castling, en_passant })
    }

    /// Orthodox 8x8 chess.
    pub fn standard() -> BoardSpec {
        BoardSpec { width: 8, height: 8, promotions: PromotionSet::STANDARD, castling: true, en_passant: true }
    }

    /// A board without castling, the geometry used for every endgame class.
    /// En passant is active when the board is at least four files wide.
    pub fn sized(width: u8, height: u8) -> Result<BoardSpec, RulesError> {
        BoardSpec::new(width, height, PromotionSet::STANDARD, false, width >= 4)
    }

    #[inline]
    pub fn width(&self) -> u8 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u8 {
        self.height
    }

    #[inline]
    pub fn promotions(&self) -> PromotionSet {
        self.promotions
    }

    #[inline]
    pub fn castling_enabled(&self) -> bool {
        self.castling
    }

    #[inline]
    pub fn en_passant_enabled(&self) -> bool {
        self.en_passant
    }

    #[inline]
    pub fn num_squares(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Pawns only get a double step when the board is tall enough that the
    /// landing square is not the promotion rank.
    #[inline]
    pub fn double_step_allowed(&self) -> bool {
        self.height >= 5
    }

    #[inline]
    pub fn square(&self, file: u8, rank: u8) -> Square {
        debug_assert!(file < self.width && rank < self.height);
        Square(rank * self.width + file)
    }

    #[inline]
    pub fn file_of(&self, sq: Square) -> u8 {
        sq.0 % self.width
    }

    #[inline]
    pub fn rank_of(&self, sq: Square) -> u8 {
        sq.0 / self.width
    }

    /// Square at `(file + df, rank + dr)` if it lies on the board.
    #[inline]
    pub fn offset(&self, sq: Square, df: i8, dr: i8) -> Option<Square> {
        let f = self.file_of(sq) as i8 + df;
        let r = self.rank_of(sq) as i8 + dr;
        if f < 0 || r < 0 || f >= self.width as i8 || r >= self.height as i8 {
            None
        } else {
            Some(Square(r as u8 * self.width + f as u8))
        }
    }

    pub fn squares(&self) -> impl Iterator<Item = Square> {
        (0..self.num_squares() as u8).map(Square)
    }

    /// Algebraic name such as `e4`.
    pub fn square_name(&self, sq: Square) -> String {
        let file = (b'a' + self.file_of(sq)) as char;
        format!("{file}{}", self.rank_of(sq) + 1)
    }

    pub fn parse_square(&self, text: &str) -> Option<Square> {
        let mut chars = text.chars();
        let file = chars.next()?;
        let rank: u8 = chars.as_str().parse().ok()?;
        if !file.is_ascii_lowercase() {
            return None;
        }
        let file = file as u8 - b'a';
        if file >= self.width || rank == 0 || rank > self.height {
            return None;
        }
        Some(self.square(file, rank - 1))
    }

    /// Rank on which pawns of `color` promote.
    #[inline]
    pub fn promotion_rank(&self, color: Color) -> u8 {
        match color {
            Color::White => self.height - 1,
            Color::Black => 0,
        }
    }

    /// Home and target squares used by castling, `None` when disabled.
    pub(crate) fn castle_geometry(&self, color: Color, king_side: bool) -> Option<CastleGeometry> {
        if !self.castling {
            return None;
        }
        let rank = match color {
            Color::White => 0,
            Color::Black => self.height - 1,
        };
        let sq = |f| self.square(f, rank);
        Some(if king_side {
            CastleGeometry {
                king_from: sq(4),
                king_to: sq(6),
                rook_from: sq(7),
                rook_to: sq(5),
                must_be_empty: [sq(5), sq(6), sq(6)],
                king_path: [sq(4), sq(5), sq(6)],
            }
        } else {
            CastleGeometry {
                king_from: sq(4),
                king_to: sq(2),
                rook_from: sq(0),
                rook_to: sq(3),
                must_be_empty: [sq(1), sq(2), sq(3)],
                king_path: [sq(4), sq(3), sq(2)],
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CastleGeometry {
    pub king_from: Square,
    pub king_to: Square,
    pub rook_from: Square,
    pub rook_to: Square,
    pub must_be_empty: [Square; 3],
    pub king_path: [Square; 3],
}

/// A move between two squares, with the promotion kind for pawns reaching
/// the last rank. Ordering is lexicographic on `(from, to, promotion)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

impl Move {
    pub fn new(from: Square, to: Square) -> Move {
        Move { from, to, promotion: None }
    }

    pub fn promoting(from: Square, to: Square, kind: PieceKind) -> Move {
        Move { from, to, promotion: Some(kind) }
    }

    /// Coordinate notation, e.g. `e2e4` or `e7e8q`.
    pub fn to_uci(&self, spec: &BoardSpec) -> String {
        let mut s = spec.square_name(self.from);
        s.push_str(&spec.square_name(self.to));
        if let Some(k) = self.promotion {
            s.push(k.letter().to_ascii_lowercase());
        }
        s
    }

    pub fn parse_uci(text: &str, spec: &BoardSpec) -> Option<Move> {
        let bytes = text.as_bytes();
        // split after the second square: find the second letter
        let second = bytes.iter().skip(1).position(|b| b.is_ascii_lowercase())? + 1;
        let from = spec.parse_square(&text[..second])?;
        let rest = &text[second..];
        let (to_text, promo) = match rest.chars().last() {
            Some(c) if c.is_ascii_alphabetic() && rest.len() > 2 => {
                (&rest[..rest.len() - 1], PieceKind::from_letter(c))
            }
            _ => (rest, None),
        };
        let to = spec.parse_square(to_text)?;
        Some(Move { from, to, promotion: promo })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from.0, self.to.0)?;
        if let Some(k) = self.promotion {
            write!(f, "={}", k.letter())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Checkmate,
    Stalemate,
    Ongoing,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::Ongoing
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RulesError {
    #[error("invalid board spec: {0}")]
    BoardSpec(String),
    #[error("invalid position: {0}")]
    Invalid(Violation),
    #[error("FEN parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("illegal move {0}")]
    IllegalMove(Move),
}

impl From<Violation> for RulesError {
    fn from(v: Violation) -> Self {
        RulesError::Invalid(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn board_spec_limits() {
        assert!(BoardSpec::sized(1, 8).is_err());
        assert!(BoardSpec::sized(9, 8).is_err());
        assert!(BoardSpec::sized(2, 2).is_ok());
        assert!(BoardSpec::new(6, 6, PromotionSet::STANDARD, true, true).is_err());
        assert!(BoardSpec::new(3, 3, PromotionSet::STANDARD, false, true).is_err());
        let kq = PromotionSet::from_kinds(&[PieceKind::King]);
        assert!(BoardSpec::new(8, 8, kq, false, false).is_err());
        assert!(!BoardSpec::sized(3, 4).unwrap().en_passant_enabled());
        assert!(BoardSpec::sized(4, 4).unwrap().en_passant_enabled());
    }

    #[test]
    fn square_names_round_trip() {
        let spec = BoardSpec::standard();
        for sq in spec.squares() {
            assert_eq!(spec.parse_square(&spec.square_name(sq)), Some(sq));
        }
        assert_eq!(spec.square_name(Square(0)), "a1");
        assert_eq!(spec.square_name(Square(63)), "h8");
        let small = BoardSpec::sized(5, 5).unwrap();
        assert_eq!(small.parse_square("f1"), None);
        assert_eq!(small.parse_square("e5"), Some(Square(24)));
    }

    #[test]
    fn uci_round_trip() {
        let spec = BoardSpec::standard();
        let m = Move::promoting(Square(52), Square(60), PieceKind::Queen);
        assert_eq!(m.to_uci(&spec), "e7e8q");
        assert_eq!(Move::parse_uci("e7e8q", &spec), Some(m));
        assert_eq!(Move::parse_uci("e2e4", &spec), Some(Move::new(Square(12), Square(28))));
    }

    #[test]
    fn move_order_is_from_to_promotion() {
        let a = Move::new(Square(1), Square(9));
        let b = Move::promoting(Square(1), Square(9), PieceKind::Knight);
        let c = Move::promoting(Square(1), Square(9), PieceKind::Queen);
        let d = Move::new(Square(2), Square(0));
        let mut v = vec![d, c, b, a];
        v.sort();
        assert_eq!(v, vec![a, b, c, d]);
    }
}
