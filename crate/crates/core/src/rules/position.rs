use std::fmt;

use super::{BoardSpec, Color, Piece, PieceKind, RulesError, Square, MAX_SQUARES};

/// Castling rights as four flags: white king/queen side, black king/queen side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CastleRights(u8);

impl CastleRights {
    pub const NONE: CastleRights = CastleRights(0);
    pub const ALL: CastleRights = CastleRights(0b1111);

    fn bit(color: Color, king_side: bool) -> u8 {
        1 << (color.index() * 2 + usize::from(!king_side))
    }

    pub fn has(self, color: Color, king_side: bool) -> bool {
        self.0 & Self::bit(color, king_side) != 0
    }

    pub fn has_any(self, color: Color) -> bool {
        self.has(color, true) || self.has(color, false)
    }

    pub fn with(self, color: Color, king_side: bool, on: bool) -> CastleRights {
        let b = Self::bit(color, king_side);
        CastleRights(if on { self.0 | b } else { self.0 & !b })
    }

    pub fn without_color(self, color: Color) -> CastleRights {
        self.with(color, true, false).with(color, false, false)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Which position invariant failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    KingCount(Color, usize),
    KingsAdjacent,
    OpponentInCheck,
    PawnOnBackRank(Square),
    EnPassant(&'static str),
    CastleRights(&'static str),
    PlyParity { ply: u32, side: Color },
    SquareOffBoard(Square),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KingCount(c, n) => write!(f, "{c} has {n} kings, expected exactly one"),
            Violation::KingsAdjacent => f.write_str("kings stand on adjacent squares"),
            Violation::OpponentInCheck => f.write_str("side not to move is in check"),
            Violation::PawnOnBackRank(sq) => write!(f, "pawn on first or last rank (square {})", sq.0),
            Violation::EnPassant(why) => write!(f, "en-passant square inconsistent: {why}"),
            Violation::CastleRights(why) => write!(f, "castle rights inconsistent: {why}"),
            Violation::PlyParity { ply, side } => {
                write!(f, "ply index {ply} does not match {side} to move")
            }
            Violation::SquareOffBoard(sq) => write!(f, "square {} is off the board", sq.0),
        }
    }
}

/// A complete game state. Construct through [`Position::new`], FEN parsing,
/// or tablebase unindexing; all of them validate.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Position {
    pub(crate) spec: BoardSpec,
    pub(crate) board: [Option<Piece>; MAX_SQUARES],
    pub(crate) side: Color,
    pub(crate) ep: Option<Square>,
    pub(crate) castling: CastleRights,
    pub(crate) ply: u32,
}

impl Position {
    /// Builds and validates a position. `ply` must have the parity of `side`
    /// (even for White).
    pub fn new(
        spec: BoardSpec,
        placement: &[(Square, Piece)],
        side: Color,
        ep: Option<Square>,
        castling: CastleRights,
        ply: u32,
    ) -> Result<Position, RulesError> {
        let mut board = [None; MAX_SQUARES];
        for &(sq, piece) in placement {
            if sq.index() >= spec.num_squares() {
                return Err(Violation::SquareOffBoard(sq).into());
            }
            board[sq.index()] = Some(piece);
        }
        let pos = Position { spec, board, side, ep, castling, ply };
        pos.validate()?;
        Ok(pos)
    }

    /// Placement-only constructor used by hot paths that validate later.
    pub(crate) fn raw(spec: BoardSpec, side: Color) -> Position {
        Position {
            spec,
            board: [None; MAX_SQUARES],
            side,
            ep: None,
            castling: CastleRights::NONE,
            ply: side.index() as u32,
        }
    }

    #[inline]
    pub fn spec(&self) -> &BoardSpec {
        &self.spec
    }

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side
    }

    #[inline]
    pub fn ep_square(&self) -> Option<Square> {
        self.ep
    }

    #[inline]
    pub fn castle_rights(&self) -> CastleRights {
        self.castling
    }

    #[inline]
    pub fn ply(&self) -> u32 {
        self.ply
    }

    /// Same position with a different ply counter (parity must be preserved).
    pub fn with_ply(mut self, ply: u32) -> Result<Position, RulesError> {
        if ply % 2 != self.side.index() as u32 {
            return Err(Violation::PlyParity { ply, side: self.side }.into());
        }
        self.ply = ply;
        Ok(self)
    }

    /// Equality of everything except the ply counter.
    pub fn same_state(&self, other: &Position) -> bool {
        self.spec == other.spec
            && self.board == other.board
            && self.side == other.side
            && self.ep == other.ep
            && self.castling == other.castling
    }

    /// Occupied squares in ascending index order.
    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        self.board[..self.spec.num_squares()].iter().enumerate().filter_map(|(i, p)| p.map(|p| (Square(i as u8), p)))
    }

    pub fn piece_count(&self) -> usize {
        self.pieces().count()
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        let king = Piece::new(color, PieceKind::King);
        self.pieces().find(|&(_, p)| p == king).map(|(sq, _)| sq)
    }

    /// Sum of conventional material values for `color`.
    pub fn material_points(&self, color: Color) -> u32 {
        self.pieces().filter(|(_, p)| p.color == color).map(|(_, p)| p.kind.material_value()).sum()
    }

    pub fn in_check(&self) -> bool {
        match self.king_square(self.side) {
            Some(k) => self.is_attacked(k, self.side.opposite()),
            None => false,
        }
    }

    /// Whether any piece of `by` attacks `target`.
    pub fn is_attacked(&self, target: Square, by: Color) -> bool {
        let spec = &self.spec;
        let is = |sq: Option<Square>, kind: PieceKind| -> bool {
            sq.and_then(|s| self.board[s.index()]) == Some(Piece::new(by, kind))
        };
        // pawns attack diagonally forward, so look backward from the target
        let back: i8 = match by {
            Color::White => -1,
            Color::Black => 1,
        };
        if is(spec.offset(target, -1, back), PieceKind::Pawn) || is(spec.offset(target, 1, back), PieceKind::Pawn) {
            return true;
        }
        for &(df, dr) in &KNIGHT_STEPS {
            if is(spec.offset(target, df, dr), PieceKind::Knight) {
                return true;
            }
        }
        for &(df, dr) in &KING_STEPS {
            if is(spec.offset(target, df, dr), PieceKind::King) {
                return true;
            }
        }
        for (dirs, slider) in [(&ROOK_DIRS, PieceKind::Rook), (&BISHOP_DIRS, PieceKind::Bishop)] {
            for &(df, dr) in dirs {
                let mut cur = target;
                while let Some(next) = spec.offset(cur, df, dr) {
                    if let Some(p) = self.board[next.index()] {
                        if p.color == by && (p.kind == slider || p.kind == PieceKind::Queen) {
                            return true;
                        }
                        break;
                    }
                    cur = next;
                }
            }
        }
        false
    }

    /// Checks every position invariant, naming the first one violated.
    pub fn validate(&self) -> Result<(), Violation> {
        let spec = &self.spec;
        for sq in self.board[spec.num_squares()..].iter() {
            if sq.is_some() {
                return Err(Violation::SquareOffBoard(Square(spec.num_squares() as u8)));
            }
        }
        let mut kings = [None, None];
        let mut king_counts = [0usize; 2];
        for (sq, p) in self.pieces() {
            match p.kind {
                PieceKind::King => {
                    king_counts[p.color.index()] += 1;
                    kings[p.color.index()] = Some(sq);
                }
                PieceKind::Pawn => {
                    let r = spec.rank_of(sq);
                    if r == 0 || r == spec.height() - 1 {
                        return Err(Violation::PawnOnBackRank(sq));
                    }
                }
                _ => {}
            }
        }
        for c in Color::ALL {
            if king_counts[c.index()] != 1 {
                return Err(Violation::KingCount(c, king_counts[c.index()]));
            }
        }
        let (wk, bk) = (kings[0].unwrap(), kings[1].unwrap());
        let df = (spec.file_of(wk) as i8 - spec.file_of(bk) as i8).abs();
        let dr = (spec.rank_of(wk) as i8 - spec.rank_of(bk) as i8).abs();
        if df <= 1 && dr <= 1 {
            return Err(Violation::KingsAdjacent);
        }
        let waiting = self.side.opposite();
        if self.is_attacked(kings[waiting.index()].unwrap(), self.side) {
            return Err(Violation::OpponentInCheck);
        }
        if self.ply % 2 != self.side.index() as u32 {
            return Err(Violation::PlyParity { ply: self.ply, side: self.side });
        }
        self.validate_ep()?;
        self.validate_castling()?;
        Ok(())
    }

    fn validate_ep(&self) -> Result<(), Violation> {
        let Some(ep) = self.ep else { return Ok(()) };
        let spec = &self.spec;
        if !spec.en_passant_enabled() || !spec.double_step_allowed() {
            return Err(Violation::EnPassant("en passant disabled on this board"));
        }
        if ep.index() >= spec.num_squares() {
            return Err(Violation::EnPassant("square off the board"));
        }
        // the pawn that just moved belongs to the side not to move
        let mover = self.side.opposite();
        let (ep_rank, forward) = match mover {
            Color::White => (2, 1),
            Color::Black => (spec.height() - 3, -1),
        };
        if spec.rank_of(ep) != ep_rank {
            return Err(Violation::EnPassant("wrong rank"));
        }
        if self.board[ep.index()].is_some() {
            return Err(Violation::EnPassant("square occupied"));
        }
        let pawn_sq = spec.offset(ep, 0, forward).unwrap();
        let origin = spec.offset(ep, 0, -forward).unwrap();
        if self.board[pawn_sq.index()] != Some(Piece::new(mover, PieceKind::Pawn)) {
            return Err(Violation::EnPassant("no double-stepped pawn in front"));
        }
        if self.board[origin.index()].is_some() {
            return Err(Violation::EnPassant("pawn origin square occupied"));
        }
        Ok(())
    }

    fn validate_castling(&self) -> Result<(), Violation> {
        if self.castling.is_empty() {
            return Ok(());
        }
        for color in Color::ALL {
            for king_side in [true, false] {
                if !self.castling.has(color, king_side) {
                    continue;
                }
                let Some(g) = self.spec.castle_geometry(color, king_side) else {
                    return Err(Violation::CastleRights("castling disabled on this board"));
                };
                if self.board[g.king_from.index()] != Some(Piece::new(color, PieceKind::King)) {
                    return Err(Violation::CastleRights("king not on its home square"));
                }
                if self.board[g.rook_from.index()] != Some(Piece::new(color, PieceKind::Rook)) {
                    return Err(Violation::CastleRights("rook not on its home corner"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({} ply {})", super::format_fen(self), self.ply)
    }
}

pub(crate) const KING_STEPS: [(i8, i8); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
pub(crate) const KNIGHT_STEPS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
pub(crate) const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
pub(crate) const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_fen;

    fn spec() -> BoardSpec {
        BoardSpec::standard()
    }

    #[test]
    fn adjacent_kings_rejected() {
        let err = parse_fen("8/8/8/3kK3/8/8/8/8 w - -", &spec()).unwrap_err();
        assert_eq!(err, RulesError::Invalid(Violation::KingsAdjacent));
    }

    #[test]
    fn missing_king_rejected() {
        let err = parse_fen("8/8/8/3k4/8/8/8/8 w - -", &spec()).unwrap_err();
        assert_eq!(err, RulesError::Invalid(Violation::KingCount(Color::White, 0)));
    }

    #[test]
    fn waiting_side_in_check_rejected() {
        // black king on e8 attacked by the white rook with white to move
        let err = parse_fen("4k3/8/8/8/8/8/8/K3R3 w - -", &spec()).unwrap_err();
        assert_eq!(err, RulesError::Invalid(Violation::OpponentInCheck));
    }

    #[test]
    fn pawn_on_back_rank_rejected() {
        let err = parse_fen("P3k3/8/8/8/8/8/8/K7 w - -", &spec()).unwrap_err();
        assert!(matches!(err, RulesError::Invalid(Violation::PawnOnBackRank(_))));
    }

    #[test]
    fn castle_rights_need_home_pieces() {
        assert!(parse_fen("4k3/8/8/8/8/8/8/4K2R w K -", &spec()).is_ok());
        let err = parse_fen("4k3/8/8/8/8/8/8/4K1R1 w K -", &spec()).unwrap_err();
        assert!(matches!(err, RulesError::Invalid(Violation::CastleRights(_))));
    }

    #[test]
    fn ep_square_requires_double_stepped_pawn() {
        assert!(parse_fen("4k3/8/8/8/4P3/8/8/4K3 b - e3", &spec()).is_ok());
        assert!(parse_fen("4k3/8/8/8/8/4P3/8/4K3 b - e3", &spec()).is_err());
        assert!(parse_fen("4k3/8/8/8/4P3/8/8/4K3 w - e3", &spec()).is_err());
    }

    #[test]
    fn attack_detection_basics() {
        let p = parse_fen("4k3/8/8/8/3Q4/8/8/K7 b - -", &spec()).unwrap();
        let sq = |n: &str| spec().parse_square(n).unwrap();
        assert!(p.is_attacked(sq("d8"), Color::White));
        assert!(p.is_attacked(sq("h8"), Color::White));
        assert!(!p.is_attacked(sq("e8"), Color::White));
        assert!(p.is_attacked(sq("b2"), Color::White));
    }
}
