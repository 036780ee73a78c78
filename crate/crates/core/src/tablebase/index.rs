//! Material classes and the dense position index.
//!
//! `index = side * S^k + sum(square_i * S^i)` where `S` is the number of
//! squares, `k` the number of pieces and the pieces are taken in canonical
//! order: White before Black, and within a colour king, queen, rook,
//! bishop, knight, pawn. Identical pieces must occupy strictly ascending
//! squares, which makes the map a bijection onto the valid indices.

use std::collections::BTreeSet;
use std::fmt;

use crate::rules::{BoardSpec, Color, Piece, PieceKind, Position, Square};

use super::TablebaseError;

/// Upper bound on pieces per class, kings included.
pub const MAX_PIECES: usize = 5;

fn canonical_rank(kind: PieceKind) -> u8 {
    match kind {
        PieceKind::King => 0,
        PieceKind::Queen => 1,
        PieceKind::Rook => 2,
        PieceKind::Bishop => 3,
        PieceKind::Knight => 4,
        PieceKind::Pawn => 5,
    }
}

fn canonical_key(p: &Piece) -> (Color, u8) {
    (p.color, canonical_rank(p.kind))
}

/// Piece counts per colour and kind; identifies a class independently of
/// board geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct MaterialKey([u8; 12]);

impl MaterialKey {
    pub(crate) fn of_position(pos: &Position) -> MaterialKey {
        let mut counts = [0u8; 12];
        for (_, p) in pos.pieces() {
            counts[p.color.index() * 6 + p.kind as usize] += 1;
        }
        MaterialKey(counts)
    }

    fn of_pieces(pieces: &[Piece]) -> MaterialKey {
        let mut counts = [0u8; 12];
        for p in pieces {
            counts[p.color.index() * 6 + p.kind as usize] += 1;
        }
        MaterialKey(counts)
    }
}

/// A fixed multiset of pieces on a fixed board.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaterialClass {
    spec: BoardSpec,
    pieces: Vec<Piece>,
    key: MaterialKey,
    /// `(first slot, count)` for each colour/kind group, by `color*6 + kind`.
    groups: [(u8, u8); 12],
}

impl MaterialClass {
    pub fn new(spec: BoardSpec, pieces: &[Piece]) -> Result<MaterialClass, TablebaseError> {
        let mut pieces = pieces.to_vec();
        pieces.sort_by_key(canonical_key);
        for c in Color::ALL {
            let kings = pieces.iter().filter(|p| p.color == c && p.kind == PieceKind::King).count();
            if kings != 1 {
                return Err(TablebaseError::Material(format!("{c} needs exactly one king, found {kings}")));
            }
        }
        if pieces.len() > MAX_PIECES {
            return Err(TablebaseError::Material(format!(
                "{} pieces exceed the {MAX_PIECES}-piece limit",
                pieces.len()
            )));
        }
        let mut groups = [(0u8, 0u8); 12];
        for (slot, p) in pieces.iter().enumerate() {
            let g = &mut groups[p.color.index() * 6 + p.kind as usize];
            if g.1 == 0 {
                g.0 = slot as u8;
            }
            g.1 += 1;
        }
        let key = MaterialKey::of_pieces(&pieces);
        Ok(MaterialClass { spec, pieces, key, groups })
    }

    /// Parses names such as `KRvK`, `KQvK`, `KPvK` or `KvKR`.
    pub fn parse(text: &str, spec: BoardSpec) -> Result<MaterialClass, TablebaseError> {
        let (white, black) = text
            .split_once('v')
            .ok_or_else(|| TablebaseError::Material(format!("{text:?}: expected <white>v<black>, e.g. KRvK")))?;
        let mut pieces = Vec::new();
        for (side, color) in [(white, Color::White), (black, Color::Black)] {
            for c in side.chars() {
                let kind = PieceKind::from_letter(c)
                    .filter(|_| c.is_ascii_uppercase())
                    .ok_or_else(|| TablebaseError::Material(format!("{text:?}: unknown piece letter {c:?}")))?;
                pieces.push(Piece::new(color, kind));
            }
        }
        MaterialClass::new(spec, &pieces)
    }

    pub fn spec(&self) -> &BoardSpec {
        &self.spec
    }

    /// Pieces in canonical order.
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn key(&self) -> MaterialKey {
        self.key
    }

    pub fn name(&self) -> String {
        let mut s = String::new();
        for p in self.pieces.iter().filter(|p| p.color == Color::White) {
            s.push(p.kind.letter());
        }
        s.push('v');
        for p in self.pieces.iter().filter(|p| p.color == Color::Black) {
            s.push(p.kind.letter());
        }
        s
    }

    /// Size of the index space, `2 * S^k`.
    pub fn index_space(&self) -> u64 {
        2 * (self.spec.num_squares() as u64).pow(self.pieces.len() as u32)
    }

    pub fn matches(&self, pos: &Position) -> bool {
        *pos.spec() == self.spec && MaterialKey::of_position(pos) == self.key
    }

    pub fn pawn_count(&self) -> usize {
        self.pieces.iter().filter(|p| p.kind == PieceKind::Pawn).count()
    }

    /// Classes reachable by captures and promotions, excluding `self`,
    /// ordered by piece count, pawn count and name.
    pub fn descendants(&self) -> Vec<MaterialClass> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.pieces.clone()];
        let mut out = Vec::new();
        while let Some(pieces) = stack.pop() {
            let mut children = Vec::new();
            for (i, p) in pieces.iter().enumerate() {
                if p.kind == PieceKind::King {
                    continue;
                }
                let mut removed = pieces.clone();
                removed.remove(i);
                children.push(removed);
                if p.kind == PieceKind::Pawn {
                    for kind in self.spec.promotions().kinds() {
                        let mut promoted = pieces.clone();
                        promoted[i] = Piece::new(p.color, kind);
                        children.push(promoted);
                    }
                }
            }
            for child in children {
                let mc = MaterialClass::new(self.spec, &child).expect("child of a valid class");
                if seen.insert(mc.key) {
                    stack.push(mc.pieces.clone());
                    out.push(mc);
                }
            }
        }
        // captures lower the piece count and promotions the pawn count, so
        // this order lists every class after all of its own descendants
        out.sort_by_cached_key(|m| (m.pieces.len(), m.pawn_count(), m.name()));
        out
    }

    /// Index of a position known to belong to this class, or `None` when the
    /// material differs.
    pub(crate) fn index_of(&self, pos: &Position) -> Option<u64> {
        let s = self.spec.num_squares() as u64;
        let mut fill = [0u8; 12];
        let mut squares = [0u8; MAX_PIECES];
        let mut count = 0;
        for (sq, p) in pos.pieces() {
            count += 1;
            if count > self.pieces.len() {
                return None;
            }
            let g = p.color.index() * 6 + p.kind as usize;
            let (start, n) = self.groups[g];
            if fill[g] >= n {
                return None;
            }
            squares[(start + fill[g]) as usize] = sq.0;
            fill[g] += 1;
        }
        if count != self.pieces.len() {
            return None;
        }
        let mut idx = 0u64;
        for &sq in squares[..count].iter().rev() {
            idx = idx * s + sq as u64;
        }
        Some(pos.side_to_move().index() as u64 * s.pow(count as u32) + idx)
    }

    /// Inverse of [`MaterialClass::index_of`]; `None` for indices that do not
    /// name a valid position.
    pub(crate) fn position_at(&self, index: u64) -> Option<Position> {
        let s = self.spec.num_squares() as u64;
        let k = self.pieces.len();
        let plane = s.pow(k as u32);
        if index >= 2 * plane {
            return None;
        }
        let side = if index >= plane { Color::Black } else { Color::White };
        let mut rest = index % plane;
        let mut pos = Position::raw(self.spec, side);
        let mut prev: Option<(Piece, u8)> = None;
        for &piece in &self.pieces {
            let sq = (rest % s) as u8;
            rest /= s;
            if pos.board[sq as usize].is_some() {
                return None;
            }
            if let Some((pp, psq)) = prev {
                if pp == piece && psq >= sq {
                    return None;
                }
            }
            pos.board[sq as usize] = Some(piece);
            prev = Some((piece, sq));
        }
        pos.validate().ok()?;
        Some(pos)
    }
}

impl fmt::Display for MaterialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}x{}", self.name(), self.spec.width(), self.spec.height())
    }
}

/// Dense index of `pos` within `mc`.
///
/// Positions carrying an en-passant square or castling rights are outside the
/// index space; the tablebase resolves them through their successors.
pub fn index(pos: &Position, mc: &MaterialClass) -> Result<u64, TablebaseError> {
    if *pos.spec() != mc.spec {
        return Err(TablebaseError::MaterialMismatch {
            expected: mc.to_string(),
            found: format!("position on a {}x{} board", pos.spec().width(), pos.spec().height()),
        });
    }
    if pos.ep_square().is_some() {
        return Err(TablebaseError::Unindexable("position carries an en-passant square"));
    }
    if !pos.castle_rights().is_empty() {
        return Err(TablebaseError::Unindexable("position carries castling rights"));
    }
    mc.index_of(pos).ok_or_else(|| TablebaseError::MaterialMismatch {
        expected: mc.to_string(),
        found: crate::rules::format_fen(pos),
    })
}

/// Position at `index`, or `None` for the invalid marker (overlapping pieces,
/// non-canonical order of identical pieces, or an illegal placement).
pub fn unindex(index: u64, mc: &MaterialClass) -> Option<Position> {
    mc.position_at(index)
}

/// Squares of the pieces in canonical order, for diagnostics and tests.
pub fn canonical_squares(pos: &Position, mc: &MaterialClass) -> Option<Vec<Square>> {
    let idx = mc.index_of(pos)?;
    let s = mc.spec.num_squares() as u64;
    let mut rest = idx % s.pow(mc.pieces.len() as u32);
    Some(
        (0..mc.pieces.len())
            .map(|_| {
                let sq = Square((rest % s) as u8);
                rest /= s;
                sq
            })
            .collect(),
    )
}
