use super::position::{BISHOP_DIRS, KING_STEPS, KNIGHT_STEPS, ROOK_DIRS};
use super::{Color, Move, Outcome, Piece, PieceKind, Position, RulesError, Square};

/// Every legal move of `pos`, sorted by `(from, to, promotion)`.
pub fn legal_moves(pos: &Position) -> Result<Vec<Move>, RulesError> {
    pos.validate()?;
    let mut out = Vec::with_capacity(32);
    legal_moves_into(pos, &mut out);
    Ok(out)
}

/// Fills `out` with the sorted legal moves; `pos` is assumed valid.
pub(crate) fn legal_moves_into(pos: &Position, out: &mut Vec<Move>) {
    out.clear();
    pseudo_legal_into(pos, pos.side, out);
    let mover = pos.side;
    let king = pos.king_square(mover).expect("king present");
    out.retain(|&m| {
        let next = play_unchecked(pos, m);
        let k = if m.from == king { m.to } else { king };
        !next.is_attacked(k, mover.opposite())
    });
    out.sort_unstable();
}

/// Number of pseudo-legal moves `color` would have in this placement,
/// ignoring whose turn it is and whether the own king is left in check.
pub fn pseudo_legal_count(pos: &Position, color: Color) -> usize {
    let mut out = Vec::with_capacity(32);
    pseudo_legal_into(pos, color, &mut out);
    out.len()
}

fn pseudo_legal_into(pos: &Position, color: Color, out: &mut Vec<Move>) {
    for (from, piece) in pos.pieces() {
        if piece.color != color {
            continue;
        }
        match piece.kind {
            PieceKind::Pawn => pawn_moves(pos, from, color, out),
            PieceKind::Knight => steps(pos, from, color, &KNIGHT_STEPS, out),
            PieceKind::King => {
                steps(pos, from, color, &KING_STEPS, out);
                if color == pos.side {
                    castles(pos, from, color, out);
                }
            }
            PieceKind::Bishop => slides(pos, from, color, &BISHOP_DIRS, out),
            PieceKind::Rook => slides(pos, from, color, &ROOK_DIRS, out),
            PieceKind::Queen => {
                slides(pos, from, color, &ROOK_DIRS, out);
                slides(pos, from, color, &BISHOP_DIRS, out);
            }
        }
    }
}

fn steps(pos: &Position, from: Square, color: Color, deltas: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in deltas {
        if let Some(to) = pos.spec.offset(from, df, dr) {
            match pos.board[to.index()] {
                Some(p) if p.color == color => {}
                _ => out.push(Move::new(from, to)),
            }
        }
    }
}

fn slides(pos: &Position, from: Square, color: Color, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in dirs {
        let mut cur = from;
        while let Some(to) = pos.spec.offset(cur, df, dr) {
            match pos.board[to.index()] {
                None => out.push(Move::new(from, to)),
                Some(p) => {
                    if p.color != color {
                        out.push(Move::new(from, to));
                    }
                    break;
                }
            }
            cur = to;
        }
    }
}

fn push_pawn_move(pos: &Position, from: Square, to: Square, color: Color, out: &mut Vec<Move>) {
    if pos.spec.rank_of(to) == pos.spec.promotion_rank(color) {
        for kind in pos.spec.promotions().kinds() {
            out.push(Move::promoting(from, to, kind));
        }
    } else {
        out.push(Move::new(from, to));
    }
}

fn pawn_moves(pos: &Position, from: Square, color: Color, out: &mut Vec<Move>) {
    let spec = &pos.spec;
    let forward: i8 = match color {
        Color::White => 1,
        Color::Black => -1,
    };
    if let Some(one) = spec.offset(from, 0, forward) {
        if pos.board[one.index()].is_none() {
            push_pawn_move(pos, from, one, color, out);
            let start_rank = match color {
                Color::White => 1,
                Color::Black => spec.height() - 2,
            };
            if spec.double_step_allowed() && spec.rank_of(from) == start_rank {
                if let Some(two) = spec.offset(one, 0, forward) {
                    if pos.board[two.index()].is_none() {
                        out.push(Move::new(from, two));
                    }
                }
            }
        }
    }
    for df in [-1, 1] {
        if let Some(to) = spec.offset(from, df, forward) {
            match pos.board[to.index()] {
                Some(p) if p.color != color => push_pawn_move(pos, from, to, color, out),
                None if color == pos.side && pos.ep == Some(to) => out.push(Move::new(from, to)),
                _ => {}
            }
        }
    }
}

fn castles(pos: &Position, from: Square, color: Color, out: &mut Vec<Move>) {
    if !pos.castling.has_any(color) {
        return;
    }
    for king_side in [true, false] {
        if !pos.castling.has(color, king_side) {
            continue;
        }
        let Some(g) = pos.spec.castle_geometry(color, king_side) else { continue };
        if g.king_from != from || pos.board[g.rook_from.index()] != Some(Piece::new(color, PieceKind::Rook)) {
            continue;
        }
        if g.must_be_empty.iter().any(|s| pos.board[s.index()].is_some()) {
            continue;
        }
        if g.king_path.iter().any(|&s| pos.is_attacked(s, color.opposite())) {
            continue;
        }
        out.push(Move::new(g.king_from, g.king_to));
    }
}

/// Plays `m` without checking legality. `m` must at least be pseudo legal.
pub(crate) fn play_unchecked(pos: &Position, m: Move) -> Position {
    let spec = pos.spec;
    let mut next = *pos;
    let piece = next.board[m.from.index()].take().expect("moving piece");
    let color = piece.color;

    match piece.kind {
        PieceKind::Pawn => {
            let df = spec.file_of(m.to) as i8 - spec.file_of(m.from) as i8;
            if df != 0 && pos.board[m.to.index()].is_none() {
                // en passant: the captured pawn stands beside the origin
                let captured = spec.square(spec.file_of(m.to), spec.rank_of(m.from));
                next.board[captured.index()] = None;
            }
        }
        PieceKind::King => {
            let df = spec.file_of(m.to) as i8 - spec.file_of(m.from) as i8;
            if df.abs() == 2 {
                let g = spec.castle_geometry(color, df > 0).expect("castling move on castling board");
                let rook = next.board[g.rook_from.index()].take();
                next.board[g.rook_to.index()] = rook;
            }
            next.castling = next.castling.without_color(color);
        }
        _ => {}
    }

    next.board[m.to.index()] = Some(match m.promotion {
        Some(kind) => Piece::new(color, kind),
        None => piece,
    });

    if !next.castling.is_empty() {
        for c in Color::ALL {
            for king_side in [true, false] {
                if let Some(g) = spec.castle_geometry(c, king_side) {
                    if m.from == g.rook_from || m.to == g.rook_from {
                        next.castling = next.castling.with(c, king_side, false);
                    }
                }
            }
        }
    }

    next.ep = None;
    if piece.kind == PieceKind::Pawn && spec.en_passant_enabled() {
        let dr = spec.rank_of(m.to) as i8 - spec.rank_of(m.from) as i8;
        if dr.abs() == 2 {
            next.ep = spec.offset(m.from, 0, dr / 2);
        }
    }
    next.side = color.opposite();
    next.ply = pos.ply + 1;
    next
}

/// Plays a legal move, returning the successor. The input is untouched.
pub fn apply_move(pos: &Position, m: Move) -> Result<Position, RulesError> {
    let moves = legal_moves(pos)?;
    if moves.binary_search(&m).is_err() {
        return Err(RulesError::IllegalMove(m));
    }
    Ok(play_unchecked(pos, m))
}

pub fn outcome(pos: &Position) -> Result<Outcome, RulesError> {
    let moves = legal_moves(pos)?;
    Ok(if !moves.is_empty() {
        Outcome::Ongoing
    } else if pos.in_check() {
        Outcome::Checkmate
    } else {
        Outcome::Stalemate
    })
}
