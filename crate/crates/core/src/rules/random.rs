//! Random legal positions for tests and sampling.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{legal_moves, movegen::play_unchecked, BoardSpec, Color, Piece, PieceKind, Position, Square};
use crate::rules::CastleRights;

/// Plays up to `plies` uniformly random legal moves from `start`, stopping
/// early at checkmate or stalemate.
pub fn random_playout<R: Rng + ?Sized>(rng: &mut R, start: &Position, plies: usize) -> Position {
    let mut pos = *start;
    for _ in 0..plies {
        let moves = legal_moves(&pos).expect("playout stays legal");
        let Some(&m) = moves.choose(rng) else { break };
        pos = play_unchecked(&pos, m);
    }
    pos
}

/// Two kings plus up to `extra` random pieces dropped on random squares,
/// random side to move, no castling or en passant. Retries until legal.
pub fn random_placement<R: Rng + ?Sized>(rng: &mut R, spec: &BoardSpec, extra: usize) -> Position {
    let n = spec.num_squares();
    let extra = extra.min(n.saturating_sub(2));
    loop {
        let mut squares: Vec<usize> = (0..n).collect();
        let (chosen, _) = squares.partial_shuffle(rng, extra + 2);
        let mut placement = vec![
            (Square(chosen[0] as u8), Piece::new(Color::White, PieceKind::King)),
            (Square(chosen[1] as u8), Piece::new(Color::Black, PieceKind::King)),
        ];
        let k = rng.random_range(0..=extra);
        for &sq in &chosen[2..2 + k] {
            let kind = *[PieceKind::Pawn, PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen]
                .choose(rng)
                .unwrap();
            let color = if rng.random_bool(0.5) { Color::White } else { Color::Black };
            placement.push((Square(sq as u8), Piece::new(color, kind)));
        }
        let side = if rng.random_bool(0.5) { Color::White } else { Color::Black };
        if let Ok(p) = Position::new(*spec, &placement, side, None, CastleRights::NONE, side.index() as u32) {
            return p;
        }
    }
}
