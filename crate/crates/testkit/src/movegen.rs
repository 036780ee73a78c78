//! Target-driven move generation: every piece is tried against every
//! square, and legality is decided by playing the move and scanning the
//! whole board for attackers of the king.

use crate::board::{is_white, State, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mv {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub promo: Option<char>,
}

impl Mv {
    pub fn uci(&self) -> String {
        let mut s = State::square_name(self.from.0, self.from.1) + &State::square_name(self.to.0, self.to.1);
        if let Some(p) = self.promo {
            s.push(p.to_ascii_lowercase());
        }
        s
    }
}

fn clear_path(s: &State, from: (usize, usize), to: (usize, usize)) -> bool {
    let df = (to.0 as i32 - from.0 as i32).signum();
    let dr = (to.1 as i32 - from.1 as i32).signum();
    let (mut f, mut r) = (from.0 as i32 + df, from.1 as i32 + dr);
    while (f, r) != (to.0 as i32, to.1 as i32) {
        if s.at(f, r) != Some('.') {
            return false;
        }
        f += df;
        r += dr;
    }
    true
}

/// Whether `piece` standing on `from` attacks `to`.
fn attacks(s: &State, piece: char, from: (usize, usize), to: (usize, usize)) -> bool {
    if from == to {
        return false;
    }
    let df = to.0 as i32 - from.0 as i32;
    let dr = to.1 as i32 - from.1 as i32;
    let (af, ar) = (df.abs(), dr.abs());
    match piece.to_ascii_lowercase() {
        'k' => af <= 1 && ar <= 1,
        'n' => (af == 1 && ar == 2) || (af == 2 && ar == 1),
        'r' => (af == 0 || ar == 0) && clear_path(s, from, to),
        'b' => af == ar && clear_path(s, from, to),
        'q' => (af == 0 || ar == 0 || af == ar) && clear_path(s, from, to),
        'p' => {
            let forward = if is_white(piece) { 1 } else { -1 };
            af == 1 && dr == forward
        }
        _ => false,
    }
}

pub fn attacked(s: &State, sq: (usize, usize), by_white: bool) -> bool {
    for r in 0..s.height {
        for f in 0..s.width {
            let c = s.cells[r][f];
            if c != '.' && is_white(c) == by_white && attacks(s, c, (f, r), sq) {
                return true;
            }
        }
    }
    false
}

pub fn in_check(s: &State, white: bool) -> bool {
    let king = if white { 'K' } else { 'k' };
    match s.find(king) {
        Some(sq) => attacked(s, sq, !white),
        None => false,
    }
}

fn corner_rights(s: &State, sq: (usize, usize)) -> Vec<usize> {
    let top = s.height - 1;
    let right = s.width - 1;
    let mut v = Vec::new();
    if sq == (4, 0) {
        v.extend([0, 1]);
    }
    if sq == (4, top) {
        v.extend([2, 3]);
    }
    if sq == (right, 0) {
        v.push(0);
    }
    if sq == (0, 0) {
        v.push(1);
    }
    if sq == (right, top) {
        v.push(2);
    }
    if sq == (0, top) {
        v.push(3);
    }
    v
}

pub fn play(s: &State, v: &Variant, m: Mv) -> State {
    let mut n = s.clone();
    let piece = s.cells[m.from.1][m.from.0];
    n.cells[m.from.1][m.from.0] = '.';
    let lower = piece.to_ascii_lowercase();
    if lower == 'p' && Some(m.to) == s.ep && s.cells[m.to.1][m.to.0] == '.' && m.from.0 != m.to.0 {
        // en passant: the captured pawn sits beside the mover
        n.cells[m.from.1][m.to.0] = '.';
    }
    if lower == 'k' && (m.to.0 as i32 - m.from.0 as i32).abs() == 2 {
        let (rook_from, rook_to) = if m.to.0 > m.from.0 { (s.width - 1, m.to.0 - 1) } else { (0, m.to.0 + 1) };
        let rook = n.cells[m.from.1][rook_from];
        n.cells[m.from.1][rook_from] = '.';
        n.cells[m.from.1][rook_to] = rook;
    }
    n.cells[m.to.1][m.to.0] = match m.promo {
        Some(p) => p,
        None => piece,
    };
    n.ep = None;
    if lower == 'p' && (m.to.1 as i32 - m.from.1 as i32).abs() == 2 && v.en_passant {
        n.ep = Some((m.from.0, (m.from.1 + m.to.1) / 2));
    }
    if v.castling {
        for sq in [m.from, m.to] {
            for i in corner_rights(s, sq) {
                n.rights[i] = false;
            }
        }
    }
    n.white_to_move = !s.white_to_move;
    n
}

fn pseudo_moves(s: &State, v: &Variant) -> Vec<Mv> {
    let white = s.white_to_move;
    let mut out = Vec::new();
    let last = if white { s.height - 1 } else { 0 };
    let promos: &[char] = if white { &['N', 'B', 'R', 'Q'] } else { &['n', 'b', 'r', 'q'] };
    for fr in 0..s.height {
        for ff in 0..s.width {
            let piece = s.cells[fr][ff];
            if piece == '.' || is_white(piece) != white {
                continue;
            }
            for tr in 0..s.height {
                for tf in 0..s.width {
                    let target = s.cells[tr][tf];
                    if target != '.' && is_white(target) == white {
                        continue;
                    }
                    let from = (ff, fr);
                    let to = (tf, tr);
                    let ok = if piece.eq_ignore_ascii_case(&'p') {
                        let forward: i32 = if white { 1 } else { -1 };
                        let dr = tr as i32 - fr as i32;
                        let df = tf as i32 - ff as i32;
                        let start = if white { 1 } else { s.height - 2 };
                        if df == 0 && dr == forward {
                            target == '.'
                        } else if df == 0 && dr == 2 * forward && v.double_step && fr == start {
                            target == '.' && s.at(ff as i32, fr as i32 + forward) == Some('.')
                        } else if df.abs() == 1 && dr == forward {
                            target != '.' || (v.en_passant && s.ep == Some(to))
                        } else {
                            false
                        }
                    } else {
                        attacks(s, piece, from, to)
                    };
                    if !ok {
                        continue;
                    }
                    if piece.eq_ignore_ascii_case(&'p') && tr == last {
                        for &p in promos {
                            out.push(Mv { from, to, promo: Some(p) });
                        }
                    } else {
                        out.push(Mv { from, to, promo: None });
                    }
                }
            }
        }
    }
    if v.castling {
        let rank = if white { 0 } else { s.height - 1 };
        let (king, rook) = if white { ('K', 'R') } else { ('k', 'r') };
        let (ks, qs) = if white { (0, 1) } else { (2, 3) };
        if s.cells[rank][4] == king && !attacked(s, (4, rank), !white) {
            if s.rights[ks]
                && s.cells[rank][7] == rook
                && s.cells[rank][5] == '.'
                && s.cells[rank][6] == '.'
                && !attacked(s, (5, rank), !white)
                && !attacked(s, (6, rank), !white)
            {
                out.push(Mv { from: (4, rank), to: (6, rank), promo: None });
            }
            if s.rights[qs]
                && s.cells[rank][0] == rook
                && (1..4).all(|f| s.cells[rank][f] == '.')
                && !attacked(s, (3, rank), !white)
                && !attacked(s, (2, rank), !white)
            {
                out.push(Mv { from: (4, rank), to: (2, rank), promo: None });
            }
        }
    }
    out
}

pub fn legal_moves(s: &State, v: &Variant) -> Vec<Mv> {
    pseudo_moves(s, v).into_iter().filter(|&m| !in_check(&play(s, v, m), s.white_to_move)).collect()
}

pub fn perft(s: &State, v: &Variant, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = legal_moves(s, v);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|&m| perft(&play(s, v, m), v, depth - 1)).sum()
}
