//! A deliberately plain board: a grid of characters, FEN letters for
//! pieces and `.` for empty.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub width: usize,
    pub height: usize,
    pub castling: bool,
    pub en_passant: bool,
    pub double_step: bool,
}

impl Variant {
    pub fn standard() -> Variant {
        Variant { width: 8, height: 8, castling: true, en_passant: true, double_step: true }
    }

    /// Small boards: no castling, two-square pawn steps from height 5 on,
    /// en passant from width 4 on.
    pub fn reduced(width: usize, height: usize) -> Variant {
        let double_step = height >= 5;
        Variant { width, height, castling: false, en_passant: double_step && width >= 4, double_step }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub width: usize,
    pub height: usize,
    /// Row-major from rank 1, so `cells[rank][file]`.
    pub cells: Vec<Vec<char>>,
    pub white_to_move: bool,
    /// `K`, `Q`, `k`, `q` in that order.
    pub rights: [bool; 4],
    pub ep: Option<(usize, usize)>,
}

impl State {
    pub fn empty(width: usize, height: usize, white_to_move: bool) -> State {
        State { width, height, cells: vec![vec!['.'; width]; height], white_to_move, rights: [false; 4], ep: None }
    }

    pub fn at(&self, f: i32, r: i32) -> Option<char> {
        if f < 0 || r < 0 || f as usize >= self.width || r as usize >= self.height {
            return None;
        }
        Some(self.cells[r as usize][f as usize])
    }

    pub fn find(&self, piece: char) -> Option<(usize, usize)> {
        for r in 0..self.height {
            for f in 0..self.width {
                if self.cells[r][f] == piece {
                    return Some((f, r));
                }
            }
        }
        None
    }

    pub fn square_name(f: usize, r: usize) -> String {
        format!("{}{}", (b'a' + f as u8) as char, r + 1)
    }

    pub fn count_pieces(&self) -> usize {
        self.cells.iter().flatten().filter(|c| **c != '.').count()
    }
}

pub fn is_white(c: char) -> bool {
    c.is_ascii_uppercase()
}
