//! Forward minimax over a whole material class, memoised per position.
//!
//! `win_within(p, k)`: some move reaches a position lost within `k - 1`.
//! `lose_within(p, k)`: checkmated, or every move reaches a position won
//! within `k - 1`. A position's distance to mate is the least `k` for which
//! either holds. Depths are tried upward until two consecutive depths add
//! nothing and every class reachable by captures or promotions has no
//! longer mates; everything left is a draw.

use std::collections::{BTreeMap, HashMap};

use crate::board::{State, Variant};
use crate::movegen::{in_check, legal_moves, play};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Win(u16),
    Draw,
    Loss(u16),
}

/// `KQvK` to `['K', 'Q', 'k']`.
pub fn parse_material(name: &str) -> Vec<char> {
    let (w, b) = name.split_once('v').expect("material like KQvK");
    w.chars().chain(b.chars().map(|c| c.to_ascii_lowercase())).collect()
}

fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

fn legal_placement(s: &State) -> bool {
    let (Some(wk), Some(bk)) = (s.find('K'), s.find('k')) else { return false };
    if adjacent(wk, bk) {
        return false;
    }
    for r in [0, s.height - 1] {
        if s.cells[r].iter().any(|&c| c == 'P' || c == 'p') {
            return false;
        }
    }
    !in_check(s, !s.white_to_move)
}

/// Every legal position with exactly these pieces, both sides to move.
pub fn enumerate(v: &Variant, pieces: &[char]) -> Vec<State> {
    let n = v.width * v.height;
    let mut out = Vec::new();
    let mut squares = vec![0usize; pieces.len()];
    fn rec(i: usize, v: &Variant, pieces: &[char], squares: &mut Vec<usize>, n: usize, out: &mut Vec<State>) {
        if i == pieces.len() {
            for white in [true, false] {
                let mut s = State::empty(v.width, v.height, white);
                for (p, &sq) in pieces.iter().zip(squares.iter()) {
                    s.cells[sq / v.width][sq % v.width] = *p;
                }
                if legal_placement(&s) {
                    out.push(s);
                }
            }
            return;
        }
        // identical pieces only in increasing square order
        let lo = if i > 0 && pieces[i - 1] == pieces[i] { squares[i - 1] + 1 } else { 0 };
        for sq in lo..n {
            if squares[..i].contains(&sq) {
                continue;
            }
            squares[i] = sq;
            rec(i + 1, v, pieces, squares, n, out);
        }
    }
    rec(0, v, pieces, &mut squares, n, &mut out);
    out
}

/// Material lists one capture or one promotion away.
pub fn descendants(pieces: &[char]) -> Vec<Vec<char>> {
    let mut out: Vec<Vec<char>> = Vec::new();
    for (i, &p) in pieces.iter().enumerate() {
        if p.eq_ignore_ascii_case(&'k') {
            continue;
        }
        let mut removed = pieces.to_vec();
        removed.remove(i);
        out.push(removed);
        if p.eq_ignore_ascii_case(&'p') {
            for q in ['N', 'B', 'R', 'Q'] {
                let mut promoted = pieces.to_vec();
                promoted[i] = if p == 'P' { q } else { q.to_ascii_lowercase() };
                out.push(promoted);
            }
        }
    }
    for d in &mut out {
        d.sort_by_key(|c| (c.is_ascii_lowercase(), "KQRBNP".find(c.to_ascii_uppercase())));
    }
    out.sort();
    out.dedup();
    out
}

/// What is known about `win_within(p, k)` for one position: true for every
/// `k >= true_from`, false for every `k <= false_to`.
#[derive(Clone, Copy)]
struct Bounds {
    true_from: u16,
    false_to: Option<u16>,
}

impl Bounds {
    const UNKNOWN: Bounds = Bounds { true_from: u16::MAX, false_to: None };

    fn get(&self, k: u16) -> Option<bool> {
        if k >= self.true_from {
            Some(true)
        } else if self.false_to.is_some_and(|f| k <= f) {
            Some(false)
        } else {
            None
        }
    }

    fn set(&mut self, k: u16, v: bool) {
        if v {
            self.true_from = self.true_from.min(k);
        } else {
            self.false_to = Some(self.false_to.map_or(k, |f| f.max(k)));
        }
    }
}

fn key(s: &State) -> Box<[u8]> {
    let mut k: Vec<u8> = s.cells.iter().flatten().map(|&c| c as u8).collect();
    k.push(s.white_to_move as u8);
    k.extend(s.rights.iter().map(|&r| r as u8));
    match s.ep {
        Some((f, r)) => k.extend([1, f as u8, r as u8]),
        None => k.push(0),
    }
    k.into_boxed_slice()
}

struct Node {
    checked: bool,
    next: Option<Vec<u32>>,
    win: Bounds,
    lose: Bounds,
}

pub struct Oracle {
    variant: Variant,
    ids: HashMap<Box<[u8]>, u32>,
    states: Vec<State>,
    nodes: Vec<Node>,
}

impl Oracle {
    pub fn new(variant: Variant) -> Oracle {
        Oracle { variant, ids: HashMap::new(), states: Vec::new(), nodes: Vec::new() }
    }

    fn id(&mut self, s: &State) -> u32 {
        if let Some(&i) = self.ids.get(&key(s)) {
            return i;
        }
        let i = self.states.len() as u32;
        self.ids.insert(key(s), i);
        self.states.push(s.clone());
        self.nodes.push(Node {
            checked: in_check(s, s.white_to_move),
            next: None,
            win: Bounds::UNKNOWN,
            lose: Bounds::UNKNOWN,
        });
        i
    }

    fn successors(&mut self, i: u32) -> Vec<u32> {
        if let Some(n) = &self.nodes[i as usize].next {
            return n.clone();
        }
        let s = self.states[i as usize].clone();
        let next: Vec<State> = legal_moves(&s, &self.variant).into_iter().map(|m| play(&s, &self.variant, m)).collect();
        let ids: Vec<u32> = next.iter().map(|n| self.id(n)).collect();
        self.nodes[i as usize].next = Some(ids.clone());
        ids
    }

    pub fn win_within(&mut self, s: &State, k: u16) -> bool {
        let i = self.id(s);
        self.win_id(i, k)
    }

    pub fn lose_within(&mut self, s: &State, k: u16) -> bool {
        let i = self.id(s);
        self.lose_id(i, k)
    }

    fn win_id(&mut self, i: u32, k: u16) -> bool {
        if k == 0 {
            return false;
        }
        if let Some(v) = self.nodes[i as usize].win.get(k) {
            return v;
        }
        let next = self.successors(i);
        let v = next.iter().any(|&n| self.lose_id(n, k - 1));
        self.nodes[i as usize].win.set(k, v);
        v
    }

    fn lose_id(&mut self, i: u32, k: u16) -> bool {
        if let Some(v) = self.nodes[i as usize].lose.get(k) {
            return v;
        }
        let next = self.successors(i);
        let v = if next.is_empty() {
            self.nodes[i as usize].checked
        } else {
            k > 0 && next.iter().all(|&n| self.win_id(n, k - 1))
        };
        self.nodes[i as usize].lose.set(k, v);
        v
    }

    /// Values of every position of the class, keyed by four-field FEN.
    pub fn solve_class(&mut self, pieces: &[char]) -> BTreeMap<String, Value> {
        let below = descendants(pieces)
            .iter()
            .flat_map(|d| self.solve_class(d).into_values())
            .filter_map(|v| match v {
                Value::Win(d) | Value::Loss(d) => Some(d),
                Value::Draw => None,
            })
            .max();
        let positions = enumerate(&self.variant, pieces);
        let mut values: Vec<Option<Value>> = vec![None; positions.len()];
        let mut quiet = 0;
        let mut k = 0u16;
        while quiet < 2 || below.is_some_and(|b| k <= b + 2) {
            let mut found = false;
            for (i, p) in positions.iter().enumerate() {
                if values[i].is_some() {
                    continue;
                }
                if self.win_within(p, k) {
                    values[i] = Some(Value::Win(k));
                    found = true;
                } else if self.lose_within(p, k) {
                    values[i] = Some(Value::Loss(k));
                    found = true;
                }
            }
            quiet = if found { 0 } else { quiet + 1 };
            k += 1;
        }
        positions.iter().zip(values).map(|(p, v)| (crate::fen::format(p), v.unwrap_or(Value::Draw))).collect()
    }
}
