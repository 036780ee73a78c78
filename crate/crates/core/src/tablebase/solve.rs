//! Retrograde fixpoint.
//!
//! Pass 0 builds the successor lists of every valid index and labels
//! checkmates (loss in 0) and stalemates (draw). Pass `d` then labels, from
//! the labels of earlier passes only, every position that has a successor
//! lost in `d - 1` plies (win in `d`) or whose successors are all won with
//! the longest at `d - 1` (loss in `d`). Whatever is unlabeled once a pass
//! changes nothing is a draw.
//!
//! Successors in smaller classes (captures, promotions) come from already
//! solved subtables. Successors with a live en-passant capture are outside
//! the index space and are valued on the fly from their own successors.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::parallel::Workers;
use crate::rules::{legal_moves_into, play_unchecked, Move, PieceKind, Position};

use super::{Entry, MaterialClass, MaterialKey, Tablebase, TablebaseError, WdlDtm};

pub const MEM_BUDGET_ENV: &str = "STRATEGIA_MEM_BUDGET_MB";
pub const DEFAULT_MEM_BUDGET_MB: u64 = 2048;

/// Working-set estimate per index of the class being solved: label, offset
/// and a typical successor list.
const SOLVE_BYTES_PER_INDEX: u64 = 64;
/// Finished tables keep one entry per index.
const TABLE_BYTES_PER_INDEX: u64 = 4;

const CHUNK: u64 = 4096;

const TAG_SHIFT: u32 = 30;
const TAG_OWN: u32 = 0;
const TAG_FIXED: u32 = 1;
const TAG_VIRTUAL: u32 = 2;
const PAYLOAD: u32 = (1 << TAG_SHIFT) - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Worker threads for the per-pass fan-out; 1 is sequential.
    pub workers: usize,
    pub mem_budget_mb: u64,
}

impl SolveOptions {
    /// Reads the memory budget from `STRATEGIA_MEM_BUDGET_MB`.
    pub fn from_env() -> SolveOptions {
        let mem_budget_mb =
            std::env::var(MEM_BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MEM_BUDGET_MB);
        SolveOptions { workers: 1, mem_budget_mb }
    }

    pub fn with_workers(mut self, workers: usize) -> SolveOptions {
        self.workers = workers;
        self
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions::from_env()
    }
}

pub fn solve(mc: &MaterialClass) -> Result<Tablebase, TablebaseError> {
    solve_with(mc, &SolveOptions::default())
}

pub fn solve_with(mc: &MaterialClass, opts: &SolveOptions) -> Result<Tablebase, TablebaseError> {
    check_budget(mc, opts)?;
    let workers = Workers::new(opts.workers);
    let subtables = solve_all(mc, &workers, opts)?;
    solve_class(mc, subtables, &workers, opts)
}

pub(crate) fn solve_descendants(
    mc: &MaterialClass,
    opts: &SolveOptions,
) -> Result<BTreeMap<MaterialKey, Arc<Tablebase>>, TablebaseError> {
    check_budget(mc, opts)?;
    solve_all(mc, &Workers::new(opts.workers), opts)
}

fn check_budget(mc: &MaterialClass, opts: &SolveOptions) -> Result<(), TablebaseError> {
    let mut classes = mc.descendants();
    classes.push(mc.clone());
    let largest = classes.iter().map(|c| c.index_space()).max().unwrap_or(0);
    let total: u64 = classes.iter().map(|c| c.index_space()).sum();
    let needed = largest * SOLVE_BYTES_PER_INDEX + total * TABLE_BYTES_PER_INDEX;
    let budget = opts.mem_budget_mb.saturating_mul(1 << 20);
    if needed > budget || largest > PAYLOAD as u64 {
        return Err(TablebaseError::BudgetExceeded {
            needed_mb: needed.div_ceil(1 << 20),
            budget_mb: opts.mem_budget_mb,
        });
    }
    Ok(())
}

/// Solves every descendant of `mc`, children before parents.
fn solve_all(
    mc: &MaterialClass,
    workers: &Workers,
    opts: &SolveOptions,
) -> Result<BTreeMap<MaterialKey, Arc<Tablebase>>, TablebaseError> {
    let mut solved: BTreeMap<MaterialKey, Arc<Tablebase>> = BTreeMap::new();
    for class in mc.descendants() {
        let own: BTreeMap<_, _> =
            class.descendants().iter().map(|d| (d.key(), Arc::clone(&solved[&d.key()]))).collect();
        let table = solve_class(&class, own, workers, opts)?;
        solved.insert(class.key(), Arc::new(table));
    }
    Ok(solved)
}

/// Successor as stored in the graph.
enum Succ {
    Own(u32),
    Fixed(Entry),
    Virtual(Position),
}

/// Label store seen by the value lookups: `None` is still unknown.
#[derive(Clone, Copy)]
enum Labels<'a> {
    Solving(&'a [Option<Entry>]),
    Final(&'a [Entry]),
}

impl Labels<'_> {
    #[inline]
    fn get(&self, i: usize) -> Option<Entry> {
        match self {
            Labels::Solving(l) => l[i],
            Labels::Final(e) => Some(e[i]),
        }
    }
}

struct Ctx<'a> {
    mc: &'a MaterialClass,
    children: &'a BTreeMap<MaterialKey, Arc<Tablebase>>,
    labels: Labels<'a>,
}

fn has_live_ep_capture(pos: &Position, moves: &[Move]) -> bool {
    let Some(ep) = pos.ep_square() else { return false };
    moves.iter().any(|m| m.to == ep && pos.piece_at(m.from).is_some_and(|p| p.kind == PieceKind::Pawn))
}

/// Drops an en-passant square that no legal move can use.
fn strip_dead_ep(pos: &Position, scratch: &mut Vec<Move>) -> Position {
    if pos.ep_square().is_none() {
        return *pos;
    }
    legal_moves_into(pos, scratch);
    if has_live_ep_capture(pos, scratch) {
        *pos
    } else {
        let mut p = *pos;
        p.ep = None;
        p
    }
}

fn classify(
    mc: &MaterialClass,
    children: &BTreeMap<MaterialKey, Arc<Tablebase>>,
    pos: &Position,
    scratch: &mut Vec<Move>,
) -> Result<Succ, TablebaseError> {
    let key = MaterialKey::of_position(pos);
    if key == mc.key() {
        let p = strip_dead_ep(pos, scratch);
        if p.ep_square().is_some() {
            return Ok(Succ::Virtual(p));
        }
        let i = mc.index_of(&p).expect("same material");
        return Ok(Succ::Own(i as u32));
    }
    let child = children.get(&key).ok_or_else(|| TablebaseError::MissingSubtable(crate::rules::format_fen(pos)))?;
    let v = child.probe(pos)?;
    Ok(Succ::Fixed(entry_of(v)))
}

fn entry_of(v: WdlDtm) -> Entry {
    match (v.wdl, v.dtm) {
        (super::Wdl::Win, Some(d)) => Entry::Win(d),
        (super::Wdl::Loss, Some(d)) => Entry::Loss(d),
        _ => Entry::Draw,
    }
}

/// Combines successor values into the value of their parent. `None` inputs
/// are unknown. Returns `None` when the parent is not yet determined.
#[derive(Default)]
struct Combine {
    best_loss: Option<u16>,
    max_win: u16,
    all_win: bool,
    complete: bool,
    any: bool,
}

impl Combine {
    fn new() -> Combine {
        Combine { best_loss: None, max_win: 0, all_win: true, complete: true, any: false }
    }

    #[inline]
    fn add(&mut self, value: Option<Entry>) {
        self.any = true;
        match value {
            Some(Entry::Loss(d)) => {
                self.best_loss = Some(self.best_loss.map_or(d, |b| b.min(d)));
                self.all_win = false;
            }
            Some(Entry::Win(d)) => self.max_win = self.max_win.max(d),
            Some(Entry::Draw) | Some(Entry::Invalid) => self.all_win = false,
            None => {
                self.all_win = false;
                self.complete = false;
            }
        }
    }

    fn result(&self) -> Option<Entry> {
        debug_assert!(self.any);
        if let Some(d) = self.best_loss {
            Some(Entry::Win(d + 1))
        } else if self.all_win {
            Some(Entry::Loss(self.max_win + 1))
        } else if self.complete {
            Some(Entry::Draw)
        } else {
            None
        }
    }
}

impl Ctx<'_> {
    /// Value of a position outside the index space, from its successors.
    fn virtual_value(&self, q: &Position, depth: u8) -> Result<Option<Entry>, TablebaseError> {
        let mut moves = Vec::with_capacity(32);
        legal_moves_into(q, &mut moves);
        if moves.is_empty() {
            return Ok(Some(if q.in_check() { Entry::Loss(0) } else { Entry::Draw }));
        }
        let mut scratch = Vec::with_capacity(32);
        let mut acc = Combine::new();
        for &m in &moves {
            let next = play_unchecked(q, m);
            let v = match classify(self.mc, self.children, &next, &mut scratch)? {
                Succ::Own(j) => self.labels.get(j as usize),
                Succ::Fixed(e) => Some(e),
                Succ::Virtual(p) => {
                    // each nested level needs another double step, so depth is
                    // bounded by the pawn count
                    debug_assert!(depth < 16);
                    self.virtual_value(&p, depth + 1)?
                }
            };
            acc.add(v);
        }
        Ok(acc.result())
    }
}

struct Graph {
    offsets: Vec<u32>,
    refs: Vec<u32>,
    virtuals: Vec<Position>,
}

struct BuiltChunk {
    labels: Vec<Option<Entry>>,
    counts: Vec<u32>,
    refs: Vec<u32>,
    virtuals: Vec<Position>,
}

fn encode_fixed(e: Entry) -> u32 {
    let (tag, dtm) = match e {
        Entry::Win(d) => (1, d),
        Entry::Draw => (2, 0),
        Entry::Loss(d) => (3, d),
        Entry::Invalid => unreachable!("successor of a legal move is legal"),
    };
    (TAG_FIXED << TAG_SHIFT) | (tag << 16) | dtm as u32
}

fn decode_fixed(r: u32) -> Entry {
    let dtm = (r & 0xFFFF) as u16;
    match (r >> 16) & 0b11 {
        1 => Entry::Win(dtm),
        2 => Entry::Draw,
        _ => Entry::Loss(dtm),
    }
}

fn build_chunk(
    mc: &MaterialClass,
    children: &BTreeMap<MaterialKey, Arc<Tablebase>>,
    range: std::ops::Range<u64>,
) -> Result<BuiltChunk, TablebaseError> {
    let n = (range.end - range.start) as usize;
    let mut out = BuiltChunk {
        labels: Vec::with_capacity(n),
        counts: Vec::with_capacity(n),
        refs: Vec::with_capacity(n * 8),
        virtuals: Vec::new(),
    };
    let mut moves = Vec::with_capacity(64);
    let mut scratch = Vec::with_capacity(64);
    for i in range {
        let Some(pos) = mc.position_at(i) else {
            out.labels.push(Some(Entry::Invalid));
            out.counts.push(0);
            continue;
        };
        legal_moves_into(&pos, &mut moves);
        if moves.is_empty() {
            out.labels.push(Some(if pos.in_check() { Entry::Loss(0) } else { Entry::Draw }));
            out.counts.push(0);
            continue;
        }
        out.labels.push(None);
        out.counts.push(moves.len() as u32);
        for &m in &moves {
            let next = play_unchecked(&pos, m);
            let r = match classify(mc, children, &next, &mut scratch)? {
                Succ::Own(j) => (TAG_OWN << TAG_SHIFT) | j,
                Succ::Fixed(e) => encode_fixed(e),
                Succ::Virtual(p) => {
                    out.virtuals.push(p);
                    (TAG_VIRTUAL << TAG_SHIFT) | (out.virtuals.len() as u32 - 1)
                }
            };
            out.refs.push(r);
        }
    }
    Ok(out)
}

fn build_graph(
    mc: &MaterialClass,
    children: &BTreeMap<MaterialKey, Arc<Tablebase>>,
    workers: &Workers,
    opts: &SolveOptions,
) -> Result<(Vec<Option<Entry>>, Graph), TablebaseError> {
    let n = mc.index_space();
    let chunks = workers.map_ranges(n, CHUNK, |r| build_chunk(mc, children, r));
    let mut labels = Vec::with_capacity(n as usize);
    let mut offsets = Vec::with_capacity(n as usize + 1);
    let mut refs = Vec::new();
    let mut virtuals = Vec::new();
    offsets.push(0u32);
    for chunk in chunks {
        let chunk = chunk?;
        labels.extend_from_slice(&chunk.labels);
        let base = virtuals.len() as u32;
        for &c in &chunk.counts {
            let last = *offsets.last().unwrap() as u64;
            let next = last + c as u64;
            if next > u32::MAX as u64 {
                return Err(TablebaseError::BudgetExceeded {
                    needed_mb: (next * 4) >> 20,
                    budget_mb: opts.mem_budget_mb,
                });
            }
            offsets.push(next as u32);
        }
        refs.extend(chunk.refs.iter().map(|&r| {
            if r >> TAG_SHIFT == TAG_VIRTUAL {
                (TAG_VIRTUAL << TAG_SHIFT) | ((r & PAYLOAD) + base)
            } else {
                r
            }
        }));
        virtuals.extend(chunk.virtuals);
    }
    let bytes = refs.len() as u64 * 4 + offsets.len() as u64 * 4 + labels.len() as u64 * 4;
    if bytes > opts.mem_budget_mb.saturating_mul(1 << 20) {
        return Err(TablebaseError::BudgetExceeded {
            needed_mb: bytes.div_ceil(1 << 20),
            budget_mb: opts.mem_budget_mb,
        });
    }
    Ok((labels, Graph { offsets, refs, virtuals }))
}

enum Seen {
    Known(Entry),
    Unknown,
    /// Known, but with a distance not yet reachable in this pass.
    Deferred,
}

struct PassResult {
    updates: Vec<(u32, Entry)>,
    deferred: bool,
}

fn run_pass(ctx: &Ctx<'_>, graph: &Graph, chunk: &[u32], horizon: u16) -> Result<PassResult, TablebaseError> {
    let mut out = PassResult { updates: Vec::new(), deferred: false };
    for &i in chunk {
        let lo = graph.offsets[i as usize] as usize;
        let hi = graph.offsets[i as usize + 1] as usize;
        let mut best_loss: Option<u16> = None;
        let mut all_win = true;
        let mut max_win = 0u16;
        for &r in &graph.refs[lo..hi] {
            let seen = match r >> TAG_SHIFT {
                TAG_OWN => match ctx.labels.get((r & PAYLOAD) as usize) {
                    Some(e) => Seen::Known(e),
                    None => Seen::Unknown,
                },
                TAG_FIXED => visible(decode_fixed(r), horizon),
                _ => match ctx.virtual_value(&graph.virtuals[(r & PAYLOAD) as usize], 0)? {
                    Some(e) => visible(e, horizon),
                    None => Seen::Unknown,
                },
            };
            match seen {
                Seen::Known(Entry::Loss(d)) => {
                    best_loss = Some(best_loss.map_or(d, |b| b.min(d)));
                    all_win = false;
                }
                Seen::Known(Entry::Win(d)) => max_win = max_win.max(d),
                Seen::Known(_) | Seen::Unknown => all_win = false,
                Seen::Deferred => {
                    all_win = false;
                    out.deferred = true;
                }
            }
        }
        let label = match best_loss {
            Some(d) => Some(Entry::Win(d + 1)),
            None if all_win => Some(Entry::Loss(max_win + 1)),
            None => None,
        };
        if let Some(e) = label {
            debug_assert_eq!(e.dtm(), Some(horizon), "label outside its generation");
            out.updates.push((i, e));
        }
    }
    Ok(out)
}

#[inline]
fn visible(e: Entry, horizon: u16) -> Seen {
    match e.dtm() {
        Some(d) if d >= horizon => Seen::Deferred,
        _ => Seen::Known(e),
    }
}

fn solve_class(
    mc: &MaterialClass,
    children: BTreeMap<MaterialKey, Arc<Tablebase>>,
    workers: &Workers,
    opts: &SolveOptions,
) -> Result<Tablebase, TablebaseError> {
    let (mut labels, graph) = build_graph(mc, &children, workers, opts)?;
    let mut pending: Vec<u32> = labels.iter().enumerate().filter(|(_, l)| l.is_none()).map(|(i, _)| i as u32).collect();

    let mut horizon: u16 = 1;
    while !pending.is_empty() {
        let ctx = Ctx { mc, children: &children, labels: Labels::Solving(&labels) };
        let results = workers.map_chunks(&pending, CHUNK as usize, |c| run_pass(&ctx, &graph, c, horizon));
        let mut updates = Vec::new();
        let mut deferred = false;
        for r in results {
            let r = r?;
            deferred |= r.deferred;
            updates.extend(r.updates);
        }
        if updates.is_empty() && !deferred {
            break;
        }
        for &(i, e) in &updates {
            labels[i as usize] = Some(e);
        }
        pending.retain(|&i| labels[i as usize].is_none());
        horizon =
            horizon.checked_add(1).ok_or_else(|| TablebaseError::Corrupt("distance to mate overflowed u16".into()))?;
    }

    let entries = labels.into_iter().map(|l| l.unwrap_or(Entry::Draw)).collect();
    Ok(Tablebase { material: mc.clone(), entries, subtables: children })
}

/// Final value of a legal position of the table's own class.
pub(crate) fn final_value(tb: &Tablebase, pos: &Position) -> Result<WdlDtm, TablebaseError> {
    let mut scratch = Vec::with_capacity(32);
    let p = strip_dead_ep(pos, &mut scratch);
    let entry = if p.ep_square().is_none() {
        let i = tb.material.index_of(&p).expect("material checked by caller");
        tb.entries[i as usize]
    } else {
        let ctx = Ctx { mc: &tb.material, children: &tb.subtables, labels: Labels::Final(&tb.entries) };
        ctx.virtual_value(&p, 0)?.unwrap_or(Entry::Draw)
    };
    entry.value().ok_or_else(|| TablebaseError::InvalidIndex(tb.material.index_of(&p).unwrap_or(u64::MAX)))
}
