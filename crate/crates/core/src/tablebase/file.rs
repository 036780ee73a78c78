//! On-disk table format.
//!
//! ```text
//! "CTB1" | version u8 | width u8 | height u8 | count u8 | (kind u8, color u8)*count
//!        | entries u64 LE
//! body:    (wdl u8, dtm u16 LE) per index; wdl 0 invalid, 1 win, 2 draw, 3 loss;
//!          dtm 0xFFFF when absent
//! trailer: CRC32 of body, u32 LE
//! ```
//!
//! Only the table's own class is stored. The tables of reachable classes are
//! re-solved on load.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::rules::{BoardSpec, Color, Piece, PieceKind};

use super::{Entry, MaterialClass, SolveOptions, Tablebase, TablebaseError};

pub const FORMAT_MAGIC: &[u8; 4] = b"CTB1";
pub const FORMAT_VERSION: u8 = 1;

const NO_DTM: u16 = 0xFFFF;
const RECORD: usize = 3;

fn record(e: Entry) -> [u8; RECORD] {
    let (wdl, dtm) = match e {
        Entry::Invalid => (0u8, NO_DTM),
        Entry::Win(d) => (1, d),
        Entry::Draw => (2, NO_DTM),
        Entry::Loss(d) => (3, d),
    };
    let d = dtm.to_le_bytes();
    [wdl, d[0], d[1]]
}

fn body_bytes(entries: &[Entry]) -> Vec<u8> {
    let mut out = Vec::with_capacity(entries.len() * RECORD);
    for &e in entries {
        out.extend_from_slice(&record(e));
    }
    out
}

pub(crate) fn body_checksum(entries: &[Entry]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    for chunk in entries.chunks(1 << 16) {
        h.update(&body_bytes(chunk));
    }
    h.finalize()
}

fn spec_for(width: u8, height: u8) -> Result<BoardSpec, TablebaseError> {
    if (width, height) == (8, 8) {
        return Ok(BoardSpec::standard());
    }
    BoardSpec::sized(width, height).map_err(|e| TablebaseError::Corrupt(e.to_string()))
}

pub fn write_to<W: Write>(tb: &Tablebase, mut w: W) -> Result<(), TablebaseError> {
    let mc = &tb.material;
    let mut header = Vec::with_capacity(24);
    header.extend_from_slice(FORMAT_MAGIC);
    header.push(FORMAT_VERSION);
    header.push(mc.spec().width());
    header.push(mc.spec().height());
    header.push(mc.pieces().len() as u8);
    for p in mc.pieces() {
        header.push(p.kind as u8);
        header.push(p.color as u8);
    }
    header.extend_from_slice(&(tb.entries.len() as u64).to_le_bytes());
    w.write_all(&header)?;
    let mut h = crc32fast::Hasher::new();
    for chunk in tb.entries.chunks(1 << 16) {
        let bytes = body_bytes(chunk);
        h.update(&bytes);
        w.write_all(&bytes)?;
    }
    w.write_all(&h.finalize().to_le_bytes())?;
    w.flush()?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), TablebaseError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => TablebaseError::Truncated,
        _ => TablebaseError::Io(e),
    })
}

/// Reads a table without its subtables; see [`Tablebase::attach_subtables`].
pub fn read_from<R: Read>(mut r: R) -> Result<Tablebase, TablebaseError> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != FORMAT_MAGIC {
        return Err(TablebaseError::BadMagic);
    }
    let mut fixed = [0u8; 4];
    read_exact(&mut r, &mut fixed)?;
    let [version, width, height, count] = fixed;
    if version != FORMAT_VERSION {
        return Err(TablebaseError::UnsupportedVersion(version));
    }
    let spec = spec_for(width, height)?;
    let mut list = vec![0u8; count as usize * 2];
    read_exact(&mut r, &mut list)?;
    let mut pieces = Vec::with_capacity(count as usize);
    for pair in list.chunks(2) {
        let kind = *PieceKind::ALL
            .get(pair[0] as usize)
            .ok_or_else(|| TablebaseError::Corrupt(format!("piece kind {}", pair[0])))?;
        let color = match pair[1] {
            0 => Color::White,
            1 => Color::Black,
            c => return Err(TablebaseError::Corrupt(format!("piece color {c}"))),
        };
        pieces.push(Piece::new(color, kind));
    }
    let material = MaterialClass::new(spec, &pieces).map_err(|e| TablebaseError::Corrupt(e.to_string()))?;
    if material.pieces() != pieces.as_slice() {
        return Err(TablebaseError::Corrupt("piece list not in canonical order".into()));
    }
    let mut n = [0u8; 8];
    read_exact(&mut r, &mut n)?;
    let n = u64::from_le_bytes(n);
    if n != material.index_space() {
        return Err(TablebaseError::Corrupt(format!("{n} entries, class {material} has {}", material.index_space())));
    }

    let mut entries = Vec::with_capacity(n as usize);
    let mut h = crc32fast::Hasher::new();
    let mut buf = vec![0u8; RECORD << 16];
    let mut left = n as usize;
    while left > 0 {
        let take = left.min(1 << 16);
        let bytes = &mut buf[..take * RECORD];
        read_exact(&mut r, bytes)?;
        h.update(bytes);
        for rec in bytes.chunks(RECORD) {
            let dtm = u16::from_le_bytes([rec[1], rec[2]]);
            let e = match (rec[0], dtm) {
                (0, NO_DTM) => Entry::Invalid,
                (2, NO_DTM) => Entry::Draw,
                (1, d) if d != NO_DTM => Entry::Win(d),
                (3, d) if d != NO_DTM => Entry::Loss(d),
                (w, d) => return Err(TablebaseError::Corrupt(format!("record {}: wdl {w} dtm {d}", entries.len()))),
            };
            entries.push(e);
        }
        left -= take;
    }
    let computed = h.finalize();
    let mut trailer = [0u8; 4];
    read_exact(&mut r, &mut trailer)?;
    let stored = u32::from_le_bytes(trailer);
    if stored != computed {
        return Err(TablebaseError::Checksum { stored, computed });
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(TablebaseError::Corrupt("trailing bytes after checksum".into()));
    }
    Ok(Tablebase { material, entries, subtables: BTreeMap::new() })
}

pub fn save(tb: &Tablebase, path: &Path) -> Result<(), TablebaseError> {
    let f = File::create(path)?;
    write_to(tb, BufWriter::new(f))
}

/// Reads a table and re-solves its subtables.
pub fn load(path: &Path, opts: &SolveOptions) -> Result<Tablebase, TablebaseError> {
    let f = File::open(path)?;
    let mut tb = read_from(BufReader::new(f))?;
    tb.attach_subtables(opts)?;
    Ok(tb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tablebase::solve_with;

    fn small() -> Tablebase {
        let mc = MaterialClass::parse("KQvK", BoardSpec::sized(4, 4).unwrap()).unwrap();
        solve_with(&mc, &SolveOptions { workers: 1, mem_budget_mb: 256 }).unwrap()
    }

    fn bytes(tb: &Tablebase) -> Vec<u8> {
        let mut v = Vec::new();
        write_to(tb, &mut v).unwrap();
        v
    }

    #[test]
    fn round_trip() {
        let tb = small();
        let v = bytes(&tb);
        assert_eq!(v.len(), 4 + 4 + 6 + 8 + tb.len() * 3 + 4);
        let back = read_from(v.as_slice()).unwrap();
        assert_eq!(back, tb);
        assert_eq!(back.checksum(), tb.checksum());
        let trailer = u32::from_le_bytes(v[v.len() - 4..].try_into().unwrap());
        assert_eq!(trailer, tb.checksum());
    }

    #[test]
    fn header_layout() {
        let v = bytes(&small());
        assert_eq!(&v[..4], b"CTB1");
        assert_eq!(v[4..8], [1, 4, 4, 3]);
        // K, Q white, then black K
        assert_eq!(v[8..14], [5, 0, 4, 0, 5, 1]);
        assert_eq!(u64::from_le_bytes(v[14..22].try_into().unwrap()), 2 * 16u64.pow(3));
    }

    #[test]
    fn load_errors() {
        let v = bytes(&small());
        let mut bad = v.clone();
        bad[0] = b'X';
        assert!(matches!(read_from(bad.as_slice()), Err(TablebaseError::BadMagic)));
        let mut bad = v.clone();
        bad[4] = 2;
        assert!(matches!(read_from(bad.as_slice()), Err(TablebaseError::UnsupportedVersion(2))));
        assert!(matches!(read_from(&v[..v.len() - 2]), Err(TablebaseError::Truncated)));
        assert!(matches!(read_from(&v[..10]), Err(TablebaseError::Truncated)));
        let mut bad = v.clone();
        let last = bad.len() - 1;
        bad[last] ^= 0x5A;
        assert!(matches!(read_from(bad.as_slice()), Err(TablebaseError::Checksum { .. })));
        let mut bad = v.clone();
        // flip a draw record to loss-without-dtm: corrupt body, caught either way
        let pos = 22 + 3 * v[22..].chunks(3).position(|r| r[0] == 2).unwrap();
        bad[pos] = 3;
        assert!(read_from(bad.as_slice()).is_err());
    }
}
