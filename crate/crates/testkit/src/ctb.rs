//! Reader for the binary table format, written from the byte layout alone.

use crate::board::State;

pub fn crc32(data: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtbFile {
    pub version: u8,
    pub width: u8,
    pub height: u8,
    /// `(kind, color)` with kinds 0 pawn .. 5 king and color 0 for White.
    pub pieces: Vec<(u8, u8)>,
    /// `(wdl, dtm)`: wdl 0 invalid, 1 win, 2 draw, 3 loss; dtm 0xFFFF absent.
    pub records: Vec<(u8, u16)>,
    pub stored_crc: u32,
    pub computed_crc: u32,
}

pub fn read(bytes: &[u8]) -> Result<CtbFile, String> {
    if bytes.len() < 8 || &bytes[..4] != b"CTB1" {
        return Err("magic".into());
    }
    let (version, width, height, count) = (bytes[4], bytes[5], bytes[6], bytes[7] as usize);
    let mut at = 8;
    let need = |at: usize, n: usize| if bytes.len() < at + n { Err("truncated".to_string()) } else { Ok(()) };
    need(at, 2 * count)?;
    let pieces = (0..count).map(|i| (bytes[at + 2 * i], bytes[at + 2 * i + 1])).collect();
    at += 2 * count;
    need(at, 8)?;
    let n = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
    at += 8;
    need(at, 3 * n + 4)?;
    let body = &bytes[at..at + 3 * n];
    let records = body.chunks(3).map(|r| (r[0], u16::from_le_bytes([r[1], r[2]]))).collect();
    at += 3 * n;
    let stored_crc = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    if bytes.len() != at + 4 {
        return Err("trailing bytes".into());
    }
    Ok(CtbFile { version, width, height, pieces, records, stored_crc, computed_crc: crc32(body) })
}

fn letter(kind: u8, color: u8) -> char {
    let c = ['p', 'n', 'b', 'r', 'q', 'k'][kind as usize];
    if color == 0 {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

impl CtbFile {
    /// Slot of `s`: `side * S^k + sum sq_i * S^i`, pieces in header order
    /// and identical pieces on ascending squares.
    pub fn index_of(&self, s: &State) -> u64 {
        let size = (self.width as u64) * (self.height as u64);
        let mut taken: Vec<usize> = Vec::new();
        let mut index = 0u64;
        let mut scale = 1u64;
        for &(kind, color) in &self.pieces {
            let c = letter(kind, color);
            let sq = (0..s.height)
                .flat_map(|r| (0..s.width).map(move |f| (f, r)))
                .map(|(f, r)| r * s.width + f)
                .find(|&q| s.cells[q / s.width][q % s.width] == c && !taken.contains(&q))
                .expect("piece present");
            taken.push(sq);
            index += sq as u64 * scale;
            scale *= size;
        }
        if !s.white_to_move {
            index += scale;
        }
        index
    }
}
