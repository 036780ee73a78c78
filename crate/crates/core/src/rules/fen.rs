//! FEN subset: placement, side, castling and en-passant fields. Board
//! dimensions come from the [`BoardSpec`], never from the text. Trailing
//! halfmove/fullmove counters are accepted and ignored.

use super::{BoardSpec, CastleRights, Color, Piece, Position, RulesError, Square, MAX_SQUARES};

fn parse_err(offset: usize, message: impl Into<String>) -> RulesError {
    RulesError::Parse { offset, message: message.into() }
}

/// Splits on single spaces while remembering each field's byte offset.
fn fields(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == ' ' {
            if let Some(s) = start.take() {
                out.push((s, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

pub fn parse_fen(text: &str, spec: &BoardSpec) -> Result<Position, RulesError> {
    let f = fields(text);
    if f.len() < 4 {
        return Err(parse_err(text.len(), "expected placement, side, castling and en-passant fields"));
    }
    if f.len() > 6 {
        return Err(parse_err(f[6].0, "unexpected trailing field"));
    }
    let (w, h) = (spec.width() as usize, spec.height() as usize);

    let mut board = [None; MAX_SQUARES];
    let (base, placement) = f[0];
    let mut rank = h as isize - 1;
    let mut file = 0usize;
    for (i, c) in placement.char_indices() {
        let at = base + i;
        match c {
            '/' => {
                if file != w {
                    return Err(parse_err(at, format!("rank has {file} files, board width is {w}")));
                }
                rank -= 1;
                file = 0;
                if rank < 0 {
                    return Err(parse_err(at, format!("more than {h} ranks")));
                }
            }
            '1'..='8' => {
                file += c as usize - '0' as usize;
                if file > w {
                    return Err(parse_err(at, format!("rank wider than {w} files")));
                }
            }
            _ => {
                let piece =
                    Piece::from_fen_char(c).ok_or_else(|| parse_err(at, format!("unexpected character {c:?}")))?;
                if file >= w {
                    return Err(parse_err(at, format!("rank wider than {w} files")));
                }
                board[rank as usize * w + file] = Some(piece);
                file += 1;
            }
        }
    }
    if rank != 0 || file != w {
        return Err(parse_err(base + placement.len(), format!("placement must have {h} ranks of {w} files")));
    }

    let (at, side_text) = f[1];
    let side = match side_text {
        "w" => Color::White,
        "b" => Color::Black,
        _ => return Err(parse_err(at, "side must be 'w' or 'b'")),
    };

    let (at, castle_text) = f[2];
    let mut castling = CastleRights::NONE;
    if castle_text != "-" {
        let order = ['K', 'Q', 'k', 'q'];
        let mut last = None;
        for (i, c) in castle_text.char_indices() {
            let pos = order
                .iter()
                .position(|&o| o == c)
                .ok_or_else(|| parse_err(at + i, format!("bad castling flag {c:?}")))?;
            if last.is_some_and(|l| pos <= l) {
                return Err(parse_err(at + i, "castling flags must appear in KQkq order"));
            }
            last = Some(pos);
            let color = if pos < 2 { Color::White } else { Color::Black };
            castling = castling.with(color, pos % 2 == 0, true);
        }
    }

    let (at, ep_text) = f[3];
    let ep = if ep_text == "-" {
        None
    } else {
        Some(spec.parse_square(ep_text).ok_or_else(|| parse_err(at, format!("bad square {ep_text:?}")))?)
    };

    for &(at, counter) in &f[4..] {
        if counter.parse::<u32>().is_err() {
            return Err(parse_err(at, "move counter must be a non-negative integer"));
        }
    }

    let pos = Position { spec: *spec, board, side, ep, castling, ply: side.index() as u32 };
    pos.validate()?;
    Ok(pos)
}

/// Canonical four-field FEN of `pos`.
pub fn format_fen(pos: &Position) -> String {
    let spec = pos.spec();
    let (w, h) = (spec.width(), spec.height());
    let mut out = String::with_capacity(80);
    for rank in (0..h).rev() {
        let mut empty = 0;
        for file in 0..w {
            match pos.piece_at(Square(rank * w + file)) {
                Some(p) => {
                    if empty > 0 {
                        out.push((b'0' + empty) as char);
                        empty = 0;
                    }
                    out.push(p.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push((b'0' + empty) as char);
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(match pos.side_to_move() {
        Color::White => 'w',
        Color::Black => 'b',
    });
    out.push(' ');
    let cr = pos.castle_rights();
    if cr.is_empty() {
        out.push('-');
    } else {
        for (c, color, ks) in [
            ('K', Color::White, true),
            ('Q', Color::White, false),
            ('k', Color::Black, true),
            ('q', Color::Black, false),
        ] {
            if cr.has(color, ks) {
                out.push(c);
            }
        }
    }
    out.push(' ');
    match pos.ep_square() {
        Some(sq) => out.push_str(&spec.square_name(sq)),
        None => out.push('-'),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{PieceKind, Violation};

    #[test]
    fn opposed_kings_transcription() {
        let spec = BoardSpec::standard();
        let pos = parse_fen("8/8/4k3/8/4K3/8/8/8 w - -", &spec).unwrap();
        let sq = |n| spec.parse_square(n).unwrap();
        assert_eq!(pos.piece_at(sq("e4")), Some(Piece::new(Color::White, PieceKind::King)));
        assert_eq!(pos.piece_at(sq("e6")), Some(Piece::new(Color::Black, PieceKind::King)));
        assert_eq!(pos.piece_count(), 2);
        assert_eq!(pos.side_to_move(), Color::White);
        assert_eq!(pos.ply(), 0);
    }

    #[test]
    fn canonical_round_trip() {
        let spec = BoardSpec::standard();
        for fen in [
            "8/8/4k3/8/4K3/8/8/8 w - -",
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3",
            "r3k2r/8/8/8/8/8/8/R3K2R w Kq -",
            "8/8/8/8/8/8/1qk5/K7 w - -",
        ] {
            assert_eq!(format_fen(&parse_fen(fen, &spec).unwrap()), fen);
        }
        let small = BoardSpec::sized(4, 4).unwrap();
        assert_eq!(format_fen(&parse_fen("k3/4/1Q2/3K b - -", &small).unwrap()), "k3/4/1Q2/3K b - -");
    }

    #[test]
    fn rank_width_mismatch_is_parse_error() {
        let spec = BoardSpec::standard();
        let err = parse_fen("8/8/4k4/8/4K3/8/8/8 w - -", &spec).unwrap_err();
        assert!(matches!(err, RulesError::Parse { offset: 6, .. }), "{err:?}");
        let err = parse_fen("8/8/4k2/8/4K3/8/8/8 w - -", &spec).unwrap_err();
        assert!(matches!(err, RulesError::Parse { offset: 7, .. }), "{err:?}");
        let small = BoardSpec::sized(4, 4).unwrap();
        assert!(matches!(parse_fen("8/8/4k3/8/4K3/8/8/8 w - -", &small), Err(RulesError::Parse { .. })));
    }

    #[test]
    fn grammar_errors_carry_offsets() {
        let spec = BoardSpec::standard();
        let err = parse_fen("8/8/4k3/8/4K3/8/8/8 x - -", &spec).unwrap_err();
        assert_eq!(err, RulesError::Parse { offset: 20, message: "side must be 'w' or 'b'".into() });
        assert!(matches!(parse_fen("8/8/4k3/8/4K3/8/8/8 w qk -", &spec), Err(RulesError::Parse { offset: 23, .. })));
        assert!(matches!(parse_fen("8/8/4k3/8/4X3/8/8/8 w - -", &spec), Err(RulesError::Parse { offset: 11, .. })));
        assert!(matches!(parse_fen("8/8/4k3/8/4K3/8/8/8 w", &spec), Err(RulesError::Parse { .. })));
    }

    #[test]
    fn invariant_violation_is_validation_error() {
        let spec = BoardSpec::standard();
        assert_eq!(
            parse_fen("8/8/8/8/8/8/8/8 w - -", &spec).unwrap_err(),
            RulesError::Invalid(Violation::KingCount(Color::White, 0))
        );
    }

    #[test]
    fn move_counters_ignored() {
        let spec = BoardSpec::standard();
        let a = parse_fen("8/8/4k3/8/4K3/8/8/8 w - - 0 1", &spec).unwrap();
        let b = parse_fen("8/8/4k3/8/4K3/8/8/8 w - -", &spec).unwrap();
        assert_eq!(a, b);
    }
}
