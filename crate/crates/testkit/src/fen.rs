use crate::board::State;

/// Reads the first four FEN fields on a `width`-wide board; the height is
/// the number of ranks given.
pub fn parse(text: &str, width: usize) -> Result<State, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() < 4 {
        return Err(format!("need 4 fields in {text:?}"));
    }
    let ranks: Vec<&str> = fields[0].split('/').collect();
    let height = ranks.len();
    let mut s = State::empty(width, height, fields[1] == "w");
    for (i, row) in ranks.iter().enumerate() {
        let r = height - 1 - i;
        let mut f = 0;
        for c in row.chars() {
            if let Some(n) = c.to_digit(10) {
                f += n as usize;
            } else {
                if f >= width {
                    return Err(format!("rank {} too long", r + 1));
                }
                s.cells[r][f] = c;
                f += 1;
            }
        }
        if f != width {
            return Err(format!("rank {} has {f} files", r + 1));
        }
    }
    for c in fields[2].chars() {
        match c {
            'K' => s.rights[0] = true,
            'Q' => s.rights[1] = true,
            'k' => s.rights[2] = true,
            'q' => s.rights[3] = true,
            '-' => {}
            _ => return Err(format!("bad castling {c}")),
        }
    }
    if fields[3] != "-" {
        let b = fields[3].as_bytes();
        s.ep = Some(((b[0] - b'a') as usize, (b[1] - b'1') as usize));
    }
    Ok(s)
}

/// Four-field FEN.
pub fn format(s: &State) -> String {
    let mut out = String::new();
    for r in (0..s.height).rev() {
        let mut gap = 0;
        for f in 0..s.width {
            let c = s.cells[r][f];
            if c == '.' {
                gap += 1;
            } else {
                if gap > 0 {
                    out.push_str(&gap.to_string());
                    gap = 0;
                }
                out.push(c);
            }
        }
        if gap > 0 {
            out.push_str(&gap.to_string());
        }
        if r > 0 {
            out.push('/');
        }
    }
    out.push_str(if s.white_to_move { " w " } else { " b " });
    let rights: String = ['K', 'Q', 'k', 'q'].iter().zip(s.rights).filter(|(_, on)| *on).map(|(c, _)| *c).collect();
    out.push_str(if rights.is_empty() { "-" } else { &rights });
    out.push(' ');
    match s.ep {
        Some((f, r)) => out.push_str(&State::square_name(f, r)),
        None => out.push('-'),
    }
    out
}
