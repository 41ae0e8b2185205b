use std::fmt::Write;
use std::path::Path;

use super::RawMesh;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            };
            let line = line.trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| perr(line, format!("expected {what}, found '{tok}'")))
}

/// Parses ASCII OFF. Face arity selects the dimension: 2 → curves,
/// 3 → surfaces, 4 → solids.
pub fn parse_off(text: &str) -> Result<RawMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (hline, header) = lines
        .next_content()
        .ok_or_else(|| perr(1, "empty input, expected 'OFF' header"))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("OFF") {
        return Err(perr(hline, format!("malformed header '{header}'")));
    }
    // counts may share the header line
    let rest: Vec<&str> = head.collect();
    let (cline, counts) = if rest.is_empty() {
        let (l, s) = lines
            .next_content()
            .ok_or_else(|| perr(lines.last + 1, "missing counts line"))?;
        (l, s.split_whitespace().collect::<Vec<_>>())
    } else {
        (hline, rest)
    };
    if counts.len() < 2 {
        return Err(perr(cline, "counts line needs 'nv nf [ne]'"));
    }
    let nv = parse_usize(counts[0], cline, "vertex count")?;
    let nf = parse_usize(counts[1], cline, "face count")?;

    let mut coords = Vec::with_capacity(nv);
    let mut cdim = None;
    for _ in 0..nv {
        let (l, s) = lines
            .next_content()
            .ok_or_else(|| perr(lines.last + 1, "unexpected end of file in vertex list"))?;
        let p = s
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| perr(l, format!("bad coordinate '{t}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match cdim {
            None => cdim = Some(p.len()),
            Some(d) if d != p.len() => {
                return Err(perr(l, format!("expected {d} coordinates, found {}", p.len())))
            }
            _ => {}
        }
        coords.push(p);
    }

    let mut cells = Vec::with_capacity(nf);
    let mut arity = None;
    for _ in 0..nf {
        let (l, s) = lines
            .next_content()
            .ok_or_else(|| perr(lines.last + 1, "unexpected end of file in face list"))?;
        let mut toks = s.split_whitespace();
        let k = parse_usize(toks.next().unwrap_or(""), l, "face arity")?;
        if !(2..=4).contains(&k) {
            return Err(perr(l, format!("unsupported face arity {k}")));
        }
        match arity {
            None => arity = Some(k),
            Some(a) if a != k => {
                return Err(perr(l, format!("mixed cell arity: {k} after {a}")))
            }
            _ => {}
        }
        let mut cell = Vec::with_capacity(k);
        for _ in 0..k {
            let tok = toks
                .next()
                .ok_or_else(|| perr(l, "face line has too few indices"))?;
            let i = parse_usize(tok, l, "vertex index")?;
            if i >= nv {
                return Err(perr(l, format!("vertex index {i} out of range (nv = {nv})")));
            }
            cell.push(i);
        }
        // trailing tokens (colors) are ignored
        cells.push(cell);
    }

    let dim = arity.map(|a| a - 1).unwrap_or(2);
    RawMesh::new(coords, cells, dim)
}

pub fn read_off(path: impl AsRef<Path>) -> Result<RawMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_off(&text)
}

/// Serializes with 3 coordinates per vertex line when the embedding allows it.
pub fn write_off(mesh: &RawMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.coords.len(), mesh.cells.len());
    for p in &mesh.coords {
        let mut p = p.clone();
        while p.len() < 3 {
            p.push(0.0);
        }
        let row: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    for c in &mesh.cells {
        let idx: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", c.len(), idx.join(" "));
    }
    s
}
