//! The line-oriented `psg 1` text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{ColorSpec, Geometry, Level, VertexId};

pub fn to_psg_string(g: &Geometry) -> String {
    let mut out = String::from("psg 1\n");
    match g.color_spec() {
        None => out.push_str("colors none\n"),
        Some(spec) if spec.is_cyclic() => {
            let _ = writeln!(out, "colors k {}", spec.k());
        }
        Some(spec) => {
            let _ = write!(out, "colors pi {} :", spec.k());
            for j in spec.successor_map() {
                let _ = write!(out, " {j}");
            }
            out.push('\n');
        }
    }
    for v in g.vertices() {
        let _ = writeln!(out, "v {v} {}", g.level(v).expect("present").index());
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    for (b, c) in g.line_colors() {
        let _ = writeln!(out, "lc {b} {c}");
    }
    for ((a, c), col) in g.section_colors() {
        let _ = writeln!(out, "sc {a} {c} {col}");
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what}")))
}

pub fn from_psg_str(text: &str) -> Result<Geometry> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, "psg 1")) => {}
        Some((n, other)) => return Err(parse_err(n, format!("expected `psg 1`, found `{other}`"))),
        None => return Err(parse_err(1, "empty input")),
    }
    let (n, header) = lines.next().ok_or_else(|| parse_err(2, "missing colors line"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let spec = match toks.as_slice() {
        ["colors", "none"] => None,
        ["colors", "k", k] => {
            let k: usize = k.parse().map_err(|_| parse_err(n, "bad k"))?;
            Some(ColorSpec::cyclic(k).map_err(|e| parse_err(n, e.to_string()))?)
        }
        ["colors", "pi", k, ":", rest @ ..] => {
            let k: usize = k.parse().map_err(|_| parse_err(n, "bad k"))?;
            let succ: Vec<usize> = rest
                .iter()
                .map(|t| t.parse().map_err(|_| parse_err(n, "bad permutation entry")))
                .collect::<Result<_>>()?;
            if succ.len() != k {
                return Err(parse_err(n, format!("expected {k} entries, found {}", succ.len())));
            }
            Some(ColorSpec::from_successor(succ).map_err(|e| parse_err(n, e.to_string()))?)
        }
        _ => return Err(parse_err(n, format!("bad colors line `{header}`"))),
    };
    let mut g = Geometry::new(spec);
    for (n, line) in lines {
        let mut toks = line.split_whitespace();
        match toks.next() {
            None => continue,
            Some("v") => {
                let id: VertexId = num(toks.next(), n, "vertex id")?;
                let lvl: u8 = num(toks.next(), n, "level")?;
                let level = Level::from_index(lvl).ok_or_else(|| parse_err(n, "level must be 0, 1 or 2"))?;
                g.insert_vertex(id, level).map_err(|e| parse_err(n, e.to_string()))?;
            }
            Some("e") => {
                let u: VertexId = num(toks.next(), n, "endpoint")?;
                let v: VertexId = num(toks.next(), n, "endpoint")?;
                if g.is_edge(u, v) {
                    return Err(parse_err(n, format!("duplicate edge {u} {v}")));
                }
                g.add_edge(u, v).map_err(|e| parse_err(n, e.to_string()))?;
            }
            Some("lc") => {
                let b: VertexId = num(toks.next(), n, "line id")?;
                let c: usize = num(toks.next(), n, "color")?;
                g.require_level(b, Level::Line).map_err(|e| parse_err(n, e.to_string()))?;
                g.set_line_color(b, c).map_err(|e| parse_err(n, e.to_string()))?;
            }
            Some("sc") => {
                let a: VertexId = num(toks.next(), n, "plane id")?;
                let c: VertexId = num(toks.next(), n, "point id")?;
                let col: usize = num(toks.next(), n, "color")?;
                g.require_level(a, Level::Plane).map_err(|e| parse_err(n, e.to_string()))?;
                g.require_level(c, Level::Point).map_err(|e| parse_err(n, e.to_string()))?;
                g.set_section_color(a, c, col).map_err(|e| parse_err(n, e.to_string()))?;
            }
            Some(other) => return Err(parse_err(n, format!("unknown record `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(parse_err(n, "trailing tokens"));
        }
    }
    Ok(g)
}

pub fn save_psg(g: &Geometry, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, to_psg_string(g))
}

pub fn load_psg(path: impl AsRef<Path>) -> Result<Geometry> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.as_ref().display())))?;
    from_psg_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::new_flag_geometry;

    #[test]
    fn fresh_flag_line_counts() {
        let (g, _) = new_flag_geometry(None, 0, 0).unwrap();
        assert_eq!(to_psg_string(&g).lines().count(), 7);
        let (g, _) = new_flag_geometry(Some(ColorSpec::cyclic(2).unwrap()), 0, 0).unwrap();
        let text = to_psg_string(&g);
        assert_eq!(text.lines().count(), 9);
        assert_eq!(text, "psg 1\ncolors k 2\nv 0 2\nv 1 1\nv 2 0\ne 0 1\ne 1 2\nlc 1 0\nsc 0 2 0\n");
        assert_eq!(to_psg_string(&from_psg_str(&text).unwrap()), text);
    }

    #[test]
    fn permutation_header_round_trips() {
        let spec = ColorSpec::from_successor(vec![1, 0, 3, 2]).unwrap();
        let (g, _) = new_flag_geometry(Some(spec), 2, 3).unwrap();
        let text = to_psg_string(&g);
        assert!(text.contains("colors pi 4 : 1 0 3 2\n"));
        assert_eq!(from_psg_str(&text).unwrap(), g);
    }

    #[test]
    fn malformed_inputs() {
        let base = "psg 1\ncolors none\nv 5 1\nv 6 0\n";
        let bad = [
            format!("{base}e 5 5\n"),
            format!("{base}v 5 0\n"),
            format!("{base}e 5 9\n"),
            format!("{base}e 5 6\ne 5 6\n"),
            "psg 2\ncolors none\n".to_string(),
            "psg 1\ncolors pi 2 : 0 1\n".to_string(),
            format!("{base}x 1\n"),
        ];
        for text in bad {
            assert!(matches!(from_psg_str(&text), Err(Error::Parse { .. })), "{text}");
        }
        match from_psg_str(&format!("{base}e 5 5\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }
}
