//! Plain-text mesh format.
//!
//! ```text
//! vertices <n>
//! <x> <y>                 (n lines, 17 significant digits)
//! triangles <m>
//! <i> <j> <k> <region>    (m lines, 0-based indices, region 1 or 2)
//! boundary_edges <b>
//! <i> <j> <label>         (b lines, label: dirichlet)
//! ```
//!
//! Lines starting with `#` are comments and may appear anywhere. Coordinates
//! are written with 17 significant digits so a write/read round trip is
//! lossless.

use super::{BoundaryEdge, BoundaryLabel, GeometryKind, Mesh, MeshError, Triangle};
use crate::geometry::{Point, Region};
use std::fmt::Write as _;

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vertices {}", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e}", p.x, p.y);
    }
    let _ = writeln!(out, "triangles {}", mesh.triangles().len());
    for t in mesh.triangles() {
        let [a, b, c] = t.vertices;
        let _ = writeln!(out, "{a} {b} {c} {}", t.region);
    }
    let _ = writeln!(out, "boundary_edges {}", mesh.boundary_edges().len());
    for e in mesh.boundary_edges() {
        let [a, b] = e.vertices;
        let _ = writeln!(out, "{a} {b} {}", e.label);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-comment, non-blank line with its 1-based line number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (idx, line) in self.inner.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some((idx + 1, trimmed));
        }
        None
    }
}

fn parse_header(line: &str, lineno: usize, keyword: &str) -> Result<usize, MeshError> {
    let mut parts = line.split_whitespace();
    let head = parts.next().unwrap_or("");
    if head != keyword {
        return Err(MeshError::Parse {
            line: lineno,
            message: format!("expected `{keyword} <count>`, found `{head}`"),
        });
    }
    let count = parts.next().ok_or_else(|| MeshError::Parse {
        line: lineno,
        message: format!("`{keyword}` is missing its count"),
    })?;
    if parts.next().is_some() {
        return Err(MeshError::Parse {
            line: lineno,
            message: format!("trailing tokens after `{keyword} {count}`"),
        });
    }
    count.parse().map_err(|_| MeshError::Parse {
        line: lineno,
        message: format!("invalid count `{count}`"),
    })
}

fn tokens<'a>(
    line: &'a str,
    lineno: usize,
    expected: usize,
    what: &str,
) -> Result<Vec<&'a str>, MeshError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != expected {
        return Err(MeshError::Parse {
            line: lineno,
            message: format!(
                "expected {expected} tokens for a {what}, found {}",
                toks.len()
            ),
        });
    }
    Ok(toks)
}

fn parse_f64(tok: &str, lineno: usize) -> Result<f64, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse {
        line: lineno,
        message: format!("invalid number `{tok}`"),
    })
}

fn parse_usize(tok: &str, lineno: usize) -> Result<usize, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse {
        line: lineno,
        message: format!("invalid index `{tok}`"),
    })
}

/// Parses a mesh from the plain-text format. Region labels are checked here;
/// all deeper invariants are left to `validate`.
pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    fn need(lines: &mut Lines<'_>, keyword: &str) -> Result<usize, MeshError> {
        match lines.next_content() {
            Some((no, line)) => parse_header(line, no, keyword),
            None => Err(MeshError::Parse {
                line: 0,
                message: format!("unexpected end of input, expected `{keyword} <count>`"),
            }),
        }
    }

    let mut lines = Lines::new(text);
    let nv = need(&mut lines, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = lines.next_content().ok_or_else(|| MeshError::Parse {
            line: 0,
            message: "unexpected end of input in vertex list".into(),
        })?;
        let toks = tokens(line, no, 2, "vertex")?;
        vertices.push(Point::new(parse_f64(toks[0], no)?, parse_f64(toks[1], no)?));
    }

    let nt = need(&mut lines, "triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (no, line) = lines.next_content().ok_or_else(|| MeshError::Parse {
            line: 0,
            message: "unexpected end of input in triangle list".into(),
        })?;
        let toks = tokens(line, no, 4, "triangle")?;
        let vs = [
            parse_usize(toks[0], no)?,
            parse_usize(toks[1], no)?,
            parse_usize(toks[2], no)?,
        ];
        let region_raw: u8 = toks[3].parse().map_err(|_| MeshError::Parse {
            line: no,
            message: format!("invalid region `{}`", toks[3]),
        })?;
        let region = Region::from_u8(region_raw).ok_or(MeshError::Semantic {
            line: no,
            message: "region must be 1 or 2".into(),
        })?;
        triangles.push(Triangle {
            vertices: vs,
            region,
        });
    }

    let nb = need(&mut lines, "boundary_edges")?;
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (no, line) = lines.next_content().ok_or_else(|| MeshError::Parse {
            line: 0,
            message: "unexpected end of input in boundary edge list".into(),
        })?;
        let toks = tokens(line, no, 3, "boundary edge")?;
        let vs = [parse_usize(toks[0], no)?, parse_usize(toks[1], no)?];
        let label = match toks[2] {
            "dirichlet" => BoundaryLabel::Dirichlet,
            other => {
                return Err(MeshError::Semantic {
                    line: no,
                    message: format!("unknown boundary label `{other}`"),
                })
            }
        };
        boundary_edges.push(BoundaryEdge {
            vertices: vs,
            label,
        });
    }

    if let Some((no, line)) = lines.next_content() {
        return Err(MeshError::Parse {
            line: no,
            message: format!("trailing content `{line}`"),
        });
    }

    Ok(Mesh::new(
        vertices,
        triangles,
        boundary_edges,
        GeometryKind::Custom,
    ))
}
