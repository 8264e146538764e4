//! The FMESH text format.
//!
//! ```text
//! fmesh <ambientDim> <numVertices> <numSimplices>
//! <x_1> ... <x_n>            # one line per vertex
//! <i_0> ... <i_k>            # one line per top simplex, zero-based ids
//! ```
//!
//! `#` starts a comment anywhere on a line; blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simplex::{Point, Simplex, SimplicialComplex};

pub fn parse(text: &str) -> Result<SimplicialComplex> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing fmesh header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "fmesh" {
        return Err(Error::Parse {
            line: hline,
            msg: "expected `fmesh <ambientDim> <numVertices> <numSimplices>`".into(),
        });
    }
    let num = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse {
            line: hline,
            msg: format!("bad count `{s}`"),
        })
    };
    let (dim, nv, ns) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if dim == 0 {
        return Err(Error::Parse {
            line: hline,
            msg: "ambient dimension must be positive".into(),
        });
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "file ended inside the vertex block".into(),
        })?;
        let coords = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: ln,
                msg: e.to_string(),
            })?;
        if coords.len() != dim {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {dim} coordinates, found {}", coords.len()),
            });
        }
        vertices.push(Point::new(coords).map_err(|e| Error::Parse {
            line: ln,
            msg: e.to_string(),
        })?);
    }

    let mut simplices = Vec::with_capacity(ns);
    for _ in 0..ns {
        let (ln, l) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "file ended inside the simplex block".into(),
        })?;
        let ids = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: ln,
                msg: e.to_string(),
            })?;
        simplices.push(Simplex::new(ids).map_err(|e| Error::Parse {
            line: ln,
            msg: e.to_string(),
        })?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing content after the simplex block".into(),
        });
    }
    SimplicialComplex::new(dim, vertices, simplices).map_err(|e| match e {
        Error::Input(msg) => Error::Parse { line: 0, msg },
        other => other,
    })
}

/// Serializes with shortest round-trip float formatting, so `parse(write(c)) == c`.
pub fn write(c: &SimplicialComplex) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "fmesh {} {} {}",
        c.ambient_dim(),
        c.num_vertices(),
        c.num_simplices()
    );
    for p in c.vertices() {
        let line: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    for s in c.simplices() {
        let line: Vec<String> = s.vertices().iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn read_file(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write_file(path: impl AsRef<Path>, c: &SimplicialComplex) -> Result<()> {
    std::fs::write(path, write(c))?;
    Ok(())
}
