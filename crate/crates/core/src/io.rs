//! Text formats for digraphs, hypergraphs and filtration manifests.
//!
//! All formats are line based; `#` starts a comment, blank lines are
//! skipped. A `# vertices: N` header declares vertices `0..N` so that
//! isolated vertices can be listed.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Digraph, Hypergraph, VertexId};

/// Header directives and data lines of a file, with 1-based line numbers.
struct Lines<'a> {
    vertices: Option<u32>,
    thresholds: Option<Vec<f64>>,
    data: Vec<(usize, Vec<&'a str>)>,
}

fn split_lines(text: &str) -> Result<Lines<'_>> {
    let mut out = Lines {
        vertices: None,
        thresholds: None,
        data: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once(':') else {
                continue;
            };
            match key.trim() {
                "vertices" => {
                    let n = value.trim().parse::<u32>().map_err(|_| {
                        Error::parse(ln, format!("bad vertex count '{}'", value.trim()))
                    })?;
                    out.vertices = Some(n);
                }
                "thresholds" => out.thresholds = Some(parse_floats(value, ln)?),
                _ => {}
            }
            continue;
        }
        let content = line.split('#').next().unwrap_or("").trim();
        if !content.is_empty() {
            out.data.push((ln, content.split_whitespace().collect()));
        }
    }
    Ok(out)
}

fn parse_floats(s: &str, ln: usize) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(ln, format!("bad number '{t}'")))
        })
        .collect()
}

/// Comma- or space-separated list of thresholds, as given on a command line.
pub fn parse_thresholds(s: &str) -> Result<Vec<f64>> {
    parse_floats(s, 1).map_err(|e| match e {
        Error::Parse { message, .. } => Error::InvalidInput(message),
        other => other,
    })
}

fn parse_vertex(tok: &str, ln: usize) -> Result<VertexId> {
    tok.parse::<u32>()
        .map(VertexId)
        .map_err(|_| Error::parse(ln, format!("bad vertex id '{tok}'")))
}

fn declared(n: Option<u32>) -> BTreeSet<VertexId> {
    (0..n.unwrap_or(0)).map(VertexId).collect()
}

/// Edge list `u v`, one edge per line.
pub fn parse_digraph(text: &str) -> Result<Digraph> {
    let lines = split_lines(text)?;
    let mut vertices = declared(lines.vertices);
    let mut edges = BTreeSet::new();
    for (ln, toks) in &lines.data {
        let [u, v] = toks.as_slice() else {
            return Err(Error::parse(*ln, "edge lines read 'u v'"));
        };
        let (u, v) = (parse_vertex(u, *ln)?, parse_vertex(v, *ln)?);
        if u == v {
            return Err(Error::parse(*ln, format!("self-loop at vertex {u}")));
        }
        vertices.extend([u, v]);
        edges.insert((u, v));
    }
    Digraph::new(vertices, edges)
}

/// One hyperedge per line, listed as vertex ids.
pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let lines = split_lines(text)?;
    let mut vertices = declared(lines.vertices);
    let mut edges = Vec::new();
    for (ln, toks) in &lines.data {
        let e: BTreeSet<VertexId> = toks
            .iter()
            .map(|t| parse_vertex(t, *ln))
            .collect::<Result<_>>()?;
        vertices.extend(e.iter().copied());
        edges.push(e);
    }
    Hypergraph::new(vertices, edges)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Manifest {
    /// Stage files in order, resolved against the manifest's directory.
    Stages(Vec<PathBuf>),
    /// Weighted edges `u v w`; stage `i` keeps edges with `w ≤ tᵢ`.
    Weighted {
        vertices: BTreeSet<VertexId>,
        edges: Vec<(VertexId, VertexId, f64)>,
        thresholds: Option<Vec<f64>>,
    },
}

/// A manifest with a `# thresholds:` header or three-column lines is
/// weighted; otherwise every line names a stage file.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Manifest> {
    let lines = split_lines(text)?;
    let weighted = lines.thresholds.is_some() || lines.data.iter().any(|(_, t)| t.len() == 3);
    if !weighted {
        if lines.vertices.is_some() {
            return Err(Error::parse(
                1,
                "'# vertices:' only applies to weighted manifests",
            ));
        }
        let stages = lines
            .data
            .iter()
            .map(|(ln, toks)| match toks.as_slice() {
                [p] => Ok(base.join(p)),
                _ => Err(Error::parse(*ln, "expected one stage file per line")),
            })
            .collect::<Result<Vec<_>>>()?;
        if stages.is_empty() {
            return Err(Error::parse(1, "manifest lists no stages"));
        }
        return Ok(Manifest::Stages(stages));
    }
    let mut vertices = declared(lines.vertices);
    let mut edges = Vec::new();
    for (ln, toks) in &lines.data {
        let [u, v, w] = toks.as_slice() else {
            return Err(Error::parse(*ln, "weighted lines read 'u v w'"));
        };
        let (u, v) = (parse_vertex(u, *ln)?, parse_vertex(v, *ln)?);
        if u == v {
            return Err(Error::parse(*ln, format!("self-loop at vertex {u}")));
        }
        let w = parse_floats(w, *ln)?[0];
        vertices.extend([u, v]);
        edges.push((u, v, w));
    }
    Ok(Manifest::Weighted {
        vertices,
        edges,
        thresholds: lines.thresholds,
    })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
