//! Plain-text graph interchange format.
//!
//! ```text
//! vertices 3
//! # boundary 0 1 2
//! 0 1 1
//! 0 2 1
//! 1 2 1
//! ```
//!
//! The header line comes first. Lines starting with `#` are comments; a
//! `# boundary` comment carries the designated boundary set. Edges are written
//! as `u v weight` with `u < v` in lexicographic order, so the output is a
//! deterministic function of the graph.

use std::fmt::Write as _;

use super::WeightedGraph;
use crate::error::{Error, Result};

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 32);
    let _ = writeln!(out, "vertices {}", g.vertex_count());
    if !g.boundary().is_empty() {
        out.push_str("# boundary");
        for b in g.boundary() {
            let _ = write!(out, " {b}");
        }
        out.push('\n');
    }
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "{u} {v} {w}");
    }
    out
}

pub fn read_graph(text: &str) -> Result<WeightedGraph> {
    let mut vertex_count = None;
    let mut boundary = Vec::new();
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        let err = |message: String| Error::Parse { line: lineno, message };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(list) = comment.trim().strip_prefix("boundary") {
                for tok in list.split_whitespace() {
                    boundary.push(tok.parse().map_err(|_| err(format!("bad boundary vertex {tok:?}")))?);
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices") {
            if vertex_count.is_some() {
                return Err(err("duplicate header".into()));
            }
            let n: usize = rest.trim().parse().map_err(|_| err(format!("bad vertex count {rest:?}")))?;
            vertex_count = Some(n);
            continue;
        }
        if vertex_count.is_none() {
            return Err(err("edge before the `vertices N` header".into()));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected `u v weight`, got {line:?}")));
        }
        let u: usize = fields[0].parse().map_err(|_| err(format!("bad vertex {:?}", fields[0])))?;
        let v: usize = fields[1].parse().map_err(|_| err(format!("bad vertex {:?}", fields[1])))?;
        let w: f64 = fields[2].parse().map_err(|_| err(format!("bad weight {:?}", fields[2])))?;
        edges.push((u, v, w));
    }

    let n = vertex_count.ok_or(Error::Parse { line: 0, message: "missing `vertices N` header".into() })?;
    WeightedGraph::from_edges(n, &edges)?.with_boundary(boundary)
}
