use std::fmt::Write as _;

use super::Graph;
use crate::error::{Error, ParseError};

/// `nodes N` header followed by one `u v` line per edge.
pub fn write_edge_list(g: &Graph) -> String {
    let mut s = format!("nodes {}\n", g.node_count());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

pub fn read_edge_list(text: &str) -> Result<Graph, Error> {
    let bad = |line: usize, msg: &str| ParseError::GraphFormat { line, msg: msg.to_string() };
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| bad(1, "missing `nodes N` header"))?;
    let n: usize = header
        .strip_prefix("nodes")
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| bad(hline, "expected `nodes N`"))?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let mut it = l.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => return Err(bad(line, "expected `u v`").into()),
        }
    }
    Ok(Graph::from_edges(n, edges)?)
}
