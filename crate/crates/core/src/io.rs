//! JSON Lines interchange: one hypergraph per line, `{"n": 3, "edges": [[0,1],[1,2]]}`.
//!
//! Writers always emit canonical form: each hyperedge ascending, hyperedges in
//! lexicographic order.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    n: usize,
    edges: Vec<Vec<usize>>,
}

pub fn to_json_line(h: &Hypergraph) -> String {
    let c = h.canonical();
    let rec = Record {
        n: c.num_nodes(),
        edges: c.edges().to_vec(),
    };
    serde_json::to_string(&rec).expect("record serialization is infallible")
}

pub fn from_json_line(line: &str) -> Result<Hypergraph> {
    let rec: Record = serde_json::from_str(line)?;
    Hypergraph::new(rec.n, rec.edges)
}

pub fn parse_jsonl(text: &str) -> Result<Vec<Hypergraph>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| from_json_line(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<Hypergraph>> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(from_json_line(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

pub fn write_jsonl<'a>(
    path: impl AsRef<Path>,
    graphs: impl IntoIterator<Item = &'a Hypergraph>,
) -> Result<()> {
    let mut buf = Vec::new();
    for h in graphs {
        writeln!(buf, "{}", to_json_line(h))?;
    }
    fs::write(path, buf)?;
    Ok(())
}
