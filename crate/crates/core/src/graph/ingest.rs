//! Edge-list and ID-map text formats.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};

use flate2::read::MultiGzDecoder;

use super::{largest_connected_component, Graph, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    /// Keep only the largest connected component.
    pub largest_component: bool,
}

/// Parses a whitespace-separated edge list, transparently gunzipping input
/// that starts with the gzip magic bytes.
///
/// Lines are `u v` or `u v w`; lines starting with `%` or `#` and blank lines
/// are skipped. Dense indices follow ascending original ID.
pub fn load_edge_list<R: Read>(reader: R, options: IngestOptions) -> Result<Graph> {
    let mut buf = BufReader::new(reader);
    let head = buf.fill_buf()?;
    let gz = head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b;
    let g = if gz {
        parse(BufReader::new(MultiGzDecoder::new(buf)))?
    } else {
        parse(buf)?
    };
    if options.largest_component {
        Ok(largest_connected_component(&g))
    } else {
        Ok(g)
    }
}

fn parse<R: BufRead>(reader: R) -> Result<Graph> {
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 2 && toks.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 2 or 3 fields, found {}", toks.len()),
            });
        }
        let id = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid vertex id {s:?}"),
            })
        };
        let u = id(toks[0])?;
        let v = id(toks[1])?;
        let w = match toks.get(2) {
            None => 1.0,
            Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid weight {s:?}"),
            })?,
        };
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Validation(format!(
                "line {lineno}: weight must be positive and finite, got {w}"
            )));
        }
        ids.insert(u);
        ids.insert(v);
        raw.push((u, v, w));
    }
    if raw.iter().all(|&(u, v, _)| u == v) {
        return Err(Error::validation("edge list contains no edges"));
    }
    let original: Vec<u64> = ids.into_iter().collect();
    let dense = |x: u64| original.binary_search(&x).expect("id was inserted");
    let edges: Vec<(usize, usize, f64)> = raw.iter().map(|&(u, v, w)| (dense(u), dense(v), w)).collect();
    Graph::from_edges_with_ids(original, edges)
}

/// Writes the graph as an edge list in original IDs, preceded by a
/// `% n m` comment. Weights are written with round-trip precision.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "% {} {}", g.n(), g.m())?;
    for (u, v, w) in g.edges() {
        writeln!(out, "{} {} {:?}", g.original_id(u), g.original_id(v), w)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `dense original` lines.
pub fn write_id_map<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for u in 0..g.n() {
        writeln!(out, "{} {}", u, g.original_id(VertexId::new(u)))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a `dense original` sidecar into a vector indexed by dense ID.
/// Dense IDs must cover `0..n` exactly once.
pub fn read_id_map<R: Read>(reader: R) -> Result<Vec<u64>> {
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut it = t.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected \"dense original\"".into(),
                })
            }
        };
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid id {s:?}"),
            })
        };
        pairs.push((parse(a)?, parse(b)?));
    }
    let n = pairs.len();
    let mut map = vec![None; n];
    for (d, o) in pairs {
        let slot = usize::try_from(d)
            .ok()
            .and_then(|d| map.get_mut(d))
            .ok_or_else(|| Error::validation(format!("dense id {d} out of range for {n} entries")))?;
        if slot.is_some() {
            return Err(Error::validation(format!("dense id {d} listed twice")));
        }
        *slot = Some(o);
    }
    Ok(map.into_iter().map(|x| x.expect("all slots filled")).collect())
}
