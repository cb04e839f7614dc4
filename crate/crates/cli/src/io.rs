use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use fj_core::graph::{load_edge_list, IngestOptions};
use fj_core::opinions::read_opinions;
use fj_core::{Graph, OpinionVector};

use crate::error::{CliError, CliResult, Context};

pub fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_string(path: &Path, body: &str) -> CliResult<()> {
    let mut f = create(path)?;
    f.write_all(body.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn load_graph(path: &Path, largest_component: bool) -> CliResult<Graph> {
    load_edge_list(open(path)?, IngestOptions { largest_component })
        .context(|| path.display().to_string())
}

pub fn load_opinions(path: &Path, n: usize) -> CliResult<OpinionVector> {
    read_opinions(open(path)?, n).context(|| path.display().to_string())
}

/// Reads one original vertex ID per line.
pub fn load_targets(path: &Path, g: &Graph) -> CliResult<Vec<fj_core::VertexId>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = |message: String| CliError::data(path.display().to_string(), fj_core::Error::Parse { line: i + 1, message });
        let id: u64 = t.parse().map_err(|_| bad(format!("invalid vertex id {t:?}")))?;
        out.push(g.dense_id(id).ok_or_else(|| bad(format!("vertex {id} is not in the graph")))?);
    }
    Ok(out)
}
