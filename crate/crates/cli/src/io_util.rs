//! File helpers: path-tagged I/O errors, format inference, CSV output.

use std::io::Write;
use std::path::Path;

use modview_core::graph::{self, DesignGraph, GraphFormat};
use modview_core::{Error, Result};

use crate::FormatChoice;

fn tag<T>(path: &Path, result: std::io::Result<T>) -> Result<T> {
    result.map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    tag(path, std::fs::read(path))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    tag(path, std::fs::read_to_string(path))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    tag(path, std::fs::write(path, bytes))
}

/// Write to the given path, or to stdout when no path is set.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => write_bytes(path, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// Explicit `--format` wins; otherwise a `.json` extension means JSON and
/// anything else is treated as an edge list.
pub fn graph_format(path: &Path, choice: Option<FormatChoice>) -> GraphFormat {
    match choice {
        Some(FormatChoice::Json) => GraphFormat::Json,
        Some(FormatChoice::EdgeList) => GraphFormat::EdgeList,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => GraphFormat::Json,
            _ => GraphFormat::EdgeList,
        },
    }
}

pub fn load_graph(path: &Path, choice: Option<FormatChoice>) -> Result<DesignGraph> {
    let bytes = read_bytes(path)?;
    graph::parse_graph(&bytes, graph_format(path, choice))
}

/// A file's stem, used as the system/algorithm label in CSV output.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Real-valued CSV cells carry four decimal places.
pub fn csv_value(v: f64) -> String {
    format!("{v:.4}")
}

/// `<out stem>.<suffix>` next to the original path.
pub fn derived_path(out: &Path, suffix: &str) -> std::path::PathBuf {
    out.with_extension(suffix)
}
