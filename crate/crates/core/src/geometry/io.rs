//! Plain-text node files: one node per line, "x y z nx ny nz".

use std::io::Write;
use std::path::Path;

use log::warn;

use super::nodes::{NodeSet, Surface};
use super::vec3::{norm, scale};
use crate::error::{Error, Result};

pub fn parse_nodeset(text: &str, path: &Path) -> Result<NodeSet> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| parse_err(format!("'{f}': {e}")))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 6 {
            return Err(parse_err(format!(
                "expected 6 fields, found {}",
                fields.len()
            )));
        }
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("non-finite value".into()));
        }
        let n = [fields[3], fields[4], fields[5]];
        let len = norm(n);
        if len == 0.0 {
            return Err(parse_err("zero normal".into()));
        }
        if (len - 1.0).abs() > 0.1 {
            warn!(
                "{}:{}: normal has length {len}, renormalizing",
                path.display(),
                lineno + 1
            );
        }
        points.push([fields[0], fields[1], fields[2]]);
        normals.push(scale(n, 1.0 / len));
    }
    if points.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no nodes in file".into(),
        });
    }
    NodeSet::new(points, normals, Surface::External)
}

pub fn load_nodeset(path: &Path) -> Result<NodeSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_nodeset(&text, path)
}

pub fn write_nodeset(nodes: &NodeSet, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "# surface: {}, N = {}", nodes.surface, nodes.len()).map_err(io)?;
    for (p, n) in nodes.points.iter().zip(&nodes.normals) {
        writeln!(
            w,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            p[0], p[1], p[2], n[0], n[1], n[2]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
