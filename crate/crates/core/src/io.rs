//! File formats.
//!
//! * Laplacian CSV: a header `# netmanifold laplacian v1, m=<m>`, a line of
//!   comma-separated node labels (empty when unlabelled), then `m` rows of
//!   `m` comma-separated numbers.
//! * Edge list TSV: `node_i<TAB>node_j<TAB>weight`; repeated pairs are summed
//!   and lines starting with `#` are ignored.
//! * Manifest TSV: header `path<TAB>label<TAB>group<TAB>year` with optional
//!   further numeric covariate columns. Relative paths are resolved against
//!   the manifest's directory. The same layout lists text documents for
//!   corpus ingestion and Laplacian files for analysis.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::corpus::{CorpusDocument, CorpusManifest};
use crate::error::{Error, Result};
use crate::laplacian::{AdjacencyMatrix, GraphLaplacian};
use crate::sample::NetworkSample;

const HEADER_PREFIX: &str = "# netmanifold laplacian v1, m=";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the same value.
pub fn format_number(v: f64) -> String {
    // Negative zero from `-(0.0)` off-diagonals reads back equal; print it plainly.
    if v == 0.0 {
        return "0.0".into();
    }
    format!("{v:?}")
}

fn check_label(label: &str) -> Result<()> {
    if label.contains([',', '\t', '\n', '\r']) {
        return Err(Error::InvalidParameter(format!(
            "label {label:?} contains a separator character"
        )));
    }
    Ok(())
}

pub fn format_laplacian(l: &GraphLaplacian) -> Result<String> {
    let m = l.dim();
    let mut out = format!("{HEADER_PREFIX}{m}\n");
    if let Some(labels) = l.labels() {
        for label in labels {
            check_label(label)?;
        }
        out.push_str(&labels.join(","));
    }
    out.push('\n');
    for i in 0..m {
        let row: Vec<String> = (0..m).map(|j| format_number(l.matrix()[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Parses the Laplacian CSV format; `path` is used in error messages.
pub fn parse_laplacian(text: &str, path: &Path) -> Result<GraphLaplacian> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let m: usize = header
        .strip_prefix(HEADER_PREFIX)
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, 1, format!("expected header `{HEADER_PREFIX}<m>`")))?;
    let label_line = lines
        .next()
        .ok_or_else(|| Error::parse(path, 2, "missing node-label line"))?;
    let labels: Option<Vec<String>> = if label_line.trim().is_empty() {
        None
    } else {
        let labels: Vec<String> = label_line.split(',').map(|s| s.trim().to_string()).collect();
        if labels.len() != m {
            return Err(Error::parse(
                path,
                2,
                format!("expected {m} labels, found {}", labels.len()),
            ));
        }
        Some(labels)
    };
    let mut matrix = DMatrix::zeros(m, m);
    for i in 0..m {
        let line_no = i + 3;
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(path, line_no, format!("expected {m} matrix rows, found {i}")))?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {m} values, found {}", fields.len()),
            ));
        }
        for (j, field) in fields.iter().enumerate() {
            matrix[(i, j)] = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(path, line_no, format!("column {}: {field:?} is not a number", j + 1)))?;
        }
    }
    if let Some((k, _)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(path, m + 3 + k, "unexpected content after the matrix"));
    }
    let l = GraphLaplacian::new(matrix).map_err(|e| match e {
        Error::ConstraintViolation { i, .. } => Error::parse(path, i + 3, e.to_string()),
        other => other,
    })?;
    match labels {
        Some(labels) => l.with_labels(labels),
        None => Ok(l),
    }
}

pub fn read_laplacian(path: &Path) -> Result<GraphLaplacian> {
    parse_laplacian(&read(path)?, path)
}

pub fn write_laplacian(path: &Path, l: &GraphLaplacian) -> Result<()> {
    write(path, &format_laplacian(l)?)
}

/// Reads an edge list. Nodes are numbered by `labels` when given, otherwise
/// in order of first appearance.
pub fn read_edge_list(path: &Path, labels: Option<&[String]>) -> Result<(AdjacencyMatrix, Vec<String>)> {
    let text = read(path)?;
    let mut names: Vec<String> = labels.map(<[String]>::to_vec).unwrap_or_default();
    let mut index: HashMap<String, usize> = names.iter().enumerate().map(|(k, n)| (n.clone(), k)).collect();
    let fixed = labels.is_some();
    let mut edges = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let mut node = |name: &str| -> Result<usize> {
            let name = name.trim();
            if let Some(&k) = index.get(name) {
                return Ok(k);
            }
            if fixed {
                return Err(Error::parse(path, line_no, format!("unknown node {name:?}")));
            }
            names.push(name.to_string());
            index.insert(name.to_string(), names.len() - 1);
            Ok(names.len() - 1)
        };
        let i = node(fields[0])?;
        let j = node(fields[1])?;
        let w: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("{:?} is not a number", fields[2])))?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::parse(path, line_no, "weights must be finite and non-negative"));
        }
        if i == j {
            return Err(Error::parse(path, line_no, "self-loops are not allowed"));
        }
        edges.push((i, j, w));
    }
    let a = AdjacencyMatrix::from_edges(names.len(), edges)?;
    Ok((a, names))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
    pub group: String,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    /// `year` followed by any extra columns.
    pub covariate_names: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<Manifest> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty manifest"))?;
    let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
    if columns.len() < 4 || columns[..4] != ["path", "label", "group", "year"] {
        return Err(Error::parse(
            path,
            1,
            "expected header path<TAB>label<TAB>group<TAB>year",
        ));
    }
    let covariate_names: Vec<String> = columns[3..].iter().map(|s| s.to_string()).collect();
    let mut entries = Vec::new();
    for (k, line) in lines {
        let line_no = k + 1;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let covariates = fields[3..]
            .iter()
            .zip(&covariate_names)
            .map(|(f, name)| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, line_no, format!("{name}: {f:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = PathBuf::from(fields[0]);
        entries.push(ManifestEntry {
            path: if p.is_absolute() { p } else { base.join(p) },
            label: fields[1].to_string(),
            group: fields[2].to_string(),
            covariates,
        });
    }
    if entries.is_empty() {
        return Err(Error::parse(path, 1, "manifest lists no entries"));
    }
    Ok(Manifest {
        covariate_names,
        entries,
    })
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    parse_manifest(&read(path)?, path)
}

/// Writes a manifest. Paths are written as given.
pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut out = format!(
        "path\tlabel\tgroup\t{}\n",
        manifest.covariate_names[1..].iter().fold(
            manifest
                .covariate_names
                .first()
                .cloned()
                .unwrap_or_else(|| "year".into()),
            |acc, n| format!("{acc}\t{n}"),
        )
    );
    for e in &manifest.entries {
        for field in [&e.label, &e.group] {
            if field.contains(['\t', '\n']) {
                return Err(Error::InvalidParameter(format!(
                    "field {field:?} contains a tab or newline"
                )));
            }
        }
        let _ = write!(out, "{}\t{}\t{}", e.path.display(), e.label, e.group);
        for v in &e.covariates {
            let _ = write!(out, "\t{}", format_number(*v));
        }
        out.push('\n');
    }
    write(path, &out)
}

/// A corpus manifest from a manifest file.
pub fn read_corpus_manifest(path: &Path, m: usize, span: usize) -> Result<CorpusManifest> {
    let manifest = read_manifest(path)?;
    Ok(CorpusManifest {
        documents: manifest
            .entries
            .into_iter()
            .map(|e| CorpusDocument {
                path: e.path,
                label: e.label,
                group: e.group,
                covariates: e.covariates,
            })
            .collect(),
        covariate_names: manifest.covariate_names,
        m,
        span,
    })
}

/// Loads the Laplacians listed in a manifest into a sample carrying labels,
/// groups and covariates.
pub fn load_sample(path: &Path) -> Result<NetworkSample> {
    let manifest = read_manifest(path)?;
    let observations = manifest
        .entries
        .iter()
        .map(|e| read_laplacian(&e.path))
        .collect::<Result<Vec<_>>>()?;
    NetworkSample::new(observations)?
        .with_ids(manifest.entries.iter().map(|e| e.label.clone()).collect())?
        .with_groups(manifest.entries.iter().map(|e| e.group.clone()).collect())?
        .with_covariates(
            manifest.covariate_names.clone(),
            manifest.entries.iter().map(|e| e.covariates.clone()).collect(),
        )
}

pub fn write_vocabulary(path: &Path, words: &[String]) -> Result<()> {
    let mut out = String::new();
    for w in words {
        out.push_str(w);
        out.push('\n');
    }
    write(path, &out)
}

pub fn read_vocabulary(path: &Path) -> Result<Vec<String>> {
    Ok(read(path)?
        .lines()
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Square matrix as CSV with a `label` header row and column.
pub fn format_labelled_matrix(labels: &[String], matrix: &DMatrix<f64>) -> String {
    let mut out = String::from("label");
    for l in labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..matrix.ncols() {
            let _ = write!(out, ",{}", format_number(matrix[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    write(path, contents)
}
