//! Plain-text dataset directories.
//!
//! ```text
//! <dir>/meta          n_nodes=<int> / n_features=<int> / n_classes=<int> / name=<string>
//! <dir>/edges.tsv     src<TAB>dst
//! <dir>/features.tsv  node<TAB>feature<TAB>value
//! <dir>/labels.tsv    node<TAB>class
//! <dir>/splits/       optional split_<i>.txt files with train:/val:/test: lines
//! ```
//!
//! Lines starting with `#` and blank lines are ignored everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{GraphDataset, Split};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub add_self_loops: bool,
}

pub fn load_dataset(dir: impl AsRef<Path>) -> Result<GraphDataset> {
    load_dataset_with(dir, &LoadOptions::default())
}

pub fn load_dataset_with(dir: impl AsRef<Path>, options: &LoadOptions) -> Result<GraphDataset> {
    let dir = dir.as_ref();
    let meta = read_meta(&dir.join("meta"))?;
    let n = meta.n_nodes;

    let edges_path = dir.join("edges.tsv");
    let mut edges = Vec::new();
    for (line_no, fields) in records(&edges_path)? {
        let [src, dst] = parse_fields::<usize, 2>(&edges_path, line_no, &fields)?;
        for id in [src, dst] {
            if id >= n {
                return Err(Error::parse(
                    &edges_path,
                    line_no,
                    format!("node id {id} out of range for {n} nodes"),
                ));
            }
        }
        edges.push((src, dst));
    }

    let features_path = dir.join("features.tsv");
    let mut triplets = Vec::new();
    for (line_no, fields) in records(&features_path)? {
        if fields.len() != 3 {
            return Err(Error::parse(&features_path, line_no, "expected node<TAB>feature<TAB>value"));
        }
        let node: usize = parse_field(&features_path, line_no, &fields[0])?;
        let feature: usize = parse_field(&features_path, line_no, &fields[1])?;
        let value: f64 = parse_field(&features_path, line_no, &fields[2])?;
        if node >= n {
            return Err(Error::parse(&features_path, line_no, format!("node id {node} out of range")));
        }
        if feature >= meta.n_features {
            return Err(Error::parse(
                &features_path,
                line_no,
                format!("feature id {feature} out of range for {} features", meta.n_features),
            ));
        }
        if !value.is_finite() {
            return Err(Error::parse(&features_path, line_no, "non-finite feature value"));
        }
        triplets.push((node, feature, value));
    }
    let features = SparseMatrix::from_triplets(n, meta.n_features, triplets)?;

    let labels_path = dir.join("labels.tsv");
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (line_no, fields) in records(&labels_path)? {
        let [node, class] = parse_fields::<usize, 2>(&labels_path, line_no, &fields)?;
        if node >= n {
            return Err(Error::parse(&labels_path, line_no, format!("node id {node} out of range")));
        }
        if class >= meta.n_classes {
            return Err(Error::parse(
                &labels_path,
                line_no,
                format!("class {class} out of range for {} classes", meta.n_classes),
            ));
        }
        if labels[node].is_some_and(|c| c != class) {
            return Err(Error::parse(&labels_path, line_no, format!("conflicting label for node {node}")));
        }
        labels[node] = Some(class);
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::Dataset(format!("node {i} has no label"))))
        .collect::<Result<Vec<_>>>()?;

    let ds = GraphDataset::new(meta.name, n, edges, features, labels, meta.n_classes)?;
    Ok(if options.add_self_loops {
        ds.with_self_loops()
    } else {
        ds
    })
}

/// Writes `ds` in the directory layout read by [`load_dataset`].
pub fn save_dataset(ds: &GraphDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = format!(
        "name={}\nn_nodes={}\nn_features={}\nn_classes={}\n",
        ds.name(),
        ds.n(),
        ds.n_features(),
        ds.num_classes()
    );
    write_file(&dir.join("meta"), &meta)?;

    let mut edges = String::new();
    for (s, d) in ds.edges() {
        let _ = writeln!(edges, "{s}\t{d}");
    }
    write_file(&dir.join("edges.tsv"), &edges)?;

    let mut features = String::new();
    for (i, j, v) in ds.features().triplets() {
        let _ = writeln!(features, "{i}\t{j}\t{v}");
    }
    write_file(&dir.join("features.tsv"), &features)?;

    let mut labels = String::new();
    for (i, c) in ds.labels().iter().enumerate() {
        let _ = writeln!(labels, "{i}\t{c}");
    }
    write_file(&dir.join("labels.tsv"), &labels)
}

/// Reads `<dir>/splits/split_<i>.*` ordered by `i`. Returns an empty list if
/// the directory does not exist.
pub fn read_splits(dir: impl AsRef<Path>) -> Result<Vec<Split>> {
    let split_dir = dir.as_ref().join("splits");
    if !split_dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(&split_dir).map_err(|e| Error::io(&split_dir, e))? {
        let path = entry.map_err(|e| Error::io(&split_dir, e))?.path();
        let index = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.strip_prefix("split_"))
            .and_then(|s| s.parse::<usize>().ok());
        if let Some(i) = index {
            files.push((i, path));
        }
    }
    files.sort();
    files.iter().map(|(_, path)| read_split_file(path)).collect()
}

/// Writes `splits` as `<dir>/splits/split_<i>.txt`.
pub fn write_splits(dir: impl AsRef<Path>, splits: &[Split]) -> Result<()> {
    let split_dir = dir.as_ref().join("splits");
    fs::create_dir_all(&split_dir).map_err(|e| Error::io(&split_dir, e))?;
    for (i, split) in splits.iter().enumerate() {
        write_file(&split_dir.join(format!("split_{i}.txt")), &split.to_text())?;
    }
    Ok(())
}

fn read_split_file(path: &Path) -> Result<Split> {
    let mut parts: BTreeMap<&'static str, Vec<usize>> = BTreeMap::new();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, ids) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected '<part>: id id ...'"))?;
        let key = match key.trim() {
            "train" => "train",
            "val" => "val",
            "test" => "test",
            other => return Err(Error::parse(path, idx + 1, format!("unknown split part '{other}'"))),
        };
        let ids = ids
            .split_whitespace()
            .map(|t| parse_field(path, idx + 1, t))
            .collect::<Result<Vec<usize>>>()?;
        parts.insert(key, ids);
    }
    let mut take = |k: &str| {
        parts
            .remove(k)
            .ok_or_else(|| Error::parse(path, 0, format!("missing '{k}:' line")))
    };
    Ok(Split::new(take("train")?, take("val")?, take("test")?))
}

struct Meta {
    name: String,
    n_nodes: usize,
    n_features: usize,
    n_classes: usize,
}

fn read_meta(path: &Path) -> Result<Meta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected key=value"))?;
        kv.insert(k.trim().to_string(), (idx + 1, v.trim().to_string()));
    }
    let count = |key: &str| -> Result<usize> {
        let (line, v) = kv
            .get(key)
            .ok_or_else(|| Error::parse(path, 0, format!("missing '{key}'")))?;
        parse_field(path, *line, v)
    };
    let name = kv.get("name").map_or_else(
        || {
            path.parent()
                .and_then(|p| p.file_name())
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
        },
        |(_, v)| v.clone(),
    );
    Ok(Meta {
        name,
        n_nodes: count("n_nodes")?,
        n_features: count("n_features")?,
        n_classes: count("n_classes")?,
    })
}

/// Non-comment lines split on tabs, with 1-based line numbers.
fn records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| (i + 1, l.trim().split('\t').map(|f| f.trim().to_string()).collect()))
        .collect())
}

fn parse_field<T: FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("cannot parse '{field}'")))
}

fn parse_fields<T: FromStr + Copy + Default, const N: usize>(
    path: &Path,
    line: usize,
    fields: &[String],
) -> Result<[T; N]> {
    if fields.len() != N {
        return Err(Error::parse(
            path,
            line,
            format!("expected {N} tab-separated fields, found {}", fields.len()),
        ));
    }
    let mut out = [T::default(); N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = parse_field(path, line, f)?;
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
