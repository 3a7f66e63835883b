//! Node-classification datasets: graph, sparse features, labels.

mod io;
mod split;
pub mod synthetic;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use io::{load_dataset, load_dataset_with, read_splits, save_dataset, write_splits, LoadOptions};
pub use split::{generate_splits, Split, SplitSizes, MAX_SPLIT_REDRAWS};

use crate::error::{Error, Result};
use crate::sparse::{NormMode, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphType {
    Directed,
    Undirected,
}

impl GraphType {
    pub const ALL: [GraphType; 2] = [GraphType::Directed, GraphType::Undirected];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphType::Directed => "directed",
            GraphType::Undirected => "undirected",
        }
    }
}

impl fmt::Display for GraphType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "directed" => Ok(GraphType::Directed),
            "undirected" => Ok(GraphType::Undirected),
            other => Err(Error::InvalidParameter(format!("unknown graph type '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    name: String,
    n: usize,
    edges: Vec<(usize, usize)>,
    features: SparseMatrix,
    labels: Vec<usize>,
    num_classes: usize,
}

impl GraphDataset {
    /// Validates and canonicalizes: edges are sorted and deduplicated, every
    /// endpoint and label is in range and every class occurs at least once.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        mut edges: Vec<(usize, usize)>,
        features: SparseMatrix,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if let Some(&(s, d)) = edges.iter().find(|&&(s, d)| s >= n || d >= n) {
            return Err(Error::Dataset(format!("edge ({s}, {d}) outside a {n}-node graph")));
        }
        if features.n_rows() != n {
            return Err(Error::Dataset(format!(
                "feature matrix has {} rows for {n} nodes",
                features.n_rows()
            )));
        }
        if labels.len() != n {
            return Err(Error::Dataset(format!("{} labels for {n} nodes", labels.len())));
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= num_classes) {
            return Err(Error::Dataset(format!("label {c} outside [0, {num_classes})")));
        }
        let present: BTreeSet<usize> = labels.iter().copied().collect();
        if let Some(missing) = (0..num_classes).find(|c| !present.contains(c)) {
            return Err(Error::Dataset(format!("class {missing} has no nodes")));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(GraphDataset {
            name: name.into(),
            n,
            edges,
            features,
            labels,
            num_classes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &SparseMatrix {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Copy with a self-loop on every node.
    pub fn with_self_loops(&self) -> GraphDataset {
        let mut edges = self.edges.clone();
        edges.extend((0..self.n).map(|i| (i, i)));
        edges.sort_unstable();
        edges.dedup();
        GraphDataset {
            edges,
            ..self.clone()
        }
    }

    /// Undirected edge set `{min, max}` without self-loops.
    pub fn undirected_edges(&self) -> BTreeSet<(usize, usize)> {
        self.edges
            .iter()
            .filter(|(s, d)| s != d)
            .map(|&(s, d)| (s.min(d), s.max(d)))
            .collect()
    }

    pub fn adjacency(&self, graph_type: GraphType) -> SparseMatrix {
        let directed = SparseMatrix::from_triplets(
            self.n,
            self.n,
            self.edges.iter().map(|&(s, d)| (s, d, 1.0)),
        )
        .expect("edges validated at construction");
        match graph_type {
            GraphType::Directed => directed,
            GraphType::Undirected => directed.symmetrize().expect("adjacency is square"),
        }
    }
}

/// Binary adjacency (symmetrized for undirected graphs), then degree
/// normalization.
pub fn build_adjacency(ds: &GraphDataset, graph_type: GraphType, norm: NormMode) -> SparseMatrix {
    ds.adjacency(graph_type)
        .normalize(norm)
        .expect("binary adjacency is square and non-negative")
}

/// Fraction of undirected, self-loop-free edges whose endpoints share a label.
pub fn homophily_score(ds: &GraphDataset) -> Result<f64> {
    let edges = ds.undirected_edges();
    if edges.is_empty() {
        return Err(Error::Dataset("homophily is undefined without edges".into()));
    }
    let same = edges
        .iter()
        .filter(|&&(s, d)| ds.labels[s] == ds.labels[d])
        .count();
    Ok(same as f64 / edges.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub name: String,
    pub homophily: f64,
    pub n_nodes: usize,
    /// Distinct directed edges as stored.
    pub n_edges: usize,
    /// Distinct undirected edges, self-loops excluded.
    pub n_undirected_edges: usize,
    pub n_self_loops: usize,
    pub n_features: usize,
    pub n_classes: usize,
}

pub fn stats(ds: &GraphDataset) -> DatasetStats {
    DatasetStats {
        name: ds.name.clone(),
        homophily: homophily_score(ds).unwrap_or(f64::NAN),
        n_nodes: ds.n,
        n_edges: ds.edges.len(),
        n_undirected_edges: ds.undirected_edges().len(),
        n_self_loops: ds.edges.iter().filter(|(s, d)| s == d).count(),
        n_features: ds.n_features(),
        n_classes: ds.num_classes,
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Dataset          {}", self.name)?;
        writeln!(f, "Homophily level  {:.2}", self.homophily)?;
        writeln!(f, "#Nodes           {}", self.n_nodes)?;
        writeln!(
            f,
            "#Edges           {} directed / {} undirected ({} self-loops)",
            self.n_edges, self.n_undirected_edges, self.n_self_loops
        )?;
        writeln!(f, "#Features        {}", self.n_features)?;
        write!(f, "#Classes         {}", self.n_classes)
    }
}
