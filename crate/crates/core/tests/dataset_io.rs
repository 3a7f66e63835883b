use std::fs;
use std::path::{Path, PathBuf};

use hlp_core::error::Error;
use hlp_core::graph::synthetic::SyntheticGraph;
use hlp_core::graph::{
    build_adjacency, generate_splits, homophily_score, load_dataset, load_dataset_with, read_splits, save_dataset, stats,
    write_splits, GraphType, LoadOptions, SplitSizes,
};
use hlp_core::sparse::NormMode;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn copy_fixture(name: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture(name)).unwrap() {
        let path = entry.unwrap().path();
        fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    dir
}

#[test]
fn toy_fixture_loads_every_field() {
    let ds = load_dataset(fixture("toy3")).unwrap();
    assert_eq!(ds.name(), "toy3");
    assert_eq!(ds.n(), 3);
    assert_eq!(ds.edges(), &[(0, 1), (1, 2)]);
    assert_eq!(ds.labels(), &[0, 1, 0]);
    assert_eq!(ds.num_classes(), 2);
    let f = ds.features().to_dense();
    assert_eq!(f.values(), &[1.0, 0.0, 0.0, 0.5, 2.0, 1.0]);
    let s = stats(&ds);
    assert_eq!((s.n_nodes, s.n_features, s.n_classes, s.n_edges), (3, 2, 2, 2));
    assert_eq!(s.homophily, 0.0);
}

#[test]
fn save_then_load_round_trips() {
    let ds = load_dataset(fixture("toy3")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    assert_eq!(load_dataset(dir.path()).unwrap(), ds);

    let big = SyntheticGraph { n: 80, ..Default::default() }.generate().unwrap();
    save_dataset(&big, dir.path().join("big")).unwrap();
    assert_eq!(load_dataset(dir.path().join("big")).unwrap(), big);
}

fn expect_parse_error(dir: &Path, file: &str, line: usize) {
    match load_dataset(dir) {
        Err(Error::Parse { path, line: got, .. }) => {
            assert!(path.ends_with(file), "{path:?}");
            assert_eq!(got, line);
        }
        other => panic!("expected a parse error in {file}, got {other:?}"),
    }
}

#[test]
fn out_of_range_node_reports_line() {
    let dir = copy_fixture("toy3");
    fs::write(dir.path().join("meta"), "name=x\nn_nodes=183\nn_features=2\nn_classes=2\n").unwrap();
    let labels: String = (0..183).map(|i| format!("{i}\t{}\n", i % 2)).collect();
    fs::write(dir.path().join("labels.tsv"), labels).unwrap();
    fs::write(dir.path().join("edges.tsv"), "# header\n0\t1\n5\t183\n").unwrap();
    expect_parse_error(dir.path(), "edges.tsv", 3);
}

#[test]
fn malformed_lines_report_line() {
    let dir = copy_fixture("toy3");
    fs::write(dir.path().join("features.tsv"), "0\t0\t1\n1\tx\t1\n").unwrap();
    expect_parse_error(dir.path(), "features.tsv", 2);

    let dir = copy_fixture("toy3");
    fs::write(dir.path().join("labels.tsv"), "0\t0\n1\t1\n\n2\t0\t9\n").unwrap();
    expect_parse_error(dir.path(), "labels.tsv", 4);
}

#[test]
fn missing_file_and_label_gap() {
    let dir = copy_fixture("toy3");
    fs::remove_file(dir.path().join("edges.tsv")).unwrap();
    assert!(matches!(load_dataset(dir.path()), Err(Error::Io { .. })));

    let dir = copy_fixture("toy3");
    fs::write(dir.path().join("meta"), "n_nodes=3\nn_features=2\nn_classes=3\n").unwrap();
    assert!(matches!(load_dataset(dir.path()), Err(Error::Dataset(_))));
}

#[test]
fn duplicate_edges_dropped_self_loops_kept() {
    let dir = copy_fixture("toy3");
    fs::write(dir.path().join("edges.tsv"), "0\t1\n0\t1\n2\t2\n1\t0\n").unwrap();
    let ds = load_dataset(dir.path()).unwrap();
    assert_eq!(ds.edges(), &[(0, 1), (1, 0), (2, 2)]);
    assert_eq!(stats(&ds).n_self_loops, 1);
    assert_eq!(stats(&ds).n_undirected_edges, 1);
    let looped = load_dataset_with(dir.path(), &LoadOptions { add_self_loops: true }).unwrap();
    assert_eq!(stats(&looped).n_self_loops, 3);
}

#[test]
fn undirected_adjacency_nnz_matches_edge_recount() {
    let ds = SyntheticGraph { n: 150, ..Default::default() }.generate().unwrap().with_self_loops();
    let a = build_adjacency(&ds, GraphType::Undirected, NormMode::None);
    let undirected = ds.undirected_edges().len();
    let loops = ds.edges().iter().filter(|(s, d)| s == d).count();
    assert_eq!(a.nnz(), 2 * undirected + loops);
    assert_eq!(a, a.transpose());
}

#[test]
fn homophily_is_order_and_duplicate_invariant() {
    let ds = SyntheticGraph { n: 120, homophily: 0.4, ..Default::default() }.generate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path()).unwrap();
    let mut lines: Vec<String> = ds.edges().iter().map(|(s, d)| format!("{d}\t{s}")).collect();
    lines.reverse();
    lines.extend(ds.edges().iter().map(|(s, d)| format!("{s}\t{d}")));
    fs::write(dir.path().join("edges.tsv"), lines.join("\n")).unwrap();
    let shuffled = load_dataset(dir.path()).unwrap();
    assert_eq!(homophily_score(&shuffled).unwrap(), homophily_score(&ds).unwrap());
}

#[test]
fn split_files_round_trip_and_validate() {
    let ds = SyntheticGraph::default().generate().unwrap();
    let dir = tempfile::tempdir().unwrap();
    assert!(read_splits(dir.path()).unwrap().is_empty());
    let splits = generate_splits(&ds, SplitSizes::STANDARD, 12, 3).unwrap();
    write_splits(dir.path(), &splits).unwrap();
    let back = read_splits(dir.path()).unwrap();
    assert_eq!(back, splits);
    // Numeric order: split_10 follows split_9.
    assert_eq!(back[10], splits[10]);

    fs::write(dir.path().join("splits/split_0.txt"), "train: 0 1\nval: 1\n").unwrap();
    assert!(read_splits(dir.path()).is_err());
}

#[test]
fn texas_sized_split_counts() {
    let ds = SyntheticGraph { n: 183, num_classes: 5, n_features: 50, ..Default::default() }.generate().unwrap();
    let splits = generate_splits(&ds, SplitSizes::STANDARD, 10, 0).unwrap();
    for s in &splits {
        s.validate(&ds).unwrap();
        assert_eq!(s.sizes(), (87, 58, 38));
    }
}
