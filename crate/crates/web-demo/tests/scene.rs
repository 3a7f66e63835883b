use hlp_web_demo::Scene;

#[test]
fn spectrum_is_sorted_and_bounded_by_one() {
    let s = Scene::new(48, 3, 0.1, 2).unwrap();
    let sigma = s.spectrum();
    assert_eq!(sigma.len(), 48);
    assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    // Sym-normalized adjacency has spectral norm at most one.
    assert!(sigma[0] <= 1.0 + 1e-9);
}

#[test]
fn low_rank_graph_has_negative_edges() {
    let s = Scene::new(40, 2, 0.2, 5).unwrap();
    let f = s.negative_fraction(3).unwrap();
    assert!(f > 0.0 && f < 1.0, "{f}");
    assert_eq!(s.reconstruction(4).unwrap().len(), 40 * 40);
    assert!(s.reconstruction(41).is_err());
}

#[test]
fn reconstruction_is_symmetric() {
    let s = Scene::new(30, 3, 0.3, 1).unwrap();
    let r = s.reconstruction(6).unwrap();
    for i in 0..30 {
        for j in 0..30 {
            assert!((r[i * 30 + j] - r[j * 30 + i]).abs() < 1e-12);
        }
    }
}

#[test]
fn accuracies_are_probabilities_and_deterministic() {
    let s = Scene::new(60, 3, 0.1, 3).unwrap();
    let a = s.concat_accuracy(8, 4, 30).unwrap();
    assert!((0.0..=1.0).contains(&a));
    assert_eq!(a, s.concat_accuracy(8, 4, 30).unwrap());
    assert!((0.0..=1.0).contains(&s.baseline_accuracy(30).unwrap()));
}

#[test]
fn rejects_bad_parameters() {
    assert!(Scene::new(30, 3, 1.5, 0).is_err());
    assert!(Scene::new(2, 3, 0.1, 0).is_err());
}
