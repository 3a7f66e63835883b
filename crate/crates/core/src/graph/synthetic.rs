//! Seeded planted-partition graphs with tunable heterophily, used by tests
//! and the browser demo.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GraphDataset;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    pub n: usize,
    pub num_classes: usize,
    /// Out-edges sampled per node.
    pub out_degree: usize,
    /// Probability that an edge stays inside its source's class. Otherwise it
    /// points into class `(c + 1) mod C`.
    pub homophily: f64,
    pub n_features: usize,
    /// Probability of each feature in the node's own class block being on.
    pub feature_signal: f64,
    /// Probability of any feature being on regardless of class.
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticGraph {
    fn default() -> Self {
        SyntheticGraph {
            n: 200,
            num_classes: 4,
            out_degree: 5,
            homophily: 0.1,
            n_features: 40,
            feature_signal: 0.15,
            feature_noise: 0.1,
            seed: 0,
        }
    }
}

impl SyntheticGraph {
    pub fn generate(&self) -> Result<GraphDataset> {
        let c = self.num_classes;
        if c == 0 || self.n < c || self.n_features < c {
            return Err(Error::InvalidParameter(
                "need at least one node and one feature per class".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut labels: Vec<usize> = (0..self.n).map(|i| i % c).collect();
        labels.shuffle(&mut rng);

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); c];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }

        let mut edges = Vec::with_capacity(self.n * self.out_degree);
        for (src, &l) in labels.iter().enumerate() {
            for _ in 0..self.out_degree {
                let target_class = if rng.random::<f64>() < self.homophily { l } else { (l + 1) % c };
                let pool = &members[target_class];
                let dst = pool[rng.random_range(0..pool.len())];
                if dst != src {
                    edges.push((src, dst));
                }
            }
        }

        let block = self.n_features / c;
        let mut triplets = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            for f in 0..self.n_features {
                let own = f / block == l;
                let p = if own { self.feature_signal } else { 0.0 };
                if rng.random::<f64>() < p || rng.random::<f64>() < self.feature_noise {
                    triplets.push((i, f, 1.0));
                }
            }
        }
        let features = SparseMatrix::from_triplets(self.n, self.n_features, triplets)?;
        GraphDataset::new(
            format!("synthetic-h{:.2}", self.homophily),
            self.n,
            edges,
            features,
            labels,
            c,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::homophily_score;

    #[test]
    fn homophily_tracks_parameter() {
        let low = SyntheticGraph { n: 400, homophily: 0.05, ..Default::default() }.generate().unwrap();
        let high = SyntheticGraph { n: 400, homophily: 0.9, ..Default::default() }.generate().unwrap();
        assert!(homophily_score(&low).unwrap() < 0.15);
        assert!(homophily_score(&high).unwrap() > 0.8);
    }

    #[test]
    fn seeded() {
        let g = SyntheticGraph::default();
        assert_eq!(g.generate().unwrap(), g.generate().unwrap());
    }
}
