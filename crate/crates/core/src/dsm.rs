//! The design structure matrix: a square interaction matrix over entities.

use crate::error::{Error, Result};
use crate::graph::DesignGraph;

/// An `n x n` non-negative interaction matrix. Cell `(i, j)` holds the
/// summed weight of dependencies from entity `i` to entity `j`; the
/// diagonal is forced to zero at construction.
///
/// Besides the dense matrix the DSM keeps, per entity, the sorted list of
/// partners with a nonzero symmetric interaction `w(i,j) + w(j,i)`. The
/// clustering loop and the cost updates run off that adjacency.
#[derive(Debug, Clone)]
pub struct Dsm {
    n: usize,
    weights: Vec<f64>,
    labels: Vec<String>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Dsm {
    /// Convert a dependency graph; index order is node declaration order.
    /// Self-loops are dropped.
    pub fn from_graph(graph: &DesignGraph) -> Dsm {
        let n = graph.node_count();
        let mut weights = vec![0.0; n * n];
        for &(s, d, w) in graph.edges() {
            if s != d {
                weights[s * n + d] += w;
            }
        }
        let labels = graph.ids().to_vec();
        Dsm::assemble(n, weights, labels)
    }

    /// Build directly from a row-major weight matrix. Weights must be
    /// finite and non-negative; the diagonal is zeroed.
    pub fn from_weights(labels: Vec<String>, mut weights: Vec<f64>) -> Result<Dsm> {
        let n = labels.len();
        if weights.len() != n * n {
            return Err(Error::Argument(format!(
                "weight matrix has {} cells, expected {}",
                weights.len(),
                n * n
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Argument(format!(
                    "cell ({}, {}) has invalid weight {w}",
                    i / n,
                    i % n
                )));
            }
        }
        for i in 0..n {
            weights[i * n + i] = 0.0;
        }
        Ok(Dsm::assemble(n, weights, labels))
    }

    fn assemble(n: usize, weights: Vec<f64>, labels: Vec<String>) -> Dsm {
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pair = weights[i * n + j] + weights[j * n + i];
                if pair > 0.0 {
                    neighbors[i].push((j, pair));
                }
            }
        }
        Dsm {
            n,
            weights,
            labels,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Symmetric interaction of an unordered pair: `w(i,j) + w(j,i)`.
    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.weight(i, j) + self.weight(j, i)
    }

    /// Partners of `i` with nonzero symmetric interaction, ascending by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }
}
