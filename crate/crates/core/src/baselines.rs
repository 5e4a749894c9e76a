//! Comparison clusterers: k-medoids over Jaccard distance between
//! dependency-neighbor sets, and Girvan-Newman edge-betweenness splitting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsm::Dsm;
use crate::error::{Error, Result};
use crate::graph::DesignGraph;
use crate::partition::Partition;

/// Default cluster-count heuristic: 10% of the entities, rounded up.
pub fn default_cluster_count(n: usize) -> usize {
    n.div_ceil(10)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansParams {
    pub k: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl KmeansParams {
    /// Parameters with `k` set to the 10%-of-entities default.
    pub fn with_default_k(n: usize, seed: u64) -> Self {
        KmeansParams {
            k: default_cluster_count(n),
            max_iterations: 100,
            seed,
        }
    }
}

/// Jaccard distance between two sorted index sets; two empty sets are at
/// distance 0.
fn jaccard_distance(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut i = 0;
    let mut j = 0;
    let mut both = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                both += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - both;
    1.0 - both as f64 / union as f64
}

/// Cluster entities into exactly `k` groups with a k-medoids iteration
/// over Jaccard distance. An entity's feature set is its closed
/// dependency neighborhood: itself plus the union of its fan-in and
/// fan-out neighbors. Set-valued features have no coordinate mean, so
/// cluster centers are medoids rather than centroids.
///
/// Medoids are seeded uniformly at random; assignment ties go to the
/// lowest cluster index and medoid-update ties to the lowest entity
/// index, so a fixed seed fully determines the result. A cluster emptied
/// during assignment is reseeded with the non-medoid entity farthest
/// from its current medoid.
pub fn kmeans_jaccard(dsm: &Dsm, params: &KmeansParams) -> Result<Partition> {
    let n = dsm.n();
    let k = params.k;
    if k == 0 || k > n {
        return Err(Error::Argument(format!(
            "k = {k} must be between 1 and the entity count {n}"
        )));
    }
    if params.max_iterations == 0 {
        return Err(Error::Argument("max_iterations must be positive".into()));
    }

    // The symmetric-interaction adjacency is exactly the union of fan-in
    // and fan-out neighbor indices. Adding the entity itself makes two
    // adjacent sparse entities overlap even without a shared neighbor,
    // which separates planted modules far more reliably.
    let features: Vec<Vec<usize>> = (0..n)
        .map(|e| {
            let mut feature: Vec<usize> = dsm.neighbors(e).iter().map(|&(x, _)| x).collect();
            let pos = feature.partition_point(|&x| x < e);
            feature.insert(pos, e);
            feature
        })
        .collect();
    let mut distance = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = jaccard_distance(&features[i], &features[j]);
            distance[i * n + j] = d;
            distance[j * n + i] = d;
        }
    }
    let dist = |i: usize, j: usize| distance[i * n + j];

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut medoids: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let mut assignment = vec![0usize; n];

    for _ in 0..params.max_iterations {
        // Assignment step.
        let mut next = vec![0usize; n];
        for (e, slot) in next.iter_mut().enumerate() {
            let mut best = 0usize;
            let mut best_d = dist(e, medoids[0]);
            for (c, &m) in medoids.iter().enumerate().skip(1) {
                let d = dist(e, m);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            *slot = best;
        }

        // Reseed emptied clusters until every cluster has a member again.
        let mut sizes = vec![0usize; k];
        for &c in &next {
            sizes[c] += 1;
        }
        loop {
            let Some(empty) = sizes.iter().position(|&s| s == 0) else {
                break;
            };
            let pick = |allow_medoids: bool| {
                (0..n)
                    .filter(|&e| sizes[next[e]] > 1 && (allow_medoids || !medoids.contains(&e)))
                    .max_by(|&a, &b| {
                        dist(a, medoids[empty])
                            .partial_cmp(&dist(b, medoids[empty]))
                            .unwrap()
                            .then(b.cmp(&a)) // ties: lowest entity index
                    })
            };
            // Some cluster has two members whenever one is empty (n >= k),
            // so at worst the fallback that tolerates medoid entities hits.
            let farthest = pick(false).or_else(|| pick(true)).ok_or_else(|| {
                Error::Argument("cannot reseed an empty cluster: no donor entity".into())
            })?;
            sizes[next[farthest]] -= 1;
            next[farthest] = empty;
            sizes[empty] = 1;
            medoids[empty] = farthest;
        }

        let converged = next == assignment;
        assignment = next;

        // Medoid update: the member minimizing summed distance to its
        // co-members, lowest index on ties.
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (e, &c) in assignment.iter().enumerate() {
            members[c].push(e);
        }
        for (c, group) in members.iter().enumerate() {
            let mut best = group[0];
            let mut best_sum = f64::INFINITY;
            for &candidate in group {
                let sum: f64 = group.iter().map(|&other| dist(candidate, other)).sum();
                if sum < best_sum {
                    best_sum = sum;
                    best = candidate;
                }
            }
            medoids[c] = best;
        }

        if converged {
            break;
        }
    }

    Ok(Partition::from_assignment(assignment))
}

/// Undirected simple view of a graph for betweenness clustering.
struct UndirectedView {
    n: usize,
    edges: Vec<(usize, usize)>,
    alive: Vec<bool>,
}

impl UndirectedView {
    fn build(graph: &DesignGraph) -> Self {
        let n = graph.node_count();
        let mut edges: Vec<(usize, usize)> = graph
            .edges()
            .iter()
            .filter(|&&(s, d, _)| s != d)
            .map(|&(s, d, _)| (s.min(d), s.max(d)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let alive = vec![true; edges.len()];
        UndirectedView { n, edges, alive }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            if self.alive[idx] {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        adj
    }

    /// Component id per node, ids in order of the smallest node index.
    fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut component = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if component[v] == usize::MAX {
                        component[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        component
    }

    /// Unweighted edge betweenness: the number of all-pairs shortest paths
    /// crossing each live edge, split equally among equal-length paths.
    /// Brandes accumulation over every source counts each unordered pair
    /// twice, so the result is halved.
    fn edge_betweenness(&self) -> Vec<f64> {
        let adj = self.adjacency();
        let mut edge_index = std::collections::HashMap::new();
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            if self.alive[idx] {
                edge_index.insert((u, v), idx);
            }
        }
        let mut scores = vec![0.0; self.edges.len()];
        let mut dist = vec![i64::MAX; self.n];
        let mut sigma = vec![0.0f64; self.n];
        let mut delta = vec![0.0f64; self.n];
        let mut order: Vec<usize> = Vec::with_capacity(self.n);
        let mut queue = std::collections::VecDeque::new();

        for source in 0..self.n {
            dist.fill(i64::MAX);
            sigma.fill(0.0);
            delta.fill(0.0);
            order.clear();

            dist[source] = 0;
            sigma[source] = 1.0;
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &v in &adj[u] {
                    if dist[v] == i64::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                    if dist[v] == dist[u] + 1 {
                        sigma[v] += sigma[u];
                    }
                }
            }

            for &w in order.iter().rev() {
                for &v in &adj[w] {
                    if dist[v] + 1 == dist[w] {
                        let credit = sigma[v] / sigma[w] * (1.0 + delta[w]);
                        let idx = edge_index[&(v.min(w), v.max(w))];
                        scores[idx] += credit;
                        delta[v] += credit;
                    }
                }
            }
        }

        for s in scores.iter_mut() {
            *s /= 2.0;
        }
        scores
    }
}

/// Girvan-Newman clustering: treat the graph as undirected and unweighted,
/// repeatedly remove the edge with maximal betweenness (ties to the
/// lexicographically smallest endpoint pair) until the connected
/// components number at least `target_clusters`, then return the
/// components. One removal splits at most one component, so the output
/// has exactly `max(initial components, target_clusters)` clusters.
pub fn edge_betweenness_cluster(graph: &DesignGraph, target_clusters: usize) -> Result<Partition> {
    let n = graph.node_count();
    if target_clusters == 0 || target_clusters > n {
        return Err(Error::Argument(format!(
            "target cluster count {target_clusters} must be between 1 and the node count {n}"
        )));
    }

    let mut view = UndirectedView::build(graph);
    loop {
        let components = view.components();
        let count = components.iter().max().map_or(0, |&c| c + 1);
        if count >= target_clusters {
            return Ok(Partition::from_assignment(components));
        }
        let scores = view.edge_betweenness();
        let mut best: Option<usize> = None;
        for (idx, &score) in scores.iter().enumerate() {
            if !view.alive[idx] {
                continue;
            }
            // Ascending edge order makes strict comparison keep the
            // lexicographically smallest endpoint pair on ties.
            if best.is_none_or(|b| score > scores[b]) {
                best = Some(idx);
            }
        }
        match best {
            Some(idx) => view.alive[idx] = false,
            // No live edges left; the component count cannot grow further.
            None => return Ok(Partition::from_assignment(components)),
        }
    }
}
