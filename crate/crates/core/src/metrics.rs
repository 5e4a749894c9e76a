//! Clustering-quality measures: MoJo distance and similarity, non-extreme
//! distribution, and the Above ordinal comparison of metric series.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::partition::Partition;

pub const NED_DEFAULT_LOWER: usize = 5;
pub const NED_DEFAULT_UPPER: usize = 20;

/// Overlap table between the clusters of two partitions over the same
/// entity set, with cluster ids densified to row/column positions.
struct Overlaps {
    n: usize,
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl Overlaps {
    fn build(a: &Partition, b: &Partition) -> Result<Overlaps> {
        let n = a.num_entities();
        if n == 0 {
            return Err(Error::Argument("partitions must cover at least one entity".into()));
        }
        if b.num_entities() != n {
            return Err(Error::Argument(format!(
                "partitions cover different entity sets ({} vs {} entities)",
                n,
                b.num_entities()
            )));
        }
        let a_pos: HashMap<usize, usize> =
            a.cluster_ids().enumerate().map(|(i, c)| (c, i)).collect();
        let b_pos: HashMap<usize, usize> =
            b.cluster_ids().enumerate().map(|(i, c)| (c, i)).collect();
        let rows = a_pos.len();
        let cols = b_pos.len();
        let mut counts = vec![0u64; rows * cols];
        for e in 0..n {
            let i = a_pos[&a.cluster_of(e)];
            let j = b_pos[&b.cluster_of(e)];
            counts[i * cols + j] += 1;
        }
        Ok(Overlaps {
            n,
            rows,
            cols,
            counts,
        })
    }

    fn at(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    /// MoJo objective for one tag assignment: entity moves plus cluster joins.
    fn objective(&self, tags: &[usize]) -> u64 {
        let mut kept = 0u64;
        let mut used = 0u64;
        for (i, &t) in tags.iter().enumerate() {
            kept += self.at(i, t);
            used |= 1 << t;
        }
        let moves = self.n as u64 - kept;
        let joins = self.rows as u64 - used.count_ones() as u64;
        moves + joins
    }
}

/// MoJo distance: the minimum number of entity moves plus cluster joins
/// that transform partition `a` into partition `b`.
///
/// Computed exactly. An optimal tag assignment always exists in which
/// every source cluster takes a tag of maximal overlap (trading a
/// max-overlap tag away costs at least one extra move and saves at most
/// one join), so the distance reduces to `n - sum(max overlaps)` moves
/// plus `|a| - m` joins, where `m` is a maximum bipartite matching over
/// the max-overlap pairs.
pub fn mojo(a: &Partition, b: &Partition) -> Result<u64> {
    let ov = Overlaps::build(a, b)?;
    let mut kept = 0u64;
    let mut adjacency: Vec<Vec<usize>> = Vec::with_capacity(ov.rows);
    for i in 0..ov.rows {
        let best = (0..ov.cols).map(|j| ov.at(i, j)).max().unwrap_or(0);
        kept += best;
        adjacency.push((0..ov.cols).filter(|&j| ov.at(i, j) == best).collect());
    }
    let moves = ov.n as u64 - kept;
    let joins = ov.rows as u64 - max_bipartite_matching(&adjacency, ov.cols);
    Ok(moves + joins)
}

fn max_bipartite_matching(adjacency: &[Vec<usize>], cols: usize) -> u64 {
    fn augment(
        left: usize,
        adjacency: &[Vec<usize>],
        visited: &mut [bool],
        matched_to: &mut [usize],
    ) -> bool {
        for &right in &adjacency[left] {
            if !visited[right] {
                visited[right] = true;
                if matched_to[right] == usize::MAX
                    || augment(matched_to[right], adjacency, visited, matched_to)
                {
                    matched_to[right] = left;
                    return true;
                }
            }
        }
        false
    }

    let mut matched_to = vec![usize::MAX; cols];
    let mut size = 0u64;
    let mut visited = vec![false; cols];
    for left in 0..adjacency.len() {
        visited.fill(false);
        if augment(left, adjacency, &mut visited, &mut matched_to) {
            size += 1;
        }
    }
    size
}

/// Validation oracle for [`mojo`]: exhaustively minimizes the same
/// objective over every tag assignment. Bounded to 8 clusters per side.
pub fn mojo_brute_force(a: &Partition, b: &Partition) -> Result<u64> {
    let ov = Overlaps::build(a, b)?;
    if ov.rows > 8 || ov.cols > 8 {
        return Err(Error::Argument(format!(
            "brute force handles at most 8 clusters per side, got {} and {}",
            ov.rows, ov.cols
        )));
    }
    let mut tags = vec![0usize; ov.rows];
    let mut best = u64::MAX;
    loop {
        best = best.min(ov.objective(&tags));
        // Odometer over all cols^rows assignments.
        let mut i = 0;
        loop {
            if i == tags.len() {
                return Ok(best);
            }
            tags[i] += 1;
            if tags[i] < ov.cols {
                break;
            }
            tags[i] = 0;
            i += 1;
        }
    }
}

/// MoJoSim similarity: `1 - mojo(a, b) / n`, in (0, 1].
pub fn mojo_sim(a: &Partition, b: &Partition) -> Result<f64> {
    let distance = mojo(a, b)?;
    Ok(1.0 - distance as f64 / a.num_entities() as f64)
}

/// Non-extreme distribution: the fraction of entities living in clusters
/// whose size lies within `[lower, upper]`.
pub fn ned(partition: &Partition, lower: usize, upper: usize) -> Result<f64> {
    if lower < 1 || lower > upper {
        return Err(Error::Argument(format!(
            "invalid NED limits ({lower}, {upper}): need 1 <= lower <= upper"
        )));
    }
    let n = partition.num_entities();
    if n == 0 {
        return Err(Error::Argument("NED needs a non-empty partition".into()));
    }
    let non_extreme: usize = partition
        .cluster_sizes()
        .into_iter()
        .filter(|&s| (lower..=upper).contains(&s))
        .sum();
    Ok(non_extreme as f64 / n as f64)
}

/// One named series of metric values, index-aligned with its competitors.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        MetricSeries {
            name: name.into(),
            values,
        }
    }
}

fn check_lengths(a: &MetricSeries, b: &MetricSeries) -> Result<()> {
    if a.values.is_empty() || a.values.len() != b.values.len() {
        return Err(Error::Argument(format!(
            "series `{}` and `{}` must have equal nonzero lengths ({} vs {})",
            a.name,
            b.name,
            a.values.len(),
            b.values.len()
        )));
    }
    Ok(())
}

/// Fraction of index positions where `a` strictly exceeds `b`; ties count
/// for neither side.
pub fn above_pair(a: &MetricSeries, b: &MetricSeries) -> Result<f64> {
    check_lengths(a, b)?;
    let wins = a
        .values
        .iter()
        .zip(&b.values)
        .filter(|(x, y)| x > y)
        .count();
    Ok(wins as f64 / a.values.len() as f64)
}

/// Above score of each series against all others: the sum of its pairwise
/// [`above_pair`] values. Scores are returned in input order.
pub fn above_all(series: &[MetricSeries]) -> Result<Vec<(String, f64)>> {
    if series.len() < 2 {
        return Err(Error::Argument("above needs at least two series".into()));
    }
    let mut scores = Vec::with_capacity(series.len());
    for (i, a) in series.iter().enumerate() {
        let mut score = 0.0;
        for (j, b) in series.iter().enumerate() {
            if i != j {
                score += above_pair(a, b)?;
            }
        }
        scores.push((a.name.clone(), score));
    }
    Ok(scores)
}
