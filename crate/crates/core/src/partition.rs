//! Partitions of design entities into disjoint, covering, non-empty clusters.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type ClusterId = usize;

/// A partition of the entity indices `0..n` into named clusters.
///
/// Cluster ids carry no meaning beyond identity; two partitions with the
/// same grouping but different ids compare equal under [`same_grouping`]
/// but not under `==`.
///
/// [`same_grouping`]: Partition::same_grouping
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<ClusterId>,
    members: BTreeMap<ClusterId, Vec<usize>>,
}

impl Partition {
    /// Every entity in its own cluster, cluster id = entity index.
    pub fn singletons(n: usize) -> Self {
        let assignment: Vec<ClusterId> = (0..n).collect();
        let members = assignment.iter().map(|&c| (c, vec![c])).collect();
        Partition {
            assignment,
            members,
        }
    }

    /// Build from an entity-to-cluster map. Cluster ids may be arbitrary;
    /// only ids that actually appear become clusters, so the result always
    /// satisfies the partition invariants.
    pub fn from_assignment(assignment: Vec<ClusterId>) -> Self {
        let mut members: BTreeMap<ClusterId, Vec<usize>> = BTreeMap::new();
        for (entity, &cluster) in assignment.iter().enumerate() {
            members.entry(cluster).or_default().push(entity);
        }
        Partition {
            assignment,
            members,
        }
    }

    /// Build from explicit member lists over the entity set `0..n`.
    /// Cluster ids are the positions in `clusters`.
    pub fn from_clusters(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        let mut members = BTreeMap::new();
        for (id, mut cluster) in clusters.into_iter().enumerate() {
            if cluster.is_empty() {
                return Err(Error::Argument(format!("cluster {id} is empty")));
            }
            for &e in &cluster {
                if e >= n {
                    return Err(Error::Argument(format!(
                        "entity index {e} out of range for {n} entities"
                    )));
                }
                if assignment[e] != usize::MAX {
                    return Err(Error::Argument(format!(
                        "entity {e} appears in clusters {} and {id}",
                        assignment[e]
                    )));
                }
                assignment[e] = id;
            }
            cluster.sort_unstable();
            members.insert(id, cluster);
        }
        if let Some(e) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Argument(format!(
                "entity {e} is not covered by any cluster"
            )));
        }
        Ok(Partition {
            assignment,
            members,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.members.len()
    }

    pub fn cluster_of(&self, entity: usize) -> ClusterId {
        self.assignment[entity]
    }

    pub fn assignment(&self) -> &[ClusterId] {
        &self.assignment
    }

    /// Member list of a cluster, sorted ascending. Empty slice for unknown ids.
    pub fn members(&self, cluster: ClusterId) -> &[usize] {
        self.members.get(&cluster).map_or(&[], Vec::as_slice)
    }

    pub fn contains_cluster(&self, cluster: ClusterId) -> bool {
        self.members.contains_key(&cluster)
    }

    /// Cluster ids in ascending order.
    pub fn cluster_ids(&self) -> impl Iterator<Item = ClusterId> + '_ {
        self.members.keys().copied()
    }

    /// Cluster sizes in ascending cluster-id order.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.members.values().map(Vec::len).collect()
    }

    /// Equality as a set of sets, ignoring cluster ids.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        if self.assignment.len() != other.assignment.len() {
            return false;
        }
        let mut a: Vec<&Vec<usize>> = self.members.values().collect();
        let mut b: Vec<&Vec<usize>> = other.members.values().collect();
        a.sort();
        b.sort();
        a == b
    }

    /// Check the partition invariants hold: disjoint, covering, non-empty,
    /// and the assignment/member views agree.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.assignment.len()];
        for (&cluster, members) in &self.members {
            if members.is_empty() {
                return Err(Error::Argument(format!("cluster {cluster} is empty")));
            }
            for &e in members {
                if e >= self.assignment.len() || self.assignment[e] != cluster {
                    return Err(Error::Argument(format!(
                        "entity {e} inconsistent between assignment and cluster {cluster}"
                    )));
                }
                if seen[e] {
                    return Err(Error::Argument(format!("entity {e} in two clusters")));
                }
                seen[e] = true;
            }
        }
        if let Some(e) = seen.iter().position(|&s| !s) {
            return Err(Error::Argument(format!("entity {e} not covered")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singletons_are_valid() {
        let p = Partition::singletons(4);
        p.validate().unwrap();
        assert_eq!(p.num_clusters(), 4);
        assert_eq!(p.cluster_sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn from_assignment_collects_members() {
        let p = Partition::from_assignment(vec![7, 2, 7]);
        p.validate().unwrap();
        assert_eq!(p.num_clusters(), 2);
        assert_eq!(p.members(7), &[0, 2]);
        assert_eq!(p.members(2), &[1]);
    }

    #[test]
    fn from_clusters_rejects_overlap_and_gaps() {
        assert!(Partition::from_clusters(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_clusters(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_clusters(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(Partition::from_clusters(2, vec![vec![0, 5]]).is_err());
    }

    #[test]
    fn same_grouping_ignores_ids() {
        let a = Partition::from_assignment(vec![0, 0, 1]);
        let b = Partition::from_assignment(vec![5, 5, 3]);
        assert!(a.same_grouping(&b));
        assert_ne!(a, b);
        let c = Partition::from_assignment(vec![0, 1, 1]);
        assert!(!a.same_grouping(&c));
    }

    #[test]
    fn empty_partition_is_valid() {
        let p = Partition::from_assignment(vec![]);
        p.validate().unwrap();
        assert_eq!(p.num_entities(), 0);
        assert_eq!(p.num_clusters(), 0);
    }
}
