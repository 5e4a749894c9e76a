//! Dependency-graph ingestion and serialization.
//!
//! Two input formats are supported: a whitespace edge list and a JSON
//! document (see the format structs below). Qualified entity names are
//! dot-separated; the segment prefix doubles as the authoritative
//! "package" decomposition used as ground truth by the metrics.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// A directed, weighted dependency graph over named design entities.
///
/// Node order is declaration order and defines the entity indexing used by
/// every other type in the toolkit. Parallel edges are summed into one
/// weight at construction; self-loops are kept (they are dropped when the
/// graph is turned into a DSM).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGraph {
    ids: Vec<String>,
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, f64)>,
}

impl DesignGraph {
    pub fn new() -> Self {
        DesignGraph {
            ids: Vec::new(),
            names: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }

    /// Assemble a graph from (id, qualified-name) nodes and (src, dst, weight)
    /// edges. Edges between the same ordered pair are summed.
    pub fn from_parts(
        nodes: Vec<(String, String)>,
        edges: Vec<(String, String, f64)>,
    ) -> Result<Self> {
        let mut g = DesignGraph::new();
        for (id, name) in nodes {
            g.declare_node(&id, Some(name))?;
        }
        for (src, dst, w) in edges {
            let s = g
                .index
                .get(&src)
                .copied()
                .ok_or_else(|| Error::Validation(format!("edge references unknown node `{src}`")))?;
            let d = g
                .index
                .get(&dst)
                .copied()
                .ok_or_else(|| Error::Validation(format!("edge references unknown node `{dst}`")))?;
            g.add_edge_weight(s, d, w)?;
        }
        Ok(g)
    }

    fn declare_node(&mut self, id: &str, name: Option<String>) -> Result<usize> {
        if let Some(&i) = self.index.get(id) {
            match name {
                // Explicit re-declaration of an explicitly declared node.
                Some(_) if self.names[i] != self.ids[i] => {
                    return Err(Error::Validation(format!("duplicate node `{id}`")))
                }
                Some(n) => self.names[i] = n,
                None => {}
            }
            return Ok(i);
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.names.push(name.unwrap_or_else(|| id.to_string()));
        self.index.insert(id.to_string(), i);
        Ok(i)
    }

    fn add_edge_weight(&mut self, src: usize, dst: usize, w: f64) -> Result<()> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Validation(format!(
                "edge {} -> {} has invalid weight {w}",
                self.ids[src], self.ids[dst]
            )));
        }
        // Parallel edges are summed; extractors often emit one edge per reference.
        if let Some(e) = self
            .edges
            .iter_mut()
            .find(|(s, d, _)| *s == src && *d == dst)
        {
            e.2 += w;
        } else {
            self.edges.push((src, dst, w));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as (source index, target index, weight), in first-seen order.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn qualified_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

impl Default for DesignGraph {
    fn default() -> Self {
        Self::new()
    }
}

/// Input formats accepted by [`parse_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    EdgeList,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(GraphFormat::Json),
            "edge-list" => Ok(GraphFormat::EdgeList),
            other => Err(Error::Argument(format!(
                "unknown graph format `{other}` (expected `json` or `edge-list`)"
            ))),
        }
    }
}

/// Parse a dependency graph from raw bytes in the given format.
pub fn parse_graph(source: &[u8], format: GraphFormat) -> Result<DesignGraph> {
    match format {
        GraphFormat::Json => parse_json_graph(source),
        GraphFormat::EdgeList => {
            let text = std::str::from_utf8(source)
                .map_err(|e| Error::parse(0, format!("input is not UTF-8: {e}")))?;
            parse_edge_list(text)
        }
    }
}

/// Edge-list format: one edge per line, `<source> <target> [weight]`,
/// whitespace-separated. Lines starting with `#` are comments. A line
/// `node <id> [qualified-name]` declares an isolated or named node; ids
/// first seen on an edge get qualified-name = id.
pub fn parse_edge_list(text: &str) -> Result<DesignGraph> {
    let mut g = DesignGraph::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "node" {
            match tokens.len() {
                2 => g.declare_node(tokens[1], Some(tokens[1].to_string())),
                3 => g.declare_node(tokens[1], Some(tokens[2].to_string())),
                n => {
                    return Err(Error::parse(
                        lineno,
                        format!("node declaration takes 1 or 2 arguments, got {}", n - 1),
                    ))
                }
            }?;
            continue;
        }
        let (src, dst, w) = match tokens.len() {
            2 => (tokens[0], tokens[1], 1.0),
            3 => {
                let w: f64 = tokens[2].parse().map_err(|_| {
                    Error::parse(lineno, format!("invalid weight `{}`", tokens[2]))
                })?;
                (tokens[0], tokens[1], w)
            }
            n => {
                return Err(Error::parse(
                    lineno,
                    format!("expected `<source> <target> [weight]`, got {n} fields"),
                ))
            }
        };
        let s = g.declare_node(src, None)?;
        let d = g.declare_node(dst, None)?;
        g.add_edge_weight(s, d, w)?;
    }
    Ok(g)
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    src: String,
    dst: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
}

fn parse_json_graph(source: &[u8]) -> Result<DesignGraph> {
    let doc: JsonGraph = serde_json::from_slice(source)
        .map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let mut g = DesignGraph::new();
    for node in doc.nodes {
        if g.index.contains_key(&node.id) {
            return Err(Error::Validation(format!("duplicate node `{}`", node.id)));
        }
        let name = node.name.unwrap_or_else(|| node.id.clone());
        g.declare_node(&node.id, Some(name))?;
    }
    for edge in doc.edges {
        let s = g.index.get(&edge.src).copied().ok_or_else(|| {
            Error::Validation(format!("edge references unknown node `{}`", edge.src))
        })?;
        let d = g.index.get(&edge.dst).copied().ok_or_else(|| {
            Error::Validation(format!("edge references unknown node `{}`", edge.dst))
        })?;
        g.add_edge_weight(s, d, edge.w.unwrap_or(1.0))?;
    }
    Ok(g)
}

/// Serialize a graph to the JSON graph format. Node and edge order follow
/// the graph's internal order, so output is deterministic.
pub fn write_graph_json<W: Write>(graph: &DesignGraph, mut sink: W) -> Result<()> {
    let doc = JsonGraph {
        nodes: (0..graph.node_count())
            .map(|i| JsonNode {
                id: graph.id(i).to_string(),
                name: if graph.qualified_name(i) == graph.id(i) {
                    None
                } else {
                    Some(graph.qualified_name(i).to_string())
                },
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|&(s, d, w)| JsonEdge {
                src: graph.id(s).to_string(),
                dst: graph.id(d).to_string(),
                w: if w == 1.0 { None } else { Some(w) },
            })
            .collect(),
    };
    let text = serde_json::to_string(&doc).expect("graph serialization cannot fail");
    sink.write_all(text.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(())
}

/// Derive the authoritative "package" partition from qualified names:
/// entities sharing every name segment except the last share a cluster;
/// single-segment names fall into one default cluster. Cluster ids follow
/// the lexicographic order of the prefixes.
pub fn authoritative_partition(graph: &DesignGraph) -> Partition {
    let mut by_prefix: std::collections::BTreeMap<String, Vec<usize>> =
        std::collections::BTreeMap::new();
    for i in 0..graph.node_count() {
        let name = graph.qualified_name(i);
        let prefix = match name.rfind('.') {
            Some(pos) => &name[..pos],
            None => "",
        };
        by_prefix.entry(prefix.to_string()).or_default().push(i);
    }
    let mut assignment = vec![0usize; graph.node_count()];
    for (cluster, members) in by_prefix.values().enumerate() {
        for &e in members {
            assignment[e] = cluster;
        }
    }
    Partition::from_assignment(assignment)
}

/// A synthetic graph with known module membership.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub graph: DesignGraph,
    pub truth: Partition,
}

/// Generate a planted-partition graph: `num_modules * module_size` nodes,
/// one weight-1 edge per ordered pair drawn with probability `p_intra`
/// (same module) or `p_inter` (different modules). Deterministic for a
/// fixed seed.
pub fn gen_planted(
    num_modules: usize,
    module_size: usize,
    p_intra: f64,
    p_inter: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    if num_modules == 0 || module_size == 0 {
        return Err(Error::Argument(
            "planted generator needs at least one module of at least one entity".into(),
        ));
    }
    for (name, p) in [("p_intra", p_intra), ("p_inter", p_inter)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("{name} = {p} is not a probability")));
        }
    }

    let n = num_modules * module_size;
    let module_of = |e: usize| e / module_size;
    let mut g = DesignGraph::new();
    for e in 0..n {
        let id = format!("m{}.e{}", module_of(e), e % module_size);
        g.declare_node(&id, Some(id.clone()))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = if module_of(u) == module_of(v) {
                p_intra
            } else {
                p_inter
            };
            if rng.random_bool(p) {
                g.add_edge_weight(u, v, 1.0)?;
            }
        }
    }

    let truth = Partition::from_assignment((0..n).map(module_of).collect());
    Ok(PlantedInstance { graph: g, truth })
}

#[derive(Serialize, Deserialize)]
struct JsonPartition {
    clusters: Vec<Vec<String>>,
}

/// Canonical JSON form of a partition: members sorted lexicographically,
/// clusters ordered by their first member. `labels[i]` names entity `i`.
pub fn partition_to_json(partition: &Partition, labels: &[String]) -> String {
    let mut clusters: Vec<Vec<String>> = partition
        .cluster_ids()
        .map(|c| {
            let mut members: Vec<String> = partition
                .members(c)
                .iter()
                .map(|&e| labels[e].clone())
                .collect();
            members.sort();
            members
        })
        .collect();
    clusters.sort();
    serde_json::to_string(&JsonPartition { clusters }).expect("partition serialization cannot fail")
}

/// Write the canonical partition JSON followed by a newline.
pub fn write_partition<W: Write>(partition: &Partition, labels: &[String], mut sink: W) -> Result<()> {
    sink.write_all(partition_to_json(partition, labels).as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(())
}

/// Parse a partition JSON document into raw clusters of entity names.
pub fn read_partition(source: &[u8]) -> Result<Vec<Vec<String>>> {
    let doc: JsonPartition = serde_json::from_slice(source)
        .map_err(|e| Error::parse(e.line(), e.to_string()))?;
    Ok(doc.clusters)
}

/// Bind named clusters to an entity indexing. The clusters must cover the
/// label set exactly; the first offending entity is named in the error.
pub fn bind_partition(clusters: &[Vec<String>], labels: &[String]) -> Result<Partition> {
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut assignment = vec![usize::MAX; labels.len()];
    for (cluster, members) in clusters.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Argument(format!("cluster {cluster} is empty")));
        }
        for name in members {
            let &e = index
                .get(name.as_str())
                .ok_or_else(|| Error::Argument(format!("entity `{name}` is not in the graph")))?;
            if assignment[e] != usize::MAX {
                return Err(Error::Argument(format!(
                    "entity `{name}` appears in more than one cluster"
                )));
            }
            assignment[e] = cluster;
        }
    }
    if let Some(e) = assignment.iter().position(|&c| c == usize::MAX) {
        return Err(Error::Argument(format!(
            "entity `{}` is missing from the partition",
            labels[e]
        )));
    }
    Ok(Partition::from_assignment(assignment))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(g: &DesignGraph) -> Vec<String> {
        g.ids().to_vec()
    }

    #[test]
    fn edge_list_basic() {
        let g = parse_edge_list("a b 2\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[(0, 1, 2.0)]);
    }

    #[test]
    fn edge_list_sums_parallel_edges() {
        let g = parse_edge_list("a b 1\na b 2\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1, 3.0)]);
    }

    #[test]
    fn edge_list_keeps_self_loop() {
        let g = parse_edge_list("a a 1\n").unwrap();
        assert_eq!(g.edges(), &[(0, 0, 1.0)]);
    }

    #[test]
    fn edge_list_default_weight_comments_and_nodes() {
        let g = parse_edge_list("# header\nnode c util.c\na b\n\nnode d\n").unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.id(0), "c");
        assert_eq!(g.qualified_name(0), "util.c");
        assert_eq!(g.qualified_name(1), "a");
        assert_eq!(g.edges(), &[(1, 2, 1.0)]);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = parse_edge_list("a b 1\na b x\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
        let err = parse_edge_list("a b c d\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn edge_list_rejects_negative_weight_and_duplicate_node() {
        assert!(matches!(
            parse_edge_list("a b -1\n"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_edge_list("node a x.a\nnode a y.a\n"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn json_graph_round_trip_and_validation() {
        let src = br#"{"nodes":[{"id":"a","name":"p.a"},{"id":"b"}],"edges":[{"src":"a","dst":"b","w":2.5},{"src":"b","dst":"a"}]}"#;
        let g = parse_graph(src, GraphFormat::Json).unwrap();
        assert_eq!(g.qualified_name(0), "p.a");
        assert_eq!(g.qualified_name(1), "b");
        assert_eq!(g.edges(), &[(0, 1, 2.5), (1, 0, 1.0)]);

        let mut out = Vec::new();
        write_graph_json(&g, &mut out).unwrap();
        let g2 = parse_graph(&out, GraphFormat::Json).unwrap();
        assert_eq!(g, g2);

        let bad = br#"{"nodes":[{"id":"a"}],"edges":[{"src":"a","dst":"zz"}]}"#;
        let err = parse_graph(bad, GraphFormat::Json).unwrap_err();
        assert!(err.to_string().contains("zz"));
    }

    #[test]
    fn authoritative_partition_prefix_rule() {
        let g = DesignGraph::from_parts(
            vec![
                ("A".into(), "org.foo.A".into()),
                ("B".into(), "org.foo.B".into()),
                ("C".into(), "org.bar.C".into()),
            ],
            vec![],
        )
        .unwrap();
        let p = authoritative_partition(&g);
        assert_eq!(p.num_clusters(), 2);
        assert_eq!(p.cluster_of(0), p.cluster_of(1));
        assert_ne!(p.cluster_of(0), p.cluster_of(2));
    }

    #[test]
    fn authoritative_partition_default_cluster() {
        let g = DesignGraph::from_parts(
            vec![("a".into(), "a".into()), ("b".into(), "b".into())],
            vec![],
        )
        .unwrap();
        let p = authoritative_partition(&g);
        assert_eq!(p.num_clusters(), 1);
    }

    #[test]
    fn authoritative_partition_prefix_depth_matters() {
        // Prefixes "a" and "a.b" differ, so X and Y are separated.
        let g = DesignGraph::from_parts(
            vec![("X".into(), "a.X".into()), ("Y".into(), "a.b.Y".into())],
            vec![],
        )
        .unwrap();
        let p = authoritative_partition(&g);
        assert_eq!(p.num_clusters(), 2);
    }

    #[test]
    fn gen_planted_degenerate_probabilities() {
        let inst = gen_planted(2, 3, 1.0, 0.0, 42).unwrap();
        assert_eq!(inst.graph.node_count(), 6);
        // Both directions of every intra pair, nothing across.
        assert_eq!(inst.graph.edge_count(), 2 * 3 * 2);
        for &(s, d, w) in inst.graph.edges() {
            assert_eq!(w, 1.0);
            assert_eq!(inst.truth.cluster_of(s), inst.truth.cluster_of(d));
        }
        assert_eq!(inst.truth.cluster_sizes(), vec![3, 3]);

        let empty = gen_planted(1, 5, 0.0, 0.0, 7).unwrap();
        assert_eq!(empty.graph.edge_count(), 0);
        assert_eq!(empty.truth.num_clusters(), 1);
    }

    #[test]
    fn gen_planted_is_deterministic() {
        let a = gen_planted(3, 4, 0.5, 0.1, 99).unwrap();
        let b = gen_planted(3, 4, 0.5, 0.1, 99).unwrap();
        assert_eq!(a.graph, b.graph);
        let c = gen_planted(3, 4, 0.5, 0.1, 100).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn gen_planted_truth_matches_packages() {
        let inst = gen_planted(3, 4, 0.4, 0.1, 5).unwrap();
        let packages = authoritative_partition(&inst.graph);
        assert!(packages.same_grouping(&inst.truth));
    }

    #[test]
    fn gen_planted_rejects_bad_arguments() {
        assert!(gen_planted(0, 3, 0.5, 0.1, 1).is_err());
        assert!(gen_planted(3, 0, 0.5, 0.1, 1).is_err());
        assert!(gen_planted(3, 3, 1.5, 0.1, 1).is_err());
    }

    #[test]
    fn partition_json_is_canonical() {
        let g = parse_edge_list("b a\nnode c\n").unwrap();
        let p = Partition::from_clusters(3, vec![vec![0, 1], vec![2]]).unwrap();
        // Members sorted lexicographically, clusters ordered by first member.
        assert_eq!(
            partition_to_json(&p, &labels(&g)),
            r#"{"clusters":[["a","b"],["c"]]}"#
        );
        let empty = Partition::from_assignment(vec![]);
        assert_eq!(partition_to_json(&empty, &[]), r#"{"clusters":[]}"#);
    }

    #[test]
    fn partition_round_trips() {
        let g = parse_edge_list("a b\nb c\nc d\n").unwrap();
        let p = Partition::from_clusters(4, vec![vec![0, 2], vec![1], vec![3]]).unwrap();
        let json = partition_to_json(&p, &labels(&g));
        let clusters = read_partition(json.as_bytes()).unwrap();
        let back = bind_partition(&clusters, &labels(&g)).unwrap();
        assert!(back.same_grouping(&p));
    }

    #[test]
    fn bind_partition_names_offenders() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let err = bind_partition(&[vec!["a".into(), "zz".into()]], &labels).unwrap_err();
        assert!(err.to_string().contains("zz"));
        let err = bind_partition(&[vec!["a".into()]], &labels).unwrap_err();
        assert!(err.to_string().contains('b'));
        let err = bind_partition(&[vec!["a".into()], vec!["a".into(), "b".into()]], &labels)
            .unwrap_err();
        assert!(err.to_string().contains('a'));
    }
}
