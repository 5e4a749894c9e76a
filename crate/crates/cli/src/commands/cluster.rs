use modview_core::baselines::{self, KmeansParams};
use modview_core::cluster::dsmc_cluster;
use modview_core::graph::partition_to_json;
use modview_core::{Dsm, Result};

use crate::io_util::{self, derived_path, load_graph, write_output};
use crate::{config, AlgoChoice, ClusterArgs};

pub fn run(args: ClusterArgs) -> Result<()> {
    let graph = load_graph(&args.graph, args.format)?;
    let dsm = Dsm::from_graph(&graph);
    let seed = args.seed.unwrap_or(0);

    let (partition, stats) = match args.algorithm {
        AlgoChoice::Dsmc => {
            let params = config::resolve_params(args.config.as_deref(), &args.dsmc, args.seed)?;
            let result = dsmc_cluster(&dsm, &params, !args.dsmc.no_incremental)?;
            let stats = result.stats_json();
            (result.partition, stats)
        }
        AlgoChoice::Kmeans => {
            let mut params = KmeansParams::with_default_k(dsm.n(), seed);
            if let Some(k) = args.k {
                params.k = k;
            }
            if let Some(iters) = args.max_iterations {
                params.max_iterations = iters;
            }
            let start = std::time::Instant::now();
            let partition = baselines::kmeans_jaccard(&dsm, &params)?;
            let stats = serde_json::json!({
                "algorithm": "kmeans",
                "k": params.k,
                "clusters": partition.num_clusters(),
                "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
            });
            (partition, stats)
        }
        AlgoChoice::Eb => {
            let target = args
                .target_clusters
                .unwrap_or_else(|| baselines::default_cluster_count(graph.node_count()));
            let start = std::time::Instant::now();
            let partition = baselines::edge_betweenness_cluster(&graph, target)?;
            let stats = serde_json::json!({
                "algorithm": "eb",
                "target_clusters": target,
                "clusters": partition.num_clusters(),
                "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
            });
            (partition, stats)
        }
    };

    let mut bytes = partition_to_json(&partition, dsm.labels()).into_bytes();
    bytes.push(b'\n');
    write_output(args.out.as_deref(), &bytes)?;

    let stats_path = args
        .stats
        .or_else(|| args.out.as_deref().map(|out| derived_path(out, "stats.json")));
    if let Some(path) = stats_path {
        let mut text = stats.to_string();
        text.push('\n');
        io_util::write_bytes(&path, text.as_bytes())?;
    }
    Ok(())
}
