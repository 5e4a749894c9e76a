use std::path::Path;

use modview_core::graph::{bind_partition, read_partition};
use modview_core::harness::{compare_systems, Algorithm, CompareAlgo, CompareConfig, SystemInput};
use modview_core::{Error, Result};

use crate::io_util::{csv_value, load_graph, read_bytes, stem, write_output};
use crate::{config, CompareArgs};

/// An algorithm token is a built-in name, or a path standing in for an
/// algorithm this toolkit does not implement: a directory with one
/// `<system>.json` per system, or a single partition file.
fn resolve_algo(token: &str, systems: &[SystemInput]) -> Result<CompareAlgo> {
    if let Ok(builtin) = token.parse::<Algorithm>() {
        return Ok(CompareAlgo::Builtin(builtin));
    }
    let path = Path::new(token);
    if !path.exists() {
        return Err(Error::Argument(format!(
            "`{token}` is neither a built-in algorithm (dsmc, kmeans, eb) nor an existing partition path"
        )));
    }
    let mut partitions = Vec::with_capacity(systems.len());
    for system in systems {
        let file = if path.is_dir() {
            path.join(format!("{}.json", system.name))
        } else {
            path.to_path_buf()
        };
        let clusters = read_partition(&read_bytes(&file)?)?;
        partitions.push(bind_partition(&clusters, system.dsm.labels())?);
    }
    Ok(CompareAlgo::External {
        name: stem(path),
        partitions,
    })
}

pub fn run(args: CompareArgs) -> Result<()> {
    let mut systems = Vec::with_capacity(args.graphs.len());
    for path in &args.graphs {
        systems.push(SystemInput::new(stem(path), load_graph(path, args.format)?));
    }
    let algos: Vec<CompareAlgo> = args
        .algorithms
        .iter()
        .map(|token| resolve_algo(token, &systems))
        .collect::<Result<_>>()?;

    let config = CompareConfig {
        dsmc: config::resolve_params(args.config.as_deref(), &args.dsmc, None)?,
        runs: args.runs,
        base_seed: args.seed.unwrap_or(0),
        ned_limits: (args.lower, args.upper),
    };
    let outcome = compare_systems(&systems, &algos, &config)?;

    let mut out = String::from("system,algorithm,metric,value\n");
    for row in &outcome.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.system,
            row.algorithm,
            row.metric,
            csv_value(row.value)
        ));
    }
    out.push('\n');
    out.push_str("metric,algorithm,above\n");
    for (metric, scores) in &outcome.above {
        for (algorithm, score) in scores {
            out.push_str(&format!("{metric},{algorithm},{}\n", csv_value(*score)));
        }
    }
    write_output(args.out.as_deref(), out.as_bytes())
}
