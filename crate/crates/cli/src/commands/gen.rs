use modview_core::graph::{gen_planted, partition_to_json, write_graph_json};
use modview_core::Result;

use crate::io_util::{derived_path, write_bytes};
use crate::GenArgs;

pub fn run(args: GenArgs) -> Result<()> {
    let instance = gen_planted(args.modules, args.size, args.p_intra, args.p_inter, args.seed)?;

    let mut graph_bytes = Vec::new();
    write_graph_json(&instance.graph, &mut graph_bytes)?;
    write_bytes(&args.out, &graph_bytes)?;

    let truth_path = args
        .truth
        .unwrap_or_else(|| derived_path(&args.out, "truth.json"));
    let mut truth_bytes =
        partition_to_json(&instance.truth, instance.graph.ids()).into_bytes();
    truth_bytes.push(b'\n');
    write_bytes(&truth_path, &truth_bytes)
}
