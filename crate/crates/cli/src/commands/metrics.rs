use modview_core::graph::{authoritative_partition, bind_partition, read_partition};
use modview_core::{metrics, Dsm, Result};

use crate::io_util::{csv_value, load_graph, read_bytes, stem, write_output};
use crate::MetricsArgs;

pub fn run(args: MetricsArgs) -> Result<()> {
    let graph = load_graph(&args.graph, args.format)?;
    let dsm = Dsm::from_graph(&graph);
    let labels = dsm.labels();

    let partition = bind_partition(&read_partition(&read_bytes(&args.partition)?)?, labels)?;
    let reference = if args.reference == "packages" {
        authoritative_partition(&graph)
    } else {
        let path = std::path::Path::new(&args.reference);
        bind_partition(&read_partition(&read_bytes(path)?)?, labels)?
    };

    let mojo = metrics::mojo(&partition, &reference)?;
    let mojo_sim = metrics::mojo_sim(&partition, &reference)?;
    let ned = metrics::ned(&partition, args.lower, args.upper)?;

    let system = stem(&args.graph);
    let algorithm = stem(&args.partition);
    let mut out = String::from("system,algorithm,metric,value\n");
    out.push_str(&format!("{system},{algorithm},mojo,{mojo}\n"));
    out.push_str(&format!(
        "{system},{algorithm},mojo_sim,{}\n",
        csv_value(mojo_sim)
    ));
    out.push_str(&format!("{system},{algorithm},ned,{}\n", csv_value(ned)));
    write_output(args.out.as_deref(), out.as_bytes())
}
