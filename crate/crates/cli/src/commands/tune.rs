use modview_core::harness::{run_sweep, SweepParameter, SweepSpec, SystemInput};
use modview_core::Result;

use crate::io_util::{csv_value, load_graph, stem, write_output};
use crate::{config, TuneArgs};

pub fn run(args: TuneArgs) -> Result<()> {
    let parameter: SweepParameter = args.parameter.parse()?;
    let base_params = config::resolve_params(args.config.as_deref(), &args.dsmc, None)?;

    let mut spec = SweepSpec::with_default_range(parameter, base_params);
    if let Some(lo) = args.lo {
        spec.range_lo = lo;
    }
    if let Some(hi) = args.hi {
        spec.range_hi = hi;
    }
    if let Some(step) = args.step {
        spec.increment = step;
    }
    spec.runs_per_value = args.runs;

    let mut systems = Vec::with_capacity(args.graphs.len());
    for path in &args.graphs {
        systems.push(SystemInput::new(stem(path), load_graph(path, args.format)?));
    }

    let rows = run_sweep(
        &systems,
        &spec,
        args.seed.unwrap_or(0),
        (args.lower, args.upper),
    )?;

    let mut out = String::from("parameter,value,system,mean_mojo_sim,mean_ned\n");
    for row in &rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.parameter,
            csv_value(row.value),
            row.system,
            csv_value(row.mean_mojo_sim),
            csv_value(row.mean_ned)
        ));
    }
    write_output(args.out.as_deref(), out.as_bytes())
}
