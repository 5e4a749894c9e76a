//! Evaluation harness: run algorithms across systems, average the quality
//! metrics over seeded repetitions, rank algorithms with Above scores, and
//! sweep one clustering parameter at a time over its probe range.
//!
//! Repetitions run on rayon workers; results are keyed by their task index
//! and sorted before aggregation, so parallelism never changes the output.

use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{self, KmeansParams};
use crate::cluster::{dsmc_cluster, DsmcParams};
use crate::dsm::Dsm;
use crate::error::{Error, Result};
use crate::graph::{self, DesignGraph};
use crate::metrics::{self, MetricSeries};
use crate::partition::Partition;

/// The built-in clustering algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Dsmc,
    Kmeans,
    Eb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dsmc, Algorithm::Kmeans, Algorithm::Eb];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dsmc => "dsmc",
            Algorithm::Kmeans => "kmeans",
            Algorithm::Eb => "eb",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dsmc" => Ok(Algorithm::Dsmc),
            "kmeans" => Ok(Algorithm::Kmeans),
            "eb" => Ok(Algorithm::Eb),
            other => Err(Error::Argument(format!(
                "unknown algorithm `{other}` (expected dsmc, kmeans, or eb)"
            ))),
        }
    }
}

/// One system under evaluation: a named dependency graph plus its derived
/// DSM and authoritative package partition.
pub struct SystemInput {
    pub name: String,
    pub graph: DesignGraph,
    pub dsm: Dsm,
    pub reference: Partition,
}

impl SystemInput {
    pub fn new(name: impl Into<String>, graph: DesignGraph) -> Self {
        let dsm = Dsm::from_graph(&graph);
        let reference = graph::authoritative_partition(&graph);
        SystemInput {
            name: name.into(),
            graph,
            dsm,
            reference,
        }
    }
}

/// Run one built-in algorithm with a concrete seed.
pub fn run_algorithm(
    system: &SystemInput,
    algorithm: Algorithm,
    dsmc: &DsmcParams,
    seed: u64,
) -> Result<Partition> {
    match algorithm {
        Algorithm::Dsmc => {
            let params = DsmcParams { seed, ..dsmc.clone() };
            Ok(dsmc_cluster(&system.dsm, &params, true)?.partition)
        }
        Algorithm::Kmeans => {
            let params = KmeansParams::with_default_k(system.dsm.n(), seed);
            baselines::kmeans_jaccard(&system.dsm, &params)
        }
        Algorithm::Eb => {
            let target = baselines::default_cluster_count(system.graph.node_count());
            baselines::edge_betweenness_cluster(&system.graph, target)
        }
    }
}

/// An algorithm column in a comparison: either a built-in clusterer or
/// externally supplied partitions (one per system), which lets results
/// from tools outside this toolkit join the ranking.
pub enum CompareAlgo {
    Builtin(Algorithm),
    External {
        name: String,
        partitions: Vec<Partition>,
    },
}

impl CompareAlgo {
    pub fn name(&self) -> &str {
        match self {
            CompareAlgo::Builtin(a) => a.name(),
            CompareAlgo::External { name, .. } => name,
        }
    }
}

pub struct CompareConfig {
    pub dsmc: DsmcParams,
    /// Seeded repetitions per (system, algorithm); seeds are
    /// `base_seed + run_index`.
    pub runs: usize,
    pub base_seed: u64,
    pub ned_limits: (usize, usize),
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            dsmc: DsmcParams::default(),
            runs: 1,
            base_seed: 0,
            ned_limits: (metrics::NED_DEFAULT_LOWER, metrics::NED_DEFAULT_UPPER),
        }
    }
}

/// Long-form comparison row: mean metric value for one (system, algorithm).
pub struct CompareRow {
    pub system: String,
    pub algorithm: String,
    pub metric: &'static str,
    pub value: f64,
}

pub struct CompareOutcome {
    /// Rows ordered by system (argument order), then algorithm (argument
    /// order), then metric (mojo_sim before ned).
    pub rows: Vec<CompareRow>,
    /// Above scores per metric, algorithms in argument order.
    pub above: Vec<(&'static str, Vec<(String, f64)>)>,
}

pub const COMPARE_METRICS: [&str; 2] = ["mojo_sim", "ned"];

/// Evaluate every algorithm on every system: average `mojo_sim` against
/// the package partition and `ned` over the seeded runs, then rank the
/// per-system series with Above.
pub fn compare_systems(
    systems: &[SystemInput],
    algos: &[CompareAlgo],
    config: &CompareConfig,
) -> Result<CompareOutcome> {
    if systems.is_empty() {
        return Err(Error::Argument("compare needs at least one system".into()));
    }
    if algos.len() < 2 {
        return Err(Error::Argument("compare needs at least two algorithms".into()));
    }
    if config.runs == 0 {
        return Err(Error::Argument("runs must be positive".into()));
    }
    for algo in algos {
        if let CompareAlgo::External { name, partitions } = algo {
            if partitions.len() != systems.len() {
                return Err(Error::Argument(format!(
                    "external algorithm `{name}` supplies {} partitions for {} systems",
                    partitions.len(),
                    systems.len()
                )));
            }
        }
    }

    // means[(system, algo)] = (mean mojo_sim, mean ned)
    let tasks: Vec<(usize, usize)> = (0..systems.len())
        .flat_map(|s| (0..algos.len()).map(move |a| (s, a)))
        .collect();
    let mut cells: Vec<((usize, usize), (f64, f64))> = tasks
        .par_iter()
        .map(|&(s, a)| {
            let system = &systems[s];
            let cell = match &algos[a] {
                CompareAlgo::Builtin(algorithm) => {
                    let mut sim_sum = 0.0;
                    let mut ned_sum = 0.0;
                    for run in 0..config.runs {
                        let seed = config.base_seed.wrapping_add(run as u64);
                        let partition = run_algorithm(system, *algorithm, &config.dsmc, seed)?;
                        sim_sum += metrics::mojo_sim(&partition, &system.reference)?;
                        ned_sum +=
                            metrics::ned(&partition, config.ned_limits.0, config.ned_limits.1)?;
                    }
                    (sim_sum / config.runs as f64, ned_sum / config.runs as f64)
                }
                CompareAlgo::External { partitions, .. } => {
                    let partition = &partitions[s];
                    (
                        metrics::mojo_sim(partition, &system.reference)?,
                        metrics::ned(partition, config.ned_limits.0, config.ned_limits.1)?,
                    )
                }
            };
            Ok(((s, a), cell))
        })
        .collect::<Result<_>>()?;
    cells.sort_by_key(|&(key, _)| key);

    let cell = |s: usize, a: usize| cells[s * algos.len() + a].1;
    let mut rows = Vec::new();
    for (s, system) in systems.iter().enumerate() {
        for (a, algo) in algos.iter().enumerate() {
            let (sim, ned) = cell(s, a);
            rows.push(CompareRow {
                system: system.name.clone(),
                algorithm: algo.name().to_string(),
                metric: COMPARE_METRICS[0],
                value: sim,
            });
            rows.push(CompareRow {
                system: system.name.clone(),
                algorithm: algo.name().to_string(),
                metric: COMPARE_METRICS[1],
                value: ned,
            });
        }
    }

    let mut above = Vec::new();
    for (m, metric) in COMPARE_METRICS.iter().enumerate() {
        let series: Vec<MetricSeries> = algos
            .iter()
            .enumerate()
            .map(|(a, algo)| {
                MetricSeries::new(
                    algo.name(),
                    (0..systems.len())
                        .map(|s| if m == 0 { cell(s, a).0 } else { cell(s, a).1 })
                        .collect(),
                )
            })
            .collect();
        above.push((*metric, metrics::above_all(&series)?));
    }

    Ok(CompareOutcome { rows, above })
}

/// The sweepable clustering parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Powbid,
    Powdep,
    Powcc,
    Times,
    RandAccept,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 5] = [
        SweepParameter::Powbid,
        SweepParameter::Powdep,
        SweepParameter::Powcc,
        SweepParameter::Times,
        SweepParameter::RandAccept,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Powbid => "powbid",
            SweepParameter::Powdep => "powdep",
            SweepParameter::Powcc => "powcc",
            SweepParameter::Times => "times",
            SweepParameter::RandAccept => "rand_accept",
        }
    }

    /// Default probe range as (lo, hi, increment).
    pub fn default_range(self) -> (f64, f64, f64) {
        match self {
            SweepParameter::Powbid => (0.0, 5.0, 0.5),
            SweepParameter::Powdep => (1.0, 9.0, 2.0),
            SweepParameter::Powcc => (0.0, 5.0, 0.5),
            SweepParameter::Times => (1.0, 10.0, 1.0),
            SweepParameter::RandAccept => (5.0, 50.0, 5.0),
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "powbid" => Ok(SweepParameter::Powbid),
            "powdep" => Ok(SweepParameter::Powdep),
            "powcc" => Ok(SweepParameter::Powcc),
            "times" => Ok(SweepParameter::Times),
            "rand_accept" | "rand-accept" => Ok(SweepParameter::RandAccept),
            other => Err(Error::Argument(format!(
                "unknown sweep parameter `{other}` (expected powbid, powdep, powcc, times, or rand_accept)"
            ))),
        }
    }
}

/// A one-at-a-time parameter sweep: probe one parameter over a range while
/// the others stay at `base_params`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub range_lo: f64,
    pub range_hi: f64,
    pub increment: f64,
    pub runs_per_value: usize,
    pub base_params: DsmcParams,
}

pub const DEFAULT_RUNS_PER_VALUE: usize = 50;

impl SweepSpec {
    /// A spec probing the parameter's default range.
    pub fn with_default_range(parameter: SweepParameter, base_params: DsmcParams) -> Self {
        let (range_lo, range_hi, increment) = parameter.default_range();
        SweepSpec {
            parameter,
            range_lo,
            range_hi,
            increment,
            runs_per_value: DEFAULT_RUNS_PER_VALUE,
            base_params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.increment.is_finite() || self.increment <= 0.0 {
            return Err(Error::Argument(format!(
                "sweep increment {} must be positive",
                self.increment
            )));
        }
        if self.range_lo > self.range_hi {
            return Err(Error::Argument(format!(
                "sweep range {}..{} is inverted",
                self.range_lo, self.range_hi
            )));
        }
        let span = self.range_hi - self.range_lo;
        let steps = (span / self.increment).round();
        if (span - steps * self.increment).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "sweep span {span} is not a multiple of the increment {}",
                self.increment
            )));
        }
        if self.runs_per_value == 0 {
            return Err(Error::Argument("runs_per_value must be positive".into()));
        }
        self.base_params.validate()
    }

    /// Probe values, ascending and inclusive of both endpoints.
    pub fn probe_values(&self) -> Vec<f64> {
        let steps = ((self.range_hi - self.range_lo) / self.increment).round() as usize;
        (0..=steps)
            .map(|i| self.range_lo + i as f64 * self.increment)
            .collect()
    }

    /// Base parameters with the swept parameter set to a probe value.
    /// Integer-valued parameters round to the nearest positive integer.
    pub fn apply(&self, value: f64) -> DsmcParams {
        let mut params = self.base_params.clone();
        match self.parameter {
            SweepParameter::Powbid => params.powbid = value,
            SweepParameter::Powdep => params.powdep = value,
            SweepParameter::Powcc => params.powcc = value,
            SweepParameter::Times => params.times = (value.round() as usize).max(1),
            SweepParameter::RandAccept => params.rand_accept = (value.round() as u64).max(1),
        }
        params
    }
}

/// One sweep observation: metric means for a probe value on one system.
pub struct SweepRow {
    pub parameter: &'static str,
    pub value: f64,
    pub system: String,
    pub mean_mojo_sim: f64,
    pub mean_ned: f64,
}

/// Run the sweep over every system. Rows come back sorted by probe value
/// (ascending), then system argument order.
pub fn run_sweep(
    systems: &[SystemInput],
    spec: &SweepSpec,
    base_seed: u64,
    ned_limits: (usize, usize),
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    if systems.is_empty() {
        return Err(Error::Argument("sweep needs at least one system".into()));
    }
    let values = spec.probe_values();
    let tasks: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..systems.len()).map(move |s| (v, s)))
        .collect();
    let mut cells: Vec<((usize, usize), (f64, f64))> = tasks
        .par_iter()
        .map(|&(v, s)| {
            let params = spec.apply(values[v]);
            let system = &systems[s];
            let mut sim_sum = 0.0;
            let mut ned_sum = 0.0;
            for run in 0..spec.runs_per_value {
                let seed = base_seed.wrapping_add(run as u64);
                let partition = run_algorithm(system, Algorithm::Dsmc, &params, seed)?;
                sim_sum += metrics::mojo_sim(&partition, &system.reference)?;
                ned_sum += metrics::ned(&partition, ned_limits.0, ned_limits.1)?;
            }
            let runs = spec.runs_per_value as f64;
            Ok(((v, s), (sim_sum / runs, ned_sum / runs)))
        })
        .collect::<Result<_>>()?;
    cells.sort_by_key(|&(key, _)| key);

    Ok(cells
        .into_iter()
        .map(|((v, s), (sim, ned))| SweepRow {
            parameter: spec.parameter.name(),
            value: values[v],
            system: systems[s].name.clone(),
            mean_mojo_sim: sim,
            mean_ned: ned,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_planted;

    fn planted_system(name: &str, seed: u64) -> SystemInput {
        let inst = gen_planted(3, 5, 0.7, 0.05, seed).unwrap();
        SystemInput::new(name, inst.graph)
    }

    #[test]
    fn sweep_default_ranges() {
        let expected = [
            (SweepParameter::Powbid, 0.0, 5.0, 0.5),
            (SweepParameter::Powdep, 1.0, 9.0, 2.0),
            (SweepParameter::Powcc, 0.0, 5.0, 0.5),
            (SweepParameter::Times, 1.0, 10.0, 1.0),
            (SweepParameter::RandAccept, 5.0, 50.0, 5.0),
        ];
        for (param, lo, hi, inc) in expected {
            assert_eq!(param.default_range(), (lo, hi, inc), "{}", param.name());
        }
    }

    #[test]
    fn sweep_probe_value_counts() {
        let powcc = SweepSpec::with_default_range(SweepParameter::Powcc, DsmcParams::default());
        assert_eq!(powcc.probe_values().len(), 11);
        let powbid = SweepSpec::with_default_range(SweepParameter::Powbid, DsmcParams::default());
        assert_eq!(powbid.probe_values().len(), 11);
        let powdep = SweepSpec::with_default_range(SweepParameter::Powdep, DsmcParams::default());
        assert_eq!(powdep.probe_values(), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
        assert_eq!(powcc.runs_per_value, 50);
    }

    #[test]
    fn sweep_validates_ranges() {
        let mut spec = SweepSpec::with_default_range(SweepParameter::Powcc, DsmcParams::default());
        spec.validate().unwrap();
        spec.range_hi = 5.3;
        assert!(spec.validate().is_err());
        spec.range_hi = 5.0;
        spec.increment = -0.5;
        assert!(spec.validate().is_err());
        spec.increment = 0.5;
        spec.range_lo = 6.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_applies_integer_parameters_rounded() {
        let spec = SweepSpec::with_default_range(SweepParameter::Times, DsmcParams::default());
        assert_eq!(spec.apply(3.0).times, 3);
        let spec =
            SweepSpec::with_default_range(SweepParameter::RandAccept, DsmcParams::default());
        assert_eq!(spec.apply(25.0).rand_accept, 25);
        let spec = SweepSpec::with_default_range(SweepParameter::Powcc, DsmcParams::default());
        assert_eq!(spec.apply(2.5).powcc, 2.5);
        assert_eq!(spec.apply(2.5).times, DsmcParams::default().times);
    }

    #[test]
    fn run_sweep_emits_rows_in_order() {
        let systems = vec![planted_system("s1", 1), planted_system("s2", 2)];
        let spec = SweepSpec {
            parameter: SweepParameter::Powcc,
            range_lo: 2.0,
            range_hi: 4.0,
            increment: 1.0,
            runs_per_value: 2,
            base_params: DsmcParams::default(),
        };
        let rows = run_sweep(&systems, &spec, 10, (5, 20)).unwrap();
        assert_eq!(rows.len(), 3 * 2);
        let keys: Vec<(f64, &str)> = rows
            .iter()
            .map(|r| (r.value, r.system.as_str()))
            .collect();
        assert_eq!(
            keys,
            vec![
                (2.0, "s1"),
                (2.0, "s2"),
                (3.0, "s1"),
                (3.0, "s2"),
                (4.0, "s1"),
                (4.0, "s2"),
            ]
        );
        for row in &rows {
            assert_eq!(row.parameter, "powcc");
            assert!((0.0..=1.0).contains(&row.mean_mojo_sim));
            assert!((0.0..=1.0).contains(&row.mean_ned));
        }
    }

    #[test]
    fn compare_ranks_identical_output_as_tied() {
        let systems = vec![planted_system("sys", 3)];
        // The same external partition twice: every Above score is 0.
        let partition = systems[0].reference.clone();
        let algos = vec![
            CompareAlgo::External {
                name: "x1".into(),
                partitions: vec![partition.clone()],
            },
            CompareAlgo::External {
                name: "x2".into(),
                partitions: vec![partition],
            },
        ];
        let outcome = compare_systems(&systems, &algos, &CompareConfig::default()).unwrap();
        for (_, scores) in &outcome.above {
            assert!(scores.iter().all(|(_, s)| *s == 0.0));
        }
        // Perfect reference partitions score mojo_sim 1 on their own system.
        assert!(outcome
            .rows
            .iter()
            .filter(|r| r.metric == "mojo_sim")
            .all(|r| r.value == 1.0));
    }

    #[test]
    fn compare_runs_builtins_deterministically() {
        let systems = vec![planted_system("a", 5), planted_system("b", 6)];
        let algos = vec![
            CompareAlgo::Builtin(Algorithm::Dsmc),
            CompareAlgo::Builtin(Algorithm::Kmeans),
            CompareAlgo::Builtin(Algorithm::Eb),
        ];
        let config = CompareConfig {
            runs: 2,
            base_seed: 9,
            ..CompareConfig::default()
        };
        let once = compare_systems(&systems, &algos, &config).unwrap();
        let twice = compare_systems(&systems, &algos, &config).unwrap();
        let values = |o: &CompareOutcome| o.rows.iter().map(|r| r.value).collect::<Vec<_>>();
        assert_eq!(values(&once), values(&twice));
        assert_eq!(once.rows.len(), 2 * 3 * 2);
        // Above scores live on the 0..k-1 scale.
        for (_, scores) in &once.above {
            for (_, s) in scores {
                assert!((0.0..=2.0).contains(s));
            }
        }
    }

    #[test]
    fn compare_rejects_degenerate_input() {
        let systems = vec![planted_system("sys", 3)];
        let algos = vec![CompareAlgo::Builtin(Algorithm::Dsmc)];
        assert!(compare_systems(&systems, &algos, &CompareConfig::default()).is_err());
        let algos = vec![
            CompareAlgo::Builtin(Algorithm::Dsmc),
            CompareAlgo::External {
                name: "x".into(),
                partitions: vec![],
            },
        ];
        assert!(compare_systems(&systems, &algos, &CompareConfig::default()).is_err());
    }
}
