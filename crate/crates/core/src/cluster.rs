//! The DSM clustering loop: a bid auction proposes a destination module for
//! a randomly drawn entity, the coordination cost arbitrates, and a
//! 1-in-`rand_accept` annealing draw occasionally keeps a worsening move.
//!
//! Starting from all singletons, clusters only ever merge or shrink; no
//! operation creates a new cluster, so the cluster count is non-increasing
//! over a run.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{full_cost, move_delta, power};
use crate::dsm::Dsm;
use crate::error::{Error, Result};
use crate::partition::{ClusterId, Partition};

const CONVERGENCE_EPS: f64 = 1e-12;

/// Multiplied by the entity count to cap the number of outer passes, so
/// pathological annealing runs abort instead of looping forever.
pub const PASS_CAP_FACTOR: usize = 10;

/// Clustering controls. The defaults are the values tuned for
/// architecture-recovery inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsmcParams {
    /// Module-size penalty exponent in the cost function.
    pub powcc: f64,
    /// Interaction emphasis exponent in the bid function.
    pub powdep: f64,
    /// Module-size penalty exponent in the bid function.
    pub powbid: f64,
    /// Inner iterations per pass = `times * n`.
    pub times: usize,
    /// A worsening move is kept when a uniform draw from `1..=rand_accept`
    /// comes up 1.
    pub rand_accept: u64,
    /// A pass whose relative cost improvement falls below this counts as
    /// stable.
    pub convergence_threshold: f64,
    /// Consecutive stable passes required to stop.
    pub max_stable_passes: usize,
    pub seed: u64,
}

impl Default for DsmcParams {
    fn default() -> Self {
        DsmcParams {
            powcc: 3.0,
            powdep: 5.0,
            powbid: 1.0,
            times: 4,
            rand_accept: 5,
            convergence_threshold: 1e-4,
            max_stable_passes: 2,
            seed: 0,
        }
    }
}

impl DsmcParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("powcc", self.powcc),
            ("powdep", self.powdep),
            ("powbid", self.powbid),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Argument(format!("{name} = {v} must be >= 0")));
            }
        }
        if self.times == 0 {
            return Err(Error::Argument("times must be positive".into()));
        }
        if self.rand_accept == 0 {
            return Err(Error::Argument("rand_accept must be positive".into()));
        }
        if !self.convergence_threshold.is_finite() || self.convergence_threshold < 0.0 {
            return Err(Error::Argument(format!(
                "convergence_threshold = {} must be >= 0",
                self.convergence_threshold
            )));
        }
        if self.max_stable_passes == 0 {
            return Err(Error::Argument("max_stable_passes must be positive".into()));
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    /// The stable-pass counter reached its target.
    Converged,
    /// The hard pass cap fired first.
    PassCapReached,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::PassCapReached => "pass-cap-reached",
        }
    }
}

/// Outcome of one clustering run. All fields except `elapsed` and the
/// cost-evaluation timings are deterministic functions of (DSM, params).
#[derive(Debug, Clone)]
pub struct ClusterRunResult {
    pub partition: Partition,
    /// Running cost after the last accepted or undone move; equals a fresh
    /// recomputation on `partition` (exactly so for integer weights).
    pub final_tcc: f64,
    pub passes: usize,
    pub moves_attempted: u64,
    pub moves_accepted: u64,
    pub annealing_accepts: u64,
    pub status: RunStatus,
    pub elapsed: Duration,
    /// Number of per-move cost evaluations and their accumulated time;
    /// with `use_incremental = false` each evaluation is a full
    /// recomputation, which is what the speedup comparison measures.
    pub cost_evals: u64,
    pub cost_eval_time: Duration,
}

impl ClusterRunResult {
    pub fn mean_cost_eval_nanos(&self) -> f64 {
        if self.cost_evals == 0 {
            0.0
        } else {
            self.cost_eval_time.as_nanos() as f64 / self.cost_evals as f64
        }
    }

    /// Run statistics as JSON (keys sorted, deterministic except for the
    /// timing fields).
    pub fn stats_json(&self) -> serde_json::Value {
        serde_json::json!({
            "final_tcc": self.final_tcc,
            "clusters": self.partition.num_clusters(),
            "passes": self.passes,
            "moves_attempted": self.moves_attempted,
            "moves_accepted": self.moves_accepted,
            "annealing_accepts": self.annealing_accepts,
            "status": self.status.as_str(),
            "cost_evals": self.cost_evals,
            "mean_cost_eval_ns": self.mean_cost_eval_nanos(),
            "elapsed_ms": self.elapsed.as_secs_f64() * 1e3,
        })
    }
}

/// A module's attraction for an entity: `sum_interactions^powdep /
/// module_size^powbid`, with a zero interaction sum bidding exactly 0 (so
/// `0^0` never turns a silent module into a bidder).
pub fn bid_value(sum_interactions: f64, module_size: usize, powdep: f64, powbid: f64) -> f64 {
    if sum_interactions <= 0.0 {
        return 0.0;
    }
    power(sum_interactions, powdep) / power(module_size as f64, powbid)
}

/// Auction an entity to the partition's modules and return the winner.
///
/// The interaction sum counts both directions, `w(e,x) + w(x,e)`. Ties go
/// to the entity's current cluster, then to the lowest cluster id; if
/// every bid is zero the entity stays where it is.
pub fn bid_auction(
    dsm: &Dsm,
    partition: &Partition,
    entity: usize,
    powdep: f64,
    powbid: f64,
) -> Result<ClusterId> {
    if partition.num_entities() != dsm.n() {
        return Err(Error::Argument(format!(
            "partition covers {} entities but the DSM has {}",
            partition.num_entities(),
            dsm.n()
        )));
    }
    if entity >= dsm.n() {
        return Err(Error::Argument(format!("entity index {entity} out of range")));
    }
    let current = partition.cluster_of(entity);
    let current_sum: f64 = partition
        .members(current)
        .iter()
        .filter(|&&x| x != entity)
        .map(|&x| dsm.pair_weight(entity, x))
        .sum();
    let mut best = current;
    let mut best_bid = bid_value(
        current_sum,
        partition.members(current).len(),
        powdep,
        powbid,
    );
    for cluster in partition.cluster_ids() {
        if cluster == current {
            continue;
        }
        let members = partition.members(cluster);
        let sum: f64 = members.iter().map(|&x| dsm.pair_weight(entity, x)).sum();
        let bid = bid_value(sum, members.len(), powdep, powbid);
        if bid > best_bid {
            best_bid = bid;
            best = cluster;
        }
    }
    Ok(best)
}

enum CostMode {
    Incremental,
    Full,
}

struct MoveUndo {
    entity: usize,
    old: usize,
    new: usize,
    intra: f64,
    extra: f64,
    tcc: f64,
    raw_sum: f64,
    w_old: f64,
    w_new: f64,
}

/// Mutable clustering state with O(1) undo. Cluster ids live in `0..n`;
/// a size of zero marks a deleted cluster.
struct Engine<'a> {
    dsm: &'a Dsm,
    powcc: f64,
    assignment: Vec<usize>,
    sizes: Vec<usize>,
    module_raw: Vec<f64>,
    raw_sum: f64,
    total_raw: f64,
    intra: f64,
    extra: f64,
    tcc: f64,
    bid_sums: Vec<f64>,
    bid_touched: Vec<usize>,
}

impl<'a> Engine<'a> {
    fn new(dsm: &'a Dsm, powcc: f64) -> Self {
        let n = dsm.n();
        let assignment: Vec<usize> = (0..n).collect();
        let costs = full_cost(dsm, &assignment, n, powcc);
        Engine {
            dsm,
            powcc,
            assignment,
            sizes: vec![1; n],
            module_raw: costs.module_raw,
            raw_sum: costs.raw_sum,
            total_raw: costs.total_raw,
            intra: costs.intra,
            extra: costs.extra,
            tcc: costs.intra + costs.extra,
            bid_sums: vec![0.0; n],
            bid_touched: Vec::new(),
        }
    }

    /// Sparse auction: only clusters holding a neighbor of the entity can
    /// bid above zero, so interaction sums are gathered by walking the
    /// entity's adjacency instead of every module.
    fn bid_winner(&mut self, entity: usize, powdep: f64, powbid: f64) -> usize {
        for &(x, pair) in self.dsm.neighbors(entity) {
            let c = self.assignment[x];
            if self.bid_sums[c] == 0.0 {
                self.bid_touched.push(c);
            }
            self.bid_sums[c] += pair;
        }
        self.bid_touched.sort_unstable();

        let current = self.assignment[entity];
        let mut best = current;
        let mut best_bid = bid_value(self.bid_sums[current], self.sizes[current], powdep, powbid);
        for &c in &self.bid_touched {
            if c == current {
                continue;
            }
            let bid = bid_value(self.bid_sums[c], self.sizes[c], powdep, powbid);
            if bid > best_bid {
                best_bid = bid;
                best = c;
            }
        }

        for &c in &self.bid_touched {
            self.bid_sums[c] = 0.0;
        }
        self.bid_touched.clear();
        best
    }

    /// Move an entity and refresh the cost, either incrementally or by a
    /// timed full recomputation. Returns the snapshot needed to undo.
    fn apply_move(
        &mut self,
        entity: usize,
        new: usize,
        mode: &CostMode,
        eval_time: &mut Duration,
    ) -> MoveUndo {
        let old = self.assignment[entity];
        let undo = MoveUndo {
            entity,
            old,
            new,
            intra: self.intra,
            extra: self.extra,
            tcc: self.tcc,
            raw_sum: self.raw_sum,
            w_old: self.module_raw[old],
            w_new: self.module_raw[new],
        };
        let s_old = self.sizes[old];
        let s_new = self.sizes[new];
        self.assignment[entity] = new;
        self.sizes[old] -= 1;
        self.sizes[new] += 1;

        match mode {
            CostMode::Incremental => {
                let t0 = Instant::now();
                let (r_old, r_new) = self.move_interactions(entity, old, new);
                let delta = move_delta(self.powcc, undo.w_old, undo.w_new, s_old, s_new, r_old, r_new);
                self.module_raw[old] = delta.w_old_after;
                self.module_raw[new] = delta.w_new_after;
                self.raw_sum = self.raw_sum - r_old + r_new;
                self.intra += delta.intra_delta;
                self.extra = (self.total_raw - self.raw_sum) * power(self.dsm.n() as f64, self.powcc);
                self.tcc = self.intra + self.extra;
                *eval_time += t0.elapsed();
            }
            CostMode::Full => {
                // Raw bookkeeping stays incremental so undo is uniform; only
                // the recomputation itself is timed.
                let (r_old, r_new) = self.move_interactions(entity, old, new);
                let delta = move_delta(self.powcc, undo.w_old, undo.w_new, s_old, s_new, r_old, r_new);
                self.module_raw[old] = delta.w_old_after;
                self.module_raw[new] = delta.w_new_after;
                self.raw_sum = self.raw_sum - r_old + r_new;
                let t0 = Instant::now();
                let costs = full_cost(self.dsm, &self.assignment, self.dsm.n(), self.powcc);
                self.intra = costs.intra;
                self.extra = costs.extra;
                self.tcc = costs.intra + costs.extra;
                *eval_time += t0.elapsed();
            }
        }
        undo
    }

    fn move_interactions(&self, entity: usize, old: usize, new: usize) -> (f64, f64) {
        let mut r_old = 0.0;
        let mut r_new = 0.0;
        for &(x, pair) in self.dsm.neighbors(entity) {
            let c = self.assignment[x];
            if c == old {
                r_old += pair;
            } else if c == new {
                r_new += pair;
            }
        }
        (r_old, r_new)
    }

    fn undo(&mut self, undo: MoveUndo) {
        self.assignment[undo.entity] = undo.old;
        self.sizes[undo.old] += 1;
        self.sizes[undo.new] -= 1;
        self.module_raw[undo.old] = undo.w_old;
        self.module_raw[undo.new] = undo.w_new;
        self.raw_sum = undo.raw_sum;
        self.intra = undo.intra;
        self.extra = undo.extra;
        self.tcc = undo.tcc;
    }
}

/// Run the clustering loop on a DSM.
///
/// Starts from all singletons and repeats passes of `n * times` auctions
/// until `max_stable_passes` consecutive passes each improve the cost by a
/// relative amount below `convergence_threshold`, or the hard pass cap of
/// `10 * n` fires. All randomness flows from `params.seed`, so identical
/// inputs give identical results apart from the timing fields.
pub fn dsmc_cluster(dsm: &Dsm, params: &DsmcParams, use_incremental: bool) -> Result<ClusterRunResult> {
    params.validate()?;
    let n = dsm.n();
    if n == 0 {
        return Err(Error::Argument("cannot cluster an empty DSM".into()));
    }

    let start = Instant::now();
    let mode = if use_incremental {
        CostMode::Incremental
    } else {
        CostMode::Full
    };
    let mut engine = Engine::new(dsm, params.powcc);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pass_cap = PASS_CAP_FACTOR * n;
    let iterations_per_pass = n * params.times;

    let mut passes = 0usize;
    let mut stable = 0usize;
    let mut moves_attempted = 0u64;
    let mut moves_accepted = 0u64;
    let mut annealing_accepts = 0u64;
    let mut cost_evals = 0u64;
    let mut cost_eval_time = Duration::ZERO;

    let status = loop {
        let tcc_before = engine.tcc;
        for _ in 0..iterations_per_pass {
            let entity = rng.random_range(0..n);
            let winner = engine.bid_winner(entity, params.powdep, params.powbid);
            if winner == engine.assignment[entity] {
                continue;
            }
            moves_attempted += 1;
            let undo = engine.apply_move(entity, winner, &mode, &mut cost_eval_time);
            cost_evals += 1;
            if engine.tcc <= undo.tcc {
                moves_accepted += 1;
            } else if rng.random_range(1..=params.rand_accept) == 1 {
                // Annealing: keep a worsening move once in rand_accept times.
                moves_accepted += 1;
                annealing_accepts += 1;
            } else {
                engine.undo(undo);
            }
        }
        passes += 1;
        let improvement = (tcc_before - engine.tcc) / tcc_before.max(CONVERGENCE_EPS);
        if improvement < params.convergence_threshold {
            stable += 1;
        } else {
            stable = 0;
        }
        if stable >= params.max_stable_passes {
            break RunStatus::Converged;
        }
        if passes >= pass_cap {
            break RunStatus::PassCapReached;
        }
    };

    Ok(ClusterRunResult {
        partition: Partition::from_assignment(engine.assignment),
        final_tcc: engine.tcc,
        passes,
        moves_attempted,
        moves_accepted,
        annealing_accepts,
        status,
        elapsed: start.elapsed(),
        cost_evals,
        cost_eval_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::calc_coord_cost;
    use crate::graph::{gen_planted, parse_edge_list};

    fn dsm_from(text: &str) -> Dsm {
        Dsm::from_graph(&parse_edge_list(text).unwrap())
    }

    #[test]
    fn default_params_match_tuned_values() {
        let p = DsmcParams::default();
        assert_eq!(p.powbid, 1.0);
        assert_eq!(p.powdep, 5.0);
        assert_eq!(p.powcc, 3.0);
        assert_eq!(p.times, 4);
        assert_eq!(p.rand_accept, 5);
        assert_eq!(p.convergence_threshold, 1e-4);
        assert_eq!(p.max_stable_passes, 2);
    }

    #[test]
    fn bid_value_examples() {
        assert_eq!(bid_value(2.0, 4, 5.0, 1.0), 8.0);
        assert_eq!(bid_value(3.0, 2, 1.0, 1.0), 1.5);
        assert_eq!(bid_value(4.0, 8, 1.0, 1.0), 0.5);
        // Zero interaction bids exactly zero, whatever the exponents.
        assert_eq!(bid_value(0.0, 3, 0.0, 1.0), 0.0);
    }

    #[test]
    fn auction_prefers_strong_small_module() {
        // Entity e interacts with m1 = {a, b} (sum 3) and m2 = {c..j, 8
        // members} (sum 4); with powdep = powbid = 1 the bids are 1.5 vs
        // 0.5 and m1 wins.
        let mut text = String::from("e a 1\ne b 2\n");
        let big = ["c", "d", "f", "g", "h", "i", "j", "k"];
        text.push_str("e c 4\n");
        for id in &big[1..] {
            text.push_str(&format!("node {id}\n"));
        }
        let dsm = dsm_from(&text);
        let n = dsm.n();
        let mut clusters = vec![vec![0], vec![1, 2]];
        clusters.push((3..n).collect());
        let p = Partition::from_clusters(n, clusters).unwrap();
        let winner = bid_auction(&dsm, &p, 0, 1.0, 1.0).unwrap();
        assert_eq!(winner, 1);
    }

    #[test]
    fn auction_keeps_isolated_entity_home() {
        let dsm = dsm_from("a b 1\nnode z\n");
        let p = Partition::from_clusters(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert_eq!(bid_auction(&dsm, &p, 2, 5.0, 1.0).unwrap(), 1);
    }

    #[test]
    fn auction_tie_goes_to_current_then_lowest_id() {
        // Entity 0 interacts equally with clusters {1} and {2}.
        let dsm = dsm_from("a b 1\na c 1\nnode d\n");
        let p = Partition::singletons(4);
        // Current cluster (a alone) bids 0; clusters 1 and 2 tie at 1.0.
        assert_eq!(bid_auction(&dsm, &p, 0, 1.0, 1.0).unwrap(), 1);
        // With powbid = 0, a's home cluster {a,b} and {c} tie at bid 1;
        // the current cluster keeps the entity.
        let p2 = Partition::from_clusters(4, vec![vec![0, 1], vec![2], vec![3]]).unwrap();
        assert_eq!(bid_auction(&dsm, &p2, 0, 1.0, 0.0).unwrap(), 0);
    }

    #[test]
    fn engine_bid_matches_public_auction() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(2..=14);
            let mut weights = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.random_bool(0.3) {
                        weights[i * n + j] = rng.random_range(1..=5) as f64;
                    }
                }
            }
            let labels = (0..n).map(|i| format!("e{i}")).collect();
            let dsm = Dsm::from_weights(labels, weights).unwrap();
            let clusters = rng.random_range(1..=n);
            let assignment: Vec<usize> =
                (0..n).map(|_| rng.random_range(0..clusters)).collect();
            let partition = Partition::from_assignment(assignment.clone());

            let mut engine = Engine::new(&dsm, 3.0);
            engine.assignment = assignment.clone();
            engine.sizes = vec![0; n];
            for &c in &assignment {
                engine.sizes[c] += 1;
            }

            let powdep = rng.random_range(0..=6) as f64;
            let powbid = rng.random_range(0..=3) as f64;
            for e in 0..n {
                let fast = engine.bid_winner(e, powdep, powbid);
                let slow = bid_auction(&dsm, &partition, e, powdep, powbid).unwrap();
                assert_eq!(fast, slow, "entity {e} powdep {powdep} powbid {powbid}");
            }
        }
    }

    #[test]
    fn edgeless_dsm_stays_singletons() {
        let dsm = dsm_from("node a\nnode b\nnode c\nnode d\nnode e\n");
        let result = dsmc_cluster(&dsm, &DsmcParams::default(), true).unwrap();
        assert_eq!(result.partition.num_clusters(), 5);
        assert_eq!(result.final_tcc, 0.0);
        assert_eq!(result.moves_attempted, 0);
        assert_eq!(result.status, RunStatus::Converged);
        result.partition.validate().unwrap();
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        let inst = gen_planted(3, 5, 0.7, 0.05, 21).unwrap();
        let dsm = Dsm::from_graph(&inst.graph);
        let params = DsmcParams {
            seed: 7,
            ..DsmcParams::default()
        };
        let a = dsmc_cluster(&dsm, &params, true).unwrap();
        let b = dsmc_cluster(&dsm, &params, true).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.final_tcc, b.final_tcc);
        assert_eq!(a.passes, b.passes);
        assert_eq!(a.moves_attempted, b.moves_attempted);
        assert_eq!(a.moves_accepted, b.moves_accepted);
        assert_eq!(a.annealing_accepts, b.annealing_accepts);
    }

    #[test]
    fn incremental_and_full_agree_on_integer_weights() {
        let inst = gen_planted(4, 5, 0.5, 0.05, 3).unwrap();
        let dsm = Dsm::from_graph(&inst.graph);
        let params = DsmcParams {
            seed: 13,
            ..DsmcParams::default()
        };
        let fast = dsmc_cluster(&dsm, &params, true).unwrap();
        let slow = dsmc_cluster(&dsm, &params, false).unwrap();
        assert_eq!(fast.partition, slow.partition);
        assert_eq!(fast.final_tcc, slow.final_tcc);
    }

    #[test]
    fn final_tcc_matches_fresh_recomputation() {
        let inst = gen_planted(4, 6, 0.4, 0.08, 17).unwrap();
        let dsm = Dsm::from_graph(&inst.graph);
        let params = DsmcParams {
            seed: 5,
            ..DsmcParams::default()
        };
        let result = dsmc_cluster(&dsm, &params, true).unwrap();
        let fresh = calc_coord_cost(&dsm, &result.partition, params.powcc).unwrap();
        assert_eq!(result.final_tcc, fresh.tcc(), "integer weights stay exact");
        result.partition.validate().unwrap();
        assert!(result.partition.num_clusters() <= dsm.n());
    }

    #[test]
    fn recovers_two_cliques() {
        let mut exact = 0;
        for seed in 0..20 {
            let inst = gen_planted(2, 5, 1.0, 0.0, 400 + seed).unwrap();
            let dsm = Dsm::from_graph(&inst.graph);
            let params = DsmcParams {
                seed,
                ..DsmcParams::default()
            };
            let result = dsmc_cluster(&dsm, &params, true).unwrap();
            if result.partition.same_grouping(&inst.truth) {
                exact += 1;
            }
        }
        assert!(exact >= 18, "only {exact}/20 seeds recovered the cliques");
    }

    #[test]
    fn zero_threshold_hits_the_pass_cap() {
        // With threshold 0 a zero-improvement pass never counts as stable,
        // so an edgeless DSM must run into the cap.
        let dsm = dsm_from("node a\nnode b\n");
        let params = DsmcParams {
            convergence_threshold: 0.0,
            ..DsmcParams::default()
        };
        let result = dsmc_cluster(&dsm, &params, true).unwrap();
        assert_eq!(result.status, RunStatus::PassCapReached);
        assert_eq!(result.passes, PASS_CAP_FACTOR * 2);
    }

    #[test]
    fn single_entity_converges() {
        let dsm = dsm_from("node only\n");
        let result = dsmc_cluster(&dsm, &DsmcParams::default(), true).unwrap();
        assert_eq!(result.partition.num_clusters(), 1);
        assert_eq!(result.status, RunStatus::Converged);
    }

    #[test]
    fn rejects_bad_params_and_empty_dsm() {
        let dsm = dsm_from("a b 1\n");
        let bad = DsmcParams {
            times: 0,
            ..DsmcParams::default()
        };
        assert!(dsmc_cluster(&dsm, &bad, true).is_err());
        let empty = Dsm::from_weights(vec![], vec![]).unwrap();
        assert!(dsmc_cluster(&empty, &DsmcParams::default(), true).is_err());
    }
}
