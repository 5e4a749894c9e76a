//! The coordination-cost objective, full and incremental.
//!
//! Every unordered entity pair {j, k} contributes its symmetric interaction
//! `w(j,k) + w(k,j)` once: scaled by `own_module_size^powcc` when both
//! entities share a module, by `n^powcc` otherwise. The incremental update
//! recomputes only the two modules touched by a single-entity move and is
//! exact, not an approximation: chained updates stay equal to a fresh full
//! computation (bitwise so for integer weights).

use std::collections::BTreeMap;

use crate::dsm::Dsm;
use crate::error::{Error, Result};
use crate::partition::{ClusterId, Partition};

/// `base^exp` routed through `powi` whenever the exponent is a small
/// integer. Cost and bid terms all use this one helper so that the full
/// and incremental cost paths round identically, and so integer-weight
/// arithmetic stays exact.
pub(crate) fn power(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= 64.0 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

/// Snapshot of the objective for one (DSM, partition, powcc) triple.
///
/// `module_raw` keeps, per module, the raw sum of internal pair
/// interactions; together with `total_raw` it is what makes the O(n)
/// per-move update possible.
#[derive(Debug, Clone, PartialEq)]
pub struct CostState {
    intra_cost: f64,
    extra_cost: f64,
    tcc: f64,
    module_raw: BTreeMap<ClusterId, f64>,
    raw_sum: f64,
    total_raw: f64,
    powcc: f64,
}

impl CostState {
    /// Interaction cost within modules: sum of `W_m * |m|^powcc`.
    pub fn intra_cost(&self) -> f64 {
        self.intra_cost
    }

    /// Interaction cost across modules: `(total_raw - sum W_m) * n^powcc`.
    pub fn extra_cost(&self) -> f64 {
        self.extra_cost
    }

    /// Total coordination cost, `intra_cost + extra_cost`.
    pub fn tcc(&self) -> f64 {
        self.tcc
    }

    /// Raw internal pair-weight sum of each module.
    pub fn module_raw(&self) -> &BTreeMap<ClusterId, f64> {
        &self.module_raw
    }

    /// Raw pair-weight sum over all unordered pairs; constant per DSM.
    pub fn total_raw(&self) -> f64 {
        self.total_raw
    }

    pub fn powcc(&self) -> f64 {
        self.powcc
    }
}

pub(crate) struct RawCosts {
    pub intra: f64,
    pub extra: f64,
    pub module_raw: Vec<f64>,
    pub raw_sum: f64,
    pub total_raw: f64,
}

/// Full cost over an assignment slice. `module_raw` is indexed by cluster
/// id, which therefore must stay below `capacity`. Shared by the public
/// entry point and the clustering engine so both round identically.
pub(crate) fn full_cost(dsm: &Dsm, assignment: &[usize], capacity: usize, powcc: f64) -> RawCosts {
    let n = dsm.n();
    let mut module_raw = vec![0.0; capacity];
    let mut sizes = vec![0usize; capacity];
    let mut total_raw = 0.0;
    for (e, &c) in assignment.iter().enumerate() {
        sizes[c] += 1;
        for &(j, pair) in dsm.neighbors(e) {
            if j > e {
                total_raw += pair;
                if assignment[j] == c {
                    module_raw[c] += pair;
                }
            }
        }
    }
    let mut intra = 0.0;
    let mut raw_sum = 0.0;
    for (c, &raw) in module_raw.iter().enumerate() {
        if sizes[c] > 0 {
            intra += raw * power(sizes[c] as f64, powcc);
            raw_sum += raw;
        }
    }
    let extra = (total_raw - raw_sum) * power(n as f64, powcc);
    RawCosts {
        intra,
        extra,
        module_raw,
        raw_sum,
        total_raw,
    }
}

/// Compute the coordination cost of a partition from scratch.
pub fn calc_coord_cost(dsm: &Dsm, partition: &Partition, powcc: f64) -> Result<CostState> {
    if partition.num_entities() != dsm.n() {
        return Err(Error::Argument(format!(
            "partition covers {} entities but the DSM has {}",
            partition.num_entities(),
            dsm.n()
        )));
    }
    if !powcc.is_finite() || powcc < 0.0 {
        return Err(Error::Argument(format!("powcc = {powcc} must be >= 0")));
    }
    let capacity = partition.cluster_ids().max().map_or(0, |c| c + 1);
    let raw = full_cost(dsm, partition.assignment(), capacity, powcc);
    let module_raw = partition
        .cluster_ids()
        .map(|c| (c, raw.module_raw[c]))
        .collect();
    Ok(CostState {
        intra_cost: raw.intra,
        extra_cost: raw.extra,
        tcc: raw.intra + raw.extra,
        module_raw,
        raw_sum: raw.raw_sum,
        total_raw: raw.total_raw,
        powcc,
    })
}

/// The cost delta of moving one entity between modules, shared by the
/// public update and the clustering engine.
///
/// Sizes are pre-move; `r_old`/`r_new` are the entity's symmetric
/// interaction with the remaining old members and the new members.
pub(crate) struct MoveDelta {
    pub w_old_after: f64,
    pub w_new_after: f64,
    pub intra_delta: f64,
}

pub(crate) fn move_delta(
    powcc: f64,
    w_old: f64,
    w_new: f64,
    s_old: usize,
    s_new: usize,
    r_old: f64,
    r_new: f64,
) -> MoveDelta {
    let w_old_after = w_old - r_old;
    let w_new_after = w_new + r_new;
    let intra_delta = w_old_after * power((s_old - 1) as f64, powcc)
        - w_old * power(s_old as f64, powcc)
        + w_new_after * power((s_new + 1) as f64, powcc)
        - w_new * power(s_new as f64, powcc);
    MoveDelta {
        w_old_after,
        w_new_after,
        intra_delta,
    }
}

/// Exact O(n) cost update for one entity move.
///
/// `partition` must already reflect the move (the entity sits in `new`;
/// `old` is absent if the move emptied it) while `state` is the cost of
/// the pre-move partition.
pub fn update_tcc(
    state: &CostState,
    dsm: &Dsm,
    partition: &Partition,
    entity: usize,
    old: ClusterId,
    new: ClusterId,
) -> Result<CostState> {
    if old == new {
        return Err(Error::Argument("move source and destination are the same".into()));
    }
    if partition.num_entities() != dsm.n() {
        return Err(Error::Argument(format!(
            "partition covers {} entities but the DSM has {}",
            partition.num_entities(),
            dsm.n()
        )));
    }
    if entity >= dsm.n() || partition.cluster_of(entity) != new {
        return Err(Error::Argument(format!(
            "entity {entity} is not in the destination cluster {new}"
        )));
    }
    let (&w_old, &w_new) = match (state.module_raw.get(&old), state.module_raw.get(&new)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Argument(
                "cost state does not cover the move's source and destination".into(),
            ))
        }
    };

    // Pre-move sizes, reconstructed from the post-move partition.
    let s_old = partition.members(old).len() + 1;
    let s_new = partition.members(new).len() - 1;
    if s_new == 0 {
        return Err(Error::Argument(format!(
            "destination cluster {new} did not exist before the move"
        )));
    }

    let mut r_old = 0.0;
    let mut r_new = 0.0;
    for &(x, pair) in dsm.neighbors(entity) {
        let c = partition.cluster_of(x);
        if c == old {
            r_old += pair;
        } else if c == new {
            r_new += pair;
        }
    }

    let delta = move_delta(state.powcc, w_old, w_new, s_old, s_new, r_old, r_new);
    let intra_cost = state.intra_cost + delta.intra_delta;
    let raw_sum = state.raw_sum - r_old + r_new;
    let extra_cost = (state.total_raw - raw_sum) * power(dsm.n() as f64, state.powcc);

    let mut module_raw = state.module_raw.clone();
    if partition.contains_cluster(old) {
        module_raw.insert(old, delta.w_old_after);
    } else {
        module_raw.remove(&old);
    }
    module_raw.insert(new, delta.w_new_after);

    Ok(CostState {
        intra_cost,
        extra_cost,
        tcc: intra_cost + extra_cost,
        module_raw,
        raw_sum,
        total_raw: state.total_raw,
        powcc: state.powcc,
    })
}
