//! Lower bounds and exhaustive reference results for small instances.
//!
//! [`bounds`] gives the cheap lower bounds every schedule must respect:
//! critical-path and total-work bounds on the makespan, and the best
//! sequential postorder peak as the memory baseline.
//!
//! [`pareto_oracle`] enumerates, for unit-weight trees, every achievable
//! (makespan, peak memory) pair and keeps the Pareto-optimal ones. For unit
//! tasks any schedule can be rounded to whole time steps without raising
//! either objective, so a breadth-first search over step-synchronized
//! schedules is exact. Leaves under the same parent are interchangeable,
//! which collapses the state space from subsets to per-parent counts.
//! [`confirm_feasible`] is the bounded variant: it only asks whether a
//! schedule exists within given makespan and memory caps, pruning states
//! that provably cannot meet them.
//!
//! [`brute_force_sequential_memory`] finds the minimum sequential peak over
//! *all* topological orders (not only postorders) for arbitrary weights.
//!
//! [`check_reduction_schedule`] validates a claimed partition for the
//! gather-forest reduction trees of [`crate::gen::gen_3partition`] by
//! constructing the alternating leaves/gathers schedule and replaying it.

use std::collections::HashMap;

use thiserror::Error;

use crate::gen::ReductionBounds;
use crate::heuristics::{weighted_depth, Schedule};
use crate::postorder::best_postorder;
use crate::sim::check_schedule;
use crate::tree::{NodeId, TaskTree};

/// Why an oracle could not run.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    /// The tree is too large for exhaustive search.
    #[error("tree has {got} nodes, above the exhaustive search limit of {limit}")]
    TooLarge { got: usize, limit: usize },
    /// Exhaustive search over time steps needs unit work, no execution
    /// file, and unit outputs on every node.
    #[error("exhaustive search needs unit-weight nodes; node {} differs", .0 + 1)]
    NotPebble(NodeId),
    /// A claimed partition does not fit the reduction instance.
    #[error("invalid partition: {0}")]
    BadPartition(String),
    /// The tree is not a root-over-gathers-over-leaves forest.
    #[error("tree does not have the reduction shape: {0}")]
    BadShape(String),
}

/// Cheap lower bounds for scheduling `tree` on `p` processors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// max(total work / p, heaviest root-to-leaf path).
    pub lb_makespan: f64,
    /// Peak of the best sequential postorder.
    pub lb_memory: f64,
}

/// Computes [`Bounds`] for `tree` on `p` processors.
pub fn bounds(tree: &TaskTree, p: usize) -> Bounds {
    assert!(p >= 1, "need at least one processor");
    let critical_path = weighted_depth(tree)
        .into_iter()
        .fold(0.0f64, |acc, d| acc.max(d));
    Bounds {
        lb_makespan: (tree.total_work() / p as f64).max(critical_path),
        lb_memory: best_postorder(tree).peak,
    }
}

/// The set of Pareto-optimal (makespan, peak memory) pairs of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    /// Sorted by makespan ascending; memory is strictly descending.
    pub points: Vec<(f64, f64)>,
}

impl ParetoFront {
    /// Smallest achievable makespan.
    pub fn min_makespan(&self) -> Option<f64> {
        self.points.first().map(|pt| pt.0)
    }

    /// Smallest achievable peak memory.
    pub fn min_memory(&self) -> Option<f64> {
        self.points.last().map(|pt| pt.1)
    }

    /// Whether some front point is at least as good as `(makespan, memory)`
    /// in both objectives. True for every achievable pair.
    pub fn dominates(&self, makespan: f64, memory: f64) -> bool {
        self.points
            .iter()
            .any(|&(c, m)| c <= makespan && m <= memory)
    }
}

/// Limits for the exhaustive oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Refuse trees with more nodes than this.
    pub node_limit: usize,
    /// Only consider schedules finishing by this time.
    pub max_makespan: Option<f64>,
    /// Only consider schedules whose peak stays within this.
    pub max_memory: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            node_limit: 14,
            max_makespan: None,
            max_memory: None,
        }
    }
}

/// Precomputed structure for the step-synchronized search.
struct StepSearch<'a> {
    tree: &'a TaskTree,
    p: usize,
    /// Non-leaf nodes; bit `i` of a state mask covers `inner[i]`.
    inner: Vec<NodeId>,
    inner_idx: Vec<Option<usize>>,
    /// Leaf groups: `(parent, leaf count)`, keyed by parent in `group_idx`.
    groups: Vec<(NodeId, u32)>,
    group_idx: Vec<Option<usize>>,
    /// Depth in edges from the root.
    depth: Vec<usize>,
    max_makespan: Option<f64>,
    max_memory: Option<f64>,
}

/// Completed-node set, with interchangeable sibling leaves merged.
#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    inner_done: u64,
    leaf_done: Vec<u32>,
}

impl<'a> StepSearch<'a> {
    fn new(tree: &'a TaskTree, p: usize, config: &OracleConfig) -> Result<Self, OracleError> {
        assert!(p >= 1, "need at least one processor");
        let n = tree.node_count();
        if n > config.node_limit {
            return Err(OracleError::TooLarge {
                got: n,
                limit: config.node_limit,
            });
        }
        for v in 0..n {
            if tree.work(v) != 1.0 || tree.exec_size(v) != 0.0 || tree.out_size(v) != 1.0 {
                return Err(OracleError::NotPebble(v));
            }
        }
        let mut inner = Vec::new();
        let mut inner_idx = vec![None; n];
        let mut groups: Vec<(NodeId, u32)> = Vec::new();
        let mut group_idx = vec![None; n];
        for v in 0..n {
            if !tree.is_leaf(v) {
                inner_idx[v] = Some(inner.len());
                inner.push(v);
            }
        }
        assert!(inner.len() <= 64, "too many interior nodes to encode");
        for v in 0..n {
            if tree.is_leaf(v) {
                if let Some(parent) = tree.parent(v) {
                    let g = *group_idx[parent].get_or_insert_with(|| {
                        groups.push((parent, 0));
                        groups.len() - 1
                    });
                    groups[g].1 += 1;
                }
            }
        }
        Ok(StepSearch {
            tree,
            p,
            inner,
            inner_idx,
            groups,
            group_idx,
            depth: tree.depths(),
            max_makespan: config.max_makespan,
            max_memory: config.max_memory,
        })
    }

    fn initial(&self) -> State {
        State {
            inner_done: 0,
            leaf_done: vec![0; self.groups.len()],
        }
    }

    fn is_inner_done(&self, state: &State, v: NodeId) -> bool {
        state.inner_done >> self.inner_idx[v].unwrap() & 1 == 1
    }

    fn node_done(&self, state: &State, v: NodeId) -> bool {
        match self.inner_idx[v] {
            Some(i) => state.inner_done >> i & 1 == 1,
            // Leaves are only queried through group counts; a leaf is "all
            // done" when its group count is full, which callers check.
            None => unreachable!("leaf {v} has no done bit"),
        }
    }

    /// Output files resident after the completions in `state`: every done
    /// node whose parent has not finished yet still holds its output.
    fn resident(&self, state: &State) -> u64 {
        let mut live = 0u64;
        for (i, &v) in self.inner.iter().enumerate() {
            if state.inner_done >> i & 1 == 1 {
                match self.tree.parent(v) {
                    Some(parent) if self.is_inner_done(state, parent) => {}
                    _ => live += 1,
                }
            }
        }
        for (g, &(parent, _)) in self.groups.iter().enumerate() {
            if !self.is_inner_done(state, parent) {
                live += u64::from(state.leaf_done[g]);
            }
        }
        live
    }

    /// Inner nodes whose children are all complete and that are not yet run.
    fn ready_inner(&self, state: &State) -> Vec<NodeId> {
        let mut ready = Vec::new();
        'outer: for (i, &v) in self.inner.iter().enumerate() {
            if state.inner_done >> i & 1 == 1 {
                continue;
            }
            for &c in self.tree.children(v) {
                match self.inner_idx[c] {
                    Some(ci) => {
                        if state.inner_done >> ci & 1 == 0 {
                            continue 'outer;
                        }
                    }
                    None => {
                        let g = self.group_idx[v].unwrap();
                        if state.leaf_done[g] < self.groups[g].1 {
                            continue 'outer;
                        }
                    }
                }
            }
            ready.push(v);
        }
        ready
    }

    /// Longest chain of unfinished nodes, a lower bound on remaining steps.
    fn remaining_critical_path(&self, state: &State) -> usize {
        let mut cp = 0;
        for (i, &v) in self.inner.iter().enumerate() {
            if state.inner_done >> i & 1 == 0 {
                cp = cp.max(self.depth[v] + 1);
            }
        }
        for (g, &(parent, size)) in self.groups.iter().enumerate() {
            if state.leaf_done[g] < size {
                cp = cp.max(self.depth[parent] + 2);
            }
        }
        cp
    }

    fn remaining_count(&self, state: &State) -> usize {
        let total_leaves: u32 = self.groups.iter().map(|&(_, s)| s).sum();
        let done_leaves: u32 = state.leaf_done.iter().sum();
        let inner_left = self.inner.len() - state.inner_done.count_ones() as usize;
        inner_left + (total_leaves - done_leaves) as usize
    }

    /// Can a schedule continuing from `state` at `time` still meet the caps?
    fn viable(&self, state: &State, time: usize, peak: u64) -> bool {
        if let Some(cap) = self.max_memory {
            if peak as f64 > cap {
                return false;
            }
        }
        if let Some(cap) = self.max_makespan {
            let lower = self
                .remaining_critical_path(state)
                .max(self.remaining_count(state).div_ceil(self.p));
            if (time + lower) as f64 > cap {
                return false;
            }
        }
        true
    }

    /// Enumerates every canonical one-step extension of `state` and feeds
    /// `(next_state, memory_during_step)` to `visit`.
    fn for_each_step(&self, state: &State, mut visit: impl FnMut(State, u64)) {
        let ready = self.ready_inner(state);
        let base = self.resident(state);
        // Choose a subset of the ready interior nodes, then distribute the
        // remaining slots over the leaf groups.
        let subsets = 1u64 << ready.len();
        for subset in 0..subsets {
            let picked = subset.count_ones() as usize;
            if picked > self.p {
                continue;
            }
            let mut next = state.clone();
            for (j, &v) in ready.iter().enumerate() {
                if subset >> j & 1 == 1 {
                    next.inner_done |= 1 << self.inner_idx[v].unwrap();
                }
            }
            self.fill_groups(&next, 0, picked, base, &mut visit, picked > 0);
        }
    }

    fn fill_groups(
        &self,
        state: &State,
        g: usize,
        running: usize,
        base: u64,
        visit: &mut impl FnMut(State, u64),
        any: bool,
    ) {
        if g == self.groups.len() {
            if any {
                visit(state.clone(), base + running as u64);
            }
            return;
        }
        let take_max = (self.groups[g].1 - state.leaf_done[g]).min((self.p - running) as u32);
        for take in 0..=take_max {
            let mut next = state.clone();
            next.leaf_done[g] += take;
            self.fill_groups(
                &next,
                g + 1,
                running + take as usize,
                base,
                visit,
                any || take > 0,
            );
        }
    }

    fn root_done(&self, state: &State) -> bool {
        self.node_done(state, self.tree.root())
    }

    /// Breadth-first search over time steps. Returns every (makespan, peak)
    /// achieved by some schedule meeting the caps; `stop_at_first` returns
    /// as soon as one completion is found.
    fn explore(&self, stop_at_first: bool) -> Vec<(usize, u64)> {
        let mut outcomes = Vec::new();
        let mut best: HashMap<State, u64> = HashMap::new();
        let start = self.initial();
        if !self.viable(&start, 0, 0) {
            return outcomes;
        }
        let mut layer: Vec<(State, u64)> = vec![(start.clone(), 0)];
        best.insert(start, 0);
        let mut time = 0usize;
        while !layer.is_empty() {
            time += 1;
            let mut next_layer: HashMap<State, u64> = HashMap::new();
            for (state, peak) in &layer {
                self.for_each_step(state, |next, during| {
                    let next_peak = during.max(*peak);
                    if !self.viable(&next, time, next_peak) {
                        return;
                    }
                    match best.get(&next) {
                        Some(&seen) if seen <= next_peak => return,
                        _ => {}
                    }
                    best.insert(next.clone(), next_peak);
                    next_layer
                        .entry(next)
                        .and_modify(|entry| *entry = (*entry).min(next_peak))
                        .or_insert(next_peak);
                });
            }
            let mut expand = Vec::with_capacity(next_layer.len());
            for (state, peak) in next_layer {
                if self.root_done(&state) {
                    outcomes.push((time, peak));
                    if stop_at_first {
                        return outcomes;
                    }
                } else {
                    expand.push((state, peak));
                }
            }
            layer = expand;
        }
        outcomes
    }
}

/// Exact Pareto front of (makespan, peak memory) over all schedules of a
/// unit-weight tree on `p` processors. Fails on trees above
/// `config.node_limit` nodes or with non-unit weights; `config` caps, if
/// set, restrict the schedules considered.
pub fn pareto_oracle(
    tree: &TaskTree,
    p: usize,
    config: &OracleConfig,
) -> Result<ParetoFront, OracleError> {
    let search = StepSearch::new(tree, p, config)?;
    if tree.node_count() == 1 {
        // A lone unit task runs in one step holding just its output.
        let fits = config.max_makespan.map_or(true, |cap| 1.0 <= cap)
            && config.max_memory.map_or(true, |cap| 1.0 <= cap);
        return Ok(ParetoFront {
            points: if fits { vec![(1.0, 1.0)] } else { Vec::new() },
        });
    }
    let mut outcomes = search.explore(false);
    outcomes.sort_unstable();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut best_mem = u64::MAX;
    for (cmax, mem) in outcomes {
        if mem < best_mem {
            points.push((cmax as f64, mem as f64));
            best_mem = mem;
        }
    }
    Ok(ParetoFront { points })
}

/// Whether any schedule of the unit-weight `tree` on `p` processors meets
/// the makespan and memory caps in `config`. Sound and complete within the
/// node limit: it prunes states only when no continuation can meet the caps.
pub fn confirm_feasible(
    tree: &TaskTree,
    p: usize,
    config: &OracleConfig,
) -> Result<bool, OracleError> {
    let search = StepSearch::new(tree, p, config)?;
    if tree.node_count() == 1 {
        return Ok(config.max_makespan.map_or(true, |cap| 1.0 <= cap)
            && config.max_memory.map_or(true, |cap| 1.0 <= cap));
    }
    Ok(!search.explore(true).is_empty())
}

/// Minimum sequential peak memory over all topological orders, for
/// arbitrary weights. Exhaustive over completion subsets; refuses trees
/// with more than `node_limit` nodes.
pub fn brute_force_sequential_memory(
    tree: &TaskTree,
    node_limit: usize,
) -> Result<f64, OracleError> {
    let n = tree.node_count();
    if n > node_limit || n > 20 {
        return Err(OracleError::TooLarge {
            got: n,
            limit: node_limit.min(20),
        });
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let mut best = vec![f64::INFINITY; full as usize + 1];
    best[0] = 0.0;
    // Output files live from a node's completion until its parent's; while
    // node v runs after the set S, memory holds every live output in S plus
    // v's execution and output files.
    let resident = |mask: u32| -> f64 {
        let mut live = 0.0;
        for v in 0..n {
            if mask >> v & 1 == 1 {
                let held = match tree.parent(v) {
                    Some(parent) => mask >> parent & 1 == 0,
                    None => true,
                };
                if held {
                    live += tree.out_size(v);
                }
            }
        }
        live
    };
    for mask in 0..=full {
        if best[mask as usize].is_infinite() {
            continue;
        }
        let live = resident(mask);
        for v in 0..n {
            if mask >> v & 1 == 1 {
                continue;
            }
            if tree.children(v).iter().any(|&c| mask >> c & 1 == 0) {
                continue;
            }
            let during = live + tree.exec_size(v) + tree.out_size(v);
            let reached = during.max(best[mask as usize]);
            let slot = &mut best[(mask | 1 << v) as usize];
            if reached < *slot {
                *slot = reached;
            }
        }
    }
    Ok(best[full as usize])
}

/// Verdict on a claimed partition for a reduction instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionCheck {
    /// The alternating schedule respects precedence and exclusivity.
    pub feasible: bool,
    pub makespan: f64,
    pub peak_memory: f64,
    /// Makespan and peak stay within the instance bounds.
    pub within_bounds: bool,
}

/// Validates `partition` (triples of 0-based element indices) against a
/// tree from [`crate::gen::gen_3partition`], builds the alternating
/// schedule — each triple's leaves in one step on all processors, then its
/// three gathers — and replays it.
pub fn check_reduction_schedule(
    tree: &TaskTree,
    bounds: &ReductionBounds,
    partition: &[[usize; 3]],
) -> Result<ReductionCheck, OracleError> {
    let root = tree.root();
    let gathers: Vec<NodeId> = tree.children(root).to_vec();
    let m = partition.len();
    if gathers.len() != 3 * m {
        return Err(OracleError::BadPartition(format!(
            "{} triples cannot cover {} elements",
            m,
            gathers.len()
        )));
    }
    for &g in &gathers {
        if tree.is_leaf(g) || tree.children(g).iter().any(|&l| !tree.is_leaf(l)) {
            return Err(OracleError::BadShape(format!(
                "node {} under the root is not a gather over leaves",
                g + 1
            )));
        }
    }
    let mut seen = vec![false; 3 * m];
    for triple in partition {
        for &e in triple {
            if e >= 3 * m {
                return Err(OracleError::BadPartition(format!(
                    "element index {e} out of range"
                )));
            }
            if seen[e] {
                return Err(OracleError::BadPartition(format!(
                    "element {e} appears twice"
                )));
            }
            seen[e] = true;
        }
    }
    // Every triple must gather exactly the per-step processor supply.
    for (i, triple) in partition.iter().enumerate() {
        let leaves: usize = triple
            .iter()
            .map(|&e| tree.children(gathers[e]).len())
            .sum();
        if leaves != bounds.p {
            return Err(OracleError::BadPartition(format!(
                "triple {i} covers {leaves} leaves, expected {}",
                bounds.p
            )));
        }
    }

    let n = tree.node_count();
    let mut start = vec![0.0f64; n];
    let mut proc = vec![0usize; n];
    for (i, triple) in partition.iter().enumerate() {
        let leaf_time = (2 * i) as f64;
        let mut slot = 0;
        for &e in triple {
            for &leaf in tree.children(gathers[e]) {
                start[leaf] = leaf_time;
                proc[leaf] = slot;
                slot += 1;
            }
        }
        for (j, &e) in triple.iter().enumerate() {
            start[gathers[e]] = leaf_time + 1.0;
            proc[gathers[e]] = j;
        }
    }
    start[root] = (2 * m) as f64;
    proc[root] = 0;
    let schedule = Schedule {
        p: bounds.p,
        start,
        proc,
        label: "reduction",
    };
    let report = check_schedule(tree, &schedule);
    Ok(ReductionCheck {
        feasible: report.feasible,
        makespan: report.makespan,
        peak_memory: report.peak_memory,
        within_bounds: report.makespan <= bounds.cmax_bound as f64
            && report.peak_memory <= bounds.mem_bound as f64,
    })
}
