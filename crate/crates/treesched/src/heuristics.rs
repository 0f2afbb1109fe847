//! Parallel scheduling heuristics.
//!
//! Two families are provided. [`par_subtrees`] and [`par_subtrees_optim`]
//! run whole subtrees on separate processors and the leftovers sequentially,
//! which keeps memory close to a sequential traversal. [`par_inner_first`]
//! and [`par_deepest_first`] are event-driven list schedulers that keep all
//! processors busy and differ only in how they rank ready nodes. All four
//! are deterministic: every tie-break ends at node ids.

use crate::postorder::best_postorder;
use crate::split::{split_subtrees, subtree_weights};
use crate::tree::{NodeId, TaskTree};

/// A complete assignment of start times and processors.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Number of processors the schedule was built for.
    pub p: usize,
    /// Start time per node.
    pub start: Vec<f64>,
    /// Processor per node, in `0..p`.
    pub proc: Vec<usize>,
    /// Name of the heuristic that produced the schedule.
    pub label: &'static str,
}

impl Schedule {
    pub fn finish(&self, tree: &TaskTree, v: NodeId) -> f64 {
        self.start[v] + tree.work(v)
    }

    pub fn makespan(&self, tree: &TaskTree) -> f64 {
        (0..tree.node_count())
            .map(|v| self.finish(tree, v))
            .fold(0.0, f64::max)
    }
}

/// Work-weighted distance from each node to the root, both endpoints
/// included. The maximum over all nodes is the critical path length.
pub fn weighted_depth(tree: &TaskTree) -> Vec<f64> {
    let mut wd = vec![0.0f64; tree.node_count()];
    for v in tree.top_down() {
        let above = tree.parent(v).map_or(0.0, |p| wd[p]);
        wd[v] = above + tree.work(v);
    }
    wd
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PolicyKind {
    InnerFirst,
    DeepestFirst,
}

/// Ranking of ready nodes for [`list_schedule`].
///
/// `inner_first` runs any ready inner node before any leaf, deeper inner
/// nodes first, and otherwise follows the input order, which is meant to be
/// a memory-friendly postorder. `deepest_first` runs the node with the
/// largest work-weighted root distance first, preferring inner nodes on
/// ties, and otherwise follows the input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityPolicy {
    kind: PolicyKind,
    input_order: Vec<NodeId>,
    label: &'static str,
}

impl PriorityPolicy {
    pub fn inner_first(input_order: Vec<NodeId>) -> Self {
        PriorityPolicy {
            kind: PolicyKind::InnerFirst,
            input_order,
            label: "par-inner-first",
        }
    }

    pub fn deepest_first(input_order: Vec<NodeId>) -> Self {
        PriorityPolicy {
            kind: PolicyKind::DeepestFirst,
            input_order,
            label: "par-deepest-first",
        }
    }

    /// Static priority rank per node; 0 runs first.
    fn ranks(&self, tree: &TaskTree) -> Vec<usize> {
        let n = tree.node_count();
        assert_eq!(self.input_order.len(), n, "input order must cover the tree");
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in self.input_order.iter().enumerate() {
            assert!(
                v < n && pos[v] == usize::MAX,
                "input order must be a permutation"
            );
            pos[v] = i;
        }
        let mut nodes: Vec<NodeId> = (0..n).collect();
        match self.kind {
            PolicyKind::InnerFirst => {
                let depth = tree.depths();
                nodes.sort_by(|&a, &b| match (tree.is_leaf(a), tree.is_leaf(b)) {
                    (false, true) => std::cmp::Ordering::Less,
                    (true, false) => std::cmp::Ordering::Greater,
                    (false, false) => depth[b].cmp(&depth[a]).then(pos[a].cmp(&pos[b])),
                    (true, true) => pos[a].cmp(&pos[b]),
                });
            }
            PolicyKind::DeepestFirst => {
                let wd = weighted_depth(tree);
                nodes.sort_by(|&a, &b| {
                    wd[b]
                        .total_cmp(&wd[a])
                        .then((tree.is_leaf(a) as u8).cmp(&(tree.is_leaf(b) as u8)))
                        .then(pos[a].cmp(&pos[b]))
                });
            }
        }
        let mut rank = vec![0usize; n];
        for (r, &v) in nodes.iter().enumerate() {
            rank[v] = r;
        }
        rank
    }
}

/// Event-driven list scheduling on `p` processors.
///
/// All leaves are ready at time zero. At each event time every node
/// finishing exactly then completes first, newly ready nodes join the pool,
/// and then ready nodes go to idle processors, best rank to the
/// lowest-indexed processor. Simultaneous events coalesce by exact time
/// equality, which is reliable here because tied times arise as identical
/// sums of work values.
pub fn list_schedule(tree: &TaskTree, p: usize, policy: &PriorityPolicy) -> Schedule {
    assert!(p >= 1, "need at least one processor");
    let n = tree.node_count();
    let rank = policy.ranks(tree);
    let mut node_of_rank = vec![0usize; n];
    for v in 0..n {
        node_of_rank[rank[v]] = v;
    }

    let mut ready = std::collections::BinaryHeap::new();
    let mut waiting: Vec<usize> = (0..n).map(|v| tree.children(v).len()).collect();
    for v in 0..n {
        if waiting[v] == 0 {
            ready.push(std::cmp::Reverse(rank[v]));
        }
    }

    let mut start = vec![0.0f64; n];
    let mut proc = vec![0usize; n];
    let mut running: Vec<Option<(NodeId, f64)>> = vec![None; p];
    let mut done = 0usize;
    let mut t = 0.0f64;
    loop {
        // Fill idle processors in index order from the ready pool.
        for slot in 0..p {
            if running[slot].is_none() {
                if let Some(std::cmp::Reverse(r)) = ready.pop() {
                    let v = node_of_rank[r];
                    start[v] = t;
                    proc[v] = slot;
                    running[slot] = Some((v, t + tree.work(v)));
                } else {
                    break;
                }
            }
        }
        if done == n {
            break;
        }
        let next = running
            .iter()
            .flatten()
            .map(|&(_, f)| f)
            .fold(f64::INFINITY, f64::min);
        assert!(next.is_finite(), "scheduler stalled with work remaining");
        for slot in 0..p {
            if let Some((v, f)) = running[slot] {
                if f == next {
                    running[slot] = None;
                    done += 1;
                    if let Some(parent) = tree.parent(v) {
                        waiting[parent] -= 1;
                        if waiting[parent] == 0 {
                            ready.push(std::cmp::Reverse(rank[parent]));
                        }
                    }
                }
            }
        }
        t = next;
    }
    Schedule {
        p,
        start,
        proc,
        label: policy.label,
    }
}

/// List scheduling that runs inner nodes as soon as possible, using the
/// memory-minimizing postorder as the base order.
pub fn par_inner_first(tree: &TaskTree, p: usize) -> Schedule {
    let order = best_postorder(tree).order;
    list_schedule(tree, p, &PriorityPolicy::inner_first(order))
}

/// List scheduling that runs the node furthest from the root first, using
/// the memory-minimizing postorder as the base order.
pub fn par_deepest_first(tree: &TaskTree, p: usize) -> Schedule {
    let order = best_postorder(tree).order;
    list_schedule(tree, p, &PriorityPolicy::deepest_first(order))
}

/// Index of the subtree root, if any, that owns each node. Ancestors of the
/// given roots stay unowned.
fn owners(tree: &TaskTree, roots: &[NodeId]) -> Vec<Option<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; tree.node_count()];
    for (i, &r) in roots.iter().enumerate() {
        owner[r] = Some(i);
    }
    for v in tree.top_down() {
        if owner[v].is_none() {
            if let Some(p) = tree.parent(v) {
                owner[v] = owner[p];
            }
        }
    }
    owner
}

/// Runs the split subtrees in parallel, one processor each, then everything
/// else sequentially on processor 0.
///
/// Each subtree executes in the memory-minimizing postorder, and the
/// sequential remainder follows the same whole-tree postorder filtered to
/// its nodes, so the parallel phase costs at most one postorder peak per
/// processor and the remainder adds one more. The makespan always equals
/// the splitting's predicted score.
pub fn par_subtrees(tree: &TaskTree, p: usize) -> Schedule {
    let split = split_subtrees(tree, p);
    let order = best_postorder(tree).order;
    let owner = owners(tree, &split.parallel_roots);

    let n = tree.node_count();
    let mut start = vec![0.0f64; n];
    let mut proc = vec![0usize; n];
    let mut load = vec![0.0f64; split.parallel_roots.len()];
    for &v in &order {
        if let Some(i) = owner[v] {
            start[v] = load[i];
            proc[v] = i;
            load[i] += tree.work(v);
        }
    }
    let parallel_end = load.iter().copied().fold(0.0, f64::max);
    let mut cursor = parallel_end;
    for &v in &order {
        if owner[v].is_none() {
            start[v] = cursor;
            proc[v] = 0;
            cursor += tree.work(v);
        }
    }
    Schedule {
        p,
        start,
        proc,
        label: "par-subtrees",
    }
}

/// Like [`par_subtrees`], but balances every split-off subtree (parallel and
/// surplus alike) across all processors: subtrees go to the least-loaded
/// processor in non-increasing weight order and run back-to-back, and only
/// the popped ancestors stay sequential after all processors drain. Never
/// slower than [`par_subtrees`], usually faster, at some memory cost.
pub fn par_subtrees_optim(tree: &TaskTree, p: usize) -> Schedule {
    let split = split_subtrees(tree, p);
    let order = best_postorder(tree).order;
    let weights = subtree_weights(tree);

    // parallel_roots then surplus_roots is exactly the queue order, which is
    // already non-increasing in subtree weight.
    let roots: Vec<NodeId> = split
        .parallel_roots
        .iter()
        .chain(&split.surplus_roots)
        .copied()
        .collect();
    let owner = owners(tree, &roots);
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); roots.len()];
    for &v in &order {
        if let Some(i) = owner[v] {
            members[i].push(v);
        }
    }

    let n = tree.node_count();
    let mut start = vec![0.0f64; n];
    let mut proc = vec![0usize; n];
    let mut load = vec![0.0f64; p];
    for (i, _) in roots.iter().enumerate() {
        let slot = (0..p)
            .min_by(|&a, &b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
            .unwrap();
        for &v in &members[i] {
            start[v] = load[slot];
            proc[v] = slot;
            load[slot] += tree.work(v);
        }
        let _ = weights; // loads already accumulate exactly the subtree weights
    }
    let parallel_end = load.iter().copied().fold(0.0, f64::max);
    let mut cursor = parallel_end;
    for &v in &order {
        if owner[v].is_none() {
            start[v] = cursor;
            proc[v] = 0;
            cursor += tree.work(v);
        }
    }
    Schedule {
        p,
        start,
        proc,
        label: "par-subtrees-optim",
    }
}

/// The memory-minimizing postorder run on processor 0; the sequential
/// baseline.
pub fn seq_postorder_schedule(tree: &TaskTree, p: usize) -> Schedule {
    assert!(p >= 1, "need at least one processor");
    let order = best_postorder(tree).order;
    let n = tree.node_count();
    let mut start = vec![0.0f64; n];
    let mut cursor = 0.0f64;
    for &v in &order {
        start[v] = cursor;
        cursor += tree.work(v);
    }
    Schedule {
        p,
        start,
        proc: vec![0; n],
        label: "seq-postorder",
    }
}

/// The schedulers exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    ParSubtrees,
    ParSubtreesOptim,
    ParInnerFirst,
    ParDeepestFirst,
    SeqPostorder,
}

impl Heuristic {
    /// The four parallel heuristics, in reporting order.
    pub const PARALLEL: [Heuristic; 4] = [
        Heuristic::ParSubtrees,
        Heuristic::ParSubtreesOptim,
        Heuristic::ParInnerFirst,
        Heuristic::ParDeepestFirst,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Heuristic::ParSubtrees => "par-subtrees",
            Heuristic::ParSubtreesOptim => "par-subtrees-optim",
            Heuristic::ParInnerFirst => "par-inner-first",
            Heuristic::ParDeepestFirst => "par-deepest-first",
            Heuristic::SeqPostorder => "seq-postorder",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "par-subtrees" => Some(Heuristic::ParSubtrees),
            "par-subtrees-optim" => Some(Heuristic::ParSubtreesOptim),
            "par-inner-first" => Some(Heuristic::ParInnerFirst),
            "par-deepest-first" => Some(Heuristic::ParDeepestFirst),
            "seq-postorder" => Some(Heuristic::SeqPostorder),
            _ => None,
        }
    }

    pub fn schedule(self, tree: &TaskTree, p: usize) -> Schedule {
        match self {
            Heuristic::ParSubtrees => par_subtrees(tree, p),
            Heuristic::ParSubtreesOptim => par_subtrees_optim(tree, p),
            Heuristic::ParInnerFirst => par_inner_first(tree, p),
            Heuristic::ParDeepestFirst => par_deepest_first(tree, p),
            Heuristic::SeqPostorder => seq_postorder_schedule(tree, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_comb, gen_fork, gen_inner_first_adversary, gen_random};
    use crate::sim::check_schedule;

    #[test]
    fn weighted_depth_accumulates_down() {
        let t = TaskTree::new(
            vec![None, Some(0), Some(1)],
            vec![1.0, 2.0, 3.0],
            vec![0.0; 3],
            vec![1.0; 3],
        )
        .unwrap();
        assert_eq!(weighted_depth(&t), vec![1.0, 3.0, 6.0]);

        let fork = gen_fork(2, 3).unwrap();
        assert_eq!(
            weighted_depth(&fork),
            vec![1.0; 1]
                .into_iter()
                .chain(vec![2.0; 6])
                .collect::<Vec<_>>()
        );

        let z = TaskTree::new(
            vec![None, Some(0)],
            vec![1.5, 0.0],
            vec![0.0; 2],
            vec![1.0; 2],
        )
        .unwrap();
        assert_eq!(weighted_depth(&z), vec![1.5, 1.5]);
    }

    #[test]
    fn fork_list_schedule_packs_rounds() {
        let t = gen_fork(2, 3).unwrap();
        let s = par_inner_first(&t, 2);
        assert_eq!(s.makespan(&t), 4.0);
        // Three rounds of two leaves, then the root.
        assert_eq!(s.start[0], 3.0);
        let report = check_schedule(&t, &s);
        assert!(report.feasible);
        assert_eq!(report.peak_memory, 7.0);
    }

    #[test]
    fn single_node_runs_immediately() {
        let t = TaskTree::new(vec![None], vec![2.0], vec![1.0], vec![1.0]).unwrap();
        for s in [
            par_inner_first(&t, 3),
            par_deepest_first(&t, 3),
            par_subtrees(&t, 3),
            par_subtrees_optim(&t, 3),
        ] {
            assert_eq!(s.start, vec![0.0]);
            assert_eq!(s.proc, vec![0]);
        }
    }

    #[test]
    fn one_processor_inner_first_replays_postorder() {
        for seed in 0..25 {
            let t = gen_random(14, seed, 4, (1.0, 5.0)).unwrap();
            let order = best_postorder(&t).order;
            let s = list_schedule(&t, 1, &PriorityPolicy::inner_first(order.clone()));
            let mut by_start: Vec<NodeId> = (0..t.node_count()).collect();
            by_start.sort_by(|&a, &b| s.start[a].total_cmp(&s.start[b]));
            assert_eq!(by_start, order, "seed {seed}");
        }
    }

    #[test]
    fn chain_makes_policies_identical() {
        let t = TaskTree::new(
            vec![None, Some(0), Some(1), Some(2)],
            vec![2.0, 1.0, 4.0, 0.5],
            vec![1.0; 4],
            vec![2.0; 4],
        )
        .unwrap();
        let a = par_inner_first(&t, 3);
        let b = par_deepest_first(&t, 3);
        assert_eq!(a.start, b.start);
        assert_eq!(a.proc, b.proc);
        assert_eq!(a.makespan(&t), t.total_work());
    }

    #[test]
    fn adversary_floods_inner_first() {
        let t = gen_inner_first_adversary(3, 4).unwrap();
        let s = par_inner_first(&t, 3);
        let report = check_schedule(&t, &s);
        assert!(report.feasible);
        // All (k-1)(p-1)+1 = 7 leaf files end up resident at once.
        assert!(report.peak_memory >= 7.0);
        assert_eq!(best_postorder(&t).peak, 4.0);
    }

    #[test]
    fn comb_floods_deepest_first() {
        let t = gen_comb(6, 10).unwrap();
        let s = par_deepest_first(&t, 6);
        let report = check_schedule(&t, &s);
        assert!(report.feasible);
        assert!(report.peak_memory >= 6.0);
        let f = par_deepest_first(&gen_fork(2, 3).unwrap(), 2);
        assert_eq!(f.makespan(&gen_fork(2, 3).unwrap()), 4.0);
    }

    #[test]
    fn par_subtrees_fork_metrics() {
        let t = gen_fork(2, 3).unwrap();
        let s = par_subtrees(&t, 2);
        let report = check_schedule(&t, &s);
        assert!(report.feasible);
        assert_eq!(report.makespan, 6.0);
        assert_eq!(report.peak_memory, 7.0);
    }

    #[test]
    fn par_subtrees_makespan_matches_prediction() {
        for seed in 0..30 {
            let t = gen_random(40, seed, 4, (0.5, 6.0)).unwrap();
            for p in [1, 2, 4] {
                let predicted = crate::split::split_subtrees(&t, p).predicted_cmax;
                let s = par_subtrees(&t, p);
                let got = s.makespan(&t);
                assert!(
                    (got - predicted).abs() <= 1e-9 * predicted.max(1.0),
                    "seed {seed} p {p}: {got} vs {predicted}"
                );
                assert!(check_schedule(&t, &s).feasible, "seed {seed} p {p}");
            }
        }
    }

    #[test]
    fn optim_balances_fork_leaves() {
        let t = gen_fork(2, 3).unwrap();
        let s = par_subtrees_optim(&t, 2);
        assert_eq!(s.makespan(&t), 4.0);
        assert!(check_schedule(&t, &s).feasible);

        let t = gen_fork(3, 2).unwrap();
        let s = par_subtrees_optim(&t, 3);
        assert_eq!(s.makespan(&t), 3.0);
    }

    #[test]
    fn optim_equals_plain_without_surplus() {
        // Single child under the root: the split yields subtrees that all fit
        // the processors, so there is nothing to rebalance.
        let t = TaskTree::new(
            vec![
                None,
                Some(0),
                Some(1),
                Some(1),
                Some(2),
                Some(2),
                Some(3),
                Some(3),
            ],
            vec![1.0; 8],
            vec![0.0; 8],
            vec![1.0; 8],
        )
        .unwrap();
        let a = par_subtrees(&t, 4);
        let b = par_subtrees_optim(&t, 4);
        let ra = check_schedule(&t, &a);
        let rb = check_schedule(&t, &b);
        assert!(ra.feasible && rb.feasible);
        assert_eq!(ra.makespan, rb.makespan);
        assert_eq!(ra.peak_memory, rb.peak_memory);
    }

    #[test]
    fn optim_never_slower_than_plain() {
        for seed in 0..30 {
            let t = gen_random(35, seed, 3, (0.5, 4.0)).unwrap();
            for p in [2, 4] {
                let plain = par_subtrees(&t, p).makespan(&t);
                let optim = par_subtrees_optim(&t, p).makespan(&t);
                assert!(optim <= plain + 1e-9 * plain.max(1.0), "seed {seed} p {p}");
            }
        }
    }

    #[test]
    fn doubling_work_scales_time_not_memory() {
        for seed in 0..15 {
            let t = gen_random(25, seed, 4, (0.5, 4.0)).unwrap();
            let doubled = t
                .with_weights(
                    (0..t.node_count()).map(|v| 2.0 * t.work(v)).collect(),
                    (0..t.node_count()).map(|v| t.exec_size(v)).collect(),
                    (0..t.node_count()).map(|v| t.out_size(v)).collect(),
                )
                .unwrap();
            for h in Heuristic::PARALLEL {
                let a = h.schedule(&t, 3);
                let b = h.schedule(&doubled, 3);
                let ra = check_schedule(&t, &a);
                let rb = check_schedule(&doubled, &b);
                assert_eq!(rb.makespan, 2.0 * ra.makespan, "seed {seed} {}", h.label());
                assert_eq!(rb.peak_memory, ra.peak_memory, "seed {seed} {}", h.label());
            }
        }
    }

    #[test]
    fn schedules_are_deterministic() {
        for seed in [3u64, 17] {
            let t = gen_random(60, seed, 5, (0.0, 9.0)).unwrap();
            for h in Heuristic::PARALLEL {
                let a = h.schedule(&t, 4);
                let b = h.schedule(&t, 4);
                assert_eq!(a, b);
            }
        }
    }
}
