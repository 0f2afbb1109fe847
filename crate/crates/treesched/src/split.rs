//! Splitting a tree into parallel subtrees plus a sequential remainder.
//!
//! [`split_subtrees`] repeatedly pops the heaviest subtree root off a
//! priority queue and replaces it with its children, scoring each queue
//! state by the makespan it implies: the heaviest remaining subtree runs in
//! parallel with up to `p - 1` others while everything popped so far and
//! every subtree beyond the first `p` runs sequentially afterwards. The
//! earliest state with the minimum score wins. The result is
//! makespan-optimal among all schedules of this shape.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::tree::{NodeId, TaskTree};

/// Result of [`split_subtrees`].
#[derive(Debug, Clone, PartialEq)]
pub struct Splitting {
    /// Subtree roots meant to run in parallel, heaviest first; at most `p`.
    pub parallel_roots: Vec<NodeId>,
    /// Subtree roots left over at the selected step, heaviest first; they run
    /// sequentially after the parallel phase.
    pub surplus_roots: Vec<NodeId>,
    /// Nodes popped before the selected step, in pop order. Each is an
    /// ancestor of a remaining subtree root and also runs sequentially.
    pub seq_set: Vec<NodeId>,
    /// Score of the selected step; equals the makespan of the schedule
    /// [`crate::heuristics::par_subtrees`] builds from this splitting.
    pub predicted_cmax: f64,
    /// Score of every step, starting with the unsplit tree.
    pub step_costs: Vec<f64>,
}

/// Total work in each node's subtree, itself included.
pub fn subtree_weights(tree: &TaskTree) -> Vec<f64> {
    let mut weight: Vec<f64> = (0..tree.node_count()).map(|v| tree.work(v)).collect();
    let td = tree.top_down();
    for &v in td.iter().rev() {
        if let Some(p) = tree.parent(v) {
            weight[p] += weight[v];
        }
    }
    weight
}

/// Queue key: heavier subtree first, then heavier own work, then smaller id.
#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueKey {
    subtree: f64,
    own: f64,
    id: NodeId,
}

impl Eq for QueueKey {}

impl Ord for QueueKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .subtree
            .total_cmp(&self.subtree)
            .then_with(|| other.own.total_cmp(&self.own))
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Splits the tree for `p` processors.
///
/// Every node is popped at most once, so there are at most `node_count`
/// scored steps beyond the initial one. Ties in the score pick the earliest
/// step; ties in the queue order resolve by own work, then by node id.
pub fn split_subtrees(tree: &TaskTree, p: usize) -> Splitting {
    assert!(p >= 1, "need at least one processor");
    let weights = subtree_weights(tree);
    let key = |v: NodeId| QueueKey {
        subtree: weights[v],
        own: tree.work(v),
        id: v,
    };

    let root = tree.root();
    let mut queue: BTreeSet<QueueKey> = BTreeSet::new();
    queue.insert(key(root));
    let mut queue_weight = weights[root];
    let mut seq_work = 0.0f64;
    let mut pops: Vec<NodeId> = Vec::new();
    let mut step_costs = vec![weights[root]];

    loop {
        let head = *queue.first().expect("queue never empties");
        // A subtree whose weight is all in its root cannot be split further.
        if !(head.subtree > head.own) {
            break;
        }
        queue.remove(&head);
        queue_weight -= head.subtree;
        seq_work += head.own;
        pops.push(head.id);
        for &c in tree.children(head.id) {
            queue.insert(key(c));
            queue_weight += weights[c];
        }
        let top: f64 = queue.iter().take(p).map(|k| k.subtree).sum();
        let new_head = queue.first().expect("popped node had children");
        step_costs.push(new_head.subtree + seq_work + (queue_weight - top));
    }

    let mut selected = 0;
    for (s, &c) in step_costs.iter().enumerate() {
        if c < step_costs[selected] {
            selected = s;
        }
    }

    // Replay the first `selected` pops to recover the queue at that step.
    let mut members: BTreeSet<QueueKey> = BTreeSet::new();
    members.insert(key(root));
    for &v in &pops[..selected] {
        members.remove(&key(v));
        for &c in tree.children(v) {
            members.insert(key(c));
        }
    }
    let ordered: Vec<NodeId> = members.iter().map(|k| k.id).collect();
    let cut = p.min(ordered.len());
    Splitting {
        parallel_roots: ordered[..cut].to_vec(),
        surplus_roots: ordered[cut..].to_vec(),
        seq_set: pops[..selected].to_vec(),
        predicted_cmax: step_costs[selected],
        step_costs,
    }
}
