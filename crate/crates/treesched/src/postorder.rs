//! Sequential postorder traversals and their peak memory.
//!
//! Running the tree on one processor in postorder keeps exactly one partial
//! "frontier" per ancestor chain: when node `i` runs, memory holds the output
//! files of every already-finished node whose parent has not finished, plus
//! `i`'s execution file and output file. [`postorder_peak`] measures that
//! profile for a caller-supplied postorder; [`best_postorder`] constructs the
//! postorder minimizing it by visiting each node's child subtrees in
//! non-increasing order of `peak(child) - out_size(child)`.

use thiserror::Error;

use crate::tree::{NodeId, TaskTree};

/// A sequential order together with its peak memory.
#[derive(Debug, Clone, PartialEq)]
pub struct PostOrder {
    /// Every node exactly once, children always before parents, each subtree
    /// contiguous.
    pub order: Vec<NodeId>,
    /// Peak memory of the sequential execution in `order`.
    pub peak: f64,
}

/// The supplied order cannot be executed as a postorder.
#[derive(Debug, Error, PartialEq)]
pub enum OrderError {
    #[error("order must list every node exactly once")]
    NotPermutation,
    #[error(
        "order is not a postorder: subtree of node {0} is not a contiguous block ending at it"
    )]
    NotPostorder(NodeId),
}

fn check_postorder(tree: &TaskTree, order: &[NodeId]) -> Result<(), OrderError> {
    let n = tree.node_count();
    if order.len() != n {
        return Err(OrderError::NotPermutation);
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(OrderError::NotPermutation);
        }
        pos[v] = i;
    }
    // A postorder places each subtree in the window of its size that ends at
    // the subtree root, so the min and max position inside each subtree are
    // pinned down exactly.
    let sizes = tree.subtree_sizes();
    let mut min_pos = pos.clone();
    let mut max_pos = pos.clone();
    let td = tree.top_down();
    for &v in td.iter().rev() {
        if let Some(p) = tree.parent(v) {
            min_pos[p] = min_pos[p].min(min_pos[v]);
            max_pos[p] = max_pos[p].max(max_pos[v]);
        }
    }
    for v in 0..n {
        if max_pos[v] != pos[v] || min_pos[v] != pos[v] + 1 - sizes[v] {
            return Err(OrderError::NotPostorder(v));
        }
    }
    Ok(())
}

/// Peak memory of executing `order` sequentially.
///
/// While node `i` runs, memory holds every resident output file plus
/// `exec_size(i) + out_size(i)`; when it finishes, its children's outputs are
/// freed and its own output becomes resident.
pub fn postorder_peak(tree: &TaskTree, order: &[NodeId]) -> Result<f64, OrderError> {
    check_postorder(tree, order)?;
    let mut resident = 0.0f64;
    let mut peak = 0.0f64;
    for &v in order {
        peak = peak.max(resident + tree.exec_size(v) + tree.out_size(v));
        for &c in tree.children(v) {
            resident -= tree.out_size(c);
        }
        resident += tree.out_size(v);
    }
    Ok(peak)
}

/// The memory-minimizing postorder and its peak.
///
/// Children are visited in non-increasing `peak(child) - out_size(child)`,
/// ties broken by ascending node id, which is optimal among postorders.
pub fn best_postorder(tree: &TaskTree) -> PostOrder {
    let n = tree.node_count();
    let mut peak = vec![0.0f64; n];
    let mut visit: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let td = tree.top_down();
    for &v in td.iter().rev() {
        let mut kids: Vec<NodeId> = tree.children(v).to_vec();
        // Stable sort keeps ascending ids among equal keys.
        kids.sort_by(|&a, &b| {
            let ka = peak[a] - tree.out_size(a);
            let kb = peak[b] - tree.out_size(b);
            kb.total_cmp(&ka)
        });
        let mut prefix = 0.0f64;
        let mut m = 0.0f64;
        for &c in &kids {
            m = m.max(prefix + peak[c]);
            prefix += tree.out_size(c);
        }
        m = m.max(prefix + tree.exec_size(v) + tree.out_size(v));
        peak[v] = m;
        visit[v] = kids;
    }

    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(NodeId, usize)> = vec![(tree.root(), 0)];
    while let Some((v, next)) = stack.last_mut() {
        if *next < visit[*v].len() {
            let c = visit[*v][*next];
            *next += 1;
            stack.push((c, 0));
        } else {
            order.push(*v);
            stack.pop();
        }
    }
    PostOrder {
        order,
        peak: peak[tree.root()],
    }
}
