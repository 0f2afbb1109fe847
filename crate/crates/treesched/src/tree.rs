//! In-tree task graphs with per-node memory demands.
//!
//! Every node `i` carries three non-negative sizes: `work(i)` is its
//! processing time, `exec_size(i)` the scratch file it needs while it runs,
//! and `out_size(i)` the output file it produces. A node can only run once
//! all of its children have finished, and it must hold its children's output
//! files, its execution file, and its own output file in memory while it
//! runs. The children's output files and the execution file are freed when
//! the node completes; the output file stays resident until the parent
//! completes (the root's output survives to the end of the schedule).
//!
//! Trees are stored with 0-based contiguous node indexes. The text format
//! (see [`parse_tree`]) numbers nodes 1..n and marks the root with parent 0.

use std::fmt::Write as _;

use thiserror::Error;

/// Index of a node inside a [`TaskTree`], 0-based and contiguous.
pub type NodeId = usize;

/// Rooted in-tree of tasks; edges point from child to parent.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTree {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    work: Vec<f64>,
    exec_size: Vec<f64>,
    out_size: Vec<f64>,
    root: NodeId,
}

/// Structural validation failure when assembling a [`TaskTree`].
#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("tree must have at least one node")]
    Empty,
    #[error("weight vectors must all have length {nodes}, got {got}")]
    LengthMismatch { nodes: usize, got: usize },
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("node {0}: parent index out of range")]
    ParentRange(NodeId),
    #[error("node {0} is its own parent")]
    SelfParent(NodeId),
    #[error("parent links contain a cycle through node {0}")]
    Cycle(NodeId),
    #[error("node {node}: {field} must be finite and non-negative, got {value}")]
    BadWeight {
        node: NodeId,
        field: &'static str,
        value: f64,
    },
}

impl TaskTree {
    /// Builds a tree from parent links (`None` marks the root) and per-node
    /// weights, validating every structural invariant.
    pub fn new(
        parent: Vec<Option<NodeId>>,
        work: Vec<f64>,
        exec_size: Vec<f64>,
        out_size: Vec<f64>,
    ) -> Result<Self, TreeError> {
        let n = parent.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        for v in [&work, &exec_size, &out_size] {
            if v.len() != n {
                return Err(TreeError::LengthMismatch {
                    nodes: n,
                    got: v.len(),
                });
            }
        }
        let roots: Vec<NodeId> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            if let Some(p) = parent[i] {
                if p >= n {
                    return Err(TreeError::ParentRange(i));
                }
                if p == i {
                    return Err(TreeError::SelfParent(i));
                }
                children[p].push(i);
            }
        }
        // Children were appended in index order, so each list is ascending.
        for (checks, field) in [
            (&work, "work"),
            (&exec_size, "exec_size"),
            (&out_size, "out_size"),
        ] {
            for (i, &x) in checks.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(TreeError::BadWeight {
                        node: i,
                        field,
                        value: x,
                    });
                }
            }
        }
        let tree = TaskTree {
            parent,
            children,
            work,
            exec_size,
            out_size,
            root,
        };
        // Every node reaches the root iff the parent links are acyclic.
        let reached = tree.top_down().len();
        if reached != n {
            let seen: Vec<bool> = {
                let mut seen = vec![false; n];
                for v in tree.top_down() {
                    seen[v] = true;
                }
                seen
            };
            let culprit = (0..n).find(|&i| !seen[i]).unwrap();
            return Err(TreeError::Cycle(culprit));
        }
        Ok(tree)
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    /// Children of `v` in ascending index order.
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v].is_empty()
    }

    /// Processing time of `v`.
    pub fn work(&self, v: NodeId) -> f64 {
        self.work[v]
    }

    /// Size of the scratch file `v` needs while it runs.
    pub fn exec_size(&self, v: NodeId) -> f64 {
        self.exec_size[v]
    }

    /// Size of the output file `v` produces.
    pub fn out_size(&self, v: NodeId) -> f64 {
        self.out_size[v]
    }

    pub fn total_work(&self) -> f64 {
        self.work.iter().sum()
    }

    /// True iff every node has unit work, no execution file, and unit output,
    /// the weights used by the pebble-style constructions and the exhaustive
    /// oracle.
    pub fn is_pebble(&self) -> bool {
        (0..self.node_count())
            .all(|v| self.work[v] == 1.0 && self.exec_size[v] == 0.0 && self.out_size[v] == 1.0)
    }

    /// Nodes in an order that always lists a parent before its children
    /// (iterative, so recursion depth never limits tree size). Reversing it
    /// gives a children-first order for bottom-up passes.
    pub fn top_down(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v].iter().copied());
        }
        order
    }

    /// Edge distance from the root for every node.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.node_count()];
        for v in self.top_down() {
            if let Some(p) = self.parent[v] {
                depth[v] = depth[p] + 1;
            }
        }
        depth
    }

    /// Number of nodes in each node's subtree, itself included.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.node_count()];
        let order = self.top_down();
        for &v in order.iter().rev() {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Same shape with different weights.
    pub fn with_weights(
        &self,
        work: Vec<f64>,
        exec_size: Vec<f64>,
        out_size: Vec<f64>,
    ) -> Result<TaskTree, TreeError> {
        TaskTree::new(self.parent.clone(), work, exec_size, out_size)
    }
}

/// Failure to read a tree from the text format.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("missing node count line")]
    MissingCount,
    #[error("line {line}: invalid node count `{text}`")]
    BadCount { line: usize, text: String },
    #[error("line {line}: expected `id parent work exec_size out_size`")]
    BadLine { line: usize },
    #[error("line {line}: invalid number in field `{field}`")]
    BadNumber { line: usize, field: &'static str },
    #[error("line {line}: node id {id} out of range 1..={count}")]
    IdRange { line: usize, id: u64, count: usize },
    #[error("line {line}: parent {parent} out of range 0..={count}")]
    ParentRange {
        line: usize,
        parent: u64,
        count: usize,
    },
    #[error("line {line}: duplicate definition of node {id}")]
    DuplicateId { line: usize, id: u64 },
    #[error("line {line}: unexpected extra node line")]
    ExtraLine { line: usize },
    #[error("node {id} is never defined")]
    MissingNode { id: u64 },
    #[error("invalid tree structure: {0}")]
    Structure(#[from] TreeError),
}

/// Reads a tree from the plain-text format.
///
/// Lines starting with `#` and blank lines are skipped. The first data line
/// holds the node count `n`; each of the following `n` lines reads
/// `id parent work exec_size out_size` with ids 1..=n and parent 0 marking
/// the root. Weights are decimal literals. Node id `k` in the file becomes
/// index `k - 1`.
pub fn parse_tree(text: &str) -> Result<TaskTree, ParseError> {
    let mut data = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (count_line, count_text) = data.next().ok_or(ParseError::MissingCount)?;
    let n: usize = count_text.parse().map_err(|_| ParseError::BadCount {
        line: count_line,
        text: count_text.to_string(),
    })?;
    if n == 0 {
        return Err(ParseError::BadCount {
            line: count_line,
            text: count_text.to_string(),
        });
    }

    let mut parent: Vec<Option<Option<NodeId>>> = vec![None; n];
    let mut work = vec![0.0; n];
    let mut exec_size = vec![0.0; n];
    let mut out_size = vec![0.0; n];
    let mut seen = 0usize;
    for (line, l) in data {
        if seen == n {
            return Err(ParseError::ExtraLine { line });
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(ParseError::BadLine { line });
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|_| ParseError::BadNumber { line, field: "id" })?;
        if id < 1 || id as usize > n {
            return Err(ParseError::IdRange { line, id, count: n });
        }
        let p: u64 = fields[1].parse().map_err(|_| ParseError::BadNumber {
            line,
            field: "parent",
        })?;
        if p as usize > n {
            return Err(ParseError::ParentRange {
                line,
                parent: p,
                count: n,
            });
        }
        let idx = (id - 1) as usize;
        if parent[idx].is_some() {
            return Err(ParseError::DuplicateId { line, id });
        }
        let num = |s: &str, field: &'static str| -> Result<f64, ParseError> {
            s.parse().map_err(|_| ParseError::BadNumber { line, field })
        };
        parent[idx] = Some(if p == 0 { None } else { Some((p - 1) as usize) });
        work[idx] = num(fields[2], "work")?;
        exec_size[idx] = num(fields[3], "exec_size")?;
        out_size[idx] = num(fields[4], "out_size")?;
        seen += 1;
    }
    let parent: Vec<Option<NodeId>> = parent
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or(ParseError::MissingNode { id: (i + 1) as u64 }))
        .collect::<Result<_, _>>()?;
    Ok(TaskTree::new(parent, work, exec_size, out_size)?)
}

/// Writes a tree in the plain-text format read by [`parse_tree`].
///
/// Weights print in the shortest decimal form that parses back to the same
/// value, so serialize/parse round-trips exactly.
pub fn serialize_tree(tree: &TaskTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", tree.node_count());
    for v in 0..tree.node_count() {
        let p = tree.parent(v).map_or(0, |p| p + 1);
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            v + 1,
            p,
            tree.work(v),
            tree.exec_size(v),
            tree.out_size(v)
        );
    }
    out
}
