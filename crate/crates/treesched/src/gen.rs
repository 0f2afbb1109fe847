//! Tree generators: structured worst-case families, random trees, and
//! factorization-style weights.
//!
//! The structured families all use unit work, no execution file, and unit
//! output files, so memory simply counts resident output files. Each
//! generator documents its node layout; layouts are deterministic, so tests
//! and file dumps are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tree::{NodeId, TaskTree};

/// Invalid generator parameters.
#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("{gen}: {what} must be at least {min}, got {got}")]
    TooSmall {
        gen: &'static str,
        what: &'static str,
        min: u64,
        got: u64,
    },
    #[error("3partition: element count must be a positive multiple of 3, got {0}")]
    BadTripleCount(usize),
    #[error("3partition: elements sum to {sum}, expected m*B = {expected}")]
    SumMismatch { sum: u64, expected: u64 },
    #[error(
        "3partition: element {index} is {value}, must lie strictly between B/4 and B/2 for B = {b}"
    )]
    ElementRange { index: usize, value: u64, b: u64 },
    #[error("comb: depth {depth} must be at least the chain count {chains}")]
    CombTooShallow { chains: usize, depth: usize },
    #[error("random: weight range ({lo}, {hi}) must satisfy 0 <= lo <= hi, finite")]
    BadWeightRange { lo: f64, hi: f64 },
    #[error("eta-mu: parameter vectors must match the tree size")]
    EtaMuLength,
    #[error("eta-mu: node {node}: eta and mu must be finite and at least 1")]
    EtaMuRange { node: NodeId },
}

/// Processor count and the two bounds that make the number-partitioning
/// instance from [`gen_3partition`] decidable by scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionBounds {
    /// Number of processors the schedule must use.
    pub p: usize,
    /// Peak memory the schedule must stay within.
    pub mem_bound: u64,
    /// Makespan the schedule must stay within.
    pub cmax_bound: u64,
}

/// Incremental builder; every node gets unit work, zero execution file,
/// and unit output until the caller replaces the weights.
struct Builder {
    parent: Vec<Option<NodeId>>,
}

impl Builder {
    fn rooted() -> (Self, NodeId) {
        (Builder { parent: vec![None] }, 0)
    }

    fn add(&mut self, parent: NodeId) -> NodeId {
        let id = self.parent.len();
        self.parent.push(Some(parent));
        id
    }

    fn add_chain(&mut self, from: NodeId, len: usize) -> NodeId {
        let mut tail = from;
        for _ in 0..len {
            tail = self.add(tail);
        }
        tail
    }

    fn pebble(self) -> TaskTree {
        let n = self.parent.len();
        TaskTree::new(self.parent, vec![1.0; n], vec![0.0; n], vec![1.0; n])
            .expect("builder produces valid trees")
    }
}

/// Root with `p * k` leaf children, unit weights. Node 0 is the root,
/// nodes 1..=p*k the leaves.
///
/// On `p` processors the leaves take at least `k` rounds, so no schedule
/// beats makespan `k + 1`, while one subtree per processor plus a sequential
/// remainder needs `p * (k - 1) + 2`.
pub fn gen_fork(p: usize, k: usize) -> Result<TaskTree, GenError> {
    for (what, got) in [("p", p), ("k", k)] {
        if got < 1 {
            return Err(GenError::TooSmall {
                gen: "fork",
                what,
                min: 1,
                got: got as u64,
            });
        }
    }
    let (mut b, root) = Builder::rooted();
    for _ in 0..p * k {
        b.add(root);
    }
    Ok(b.pebble())
}

/// Root over `n_subtrees` identical subtrees whose sequential peak is
/// `n_subtrees + delta` while the critical path stays at `delta + 2` nodes.
///
/// Each subtree hangs a spine `c_1 .. c_(delta-1)` under the root. Spine
/// node `c_j` carries a gather node `d_j` with `delta - j + 1` leaves, and
/// the last spine node additionally carries a two-node chain. Unit weights.
pub fn gen_inapprox(n_subtrees: usize, delta: usize) -> Result<TaskTree, GenError> {
    if n_subtrees < 1 {
        return Err(GenError::TooSmall {
            gen: "inapprox",
            what: "n_subtrees",
            min: 1,
            got: n_subtrees as u64,
        });
    }
    if delta < 2 {
        return Err(GenError::TooSmall {
            gen: "inapprox",
            what: "delta",
            min: 2,
            got: delta as u64,
        });
    }
    let (mut b, root) = Builder::rooted();
    for _ in 0..n_subtrees {
        let mut spine = b.add(root); // c_1
        for j in 1..delta {
            let d = b.add(spine);
            for _ in 0..(delta - j + 1) {
                b.add(d);
            }
            if j + 1 < delta {
                spine = b.add(spine); // c_(j+1)
            } else {
                b.add_chain(spine, 2); // the two-node tail chain
            }
        }
    }
    Ok(b.pebble())
}

/// Worst case for the inner-node-first policy: `k - 1` join nodes, each with
/// `p - 1` leaves and one inner child, ending in a `k + 1` node chain. Node 0
/// is the topmost join (the root); the longest root-to-leaf path visits `2k`
/// nodes. Unit weights.
///
/// A postorder touches one join's leaves at a time and peaks at `p + 1`
/// files, but a scheduler that prefers inner nodes drains every leaf while
/// it waits on the chain and holds `(k - 1) * (p - 1) + 1` files at once.
pub fn gen_inner_first_adversary(p: usize, k: usize) -> Result<TaskTree, GenError> {
    for (what, got) in [("p", p), ("k", k)] {
        if got < 2 {
            return Err(GenError::TooSmall {
                gen: "inner-adversary",
                what,
                min: 2,
                got: got as u64,
            });
        }
    }
    let (mut b, root) = Builder::rooted();
    let mut join = root;
    for _ in 1..k - 1 {
        for _ in 0..p - 1 {
            b.add(join);
        }
        join = b.add(join);
    }
    for _ in 0..p - 1 {
        b.add(join);
    }
    // Chain of k + 1 nodes below the last join; its tail is a leaf.
    let head = b.add(join);
    b.add_chain(head, k);
    Ok(b.pebble())
}

/// Worst case for the deepest-node-first policy: `chains` chains, all ending
/// at exactly `depth` edges below the root, merged pairwise by a spine of
/// binary joins. Node 0 is the root. Unit weights.
///
/// A postorder finishes one chain before touching the next and peaks at 3
/// files, but a scheduler that prefers deep nodes starts every equally-deep
/// leaf first and holds one file per chain.
pub fn gen_comb(chains: usize, depth: usize) -> Result<TaskTree, GenError> {
    if chains < 2 {
        return Err(GenError::TooSmall {
            gen: "comb",
            what: "chains",
            min: 2,
            got: chains as u64,
        });
    }
    if depth < chains {
        return Err(GenError::CombTooShallow { chains, depth });
    }
    let (mut b, root) = Builder::rooted();
    let mut spine = root;
    for j in 1..chains {
        spine = b.add(spine); // join at depth j
        b.add_chain(spine, depth - j);
    }
    // The last join carries the final chain as well.
    b.add_chain(spine, depth - (chains - 1));
    Ok(b.pebble())
}

/// Scheduling instance equivalent to partitioning `a` into triples of sum
/// `b`: a root over `3m` gather nodes, where gather `i` has `3m * a[i]`
/// leaves. Node 0 is the root, nodes 1..=3m the gathers in input order,
/// leaves appended gather by gather. Unit weights.
///
/// The returned bounds (`p = 3mB` processors, peak `3mB + 3m`, makespan
/// `2m + 1`) are achievable exactly when the partition exists; see
/// [`crate::oracle::check_reduction_schedule`].
pub fn gen_3partition(a: &[u64], b: u64) -> Result<(TaskTree, ReductionBounds), GenError> {
    if a.is_empty() || a.len() % 3 != 0 {
        return Err(GenError::BadTripleCount(a.len()));
    }
    let m = (a.len() / 3) as u64;
    let sum: u64 = a.iter().sum();
    if sum != m * b {
        return Err(GenError::SumMismatch {
            sum,
            expected: m * b,
        });
    }
    for (index, &value) in a.iter().enumerate() {
        // Strict bounds B/4 < value < B/2, in integer arithmetic.
        if 4 * value <= b || 2 * value >= b {
            return Err(GenError::ElementRange { index, value, b });
        }
    }
    let (mut builder, root) = Builder::rooted();
    let gathers: Vec<NodeId> = a.iter().map(|_| builder.add(root)).collect();
    let scale = 3 * m;
    for (i, &ai) in a.iter().enumerate() {
        for _ in 0..scale * ai {
            builder.add(gathers[i]);
        }
    }
    let bounds = ReductionBounds {
        p: (scale * b) as usize,
        mem_bound: scale * b + scale,
        cmax_bound: 2 * m + 1,
    };
    Ok((builder.pebble(), bounds))
}

/// Random tree: node `i` attaches to a uniformly chosen earlier node that
/// still has fewer than `max_children` children; work, execution size, and
/// output size draw uniformly from `weight_range` in that order per node
/// (the root draws too). Fixed seeds give identical trees.
pub fn gen_random(
    node_count: usize,
    seed: u64,
    max_children: usize,
    weight_range: (f64, f64),
) -> Result<TaskTree, GenError> {
    if node_count < 1 {
        return Err(GenError::TooSmall {
            gen: "random",
            what: "node_count",
            min: 1,
            got: node_count as u64,
        });
    }
    if max_children < 1 {
        return Err(GenError::TooSmall {
            gen: "random",
            what: "max_children",
            min: 1,
            got: max_children as u64,
        });
    }
    let (lo, hi) = weight_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(GenError::BadWeightRange { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent: Vec<Option<NodeId>> = vec![None];
    let mut child_count = vec![0usize; node_count];
    for i in 1..node_count {
        let candidates: Vec<NodeId> = (0..i).filter(|&v| child_count[v] < max_children).collect();
        let pick = candidates[rng.gen_range(0..candidates.len())];
        parent.push(Some(pick));
        child_count[pick] += 1;
    }
    let mut draw = |_: usize| -> f64 {
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    };
    let mut work = Vec::with_capacity(node_count);
    let mut exec = Vec::with_capacity(node_count);
    let mut out = Vec::with_capacity(node_count);
    for i in 0..node_count {
        work.push(draw(i));
        exec.push(draw(i));
        out.push(draw(i));
    }
    Ok(TaskTree::new(parent, work, exec, out).expect("generated tree is valid"))
}

/// Rewrites a tree's weights from two per-node factorization parameters:
/// a front size `eta` and a band count `mu`. Node `i` gets
///
/// * execution size `eta^2 + 2 eta (mu - 1)`,
/// * work `(2/3) eta^3 + eta^2 (mu - 1) + eta (mu - 1)^2`,
/// * output size `(mu - 1)^2`.
///
/// Both parameters must be finite and at least 1.
pub fn weights_from_eta_mu(
    shape: &TaskTree,
    eta: &[f64],
    mu: &[f64],
) -> Result<TaskTree, GenError> {
    let n = shape.node_count();
    if eta.len() != n || mu.len() != n {
        return Err(GenError::EtaMuLength);
    }
    let mut work = Vec::with_capacity(n);
    let mut exec = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (e, m) = (eta[i], mu[i]);
        if !(e.is_finite() && m.is_finite() && e >= 1.0 && m >= 1.0) {
            return Err(GenError::EtaMuRange { node: i });
        }
        let band = m - 1.0;
        exec.push(e * e + 2.0 * e * band);
        work.push(2.0 / 3.0 * e * e * e + e * e * band + e * band * band);
        out.push(band * band);
    }
    shape
        .with_weights(work, exec, out)
        .map_err(|_| GenError::EtaMuLength)
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Random tree with assembly-style weights: fronts grow with the subtree
/// they merge, and a node's band is a fraction of its front. Each node
/// draws a front factor `u` from `eta_range` and a band fraction `beta`
/// from `band_range` (one pair per node, in id order, from a stream
/// independent of the shape's) and gets
///
/// * `eta = max(1, u * sqrt(subtree size))`,
/// * `mu = 1 + beta * eta`,
///
/// fed through [`weights_from_eta_mu`]. Fixed seeds give identical trees.
pub fn gen_eta_mu(
    node_count: usize,
    seed: u64,
    max_children: usize,
    eta_range: (f64, f64),
    band_range: (f64, f64),
) -> Result<TaskTree, GenError> {
    for ((lo, hi), min) in [(eta_range, f64::MIN_POSITIVE), (band_range, 0.0)] {
        if !(lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi) {
            return Err(GenError::BadWeightRange { lo, hi });
        }
    }
    let shape = gen_random(node_count, seed, max_children, (1.0, 1.0))?;
    let sizes = shape.subtree_sizes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1); // the shape consumed stream 0
    let mut eta = Vec::with_capacity(node_count);
    let mut mu = Vec::with_capacity(node_count);
    for v in 0..node_count {
        let front = (draw(&mut rng, eta_range) * (sizes[v] as f64).sqrt()).max(1.0);
        let band = draw(&mut rng, band_range);
        eta.push(front);
        mu.push(1.0 + band * front);
    }
    weights_from_eta_mu(&shape, &eta, &mu)
}
