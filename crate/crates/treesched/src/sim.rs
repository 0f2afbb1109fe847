//! Schedule validation and memory profiling.
//!
//! [`check_schedule`] replays a schedule's literal timeline: it verifies
//! precedence, processor exclusivity, and processor ranges, then walks the
//! start and finish events accumulating resident memory. A node allocates
//! its execution and output files when it starts; when it finishes it frees
//! the execution file and its children's output files, while its own output
//! stays until the parent finishes (the root's output stays to the end).
//!
//! Memory is sampled on the open intervals between consecutive events. At an
//! event timestamp the default rule applies releases before allocations, so
//! a task finishing at `t` and another starting at `t` never double-count.
//! [`CoalesceRule::AllocationsFirst`] flips that and also counts the
//! transient at the timestamp itself; it can only report a higher peak.

use crate::heuristics::Schedule;
use crate::tree::TaskTree;

/// Ordering of releases and allocations that share a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoalesceRule {
    /// Free a finishing task's files before a starting task allocates.
    #[default]
    ReleasesFirst,
    /// Allocate first and count the transient where both tasks' files
    /// coexist.
    AllocationsFirst,
}

/// Outcome of replaying a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// Whether the schedule respects precedence, exclusivity, and processor
    /// range. Metrics below describe the literal timeline either way.
    pub feasible: bool,
    /// First violation found, if any, with 1-based node ids.
    pub violation: Option<String>,
    /// Latest finish time.
    pub makespan: f64,
    /// Peak resident memory.
    pub peak_memory: f64,
    /// Breakpoints `(time, level)`: the resident memory on the open interval
    /// following each event time. Ends at the root's output size.
    pub trace: Vec<(f64, f64)>,
}

fn find_violation(tree: &TaskTree, sched: &Schedule) -> Option<String> {
    let n = tree.node_count();
    for v in 0..n {
        if !sched.start[v].is_finite() || sched.start[v] < 0.0 {
            return Some(format!(
                "node {}: invalid start time {}",
                v + 1,
                sched.start[v]
            ));
        }
        if sched.proc[v] >= sched.p {
            return Some(format!(
                "node {}: processor {} out of range for p = {}",
                v + 1,
                sched.proc[v],
                sched.p
            ));
        }
    }
    for v in 0..n {
        if let Some(p) = tree.parent(v) {
            if sched.finish(tree, v) > sched.start[p] {
                return Some(format!(
                    "node {} starts at {} before its child {} finishes at {}",
                    p + 1,
                    sched.start[p],
                    v + 1,
                    sched.finish(tree, v)
                ));
            }
        }
    }
    let mut by_proc: Vec<Vec<usize>> = vec![Vec::new(); sched.p];
    for v in 0..n {
        by_proc[sched.proc[v]].push(v);
    }
    for (slot, nodes) in by_proc.iter_mut().enumerate() {
        // Order by start, then finish so zero-duration tasks slot in ahead
        // of a task that starts at the same instant and actually runs.
        nodes.sort_by(|&a, &b| {
            sched.start[a]
                .total_cmp(&sched.start[b])
                .then(sched.finish(tree, a).total_cmp(&sched.finish(tree, b)))
                .then(a.cmp(&b))
        });
        for pair in nodes.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if sched.finish(tree, a) > sched.start[b] {
                return Some(format!(
                    "processor {}: nodes {} and {} overlap",
                    slot,
                    a + 1,
                    b + 1
                ));
            }
        }
    }
    None
}

/// Replays `sched` under the default releases-first rule.
pub fn check_schedule(tree: &TaskTree, sched: &Schedule) -> SimReport {
    check_schedule_with(tree, sched, CoalesceRule::ReleasesFirst)
}

/// Replays `sched` under an explicit coalescing rule.
pub fn check_schedule_with(tree: &TaskTree, sched: &Schedule, rule: CoalesceRule) -> SimReport {
    let n = tree.node_count();
    assert_eq!(sched.start.len(), n, "schedule does not match tree");
    assert_eq!(sched.proc.len(), n, "schedule does not match tree");
    let violation = find_violation(tree, sched);
    let makespan = sched.makespan(tree);

    // Event kinds order releases of earlier-started tasks before allocations
    // and let zero-duration tasks free their files right after allocating,
    // so their files never reach any open interval.
    const REL_PRE: u8 = 0;
    const ALLOC: u8 = 1;
    const REL_ZERO: u8 = 2;
    let mut events: Vec<(f64, u8, f64)> = Vec::with_capacity(2 * n);
    for v in 0..n {
        events.push((sched.start[v], ALLOC, tree.exec_size(v) + tree.out_size(v)));
        let freed: f64 = tree.exec_size(v)
            + tree
                .children(v)
                .iter()
                .map(|&c| tree.out_size(c))
                .sum::<f64>();
        let kind = if tree.work(v) == 0.0 {
            REL_ZERO
        } else {
            REL_PRE
        };
        events.push((sched.finish(tree, v), kind, freed));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut level = 0.0f64;
    let mut peak = 0.0f64;
    if events.first().map_or(true, |e| e.0 > 0.0) {
        trace.push((0.0, 0.0));
    }
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        let mut released = 0.0;
        let mut allocated = 0.0;
        let mut released_zero = 0.0;
        while i < events.len() && events[i].0 == t {
            match events[i].1 {
                REL_PRE => released += events[i].2,
                ALLOC => allocated += events[i].2,
                _ => released_zero += events[i].2,
            }
            i += 1;
        }
        if rule == CoalesceRule::AllocationsFirst {
            peak = peak.max(level + allocated);
        }
        level = level - released + allocated - released_zero;
        trace.push((t, level));
        if t < makespan {
            peak = peak.max(level);
        }
    }

    SimReport {
        feasible: violation.is_none(),
        violation,
        makespan,
        peak_memory: peak,
        trace,
    }
}

/// The memory profile of `sched` as `(time, level)` breakpoints.
pub fn memory_trace(tree: &TaskTree, sched: &Schedule) -> Vec<(f64, f64)> {
    check_schedule(tree, sched).trace
}
