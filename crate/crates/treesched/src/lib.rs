//! Memory-aware multiprocessor scheduling of tree-shaped task graphs.
//!
//! The unit of work is an in-tree of tasks: every node holds an output file
//! that its parent consumes, so computation flows from the leaves to the
//! root. Running a node requires its children's output files, a scratch
//! execution file, and room for its own output file, all resident in a
//! single shared memory. The crate provides
//!
//! * the tree model with a plain-text file format and a set of structured
//!   generators ([`tree`], [`gen`]),
//! * memory-optimal sequential postorder traversal ([`postorder`]),
//! * a makespan-optimal decomposition of the tree into parallel subtrees
//!   ([`split`]),
//! * parallel scheduling heuristics that trade memory for makespan
//!   ([`heuristics`]),
//! * an event-driven schedule checker and memory profiler ([`sim`]),
//! * exhaustive oracles and lower bounds for small instances ([`oracle`]),
//! * batch benchmarking with CSV reports ([`report`]).

pub mod gen;
pub mod heuristics;
pub mod oracle;
pub mod postorder;
pub mod report;
pub mod sim;
pub mod split;
pub mod tree;

pub use gen::{
    gen_3partition, gen_comb, gen_eta_mu, gen_fork, gen_inapprox, gen_inner_first_adversary,
    gen_random, weights_from_eta_mu, ReductionBounds,
};
pub use heuristics::{
    list_schedule, par_deepest_first, par_inner_first, par_subtrees, par_subtrees_optim,
    seq_postorder_schedule, weighted_depth, Heuristic, PriorityPolicy, Schedule,
};
pub use oracle::{
    bounds, brute_force_sequential_memory, check_reduction_schedule, confirm_feasible,
    pareto_oracle, Bounds, OracleConfig, ParetoFront,
};
pub use postorder::{best_postorder, postorder_peak, PostOrder};
pub use report::{bench_corpus, run_scenario, BenchReport, RunRecord};
pub use sim::{check_schedule, memory_trace, CoalesceRule, SimReport};
pub use split::{split_subtrees, subtree_weights, Splitting};
pub use tree::{parse_tree, serialize_tree, NodeId, TaskTree};
