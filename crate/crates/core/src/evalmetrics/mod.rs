//! Route representation and evaluation: route cost, tree edit distance,
//! pessimistic single-step top-k, route accuracy, solve rate and
//! stratified reports.

mod accuracy;
mod report;
mod route;
mod ted;

pub use accuracy::{
    accuracy_from_ranks, ground_truth_rank, route_accuracy, route_rank, solve_rate, topk_single_step,
    topk_single_step_with, Placement, ReactantKey,
};
pub use report::{stratified_report, BucketRow, EvalReport, ReportError, Strata, TargetResult, DEFAULT_FREQUENCY_EDGES};
pub use route::{route_cost, RouteStep, RouteTree, DEFAULT_EPS, DEFAULT_YIELD};
pub use ted::{ordered_tree_edit_distance, tree_edit_distance};
