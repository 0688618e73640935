//! Direct multi-step planning: routes are rebuilt from whole template
//! sequences over a molecule-set graph, sampled under step-count or
//! leaf-size conditions and ranked.

mod graph;
mod scan;
mod table;

pub use graph::{reconstruct_routes, MolSetGraph, MolSetNode, TemplateSequence};
pub use scan::{compare_direct, condition_scan, dedup_routes, rank_direct_routes, DirectRoute, ScanVariant};
pub use table::{parse_steps_condition, TableRouteSampler};
