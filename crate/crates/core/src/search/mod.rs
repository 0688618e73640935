//! P-UCB Monte Carlo tree search over molecule-set nodes.
//!
//! A node holds the molecules still to be made; expansion takes the
//! largest open molecule, asks the policy for at most `expansions`
//! templates and creates one child per reactant set. Precursors found in
//! stock leave the set immediately, so a node with no open molecules is a
//! solution.

mod mcts;
mod routes;
mod stock;

pub use mcts::{
    puct_score, q_update, run_search, run_search_with, Expansion, SearchConfig, SearchError, SearchNode, SearchResult,
    SearchStats,
};
pub use routes::{extract_routes, route_to_node};
pub(crate) use routes::assemble_route;
pub use stock::{StockError, StockSet};
