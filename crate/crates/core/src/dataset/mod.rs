//! Reaction ingestion, filtering, benchmark splits and multi-step route
//! construction.

mod filter;
mod record;
mod routes;
mod split;

use std::path::Path;

pub use filter::{filter_reaction, unmapped_mcs_atoms, FilterReport, FilterRule};
pub use record::{read_records, write_records, RawRecord, ReactionRecord, RecordError};
pub use routes::{build_routes, is_subroute};
pub use split::{build_hard_split, split_by_molweight, template_count, DEFAULT_MW_THRESHOLD, DEFAULT_RARITY_CUTOFF};

use crate::search::{StockError, StockSet};

/// Loads a stock file, skipping unparseable lines (returned by number).
pub fn load_stock(path: &Path) -> Result<(StockSet, Vec<usize>), StockError> {
    let (stock, skipped) = StockSet::load(path)?;
    log::info!("loaded {} stock molecules from {}", stock.len(), path.display());
    Ok((stock, skipped))
}
