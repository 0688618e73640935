use std::collections::HashSet;

use crate::template::{LibraryStatus, TemplateLibrary};

use super::ReactionRecord;

pub const DEFAULT_RARITY_CUTOFF: u64 = 10;
pub const DEFAULT_MW_THRESHOLD: f64 = 500.0;

/// Library count of a record's template; unknown or missing templates
/// count 0.
pub fn template_count(r: &ReactionRecord, library: &TemplateLibrary) -> u64 {
    match r.template_hash.as_deref().map(|h| library.lookup_hash(h)) {
        Some(LibraryStatus::Known(c)) => c,
        _ => 0,
    }
}

/// Reactions whose template occurs at most `rarity_cutoff` times go to the
/// hard test set, together with every copy of the same reaction, so the
/// two sides share no reaction hash.
pub fn build_hard_split(
    reactions: &[ReactionRecord],
    library: &TemplateLibrary,
    rarity_cutoff: u64,
) -> (Vec<ReactionRecord>, Vec<ReactionRecord>) {
    let hard_hashes: HashSet<String> = reactions
        .iter()
        .filter(|r| template_count(r, library) <= rarity_cutoff)
        .map(ReactionRecord::reaction_hash)
        .collect();
    let (hard, train): (Vec<ReactionRecord>, Vec<ReactionRecord>) = reactions
        .iter()
        .cloned()
        .partition(|r| hard_hashes.contains(&r.reaction_hash()));
    (train, hard)
}

/// Products heavier than `threshold_da` go to the out-of-distribution set.
pub fn split_by_molweight(reactions: &[ReactionRecord], threshold_da: f64) -> (Vec<ReactionRecord>, Vec<ReactionRecord>) {
    let (ood, train): (Vec<ReactionRecord>, Vec<ReactionRecord>) = reactions
        .iter()
        .cloned()
        .partition(|r| r.product().molecular_weight() > threshold_da);
    (train, ood)
}
