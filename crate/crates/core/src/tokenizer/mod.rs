//! Tokenizers for sequence models over molecules and templates: a regex
//! SMILES tokenizer, character-level BPE for template SMARTS, and a
//! frequency-aware template tokenizer that emits frequent templates as one
//! token.

mod bpe;
mod freq;
mod smiles;
mod vocab;

use thiserror::Error;

pub use bpe::{bpe_decode, bpe_encode, bpe_train, BpeModel};
pub use freq::{template_tokenize_freq, FrequencyTokenizer, TemplateToken, WHOLE_TEMPLATE_MIN_COUNT};
pub use smiles::tokenize_smiles;
pub use vocab::{condition_leaf_atoms, condition_steps, Specials, Vocabulary, VocabularyFile};

/// Vocabulary sizes reported for the reference models (BPE template
/// vocabulary, SMILES vocabulary, frequency tokenizer vocabulary). Kept for
/// documentation and comparison only.
pub const REFERENCE_BPE_TEMPLATE_VOCAB: usize = 348;
pub const REFERENCE_SMILES_VOCAB: usize = 121;
pub const REFERENCE_FREQUENCY_VOCAB: usize = 2651;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenizerError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("target vocabulary {target} is below the alphabet size {alphabet}")]
    TargetTooSmall { target: usize, alphabet: usize },
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("vocabulary file: {0}")]
    Format(String),
}
