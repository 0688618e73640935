use std::collections::BTreeMap;

use crate::template::{LibraryStatus, RetroTemplate, TemplateLibrary};

use super::bpe::BpeModel;
use super::vocab::{whole_token_name, Specials, Vocabulary, VocabularyFile};
use super::TokenizerError;

/// Templates seen more often than this get a dedicated token.
pub const WHOLE_TEMPLATE_MIN_COUNT: u64 = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateToken {
    /// A frequent library template; decodes to its canonical SMARTS.
    Whole { hash: String, smarts: String },
    Piece(String),
}

impl TemplateToken {
    pub fn text(&self) -> &str {
        match self {
            TemplateToken::Whole { smarts, .. } => smarts,
            TemplateToken::Piece(p) => p,
        }
    }

    /// Vocabulary token name.
    pub fn name(&self) -> String {
        match self {
            TemplateToken::Whole { hash, .. } => whole_token_name(hash),
            TemplateToken::Piece(p) => p.clone(),
        }
    }
}

/// Frequency-aware template tokenizer: templates whose library count
/// exceeds [`WHOLE_TEMPLATE_MIN_COUNT`] become one token, everything else
/// falls back to BPE pieces. Whole tokens decode to the library's
/// canonical SMARTS, so the tokenizer is lossless on canonical templates.
#[derive(Debug, Clone)]
pub struct FrequencyTokenizer {
    bpe: BpeModel,
    whole: BTreeMap<String, String>,
    specials: Specials,
}

impl FrequencyTokenizer {
    pub fn new(lib: &TemplateLibrary, bpe: BpeModel) -> FrequencyTokenizer {
        let whole = lib
            .entries()
            .into_iter()
            .filter(|e| e.count > WHOLE_TEMPLATE_MIN_COUNT)
            .map(|e| (e.hash.clone(), e.smarts.clone()))
            .collect();
        FrequencyTokenizer {
            bpe,
            whole,
            specials: Specials::default(),
        }
    }

    pub fn bpe(&self) -> &BpeModel {
        &self.bpe
    }

    /// Hashes of whole-template tokens, in vocabulary order.
    pub fn whole_template_hashes(&self) -> Vec<String> {
        self.whole.keys().cloned().collect()
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(&self.specials, &self.bpe, &self.whole_template_hashes())
    }

    pub fn vocabulary_file(&self) -> VocabularyFile {
        VocabularyFile::new(&self.bpe, &self.specials, self.whole_template_hashes())
    }

    pub fn tokenize(&self, t_smarts: &str) -> Vec<TemplateToken> {
        if let Ok(t) = RetroTemplate::parse(t_smarts) {
            let hash = t.hash();
            if let Some(smarts) = self.whole.get(&hash) {
                return vec![TemplateToken::Whole {
                    hash,
                    smarts: smarts.clone(),
                }];
            }
        }
        self.bpe
            .encode_tokens(t_smarts)
            .into_iter()
            .map(TemplateToken::Piece)
            .collect()
    }

    pub fn encode(&self, t_smarts: &str) -> Vec<u32> {
        let names: Vec<String> = self.tokenize(t_smarts).iter().map(|t| t.name()).collect();
        self.vocabulary().encode(&names)
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        let vocab = self.vocabulary();
        let mut out = String::new();
        for name in vocab.decode_tokens(ids)? {
            let whole = name
                .strip_prefix("<T:")
                .and_then(|h| h.strip_suffix('>'))
                .and_then(|h| self.whole.get(h));
            out.push_str(whole.map(String::as_str).unwrap_or(&name));
        }
        Ok(out)
    }
}

/// One-shot form of [`FrequencyTokenizer::tokenize`].
pub fn template_tokenize_freq(lib: &TemplateLibrary, bpe: &BpeModel, t_smarts: &str) -> Vec<TemplateToken> {
    if let Ok(t) = RetroTemplate::parse(t_smarts) {
        if let LibraryStatus::Known(c) = lib.lookup(&t) {
            if c > WHOLE_TEMPLATE_MIN_COUNT {
                let hash = t.hash();
                let smarts = lib.get(&hash).map(|e| e.smarts.clone()).unwrap_or_default();
                return vec![TemplateToken::Whole { hash, smarts }];
            }
        }
    }
    bpe.encode_tokens(t_smarts).into_iter().map(TemplateToken::Piece).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::bpe_train;

    fn template(s: &str) -> RetroTemplate {
        RetroTemplate::parse(s).unwrap()
    }

    #[test]
    fn threshold_is_strictly_above_forty() {
        let frequent = template("[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]");
        let boundary = template("[C:1](=[O:2])[O:3]>>[C:1](=[O:2])[OH].[O:3]");
        let unseen = template("[C:1][OH]>>[C:1]Br");
        let mut lib = TemplateLibrary::new();
        lib.insert(&frequent, 41);
        lib.insert(&boundary, 40);
        let corpus: Vec<String> = [&frequent, &boundary, &unseen]
            .iter()
            .map(|t| t.canonical_smarts().to_string())
            .collect();
        let bpe = bpe_train(&corpus, 40).unwrap();
        let one = template_tokenize_freq(&lib, &bpe, frequent.canonical_smarts());
        assert_eq!(one.len(), 1);
        assert!(matches!(one[0], TemplateToken::Whole { .. }));
        let pieces = template_tokenize_freq(&lib, &bpe, boundary.canonical_smarts());
        assert!(pieces.len() > 1 && pieces.iter().all(|t| matches!(t, TemplateToken::Piece(_))));
        let novel = template_tokenize_freq(&lib, &bpe, unseen.canonical_smarts());
        assert!(novel.iter().all(|t| matches!(t, TemplateToken::Piece(_))));

        let tok = FrequencyTokenizer::new(&lib, bpe);
        for t in [&frequent, &boundary, &unseen] {
            let s = t.canonical_smarts();
            assert_eq!(tok.decode(&tok.encode(s)).unwrap(), s);
        }
        assert_eq!(tok.whole_template_hashes(), vec![frequent.hash()]);
    }
}
