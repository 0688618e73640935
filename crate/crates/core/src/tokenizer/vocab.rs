use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::bpe::BpeModel;
use super::TokenizerError;

pub fn condition_steps(n: usize) -> String {
    format!("<STEPS={n}>")
}

pub fn condition_leaf_atoms(n: usize) -> String {
    format!("<LEAF_ATOMS={n}>")
}

/// Reserved tokens placed at the start of every vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specials {
    pub pad: String,
    pub bos: String,
    pub eos: String,
    pub unk: String,
    pub conditions: Vec<String>,
}

impl Default for Specials {
    fn default() -> Specials {
        let mut conditions: Vec<String> = (1..=10).map(condition_steps).collect();
        conditions.extend((10..=40).step_by(5).map(condition_leaf_atoms));
        Specials {
            pad: "<PAD>".to_string(),
            bos: "<BOS>".to_string(),
            eos: "<EOS>".to_string(),
            unk: "<UNK>".to_string(),
            conditions,
        }
    }
}

impl Specials {
    fn all(&self) -> Vec<String> {
        let mut v = vec![self.pad.clone(), self.bos.clone(), self.eos.clone(), self.unk.clone()];
        v.extend(self.conditions.iter().cloned());
        v
    }
}

/// Token ↔ id maps. Ids are contiguous from 0: specials, alphabet, merge
/// results, then one `<T:hash>` token per whole template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    n_special: usize,
    unk: u32,
}

impl Vocabulary {
    pub fn new(specials: &Specials, bpe: &BpeModel, whole_template_hashes: &[String]) -> Vocabulary {
        let mut tokens: Vec<String> = Vec::new();
        let mut ids = HashMap::new();
        let mut push = |t: String, tokens: &mut Vec<String>| {
            if !ids.contains_key(&t) {
                ids.insert(t.clone(), tokens.len() as u32);
                tokens.push(t);
            }
        };
        for t in specials.all() {
            push(t, &mut tokens);
        }
        let n_special = tokens.len();
        for t in bpe.tokens() {
            push(t, &mut tokens);
        }
        for h in whole_template_hashes {
            push(whole_token_name(h), &mut tokens);
        }
        let unk = ids[&specials.unk];
        Vocabulary {
            tokens,
            ids,
            n_special,
            unk,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn is_special(&self, id: u32) -> bool {
        (id as usize) < self.n_special
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t).unwrap_or(self.unk)).collect()
    }

    /// Concatenated text of the non-special ids.
    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        Ok(self.decode_tokens(ids)?.concat())
    }

    pub fn decode_tokens(&self, ids: &[u32]) -> Result<Vec<String>, TokenizerError> {
        let mut out = Vec::new();
        for &id in ids {
            let t = self.token(id).ok_or(TokenizerError::UnknownId(id))?;
            if !self.is_special(id) {
                out.push(t.to_string());
            }
        }
        Ok(out)
    }
}

pub(crate) fn whole_token_name(hash: &str) -> String {
    format!("<T:{hash}>")
}

/// On-disk vocabulary: alphabet, ordered merges, specials and the hashes of
/// templates encoded as single tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyFile {
    pub alphabet: Vec<String>,
    pub merges: Vec<[String; 2]>,
    pub specials: Specials,
    pub whole_template_tokens: Vec<String>,
}

impl VocabularyFile {
    pub fn new(bpe: &BpeModel, specials: &Specials, whole_template_tokens: Vec<String>) -> VocabularyFile {
        VocabularyFile {
            alphabet: bpe.alphabet.clone(),
            merges: bpe.merges.iter().map(|(a, b)| [a.clone(), b.clone()]).collect(),
            specials: specials.clone(),
            whole_template_tokens,
        }
    }

    pub fn bpe(&self) -> BpeModel {
        BpeModel {
            alphabet: self.alphabet.clone(),
            merges: self.merges.iter().map(|[a, b]| (a.clone(), b.clone())).collect(),
        }
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(&self.specials, &self.bpe(), &self.whole_template_tokens)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vocabulary serializes")
    }

    pub fn from_json(text: &str) -> Result<VocabularyFile, TokenizerError> {
        serde_json::from_str(text).map_err(|e| TokenizerError::Format(e.to_string()))
    }
}
