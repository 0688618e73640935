use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::vocab::{Specials, Vocabulary};
use super::TokenizerError;

/// Character-level byte-pair encoding: base alphabet plus merge rules in
/// training order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpeModel {
    pub alphabet: Vec<String>,
    pub merges: Vec<(String, String)>,
}

impl BpeModel {
    /// Distinct token strings: alphabet then merge results.
    pub fn tokens(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let merged = self.merges.iter().map(|(a, b)| format!("{a}{b}"));
        for t in self.alphabet.iter().cloned().chain(merged) {
            if seen.insert(t.clone()) {
                out.push(t);
            }
        }
        out
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens().len()
    }

    /// Token strings for `s`; characters outside the alphabet stay as
    /// single-character pieces.
    pub fn encode_tokens(&self, s: &str) -> Vec<String> {
        let mut pieces: Vec<String> = s.chars().map(String::from).collect();
        for (a, b) in &self.merges {
            if pieces.len() < 2 {
                break;
            }
            pieces = merge_pair(&pieces, a, b);
        }
        pieces
    }

    /// Vocabulary of the model with the given special tokens.
    pub fn vocabulary(&self, specials: &Specials) -> Vocabulary {
        Vocabulary::new(specials, self, &[])
    }
}

fn merge_pair(pieces: &[String], a: &str, b: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(pieces.len());
    let mut i = 0;
    while i < pieces.len() {
        if i + 1 < pieces.len() && pieces[i] == a && pieces[i + 1] == b {
            out.push(format!("{a}{b}"));
            i += 2;
        } else {
            out.push(pieces[i].clone());
            i += 1;
        }
    }
    out
}

/// Greedy BPE training: repeatedly merges the most frequent adjacent pair
/// (ties to the lexicographically smallest pair) until the vocabulary
/// reaches `target_vocab` tokens or no pair occurs twice.
pub fn bpe_train(corpus: &[String], target_vocab: usize) -> Result<BpeModel, TokenizerError> {
    if corpus.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }
    let alphabet: Vec<String> = corpus
        .iter()
        .flat_map(|s| s.chars())
        .collect::<BTreeSet<char>>()
        .into_iter()
        .map(String::from)
        .collect();
    if target_vocab < alphabet.len() {
        return Err(TokenizerError::TargetTooSmall {
            target: target_vocab,
            alphabet: alphabet.len(),
        });
    }
    let mut word_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in corpus {
        *word_counts.entry(s.as_str()).or_default() += 1;
    }
    let mut words: Vec<(Vec<String>, u64)> = word_counts
        .into_iter()
        .map(|(w, c)| (w.chars().map(String::from).collect(), c))
        .collect();
    let mut vocab: BTreeSet<String> = alphabet.iter().cloned().collect();
    let mut merges = Vec::new();
    while vocab.len() < target_vocab {
        let mut counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (w, c) in &words {
            for pair in w.windows(2) {
                *counts.entry((pair[0].as_str(), pair[1].as_str())).or_default() += c;
            }
        }
        let best = counts
            .into_iter()
            .max_by(|(p, c), (q, d)| c.cmp(d).then_with(|| q.cmp(p)));
        let Some(((a, b), count)) = best else { break };
        if count < 2 {
            break;
        }
        let (a, b) = (a.to_string(), b.to_string());
        for (w, _) in &mut words {
            *w = merge_pair(w, &a, &b);
        }
        vocab.insert(format!("{a}{b}"));
        merges.push((a, b));
    }
    Ok(BpeModel { alphabet, merges })
}

/// Encodes `s` to ids of the model's vocabulary with default specials.
pub fn bpe_encode(m: &BpeModel, s: &str) -> Vec<u32> {
    let vocab = m.vocabulary(&Specials::default());
    vocab.encode(&m.encode_tokens(s))
}

pub fn bpe_decode(m: &BpeModel, ids: &[u32]) -> Result<String, TokenizerError> {
    let vocab = m.vocabulary(&Specials::default());
    vocab.decode(ids)
}
