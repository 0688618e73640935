//! Single-step template proposal: the backend interface, the engine-side
//! proposal pipeline (parse, dedupe, strict library filter, top-k), prior
//! normalization for tree search, an offline table backend and an HTTP
//! client for external policy servers.

mod http;
mod table;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::Molecule;
use crate::template::{RetroTemplate, TemplateLibrary};

pub use http::HttpPolicy;
pub use table::{build_table_policy, TablePolicy};

pub const SINGLE_STEP_BEAM_SIZE: usize = 100;
pub const MULTI_STEP_BEAM_SIZE: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("policy backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("policy backend returned an invalid response: {0}")]
    InvalidResponse(String),
    #[error("no reactions to build a table policy from")]
    EmptyDataset,
    #[error("strict mode needs a template library")]
    StrictWithoutLibrary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProposal {
    pub template: RetroTemplate,
    /// Natural log.
    pub log_prob: f64,
    pub condition: Option<String>,
}

/// A candidate as produced by a backend, before engine-side validation.
#[derive(Debug, Clone)]
pub struct RawProposal {
    pub smarts: String,
    pub log_prob: f64,
    /// Already parsed template, when the backend has one.
    pub template: Option<RetroTemplate>,
}

/// A sampled multi-step template sequence, templates as SMARTS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSample {
    pub templates: Vec<String>,
    pub log_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub k: usize,
    pub temperature: f64,
    pub strict: bool,
    /// Passed through to external backends.
    pub beam_size: usize,
}

impl Default for PolicyConfig {
    fn default() -> PolicyConfig {
        PolicyConfig {
            k: 10,
            temperature: 3.0,
            strict: false,
            beam_size: SINGLE_STEP_BEAM_SIZE,
        }
    }
}

/// Anything that can rank templates for a target.
pub trait PolicyBackend: Send + Sync {
    /// Up to `n` candidates (backends may return more or fewer).
    fn raw_proposals(&self, target: &Molecule, n: usize, condition: Option<&str>) -> Result<Vec<RawProposal>, PolicyError>;
}

/// Anything that can sample whole template sequences for a target.
pub trait RouteSampler: Send + Sync {
    fn sample_routes(&self, target: &Molecule, n_samples: usize, condition: Option<&str>) -> Result<Vec<RouteSample>, PolicyError>;
}

/// Result of one proposal call.
#[derive(Debug, Clone, Default)]
pub struct ProposalBatch {
    pub proposals: Vec<PolicyProposal>,
    /// Candidates dropped because their SMARTS did not parse or their
    /// log-probability was not finite.
    pub invalid: usize,
}

/// Validates, deduplicates (by template hash, keeping the best score),
/// strict-filters and truncates backend candidates.
pub fn propose(
    backend: &dyn PolicyBackend,
    target: &Molecule,
    cfg: &PolicyConfig,
    library: Option<&TemplateLibrary>,
    condition: Option<&str>,
) -> Result<ProposalBatch, PolicyError> {
    if cfg.strict && library.is_none() {
        return Err(PolicyError::StrictWithoutLibrary);
    }
    let request = if cfg.strict { cfg.k.max(cfg.beam_size) } else { cfg.k };
    let raw = backend.raw_proposals(target, request, condition)?;
    Ok(select(raw, cfg, library, condition))
}

pub(crate) fn select(
    raw: Vec<RawProposal>,
    cfg: &PolicyConfig,
    library: Option<&TemplateLibrary>,
    condition: Option<&str>,
) -> ProposalBatch {
    let mut invalid = 0;
    let mut best: Vec<(String, PolicyProposal)> = Vec::new();
    let mut slot: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for r in raw {
        if !r.log_prob.is_finite() {
            invalid += 1;
            continue;
        }
        let template = match r.template {
            Some(t) => t,
            None => match RetroTemplate::parse(&r.smarts) {
                Ok(t) => t,
                Err(e) => {
                    log::debug!("dropping unparseable template {}: {e}", r.smarts);
                    invalid += 1;
                    continue;
                }
            },
        };
        let hash = template.hash();
        let proposal = PolicyProposal {
            template,
            log_prob: r.log_prob,
            condition: condition.map(str::to_string),
        };
        match slot.get(&hash) {
            Some(&i) if best[i].1.log_prob >= proposal.log_prob => {}
            Some(&i) => best[i].1 = proposal,
            None => {
                slot.insert(hash.clone(), best.len());
                best.push((hash, proposal));
            }
        }
    }
    let mut proposals: Vec<PolicyProposal> = best
        .into_iter()
        .filter(|(h, _)| !cfg.strict || library.is_some_and(|l| l.get(h).is_some()))
        .map(|(_, p)| p)
        .collect();
    proposals.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
    proposals.truncate(cfg.k);
    ProposalBatch { proposals, invalid }
}

/// Temperature softmax over log-probabilities:
/// `exp(lp/T) / Σ exp(lp'/T)`.
pub fn normalize_priors(log_probs: &[f64], temperature: f64) -> Vec<f64> {
    assert!(temperature > 0.0, "temperature must be positive");
    if log_probs.is_empty() {
        return Vec::new();
    }
    let scaled: Vec<f64> = log_probs.iter().map(|lp| lp / temperature).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// A backend bundled with its configuration and optional library; counts
/// invalid candidates across calls.
pub struct Policy {
    backend: Arc<dyn PolicyBackend>,
    pub config: PolicyConfig,
    library: Option<Arc<TemplateLibrary>>,
    invalid: AtomicU64,
}

impl Policy {
    pub fn new(backend: Arc<dyn PolicyBackend>, config: PolicyConfig, library: Option<Arc<TemplateLibrary>>) -> Policy {
        Policy {
            backend,
            config,
            library,
            invalid: AtomicU64::new(0),
        }
    }

    pub fn propose(&self, target: &Molecule, condition: Option<&str>) -> Result<Vec<PolicyProposal>, PolicyError> {
        let batch = propose(self.backend.as_ref(), target, &self.config, self.library.as_deref(), condition)?;
        self.invalid.fetch_add(batch.invalid as u64, Ordering::Relaxed);
        Ok(batch.proposals)
    }

    pub fn invalid_count(&self) -> u64 {
        self.invalid.load(Ordering::Relaxed)
    }

    pub fn library(&self) -> Option<&TemplateLibrary> {
        self.library.as_deref()
    }
}
