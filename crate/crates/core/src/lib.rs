//! Template-based retrosynthesis planning: molecular graphs and SMARTS
//! templates, template tokenization, single-step policies, best-first tree
//! search, direct multi-step route decoding, dataset curation and route
//! evaluation metrics.

pub mod chem;
pub mod dataset;
pub mod direct;
pub mod evalmetrics;
pub mod policy;
pub mod search;
pub mod template;
pub mod tokenizer;
