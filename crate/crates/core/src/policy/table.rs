use std::collections::HashMap;

use crate::chem::Molecule;
use crate::template::RetroTemplate;

use super::{PolicyBackend, PolicyError, RawProposal};

/// Frequency-table policy: templates recorded for the exact product come
/// first, then the global frequency ranking. Scores use add-one smoothing
/// and form a probability distribution over the returned templates.
#[derive(Debug, Clone)]
pub struct TablePolicy {
    templates: HashMap<String, RetroTemplate>,
    by_product: HashMap<String, Vec<(String, u64)>>,
    global: Vec<(String, u64)>,
}

/// Builds a table from `(product, template)` observations.
pub fn build_table_policy<'a>(
    observations: impl IntoIterator<Item = (&'a Molecule, &'a RetroTemplate)>,
) -> Result<TablePolicy, PolicyError> {
    let mut templates = HashMap::new();
    let mut by_product: HashMap<String, HashMap<String, u64>> = HashMap::new();
    let mut global: HashMap<String, u64> = HashMap::new();
    for (product, t) in observations {
        let h = t.hash();
        templates.entry(h.clone()).or_insert_with(|| t.clone());
        *by_product
            .entry(product.canonical_smiles().to_string())
            .or_default()
            .entry(h.clone())
            .or_default() += 1;
        *global.entry(h).or_default() += 1;
    }
    if templates.is_empty() {
        return Err(PolicyError::EmptyDataset);
    }
    let ranked = |m: HashMap<String, u64>| {
        let mut v: Vec<(String, u64)> = m.into_iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    };
    Ok(TablePolicy {
        templates,
        by_product: by_product.into_iter().map(|(k, v)| (k, ranked(v))).collect(),
        global: ranked(global),
    })
}

impl TablePolicy {
    pub fn num_templates(&self) -> usize {
        self.templates.len()
    }

    pub fn template(&self, hash: &str) -> Option<&RetroTemplate> {
        self.templates.get(hash)
    }

    /// Ranked `(hash, probability)` pairs, at most `n` of them beyond the
    /// exact-product block.
    pub fn ranked(&self, target: &Molecule, n: usize) -> Vec<(String, f64)> {
        let exact = self.by_product.get(target.canonical_smiles()).map(Vec::as_slice).unwrap_or(&[]);
        let rest: Vec<&(String, u64)> = self
            .global
            .iter()
            .filter(|(h, _)| !exact.iter().any(|(e, _)| e == h))
            .collect();
        let smoothed = |c: u64| c as f64 + 1.0;
        let rest_total: f64 = rest.iter().map(|(_, c)| smoothed(*c)).sum();
        let mut out = Vec::new();
        if exact.is_empty() {
            for (h, c) in rest.into_iter().take(n) {
                out.push((h.clone(), smoothed(*c) / rest_total));
            }
            return out;
        }
        let exact_total: f64 = exact.iter().map(|(_, c)| smoothed(*c)).sum();
        let floor = exact.iter().map(|(_, c)| smoothed(*c)).fold(f64::INFINITY, f64::min) / exact_total;
        // remaining mass stays strictly below the weakest exact template
        let delta = if rest.is_empty() { 0.0 } else { floor / (2.0 * (1.0 + floor)) };
        for (h, c) in exact {
            out.push((h.clone(), (1.0 - delta) * smoothed(*c) / exact_total));
        }
        for (h, c) in rest.into_iter().take(n.saturating_sub(out.len())) {
            out.push((h.clone(), delta * smoothed(*c) / rest_total));
        }
        out
    }
}

impl PolicyBackend for TablePolicy {
    fn raw_proposals(&self, target: &Molecule, n: usize, _condition: Option<&str>) -> Result<Vec<RawProposal>, PolicyError> {
        Ok(self
            .ranked(target, n)
            .into_iter()
            .map(|(h, p)| {
                let t = &self.templates[&h];
                RawProposal {
                    smarts: t.canonical_smarts().to_string(),
                    log_prob: p.ln(),
                    template: Some(t.clone()),
                }
            })
            .collect())
    }
}
