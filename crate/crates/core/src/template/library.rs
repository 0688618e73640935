use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RetroTemplate, TemplateError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryEntry {
    pub smarts: String,
    pub hash: String,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LibraryStatus {
    Known(u64),
    Novel,
}

/// Template occurrence counts keyed by template hash.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateLibrary {
    entries: BTreeMap<String, LibraryEntry>,
}

impl TemplateLibrary {
    pub fn new() -> TemplateLibrary {
        TemplateLibrary::default()
    }

    /// Library counting each template once per occurrence.
    pub fn from_templates<'a>(templates: impl IntoIterator<Item = &'a RetroTemplate>) -> TemplateLibrary {
        let mut lib = TemplateLibrary::new();
        for t in templates {
            lib.insert(t, 1);
        }
        lib
    }

    /// Adds `count` occurrences of `t`.
    pub fn insert(&mut self, t: &RetroTemplate, count: u64) {
        if count == 0 {
            return;
        }
        let hash = t.hash();
        self.entries
            .entry(hash.clone())
            .and_modify(|e| e.count += count)
            .or_insert_with(|| LibraryEntry {
                smarts: t.canonical_smarts().to_string(),
                hash,
                count,
            });
    }

    pub fn lookup(&self, t: &RetroTemplate) -> LibraryStatus {
        self.lookup_hash(&t.hash())
    }

    pub fn lookup_hash(&self, hash: &str) -> LibraryStatus {
        match self.entries.get(hash) {
            Some(e) => LibraryStatus::Known(e.count),
            None => LibraryStatus::Novel,
        }
    }

    pub fn contains(&self, t: &RetroTemplate) -> bool {
        self.lookup(t) != LibraryStatus::Novel
    }

    pub fn count(&self, t: &RetroTemplate) -> u64 {
        match self.lookup(t) {
            LibraryStatus::Known(c) => c,
            LibraryStatus::Novel => 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }

    /// Entries by descending count, then hash.
    pub fn entries(&self) -> Vec<&LibraryEntry> {
        let mut v: Vec<&LibraryEntry> = self.entries.values().collect();
        v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.hash.cmp(&b.hash)));
        v
    }

    pub fn get(&self, hash: &str) -> Option<&LibraryEntry> {
        self.entries.get(hash)
    }

    /// Keeps the items whose template is in the library, in their original
    /// order.
    pub fn strict_filter<T>(&self, items: Vec<T>, template: impl Fn(&T) -> &RetroTemplate) -> Vec<T> {
        items.into_iter().filter(|x| self.contains(template(x))).collect()
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<TemplateLibrary, TemplateError> {
        let mut lib = TemplateLibrary::new();
        for (k, line) in reader.lines().enumerate() {
            let line_no = k + 1;
            let line = line.map_err(|e| TemplateError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| TemplateError::LibraryFormat { line: line_no, message };
            let entry: LibraryEntry = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            let t = RetroTemplate::parse(&entry.smarts).map_err(|e| bad(e.to_string()))?;
            let hash = t.hash();
            if hash != entry.hash {
                return Err(bad(format!("hash mismatch: stored {} computed {hash}", entry.hash)));
            }
            if entry.count == 0 {
                return Err(bad("count must be at least 1".to_string()));
            }
            lib.insert(&t, entry.count);
        }
        Ok(lib)
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> std::io::Result<()> {
        for e in self.entries() {
            let line = serde_json::to_string(e).expect("entry serializes");
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TemplateLibrary, TemplateError> {
        let f = std::fs::File::open(path).map_err(|e| TemplateError::Io(format!("{}: {e}", path.display())))?;
        TemplateLibrary::read_jsonl(std::io::BufReader::new(f))
    }
}
