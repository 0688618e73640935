use std::sync::OnceLock;

use regex::Regex;

const SMILES_PATTERN: &str =
    r"(\[[^\]]+]|Br?|Cl?|N|O|S|P|F|I|b|c|n|o|s|p|\(|\)|\.|=|#|-|\+|\\|/|:|~|@|\?|>|\*|\$|%[0-9]{2}|[0-9])";

fn smiles_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(SMILES_PATTERN).expect("valid regex"))
}

/// Splits SMILES into atoms (bracket atoms whole), bonds, ring digits and
/// branch symbols. Characters the pattern does not cover become one-char
/// tokens, so joining the tokens always gives back the input.
pub fn tokenize_smiles(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut last = 0;
    for m in smiles_regex().find_iter(s) {
        out.extend(s[last..m.start()].chars().map(String::from));
        out.push(m.as_str().to_string());
        last = m.end();
    }
    out.extend(s[last..].chars().map(String::from));
    out
}
