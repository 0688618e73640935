//! One check per acceptance criterion. Each returns whether it passed plus
//! the measured numbers, so the same code backs the per-area integration
//! tests and the acceptance summary.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use retroplan::chem::{find_matches, Molecule};
use retroplan::dataset::{build_routes, filter_reaction, is_subroute};
use retroplan::direct::{reconstruct_routes, rank_direct_routes, DirectRoute, TemplateSequence};
use retroplan::evalmetrics::{
    ground_truth_rank, route_cost, topk_single_step_with, tree_edit_distance, Placement, ReactantKey, RouteTree,
};
use retroplan::policy::{build_table_policy, PolicyConfig};
use retroplan::search::{extract_routes, puct_score, q_update, run_search, SearchConfig};
use retroplan::template::{extract_template_from_smiles, RetroTemplate, TemplateLibrary, DEFAULT_RADIUS};
use retroplan::tokenizer::{bpe_decode, bpe_encode, bpe_train, FrequencyTokenizer, TemplateToken};

use crate::common;
use crate::oracles;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Check {
        Check { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn template_round_trip() -> Check {
    let fixtures = common::reaction_fixtures();
    let start = Instant::now();
    let mut ok = 0;
    for f in &fixtures {
        let Ok(t) = extract_template_from_smiles(&f.rxn, DEFAULT_RADIUS) else { continue };
        let product = Molecule::parse(&f.product).unwrap();
        ok += t.apply(&product).iter().any(|s| s.smiles() == f.reactants) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    Check::new(
        "template round trip",
        fixtures.len() >= 50 && ok == fixtures.len() && secs < 5.0,
        format!("{ok}/{} fixtures recovered in {secs:.2}s (need all of >=50, <5s)", fixtures.len()),
    )
}

pub fn matching_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(11);
    let (mut pairs, mut bad, mut nonempty) = (0, 0, 0);
    while pairs < 300 {
        let Some(mol) = oracles::random_molecule(&mut rng, 8) else { continue };
        let pattern = oracles::random_pattern(&mut rng, &mol, 4);
        let got: Vec<Vec<usize>> = find_matches(&pattern, &mol).into_iter().map(|m| m.atoms).collect();
        let want = oracles::brute_force_matches(&pattern, &mol);
        bad += (got != want) as usize;
        nonempty += !want.is_empty() as usize;
        pairs += 1;
    }
    Check::new(
        "matching oracle",
        bad == 0,
        format!("{bad} discrepancies over {pairs} pairs ({nonempty} with matches)"),
    )
}

pub fn mcts_constants() -> Check {
    let cfg = SearchConfig::default();
    let defaults = cfg.c_pucb == 100.0
        && cfg.temperature == 3.0
        && cfg.expansions == 10
        && cfg.max_iterations == 500
        && cfg.time_limit_s == 300.0
        && cfg.q_init == 0.5
        && PolicyConfig::default().temperature == 3.0;
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q: f64 = rng.random();
        let p: f64 = rng.random();
        let parent: u64 = rng.random_range(0..100_000);
        let n: u64 = rng.random_range(0..=parent);
        let c: f64 = rng.random_range(0.0..500.0);
        let want = q + c * p * (parent as f64).sqrt() / (n as f64 + 1.0);
        worst = worst.max((puct_score(q, p, parent, n, c) - want).abs() / want.abs().max(1.0));
        let r: f64 = rng.random();
        let (q2, n2) = q_update(q, n, r);
        worst = worst.max((q2 - (q * n as f64 + r) / (n as f64 + 1.0)).abs());
        if n2 != n + 1 {
            worst = f64::INFINITY;
        }
        // running mean from an unvisited node
        let rewards: Vec<f64> = (0..rng.random_range(1..20)).map(|_| rng.random()).collect();
        let (mut qm, mut nm) = (0.5, 0);
        for &x in &rewards {
            (qm, nm) = q_update(qm, nm, x);
        }
        let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
        worst = worst.max((qm - mean).abs());
    }
    Check::new(
        "MCTS constants and formulas",
        defaults && worst <= 1e-12,
        format!("defaults {}; max error {worst:.1e} over 1000 tuples (tol 1e-12)", if defaults { "ok" } else { "WRONG" }),
    )
}

pub struct BenchmarkOutcome {
    pub solved: usize,
    pub exact: usize,
    pub max_iterations: usize,
    pub seconds: f64,
}

pub fn run_synthetic_benchmark() -> BenchmarkOutcome {
    let (targets, stock) = common::synthetic::synthetic_targets();
    let obs: Vec<(&Molecule, &RetroTemplate)> = targets.iter().flat_map(|t| t.steps.iter().map(|(m, tp)| (m, tp))).collect();
    let table = build_table_policy(obs).unwrap();
    let cfg = SearchConfig {
        max_iterations: 50,
        ..SearchConfig::default()
    };
    let start = Instant::now();
    let mut out = BenchmarkOutcome {
        solved: 0,
        exact: 0,
        max_iterations: 0,
        seconds: 0.0,
    };
    for t in &targets {
        let result = run_search(&t.target, &table, &stock, &cfg).unwrap();
        if let Some(i) = result.stats.first_solution_iter {
            out.solved += 1;
            out.max_iterations = out.max_iterations.max(i);
        }
        if let Some(top) = extract_routes(&result, 10).first() {
            out.exact += (tree_edit_distance(top, &t.route) == 0) as usize;
        }
    }
    out.seconds = start.elapsed().as_secs_f64();
    out
}

pub fn synthetic_benchmark() -> Check {
    let b = run_synthetic_benchmark();
    Check::new(
        "synthetic planning benchmark",
        b.solved == 20 && b.max_iterations <= 50 && b.exact >= 18 && b.seconds < 60.0,
        format!(
            "solved {}/20 (by iteration {}), top-1 TED=0 on {}/20, {:.2}s (need 20, <=50, >=18, <60s)",
            b.solved, b.max_iterations, b.exact, b.seconds
        ),
    )
}

pub struct MolSetOutcome {
    pub fixtures: usize,
    pub discrepancies: Vec<String>,
    pub branches: oracles::molset::Branches,
}

/// Fifty random (target, template sequence, stock) draws compared node by
/// node against the interpreter.
pub fn run_molset(seed: u64) -> MolSetOutcome {
    let mut rng = StdRng::seed_from_u64(seed);
    let (synthetic, synthetic_stock) = common::synthetic::synthetic_targets();
    let fixtures = common::reaction_fixtures();
    let mut pool: Vec<String> = fixtures
        .iter()
        .map(|f| extract_template_from_smiles(&f.rxn, 1).unwrap().canonical_smarts().to_string())
        .collect();
    for t in &synthetic {
        pool.extend(t.steps.iter().map(|(_, tp)| tp.canonical_smarts().to_string()));
    }
    let mut out = MolSetOutcome {
        fixtures: 0,
        discrepancies: Vec::new(),
        branches: Default::default(),
    };
    for case in 0..50 {
        let (target, own): (Molecule, Vec<String>) = if case % 3 == 2 {
            let f = &fixtures[rng.random_range(0..fixtures.len())];
            let t = extract_template_from_smiles(&f.rxn, 1).unwrap();
            (Molecule::parse(&f.product).unwrap(), vec![t.canonical_smarts().to_string()])
        } else {
            let t = &synthetic[rng.random_range(0..synthetic.len())];
            let own = t.steps.iter().map(|(_, tp)| tp.canonical_smarts().to_string()).collect();
            (t.target.clone(), own)
        };
        let len = rng.random_range(1..=5);
        let mut seq: Vec<String> = (0..len)
            .map(|_| match rng.random_range(0..10) {
                0 => "[C:1]>>[C:1".to_string(),
                1..=3 => pool[rng.random_range(0..pool.len())].clone(),
                _ => own[rng.random_range(0..own.len())].clone(),
            })
            .collect();
        seq.shuffle(&mut rng);
        let stock = match rng.random_range(0..3) {
            0 => None,
            1 => Some(synthetic_stock.clone()),
            _ => {
                // some intermediates too, so expansions stop early
                let mut s = synthetic_stock.clone();
                for t in &synthetic {
                    for (m, _) in &t.steps {
                        if rng.random_bool(0.3) {
                            s.insert(m);
                        }
                    }
                }
                Some(s)
            }
        };
        let graph = reconstruct_routes(&target, &TemplateSequence::from_smarts(&seq, -1.0, None), stock.as_ref());
        let (rows, b) = oracles::molset::interpret(&target, &seq, stock.as_ref());
        let got: Vec<oracles::molset::Row> = graph
            .nodes
            .iter()
            .map(|n| (n.mols.clone(), n.purchasable.clone(), n.parent, n.template_index))
            .collect();
        if got != rows {
            out.discrepancies.push(format!("case {case}: {target} with {seq:?}"));
        }
        let br = &mut out.branches;
        br.retained += b.retained;
        br.skipped_purchasable += b.skipped_purchasable;
        br.marked += b.marked;
        br.truncated += b.truncated;
        out.fixtures += 1;
    }
    out
}

pub fn molset_conformance() -> Check {
    let o = run_molset(17);
    let b = o.branches;
    let covered = b.retained > 0 && b.marked > 0 && b.skipped_purchasable > 0 && b.truncated > 0;
    Check::new(
        "molecule-set graph conformance",
        o.discrepancies.is_empty() && o.fixtures == 50 && covered,
        format!(
            "{} discrepancies over {} fixtures; branches hit: retained {}, stock-marked {}, purchasable skipped {}, truncated {}",
            o.discrepancies.len(),
            o.fixtures,
            b.retained,
            b.marked,
            b.skipped_purchasable,
            b.truncated
        ),
    )
}

pub fn cost_fixtures() -> [(RouteTree, f64); 3] {
    let leaf = |s: &str| RouteTree::leaf(s, true);
    let one = RouteTree::step("CC(=O)NC", None, vec![leaf("CC(=O)O"), leaf("CN")]);
    let two = RouteTree::step("CC(=O)NC", None, vec![RouteTree::step("CC(=O)O", None, vec![leaf("CC(=O)OC")]), leaf("CN")]);
    let convergent = RouteTree::step(
        "CC(=O)NC",
        None,
        vec![
            RouteTree::step("CC(=O)O", None, vec![leaf("CC(=O)OC")]),
            RouteTree::step("CN", None, vec![leaf("CNC(=O)OC(C)(C)C")]),
        ],
    );
    [(one, 1.0), (two, 2.25), (convergent, 3.5)]
}

/// Random molecule tree of at most `max` nodes over a small label set.
pub fn random_tree(rng: &mut StdRng, max: usize) -> RouteTree {
    const LABELS: &[&str] = &["C", "CC", "CO", "CN", "CCl"];
    fn grow(rng: &mut StdRng, budget: &mut usize) -> RouteTree {
        let label = LABELS[rng.random_range(0..LABELS.len())];
        *budget -= 1;
        let want = if *budget > 0 && rng.random_bool(0.6) { rng.random_range(1..=3.min(*budget)) } else { 0 };
        let mut kids = Vec::new();
        for _ in 0..want {
            if *budget == 0 {
                break;
            }
            kids.push(grow(rng, budget));
        }
        if kids.is_empty() {
            RouteTree::leaf(label, true)
        } else {
            RouteTree::step(label, None, kids)
        }
    }
    let mut budget = rng.random_range(1..=max);
    grow(rng, &mut budget)
}

pub struct MetricsOutcome {
    pub costs: Vec<(f64, f64)>,
    pub ted_pairs: usize,
    pub ted_mismatches: usize,
    pub topk_cases: usize,
    pub topk_violations: usize,
}

pub fn run_metrics() -> MetricsOutcome {
    let costs = cost_fixtures().iter().map(|(r, want)| (route_cost(r, 1.0, 0.8), *want)).collect();

    let mut trees: Vec<RouteTree> = cost_fixtures().into_iter().map(|(r, _)| r).collect();
    trees.extend(common::synthetic::synthetic_targets().0.into_iter().map(|t| t.route));
    trees.extend(common::route_corpus::route_corpus().1);
    let mut rng = StdRng::seed_from_u64(5);
    trees.extend((0..60).map(|_| random_tree(&mut rng, 6)));
    trees.retain(|t| t.num_molecules() <= 6);
    let (mut ted_pairs, mut ted_mismatches) = (0, 0);
    for a in &trees {
        for b in &trees {
            ted_pairs += 1;
            let want = oracles::ted::brute_force_ted(&a.canonicalized(), &b.canonicalized());
            ted_mismatches += (tree_edit_distance(a, b) != want) as usize;
        }
    }

    let keys: Vec<ReactantKey> = ["CC(=O)O.CN", "CCO", "CN", "OCCO", "c1ccccc1", "CBr"]
        .iter()
        .map(|s| s.split('.').map(String::from).collect())
        .collect();
    let mut topk_violations = 0;
    let mut cases = Vec::new();
    for _ in 0..100 {
        let groups: Vec<Vec<ReactantKey>> = (0..rng.random_range(1..6))
            .map(|_| (0..rng.random_range(1..4)).map(|_| keys[rng.random_range(0..keys.len())].clone()).collect())
            .collect();
        let truth = keys[rng.random_range(0..keys.len())].clone();
        let p = ground_truth_rank(&groups, &truth, Placement::Pessimistic);
        let o = ground_truth_rank(&groups, &truth, Placement::Optimistic);
        if p.is_some() != o.is_some() || p.zip(o).is_some_and(|(p, o)| p < o) {
            topk_violations += 1;
        }
        cases.push((groups, truth));
    }
    let pess = topk_single_step_with(&cases, 10, Placement::Pessimistic);
    let opt = topk_single_step_with(&cases, 10, Placement::Optimistic);
    topk_violations += pess.iter().zip(&opt).filter(|(p, o)| p > o).count();
    MetricsOutcome {
        costs,
        ted_pairs,
        ted_mismatches,
        topk_cases: cases.len(),
        topk_violations,
    }
}

pub fn metrics() -> Check {
    let m = run_metrics();
    let costs_ok = m.costs.iter().all(|(got, want)| got == want);
    let got: Vec<String> = m.costs.iter().map(|(g, _)| g.to_string()).collect();
    Check::new(
        "metrics",
        costs_ok && m.ted_mismatches == 0 && m.topk_violations == 0,
        format!(
            "costs [{}] (want [1, 2.25, 3.5] exactly); TED {} mismatches over {} pairs; pessimistic>optimistic in {} of {} cases",
            got.join(", "),
            m.ted_mismatches,
            m.ted_pairs,
            m.topk_violations,
            m.topk_cases
        ),
    )
}

pub fn filters_and_routes() -> Check {
    let cases = common::filter_cases::filter_cases();
    let agree = cases
        .iter()
        .filter(|c| {
            let (accepted, _, report) = filter_reaction(&c.record);
            let failing: BTreeSet<_> = report.failed().into_iter().collect();
            failing == c.failing && accepted == c.failing.is_empty()
        })
        .count();
    let (records, _) = common::route_corpus::route_corpus();
    let patents: BTreeSet<_> = records.iter().map(|r| r.patent_id.clone()).collect();
    let routes = build_routes(&records, None);
    let single = routes.iter().filter(|r| r.len() < 2).count();
    let hashes: BTreeSet<String> = routes.iter().map(RouteTree::route_hash).collect();
    let dups = routes.len() - hashes.len();
    let mut subs = 0;
    for (i, a) in routes.iter().enumerate() {
        for (j, b) in routes.iter().enumerate() {
            subs += (i != j && is_subroute(a, b)) as usize;
        }
    }
    Check::new(
        "filter pipeline and route builder",
        cases.len() == 22 && agree == 22 && single == 0 && dups == 0 && subs == 0 && !routes.is_empty(),
        format!(
            "{agree}/{} filter cases agree; {} routes from {} patents: {single} single-step, {dups} duplicates, {subs} sub-routes",
            cases.len(),
            routes.len(),
            patents.len()
        ),
    )
}

/// Random template-shaped SMARTS from the pattern generator.
pub fn random_smarts(rng: &mut StdRng) -> String {
    loop {
        let Some(m) = oracles::random_molecule(rng, 8) else { continue };
        let a = oracles::random_pattern(rng, &m, 4).to_smarts();
        let b = oracles::random_pattern(rng, &m, 3).to_smarts();
        return format!("{a}>>{b}");
    }
}

pub struct TokenizerOutcome {
    pub identity_ok: usize,
    pub identity_total: usize,
    pub boundary_ok: bool,
    pub deterministic: bool,
}

pub fn run_tokenizers() -> TokenizerOutcome {
    let mut rng = StdRng::seed_from_u64(23);
    let mut corpus: Vec<String> = common::reaction_fixtures()
        .iter()
        .map(|f| extract_template_from_smiles(&f.rxn, 1).unwrap().canonical_smarts().to_string())
        .collect();
    corpus.extend((0..300).map(|_| random_smarts(&mut rng)));
    let model = bpe_train(&corpus, 300).unwrap();

    let mut test_rng = StdRng::seed_from_u64(29);
    let identity_total = 1000;
    let identity_ok = (0..identity_total)
        .filter(|_| {
            let s = random_smarts(&mut test_rng);
            bpe_decode(&model, &bpe_encode(&model, &s)).is_ok_and(|d| d == s)
        })
        .count();

    let mut shuffled = corpus.clone();
    shuffled.shuffle(&mut rng);
    let deterministic = bpe_train(&corpus, 300).unwrap() == model && bpe_train(&shuffled, 300).unwrap() == model;

    let at = RetroTemplate::parse("[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]").unwrap();
    let above = RetroTemplate::parse("[C:1](=[O:2])[O:3]>>[C:1](=[O:2])[OH].[O:3]").unwrap();
    let mut lib = TemplateLibrary::new();
    lib.insert(&at, 40);
    lib.insert(&above, 41);
    let tok = FrequencyTokenizer::new(&lib, model.clone());
    let at_tokens = tok.tokenize(at.canonical_smarts());
    let above_tokens = tok.tokenize(above.canonical_smarts());
    let boundary_ok = at_tokens.len() > 1
        && at_tokens.iter().all(|t| matches!(t, TemplateToken::Piece(_)))
        && matches!(above_tokens.as_slice(), [TemplateToken::Whole { .. }])
        && tok.decode(&tok.encode(above.canonical_smarts())).is_ok_and(|d| d == above.canonical_smarts())
        && tok.decode(&tok.encode(at.canonical_smarts())).is_ok_and(|d| d == at.canonical_smarts())
        && tok.whole_template_hashes() == vec![above.hash()];
    TokenizerOutcome {
        identity_ok,
        identity_total,
        boundary_ok,
        deterministic,
    }
}

pub fn tokenizers() -> Check {
    let t = run_tokenizers();
    Check::new(
        "tokenizers",
        t.identity_ok == t.identity_total && t.boundary_ok && t.deterministic,
        format!(
            "BPE identity {}/{}; count 40 vs 41 boundary {}; merges deterministic {}",
            t.identity_ok,
            t.identity_total,
            if t.boundary_ok { "exact" } else { "WRONG" },
            t.deterministic
        ),
    )
}

/// Linear route of `len` steps whose single leaf is bought or not.
pub fn chain_route(len: usize, solved: bool) -> RouteTree {
    let mut r = RouteTree::leaf("C".repeat(len + 1), solved);
    for k in (0..len).rev() {
        r = RouteTree::step("C".repeat(k + 1), None, vec![r]);
    }
    r
}

/// Positions after sorting with an explicit pairwise comparator: each item
/// goes after everything strictly better and after equal items that came
/// first.
pub fn brute_force_order(items: &[(bool, usize, f64)]) -> Vec<usize> {
    let better = |a: &(bool, usize, f64), b: &(bool, usize, f64)| {
        if a.0 != b.0 {
            return a.0;
        }
        if a.1 != b.1 {
            return a.1 < b.1;
        }
        a.2 > b.2
    };
    let mut slots = vec![usize::MAX; items.len()];
    for (i, x) in items.iter().enumerate() {
        let pos = items
            .iter()
            .enumerate()
            .filter(|&(j, y)| better(y, x) || (!better(x, y) && j < i))
            .count();
        slots[pos] = i;
    }
    slots
}

pub fn run_direct_ranking(seed: u64) -> (usize, usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut suites_ok = 0;
    let suites = 20;
    for _ in 0..suites {
        let items: Vec<(bool, usize, f64)> = (0..50)
            .map(|_| (rng.random_bool(0.5), rng.random_range(1..5), -(rng.random_range(0..6) as f64) / 2.0))
            .collect();
        let routes: Vec<DirectRoute> = items
            .iter()
            .enumerate()
            .map(|(i, &(solved, len, lp))| DirectRoute {
                route: chain_route(len, solved),
                log_prob: lp,
                condition: Some(i.to_string()),
            })
            .collect();
        let got: Vec<usize> = rank_direct_routes(routes)
            .iter()
            .map(|r| r.condition.as_ref().unwrap().parse().unwrap())
            .collect();
        suites_ok += (got == brute_force_order(&items)) as usize;
    }
    (suites_ok, suites)
}

pub fn direct_ranking() -> Check {
    let (ok, total) = run_direct_ranking(31);
    Check::new(
        "direct route ranking",
        ok == total,
        format!("{ok}/{total} randomized 50-tuple suites match the brute-force comparator order"),
    )
}

pub fn all() -> Vec<Check> {
    vec![
        template_round_trip(),
        matching_oracle(),
        mcts_constants(),
        synthetic_benchmark(),
        molset_conformance(),
        metrics(),
        filters_and_routes(),
        tokenizers(),
        direct_ranking(),
    ]
}
