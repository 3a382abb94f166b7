//! Frequent condition-set mining (FP-Growth) and induction of the
//! high-precision candidate rule pools the genetic algorithm draws from.
//!
//! Mining runs before any true label is acquired, so rule precision is
//! measured against the black box's labels.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::dataio::{BinarizedDataset, Condition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

/// A conjunction of vocabulary conditions with sign and mining-time stats.
/// Condition ids are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<u32>,
    pub sign: Sign,
    /// Support count in the mining scope (the sign's sub-dataset by default).
    pub support: u32,
    /// Precision against black-box labels on the full dataset.
    pub precision: f64,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    /// Bitset of instances matching every condition of the rule.
    pub fn coverage(&self, dataset: &BinarizedDataset) -> Bits {
        let cols: Vec<&Bits> = self
            .conditions
            .iter()
            .map(|&c| &dataset.columns[c as usize])
            .collect();
        Bits::intersect_all(&cols)
    }

    pub fn condition_strings(&self, vocabulary: &[Condition]) -> Vec<String> {
        self.conditions
            .iter()
            .map(|&c| vocabulary[c as usize].to_string())
            .collect()
    }
}

/// The gene alphabet: high-precision positive and negative candidate rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidatePools {
    pub positive: Vec<Rule>,
    pub negative: Vec<Rule>,
}

impl CandidatePools {
    pub fn rules(&self, sign: Sign) -> &[Rule] {
        match sign {
            Sign::Positive => &self.positive,
            Sign::Negative => &self.negative,
        }
    }

    /// Human-readable export: each rule as condition strings plus stats.
    pub fn to_json(&self, vocabulary: &[Condition]) -> Result<String> {
        #[derive(Serialize)]
        struct RuleExport {
            conditions: Vec<String>,
            sign: Sign,
            support: u32,
            precision: f64,
        }
        #[derive(Serialize)]
        struct PoolExport {
            positive: Vec<RuleExport>,
            negative: Vec<RuleExport>,
        }
        let export = |rules: &[Rule]| -> Vec<RuleExport> {
            rules
                .iter()
                .map(|r| RuleExport {
                    conditions: r.condition_strings(vocabulary),
                    sign: r.sign,
                    support: r.support,
                    precision: r.precision,
                })
                .collect()
        };
        Ok(serde_json::to_string_pretty(&PoolExport {
            positive: export(&self.positive),
            negative: export(&self.negative),
        })?)
    }
}

// ---------------------------------------------------------------------------
// FP-Growth

const NONE: u32 = u32::MAX;

/// FP-tree over dense item ranks (0..k, most frequent first). Nodes live in
/// flat arrays; children form sibling chains. Item order along every path
/// is the tree's rank order, and conditional trees inherit it, so pattern
/// base paths never need re-sorting.
struct FpTree {
    item: Vec<u32>,
    count: Vec<u32>,
    parent: Vec<u32>,
    child: Vec<u32>,
    sibling: Vec<u32>,
    /// Per rank: node indices.
    headers: Vec<Vec<u32>>,
    /// Rank -> original item id.
    rank_item: Vec<u32>,
    /// Rank -> total support.
    rank_count: Vec<u32>,
    single_path: bool,
}

impl FpTree {
    fn new(n_ranks: usize) -> FpTree {
        FpTree {
            item: vec![NONE],
            count: vec![0],
            parent: vec![NONE],
            child: vec![NONE],
            sibling: vec![NONE],
            headers: vec![Vec::new(); n_ranks],
            rank_item: Vec::new(),
            rank_count: vec![0; n_ranks],
            single_path: true,
        }
    }

    /// Inserts a path of strictly increasing ranks with a count.
    fn insert(&mut self, path: &[u32], add: u32) {
        let mut at = 0u32;
        for &rank in path {
            let mut node = self.child[at as usize];
            while node != NONE && self.item[node as usize] != rank {
                node = self.sibling[node as usize];
            }
            if node == NONE {
                node = self.item.len() as u32;
                self.item.push(rank);
                self.count.push(add);
                self.parent.push(at);
                if self.child[at as usize] != NONE {
                    self.single_path = false;
                }
                self.sibling.push(self.child[at as usize]);
                self.child.push(NONE);
                self.child[at as usize] = node;
                self.headers[rank as usize].push(node);
            } else {
                self.count[node as usize] += add;
            }
            at = node;
            self.rank_count[rank as usize] += add;
        }
    }
}

/// Emits all itemsets obtainable from a single-path tree: every subset of
/// the path (sized to the remaining length budget) is frequent with the
/// support of its deepest item.
fn grow_single_path(
    tree: &FpTree,
    suffix: &mut Vec<u32>,
    max_len: usize,
    visit: &mut impl FnMut(&[u32], u32),
) {
    // collect the chain top-down
    let mut chain: Vec<(u32, u32)> = Vec::new(); // (rank, count)
    let mut at = tree.child[0];
    while at != NONE {
        chain.push((tree.item[at as usize], tree.count[at as usize]));
        at = tree.child[at as usize];
    }
    fn rec(
        chain: &[(u32, u32)],
        from: usize,
        tree: &FpTree,
        suffix: &mut Vec<u32>,
        max_len: usize,
        visit: &mut impl FnMut(&[u32], u32),
    ) {
        if suffix.len() >= max_len {
            return;
        }
        for k in from..chain.len() {
            let (rank, count) = chain[k];
            suffix.push(tree.rank_item[rank as usize]);
            let mut itemset = suffix.clone();
            itemset.sort_unstable();
            visit(&itemset, count);
            rec(chain, k + 1, tree, suffix, max_len, visit);
            suffix.pop();
        }
    }
    rec(&chain, 0, tree, suffix, max_len, visit);
}

fn grow(tree: &FpTree, suffix: &mut Vec<u32>, min_count: u32, max_len: usize, visit: &mut impl FnMut(&[u32], u32)) {
    if tree.single_path {
        grow_single_path(tree, suffix, max_len, visit);
        return;
    }
    // deepest (least frequent) ranks first: their pattern bases only
    // contain shallower ranks
    for rank in (0..tree.headers.len()).rev() {
        let support = tree.rank_count[rank];
        if support < min_count {
            continue;
        }
        suffix.push(tree.rank_item[rank]);
        let mut itemset = suffix.clone();
        itemset.sort_unstable();
        visit(&itemset, support);

        if suffix.len() < max_len {
            // conditional item counts, in parent-rank space
            let mut counts = vec![0u32; rank];
            for &node in &tree.headers[rank] {
                let add = tree.count[node as usize];
                let mut at = tree.parent[node as usize];
                while at != 0 {
                    counts[tree.item[at as usize] as usize] += add;
                    at = tree.parent[at as usize];
                }
            }
            // keep parent-rank order for the conditional ranks
            let mut local_of = vec![NONE; rank];
            let mut rank_item = Vec::new();
            for parent_rank in 0..rank {
                if counts[parent_rank] >= min_count {
                    local_of[parent_rank] = rank_item.len() as u32;
                    rank_item.push(tree.rank_item[parent_rank]);
                }
            }
            if !rank_item.is_empty() {
                let mut conditional = FpTree::new(rank_item.len());
                conditional.rank_item = rank_item;
                let mut path = Vec::new();
                for &node in &tree.headers[rank] {
                    let add = tree.count[node as usize];
                    path.clear();
                    let mut at = tree.parent[node as usize];
                    while at != 0 {
                        let local = local_of[tree.item[at as usize] as usize];
                        if local != NONE {
                            path.push(local);
                        }
                        at = tree.parent[at as usize];
                    }
                    if !path.is_empty() {
                        path.reverse();
                        conditional.insert(&path, add);
                    }
                }
                grow(&conditional, suffix, min_count, max_len, visit);
            }
        }
        suffix.pop();
    }
}

/// Streams every itemset of size <= `max_len` with support count
/// >= ceil(minsupp * n) to the visitor, with its exact support count.
pub fn fp_growth_each(
    transactions: &[Vec<u32>],
    minsupp: f64,
    max_len: usize,
    mut visit: impl FnMut(&[u32], u32),
) -> Result<()> {
    if !(minsupp > 0.0 && minsupp <= 1.0) {
        return Err(Error::Argument("minsupp must be in (0, 1]".into()));
    }
    if max_len < 1 {
        return Err(Error::Argument("max_len must be at least 1".into()));
    }
    if transactions.is_empty() {
        return Ok(());
    }
    let min_count = (minsupp * transactions.len() as f64).ceil().max(1.0) as u32;

    let universe = transactions
        .iter()
        .flat_map(|t| t.iter().copied())
        .max()
        .map_or(0, |m| m as usize + 1);
    let mut counts = vec![0u32; universe];
    for t in transactions {
        for &i in t {
            counts[i as usize] += 1;
        }
    }
    let mut frequent: Vec<u32> = (0..universe as u32)
        .filter(|&i| counts[i as usize] >= min_count)
        .collect();
    frequent.sort_unstable_by(|&a, &b| {
        counts[b as usize]
            .cmp(&counts[a as usize])
            .then(a.cmp(&b))
    });
    if frequent.is_empty() {
        return Ok(());
    }
    let mut rank_of = vec![NONE; universe];
    for (r, &i) in frequent.iter().enumerate() {
        rank_of[i as usize] = r as u32;
    }

    let mut tree = FpTree::new(frequent.len());
    tree.rank_item = frequent;
    let mut path = Vec::new();
    for t in transactions {
        path.clear();
        path.extend(t.iter().map(|&i| rank_of[i as usize]).filter(|&r| r != NONE));
        path.sort_unstable();
        tree.insert(&path, 1);
    }

    let mut suffix = Vec::new();
    grow(&tree, &mut suffix, min_count, max_len, &mut visit);
    Ok(())
}

/// FP-Growth over transactions (each a set of item ids). Returns all
/// frequent itemsets with exact support counts, ordered lexicographically
/// by their sorted item ids.
pub fn fp_growth(
    transactions: &[Vec<u32>],
    minsupp: f64,
    max_len: usize,
) -> Result<Vec<(Vec<u32>, u32)>> {
    let mut out = Vec::new();
    fp_growth_each(transactions, minsupp, max_len, |items, support| {
        out.push((items.to_vec(), support));
    })?;
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Candidate induction

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MiningParams {
    pub minsupp: f64,
    pub max_len: usize,
    pub min_precision: f64,
    pub max_pool: usize,
    /// Measure support against the full dataset instead of the sign's
    /// sub-dataset.
    pub support_on_full: bool,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            minsupp: 0.05,
            max_len: 3,
            min_precision: 0.7,
            max_pool: 150,
            support_on_full: false,
        }
    }
}

/// Exact-ratio ranking key: better = higher precision, then higher support,
/// then lexicographically smaller conditions.
#[derive(PartialEq, Eq)]
struct RankedRule {
    hits: u64,
    cover: u64,
    support: u32,
    conditions: Vec<u32>,
}

impl Ord for RankedRule {
    fn cmp(&self, other: &Self) -> Ordering {
        // precision comparison without floats: hits_a/cover_a vs hits_b/cover_b
        (self.hits * other.cover)
            .cmp(&(other.hits * self.cover))
            .then(self.support.cmp(&other.support))
            .then_with(|| other.conditions.cmp(&self.conditions))
    }
}

impl PartialOrd for RankedRule {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn row_transactions(dataset: &BinarizedDataset, rows: &Bits) -> Vec<Vec<u32>> {
    let mut transactions: Vec<Vec<u32>> = rows.iter_ones().map(|_| Vec::new()).collect();
    let index_of: HashMap<usize, usize> = rows.iter_ones().enumerate().map(|(k, i)| (i, k)).collect();
    for (j, column) in dataset.columns.iter().enumerate() {
        for i in column.and(rows).iter_ones() {
            transactions[index_of[&i]].push(j as u32);
        }
    }
    transactions
}

struct PoolHeap {
    heap: BinaryHeap<std::cmp::Reverse<RankedRule>>,
    cap: usize,
}

impl PoolHeap {
    fn new(cap: usize) -> Self {
        PoolHeap {
            heap: BinaryHeap::new(),
            cap,
        }
    }

    fn offer(&mut self, rule: RankedRule) {
        self.heap.push(std::cmp::Reverse(rule));
        if self.heap.len() > self.cap {
            self.heap.pop();
        }
    }

    fn finish(self, sign: Sign) -> Vec<Rule> {
        let mut ranked: Vec<RankedRule> = self.heap.into_iter().map(|r| r.0).collect();
        ranked.sort_unstable_by(|a, b| b.cmp(a));
        ranked
            .into_iter()
            .map(|r| Rule {
                precision: r.hits as f64 / r.cover as f64,
                conditions: r.conditions,
                sign,
                support: r.support,
            })
            .collect()
    }
}

fn cover_stats(dataset: &BinarizedDataset, items: &[u32]) -> (u64, u64) {
    let cols: Vec<&Bits> = items
        .iter()
        .map(|&c| &dataset.columns[c as usize])
        .collect();
    let (cover, pos_hits) = Bits::intersect_counts(&cols, &dataset.h);
    (cover as u64, pos_hits as u64)
}

fn mine_sign(dataset: &BinarizedDataset, sign: Sign, params: &MiningParams) -> Result<Vec<Rule>> {
    let class_rows = match sign {
        Sign::Positive => dataset.h.clone(),
        Sign::Negative => Bits::ones(dataset.n).and_not(&dataset.h),
    };
    let transactions = row_transactions(dataset, &class_rows);
    if transactions.is_empty() {
        return Ok(Vec::new());
    }
    let mut heap = PoolHeap::new(params.max_pool);
    fp_growth_each(&transactions, params.minsupp, params.max_len, |items, support| {
        let (cover, pos_hits) = cover_stats(dataset, items);
        if cover == 0 {
            return;
        }
        let hits = match sign {
            Sign::Positive => pos_hits,
            Sign::Negative => cover - pos_hits,
        };
        if (hits as f64) < params.min_precision * cover as f64 - 1e-9 {
            return;
        }
        heap.offer(RankedRule {
            hits,
            cover,
            support,
            conditions: items.to_vec(),
        });
    })?;
    Ok(heap.finish(sign))
}

/// Full-dataset-support variant: one mining pass over all instances; each
/// frequent itemset may enter either pool, decided by its precision.
fn mine_full_support(
    dataset: &BinarizedDataset,
    params: &MiningParams,
) -> Result<(Vec<Rule>, Vec<Rule>)> {
    let all = Bits::ones(dataset.n);
    let transactions = row_transactions(dataset, &all);
    let mut pos_heap = PoolHeap::new(params.max_pool);
    let mut neg_heap = PoolHeap::new(params.max_pool);
    fp_growth_each(&transactions, params.minsupp, params.max_len, |items, support| {
        let (cover, pos_hits) = cover_stats(dataset, items);
        if cover == 0 {
            return;
        }
        let threshold = params.min_precision * cover as f64 - 1e-9;
        if pos_hits as f64 >= threshold {
            pos_heap.offer(RankedRule {
                hits: pos_hits,
                cover,
                support,
                conditions: items.to_vec(),
            });
        }
        let neg_hits = cover - pos_hits;
        if neg_hits as f64 >= threshold {
            neg_heap.offer(RankedRule {
                hits: neg_hits,
                cover,
                support,
                conditions: items.to_vec(),
            });
        }
    })?;
    Ok((pos_heap.finish(Sign::Positive), neg_heap.finish(Sign::Negative)))
}

/// Mines candidate pools from the black-box-labeled dataset: frequent
/// condition sets per class, filtered by precision against the black-box
/// labels on the full dataset, capped at `max_pool` per sign.
pub fn induce_candidates(
    dataset: &BinarizedDataset,
    params: &MiningParams,
) -> Result<CandidatePools> {
    let (positive, negative) = if params.support_on_full {
        mine_full_support(dataset, params)?
    } else {
        let (positive, negative) = rayon::join(
            || mine_sign(dataset, Sign::Positive, params),
            || mine_sign(dataset, Sign::Negative, params),
        );
        (positive?, negative?)
    };
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::Config(format!(
            "candidate pool empty ({} positive, {} negative rules); lower min_precision \
             (currently {}) or minsupp (currently {})",
            positive.len(),
            negative.len(),
            params.min_precision,
            params.minsupp
        )));
    }
    Ok(CandidatePools { positive, negative })
}
