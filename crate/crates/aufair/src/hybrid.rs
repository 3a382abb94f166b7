//! The hybrid model: a positive and a negative rule set layered over the
//! fixed decision-maker. Positive rules fire first, then negative rules,
//! then the instance is deferred to the black box.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::dataio::{BinarizedDataset, Condition};
use crate::metrics::ObjectivePoint;
use crate::rulemine::{CandidatePools, Rule};

/// One candidate model: rule ids into the positive and negative pools.
/// Both sets may be empty; empty-both is the pure black box. Stored ids are
/// sorted and deduplicated, so two solutions with the same rules compare
/// equal regardless of construction order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pos: Vec<u32>,
    neg: Vec<u32>,
    /// (query-set version, point) fitness cache; stale entries are ignored.
    #[serde(skip)]
    pub cache: Option<(u64, ObjectivePoint)>,
}

impl PartialEq for Solution {
    fn eq(&self, other: &Self) -> bool {
        self.pos == other.pos && self.neg == other.neg
    }
}
impl Eq for Solution {}

impl std::hash::Hash for Solution {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.pos.hash(state);
        self.neg.hash(state);
    }
}

impl Solution {
    pub fn new(mut pos: Vec<u32>, mut neg: Vec<u32>) -> Self {
        pos.sort_unstable();
        pos.dedup();
        neg.sort_unstable();
        neg.dedup();
        Solution {
            pos,
            neg,
            cache: None,
        }
    }

    pub fn empty() -> Self {
        Solution::new(Vec::new(), Vec::new())
    }

    pub fn pos(&self) -> &[u32] {
        &self.pos
    }

    pub fn neg(&self) -> &[u32] {
        &self.neg
    }

    /// Total number of rules across both signs.
    pub fn n_rules(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_pure_blackbox(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }
}

/// Where a prediction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Decided by this positive-pool rule id.
    PositiveRule(u32),
    /// Decided by this negative-pool rule id.
    NegativeRule(u32),
    /// No rule covered the instance; the black box decided.
    Deferred,
}

/// Per-rule coverage bitsets over one dataset, computed once per
/// (pools, dataset) pair and shared by every fitness evaluation.
#[derive(Debug, Clone)]
pub struct PoolCoverage {
    pub pos: Vec<Bits>,
    pub neg: Vec<Bits>,
    pub n: usize,
}

impl PoolCoverage {
    pub fn build(pools: &CandidatePools, dataset: &BinarizedDataset) -> Self {
        let cover = |rules: &[Rule]| -> Vec<Bits> {
            rules.iter().map(|r| r.coverage(dataset)).collect()
        };
        PoolCoverage {
            pos: cover(&pools.positive),
            neg: cover(&pools.negative),
            n: dataset.n,
        }
    }
}

/// Batch prediction of a solution over a whole dataset.
#[derive(Debug, Clone)]
pub struct BatchPrediction {
    pub labels: Bits,
    /// Instances decided by a positive rule.
    pub covered_pos: Bits,
    /// Instances decided by a negative rule (not covered by any positive).
    pub covered_neg: Bits,
}

impl BatchPrediction {
    pub fn covered(&self) -> Bits {
        self.covered_pos.or(&self.covered_neg)
    }
}

/// Labels every instance: positive-rule coverage wins, then negative-rule
/// coverage, then the black-box label.
pub fn predict_batch(solution: &Solution, coverage: &PoolCoverage, h: &Bits) -> BatchPrediction {
    let mut covered_pos = Bits::new(coverage.n);
    for &r in solution.pos() {
        covered_pos.or_with(&coverage.pos[r as usize]);
    }
    let mut neg_union = Bits::new(coverage.n);
    for &r in solution.neg() {
        neg_union.or_with(&coverage.neg[r as usize]);
    }
    let covered_neg = neg_union.and_not(&covered_pos);
    let deferred_h = h.and_not(&covered_pos.or(&covered_neg));
    BatchPrediction {
        labels: covered_pos.or(&deferred_h),
        covered_pos,
        covered_neg,
    }
}

/// Single-instance prediction with provenance. Rules apply in stored id
/// order within each sign; the first match decides.
pub fn predict_instance(
    solution: &Solution,
    coverage: &PoolCoverage,
    instance: usize,
    h_label: bool,
) -> (bool, Provenance) {
    for &r in solution.pos() {
        if coverage.pos[r as usize].get(instance) {
            return (true, Provenance::PositiveRule(r));
        }
    }
    for &r in solution.neg() {
        if coverage.neg[r as usize].get(instance) {
            return (false, Provenance::NegativeRule(r));
        }
    }
    (h_label, Provenance::Deferred)
}

/// Fraction of instances decided by rules rather than deferred.
pub fn rule_coverage_fraction(solution: &Solution, coverage: &PoolCoverage) -> f64 {
    if coverage.n == 0 {
        return 0.0;
    }
    let prediction = predict_batch(solution, coverage, &Bits::new(coverage.n));
    prediction.covered().count_ones() as f64 / coverage.n as f64
}

/// Solution serialization: rules expanded to human-readable condition
/// strings.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionExport {
    pub pos_rules: Vec<Vec<String>>,
    pub neg_rules: Vec<Vec<String>>,
}

pub fn export_solution(
    solution: &Solution,
    pools: &CandidatePools,
    vocabulary: &[Condition],
) -> SolutionExport {
    SolutionExport {
        pos_rules: solution
            .pos()
            .iter()
            .map(|&r| pools.positive[r as usize].condition_strings(vocabulary))
            .collect(),
        neg_rules: solution
            .neg()
            .iter()
            .map(|&r| pools.negative[r as usize].condition_strings(vocabulary))
            .collect(),
    }
}

/// Deterministic if / else-if / else listing of a solution's rule sets.
pub fn render_rulesets(pos_rules: &[Vec<String>], neg_rules: &[Vec<String>]) -> String {
    let mut out = String::new();
    let join = |conds: &[String]| conds.join(" and ");
    if !pos_rules.is_empty() {
        for (i, rule) in pos_rules.iter().enumerate() {
            let head = if i == 0 { "If      " } else { "   or   " };
            out.push_str(head);
            out.push_str(&join(rule));
            out.push('\n');
        }
        out.push_str("        -> Y = 1\n");
    }
    if !neg_rules.is_empty() {
        for (i, rule) in neg_rules.iter().enumerate() {
            let head = if i == 0 { "Else if " } else { "   or   " };
            out.push_str(head);
            out.push_str(&join(rule));
            out.push('\n');
        }
        out.push_str("        -> Y = 0\n");
    }
    out.push_str("Else Y = h(x)\n");
    out
}

pub fn render(solution: &Solution, pools: &CandidatePools, vocabulary: &[Condition]) -> String {
    let export = export_solution(solution, pools, vocabulary);
    render_rulesets(&export.pos_rules, &export.neg_rules)
}
