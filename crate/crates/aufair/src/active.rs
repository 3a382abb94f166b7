//! Budgeted label acquisition: the oracle, the query state that enforces
//! the budget, and the query-by-bagging uncertainty policy over the current
//! first front.

use rand::Rng;
use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hybrid::{predict_batch, PoolCoverage, Solution};

/// Ground-truth labels, visible to the learner only through acquisition.
#[derive(Debug, Clone)]
pub struct LabelOracle {
    labels: Vec<bool>,
}

impl LabelOracle {
    pub fn new(labels: Vec<bool>) -> Self {
        LabelOracle { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> bool {
        self.labels[index]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcquisitionEntry {
    pub round: usize,
    pub index: usize,
    pub label: bool,
}

/// The acquired index set Q, its labels, and the remaining budget. |Q| can
/// never exceed the budget; re-acquiring an index returns the stored label
/// without charge.
#[derive(Debug, Clone)]
pub struct QueryState {
    budget: usize,
    batch: usize,
    acquired: Vec<Option<bool>>,
    in_q: Bits,
    log: Vec<AcquisitionEntry>,
    rounds: usize,
    version: u64,
}

impl QueryState {
    pub fn new(n: usize, budget: usize, batch: usize) -> Self {
        QueryState {
            budget,
            batch,
            acquired: vec![None; n],
            in_q: Bits::new(n),
            log: Vec::new(),
            rounds: 0,
            version: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.acquired.len()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn len_q(&self) -> usize {
        self.in_q.count_ones()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.len_q()
    }

    /// Bumped on every acquisition; fitness caches key on it.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn labeled_mask(&self) -> &Bits {
        &self.in_q
    }

    pub fn label(&self, index: usize) -> Option<bool> {
        self.acquired[index]
    }

    pub fn log(&self) -> &[AcquisitionEntry] {
        &self.log
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Acquired labels as a bitset (unacquired bits are 0; mask with
    /// `labeled_mask`).
    pub fn labels_bits(&self) -> Bits {
        Bits::from_fn(self.acquired.len(), |i| self.acquired[i] == Some(true))
    }

    /// Black-box labels overridden by every acquired true label.
    pub fn effective_labels(&self, h: &Bits) -> Bits {
        h.and_not(&self.in_q).or(&self.labels_bits())
    }

    /// Acquires one label, charging the budget only on first acquisition.
    pub fn acquire(&mut self, index: usize, oracle: &LabelOracle) -> Result<bool> {
        if let Some(label) = self.acquired[index] {
            return Ok(label);
        }
        if self.len_q() >= self.budget {
            return Err(Error::State("label budget exhausted".into()));
        }
        let label = oracle.label(index);
        self.acquired[index] = Some(label);
        self.in_q.set(index, true);
        self.log.push(AcquisitionEntry {
            round: self.rounds,
            index,
            label,
        });
        self.version += 1;
        Ok(label)
    }

    /// CSV export of the acquisition log: iteration, instance index, label.
    pub fn write_log_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "index", "label"])?;
        for entry in &self.log {
            w.write_record([
                entry.round.to_string(),
                entry.index.to_string(),
                u8::from(entry.label).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One bootstrap resample of the n training instances: per-instance draw
/// counts.
#[derive(Debug, Clone)]
pub struct BootstrapSample {
    pub weights: Vec<u32>,
    pub total: u32,
}

pub fn draw_bootstrap(n: usize, rng: &mut impl Rng) -> BootstrapSample {
    let mut weights = vec![0u32; n];
    for _ in 0..n {
        weights[rng.gen_range(0..n)] += 1;
    }
    BootstrapSample {
        weights,
        total: n as u32,
    }
}

fn weighted_positive_fraction(
    cover: &Bits,
    labels: &Bits,
    sample: &BootstrapSample,
) -> Option<f64> {
    let mut num = 0u64;
    let mut den = 0u64;
    for i in cover.iter_ones() {
        let w = u64::from(sample.weights[i]);
        den += w;
        if labels.get(i) {
            num += w;
        }
    }
    (den > 0).then(|| num as f64 / den as f64)
}

/// Probability the deciding rule assigns to an instance: the positive
/// fraction of the bootstrap instances that rule captures. Deferred
/// instances get the black-box decision as a hard 0/1 probability; a rule
/// capturing nothing in the resample falls back to the solution's positive
/// rate on the resample.
pub fn rule_probability(
    solution: &Solution,
    coverage: &PoolCoverage,
    labels: &Bits,
    h: &Bits,
    sample: &BootstrapSample,
    instance: usize,
) -> f64 {
    let deciding = solution
        .pos()
        .iter()
        .map(|&r| &coverage.pos[r as usize])
        .chain(solution.neg().iter().map(|&r| &coverage.neg[r as usize]))
        .find(|cov| cov.get(instance));
    match deciding {
        Some(cover) => weighted_positive_fraction(cover, labels, sample).unwrap_or_else(|| {
            let prediction = predict_batch(solution, coverage, h);
            weighted_positive_fraction(&Bits::ones(coverage.n), &prediction.labels, sample)
                .unwrap_or(0.0)
        }),
        None => f64::from(h.get(instance)),
    }
}

/// How multiple front-1 solutions combine into one uncertainty score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMode {
    /// Average the solutions' probabilities per bootstrap sample, then take
    /// the variance across samples.
    #[default]
    MeanThenVariance,
    /// Variance across samples per solution, averaged over solutions.
    VariancePerSolutionThenMean,
}

fn batch_probabilities(
    solution: &Solution,
    coverage: &PoolCoverage,
    labels: &Bits,
    h: &Bits,
    sample: &BootstrapSample,
    out: &mut [f64],
) {
    let n = coverage.n;
    let mut assigned = Bits::new(n);
    let mut fallback: Option<f64> = None;
    let mut rules: Vec<&Bits> = solution
        .pos()
        .iter()
        .map(|&r| &coverage.pos[r as usize])
        .collect();
    rules.extend(solution.neg().iter().map(|&r| &coverage.neg[r as usize]));
    for cover in rules {
        let newly = cover.and_not(&assigned);
        if !newly.any() {
            continue;
        }
        let p = match weighted_positive_fraction(cover, labels, sample) {
            Some(p) => p,
            None => *fallback.get_or_insert_with(|| {
                let prediction = predict_batch(solution, coverage, h);
                weighted_positive_fraction(&Bits::ones(n), &prediction.labels, sample)
                    .unwrap_or(0.0)
            }),
        };
        for i in newly.iter_ones() {
            out[i] = p;
        }
        assigned.or_with(cover);
    }
    for i in 0..n {
        if !assigned.get(i) {
            out[i] = f64::from(h.get(i));
        }
    }
}

pub(crate) fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Per-instance uncertainty over the given bootstrap resamples.
pub fn uncertainty_scores_from_samples(
    front1: &[&Solution],
    coverage: &PoolCoverage,
    labels: &Bits,
    h: &Bits,
    samples: &[BootstrapSample],
    mode: UncertaintyMode,
) -> Vec<f64> {
    let n = coverage.n;
    assert!(!front1.is_empty(), "uncertainty needs a non-empty front");
    if samples.len() < 2 {
        log::warn!(
            "{} bootstrap sample(s) give degenerate all-zero uncertainty scores",
            samples.len()
        );
    }
    match mode {
        UncertaintyMode::MeanThenVariance => {
            // mean probability per (bootstrap, instance)
            let mut per_boot: Vec<Vec<f64>> = Vec::with_capacity(samples.len());
            let mut probs = vec![0.0; n];
            for sample in samples {
                let mut mean = vec![0.0; n];
                for solution in front1 {
                    batch_probabilities(solution, coverage, labels, h, sample, &mut probs);
                    for (m, p) in mean.iter_mut().zip(&probs) {
                        *m += p;
                    }
                }
                let k = front1.len() as f64;
                for m in &mut mean {
                    *m /= k;
                }
                per_boot.push(mean);
            }
            (0..n)
                .map(|i| {
                    let series: Vec<f64> = per_boot.iter().map(|b| b[i]).collect();
                    population_variance(&series)
                })
                .collect()
        }
        UncertaintyMode::VariancePerSolutionThenMean => {
            let mut acc = vec![0.0; n];
            let mut probs = vec![0.0; n];
            for solution in front1 {
                let mut sum = vec![0.0; n];
                let mut sumsq = vec![0.0; n];
                for sample in samples {
                    batch_probabilities(solution, coverage, labels, h, sample, &mut probs);
                    for i in 0..n {
                        sum[i] += probs[i];
                        sumsq[i] += probs[i] * probs[i];
                    }
                }
                let k = samples.len() as f64;
                for i in 0..n {
                    let mean = sum[i] / k;
                    acc[i] += (sumsq[i] / k - mean * mean).max(0.0);
                }
            }
            let k = front1.len() as f64;
            acc.iter_mut().for_each(|v| *v /= k);
            acc
        }
    }
}

/// Per-instance uncertainty: variance over `nboot` fresh bootstrap
/// estimates of the front's probabilistic output.
pub fn uncertainty_scores(
    front1: &[&Solution],
    coverage: &PoolCoverage,
    labels: &Bits,
    h: &Bits,
    nboot: usize,
    mode: UncertaintyMode,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let samples: Vec<BootstrapSample> = (0..nboot)
        .map(|_| draw_bootstrap(coverage.n, rng))
        .collect();
    uncertainty_scores_from_samples(front1, coverage, labels, h, &samples, mode)
}

/// Prefix-sum tree for sequential weighted draws without replacement.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            let mut idx = i + 1;
            while idx <= n {
                tree[idx] += w;
                idx += idx & idx.wrapping_neg();
            }
        }
        Fenwick { tree }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut idx = i + 1;
        while idx < self.tree.len() {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum reaches `target`.
    fn search(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0usize;
        let mut mask = n.next_power_of_two();
        while mask > 0 {
            let next = pos + mask;
            if next <= n && self.tree[next] < target {
                target -= self.tree[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Draws up to `m` distinct indices from the candidates, each draw with
/// probability proportional to its weight; switches to uniform once no
/// weight mass remains.
fn weighted_sample_without_replacement(
    candidates: &[usize],
    weights: &[f64],
    m: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let m = m.min(candidates.len());
    let mut local: Vec<f64> = candidates.iter().map(|&i| weights[i].max(0.0)).collect();
    let mut total: f64 = local.iter().sum();
    let mut fenwick = Fenwick::new(&local);
    let mut taken = vec![false; candidates.len()];
    let mut picked = Vec::with_capacity(m);
    let mut uniform_mode = total <= 0.0;
    if uniform_mode {
        local = vec![1.0; candidates.len()];
        total = local.iter().sum();
        fenwick = Fenwick::new(&local);
    }
    while picked.len() < m {
        if !uniform_mode && total <= 1e-12 {
            // remaining candidates all carry zero score
            uniform_mode = true;
            local = taken
                .iter()
                .map(|&t| if t { 0.0 } else { 1.0 })
                .collect();
            total = local.iter().sum();
            fenwick = Fenwick::new(&local);
        }
        let target = rng.gen::<f64>() * total;
        let mut k = fenwick.search(target);
        if taken[k] || local[k] <= 0.0 {
            // float drift; take the next available candidate
            k = (0..candidates.len())
                .map(|j| (k + j) % candidates.len())
                .find(|&j| !taken[j])
                .expect("m <= candidate count");
        }
        taken[k] = true;
        picked.push(candidates[k]);
        total -= local[k];
        fenwick.add(k, -local[k]);
        local[k] = 0.0;
    }
    picked
}

/// Acquires up to `b` labels (bounded by the remaining budget and the
/// unlabeled count), sampling unlabeled instances with probability
/// proportional to their uncertainty score.
pub fn query_labels(
    front1: &[&Solution],
    b: usize,
    state: &mut QueryState,
    oracle: &LabelOracle,
    coverage: &PoolCoverage,
    h: &Bits,
    nboot: usize,
    mode: UncertaintyMode,
    rng: &mut impl Rng,
) -> Result<()> {
    if state.remaining() == 0 {
        return Err(Error::State("label budget exhausted".into()));
    }
    let unlabeled: Vec<usize> = (0..state.n())
        .filter(|&i| state.label(i).is_none())
        .collect();
    if unlabeled.is_empty() {
        log::warn!("no unlabeled instances remain; acquisition is a no-op");
        return Ok(());
    }
    let labels = state.effective_labels(h);
    let scores = uncertainty_scores(front1, coverage, &labels, h, nboot, mode, rng);
    let m = b.min(state.remaining()).min(unlabeled.len());
    let picked = weighted_sample_without_replacement(&unlabeled, &scores, m, rng);
    for index in picked {
        state.acquire(index, oracle)?;
    }
    state.rounds += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{BinarizedDataset, Condition, ConditionKind};
    use crate::rulemine::{CandidatePools, Rule, Sign};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mk_dataset(columns: Vec<Bits>, h: Bits) -> BinarizedDataset {
        let n = h.len();
        let vocabulary = (0..columns.len())
            .map(|j| Condition {
                feature: j,
                feature_name: format!("f{j}"),
                kind: ConditionKind::AtLeast { threshold: 0.0 },
            })
            .collect();
        BinarizedDataset {
            n,
            vocabulary,
            columns,
            z: Bits::new(n),
            h,
            y: None,
        }
    }

    fn mk_pools(n_pos: usize, n_neg: usize) -> CandidatePools {
        let mk = |k: usize, sign: Sign| {
            (0..k)
                .map(|i| Rule {
                    conditions: vec![i as u32],
                    sign,
                    support: 1,
                    precision: 1.0,
                })
                .collect()
        };
        CandidatePools {
            positive: mk(n_pos, Sign::Positive),
            negative: mk(n_neg, Sign::Negative),
        }
    }

    fn uniform_sample(n: usize) -> BootstrapSample {
        BootstrapSample {
            weights: vec![1; n],
            total: n as u32,
        }
    }

    #[test]
    fn oracle_idempotence_and_budget_charging() {
        let oracle = LabelOracle::new(vec![true, false, true, false]);
        let mut state = QueryState::new(4, 2, 1);
        assert!(state.acquire(0, &oracle).unwrap());
        assert_eq!(state.len_q(), 1);
        // re-acquiring is free and returns the stored label
        assert!(state.acquire(0, &oracle).unwrap());
        assert_eq!(state.len_q(), 1);
        assert!(!state.acquire(1, &oracle).unwrap());
        assert_eq!(state.len_q(), 2);
        // budget exhausted
        assert!(matches!(state.acquire(2, &oracle), Err(Error::State(_))));
        assert_eq!(state.len_q(), 2);
        // but re-reads still work
        assert!(state.acquire(0, &oracle).unwrap());
    }

    #[test]
    fn effective_labels_override_h() {
        let oracle = LabelOracle::new(vec![true, true, true]);
        let mut state = QueryState::new(3, 3, 1);
        let h = Bits::from_bools(&[false, false, true]);
        assert_eq!(state.effective_labels(&h), h);
        state.acquire(0, &oracle).unwrap();
        assert_eq!(
            state.effective_labels(&h),
            Bits::from_bools(&[true, false, true])
        );
    }

    #[test]
    fn rule_probability_positive_fraction() {
        // rule {c0} captures instances 0..10; 8 of them labeled positive
        let n = 12;
        let c0 = Bits::from_fn(n, |i| i < 10);
        let labels = Bits::from_fn(n, |i| i < 8);
        let h = Bits::from_fn(n, |i| i % 2 == 0);
        let ds = mk_dataset(vec![c0], h.clone());
        let pools = mk_pools(1, 0);
        let coverage = PoolCoverage::build(&pools, &ds);
        let solution = Solution::new(vec![0], vec![]);
        let sample = uniform_sample(n);
        let p = rule_probability(&solution, &coverage, &labels, &h, &sample, 3);
        assert!((p - 0.8).abs() < 1e-12);
        // deferred instance: probability is the black-box decision
        assert_eq!(
            rule_probability(&solution, &coverage, &labels, &h, &sample, 10),
            1.0
        );
        assert_eq!(
            rule_probability(&solution, &coverage, &labels, &h, &sample, 11),
            0.0
        );
    }

    #[test]
    fn rule_probability_zero_capture_falls_back() {
        let n = 8;
        let c0 = Bits::from_fn(n, |i| i < 2);
        let labels = Bits::from_fn(n, |i| i < 4);
        let h = Bits::from_fn(n, |i| i >= 6);
        let ds = mk_dataset(vec![c0], h.clone());
        let pools = mk_pools(1, 0);
        let coverage = PoolCoverage::build(&pools, &ds);
        let solution = Solution::new(vec![0], vec![]);
        // bootstrap that never drew the rule's instances
        let mut weights = vec![1u32; n];
        weights[0] = 0;
        weights[1] = 0;
        weights[6] = 2;
        weights[7] = 2;
        let sample = BootstrapSample { weights, total: 8 };
        // solution labels: rule covers {0,1} -> 1, rest defer to h
        // positive rate over the sample: instances 6,7 weigh 2 each -> 4/8
        let p = rule_probability(&solution, &coverage, &labels, &h, &sample, 0);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn variance_helper_matches_hand_values() {
        let alternating: Vec<f64> = (0..10).map(|i| f64::from(i % 2 == 0)).collect();
        assert!((population_variance(&alternating) - 0.25).abs() < 1e-12);
        assert_eq!(population_variance(&[0.7; 10]), 0.0);
        assert_eq!(population_variance(&[0.3]), 0.0);
    }

    #[test]
    fn bootstrap_invariant_fronts_have_zero_scores() {
        // the empty solution defers everywhere: probability = h regardless
        // of the resample, so every score is exactly zero
        let n = 30;
        let c0 = Bits::from_fn(n, |i| i % 3 == 0);
        let h = Bits::from_fn(n, |i| i % 2 == 0);
        let ds = mk_dataset(vec![c0], h.clone());
        let pools = mk_pools(1, 0);
        let coverage = PoolCoverage::build(&pools, &ds);
        let empty = Solution::empty();
        let front = [&empty];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scores = uncertainty_scores(
            &front,
            &coverage,
            &h,
            &h,
            10,
            UncertaintyMode::MeanThenVariance,
            &mut rng,
        );
        assert!(scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn nboot_one_gives_zero_scores() {
        let n = 10;
        let c0 = Bits::from_fn(n, |i| i < 5);
        let h = Bits::from_fn(n, |i| i % 2 == 0);
        let ds = mk_dataset(vec![c0], h.clone());
        let pools = mk_pools(1, 0);
        let coverage = PoolCoverage::build(&pools, &ds);
        let solution = Solution::new(vec![0], vec![]);
        let front = [&solution];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scores = uncertainty_scores(
            &front,
            &coverage,
            &h,
            &h,
            1,
            UncertaintyMode::MeanThenVariance,
            &mut rng,
        );
        assert!(scores.iter().all(|&s| s == 0.0));
    }

    fn query_fixture(n: usize) -> (BinarizedDataset, CandidatePools, Bits) {
        let c0 = Bits::from_fn(n, |i| i % 4 == 0);
        let c1 = Bits::from_fn(n, |i| i % 4 == 1);
        let h = Bits::from_fn(n, |i| i % 3 == 0);
        let ds = mk_dataset(vec![c0, c1], h.clone());
        (ds, mk_pools(2, 0), h)
    }

    #[test]
    fn query_acquires_all_when_few_unlabeled() {
        let n = 10;
        let (ds, pools, h) = query_fixture(n);
        let coverage = PoolCoverage::build(&pools, &ds);
        let oracle = LabelOracle::new((0..n).map(|i| i % 2 == 0).collect());
        let mut state = QueryState::new(n, n, 3);
        for i in 0..n - 3 {
            state.acquire(i, &oracle).unwrap();
        }
        let solution = Solution::new(vec![0], vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        query_labels(
            &[&solution],
            3,
            &mut state,
            &oracle,
            &coverage,
            &h,
            10,
            UncertaintyMode::MeanThenVariance,
            &mut rng,
        )
        .unwrap();
        assert_eq!(state.len_q(), n);
        assert_eq!(state.rounds(), 1);
    }

    #[test]
    fn query_respects_remaining_budget() {
        let n = 20;
        let (ds, pools, h) = query_fixture(n);
        let coverage = PoolCoverage::build(&pools, &ds);
        let oracle = LabelOracle::new(vec![true; n]);
        let mut state = QueryState::new(n, 4, 5);
        state.acquire(0, &oracle).unwrap();
        state.acquire(1, &oracle).unwrap();
        let solution = Solution::new(vec![0], vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        query_labels(
            &[&solution],
            5,
            &mut state,
            &oracle,
            &coverage,
            &h,
            10,
            UncertaintyMode::MeanThenVariance,
            &mut rng,
        )
        .unwrap();
        assert_eq!(state.len_q(), 4);
    }

    #[test]
    fn dominant_score_mass_is_drawn_first() {
        let candidates: Vec<usize> = (0..10).collect();
        let mut weights = vec![0.0; 10];
        weights[7] = 5.0;
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picked = weighted_sample_without_replacement(&candidates, &weights, 3, &mut rng);
            assert_eq!(picked[0], 7);
            assert_eq!(picked.len(), 3);
            // distinct
            let mut sorted = picked.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 3);
        }
    }

    #[test]
    fn all_zero_scores_sample_uniformly() {
        let candidates: Vec<usize> = (0..100).collect();
        let weights = vec![0.0; 100];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = vec![0usize; 100];
        for _ in 0..2000 {
            for i in weighted_sample_without_replacement(&candidates, &weights, 5, &mut rng) {
                counts[i] += 1;
            }
        }
        // every candidate should be reachable
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn acquisition_deterministic_per_seed() {
        let n = 40;
        let (ds, pools, h) = query_fixture(n);
        let coverage = PoolCoverage::build(&pools, &ds);
        let oracle = LabelOracle::new((0..n).map(|i| i % 5 == 0).collect());
        let solution = Solution::new(vec![0, 1], vec![]);
        let run = |seed: u64| {
            let mut state = QueryState::new(n, 10, 5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            query_labels(
                &[&solution],
                5,
                &mut state,
                &oracle,
                &coverage,
                &h,
                10,
                UncertaintyMode::MeanThenVariance,
                &mut rng,
            )
            .unwrap();
            state.log().iter().map(|e| e.index).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
    }

    proptest! {
        /// |Q| never exceeds B under any interleaving of acquisitions.
        #[test]
        fn budget_never_exceeded(
            budget in 0usize..12,
            indices in proptest::collection::vec(0usize..30, 0..80),
        ) {
            let oracle = LabelOracle::new((0..30).map(|i| i % 2 == 0).collect());
            let mut state = QueryState::new(30, budget, 3);
            for i in indices {
                let _ = state.acquire(i, &oracle);
                prop_assert!(state.len_q() <= budget);
            }
        }
    }
}
