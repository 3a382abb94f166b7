//! NSGA-II machinery: fast nondominated sorting, crowding distance, the
//! crowded comparison, binary tournaments, and the rule-set crossover and
//! mutation operators.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hybrid::Solution;
use crate::metrics::{dominates, ObjectivePoint};
use crate::rulemine::CandidatePools;

/// Partitions points into nondominated fronts: front 1 is the nondominated
/// set, front k+1 the nondominated set once fronts 1..k are removed.
pub fn fast_nondominated_sort(points: &[ObjectivePoint]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(points[i], points[j]) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if dominates(points[j], points[i]) {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// NSGA-II crowding distance within one front: per objective, boundary
/// solutions get infinity and interior ones accumulate the normalized gap
/// between their neighbors; an objective with zero range contributes 0.
pub fn crowding_distance(front: &[ObjectivePoint]) -> Vec<f64> {
    let m = front.len();
    let mut distance = vec![0.0f64; m];
    if m == 0 {
        return distance;
    }
    for objective in [|p: &ObjectivePoint| p.error, |p: &ObjectivePoint| p.bias] {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| objective(&front[a]).total_cmp(&objective(&front[b])));
        distance[order[0]] = f64::INFINITY;
        distance[order[m - 1]] = f64::INFINITY;
        let range = objective(&front[order[m - 1]]) - objective(&front[order[0]]);
        if range > 0.0 {
            for k in 1..m.saturating_sub(1) {
                let gap = objective(&front[order[k + 1]]) - objective(&front[order[k - 1]]);
                distance[order[k]] += gap / range;
            }
        }
    }
    distance
}

/// A population with front indices (1-based) and crowding distances
/// assigned; construction is the only way to obtain one, so comparisons
/// never see unranked solutions.
#[derive(Debug, Clone)]
pub struct RankedPopulation {
    pub solutions: Vec<Solution>,
    pub points: Vec<ObjectivePoint>,
    pub fronts: Vec<Vec<usize>>,
    pub front_of: Vec<usize>,
    pub crowding: Vec<f64>,
}

impl RankedPopulation {
    pub fn rank(solutions: Vec<Solution>, points: Vec<ObjectivePoint>) -> Self {
        assert_eq!(solutions.len(), points.len());
        let fronts = fast_nondominated_sort(&points);
        let mut front_of = vec![0usize; points.len()];
        let mut crowding = vec![0.0f64; points.len()];
        for (k, front) in fronts.iter().enumerate() {
            let front_points: Vec<ObjectivePoint> = front.iter().map(|&i| points[i]).collect();
            let distances = crowding_distance(&front_points);
            for (&i, d) in front.iter().zip(distances) {
                front_of[i] = k + 1;
                crowding[i] = d;
            }
        }
        RankedPopulation {
            solutions,
            points,
            fronts,
            front_of,
            crowding,
        }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// First front as solution indices.
    pub fn front1(&self) -> &[usize] {
        &self.fronts[0]
    }

    /// Crowded comparison: lower front wins, then larger crowding distance,
    /// then lower index as a deterministic tiebreak. `Less` means `a` ranks
    /// better than `b`. Total order on any ranked population.
    pub fn crowded_compare(&self, a: usize, b: usize) -> Ordering {
        self.front_of[a]
            .cmp(&self.front_of[b])
            .then_with(|| self.crowding[b].total_cmp(&self.crowding[a]))
            .then_with(|| a.cmp(&b))
    }

    /// Binary tournament: two uniform draws with replacement, the crowded
    /// comparison picks the winner.
    pub fn tournament_select(&self, rng: &mut impl Rng) -> usize {
        assert!(!self.is_empty(), "tournament over an empty population");
        let a = rng.gen_range(0..self.len());
        let b = rng.gen_range(0..self.len());
        match self.crowded_compare(a, b) {
            Ordering::Greater => b,
            _ => a,
        }
    }
}

/// Uniform crossover over rule sets: each distinct rule appearing in either
/// parent (per sign) is included in the child with probability 0.5.
pub fn crossover(p1: &Solution, p2: &Solution, rng: &mut impl Rng) -> Solution {
    fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }
    let pos: Vec<u32> = union(p1.pos(), p2.pos())
        .into_iter()
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    let neg: Vec<u32> = union(p1.neg(), p2.neg())
        .into_iter()
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    Solution::new(pos, neg)
}

fn keep_rules(solution: &Solution, keep_prob: f64, rng: &mut impl Rng) -> (Vec<u32>, Vec<u32>) {
    let keep = |ids: &[u32], rng: &mut dyn rand::RngCore| -> Vec<u32> {
        ids.iter()
            .copied()
            .filter(|_| rng.gen_bool(keep_prob))
            .collect()
    };
    (keep(solution.pos(), rng), keep(solution.neg(), rng))
}

/// `k` distinct picks from `candidates` via partial Fisher-Yates.
fn sample_without_replacement(
    mut candidates: Vec<u32>,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<u32> {
    let k = k.min(candidates.len());
    for i in 0..k {
        let j = rng.gen_range(i..candidates.len());
        candidates.swap(i, j);
    }
    candidates.truncate(k);
    candidates
}

fn add_absent_rules(
    (kept_pos, kept_neg): (Vec<u32>, Vec<u32>),
    pools: &CandidatePools,
    n_add: usize,
    rng: &mut impl Rng,
) -> Solution {
    let mut quota_pos = n_add / 2;
    let mut quota_neg = n_add / 2;
    if n_add % 2 == 1 {
        if rng.gen_bool(0.5) {
            quota_pos += 1;
        } else {
            quota_neg += 1;
        }
    }
    let absent = |pool_len: usize, kept: &[u32]| -> Vec<u32> {
        (0..pool_len as u32).filter(|id| !kept.contains(id)).collect()
    };
    let mut pos = kept_pos;
    let mut neg = kept_neg;
    let add_pos = sample_without_replacement(absent(pools.positive.len(), &pos), quota_pos, rng);
    pos.extend(add_pos);
    let add_neg = sample_without_replacement(absent(pools.negative.len(), &neg), quota_neg, rng);
    neg.extend(add_neg);
    Solution::new(pos, neg)
}

/// Mutation: each existing rule is kept with probability 0.9, then n rules
/// drawn from Uniform{1..ceil(avg parent length)} are added from the pool
/// rules absent from the child, split evenly between signs (odd remainder
/// to a random sign) and capped by availability.
pub fn mutate(
    child: &Solution,
    pools: &CandidatePools,
    avg_parent_len: usize,
    rng: &mut impl Rng,
) -> Solution {
    let kept = keep_rules(child, 0.9, rng);
    let n_add = rng.gen_range(1..=avg_parent_len.max(1));
    add_absent_rules(kept, pools, n_add, rng)
}

/// Test hook: mutation with the keep probability and addition count forced.
pub fn mutate_with(
    child: &Solution,
    pools: &CandidatePools,
    keep_prob: f64,
    n_add: usize,
    rng: &mut impl Rng,
) -> Solution {
    let kept = keep_rules(child, keep_prob, rng);
    add_absent_rules(kept, pools, n_add, rng)
}

/// Average total rule count of two parents, rounded up, at least 1.
pub fn average_parent_len(p1: &Solution, p2: &Solution) -> usize {
    (p1.n_rules() + p2.n_rules()).div_ceil(2).max(1)
}

/// N offspring, each from two independent tournaments, crossover, then
/// mutation.
pub fn produce_offsprings(
    ranked: &RankedPopulation,
    n: usize,
    pools: &CandidatePools,
    rng: &mut impl Rng,
) -> Result<Vec<Solution>> {
    if n == 0 {
        return Err(Error::Argument("offspring count must be at least 1".into()));
    }
    if ranked.is_empty() {
        return Err(Error::Argument("cannot reproduce an empty population".into()));
    }
    let mut children = Vec::with_capacity(n);
    for _ in 0..n {
        let p1 = &ranked.solutions[ranked.tournament_select(rng)];
        let p2 = &ranked.solutions[ranked.tournament_select(rng)];
        let child = crossover(p1, p2, rng);
        children.push(mutate(&child, pools, average_parent_len(p1, p2), rng));
    }
    Ok(children)
}
