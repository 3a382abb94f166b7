//! Error and bias objectives, Pareto dominance, front extraction, and the
//! 2-D hypervolume indicator used to compare frontiers.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// An (error, bias) pair; both objectives are minimized and live in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub error: f64,
    pub bias: f64,
}

impl ObjectivePoint {
    pub fn new(error: f64, bias: f64) -> Self {
        ObjectivePoint { error, bias }
    }
}

/// Which bias definition fitness uses. Equal opportunity is the default;
/// demographic parity is the optional alternate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasMetric {
    #[default]
    EqualOpportunity,
    DemographicParity,
}

/// Misclassification rate over the labeled index set `q`.
pub fn error_rate(predictions: &Bits, truth: &Bits, q: &Bits) -> Result<f64> {
    let labeled = q.count_ones();
    if labeled == 0 {
        return Err(Error::UndefinedFitness(
            "error rate needs at least one labeled instance".into(),
        ));
    }
    Ok(predictions.xor_and_count(truth, q) as f64 / labeled as f64)
}

/// Absolute true-positive-rate gap between the two protected groups, over
/// labeled positives in `q`. With smoothing each group's TPR is
/// (TP + 1) / (P + 2); without it both groups must have a labeled positive.
pub fn bias_eqopp(
    predictions: &Bits,
    truth: &Bits,
    z: &Bits,
    q: &Bits,
    smoothing: bool,
) -> Result<f64> {
    let labeled_pos = q.and(truth);
    let pos1 = labeled_pos.and(z);
    let pos0 = labeled_pos.and_not(z);
    let (p0, p1) = (pos0.count_ones(), pos1.count_ones());
    let tp0 = pos0.and_count(predictions);
    let tp1 = pos1.and_count(predictions);
    let (tpr0, tpr1) = if smoothing {
        (
            (tp0 + 1) as f64 / (p0 + 2) as f64,
            (tp1 + 1) as f64 / (p1 + 2) as f64,
        )
    } else {
        if p0 == 0 || p1 == 0 {
            return Err(Error::UndefinedFitness(
                "a protected group has no labeled positives (enable smoothing)".into(),
            ));
        }
        (tp0 as f64 / p0 as f64, tp1 as f64 / p1 as f64)
    };
    Ok((tpr0 - tpr1).abs())
}

/// Absolute positive-rate gap between the two protected groups over `q`
/// (demographic parity); no true labels involved.
pub fn bias_parity(predictions: &Bits, z: &Bits, q: &Bits, smoothing: bool) -> Result<f64> {
    let g1 = q.and(z);
    let g0 = q.and_not(z);
    let (n0, n1) = (g0.count_ones(), g1.count_ones());
    let r0 = g0.and_count(predictions);
    let r1 = g1.and_count(predictions);
    let (rate0, rate1) = if smoothing {
        (
            (r0 + 1) as f64 / (n0 + 2) as f64,
            (r1 + 1) as f64 / (n1 + 2) as f64,
        )
    } else {
        if n0 == 0 || n1 == 0 {
            return Err(Error::UndefinedFitness(
                "a protected group has no labeled instances (enable smoothing)".into(),
            ));
        }
        (r0 as f64 / n0 as f64, r1 as f64 / n1 as f64)
    };
    Ok((rate0 - rate1).abs())
}

/// Strict Pareto dominance: `a` is no worse in both objectives and strictly
/// better in at least one.
pub fn dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool {
    (a.error < b.error && a.bias <= b.bias) || (a.error <= b.error && a.bias < b.bias)
}

/// Indices of the points not dominated by any other point. Duplicates of a
/// nondominated point are all retained.
pub fn pareto_front(points: &[ObjectivePoint]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|&p| dominates(p, points[i])))
        .collect()
}

/// Area dominated by the front relative to `reference`, both objectives
/// minimized. Invariant to point order and duplicates.
pub fn hypervolume(front: &[ObjectivePoint], reference: ObjectivePoint) -> Result<f64> {
    if front.is_empty() {
        return Ok(0.0);
    }
    for p in front {
        if p.error > reference.error || p.bias > reference.bias {
            return Err(Error::Argument(format!(
                "point ({}, {}) exceeds the reference ({}, {})",
                p.error, p.bias, reference.error, reference.bias
            )));
        }
    }
    let nd = pareto_front(front);
    let mut pts: Vec<ObjectivePoint> = nd.iter().map(|&i| front[i]).collect();
    pts.sort_by(|a, b| a.error.total_cmp(&b.error).then(a.bias.total_cmp(&b.bias)));
    pts.dedup_by(|a, b| a.error == b.error && a.bias == b.bias);

    // Staircase sweep in increasing error; each step covers the strip up to
    // the next point's error coordinate.
    let mut area = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let next_error = if i + 1 < pts.len() {
            pts[i + 1].error
        } else {
            reference.error
        };
        area += (next_error - p.error) * (reference.bias - p.bias);
    }
    Ok(area)
}
