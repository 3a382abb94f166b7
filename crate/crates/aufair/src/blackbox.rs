//! The fixed decision-maker h. Either backed by a label column (fully
//! opaque) or a linear model trained with L1-regularized logistic loss, in
//! which case protected-feature-flip variants can be derived. A
//! `DecisionMaker` is never mutated after construction.

use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::bits::Bits;
use crate::dataio::{FeatureData, RawTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
enum SlotKind {
    Numeric { feature: usize, mean: f64, std: f64 },
    Category { feature: usize, category: String },
    Protected,
}

#[derive(Debug, Clone, Serialize)]
struct Slot {
    name: String,
    kind: SlotKind,
}

/// Maps raw table rows to a dense feature vector: standardized numerics,
/// one-hot categoricals, and the protected flag as a single 0/1 slot so
/// that flipping it is exact.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureEncoder {
    slots: Vec<Slot>,
}

impl FeatureEncoder {
    pub fn fit(table: &RawTable, rows: &[usize]) -> Self {
        let mut slots = Vec::new();
        for (fi, feature) in table.features.iter().enumerate() {
            if fi == table.protected_feature {
                slots.push(Slot {
                    name: feature.name.clone(),
                    kind: SlotKind::Protected,
                });
                continue;
            }
            match &feature.data {
                FeatureData::Numeric(values) => {
                    let observed: Vec<f64> = rows.iter().filter_map(|&r| values[r]).collect();
                    if observed.is_empty() {
                        continue;
                    }
                    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
                    let var = observed.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / observed.len() as f64;
                    let std = var.sqrt();
                    if std == 0.0 {
                        continue;
                    }
                    slots.push(Slot {
                        name: feature.name.clone(),
                        kind: SlotKind::Numeric {
                            feature: fi,
                            mean,
                            std,
                        },
                    });
                }
                FeatureData::Categorical { values, cats } => {
                    let mut present: Vec<&str> = Vec::new();
                    for &r in rows {
                        let c = cats[values[r] as usize].as_str();
                        if !present.contains(&c) {
                            present.push(c);
                        }
                    }
                    present.sort_unstable();
                    if present.len() < 2 {
                        continue;
                    }
                    for c in present {
                        slots.push(Slot {
                            name: format!("{}={}", feature.name, c),
                            kind: SlotKind::Category {
                                feature: fi,
                                category: c.to_string(),
                            },
                        });
                    }
                }
            }
        }
        FeatureEncoder { slots }
    }

    pub fn width(&self) -> usize {
        self.slots.len()
    }

    /// Encodes one row into `out`; missing numerics map to the mean
    /// (0 after standardization).
    pub fn encode_into(
        &self,
        table: &RawTable,
        row: usize,
        override_z: Option<bool>,
        out: &mut [f64],
    ) {
        for (slot, o) in self.slots.iter().zip(out.iter_mut()) {
            *o = match &slot.kind {
                SlotKind::Numeric { feature, mean, std } => {
                    match &table.features[*feature].data {
                        FeatureData::Numeric(values) => match values[row] {
                            Some(v) => (v - mean) / std,
                            None => 0.0,
                        },
                        _ => unreachable!(),
                    }
                }
                SlotKind::Category { feature, category } => {
                    match &table.features[*feature].data {
                        FeatureData::Categorical { values, cats } => {
                            f64::from(cats[values[row] as usize] == *category)
                        }
                        _ => unreachable!(),
                    }
                }
                SlotKind::Protected => f64::from(override_z.unwrap_or(table.z[row])),
            };
        }
    }
}

/// The black box: outputs hard binary decisions, mapping fixed after
/// construction.
#[derive(Debug, Clone)]
pub enum DecisionMaker {
    /// Labels read from the data file; can only score its source dataset.
    ColumnBacked { labels: Vec<bool>, fingerprint: u64 },
    Linear(LinearModel),
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub(crate) encoder: FeatureEncoder,
    pub(crate) weights: Vec<f64>,
    pub(crate) intercept: f64,
    pub(crate) protected_override: Option<bool>,
}

#[derive(Serialize)]
struct WeightExport<'a> {
    name: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct LinearExport<'a> {
    intercept: f64,
    threshold: f64,
    protected_override: Option<bool>,
    weights: Vec<WeightExport<'a>>,
}

impl LinearModel {
    fn score(&self, table: &RawTable, row: usize, buf: &mut [f64]) -> f64 {
        self.encoder
            .encode_into(table, row, self.protected_override, buf);
        self.intercept
            + self
                .weights
                .iter()
                .zip(buf.iter())
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }

    /// JSON document with intercept and named weights, for reproducibility.
    pub fn to_json(&self) -> Result<String> {
        let export = LinearExport {
            intercept: self.intercept,
            threshold: 0.5,
            protected_override: self.protected_override,
            weights: self
                .encoder
                .slots
                .iter()
                .zip(&self.weights)
                .map(|(s, &w)| WeightExport {
                    name: &s.name,
                    weight: w,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&export)?)
    }
}

/// Fingerprint tying a column-backed decision-maker to its source table.
pub fn table_fingerprint(table: &RawTable) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    table.n.hash(&mut hasher);
    table.z.hash(&mut hasher);
    for f in &table.features {
        f.name.hash(&mut hasher);
    }
    hasher.finish()
}

impl DecisionMaker {
    pub fn from_column(table: &RawTable) -> Result<Self> {
        match &table.h {
            Some(labels) => Ok(DecisionMaker::ColumnBacked {
                labels: labels.clone(),
                fingerprint: table_fingerprint(table),
            }),
            None => Err(Error::Validation(
                "table has no blackbox_label column".into(),
            )),
        }
    }

    /// Hard 0/1 decision for one row. The protected override, when set,
    /// replaces the protected value before scoring. Ties at the 0.5
    /// threshold predict 1.
    pub fn predict_one(&self, table: &RawTable, row: usize) -> Result<bool> {
        match self {
            DecisionMaker::ColumnBacked {
                labels,
                fingerprint,
            } => {
                if *fingerprint != table_fingerprint(table) || row >= labels.len() {
                    return Err(Error::Unsupported(
                        "column-backed decision-maker queried with an out-of-dataset instance"
                            .into(),
                    ));
                }
                Ok(labels[row])
            }
            DecisionMaker::Linear(model) => {
                let mut buf = vec![0.0; model.encoder.width()];
                Ok(model.score(table, row, &mut buf) >= 0.0)
            }
        }
    }

    /// Decisions for a subset of rows, in the given order.
    pub fn predict_rows(&self, table: &RawTable, rows: &[usize]) -> Result<Bits> {
        match self {
            DecisionMaker::ColumnBacked {
                labels,
                fingerprint,
            } => {
                if *fingerprint != table_fingerprint(table) {
                    return Err(Error::Unsupported(
                        "column-backed decision-maker queried with an out-of-dataset instance"
                            .into(),
                    ));
                }
                Ok(Bits::from_fn(rows.len(), |i| labels[rows[i]]))
            }
            DecisionMaker::Linear(model) => {
                let mut buf = vec![0.0; model.encoder.width()];
                let mut out = Bits::new(rows.len());
                for (i, &r) in rows.iter().enumerate() {
                    if model.score(table, r, &mut buf) >= 0.0 {
                        out.set(i, true);
                    }
                }
                Ok(out)
            }
        }
    }

    /// A new decision-maker that scores every instance as if the protected
    /// feature had the given value. Only linear models support this.
    pub fn flip_protected(&self, value: bool) -> Result<DecisionMaker> {
        match self {
            DecisionMaker::ColumnBacked { .. } => Err(Error::Unsupported(
                "column-backed decision-makers cannot be re-scored with a flipped protected value"
                    .into(),
            )),
            DecisionMaker::Linear(model) => {
                let mut flipped = model.clone();
                flipped.protected_override = Some(value);
                Ok(DecisionMaker::Linear(flipped))
            }
        }
    }

    pub fn as_linear(&self) -> Option<&LinearModel> {
        match self {
            DecisionMaker::Linear(m) => Some(m),
            DecisionMaker::ColumnBacked { .. } => None,
        }
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Largest eigenvalue of X^T X / (4n), an upper bound on the logistic-loss
/// Lipschitz constant, estimated by power iteration.
fn lipschitz_bound(x: &[f64], n: usize, d: usize) -> f64 {
    if n == 0 || d == 0 {
        return 1.0;
    }
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 1.0;
    for _ in 0..20 {
        // u = X v, then v' = X^T u
        let mut next = vec![0.0; d];
        for i in 0..n {
            let row = &x[i * d..(i + 1) * d];
            let u: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (nj, &rj) in next.iter_mut().zip(row) {
                *nj += rj * u;
            }
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        lambda = norm;
        for (vj, nj) in v.iter_mut().zip(&next) {
            *vj = nj / norm;
        }
    }
    (lambda * 1.05 / (4.0 * n as f64)).max(1e-12)
}

/// Fits an L1-regularized logistic model by accelerated proximal gradient
/// descent: minimize mean log-loss + lambda * ||w||_1 with an unpenalized
/// intercept. Deterministic: the zero initialization makes the seed moot,
/// it is kept for interface stability.
pub fn train_l1_logistic(
    table: &RawTable,
    rows: &[usize],
    lambda: f64,
    epochs: usize,
    _seed: u64,
) -> Result<DecisionMaker> {
    if lambda < 0.0 {
        return Err(Error::Argument("lambda must be non-negative".into()));
    }
    let y_all = table
        .y
        .as_ref()
        .ok_or_else(|| Error::Validation("training requires a true-label column".into()))?;
    let y: Vec<f64> = rows.iter().map(|&r| f64::from(y_all[r])).collect();
    let n = rows.len();
    if n == 0 {
        return Err(Error::Argument("no training rows".into()));
    }
    let positives = y.iter().sum::<f64>();
    if positives == 0.0 || positives == n as f64 {
        return Err(Error::DegenerateModel(
            "training labels contain a single class".into(),
        ));
    }

    let encoder = FeatureEncoder::fit(table, rows);
    let d = encoder.width();
    let mut x = vec![0.0; n * d];
    for (i, &r) in rows.iter().enumerate() {
        encoder.encode_into(table, r, None, &mut x[i * d..(i + 1) * d]);
    }

    let step = 1.0 / lipschitz_bound(&x, n, d);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut w_prev = w.clone();
    let mut b_prev = b;
    let mut t: f64 = 1.0;

    for _ in 0..epochs {
        // gradient at the extrapolated point (v, bv)
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        let v: Vec<f64> = w
            .iter()
            .zip(&w_prev)
            .map(|(cur, prev)| cur + beta * (cur - prev))
            .collect();
        let bv = b + beta * (b - b_prev);

        let mut grad = vec![0.0; d];
        let mut grad_b = 0.0;
        for i in 0..n {
            let row = &x[i * d..(i + 1) * d];
            let score = bv + row.iter().zip(&v).map(|(a, c)| a * c).sum::<f64>();
            let resid = sigmoid(score) - y[i];
            grad_b += resid;
            for (g, &r) in grad.iter_mut().zip(row) {
                *g += resid * r;
            }
        }
        let scale = 1.0 / n as f64;

        w_prev = w;
        b_prev = b;
        w = v
            .iter()
            .zip(&grad)
            .map(|(vj, gj)| soft_threshold(vj - step * scale * gj, step * lambda))
            .collect();
        b = bv - step * scale * grad_b;
        t = t_next;

        let delta = w
            .iter()
            .zip(&w_prev)
            .map(|(a, c)| (a - c).abs())
            .fold((b - b_prev).abs(), f64::max);
        if delta < 1e-10 {
            break;
        }
    }

    Ok(DecisionMaker::Linear(LinearModel {
        encoder,
        weights: w,
        intercept: b,
        protected_override: None,
    }))
}

/// Trains one model per lambda on the training rows and returns the one
/// with the lowest validation error (ties go to the earlier grid entry).
pub fn select_lambda(
    table: &RawTable,
    train_rows: &[usize],
    val_rows: &[usize],
    grid: &[f64],
    epochs: usize,
    seed: u64,
) -> Result<(f64, DecisionMaker)> {
    if grid.is_empty() {
        return Err(Error::Argument("empty lambda grid".into()));
    }
    let y_all = table
        .y
        .as_ref()
        .ok_or_else(|| Error::Validation("lambda selection requires true labels".into()))?;
    let mut best: Option<(f64, f64, DecisionMaker)> = None;
    for &lambda in grid {
        let dm = train_l1_logistic(table, train_rows, lambda, epochs, seed)?;
        let predictions = dm.predict_rows(table, val_rows)?;
        let errors = val_rows
            .iter()
            .enumerate()
            .filter(|&(i, &r)| predictions.get(i) != y_all[r])
            .count();
        let err = errors as f64 / val_rows.len().max(1) as f64;
        if best.as_ref().is_none_or(|(_, e, _)| err < *e) {
            best = Some((lambda, err, dm));
        }
    }
    let (lambda, _, dm) = best.unwrap();
    Ok((lambda, dm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{load_dataset, DatasetSchema};
    use std::io::Write;

    fn table_from_csv(header: &str, rows: &str, schema_json: &str) -> RawTable {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{header}\n{rows}").unwrap();
        let schema: DatasetSchema = serde_json::from_str(schema_json).unwrap();
        load_dataset(f.path(), &schema).unwrap()
    }

    const TOY_SCHEMA: &str = r#"{
        "columns": {"a": "numeric", "b": "numeric", "sex": "categorical", "y": "categorical"},
        "protected": "sex", "label": "y",
        "positive_value": {"label": "1", "protected": "F"}
    }"#;

    fn separable_table() -> RawTable {
        let mut rows = String::new();
        for i in 0..40 {
            let a = if i % 2 == 0 { 1.0 + (i % 5) as f64 } else { -1.0 - (i % 5) as f64 };
            let b = (i % 7) as f64;
            let sex = if i % 3 == 0 { "F" } else { "M" };
            let y = u8::from(a > 0.0);
            rows.push_str(&format!("{a},{b},{sex},{y}\n"));
        }
        table_from_csv("a,b,sex,y", &rows, TOY_SCHEMA)
    }

    #[test]
    fn separable_data_reaches_zero_training_error() {
        let table = separable_table();
        let rows: Vec<usize> = (0..table.n).collect();
        let dm = train_l1_logistic(&table, &rows, 0.0, 500, 0).unwrap();
        let predictions = dm.predict_rows(&table, &rows).unwrap();
        let y = table.y.as_ref().unwrap();
        let errors = rows.iter().filter(|&&r| predictions.get(r) != y[r]).count();
        assert_eq!(errors, 0);
    }

    #[test]
    fn huge_lambda_collapses_to_majority_class() {
        let table = separable_table();
        let rows: Vec<usize> = (0..table.n).collect();
        let dm = train_l1_logistic(&table, &rows, 1e6, 500, 0).unwrap();
        let model = dm.as_linear().unwrap();
        assert!(model.weights.iter().all(|&w| w == 0.0));
        let predictions = dm.predict_rows(&table, &rows).unwrap();
        let y = table.y.as_ref().unwrap();
        let majority = y.iter().filter(|&&v| v).count() * 2 >= y.len();
        assert!((0..table.n).all(|i| predictions.get(i) == majority));
    }

    #[test]
    fn single_class_labels_error() {
        let table = table_from_csv("a,b,sex,y", "1,0,M,1\n2,1,F,1\n", TOY_SCHEMA);
        let rows: Vec<usize> = (0..table.n).collect();
        assert!(matches!(
            train_l1_logistic(&table, &rows, 0.0, 10, 0),
            Err(Error::DegenerateModel(_))
        ));
    }

    #[test]
    fn zero_model_predicts_one_at_threshold() {
        let table = separable_table();
        let encoder = FeatureEncoder::fit(&table, &(0..table.n).collect::<Vec<_>>());
        let width = encoder.width();
        let dm = DecisionMaker::Linear(LinearModel {
            encoder,
            weights: vec![0.0; width],
            intercept: 0.0,
            protected_override: None,
        });
        assert!(dm.predict_one(&table, 0).unwrap());
    }

    #[test]
    fn column_backed_scores_only_its_source() {
        let schema = r#"{
            "columns": {"a": "numeric", "sex": "categorical", "h": "categorical"},
            "protected": "sex", "blackbox_label": "h",
            "positive_value": {"protected": "F", "blackbox_label": "1"}
        }"#;
        let table = table_from_csv("a,sex,h", "1,M,0\n2,F,1\n", schema);
        let dm = DecisionMaker::from_column(&table).unwrap();
        assert!(!dm.predict_one(&table, 0).unwrap());
        assert!(dm.predict_one(&table, 1).unwrap());

        let other = table_from_csv("a,sex,h", "5,M,1\n6,F,0\n7,F,1\n", schema);
        assert!(matches!(
            dm.predict_rows(&other, &[0, 1, 2]),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            dm.flip_protected(true),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn flip_overrides_protected_value() {
        let table = separable_table();
        let rows: Vec<usize> = (0..table.n).collect();
        let encoder = FeatureEncoder::fit(&table, &rows);
        let width = encoder.width();
        // weight mass on the protected slot only
        let weights: Vec<f64> = encoder
            .slots
            .iter()
            .map(|s| match s.kind {
                SlotKind::Protected => 3.0,
                _ => 0.0,
            })
            .collect();
        assert_eq!(weights.iter().filter(|&&w| w != 0.0).count(), 1);
        let dm = DecisionMaker::Linear(LinearModel {
            encoder: encoder.clone(),
            weights: weights.clone(),
            intercept: -1.5,
            protected_override: None,
        });
        let h1 = dm.flip_protected(true).unwrap();
        let h0 = dm.flip_protected(false).unwrap();
        let p1 = h1.predict_rows(&table, &rows).unwrap();
        let p0 = h0.predict_rows(&table, &rows).unwrap();
        // positive weight on z: forcing z=1 can only raise the positive rate
        assert!(p1.count_ones() >= p0.count_ones());
        assert_eq!(p1.count_ones(), table.n);
        assert_eq!(p0.count_ones(), 0);
        // flipping twice to the same value is idempotent
        let h1b = h1.flip_protected(true).unwrap();
        assert_eq!(
            h1b.predict_rows(&table, &rows).unwrap(),
            p1
        );
        // the original is unchanged: z-weighted model matches manual z
        let manual: Vec<bool> = rows.iter().map(|&r| table.z[r]).collect();
        let base = dm.predict_rows(&table, &rows).unwrap();
        for (i, &z) in manual.iter().enumerate() {
            assert_eq!(base.get(i), z);
        }
    }

    #[test]
    fn zero_protected_weight_makes_flips_identical() {
        let table = separable_table();
        let rows: Vec<usize> = (0..table.n).collect();
        let dm = train_l1_logistic(&table, &rows, 10.0, 300, 0).unwrap();
        // strong L1 zeroes the (irrelevant) protected weight here
        let model = dm.as_linear().unwrap();
        let z_weight = model
            .encoder
            .slots
            .iter()
            .zip(&model.weights)
            .find(|(s, _)| matches!(s.kind, SlotKind::Protected))
            .map(|(_, &w)| w)
            .unwrap();
        assert_eq!(z_weight, 0.0);
        let base = dm.predict_rows(&table, &rows).unwrap();
        let h0 = dm.flip_protected(false).unwrap();
        let h1 = dm.flip_protected(true).unwrap();
        assert_eq!(h0.predict_rows(&table, &rows).unwrap(), base);
        assert_eq!(h1.predict_rows(&table, &rows).unwrap(), base);
    }

    #[test]
    fn lambda_grid_picks_lowest_validation_error() {
        let table = separable_table();
        let train: Vec<usize> = (0..30).collect();
        let val: Vec<usize> = (30..table.n).collect();
        let (lambda, dm) = select_lambda(&table, &train, &val, &[0.001, 0.01, 0.1], 300, 0).unwrap();
        assert!([0.001, 0.01, 0.1].contains(&lambda));
        let predictions = dm.predict_rows(&table, &val).unwrap();
        let y = table.y.as_ref().unwrap();
        let errors = val
            .iter()
            .enumerate()
            .filter(|&(i, &r)| predictions.get(i) != y[r])
            .count();
        assert_eq!(errors, 0, "separable validation split should be perfect");
    }

    #[test]
    fn linear_export_is_json() {
        let table = separable_table();
        let rows: Vec<usize> = (0..table.n).collect();
        let dm = train_l1_logistic(&table, &rows, 0.01, 100, 0).unwrap();
        let json = dm.as_linear().unwrap().to_json().unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(parsed["weights"].as_array().unwrap().len() > 2);
        assert_eq!(parsed["threshold"], 0.5);
    }
}
