//! Dataset loading, discretization into a binary condition vocabulary, and
//! cross-validation splits.
//!
//! The condition vocabulary is induced from a training subset only; held-out
//! rows are binarized against that fixed vocabulary so no information about
//! validation or test rows leaks into the cut points.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Category label assigned to missing categorical values. Missing numeric
/// values satisfy no threshold condition instead.
pub const MISSING_CATEGORY: &str = "(missing)";

fn is_missing_token(s: &str) -> bool {
    s.is_empty() || s == "?"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PositiveValues {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub protected: Option<String>,
    #[serde(default)]
    pub blackbox_label: Option<String>,
}

/// Declares the columns of a delimited data file, which column carries the
/// protected flag, and where labels come from. The favorable label is
/// always encoded as 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub columns: HashMap<String, ColumnKind>,
    pub protected: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub blackbox_label: Option<String>,
    #[serde(default)]
    pub positive_value: PositiveValues,
}

impl DatasetSchema {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let schema: DatasetSchema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.columns.contains_key(&self.protected) {
            return Err(Error::Schema(format!(
                "protected column '{}' is not declared in columns",
                self.protected
            )));
        }
        for (what, col) in [("label", &self.label), ("blackbox_label", &self.blackbox_label)] {
            if let Some(name) = col {
                if !self.columns.contains_key(name) {
                    return Err(Error::Schema(format!(
                        "{what} column '{name}' is not declared in columns"
                    )));
                }
            }
        }
        Ok(())
    }

    fn is_feature(&self, name: &str) -> bool {
        Some(name) != self.label.as_deref() && Some(name) != self.blackbox_label.as_deref()
    }
}

#[derive(Debug, Clone)]
pub enum FeatureData {
    /// Values interned against `cats`; missing values are interned as
    /// [`MISSING_CATEGORY`].
    Categorical { values: Vec<u32>, cats: Vec<String> },
    Numeric(Vec<Option<f64>>),
}

#[derive(Debug, Clone)]
pub struct Feature {
    pub name: String,
    pub data: FeatureData,
}

/// A loaded, typed data file. Feature columns appear in header order; the
/// label and black-box label columns are extracted into binary vectors and
/// do not appear among the features. The protected column stays a feature
/// (rules may be allowed to use it) and is additionally encoded into `z`.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub n: usize,
    pub features: Vec<Feature>,
    pub protected_feature: usize,
    pub z: Vec<bool>,
    pub y: Option<Vec<bool>>,
    pub h: Option<Vec<bool>>,
    /// Rows dropped because a schema column failed to parse.
    pub rejected_rows: usize,
}

fn encode_binary_column(
    name: &str,
    values: &[String],
    positive: Option<&str>,
) -> Result<Vec<bool>> {
    let mut distinct: Vec<&str> = Vec::new();
    for v in values {
        if !distinct.contains(&v.as_str()) {
            distinct.push(v);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::Validation(format!(
            "column '{name}' must be binary, found {} distinct values",
            distinct.len()
        )));
    }
    match positive {
        Some(pos) => Ok(values.iter().map(|v| v == pos).collect()),
        None => {
            if distinct.iter().any(|v| *v != "0" && *v != "1") {
                return Err(Error::Validation(format!(
                    "column '{name}' must contain only 0/1 (or declare a positive_value)"
                )));
            }
            Ok(values.iter().map(|v| v == "1").collect())
        }
    }
}

/// Loads a comma-separated file with a header row and types its columns
/// according to the schema. Rows with unparseable values in schema columns
/// are rejected; non-binary protected or label columns fail the whole load.
pub fn load_dataset(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<RawTable> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    let headers: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let mut col_idx: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        col_idx.insert(h.as_str(), i);
    }
    for name in schema.columns.keys() {
        if !col_idx.contains_key(name.as_str()) {
            return Err(Error::Schema(format!(
                "schema column '{name}' not found in data file"
            )));
        }
    }

    // Feature columns in header order.
    let feature_names: Vec<&String> = headers
        .iter()
        .filter(|h| schema.columns.contains_key(*h) && schema.is_feature(h))
        .collect();

    enum Raw {
        Cat(Vec<String>),
        Num(Vec<Option<f64>>),
    }
    let mut raw_features: Vec<Raw> = feature_names
        .iter()
        .map(|name| match schema.columns[*name] {
            ColumnKind::Categorical => Raw::Cat(Vec::new()),
            ColumnKind::Numeric => Raw::Num(Vec::new()),
        })
        .collect();
    let mut protected_raw: Vec<String> = Vec::new();
    let mut label_raw: Vec<String> = Vec::new();
    let mut blackbox_raw: Vec<String> = Vec::new();
    let mut rejected = 0usize;

    'rows: for record in reader.records() {
        let record = record?;
        let get = |name: &str| -> &str { record.get(col_idx[name]).unwrap_or("") };

        // Validate the row before committing any column value.
        let mut parsed_nums: Vec<Option<f64>> = Vec::with_capacity(feature_names.len());
        for name in &feature_names {
            if schema.columns[*name] == ColumnKind::Numeric {
                let field = get(name);
                if is_missing_token(field) {
                    parsed_nums.push(None);
                } else {
                    match field.parse::<f64>() {
                        Ok(v) if v.is_finite() => parsed_nums.push(Some(v)),
                        _ => {
                            rejected += 1;
                            continue 'rows;
                        }
                    }
                }
            }
        }
        // Special columns may not be missing.
        if is_missing_token(get(&schema.protected)) {
            rejected += 1;
            continue 'rows;
        }
        for col in [&schema.label, &schema.blackbox_label].into_iter().flatten() {
            if is_missing_token(get(col)) {
                rejected += 1;
                continue 'rows;
            }
        }

        let mut num_iter = parsed_nums.into_iter();
        for (raw, name) in raw_features.iter_mut().zip(&feature_names) {
            match raw {
                Raw::Cat(values) => {
                    let field = get(name);
                    if is_missing_token(field) {
                        values.push(MISSING_CATEGORY.to_string());
                    } else {
                        values.push(field.to_string());
                    }
                }
                Raw::Num(values) => values.push(num_iter.next().unwrap()),
            }
        }
        protected_raw.push(get(&schema.protected).to_string());
        if let Some(col) = &schema.label {
            label_raw.push(get(col).to_string());
        }
        if let Some(col) = &schema.blackbox_label {
            blackbox_raw.push(get(col).to_string());
        }
    }

    let z = encode_binary_column(
        &schema.protected,
        &protected_raw,
        schema.positive_value.protected.as_deref(),
    )?;
    let y = match &schema.label {
        Some(col) => Some(encode_binary_column(
            col,
            &label_raw,
            schema.positive_value.label.as_deref(),
        )?),
        None => None,
    };
    let h = match &schema.blackbox_label {
        Some(col) => Some(encode_binary_column(
            col,
            &blackbox_raw,
            schema.positive_value.blackbox_label.as_deref(),
        )?),
        None => None,
    };

    let features: Vec<Feature> = raw_features
        .into_iter()
        .zip(&feature_names)
        .map(|(raw, name)| Feature {
            name: (*name).clone(),
            data: match raw {
                Raw::Num(values) => FeatureData::Numeric(values),
                Raw::Cat(values) => {
                    let mut cats: Vec<String> = Vec::new();
                    let mut ids = Vec::with_capacity(values.len());
                    let mut lookup: HashMap<String, u32> = HashMap::new();
                    for v in values {
                        let id = *lookup.entry(v.clone()).or_insert_with(|| {
                            cats.push(v);
                            (cats.len() - 1) as u32
                        });
                        ids.push(id);
                    }
                    FeatureData::Categorical { values: ids, cats }
                }
            },
        })
        .collect();

    let protected_feature = features
        .iter()
        .position(|f| f.name == schema.protected)
        .expect("protected column is always a feature");

    Ok(RawTable {
        n: z.len(),
        features,
        protected_feature,
        z,
        y,
        h,
        rejected_rows: rejected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ConditionKind {
    Equals { category: String },
    NotEquals { category: String },
    AtLeast { threshold: f64 },
    LessThan { threshold: f64 },
}

/// One binary condition over a feature; rules are conjunctions of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub feature_name: String,
    #[serde(flatten)]
    pub kind: ConditionKind,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ConditionKind::Equals { category } => write!(f, "{} = {}", self.feature_name, category),
            ConditionKind::NotEquals { category } => {
                write!(f, "{} != {}", self.feature_name, category)
            }
            ConditionKind::AtLeast { threshold } => {
                write!(f, "{} >= {}", self.feature_name, threshold)
            }
            ConditionKind::LessThan { threshold } => {
                write!(f, "{} < {}", self.feature_name, threshold)
            }
        }
    }
}

/// Instances as bit-vectors over the condition vocabulary, stored
/// column-major: one bitset per condition across all instances. Read-only
/// after construction.
#[derive(Debug, Clone)]
pub struct BinarizedDataset {
    pub n: usize,
    pub vocabulary: Vec<Condition>,
    pub columns: Vec<Bits>,
    pub z: Bits,
    pub h: Bits,
    pub y: Option<Bits>,
}

impl BinarizedDataset {
    /// Bit j of instance i, i.e. whether instance i satisfies condition j.
    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.columns[j].get(i)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiscretizeOptions {
    pub max_bins: usize,
    pub exclude_protected: bool,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        DiscretizeOptions {
            max_bins: 5,
            exclude_protected: true,
        }
    }
}

/// Quantile of sorted values at fraction p, linear interpolation.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Induces the condition vocabulary from the given rows. Categorical
/// features contribute one equals-condition per category plus, for features
/// with three or more categories, one not-equals-condition per category
/// (for binary categoricals not-equals duplicates the other equals).
/// Numeric features contribute at-least/less-than pairs at quantile cuts.
pub fn build_vocabulary(
    table: &RawTable,
    rows: &[usize],
    opts: DiscretizeOptions,
) -> Result<Vec<Condition>> {
    if opts.max_bins < 2 {
        return Err(Error::Argument("max_bins must be at least 2".into()));
    }
    let mut vocab = Vec::new();
    for (fi, feature) in table.features.iter().enumerate() {
        if opts.exclude_protected && fi == table.protected_feature {
            continue;
        }
        match &feature.data {
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
                for c in &present {
                    vocab.push(Condition {
                        feature: fi,
                        feature_name: feature.name.clone(),
                        kind: ConditionKind::Equals {
                            category: c.to_string(),
                        },
                    });
                }
                if present.len() >= 3 {
                    for c in &present {
                        vocab.push(Condition {
                            feature: fi,
                            feature_name: feature.name.clone(),
                            kind: ConditionKind::NotEquals {
                                category: c.to_string(),
                            },
                        });
                    }
                }
            }
            FeatureData::Numeric(values) => {
                let mut observed: Vec<f64> = rows.iter().filter_map(|&r| values[r]).collect();
                if observed.is_empty() {
                    continue;
                }
                observed.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                let lo = observed[0];
                let hi = observed[observed.len() - 1];
                if lo == hi {
                    continue;
                }
                let mut cuts: Vec<f64> = Vec::new();
                for q in 1..opts.max_bins {
                    let c = quantile(&observed, q as f64 / opts.max_bins as f64);
                    if c > lo && c <= hi && !cuts.contains(&c) {
                        cuts.push(c);
                    }
                }
                for c in cuts {
                    vocab.push(Condition {
                        feature: fi,
                        feature_name: feature.name.clone(),
                        kind: ConditionKind::AtLeast { threshold: c },
                    });
                    vocab.push(Condition {
                        feature: fi,
                        feature_name: feature.name.clone(),
                        kind: ConditionKind::LessThan { threshold: c },
                    });
                }
            }
        }
    }
    Ok(vocab)
}

/// Evaluates one condition against one instance of the raw table.
pub fn condition_holds(table: &RawTable, condition: &Condition, row: usize) -> bool {
    let feature = &table.features[condition.feature];
    match (&feature.data, &condition.kind) {
        (FeatureData::Categorical { values, cats }, ConditionKind::Equals { category }) => {
            cats.get(values[row] as usize).map(String::as_str) == Some(category.as_str())
        }
        (FeatureData::Categorical { values, cats }, ConditionKind::NotEquals { category }) => {
            cats.get(values[row] as usize).map(String::as_str) != Some(category.as_str())
        }
        (FeatureData::Numeric(values), ConditionKind::AtLeast { threshold }) => {
            values[row].is_some_and(|v| v >= *threshold)
        }
        (FeatureData::Numeric(values), ConditionKind::LessThan { threshold }) => {
            values[row].is_some_and(|v| v < *threshold)
        }
        _ => unreachable!("condition kind does not match feature kind"),
    }
}

/// Binarizes the given rows against a fixed vocabulary. `h` carries the
/// black-box labels aligned to `rows`.
pub fn binarize(
    table: &RawTable,
    rows: &[usize],
    vocabulary: &[Condition],
    h: &Bits,
) -> Result<BinarizedDataset> {
    if h.len() != rows.len() {
        return Err(Error::Argument(format!(
            "h has {} labels for {} rows",
            h.len(),
            rows.len()
        )));
    }
    let n = rows.len();
    let columns: Vec<Bits> = vocabulary
        .iter()
        .map(|cond| Bits::from_fn(n, |i| condition_holds(table, cond, rows[i])))
        .collect();
    let z = Bits::from_fn(n, |i| table.z[rows[i]]);
    let y = table
        .y
        .as_ref()
        .map(|y| Bits::from_fn(n, |i| y[rows[i]]));
    Ok(BinarizedDataset {
        n,
        vocabulary: vocabulary.to_vec(),
        columns,
        z,
        h: h.clone(),
        y,
    })
}

/// Convenience: vocabulary plus bits over all rows, taking black-box labels
/// from the table's `blackbox_label` column.
pub fn discretize(table: &RawTable, opts: DiscretizeOptions) -> Result<BinarizedDataset> {
    let rows: Vec<usize> = (0..table.n).collect();
    let h = match &table.h {
        Some(h) => Bits::from_bools(h),
        None => {
            return Err(Error::Validation(
                "discretize requires a blackbox_label column; use binarize with explicit labels"
                    .into(),
            ))
        }
    };
    let vocabulary = build_vocabulary(table, &rows, opts)?;
    binarize(table, &rows, &vocabulary, &h)
}

/// Deterministic k-fold split of `0..n`: returns (train, test) index pairs.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::Argument("k must be at least 2".into()));
    }
    if k > n {
        return Err(Error::Argument(format!("k = {k} exceeds n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let size = base + usize::from(j < extra);
        let mut test: Vec<usize> = order[start..start + size].to_vec();
        let mut train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        test.sort_unstable();
        train.sort_unstable();
        folds.push((train, test));
        start += size;
    }
    Ok(folds)
}

/// Deterministic split of a training fold into train and validation parts;
/// the validation part gets the floor of the `1 - ratio` fraction.
pub fn train_val_split(
    indices: &[usize],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Argument("ratio must be in (0, 1)".into()));
    }
    let mut order = indices.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let val_size = ((1.0 - ratio) * indices.len() as f64 + 1e-9).floor() as usize;
    let split = indices.len() - val_size;
    let mut train = order[..split].to_vec();
    let mut val = order[split..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn toy_schema() -> DatasetSchema {
        serde_json::from_str(
            r#"{
            "columns": {"x": "numeric", "c": "categorical", "sex": "categorical", "y": "categorical"},
            "protected": "sex",
            "label": "y",
            "positive_value": {"label": "1", "protected": "F"}
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn load_rejects_missing_column() {
        let f = write_csv("x,c,sex\n1,a,M\n");
        let err = load_dataset(f.path(), &toy_schema()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn load_rejects_nonbinary_protected() {
        let schema: DatasetSchema = serde_json::from_str(
            r#"{"columns": {"x": "numeric", "sex": "numeric"}, "protected": "sex"}"#,
        )
        .unwrap();
        let f = write_csv("x,sex\n1,0\n2,1\n3,2\n");
        let err = load_dataset(f.path(), &schema).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn load_empty_file_with_header() {
        let f = write_csv("x,c,sex,y\n");
        let table = load_dataset(f.path(), &toy_schema()).unwrap();
        assert_eq!(table.n, 0);
        assert_eq!(table.rejected_rows, 0);
    }

    #[test]
    fn load_rejects_unparseable_numeric_rows() {
        let f = write_csv("x,c,sex,y\n1,a,M,0\nnot_a_number,b,F,1\n3,a,F,1\n");
        let table = load_dataset(f.path(), &toy_schema()).unwrap();
        assert_eq!(table.n, 2);
        assert_eq!(table.rejected_rows, 1);
        assert_eq!(table.z, vec![false, true]);
        assert_eq!(table.y, Some(vec![false, true]));
    }

    #[test]
    fn missing_values_handling() {
        let f = write_csv("x,c,sex,y\n?,?,M,0\n5,a,F,1\n");
        let table = load_dataset(f.path(), &toy_schema()).unwrap();
        assert_eq!(table.n, 2);
        match &table.features[0].data {
            FeatureData::Numeric(v) => assert_eq!(v[0], None),
            _ => panic!(),
        }
        match &table.features[1].data {
            FeatureData::Categorical { values, cats } => {
                assert_eq!(cats[values[0] as usize], MISSING_CATEGORY);
            }
            _ => panic!(),
        }
    }

    fn numeric_table(values: &[f64]) -> RawTable {
        let rows: String = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{v},{},0\n", if i % 2 == 0 { "M" } else { "F" }))
            .collect();
        let schema: DatasetSchema = serde_json::from_str(
            r#"{"columns": {"x": "numeric", "sex": "categorical", "h": "categorical"},
                "protected": "sex", "blackbox_label": "h",
                "positive_value": {"protected": "F", "blackbox_label": "1"}}"#,
        )
        .unwrap();
        let f = write_csv(&format!("x,sex,h\n{rows}"));
        load_dataset(f.path(), &schema).unwrap()
    }

    #[test]
    fn median_cut_with_two_bins() {
        // values {1,2,3,4}, median 2.5: conditions {>= 2.5, < 2.5}
        let table = numeric_table(&[1.0, 2.0, 3.0, 4.0]);
        let ds = discretize(
            &table,
            DiscretizeOptions {
                max_bins: 2,
                exclude_protected: true,
            },
        )
        .unwrap();
        assert_eq!(ds.vocabulary.len(), 2);
        assert_eq!(
            ds.vocabulary[0].kind,
            ConditionKind::AtLeast { threshold: 2.5 }
        );
        assert_eq!(
            ds.vocabulary[1].kind,
            ConditionKind::LessThan { threshold: 2.5 }
        );
        // instance with value 4 satisfies ">= 2.5": bits (1, 0)
        assert!(ds.bit(3, 0) && !ds.bit(3, 1));
        // instance with value 1 is on the other side: bits (0, 1)
        assert!(!ds.bit(0, 0) && ds.bit(0, 1));
    }

    #[test]
    fn constant_numeric_column_contributes_no_conditions() {
        let table = numeric_table(&[7.0, 7.0, 7.0]);
        let ds = discretize(&table, DiscretizeOptions::default()).unwrap();
        assert!(ds.vocabulary.is_empty());
    }

    #[test]
    fn categorical_vocabulary() {
        let schema: DatasetSchema = serde_json::from_str(
            r#"{"columns": {"c": "categorical", "d": "categorical", "sex": "categorical", "h": "categorical"},
                "protected": "sex", "blackbox_label": "h",
                "positive_value": {"protected": "F", "blackbox_label": "1"}}"#,
        )
        .unwrap();
        // c is binary {a, b}; d has one distinct value; sex excluded
        let f = write_csv("c,d,sex,h\na,k,M,0\nb,k,F,1\na,k,M,0\n");
        let table = load_dataset(f.path(), &schema).unwrap();
        let ds = discretize(&table, DiscretizeOptions::default()).unwrap();
        let rendered: Vec<String> = ds.vocabulary.iter().map(|c| c.to_string()).collect();
        assert_eq!(rendered, vec!["c = a", "c = b"]);
        // binary categorical: every instance satisfies exactly one
        for i in 0..3 {
            assert_eq!(usize::from(ds.bit(i, 0)) + usize::from(ds.bit(i, 1)), 1);
        }
    }

    #[test]
    fn not_equals_generated_for_three_plus_categories() {
        let schema: DatasetSchema = serde_json::from_str(
            r#"{"columns": {"c": "categorical", "sex": "categorical", "h": "categorical"},
                "protected": "sex", "blackbox_label": "h",
                "positive_value": {"protected": "F", "blackbox_label": "1"}}"#,
        )
        .unwrap();
        let f = write_csv("c,sex,h\na,M,0\nb,F,1\nc,M,0\n");
        let table = load_dataset(f.path(), &schema).unwrap();
        let ds = discretize(&table, DiscretizeOptions::default()).unwrap();
        let rendered: Vec<String> = ds.vocabulary.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            rendered,
            vec!["c = a", "c = b", "c = c", "c != a", "c != b", "c != c"]
        );
    }

    #[test]
    fn protected_feature_excluded_by_default() {
        let table = numeric_table(&[1.0, 2.0, 3.0, 4.0]);
        let ds = discretize(&table, DiscretizeOptions::default()).unwrap();
        assert!(ds
            .vocabulary
            .iter()
            .all(|c| c.feature != table.protected_feature));
        let ds_incl = discretize(
            &table,
            DiscretizeOptions {
                max_bins: 5,
                exclude_protected: false,
            },
        )
        .unwrap();
        assert!(ds_incl
            .vocabulary
            .iter()
            .any(|c| c.feature == table.protected_feature));
    }

    #[test]
    fn binarization_is_idempotent_against_raw_table() {
        let table = numeric_table(&[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]);
        let ds = discretize(&table, DiscretizeOptions::default()).unwrap();
        for (j, cond) in ds.vocabulary.iter().enumerate() {
            for i in 0..ds.n {
                assert_eq!(ds.bit(i, j), condition_holds(&table, cond, i));
            }
        }
    }

    #[test]
    fn kfold_properties() {
        let folds = kfold_split(10, 5, 7).unwrap();
        assert_eq!(folds.len(), 5);
        let mut seen = vec![false; 10];
        for (train, test) in &folds {
            assert_eq!(test.len(), 2);
            assert_eq!(train.len(), 8);
            for &i in test {
                assert!(!seen[i], "index {i} in two test folds");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(folds, kfold_split(10, 5, 7).unwrap());
        assert_ne!(folds, kfold_split(10, 5, 8).unwrap());
    }

    #[test]
    fn kfold_rejects_k_above_n() {
        assert!(matches!(kfold_split(3, 5, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn train_val_split_sizes() {
        let indices: Vec<usize> = (0..100).collect();
        let (train, val) = train_val_split(&indices, 0.8, 1).unwrap();
        assert_eq!((train.len(), val.len()), (80, 20));
        let (train, val) = train_val_split(&(0..5).collect::<Vec<_>>(), 0.8, 1).unwrap();
        assert_eq!((train.len(), val.len()), (4, 1));
        let same = train_val_split(&indices, 0.8, 1).unwrap();
        assert_eq!(same.0, train_val_split(&indices, 0.8, 1).unwrap().0);
        assert_eq!(same.0.len(), 80);
    }
}
