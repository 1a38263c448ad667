//! Dataset representation, CSV ingestion and integer coding.
//!
//! Categorical columns are coded by first appearance in file order. Numeric
//! columns are min–max normalized to `[0, 1]` per column. The label column,
//! when declared, is coded separately and never used as a feature.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DiscError, Result};

/// Category assigned to `?` and empty cells in categorical columns.
pub const MISSING: &str = "⟨missing⟩";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(DiscError::RaggedRow {
                    row: i + 1,
                    found: row.len(),
                    expected: header.len(),
                });
            }
        }
        Ok(Self { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DiscError::UnknownColumn(name.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub quote: u8,
    /// When false, columns are named `c0, c1, ...`.
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            quote: b'"',
            has_header: true,
        }
    }
}

/// Reads a delimited text file. Ragged rows are reported with their 1-based
/// data row index (the header is not counted).
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<RawTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| DiscError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&bytes, options).map_err(|e| match e {
        DiscError::Empty(_) => DiscError::Empty(path.display().to_string()),
        other => other,
    })
}

pub fn parse_csv(bytes: &[u8], options: &CsvOptions) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .quote(options.quote)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);

    let mut records = reader.records();
    let first = match records.next() {
        Some(rec) => rec?,
        None => return Err(DiscError::Empty("no rows".into())),
    };
    let first: Vec<String> = first.iter().map(str::to_string).collect();
    let (header, mut rows) = if options.has_header {
        (first, Vec::new())
    } else {
        let header = (0..first.len()).map(|i| format!("c{i}")).collect();
        (header, vec![first])
    };
    for rec in records {
        let rec = rec?;
        let row: Vec<String> = rec.iter().map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(DiscError::RaggedRow {
                row: rows.len() + 1,
                found: row.len(),
                expected: header.len(),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DiscError::Empty("header without data rows".into()));
    }
    Ok(RawTable { header, rows })
}

/// Column roles. Every column not listed here is categorical.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub label: Option<String>,
    pub numeric: Vec<String>,
    pub ignored: Vec<String>,
}

/// Frozen coding tables, reusable to encode new data consistently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub vocab: Vec<Vec<String>>,
    pub numeric_ranges: Vec<(f64, f64)>,
    pub label_vocab: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n: usize,
    cat: Vec<usize>,
    num: Vec<f64>,
    cat_names: Vec<String>,
    num_names: Vec<String>,
    encoding: Encoding,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    /// Builds a categorical dataset from code rows. Vocabulary sizes are
    /// `max code + 1` per column unless `cardinalities` is given.
    pub fn from_codes(rows: &[Vec<usize>], cardinalities: Option<&[usize]>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(DiscError::InvalidDataset("no samples".into()));
        }
        let l = rows[0].len();
        let mut cat = Vec::with_capacity(n * l);
        for row in rows {
            if row.len() != l {
                return Err(DiscError::InvalidDataset("rows differ in width".into()));
            }
            cat.extend_from_slice(row);
        }
        let sizes: Vec<usize> = match cardinalities {
            Some(c) => {
                if c.len() != l {
                    return Err(DiscError::InvalidDataset("cardinality count".into()));
                }
                c.to_vec()
            }
            None => (0..l)
                .map(|r| rows.iter().map(|row| row[r]).max().unwrap_or(0) + 1)
                .collect(),
        };
        let vocab = sizes
            .iter()
            .map(|&o| (0..o).map(|u| u.to_string()).collect())
            .collect();
        let ds = Self {
            n,
            cat,
            num: Vec::new(),
            cat_names: (0..l).map(|r| format!("a{r}")).collect(),
            num_names: Vec::new(),
            encoding: Encoding {
                vocab,
                numeric_ranges: Vec::new(),
                label_vocab: Vec::new(),
            },
            labels: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(DiscError::LengthMismatch {
                left: labels.len(),
                right: self.n,
            });
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        self.encoding.label_vocab = (0..k).map(|c| c.to_string()).collect();
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches numeric columns given as already-normalized rows.
    pub fn with_numeric(mut self, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != self.n {
            return Err(DiscError::LengthMismatch {
                left: rows.len(),
                right: self.n,
            });
        }
        let q = rows.first().map_or(0, Vec::len);
        self.num = Vec::with_capacity(self.n * q);
        for row in rows {
            if row.len() != q {
                return Err(DiscError::InvalidDataset(
                    "numeric rows differ in width".into(),
                ));
            }
            self.num.extend_from_slice(row);
        }
        self.num_names = (0..q).map(|c| format!("q{c}")).collect();
        self.encoding.numeric_ranges = vec![(0.0, 1.0); q];
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let l = self.l_cat();
        for (r, vocab) in self.encoding.vocab.iter().enumerate() {
            if vocab.is_empty() {
                return Err(DiscError::InvalidDataset(format!(
                    "attribute {r} has no values"
                )));
            }
        }
        for i in 0..self.n {
            for r in 0..l {
                let code = self.cat[i * l + r];
                if code >= self.encoding.vocab[r].len() {
                    return Err(DiscError::InvalidDataset(format!(
                        "code {code} out of range at row {i}, attribute {r}"
                    )));
                }
            }
        }
        if let Some(v) = self.num.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DiscError::InvalidDataset(format!(
                "numeric value {v} outside [0, 1]"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_cat(&self) -> usize {
        self.encoding.vocab.len()
    }

    pub fn l_num(&self) -> usize {
        self.encoding.numeric_ranges.len()
    }

    /// Number of possible values `o_r` of categorical attribute `r`.
    pub fn cardinality(&self, r: usize) -> usize {
        self.encoding.vocab[r].len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.encoding.vocab.iter().map(Vec::len).collect()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        let l = self.l_cat();
        &self.cat[i * l..(i + 1) * l]
    }

    #[inline]
    pub fn code(&self, i: usize, r: usize) -> usize {
        self.cat[i * self.l_cat() + r]
    }

    #[inline]
    pub fn numeric_row(&self, i: usize) -> &[f64] {
        let q = self.l_num();
        &self.num[i * q..(i + 1) * q]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of distinct ground-truth classes, when labels are present.
    pub fn label_count(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|_| self.encoding.label_vocab.len())
    }

    pub fn vocab(&self) -> &[Vec<String>] {
        &self.encoding.vocab
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn cat_names(&self) -> &[String] {
        &self.cat_names
    }

    pub fn num_names(&self) -> &[String] {
        &self.num_names
    }

    /// Original string of categorical cell `(i, r)`.
    pub fn decode(&self, i: usize, r: usize) -> &str {
        &self.encoding.vocab[r][self.code(i, r)]
    }

    /// Copy keeping only the categorical attributes.
    pub fn categorical_only(&self) -> Self {
        let mut out = self.clone();
        out.num.clear();
        out.num_names.clear();
        out.encoding.numeric_ranges.clear();
        out
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

struct Roles {
    cat: Vec<usize>,
    num: Vec<usize>,
    label: Option<usize>,
}

fn resolve_roles(table: &RawTable, schema: &Schema) -> Result<Roles> {
    let label = schema
        .label
        .as_deref()
        .map(|name| table.column_index(name))
        .transpose()?;
    let num = schema
        .numeric
        .iter()
        .map(|name| table.column_index(name))
        .collect::<Result<Vec<_>>>()?;
    let ignored = schema
        .ignored
        .iter()
        .map(|name| table.column_index(name))
        .collect::<Result<Vec<_>>>()?;
    let cat = (0..table.header.len())
        .filter(|c| Some(*c) != label && !num.contains(c) && !ignored.contains(c))
        .collect();
    Ok(Roles { cat, num, label })
}

fn parse_numeric(table: &RawTable, col: usize) -> Result<Vec<f64>> {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let cell = row[col].trim();
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DiscError::NotNumeric {
                    column: table.header[col].clone(),
                    row: i + 1,
                    value: row[col].clone(),
                })
        })
        .collect()
}

/// Codes a column against `vocab`, appending values not yet present.
fn code_column(table: &RawTable, col: usize, vocab: &mut Vec<String>) -> Vec<usize> {
    let mut index: HashMap<String, usize> = vocab
        .iter()
        .enumerate()
        .map(|(u, v)| (v.clone(), u))
        .collect();
    table
        .rows
        .iter()
        .map(|row| {
            let cell = &row[col];
            let key = if is_missing(cell) {
                MISSING
            } else {
                cell.as_str()
            };
            *index.entry(key.to_string()).or_insert_with(|| {
                vocab.push(key.to_string());
                vocab.len() - 1
            })
        })
        .collect()
}

fn build(table: &RawTable, schema: &Schema, frozen: Option<&Encoding>) -> Result<Dataset> {
    let roles = resolve_roles(table, schema)?;
    let n = table.rows.len();
    if n == 0 {
        return Err(DiscError::Empty("table has no rows".into()));
    }
    if let Some(f) = frozen {
        if f.vocab.len() != roles.cat.len() || f.numeric_ranges.len() != roles.num.len() {
            return Err(DiscError::SchemaMismatch(format!(
                "encoding has {} categorical / {} numeric columns, table has {} / {}",
                f.vocab.len(),
                f.numeric_ranges.len(),
                roles.cat.len(),
                roles.num.len()
            )));
        }
    }

    let l = roles.cat.len();
    let mut vocab = Vec::with_capacity(l);
    let mut columns = Vec::with_capacity(l);
    for (r, &col) in roles.cat.iter().enumerate() {
        let mut v = frozen.map(|f| f.vocab[r].clone()).unwrap_or_default();
        columns.push(code_column(table, col, &mut v));
        vocab.push(v);
    }
    let mut cat = vec![0usize; n * l];
    for (r, column) in columns.iter().enumerate() {
        for (i, &code) in column.iter().enumerate() {
            cat[i * l + r] = code;
        }
    }

    let q = roles.num.len();
    let mut num = vec![0.0; n * q];
    let mut ranges = Vec::with_capacity(q);
    for (c, &col) in roles.num.iter().enumerate() {
        let values = parse_numeric(table, col)?;
        let (lo, hi) = match frozen {
            Some(f) => f.numeric_ranges[c],
            None => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        };
        let span = hi - lo;
        for (i, v) in values.iter().enumerate() {
            num[i * q + c] = if span > 0.0 {
                ((v - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        ranges.push((lo, hi));
    }

    let (labels, label_vocab) = match roles.label {
        Some(col) => {
            let mut lv = frozen.map(|f| f.label_vocab.clone()).unwrap_or_default();
            let codes = code_column(table, col, &mut lv);
            (Some(codes), lv)
        }
        None => (None, Vec::new()),
    };

    let ds = Dataset {
        n,
        cat,
        num,
        cat_names: roles.cat.iter().map(|&c| table.header[c].clone()).collect(),
        num_names: roles.num.iter().map(|&c| table.header[c].clone()).collect(),
        encoding: Encoding {
            vocab,
            numeric_ranges: ranges,
            label_vocab,
        },
        labels,
    };
    ds.validate()?;
    Ok(ds)
}

/// Encodes a raw table into a dataset.
pub fn encode(table: &RawTable, schema: &Schema) -> Result<Dataset> {
    build(table, schema, None)
}

/// Encodes with frozen vocabularies and numeric ranges. Values unseen in the
/// frozen vocabulary receive new codes appended after the known ones;
/// numeric values outside the frozen range are clamped to `[0, 1]`.
pub fn encode_with(table: &RawTable, schema: &Schema, encoding: &Encoding) -> Result<Dataset> {
    build(table, schema, Some(encoding))
}

/// Parameters of the planted-cluster generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub l: usize,
    pub values_per_attr: usize,
    pub k: usize,
    pub seed: u64,
    /// Probability of each cluster's dominant value per attribute.
    pub dominance: f64,
}

impl SynthSpec {
    pub fn new(n: usize, l: usize, values_per_attr: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            l,
            values_per_attr,
            k,
            seed,
            dominance: 0.6,
        }
    }
}

/// Generates `k` planted clusters; sample `i` belongs to cluster `i % k`.
pub fn synth_generate(
    n: usize,
    l: usize,
    values_per_attr: usize,
    k: usize,
    seed: u64,
) -> Result<Dataset> {
    synth_generate_with(&SynthSpec::new(n, l, values_per_attr, k, seed))
}

pub fn synth_generate_with(spec: &SynthSpec) -> Result<Dataset> {
    let SynthSpec {
        n,
        l,
        values_per_attr: o,
        k,
        seed,
        dominance,
    } = *spec;
    if n == 0 || l == 0 || o == 0 || k == 0 {
        return Err(DiscError::InvalidConfig(
            "all counts must be at least 1".into(),
        ));
    }
    if o < 2 && k > 1 {
        return Err(DiscError::InvalidConfig(
            "at least two values per attribute are needed for more than one cluster".into(),
        ));
    }
    if !(0.0..=1.0).contains(&dominance) {
        return Err(DiscError::InvalidConfig(
            "dominance must lie in [0, 1]".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dominant: Vec<usize> = (0..k * l).map(|_| rng.gen_range(0..o)).collect();
    let mut cat = Vec::with_capacity(n * l);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let j = i % k;
        labels.push(j);
        for r in 0..l {
            let dom = dominant[j * l + r];
            let code = if o == 1 || rng.gen::<f64>() < dominance {
                dom
            } else {
                // uniform over the remaining o - 1 values
                let other = rng.gen_range(0..o - 1);
                if other >= dom {
                    other + 1
                } else {
                    other
                }
            };
            cat.push(code);
        }
    }
    Ok(Dataset {
        n,
        cat,
        num: Vec::new(),
        cat_names: (0..l).map(|r| format!("a{r}")).collect(),
        num_names: Vec::new(),
        encoding: Encoding {
            vocab: vec![(0..o).map(|u| format!("v{u}")).collect(); l],
            numeric_ranges: Vec::new(),
            label_vocab: (0..k).map(|j| format!("c{j}")).collect(),
        },
        labels: Some(labels),
    })
}

/// Writes a dataset back out as delimited text (categorical strings, raw
/// normalized numerics, then the label column named `class`).
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = dataset.cat_names.clone();
    header.extend(dataset.num_names.iter().cloned());
    if dataset.labels.is_some() {
        header.push("class".into());
    }
    w.write_record(&header)?;
    for i in 0..dataset.n {
        let mut rec: Vec<String> = (0..dataset.l_cat())
            .map(|r| dataset.decode(i, r).to_string())
            .collect();
        rec.extend(dataset.numeric_row(i).iter().map(|v| v.to_string()));
        if let Some(labels) = &dataset.labels {
            rec.push(dataset.encoding.label_vocab[labels[i]].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| DiscError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}
