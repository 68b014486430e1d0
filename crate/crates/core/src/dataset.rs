//! Integer-encoded categorical datasets.
//!
//! Every feature column is encoded independently: categories receive dense
//! ids starting at zero, in order of first appearance. Per-feature frequency
//! tables are built once at load time.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

/// Dense per-feature category code.
pub type CategoryId = u32;

/// Marker treated as a missing value (after trimming). Empty fields are also missing.
pub const MISSING_MARKER: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Any missing field is an error.
    #[default]
    Reject,
    /// The missing marker becomes one ordinary extra category of its feature.
    DistinctCategory,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub label_column: Option<String>,
    pub missing: MissingPolicy,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("row at line {line} has {found} fields, expected {expected}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("input is empty (a header row is required)")]
    Empty,
    #[error("input has a header but no data rows")]
    NoRows,
    #[error("missing value at line {line}, column '{column}'")]
    MissingValue { line: u64, column: String },
    #[error("label column '{0}' not found in header")]
    UnknownLabelColumn(String),
    #[error("no feature columns")]
    NoFeatures,
    #[error("feature index {index} out of range (m = {m})")]
    FeatureOutOfRange { index: usize, m: usize },
    #[error("object index {index} out of range (n = {n})")]
    ObjectOutOfRange { index: usize, n: usize },
    #[error("category {category} out of range for feature {feature} (k = {k})")]
    CategoryOutOfRange {
        feature: usize,
        category: CategoryId,
        k: usize,
    },
    #[error("feature selection is empty")]
    EmptySelection,
    #[error("feature {0} selected more than once")]
    DuplicateFeature(usize),
}

/// A categorical dataset: `n` objects described by `m` features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n: usize,
    m: usize,
    feature_names: Vec<String>,
    /// Row-major `n * m` cells.
    cells: Vec<CategoryId>,
    category_labels: Vec<Vec<String>>,
    frequencies: Vec<Vec<usize>>,
    labels: Option<Vec<String>>,
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == MISSING_MARKER
}

fn parse_error(err: csv::Error) -> DataError {
    DataError::Parse {
        line: err.position().map_or(0, |p| p.line()),
        message: err.to_string(),
    }
}

impl Dataset {
    pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Self, DataError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file, options)
    }

    /// Parses CSV text with a mandatory header row.
    pub fn from_reader<R: Read>(reader: R, options: &LoadOptions) -> Result<Self, DataError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);

        let mut records = csv.records();
        let header = match records.next() {
            None => return Err(DataError::Empty),
            Some(record) => record.map_err(parse_error)?,
        };
        let header: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(DataError::Empty);
        }

        let mut rows = Vec::new();
        for record in records {
            let record = record.map_err(parse_error)?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(DataError::Ragged {
                    line,
                    expected: header.len(),
                    found: record.len(),
                });
            }
            rows.push((line, record.iter().map(str::to_string).collect()));
        }
        Self::build(header, rows, options)
    }

    /// Builds a dataset from in-memory rows. Line numbers in errors count the
    /// header as line 1.
    pub fn from_rows(
        header: Vec<String>,
        rows: Vec<Vec<String>>,
        options: &LoadOptions,
    ) -> Result<Self, DataError> {
        if header.is_empty() {
            return Err(DataError::Empty);
        }
        let mut numbered = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let line = i as u64 + 2;
            if row.len() != header.len() {
                return Err(DataError::Ragged {
                    line,
                    expected: header.len(),
                    found: row.len(),
                });
            }
            numbered.push((line, row));
        }
        let header = header.into_iter().map(|h| h.trim().to_string()).collect();
        Self::build(header, numbered, options)
    }

    fn build(
        header: Vec<String>,
        rows: Vec<(u64, Vec<String>)>,
        options: &LoadOptions,
    ) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::NoRows);
        }
        let label_pos = match &options.label_column {
            Some(name) => Some(
                header
                    .iter()
                    .position(|h| h == name.trim())
                    .ok_or_else(|| DataError::UnknownLabelColumn(name.clone()))?,
            ),
            None => None,
        };
        let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != label_pos).collect();
        if feature_cols.is_empty() {
            return Err(DataError::NoFeatures);
        }

        let n = rows.len();
        let m = feature_cols.len();
        let mut cells = Vec::with_capacity(n * m);
        let mut dictionaries: Vec<HashMap<String, CategoryId>> = vec![HashMap::new(); m];
        let mut category_labels: Vec<Vec<String>> = vec![Vec::new(); m];
        let mut frequencies: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut labels = label_pos.map(|_| Vec::with_capacity(n));

        for (line, row) in &rows {
            for (j, &col) in feature_cols.iter().enumerate() {
                let mut field = row[col].trim();
                if is_missing(field) {
                    match options.missing {
                        MissingPolicy::Reject => {
                            return Err(DataError::MissingValue {
                                line: *line,
                                column: header[col].clone(),
                            })
                        }
                        MissingPolicy::DistinctCategory => field = MISSING_MARKER,
                    }
                }
                let next = category_labels[j].len() as CategoryId;
                let id = *dictionaries[j].entry(field.to_string()).or_insert_with(|| {
                    category_labels[j].push(field.to_string());
                    frequencies[j].push(0);
                    next
                });
                frequencies[j][id as usize] += 1;
                cells.push(id);
            }
            if let (Some(pos), Some(labels)) = (label_pos, labels.as_mut()) {
                labels.push(row[pos].trim().to_string());
            }
        }

        Ok(Self {
            n,
            m,
            feature_names: feature_cols.iter().map(|&c| header[c].clone()).collect(),
            cells,
            category_labels,
            frequencies,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// The encoded profile of one object across all features.
    pub fn row(&self, object: usize) -> &[CategoryId] {
        &self.cells[object * self.m..(object + 1) * self.m]
    }

    pub fn cell(&self, object: usize, feature: usize) -> CategoryId {
        self.cells[object * self.m + feature]
    }

    /// Number of distinct categories `k_i` of a feature.
    pub fn category_count(&self, feature: usize) -> usize {
        self.category_labels[feature].len()
    }

    pub fn category_counts(&self) -> Vec<usize> {
        self.category_labels.iter().map(Vec::len).collect()
    }

    pub fn category_label(&self, feature: usize, category: CategoryId) -> &str {
        &self.category_labels[feature][category as usize]
    }

    /// Original (trimmed) field string of a cell.
    pub fn decode(&self, object: usize, feature: usize) -> &str {
        self.category_label(feature, self.cell(object, feature))
    }

    pub fn frequencies(&self, feature: usize) -> &[usize] {
        &self.frequencies[feature]
    }

    /// `f(c)`: number of objects whose cell on `feature` equals `category`.
    pub fn frequency(&self, feature: usize, category: CategoryId) -> Result<usize, DataError> {
        let counts = self.frequencies.get(feature).ok_or(DataError::FeatureOutOfRange {
            index: feature,
            m: self.m,
        })?;
        counts
            .get(category as usize)
            .copied()
            .ok_or(DataError::CategoryOutOfRange {
                feature,
                category,
                k: counts.len(),
            })
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Frequency table over all objects.
    pub fn frequency_table(&self) -> FrequencyTable {
        FrequencyTable {
            population: self.n,
            counts: self.frequencies.clone(),
        }
    }

    pub fn full_view(&self) -> DatasetView<'_> {
        DatasetView {
            dataset: self,
            features: (0..self.m).collect(),
        }
    }

    /// Logical view exposing only `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Result<DatasetView<'_>, DataError> {
        if keep.is_empty() {
            return Err(DataError::EmptySelection);
        }
        let mut seen = vec![false; self.m];
        for &f in keep {
            if f >= self.m {
                return Err(DataError::FeatureOutOfRange { index: f, m: self.m });
            }
            if std::mem::replace(&mut seen[f], true) {
                return Err(DataError::DuplicateFeature(f));
            }
        }
        Ok(DatasetView {
            dataset: self,
            features: keep.to_vec(),
        })
    }

    /// Copy of the dataset with its objects reordered: object `i` of the
    /// result is object `order[i]` of `self`. Category ids are kept.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self, DataError> {
        let mut seen = vec![false; self.n];
        for &i in order {
            if i >= self.n || std::mem::replace(&mut seen[i], true) {
                return Err(DataError::ObjectOutOfRange { index: i, n: self.n });
            }
        }
        if order.len() != self.n {
            return Err(DataError::ObjectOutOfRange {
                index: order.len(),
                n: self.n,
            });
        }
        let cells = order.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| order.iter().map(|&i| l[i].clone()).collect());
        Ok(Self {
            cells,
            labels,
            ..self.clone()
        })
    }
}

/// Read-only view over a subset of a dataset's features. Shares storage with
/// the dataset; frequencies of kept features are those of the dataset.
#[derive(Debug, Clone)]
pub struct DatasetView<'a> {
    dataset: &'a Dataset,
    features: Vec<usize>,
}

impl<'a> DatasetView<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn n(&self) -> usize {
        self.dataset.n
    }

    pub fn m(&self) -> usize {
        self.features.len()
    }

    /// Original feature indices exposed by this view.
    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn feature_name(&self, j: usize) -> &'a str {
        &self.dataset.feature_names[self.features[j]]
    }

    /// Cell of `object` on the `j`-th feature of the view.
    pub fn cell(&self, object: usize, j: usize) -> CategoryId {
        self.dataset.cell(object, self.features[j])
    }

    pub fn frequency(&self, j: usize, category: CategoryId) -> Result<usize, DataError> {
        let feature = *self.features.get(j).ok_or(DataError::FeatureOutOfRange {
            index: j,
            m: self.features.len(),
        })?;
        self.dataset.frequency(feature, category)
    }

    pub fn frequency_table(&self) -> FrequencyTable {
        self.dataset.frequency_table()
    }
}

/// Category counts over some population of profiles (objects, or merged
/// entities), indexed by original feature index and category id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    population: usize,
    counts: Vec<Vec<usize>>,
}

impl FrequencyTable {
    /// Counts categories over `profiles`, each a full-width encoded row.
    /// `category_counts[i]` is `k_i` of feature `i`.
    pub fn from_profiles<'p, I>(profiles: I, category_counts: &[usize]) -> Self
    where
        I: IntoIterator<Item = &'p [CategoryId]>,
    {
        let mut counts: Vec<Vec<usize>> = category_counts.iter().map(|&k| vec![0; k]).collect();
        let mut population = 0;
        for row in profiles {
            for (feature, &c) in row.iter().enumerate() {
                counts[feature][c as usize] += 1;
            }
            population += 1;
        }
        Self { population, counts }
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn count(&self, feature: usize, category: CategoryId) -> usize {
        self.counts[feature][category as usize]
    }

    pub fn feature_counts(&self, feature: usize) -> &[usize] {
        &self.counts[feature]
    }
}
