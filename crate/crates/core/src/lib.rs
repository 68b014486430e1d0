//! Matching based clustering (MBC) for categorical data.
//!
//! Objects are grouped only when they coincide on every remaining feature.
//! Features are dropped, least important first, until every object belongs
//! to a cluster or the remaining features are equally important.
//!
//! ```
//! use mbc::{run, Dataset, LoadOptions, MbcConfig};
//!
//! let csv = "colour,shape\nred,round\nred,round\nblue,square\nblue,round\n";
//! let ds = Dataset::from_reader(csv.as_bytes(), &LoadOptions::default()).unwrap();
//! let out = run(&ds, &MbcConfig::default()).unwrap();
//! assert!(out.partition.covers(4));
//! ```

pub mod dataset;
pub mod evaluation;
pub mod export;
pub mod importance;
pub mod mbc;
pub mod partition;
pub mod similarity;

pub use dataset::{CategoryId, DataError, Dataset, DatasetView, FrequencyTable, LoadOptions, MissingPolicy};
pub use evaluation::{contingency, ContingencyTable, EvalError, EvalSummary};
pub use importance::{ImportanceError, ImportanceMeasure, ImportanceReport, Rational};
pub use mbc::{run, ClusteringState, Dendrogram, ImportancePopulation, MbcConfig, MbcError, RunOutput, TiePolicy};
pub use partition::Partition;
pub use similarity::{InfluenceMatrix, Measure, SimilarityError, SimilarityMatrix};
