//! Empirical-means datasets for partitioned probability elicitation, the
//! coin-toss response formats, and the replication pipeline with report
//! emission.

mod coin;
mod dataset;
mod emit;
mod replicate;
mod simulate;

pub use coin::{binomial_prior, standard_partitions, standard_partitions_on, PartitionFormat};
pub use dataset::{
    load_dataset, parse_dataset_csv, parse_dataset_json, BeliefDataset, DatasetFormat, DatasetMember, FileKind,
    ROW_SUM_TOLERANCE,
};
pub use emit::{emit_report, file_stem, format_sig17, summary_text};
pub use replicate::{
    binary_family_reports, find_binary_family, fit_format, fit_per_format, replicate, Benchmark, FigureRow, FigureSeries, RecoveryMode, RecoverySummary, ReplicationConfig,
    ReplicationReport, Table2Row, Table3Row, Table4Row,
};
pub use simulate::{synthetic_dataset, synthetic_dataset_with_noise, NOISE_FLOOR};
