//! Persistent run records and the reports derived from them.
//!
//! Layout of one run:
//!
//! ```text
//! runs/<run-id>/manifest.txt       manifest as given
//! runs/<run-id>/resolved.txt       manifest with every path made absolute
//! runs/<run-id>/records.jsonl      one SampleRecord per line
//! runs/<run-id>/expected/<case>.txt reference outputs
//! runs/<run-id>/reports/*.csv
//! ```

mod manifest;
mod record;
mod report;
mod store;

pub use manifest::{ManifestError, RunManifest};
pub use record::{BuildSummary, ExecSummary, SampleRecord};
pub use report::{
    emit_error_histogram, emit_scatter_data, emit_summary, histogram_csv, histogram_table, HistogramMode, SummaryReport,
};
pub use store::{read_records, RunStore, StoreError};
