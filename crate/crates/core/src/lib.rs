//! Evaluation harness for LLM-as-compiler experiments.
//!
//! A language model is asked to translate a C kernel straight to assembly.
//! The harness splices that assembly into a driver program, assembles, links
//! and runs it, then checks the output differentially against the same
//! program built by a traditional compiler (gcc or clang). Failures are
//! classified into a fixed error taxonomy and rolled up into pass-rate
//! metrics.
//!
//! Module map:
//!
//! * [`corpus`] loads and validates the kernel/driver test cases.
//! * [`provider`] talks to models (HTTP, replay archive, scripted table) and
//!   pulls assembly out of free-form responses.
//! * [`prompting`] renders compilation, hint and feedback prompts.
//! * [`pipeline`] splices, builds and executes programs.
//! * [`verdict`] compares outputs and classifies failures.
//! * [`metrics`] computes success@1 and the executable-correctness rate.
//! * [`runstore`] persists sample records and emits CSV reports.
//! * [`harness`] wires everything into the run / smoke / validate loops.

use std::path::PathBuf;

use sha2::{Digest, Sha256};

pub mod arch;
pub mod corpus;
pub mod harness;
pub mod kv;
pub mod metrics;
pub mod pipeline;
pub mod prompting;
pub mod provider;
pub mod runstore;
pub mod sync;
pub mod verdict;

pub use arch::TargetArch;
pub use corpus::{Corpus, TestCase};
pub use metrics::MetricsSummary;
pub use runstore::{RunManifest, SampleRecord};
pub use verdict::{ErrorCategory, Verdict, VerdictKind};

/// Directory holding the bundled corpus, prompt assets, rule table and fixtures.
pub fn data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}
