//! Dataset replay harness for the lookout detector: ingestion of labeled
//! ARFF/CSV tables, parameter-grid experiments with JSON/CSV reports, and a
//! brute-force statistics oracle for cross-checking.

#![forbid(unsafe_code)]

pub mod dataset;
pub mod experiment;
pub mod oracle;
