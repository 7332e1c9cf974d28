//! Report generation for the `bidisk` analyzer: orchestrates
//! parse → pipeline → U(2) search and renders deterministic text/JSON
//! reports.

pub mod report;

pub use report::{analyze, emit, AnalyzeError, AnalyzeOptions, ObstructionReport, ReportFormat};
