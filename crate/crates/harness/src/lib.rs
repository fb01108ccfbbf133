//! Batch tooling around `lexinstruct-core`: instruction and response files,
//! parallel scoring, report aggregation and rendering, and response
//! collection from chat-completions endpoints.

pub mod collect;
pub mod error;
pub mod records;
pub mod report;
pub mod score;
pub mod screen;

pub use error::{HarnessError, Result};
pub use records::ResponseRecord;
pub use report::EvalReport;
pub use score::{score, ScoreOptions};
