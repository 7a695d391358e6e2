//! Content-derived zero-watermarking for plain text.
//!
//! The watermark of a document is the sequence of word lengths found on
//! either side of each occurrence of a keyword. Nothing is embedded in the
//! text; an author registers the watermark with a certifying authority and
//! anyone can later regenerate it from a copy to check for tampering.

pub mod api;
pub mod attack;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod registry;
pub mod text;
pub mod watermark;

pub use attack::{attack, attack_suite, AttackReport, AttackSpec};
pub use error::{Error, Result};
pub use registry::{resolve_owner, Clock, Query, Registry, SystemClock, Timestamp, WatermarkRecord};
pub use text::{frequency_table, normalize, select_keyword, tokenize, word_count, FrequencyTable, KeywordPolicy, Token};
pub use watermark::{compare, extract_and_verify, generate, CompareMode, Comparison, NeighborLengths, VerificationResult, Watermark, WatermarkInput};
