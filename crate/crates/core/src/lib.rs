//! Keystroke-timing cognitive signatures.
//!
//! The pipeline runs from a `cogsig-v1` event log ([`event_log`]) through
//! word complexity ([`complexity`]), phase segmentation
//! ([`segmentation`]) and the cognitive load correlation ([`clc`]) to a
//! committed, content-free evidence record ([`verify`]). [`synth`] produces
//! labelled sessions for calibration, and [`sweep`] measures the
//! privacy/utility trade-off of timing quantization.

pub mod analysis;
pub mod clc;
pub mod complexity;
pub mod entropy;
pub mod error;
pub mod event_log;
pub mod par;
pub mod segmentation;
pub mod sweep;
pub mod synth;
pub mod verify;

pub use analysis::{AnalysisReport, Analyzer};
pub use clc::{compute_clc, power, spearman, ClcConfig, ClcReport, Verdict};
pub use error::{CogsigError, Result};
pub use event_log::{parse_log, quantize, KeystrokeEvent, Session};
pub use par::Execution;
