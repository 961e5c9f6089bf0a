//! Robustness benchmarking for monocular depth estimation in endoscopy.
//!
//! The crate has two halves:
//!
//! - corpus synthesis: sixteen seeded image corruptions at five severity
//!   levels ([`corruptions`]) built on pixel primitives ([`imaging`]), with
//!   a reproducible corpus builder and file codecs ([`dataset`]);
//! - scoring: per-frame depth metrics ([`metrics`]) and the composite
//!   robustness scores mDERS and mCE over an evaluation grid
//!   ([`robustness`]), plus report rendering ([`report`]).
//!
//! ```
//! use scopebench_core::corruptions::{apply, CorruptionKind, CorruptionSpec};
//! use scopebench_core::imaging::Image;
//!
//! let frame = Image::gray(32, 24, 0.4);
//! let spec = CorruptionSpec::new(CorruptionKind::Fog, 3, 42).unwrap();
//! let foggy = apply(&spec, &frame).unwrap();
//! assert!(foggy.data().iter().all(|&v| v > 0.4));
//! ```

pub mod corruptions;
pub mod dataset;
pub mod error;
pub mod imaging;
pub mod metrics;
pub mod report;
pub mod robustness;

pub use crate::corruptions::{CorruptionKind, CorruptionSpec, Family, Severity, SeverityTable};
pub use crate::error::{Error, Result};
pub use crate::imaging::Image;
pub use crate::metrics::{DepthMap, EvalOptions, MetricVector};
pub use crate::robustness::{EvaluationGrid, RobustnessReport};
