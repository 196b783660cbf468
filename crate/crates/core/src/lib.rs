//! Distance profiles of a pattern against every alignment in a text, where
//! the alphabet carries an arbitrary metric.
//!
//! Two exact methods (a quadratic reference and a per-letter convolution
//! method) sit next to a randomized `(1 ± ε)` approximation that samples
//! mismatches through the one-mismatch algorithm applied to randomly hashed
//! copies of the text and pattern.

pub mod approximator;
pub mod cli;
pub mod convolution;
pub mod error;
pub mod hash_family;
pub mod instances;
pub mod metric;
pub mod one_mismatch;
pub mod oracle;
pub mod profile;
pub mod rng;
pub mod sampler;

pub use crate::approximator::{approximate_profile, ApproxParams};
pub use crate::convolution::{correlate, exact_profile_per_letter};
pub use crate::error::{Error, Result};
pub use crate::hash_family::{FamilyKind, HashFamily, HashFunction};
pub use crate::metric::{MetricKind, MetricSpace, Symbol, SymbolString, WILDCARD};
pub use crate::one_mismatch::{one_mismatch, MismatchReport};
pub use crate::oracle::naive_profile;
pub use crate::profile::{DistanceProfile, Mode};
