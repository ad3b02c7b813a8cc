//! Quantifies how a changing research environment degrades two-sample
//! t-test inferences. The environmental effect ratio (EER) — the ratio of
//! the environment-by-treatment interaction SD to the error SD — drives
//! replicability power, follow-up sample sizes, broad-inference p-values
//! and confidence intervals, and EER profile plots. A seeded Monte Carlo
//! simulator of the underlying mixed model cross-checks every closed form.

pub mod broad;
pub mod dist;
pub mod eer;
mod error;
pub mod fmt;
pub mod model;
pub mod power;
pub mod profile;
pub mod sim;
mod special;

pub use broad::BroadInferenceReport;
pub use dist::{DegreesOfFreedom, Noncentrality};
pub use error::{Error, Result};
pub use model::{DesignSpec, EffectContext, MixedModelParams, TwoSampleSummary};
pub use power::{PowerBreakdown, SampleSizeResult};
pub use profile::ProfileGrid;
pub use sim::{SimConfig, SimOutcomeTally};
