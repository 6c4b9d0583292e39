pub mod signal;
pub mod tfr;
pub mod classifier;
pub mod fusion;
pub mod metrics;
pub mod ssl;
pub mod harness;

pub use classifier::{ClassifierKind, ClassifierSpec, FeatureMatrix, LogitsMatrix, Model, View};
pub use fusion::FusionWeights;
pub use harness::{ErrorKind, ExperimentConfig, HarnessError, ResultsTable, SynthSpec};
pub use signal::{Recording, SegmentSet};
pub use ssl::{Method, SslConfig, StepReport};
pub use tfr::{CkdParams, Tfr, TfrConfig};
