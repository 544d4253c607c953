//! Mining and prediction pipeline for community Q&A data dumps.
//!
//! The crate parses Stack Exchange-format `Posts.xml` / `Users.xml` dumps,
//! links answers to questions, selects a labeled dataset of resolved and
//! unresolved questions, computes per-question metrics (readability, topic
//! entropy and similarity, user behaviour, popularity), and trains simple
//! classifiers that predict whether a question's best answer will ever be
//! accepted.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`ingest`] — dump parsing, thread linking, dataset selection
//! * [`content`] — HTML segmentation and text tokenization primitives
//! * [`readability`] — text readability grades and a code readability surrogate
//! * [`topics`] — LDA by collapsed Gibbs sampling plus topic metrics
//! * [`metrics`] — user behaviour and popularity metrics
//! * [`learner`] — feature assembly, classifiers, cross-validation
//! * [`pipeline`] — featurization and descriptive statistics orchestration
//! * [`synth`] — synthetic dump generator for benchmarking

pub mod content;
pub mod ingest;
pub mod learner;
pub mod metrics;
pub mod pipeline;
pub mod readability;
pub mod synth;
pub mod topics;
