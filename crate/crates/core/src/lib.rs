//! Membership-inference audit primitives.
//!
//! The crate is organized around the stages of a shadow-model audit:
//!
//! - [`synthdata`] builds composite datasets from an over-represented and an
//!   under-represented group, with optional planted high-memorization points.
//! - [`learner`] provides small deterministic classifiers (logistic
//!   regression and a one-hidden-layer MLP) trained with mini-batch SGD.
//! - [`shadowlab`] trains paired IN/OUT shadow models per target point and
//!   derives memorization estimates, privacy scores, and per-example
//!   Gaussian confidence models.
//! - [`stats`] is the hypothesis-testing core: LLR/sLLR tests, Hellinger
//!   distances, advantage estimators, sample-complexity planning, and
//!   Spearman correlation.
//! - [`attacks`] implements five reference membership-inference attacks and
//!   the membership-inference game simulator.
//! - [`selection`] picks target points (random, subpopulation via PCA +
//!   k-means, memorization singletons) and scores OOD-ness.
//! - [`metrics`] evaluates attack scores: ROC curves, AUROC, and TPR at a
//!   fixed low FPR.
//!
//! Everything here is deterministic given explicit seeds and free of I/O;
//! the crate is `no_std`-compatible (with `alloc`). File formats and the
//! CLI live in the companion `miaudit` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod attacks;
pub mod learner;
pub mod linalg;
pub mod metrics;
pub mod seed;
pub mod selection;
pub mod shadowlab;
pub mod stats;
pub mod synthdata;

pub use learner::{LearnerArch, LearnerConfig, TrainedModel};
pub use metrics::{MetricsReport, RocCurve};
pub use selection::OodScore;
pub use shadowlab::{HarnessConfig, Phi, ShadowStats};
pub use stats::{DiscreteDist, GaussianParams};
pub use synthdata::{Dataset, Group, GroupGenerator, LabeledExample, MixtureSpec};
