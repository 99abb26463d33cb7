//! Sparse mixture-of-experts models and the capacity machinery that bounds
//! their generalization error, all at desk scale.
//!
//! The crate trains toy sparse mixtures (`T` experts, `k` selected per input
//! by a top-k router with masked softmax), measures empirical generalization
//! gaps on synthetic data, computes every complexity quantity the bound
//! consumes — empirical Rademacher complexity (exact enumeration and seeded
//! Monte-Carlo), Natarajan dimension (exhaustive search and the network
//! closed form), spectral-norm budgets — and evaluates the resulting bound
//! with a per-term breakdown. The combinatorial facts the bound rests on
//! (convex-hull Rademacher equality, Lipschitz contraction, growth-function
//! and binomial-log inequalities) ship as executable verifiers.
//!
//! Determinism is a hard contract: all randomness flows through explicit
//! 64-bit seeds, Monte-Carlo draws are counter-seeded per `(seed, draw)`,
//! and identical seeds reproduce identical bytes in every serialized
//! artifact.
//!
//! # Layout
//!
//! - [`data`] / [`loss`] / [`risk`]: datasets, the `[0,1]` losses, empirical
//!   risk and gap measurement
//! - [`model`]: dense ReLU stacks, top-k gating, the sparse mixture
//! - [`complexity`]: Rademacher and Natarajan estimators, norm budgets, and
//!   the lemma verifiers with their seeded corpus
//! - [`bound`]: the bound evaluator, sparsity profiles, and sweeps
//! - [`trainer`]: minibatch ERM, gradient checking, budget extraction, and
//!   the per-sparsity gap experiment

pub mod bound;
pub mod complexity;
pub mod data;
pub mod error;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod risk;
pub mod trainer;

mod floatfmt;

pub use error::{Error, Result};

/// 17-significant-digit float formatting used by every CSV surface.
pub use floatfmt::float17;
