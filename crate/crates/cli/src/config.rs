//! Per-command configuration files.
//!
//! Each run is driven by one JSON config; the universal `--out` and `--seed`
//! flags override the corresponding scalar fields, with flag precedence over
//! the file. Unknown fields are rejected so a typo cannot silently fall back
//! to a default.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use smoe_core::loss::LossFunction;

fn default_delta() -> f64 {
    0.05
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConfig {
    pub lipschitz: f64,
    pub rademacher: f64,
    pub rademacher_stderr: f64,
    pub natarajan_dim: f64,
    pub sample_count: u64,
    pub expert_count: u64,
    pub selected_count: u64,
    pub delta: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            lipschitz: 1.0,
            rademacher: 0.05,
            rademacher_stderr: 0.0,
            natarajan_dim: 0.0,
            sample_count: 1000,
            expert_count: 8,
            selected_count: 2,
            delta: default_delta(),
            output_dir: PathBuf::from("out/bound"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub k: Vec<u64>,
    pub expert_count: Vec<u64>,
    pub sample_count: Vec<u64>,
    pub natarajan_dim: Vec<f64>,
    pub lipschitz: Vec<f64>,
    pub rademacher: Vec<f64>,
    pub delta: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            k: vec![1, 2, 4, 8],
            expert_count: vec![8],
            sample_count: vec![1000],
            natarajan_dim: vec![4.0],
            lipschitz: vec![1.0],
            rademacher: vec![0.05],
            delta: vec![default_delta()],
            output_dir: PathBuf::from("out/sweep"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Number of seeded corpus classes when no corpus directory is given.
    pub class_count: usize,
    /// Simplex grid divisions for the hull check.
    pub grid_resolution: usize,
    /// Directory of class-table CSV files; overrides the seeded corpus.
    pub corpus_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            class_count: 50,
            grid_resolution: 10,
            corpus_dir: None,
            output_dir: PathBuf::from("out/verify"),
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapConfig {
    pub expert_count: usize,
    pub k_values: Vec<usize>,
    pub train_size: usize,
    pub test_size: usize,
    pub feature_dim: usize,
    pub clusters_per_class: usize,
    pub norm_bound: f64,
    pub expert_hidden: Vec<usize>,
    pub router_hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_init_scale: f64,
    pub loss: LossFunction,
    pub delta: f64,
    pub natarajan_constant: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig {
            expert_count: 8,
            k_values: vec![1, 2, 4, 8],
            train_size: 512,
            test_size: 5120,
            feature_dim: 8,
            clusters_per_class: 2,
            norm_bound: default_one(),
            expert_hidden: vec![4],
            router_hidden: vec![],
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.1,
            weight_init_scale: default_one(),
            loss: LossFunction::clipped_hinge(),
            delta: default_delta(),
            natarajan_constant: default_one(),
            output_dir: PathBuf::from("out/gap"),
            seed: 0,
        }
    }
}
