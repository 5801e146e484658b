//! Training engine and benchmark harness for ReLU-KAN networks —
//! Kolmogorov-Arnold networks whose edge functions are squared-ReLU-product
//! bases with trainable support endpoints — plus a B-spline KAN baseline for
//! head-to-head accuracy and speed comparisons.
//!
//! Everything is deterministic given a seed: initialization, dataset
//! sampling and gradient-check probes each draw from dedicated RNG streams,
//! so re-running any experiment reproduces every non-timing number exactly.
//!
//! The layer math is hand-derived reverse mode over a small dense-matrix
//! kernel; `gradcheck` verifies every analytic partial against central
//! finite differences.

pub mod bspline;
pub mod checkpoint;
pub mod dataset;
pub mod error;
pub mod forget;
pub mod gradcheck;
pub mod loss;
pub mod matrix;
pub mod network;
pub mod optim;
pub mod relukan;
pub mod rng;
pub mod train;

pub use bspline::{dsilu, sigmoid, silu, BsplineGrid, BsplineKanLayer};
pub use dataset::{
    forget_region, forget_target, lookup, make_dataset, make_forget_phase, suite_functions,
    Dataset, Suite, TargetFunction, FIT_SUITE, FORGET_CENTERS, FORGET_PHASES, SPEED_SUITE,
};
pub use error::{Error, Result};
pub use forget::{run_forget, ForgetConfig, ForgetReport};
pub use gradcheck::{all_passed, run_gradcheck, GradCheckConfig, GroupReport};
pub use loss::{mse, mse_grad};
pub use matrix::Matrix;
pub use network::{build, Layer, ModelKind, NetConfig, Network, ParamSlot};
pub use optim::{Adam, AdamConfig};
pub use relukan::{
    basis_eval, dynamic_norm, NormMode, ReluKanConfig, ReluKanLayer, DEFAULT_INIT_SCALE,
    EPS_WIDTH,
};
pub use rng::{layer_stream, Rng, DATASET_STREAM, PROBE_STREAM, TEST_SEED_OFFSET};
pub use train::{evaluate, train, RunReport, TrainConfig};
