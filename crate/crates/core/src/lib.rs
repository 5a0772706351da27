//! Self-affine zippers and the smooth lift of a zipper parametrization.
//!
//! A zipper is a system of contractive affine maps `S_1, …, S_m` together with
//! vertices `z_0, …, z_m` and a signature `ε` such that `S_i` sends `z_0` and
//! `z_m` to `z_{i-1+ε_i}` and `z_{i-ε_i}`. Pairing a zipper with a line zipper
//! on `[0, 1]` gives a continuous curve `f`. [`SmoothLift`] builds the zipper
//! in one more dimension whose attractor is the graph of `g(t) = ∫_0^t f`.
//!
//! ```
//! use zipper::presets::{build_example1, Example1Config};
//! use zipper::{eval_g, SmoothLift};
//!
//! let (z, line) = build_example1(Example1Config::split(0.3)).unwrap();
//! let lift = SmoothLift::new(&z, &line).unwrap();
//! assert!((lift.h()[0] - 0.3).abs() < 1e-12);
//! let g = eval_g(0.5, &lift, 1e-10).unwrap();
//! assert!((g.value[0] - 0.045).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod attractor;
pub mod error;
pub mod geometry;
pub mod io;
pub mod parametrization;
pub mod presets;
pub mod smoothing;
pub mod verification;
pub mod zipper;

pub use attractor::{
    chaos_game, hausdorff_distance, hausdorff_residual, refine, refine_parametrized, Polyline,
};
pub use error::{Error, Result};
pub use geometry::{apply, compose, operator_norm, solve_linear, AffineMap, Matrix, Vector};
pub use io::{parse_config, ConfigError, RenderSpec, ZipperConfig};
pub use parametrization::{eval_f, NodeRule, ParamEvaluation, Parametrization};
pub use smoothing::{eval_g, inverse_design, smooth_zipper, GEvaluation, SmoothLift};
pub use verification::{run_suite, Suite, VerificationReport};
pub use zipper::{
    line_zipper, normalize_zipper, product_zipper, uniform_line_zipper, validate_zipper,
    ContractionMode, LineZipper, Signature, ValidationOptions, Zipper,
};
