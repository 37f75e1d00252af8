//! Uplink spectral efficiency of cell-free massive MIMO with zero-forcing
//! detection.
//!
//! Antennas and users are scattered over a unit disk. The crate simulates the
//! exact ZF rate under perfect and MMSE-estimated channel knowledge, evaluates
//! closed-form rate approximations that depend on path gains only, and
//! provides the distance-distribution tools behind their scaling laws.
//!
//! All kernels are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature and Lanczos tables keep their published digits.
#![allow(clippy::excessive_precision)]

pub mod channel;
pub mod closed_form;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod montecarlo;
pub mod order_stats;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;
pub mod zf;

pub use channel::{estimation_params, large_scale_fading, EstimationParams, LargeScaleMatrix};
pub use closed_form::{
    approx_lb_imperfect, approx_lb_perfect, approx_ub_imperfect, approx_ub_perfect, colocated_bound, exclusion_sets,
    gamma_moment_match, ApproxKind, ApproxRate, ExclusionSets, GammaFit,
};
pub use error::{Error, Result};
pub use geometry::{colocated_topology, pairwise_distances, DeploymentMode, Point, Topology};
pub use montecarlo::{average_over_topologies, rae_table, CsiMode, RateReport, SimConfig, TrialSource};
pub use order_stats::{DiskDistanceLaw, MomentResult};
pub use scalar::Real;
pub use zf::{zf_column_norms, zf_detector_matrix};

pub type Topology64 = Topology<f64>;
pub type LargeScaleMatrix64 = LargeScaleMatrix<f64>;
pub type EstimationParams64 = EstimationParams<f64>;
pub type ChannelMatrix64 = channel::ChannelMatrix<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type RateReport64 = RateReport<f64>;
pub type GammaFit64 = GammaFit<f64>;
pub type ApproxRate64 = ApproxRate<f64>;
pub type DiskDistanceLaw64 = DiskDistanceLaw<f64>;
pub type MomentResult64 = MomentResult<f64>;
