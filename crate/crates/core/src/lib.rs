//! Attractive mean-field redistribution on the probability simplex.
//!
//! A state `p` is a stochastic vector; each step multiplies `p_i` by
//! `1 + c_i r_i`, where `r_i = (1 - p_i)/(n - 1)` is the mean field of the
//! other components, and renormalizes. The crate provides the maps, analytic
//! limit states, linear stability, transcritical-bifurcation scans and a
//! delayed-feedback extension.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod cli;
pub mod delay;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod simplex;
pub mod stability;

pub use bifurcation::{
    classify_codim2, classify_codimk, critical_value, scan_1d, scan_2d, GridAxis, RegionLabel,
};
pub use delay::{
    beta_sweep, classify_regime, simulate_delayed, BaselineMode, DelayConfig, Regime, RegimeReport,
    SweepConfig,
};
pub use dynamics::{iterate, step, step_uniform, IterationConfig, Map, Trajectory};
pub use equilibrium::{
    find_fixed_point, fixed_point_n2, fixed_point_n3, lambda_threshold, limit_coordinate,
    uniform_limit, FixedPointReport,
};
pub use error::{Error, Result};
pub use simplex::{
    l2_sq, mean_field, weighted_interaction, ActiveSet, Favorability, FavorabilityMode, MeanField,
    SimplexState,
};
