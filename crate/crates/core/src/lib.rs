//! Competitive location of a retail chain under the gravity model, with
//! multipurpose (two-stop) shopping trips.
//!
//! The crate is organised bottom-up:
//!
//! * [`lcg`] — the reproducible multiplicative generator used for instances
//!   and random starts.
//! * [`instance`] — demand points, competitors, clusters, fixed chain
//!   facilities; generation, validation and the sectioned text format.
//! * [`market`] — decay models, precomputed competitor constants and the
//!   captured market share `M(X)`.
//! * [`optimizer`] — finite-difference projected quasi-Newton ascent and the
//!   multistart driver.
//! * [`validation`] — grid oracle for one facility, conservation audit and
//!   the random-placement baseline.

// `!(a < b)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod instance;
pub mod lcg;
pub mod market;
pub mod optimizer;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{distance, Point, SearchBox};
pub use instance::{
    generate_instance, read_instance, write_instance, ClusterFacility, CompetitorFacility,
    DemandPoint, FixedChainFacility, GeneratorConfig, Instance, SeedSet,
};
pub use lcg::LcgState;
pub use market::{
    captured_market_share, captured_market_share_detailed, competitor_constants,
    share_proportion, ChainLayout, CompetitorConstants, DecayKind, DecayModel, DemandCapture,
    ShareReport, TripMix,
};
pub use optimizer::{
    gradient_fd, local_optimize, multistart_optimize, objective, Gradient, OptimizerConfig,
    Solution,
};
pub use validation::{conservation_audit, grid_oracle_p1, random_baseline, OracleResult};
