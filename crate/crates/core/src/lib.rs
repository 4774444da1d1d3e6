//! Interference alignment (IA) for K-user MIMO interference channels whose
//! transmitters are distributed antenna systems: each transmitter splits its
//! antennas across remote radio units (RRUs), and every RRU carries its own
//! power constraint.
//!
//! The crate is organised bottom-up:
//!
//! * [`mathcore`]: Hermitian eigenvectors, Haar frames, gamma CDF, seeds.
//! * [`channel`]: system shapes, Rayleigh and distributed-antenna channels.
//! * [`feasibility`]: properness counting with and without per-RRU constraints.
//! * [`alignment`]: leakage minimisation, power back-off, strict per-RRU solver.
//! * [`metrics`]: sum rates and the back-off factor distribution.
//! * [`harness`]: experiment configuration, Monte Carlo drivers and CSV output.

pub mod alignment;
pub mod channel;
pub mod error;
pub mod feasibility;
pub mod harness;
pub mod mathcore;
pub mod metrics;

pub use alignment::{
    apply_backoff, leakage, solve_strict, solve_unconstrained, update_combiners, update_precoders, update_precoders_near,
    BackoffResult, Combiner, IASolution, Precoder, SolverOptions,
};
pub use channel::{
    build_geometry, draw_das_channels, draw_rayleigh, ChannelSet, DasRealization, NetworkGeometry,
    Point, PowerConfig, Propagation, SystemShape,
};
pub use error::{Error, Result};
pub use feasibility::{is_proper, Classification, ConstraintSet, PropernessReport};
pub use mathcore::{chisq_cdf, haar_frame, smallest_eigvecs, smallest_eigvecs_near, ComplexMatrix, RandomSeed};
pub use metrics::{
    beta2_cdf, empirical_beta2, expected_rate_loss, sum_rate, zf_rate, BackoffModel,
    ChiSquareConvention, EmpiricalBeta2, ExponentVariant, RateSample,
};
