//! Numerical tools for the outer bound on the distortion region of a
//! Gaussian source broadcast to `K` receivers over a Gaussian broadcast
//! channel with bandwidth factor `b`.
//!
//! - [`scenario`]: validated scenarios, distortion tuples, tau schedules and
//!   the point-to-point limits `D_k*`.
//! - [`bound`]: the functional `g` and its comparison with `P + N_1`.
//! - [`membership`]: supremum over schedules, region membership, boundary
//!   tracing and regime classification.
//! - [`capacity`]: degraded Gaussian broadcast capacity regions, virtual
//!   channels and containment.
//! - [`minkowski`]: Minkowski's inequality on extended reals.
//! - [`simulate`]: Monte Carlo run of uncoded transmission at `b = 1`.
//! - [`verify`]: randomised invariant suites.

pub mod bound;
pub mod capacity;
pub mod error;
pub mod ext_real;
pub mod membership;
pub mod minkowski;
pub mod scenario;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use scenario::{
    tau_step_schedule, trivial_distortion, validate_scenario, BroadcastScenario, DistortionTuple,
    RawScenario, TauSchedule,
};
