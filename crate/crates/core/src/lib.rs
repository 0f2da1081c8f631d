//! Global upper and lower expectations for discrete-time processes described
//! by imprecise probability trees.
//!
//! Three independent routes compute the same quantities:
//!
//! * [`game`]: backward recursion with witness supermartingales,
//! * [`oracle`]: envelopes of finitary expectations over compatible precise
//!   trees, built from cylinder probabilities,
//! * [`limit`]: monotone sequences of finitary gambles driven by a
//!   convergence controller, usable with either route.
//!
//! The [`harness`] module turns the axiom systems and the cross-route
//! agreement into executable property suites.

pub mod error;
pub mod extended;
pub mod format;
pub mod gamble;
pub mod game;
pub mod harness;
pub mod limit;
pub mod local;
pub mod oracle;
pub mod path;
pub mod space;
pub mod tree;

/// Absolute tolerance for comparing reals computed along different routes.
pub const TOLERANCE: f64 = 1e-9;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use gamble::{FinitaryGamble, Node};
pub use local::{CredalSet, LocalGamble, MassFunction};
pub use space::{is_prefix, Situation, StateSpace};
pub use tree::{ImpreciseTree, PreciseTree};
