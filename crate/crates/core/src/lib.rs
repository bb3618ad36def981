//! Exact solvers for the least core and the nucleolus of convex cooperative
//! games.
//!
//! Everything runs in arbitrary-precision rational arithmetic; there is no
//! floating point and no tolerance anywhere. The fast path is combinatorial:
//! core non-emptiness of a shifted game is decided by a single submodular
//! minimization over superadditive covers (a discrete sandwich argument), the
//! least-core search updates ε along Farkas certificates and stops within
//! `2n − 2` rounds, and the nucleolus is assembled by splitting on essential
//! coalitions into reduced games evaluated lazily through supermodular
//! maximization. An independent brute-force oracle (exact rational simplex,
//! partition enumeration, sequential LPs) provides ground truth at small
//! sizes.
//!
//! Entry points:
//! - [`game::Game`] — explicit tables, airport and bankruptcy generators;
//! - [`least_core::least_core`] — ε*, essential coalitions, dual weights;
//! - [`nucleolus::nucleolus_divide_conquer`] / [`nucleolus::nucleolus_per_player`];
//! - [`oracle`] — LP-based reference implementations for verification.

pub mod coalition;
pub mod cover;
pub mod error;
pub mod game;
pub mod least_core;
pub mod nucleolus;
pub mod oracle;
pub mod rational;
pub mod sfm;

pub use coalition::Coalition;
pub use error::{Error, Result};
pub use game::{Allocation, Game};
pub use rational::Rational;
