//! Networked coordination games of innovation diffusion.
//!
//! Every node of a graph picks the innovation `A` or the status quo `B`; an
//! edge pays `alpha` to both endpoints when both play A, `beta` when both
//! play B and `gamma` otherwise. The crate evaluates utilities and welfare
//! exactly over rationals, tests and enumerates pure Nash equilibria,
//! computes the closed-form price-of-anarchy bound
//! `alpha(alpha + beta - 2 gamma) / (alpha beta - gamma^2)`, checks each step
//! of the argument behind it, and builds instances that meet the bound.
//!
//! ```
//! use netcoord::{analysis::poa_upper_bound, worst_case::worst_case_report, Params};
//!
//! let p = Params::from_ints(3, 2, 1).unwrap();
//! assert_eq!(poa_upper_bound(&p).bound.to_string(), "9/5");
//! let report = worst_case_report(&p).unwrap();
//! assert!(report.equal);
//! ```

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod rational;
pub mod worst_case;

pub use error::{Error, Result};
pub use graph::{classify_edges, EdgeState, Graph, Params, Profile, Strategy};
pub use rational::Rational;
