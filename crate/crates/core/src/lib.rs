//! Synchrony analysis for weighted coupled cell networks.
//!
//! A network is a set of typed cells joined by weighted directed edges. This
//! crate finds the partitions of its cells that define flow-invariant
//! subspaces (balanced partitions), arranges them in a lattice, classifies
//! them by how their colors relate to the strongly connected structure of the
//! network, and checks these properties numerically against sampled
//! admissible dynamics.
//!
//! Modules, from the bottom up:
//!
//! * [`monoid`]: weight algebra.
//! * [`network`]: loading, validating and exporting networks.
//! * [`partition`]: set partitions and the refinement order.
//! * [`connectivity`]: neighborhoods, reachability and components.
//! * [`synchrony`]: balanced partitions, quotients and the lattice.
//! * [`classification`]: strong, rooted and weak colors.
//! * [`dynamics`]: admissible maps and numerical checks.
//! * [`cli`]: the `synckit` command.

pub mod classification;
pub mod cli;
pub mod connectivity;
pub mod dynamics;
pub mod monoid;
pub mod network;
pub mod partition;
pub mod synchrony;
