//! SLA-guaranteeing link scheduling and admission control for tree-topology
//! TDMA backhaul networks.
//!
//! The crate is organized around seven pieces:
//!
//! * [`model`] — exact-rational domain types, tree ingestion and the
//!   per-level capacity bound used to normalize utility;
//! * [`pinwheel`] — pinwheel scheduling: density, verification, the
//!   two-base `Sxy` scheduler, inductive scheduling and a brute-force
//!   oracle;
//! * [`symmetric`] — closed-form optimal policies for perfectly symmetric
//!   trees, universal round-robin and greedy pruning;
//! * [`dsum`] — the distributed utility-maximization solver (per-node
//!   tables bottom-up, assignment top-down);
//! * [`milp`] — mixed-integer linear model construction, LP-format
//!   emission and certificate checking;
//! * [`sim`] — a slot-level fluid simulator that replays solution bundles
//!   and measures end-to-end delays;
//! * [`experiment`] — seeded corpus generators, experiment drivers and CSV
//!   emission.

pub mod dsum;
pub mod experiment;
pub mod milp;
pub mod model;
pub mod pinwheel;
pub mod rational;
pub mod sim;
pub mod symmetric;

pub use rational::Rational;
