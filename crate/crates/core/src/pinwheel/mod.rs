//! Pinwheel scheduling: density, schedule verification, round-robin, the
//! two-base `Sxy` scheduler, the inductive scheduling algorithm and a
//! brute-force schedulability oracle.
//!
//! A pinwheel instance is a vector of maximum inter-scheduling times: task
//! `i` must appear in every window of `k_i` consecutive slots of an infinite
//! slotted schedule. Equivalently, for a cyclic schedule, every cyclic gap
//! between consecutive occurrences of task `i` must be at most `k_i`.

mod inductive;
mod kvector;
mod oracle;
mod sxy;

pub use inductive::{is_regularize, is_reinsert, is_schedule, IsIteration, IsSolver, IsSuccess, IsTrace, RegularizeError, ReinsertError};
pub use kvector::{density, density_of, round_robin, verify_schedule, CyclicSchedule, KVector, Verdict};
pub use oracle::{brute_force_schedulable, BruteForceOutcome};
pub use sxy::{sxy_feasible, sxy_feasible_with, sxy_schedule, sxy_schedule_with, SxyGroup, SxySearch, SxyTaskAssignment, SxyWitness};
