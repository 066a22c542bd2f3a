//! Auctions for a single divisible item where each bidder's budget is created
//! by the allocation handed to everyone else.
//!
//! Bidder `i` has a private per-unit valuation `v_i` and a public budget impact
//! factor `alpha_i`; receiving `x_i` of the item leaves the bidder with budget
//! `alpha_i * sum_{j != i} x_j`. The crate provides
//!
//! * [`model`]: instances, allocations, budgets, budgeted quasi-linear utility
//!   and liquid welfare,
//! * [`optimal`]: the greedy allocator that maximises liquid welfare, plus a
//!   checker for the structural properties that characterise its output,
//! * [`oracle`]: a brute-force simplex search and a misreport search used to
//!   validate the other modules,
//! * [`mechanism`]: the truthful uniform-price auction with a one-half purchase
//!   limit and Myerson payments,
//! * [`verify`]: executable invariant suites, approximation-ratio sweeps and the
//!   two-bidder upper-bound family,
//! * [`harness`]: JSON instance I/O, seeded instance generation and report
//!   serialisation used by the `budgetext` binary.

pub mod error;
pub mod harness;
pub mod mechanism;
pub mod model;
pub mod numeric;
pub mod optimal;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
pub use mechanism::{Mechanism, MechanismOutcome, MechanismTrace, PriceBranch};
pub use model::{Allocation, AuctionInstance, Outcome, Utility};
pub use optimal::{check_opt_properties, optimal_allocation, OptBranch, OptProperties, OptTrace};
pub use oracle::{best_deviation, grid_search_lw, Deviation, OracleResult};
pub use verify::{verify_instance, CheckName, CheckReport, ExperimentReport, SweepConfig};

/// Absolute tolerance for equality and feasibility comparisons.
pub const TOL: f64 = 1e-9;
