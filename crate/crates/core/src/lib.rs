//! Diversity-aware clustering: choose `k` facilities that meet per-group lower
//! bounds over possibly intersecting groups while minimizing the k-median,
//! k-means or k-supplier objective.
//!
//! The pipeline splits facilities by group membership, enumerates the
//! feasible multisets of parts, and solves each one as a partition-matroid
//! clustering problem. Fair clustering (disjoint groups, exact counts) reduces
//! to a single partition-matroid instance.
//!
//! ```
//! use divclust::{fixtures::e1, solve_div_clustering, Objective, SolveOptions};
//!
//! let inst = e1(Objective::Median);
//! let sol = solve_div_clustering(&inst, &SolveOptions::default()).unwrap();
//! assert_eq!(sol.facilities, vec![0, 3]);
//! assert_eq!(sol.cost, 3.0);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coreset;
pub mod drivers;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod io;
pub mod kmedian;
pub mod ksupplier;
pub mod matching;
pub mod metric;
pub mod oracle;
pub mod pattern;

pub use coreset::{build_coreset, WeightedClients};
pub use drivers::{reduce_fair_to_pm, solve_div_clustering, solve_fair, CopyMode, CoresetMode, SolveOptions};
pub use error::{Error, MetricViolation, Result};
pub use instance::{CharacteristicVector, DiversityInstance, PartitionInstance, Solution, SolveStats, Transversal};
pub use kmedian::{solve_kmedian_pm, GridMode, LeaderSpace, PmOptions, Selection};
pub use ksupplier::{solve_ksupplier_pm, ThresholdSearch};
pub use metric::{DistanceMatrix, Objective, RadiusGrid};
pub use pattern::{build_partition, enumerate_feasible_patterns, materialize, ConstraintPattern, FacilityPartition};
