//! Multi-fair capacitated grouping of students into topic groups.
//!
//! Students list ranked topic wishes; topics rank the students who chose
//! them. A grouping assigns every student to exactly one topic group whose
//! size lies within `[C^l, C^u]`. Two polynomial solvers (a preference-order
//! heuristic and a per-topic knapsack) share a repair step, and an
//! exhaustive oracle gives exact optima on toy instances.
//!
//! ```
//! use mfc_grouping::{generate_semisynthetic, solve, GeneratorConfig, Method, Params, SolverOptions};
//!
//! let cfg = GeneratorConfig { n: 24, m: 16, h: 3, seed: 1, proportions: [2.0 / 3.0, 1.0 / 3.0] };
//! let instance = generate_semisynthetic(None, &cfg, Params::default()).unwrap();
//! let sol = solve(&instance, Method::Heuristic, &SolverOptions::default()).unwrap();
//! assert_eq!(sol.grouping.assigned(), 24);
//! ```

pub mod adjust;
mod board;
pub mod dataset;
pub mod emit;
pub mod error;
pub mod generator;
pub mod heuristic;
pub mod knapsack;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod sweep;
pub mod welfare;

pub use adjust::group_adjustment;
pub use dataset::{load_dataset, read_dataset, write_dataset, DatasetSchema, LoadedDataset};
pub use emit::{emit_grouping, read_grouping, write_grouping, GroupingDocument, OutputFormat};
pub use error::{Error, IngestError, Result};
pub use generator::{generate_semisynthetic, write_semisynthetic, GeneratorConfig};
pub use heuristic::{heuristic_solve, HeuristicConfig};
pub use knapsack::{knapsack_01, knapsack_solve, KnapsackConfig, ModBasis, TopicOrder};
pub use metrics::{
    balance_of_categories, grouping_balance, nash_normalized, nash_product, satisfaction,
    MetricsReport,
};
pub use model::{
    check_feasibility, is_complete_partition, validate_instance, Bounds, Category, Grouping,
    Instance, Params, Student, ValidationReport, WishMatrix,
};
pub use oracle::{oracle_solve, OracleSolution};
pub use solver::{solve, Method, Solution, SolverOptions};
pub use sweep::{run_sweep, SweepConfig, SweepResult};
pub use welfare::{build_interest_matrix, build_priority_matrix, build_welfare};
