use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::heuristic::{heuristic_solve, HeuristicConfig};
use crate::knapsack::{knapsack_solve, KnapsackConfig, ModBasis, TopicOrder};
use crate::metrics::MetricsReport;
use crate::model::{Grouping, Instance};
use crate::oracle::{oracle_solve, DEFAULT_MAX_STATES};

/// A complete grouping together with its measures.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub grouping: Grouping,
    pub metrics: MetricsReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Heuristic,
    Knapsack,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::Knapsack => "knapsack",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heuristic" => Ok(Method::Heuristic),
            "knapsack" => Ok(Method::Knapsack),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Knobs shared across methods; each solver reads the ones it understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub balance_tiebreak: bool,
    pub mod_basis: ModBasis,
    pub topic_order: TopicOrder,
    pub oracle_max_states: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            balance_tiebreak: true,
            mod_basis: ModBasis::default(),
            topic_order: TopicOrder::default(),
            oracle_max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl SolverOptions {
    pub fn heuristic(&self) -> HeuristicConfig {
        HeuristicConfig {
            balance_tiebreak: self.balance_tiebreak,
        }
    }

    pub fn knapsack(&self) -> KnapsackConfig {
        KnapsackConfig {
            balance_tiebreak: self.balance_tiebreak,
            mod_basis: self.mod_basis,
            topic_order: self.topic_order,
        }
    }
}

pub fn solve(instance: &Instance, method: Method, options: &SolverOptions) -> Result<Solution> {
    match method {
        Method::Heuristic => heuristic_solve(instance, &options.heuristic()),
        Method::Knapsack => knapsack_solve(instance, &options.knapsack()),
        Method::Oracle => oracle_solve(instance, options.oracle_max_states).map(|o| o.solution),
    }
}
