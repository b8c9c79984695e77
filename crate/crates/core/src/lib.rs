//! Online Steiner tree maintenance under vertex deletions and under mixed
//! additions and deletions.
//!
//! * [`amortized`]: deletion-only, constant amortized edge changes per step.
//! * [`lipschitz`]: deletion-only, constant edge changes on every step.
//! * [`dynamic`]: additions and deletions, greedy attachment plus 2-swaps.
//! * [`oracle`]: exact Steiner trees and lower bounds for checking the above.
//!
//! Everything is generic over an unsigned integer [`Length`]; the aliases
//! below fix it to `u64`.

pub mod amortized;
pub mod dynamic;
pub mod forest;
pub mod hierarchy;
pub mod length;
pub mod lipschitz;
pub mod metric;
pub mod oracle;

pub use forest::{Edge, SteinerForest, SteinerTree, VertexId};
pub use hierarchy::{ClusterStatus, HierarchicalClustering, VertexState};
pub use length::Length;
pub use metric::{MetricError, MetricSpace};

pub type Metric = MetricSpace<u64>;
pub type Forest = SteinerForest<u64>;
pub type Clustering = HierarchicalClustering<u64>;
pub type AmortizedDeleter = amortized::AmortizedState<u64>;
pub type LipschitzDeleter = lipschitz::LipschitzState<u64>;
pub type DynamicSteiner = dynamic::DynTree<u64>;
