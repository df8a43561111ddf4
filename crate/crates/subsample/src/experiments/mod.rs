//! Desk-scale end-to-end demonstrations of the reparameterized gradients:
//! learning a subset distribution by matching samples, a toy instance-wise
//! feature selection objective, a neighbor-matching stochastic embedding
//! with the trustworthiness metric, and a forward-pass scaling benchmark.

pub mod bench;
pub mod feature_select;
pub mod match_dist;
pub mod sne;

pub use bench::{scaling_benchmark, BenchRow};
pub use feature_select::{toy_feature_selection, FeatureSelectConfig, FeatureSelectResult};
pub use match_dist::{train_match_distribution, MatchConfig, MatchResult};
pub use sne::{
    make_cluster_data, rss_sne_train, sne_loss, trustworthiness, EmbeddingConfig, SneResult,
};
