//! A probabilistic generative recommender built on two latent variables:
//! a topic and a social influencer. The same EM machinery trains four model
//! variants (plain collaborative filtering, with social influence, with item
//! content, and the unified combination) either serially or through a
//! partitioned map/shuffle/reduce pipeline, and the learned parameters drive
//! individual top-n recommendation, group recommendation and the evaluation
//! metrics.

pub mod checkpoint;
pub mod corpus;
pub mod em;
pub mod error;
pub mod eval;
pub mod group;
pub mod mapreduce;
pub mod params;
pub mod recommend;
pub mod synth;

#[cfg(test)]
pub(crate) mod testutil;

pub use corpus::{
    expand_content, load_corpus, load_group_events, pair_observations, split_holdout, Corpus,
    GroupEvent, Observation, Split,
};
pub use em::{train, Accumulators, PosteriorBlock, Termination, TrainTrace};
pub use error::{Error, Result};
pub use group::{recommend_group, GroupStrategy};
pub use mapreduce::{train_parallel, train_parallel_with, EmissionMode, MapInput, ParallelOptions};
pub use params::{init_params, ModelConfig, ParamSet};
pub use recommend::{recommend_top_n, RankedList, UserHistory};
pub use synth::{sample_corpus, sample_group_events, PlantedWorld, WorldConfig};
