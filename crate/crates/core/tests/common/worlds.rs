//! Frozen experiment configurations shared by the calibration run and the
//! acceptance suite. The directional margins asserted in the acceptance
//! tests were measured by `tests/calibration.rs` on exactly these worlds.

use sigrec::corpus::{pair_observations, split_holdout, Corpus, Observation, Split};
use sigrec::em::train;
use sigrec::params::{ModelConfig, ParamSet};
use sigrec::synth::{sample_corpus, PlantedWorld, WorldConfig};

pub const RECOVERY_SEEDS: [u64; 5] = [101, 202, 303, 404, 505];
pub const RECOVERY_EVENTS: usize = 18_000;
pub const RECOVERY_TOPICS: usize = 8;
pub const RECOVERY_MAX_ITERS: usize = 15;
pub const RECOVERY_HOLDOUT: f64 = 0.3;
pub const GROUP_EVENTS: usize = 3_000;
pub const GROUP_CAP: usize = 3;

/// Social world with one home topic per user, mutual friendships and
/// heterogeneous pair weights. Derived friend influence mass comes out
/// around 0.66.
pub fn recovery_world(seed: u64) -> PlantedWorld {
    PlantedWorld::generate(&WorldConfig {
        n_users: 300,
        n_items: 500,
        n_tags: 0,
        topics: RECOVERY_TOPICS,
        seed,
        friends_per_user: 2,
        mutual_friends: true,
        tags_per_item: 0,
        content: false,
        self_weight: 2.0,
        friend_weight: 1.0,
        friend_weight_spread: 8.0,
        topic_alpha: 0.03,
        user_alpha: 0.5,
        assigned_topics: true,
        assignment_noise: 0.03,
    })
}

pub struct RecoveryRun {
    pub world: PlantedWorld,
    pub corpus: Corpus,
    pub split: Split,
    pub train_obs: Vec<Observation>,
    pub test_obs: Vec<Observation>,
    pub si_params: ParamSet,
    pub cf_params: ParamSet,
}

/// Samples a corpus from the recovery world for `seed`, splits it and
/// trains the social and plain variants.
pub fn recovery_run(seed: u64) -> RecoveryRun {
    let world = recovery_world(seed);
    let events = sample_corpus(&world, RECOVERY_EVENTS, seed ^ 0xABCD);
    let pairs: Vec<(u32, u32)> = events.iter().map(|o| (o.user, o.item)).collect();
    let corpus = super::with_interactions(&world.corpus, pairs);
    let split = split_holdout(&corpus, RECOVERY_HOLDOUT, seed);
    let train_obs = pair_observations(&split.train);
    let test_obs = pair_observations(&split.test);
    let base = ModelConfig {
        topics: RECOVERY_TOPICS,
        seed: seed.wrapping_add(7),
        max_iters: RECOVERY_MAX_ITERS,
        ..ModelConfig::default()
    };
    let (si_params, _) = train(
        &ModelConfig {
            social: true,
            ..base
        },
        &corpus,
        &train_obs,
    );
    let (cf_params, _) = train(
        &ModelConfig {
            social: false,
            ..base
        },
        &corpus,
        &train_obs,
    );
    RecoveryRun {
        world,
        corpus,
        split,
        train_obs,
        test_obs,
        si_params,
        cf_params,
    }
}

/// Content world used by the training-dynamics criteria.
pub fn training_world(seed: u64) -> PlantedWorld {
    PlantedWorld::generate(&WorldConfig {
        n_users: 200,
        n_items: 500,
        n_tags: 50,
        topics: 5,
        seed,
        friends_per_user: 4,
        mutual_friends: false,
        tags_per_item: 3,
        content: true,
        self_weight: 1.0,
        friend_weight: 1.0,
        friend_weight_spread: 1.0,
        topic_alpha: 0.2,
        user_alpha: 0.5,
        assigned_topics: false,
        assignment_noise: 0.05,
    })
}

/// The four variant configurations over one sampled triple stream: content
/// variants take the triples, the others the stripped pairs.
pub fn variant_observations(triples: &[Observation]) -> Vec<(ModelConfig, Vec<Observation>)> {
    let pairs: Vec<Observation> = triples
        .iter()
        .map(|o| Observation::pair(o.user, o.item))
        .collect();
    let mut out = Vec::new();
    for (social, content) in [(false, false), (true, false), (false, true), (true, true)] {
        let config = ModelConfig {
            social,
            content,
            topics: 5,
            seed: 991,
            ..ModelConfig::default()
        };
        let observations = if content {
            triples.to_vec()
        } else {
            pairs.clone()
        };
        out.push((config, observations));
    }
    out
}
