//! Ancestral sampler over a planted parameter set: draws interaction
//! histories and group events by executing the generative story, providing
//! ground truth for recovery and ranking tests.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::corpus::{Corpus, GroupEvent, Interner, Observation};
use crate::params::{Matrix, ParamSet};

/// Shape of a generated world. Influence weights are pre-normalization:
/// `self_weight` for the (u, u) pair and `friend_weight` for each friend
/// pair, so their ratio controls how much of the derived generative
/// influence sits on friends.
#[derive(Debug, Clone)]
pub struct WorldConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub n_tags: usize,
    pub topics: usize,
    pub seed: u64,
    pub friends_per_user: usize,
    /// Also add the reverse of every generated friend edge.
    pub mutual_friends: bool,
    pub tags_per_item: usize,
    pub content: bool,
    pub self_weight: f64,
    pub friend_weight: f64,
    /// Log-uniform spread of per-pair friend weights: each pair's weight is
    /// `friend_weight` times a factor in [1/spread, spread]. 1.0 disables.
    pub friend_weight_spread: f64,
    /// Dirichlet concentration for the per-topic item and tag rows; small
    /// values give well-separated topics.
    pub topic_alpha: f64,
    /// Dirichlet concentration for the per-topic user rows. Ignored when
    /// `assigned_topics` is set.
    pub user_alpha: f64,
    /// Give every user a single home topic (round-robin) instead of
    /// Dirichlet user rows; the user then generates from that topic except
    /// for `assignment_noise` mass spread over the others. Keeps user
    /// marginals comparable across users.
    pub assigned_topics: bool,
    pub assignment_noise: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_users: 50,
            n_items: 100,
            n_tags: 0,
            topics: 4,
            seed: 1,
            friends_per_user: 4,
            mutual_friends: false,
            tags_per_item: 3,
            content: false,
            self_weight: 1.0,
            friend_weight: 1.0,
            friend_weight_spread: 1.0,
            topic_alpha: 0.2,
            user_alpha: 0.5,
            assigned_topics: false,
            assignment_noise: 0.05,
        }
    }
}

/// A known parameter set with its corpus skeleton; the ground truth that
/// sampled data is drawn from.
#[derive(Debug, Clone)]
pub struct PlantedWorld {
    pub corpus: Corpus,
    pub params: ParamSet,
    /// Cached generative influence rows Pr(f|u), aligned with the parameter
    /// set's influencer lists.
    generative: Vec<Vec<f64>>,
    /// Users adjacent in either direction, excluding self.
    neighbors: Vec<Vec<u32>>,
}

fn dirichlet_row<R: Rng>(rng: &mut R, alpha: f64, len: usize) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("bad concentration");
    let mut row: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter_mut().for_each(|v| *v /= total);
    } else {
        row.iter_mut().for_each(|v| *v = 1.0 / len as f64);
    }
    row
}

/// Cumulative-weight categorical sampler.
struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    fn new(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        if total > 0.0 {
            for &w in weights {
                acc += w / total;
                cdf.push(acc);
            }
        } else {
            for k in 0..weights.len() {
                cdf.push((k + 1) as f64 / weights.len() as f64);
            }
        }
        Categorical { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.gen();
        self.cdf
            .partition_point(|&c| c <= r)
            .min(self.cdf.len() - 1)
    }
}

impl PlantedWorld {
    pub fn generate(config: &WorldConfig) -> PlantedWorld {
        assert!(config.n_users > 0 && config.n_items > 0 && config.topics > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut users = Interner::new();
        for u in 0..config.n_users {
            users.intern(&format!("u{u}"));
        }
        let mut items = Interner::new();
        for i in 0..config.n_items {
            items.intern(&format!("i{i}"));
        }
        let mut tags = Interner::new();
        for w in 0..config.n_tags {
            tags.intern(&format!("t{w}"));
        }

        let mut edges = Vec::new();
        if config.n_users > 1 {
            for u in 0..config.n_users as u32 {
                for _ in 0..config.friends_per_user {
                    let f = loop {
                        let f = rng.gen_range(0..config.n_users as u32);
                        if f != u {
                            break f;
                        }
                    };
                    edges.push((u, f));
                    if config.mutual_friends {
                        edges.push((f, u));
                    }
                }
            }
        }

        let mut item_tag_pairs = Vec::new();
        if config.content && config.n_tags > 0 {
            for i in 0..config.n_items as u32 {
                for _ in 0..config.tags_per_item {
                    item_tag_pairs.push((i, rng.gen_range(0..config.n_tags as u32)));
                }
            }
        }

        let corpus = Corpus::from_parts(
            users,
            items,
            tags,
            Vec::new(),
            &edges,
            &item_tag_pairs,
        );

        let k = config.topics;
        let support: Vec<Vec<u32>> = (0..config.n_users as u32)
            .map(|u| corpus.friends(u).to_vec())
            .collect();

        // raw pair weights, normalized per influencer
        let mut influence: Vec<Vec<f64>> = support
            .iter()
            .enumerate()
            .map(|(u, friends)| {
                friends
                    .iter()
                    .map(|&f| {
                        if f as usize == u {
                            config.self_weight
                        } else {
                            let spread = config.friend_weight_spread.max(1.0);
                            let factor = if spread > 1.0 {
                                let ln = rng.gen_range(-spread.ln()..spread.ln());
                                ln.exp()
                            } else {
                                rng.gen_range(0.5..1.5)
                            };
                            config.friend_weight * factor
                        }
                    })
                    .collect()
            })
            .collect();
        let mut totals = vec![0.0f64; config.n_users];
        for (friends, row) in support.iter().zip(&influence) {
            for (&f, &v) in friends.iter().zip(row) {
                totals[f as usize] += v;
            }
        }
        for (friends, row) in support.iter().zip(influence.iter_mut()) {
            for (&f, v) in friends.iter().zip(row.iter_mut()) {
                *v /= totals[f as usize];
            }
        }

        let topic_prior = dirichlet_row(&mut rng, 5.0, k);
        let mut topic_user = Matrix::zeros(k, config.n_users);
        if config.assigned_topics {
            // column per user: home topic carries 1 - noise, jittered
            let noise = config.assignment_noise.clamp(0.0, 0.5);
            for u in 0..config.n_users {
                let home = u % k;
                let jitter = rng.gen_range(0.8..1.2);
                for z in 0..k {
                    let share = if z == home {
                        (1.0 - noise) * jitter
                    } else if k > 1 {
                        noise * jitter / (k - 1) as f64
                    } else {
                        0.0
                    };
                    topic_user.row_mut(z)[u] = share;
                }
            }
            for z in 0..k {
                let row = topic_user.row_mut(z);
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= total);
            }
        } else {
            for z in 0..k {
                topic_user
                    .row_mut(z)
                    .copy_from_slice(&dirichlet_row(&mut rng, config.user_alpha, config.n_users));
            }
        }
        let mut topic_item = Matrix::zeros(k, config.n_items);
        for z in 0..k {
            topic_item
                .row_mut(z)
                .copy_from_slice(&dirichlet_row(&mut rng, config.topic_alpha, config.n_items));
        }
        let topic_tag = if config.content {
            let mut m = Matrix::zeros(k, config.n_tags);
            for z in 0..k {
                m.row_mut(z)
                    .copy_from_slice(&dirichlet_row(&mut rng, config.topic_alpha, config.n_tags));
            }
            Some(m)
        } else {
            None
        };

        let params = ParamSet::from_tables(
            true,
            config.content,
            config.seed,
            topic_prior,
            support,
            influence,
            topic_user,
            topic_item,
            topic_tag,
        );
        PlantedWorld::from_parts(corpus, params)
    }

    /// Wraps an existing corpus and parameter set as a planted world.
    pub fn from_parts(corpus: Corpus, params: ParamSet) -> PlantedWorld {
        let generative = params.derive_generative_influence().rows;
        let n_users = params.n_users();
        let mut neighbors = vec![Vec::new(); n_users];
        for u in 0..n_users as u32 {
            for &f in params.influencers(u) {
                if f != u {
                    neighbors[u as usize].push(f);
                    neighbors[f as usize].push(u);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        PlantedWorld {
            corpus,
            params,
            generative,
            neighbors,
        }
    }

    /// Mean over users of the generative influence mass on friends.
    pub fn friend_influence_mass(&self) -> f64 {
        let mut total = 0.0;
        for (u, row) in self.generative.iter().enumerate() {
            let friends = self.params.influencers(u as u32);
            let friend_mass: f64 = friends
                .iter()
                .zip(row)
                .filter(|(&f, _)| f != u as u32)
                .map(|(_, &v)| v)
                .sum();
            total += friend_mass;
        }
        total / self.generative.len() as f64
    }

    /// Log-likelihood of a sample under the planted parameters, the
    /// reference that trained models are compared against.
    pub fn reference_log_likelihood(&self, observations: &[Observation]) -> f64 {
        self.params.log_likelihood(observations)
    }
}

/// Draws observations by executing the generative story over the model's
/// own factorization: topic from Pr(z), influencer from Pr(f|z), influenced
/// user from Pr(u|f), item from Pr(i|z) and, for content worlds, a tag from
/// Pr(w|z). Sampling this joint makes the planted parameters the exact
/// distribution of the data, so trained models can be compared against the
/// planted reference.
pub fn sample_corpus(world: &PlantedWorld, n_events: usize, seed: u64) -> Vec<Observation> {
    assert!(n_events >= 1);
    let params = &world.params;
    let k = params.k();
    let n_users = params.n_users();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let topic_picker = Categorical::new(params.topic_prior());
    let influencer_pickers: Vec<Categorical> = (0..k)
        .map(|z| Categorical::new(params.topic_user().row(z)))
        .collect();
    // users each influencer can reach, with Pr(u|f)
    let mut influencees: Vec<(Vec<u32>, Categorical)> = Vec::with_capacity(n_users);
    {
        let mut reach: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_users];
        for u in 0..n_users as u32 {
            for (&f, &v) in params.influencers(u).iter().zip(params.influence_row(u)) {
                reach[f as usize].push((u, v));
            }
        }
        for entries in reach {
            let ids: Vec<u32> = entries.iter().map(|&(u, _)| u).collect();
            let weights: Vec<f64> = entries.iter().map(|&(_, v)| v).collect();
            influencees.push((ids, Categorical::new(&weights)));
        }
    }
    let item_pickers: Vec<Categorical> = (0..k)
        .map(|z| Categorical::new(params.topic_item().row(z)))
        .collect();
    let tag_pickers: Option<Vec<Categorical>> = params.topic_tag().map(|m| {
        (0..k).map(|z| Categorical::new(m.row(z))).collect()
    });

    let mut observations = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        let z = topic_picker.sample(&mut rng);
        let f = influencer_pickers[z].sample(&mut rng);
        let (ids, picker) = &influencees[f];
        let u = ids[picker.sample(&mut rng)];
        let i = item_pickers[z].sample(&mut rng) as u32;
        let tag = tag_pickers
            .as_ref()
            .map(|pickers| pickers[z].sample(&mut rng) as u32);
        observations.push(Observation { user: u, item: i, tag });
    }
    observations
}

/// Draws group events: a uniformly chosen non-self friend edge seeds the
/// group, the item follows the pair's influence score, and the group is
/// grown by members connected to someone already inside, up to a size drawn
/// from {2..=max_size}.
pub fn sample_group_events(
    world: &PlantedWorld,
    n_groups: usize,
    max_size: usize,
    seed: u64,
) -> Vec<GroupEvent> {
    assert!(max_size >= 2, "size cap must allow pairs");
    let params = &world.params;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for u in 0..params.n_users() as u32 {
        for &f in params.influencers(u) {
            if f != u {
                edges.push((u, f));
            }
        }
    }
    assert!(
        !edges.is_empty(),
        "group sampling needs at least one non-self friend edge"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pair_pickers: HashMap<(u32, u32), Categorical> = HashMap::new();
    let mut events = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        let &(u, f) = &edges[rng.gen_range(0..edges.len())];
        let key = (u.min(f), u.max(f));
        let picker = pair_pickers.entry(key).or_insert_with(|| {
            let weights: Vec<f64> = (0..params.n_items() as u32)
                .map(|i| pair_score(params, u, f, i))
                .collect();
            Categorical::new(&weights)
        });
        let item = picker.sample(&mut rng) as u32;

        let mut members = vec![u, f];
        let target = rng.gen_range(2..=max_size);
        while members.len() < target {
            let mut candidates: Vec<u32> = members
                .iter()
                .flat_map(|&m| world.neighbors[m as usize].iter().copied())
                .filter(|c| !members.contains(c))
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            if candidates.is_empty() {
                break;
            }
            members.push(candidates[rng.gen_range(0..candidates.len())]);
        }
        members.sort_unstable();
        events.push(GroupEvent { members, item });
    }
    events
}

/// Two-member influence score with each directed term present only when its
/// edge exists.
fn pair_score(params: &ParamSet, u: u32, f: u32, i: u32) -> f64 {
    let mut score = 0.0;
    if params.influencers(u).binary_search(&f).is_ok() {
        score += params.pair_joint(u, f, i);
    }
    if params.influencers(f).binary_search(&u).is_ok() {
        score += params.pair_joint(f, u, i);
    }
    score
}
