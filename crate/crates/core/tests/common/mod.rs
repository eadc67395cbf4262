//! Shared instance builders and independent brute-force oracles for the
//! integration and acceptance tests. The oracles recompute probabilities
//! with plain loops over the public parameter tables and never reuse the
//! library's summation paths.

#![allow(dead_code)]

pub mod worlds;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigrec::corpus::{Corpus, Interner, Observation};
use sigrec::params::{Matrix, ParamSet};

pub struct Instance {
    pub corpus: Corpus,
    pub params: ParamSet,
    pub observations: Vec<Observation>,
}

/// Random small instance: at most 6 users, 5 items, 4 tags, K <= 4 and
/// |F(u)| <= 4, with a valid randomly-filled parameter set.
pub fn random_instance(seed: u64, content: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = rng.gen_range(2..=6usize);
    let n_items = rng.gen_range(2..=5usize);
    let n_tags = if content { rng.gen_range(2..=4usize) } else { 0 };
    let k = rng.gen_range(1..=4usize);

    let mut users = Interner::new();
    for u in 0..n_users {
        users.intern(&format!("u{u}"));
    }
    let mut items = Interner::new();
    for i in 0..n_items {
        items.intern(&format!("i{i}"));
    }
    let mut tags = Interner::new();
    for w in 0..n_tags {
        tags.intern(&format!("w{w}"));
    }
    let mut edges = Vec::new();
    for u in 0..n_users as u32 {
        let degree = rng.gen_range(0..=3usize.min(n_users - 1));
        for _ in 0..degree {
            let f = rng.gen_range(0..n_users as u32);
            if f != u {
                edges.push((u, f));
            }
        }
    }
    let mut item_tag_pairs = Vec::new();
    if content {
        for i in 0..n_items as u32 {
            for _ in 0..rng.gen_range(1..=2usize) {
                item_tag_pairs.push((i, rng.gen_range(0..n_tags as u32)));
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

    let support: Vec<Vec<u32>> = (0..n_users as u32)
        .map(|u| corpus.friends(u).to_vec())
        .collect();

    // raw positive influence weights normalized per influencer
    let mut influence: Vec<Vec<f64>> = support
        .iter()
        .map(|s| s.iter().map(|_| rng.gen_range(0.1..1.0)).collect())
        .collect();
    let mut totals = vec![0.0f64; n_users];
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

    let random_rows = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut row: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            m.row_mut(r).copy_from_slice(&row);
        }
        m
    };
    let mut topic_prior: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let prior_total: f64 = topic_prior.iter().sum();
    topic_prior.iter_mut().for_each(|v| *v /= prior_total);
    let topic_user = random_rows(&mut rng, k, n_users);
    let topic_item = random_rows(&mut rng, k, n_items);
    let topic_tag = content.then(|| random_rows(&mut rng, k, n_tags));

    let params = ParamSet::from_tables(
        true,
        content,
        seed,
        topic_prior,
        support,
        influence,
        topic_user,
        topic_item,
        topic_tag,
    );

    let n_obs = rng.gen_range(3..=10usize);
    let observations = (0..n_obs)
        .map(|_| {
            let user = rng.gen_range(0..n_users as u32);
            let item = rng.gen_range(0..n_items as u32);
            let tag = content.then(|| rng.gen_range(0..n_tags as u32));
            Observation { user, item, tag }
        })
        .collect();

    Instance {
        corpus,
        params,
        observations,
    }
}

/// Direct product of the factor table entries.
pub fn oracle_joint(params: &ParamSet, u: u32, f: u32, z: usize, i: u32, w: Option<u32>) -> f64 {
    let mut p = params.topic_prior()[z]
        * params.influence_weight(f, u)
        * params.topic_user().row(z)[f as usize]
        * params.topic_item().row(z)[i as usize];
    if let Some(w) = w {
        p *= params.topic_tag().unwrap().row(z)[w as usize];
    }
    p
}

/// Posterior by exhaustive enumeration of the numerators, row-major
/// K x |F(u)|. Returns a uniform block when every numerator is zero.
pub fn oracle_posterior(params: &ParamSet, u: u32, i: u32, w: Option<u32>) -> Vec<f64> {
    let friends = params.influencers(u);
    let k = params.k();
    let mut numerators = Vec::with_capacity(k * friends.len());
    for z in 0..k {
        for &f in friends {
            numerators.push(oracle_joint(params, u, f, z, i, w));
        }
    }
    let total: f64 = numerators.iter().sum();
    if total > 0.0 {
        numerators.iter_mut().for_each(|v| *v /= total);
    } else {
        let uniform = 1.0 / numerators.len() as f64;
        numerators.iter_mut().for_each(|v| *v = uniform);
    }
    numerators
}

/// Ranking score by exhaustive enumeration over (z, f) and, for content
/// models, the item's tag set.
pub fn oracle_item_score(params: &ParamSet, corpus: &Corpus, u: u32, i: u32) -> f64 {
    let friends = params.influencers(u);
    let mut total = 0.0;
    for z in 0..params.k() {
        for &f in friends {
            if params.content() {
                for &w in corpus.item_tags(i) {
                    total += oracle_joint(params, u, f, z, i, Some(w));
                }
            } else {
                total += oracle_joint(params, u, f, z, i, None);
            }
        }
    }
    total
}

/// Pr(u, f, i) by direct summation over topics.
pub fn oracle_pair_joint(params: &ParamSet, u: u32, f: u32, i: u32) -> f64 {
    (0..params.k())
        .map(|z| oracle_joint_no_tag(params, u, f, z, i))
        .sum()
}

fn oracle_joint_no_tag(params: &ParamSet, u: u32, f: u32, z: usize, i: u32) -> f64 {
    params.topic_prior()[z]
        * params.influence_weight(f, u)
        * params.topic_user().row(z)[f as usize]
        * params.topic_item().row(z)[i as usize]
}

/// Term-by-term log-likelihood with the same clamp as the engine.
pub fn oracle_log_likelihood(params: &ParamSet, observations: &[Observation]) -> f64 {
    observations
        .iter()
        .map(|obs| {
            let friends = params.influencers(obs.user);
            let mut p = 0.0;
            for z in 0..params.k() {
                for &f in friends {
                    p += oracle_joint(params, obs.user, f, z, obs.item, obs.tag);
                }
            }
            p.max(1e-300).ln()
        })
        .sum()
}

/// Reference trainer for the single-latent-variable model
/// Pr(u,i) = sum_z Pr(z) Pr(u|z) Pr(i|z), with the engine's smoothing.
/// Used as the degeneracy oracle when every friend list is just the user.
pub struct CfReference {
    pub prior: Vec<f64>,
    pub user: Matrix,
    pub item: Matrix,
}

impl CfReference {
    pub fn from_params(params: &ParamSet) -> Self {
        CfReference {
            prior: params.topic_prior().to_vec(),
            user: params.topic_user().clone(),
            item: params.topic_item().clone(),
        }
    }

    pub fn iterate(&mut self, observations: &[Observation], smoothing: f64) {
        let k = self.prior.len();
        let mut acc_prior = vec![0.0f64; k];
        let mut acc_user = Matrix::zeros(k, self.user.cols());
        let mut acc_item = Matrix::zeros(k, self.item.cols());
        for obs in observations {
            let mut q: Vec<f64> = (0..k)
                .map(|z| {
                    self.prior[z]
                        * self.user.row(z)[obs.user as usize]
                        * self.item.row(z)[obs.item as usize]
                })
                .collect();
            let total: f64 = q.iter().sum();
            if total > 0.0 {
                q.iter_mut().for_each(|v| *v /= total);
            } else {
                q.iter_mut().for_each(|v| *v = 1.0 / k as f64);
            }
            for z in 0..k {
                acc_prior[z] += q[z];
                acc_user.row_mut(z)[obs.user as usize] += q[z];
                acc_item.row_mut(z)[obs.item as usize] += q[z];
            }
        }
        let normalize = |values: &mut [f64]| {
            values.iter_mut().for_each(|v| *v += smoothing);
            let total: f64 = values.iter().sum();
            values.iter_mut().for_each(|v| *v /= total);
        };
        normalize(&mut acc_prior);
        for z in 0..k {
            normalize(acc_user.row_mut(z));
            normalize(acc_item.row_mut(z));
        }
        self.prior = acc_prior;
        self.user = acc_user;
        self.item = acc_item;
    }
}

/// Largest relative difference between two slices, treating an all-zero
/// pair as equal.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Largest absolute difference between two slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Clone of a corpus skeleton with the interactions replaced.
pub fn with_interactions(corpus: &Corpus, pairs: Vec<(u32, u32)>) -> Corpus {
    let mut out = corpus.clone();
    out.interactions = pairs;
    out
}
