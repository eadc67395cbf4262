//! Model parameter tables for the four model variants and the closed-form
//! probabilities computed from them.
//!
//! A trained model is five distribution families: the topic prior Pr(z), the
//! social influence table Pr(u|f) over directed influencer pairs, the
//! per-topic user distribution Pr(f|z), the per-topic item distribution
//! Pr(i|z) and, for content models, the per-topic tag distribution Pr(w|z).
//! Pr(u|f) normalizes over the influenced users of a fixed influencer f;
//! the generative direction Pr(f|u) is derived, not stored.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Observation};

/// Probabilities below this are clamped before taking logs.
pub const LOG_PROB_FLOOR: f64 = 1e-300;

/// Training configuration shared by the serial and partitioned engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Social influence on: friend lists come from the corpus. Off: every
    /// user influences only themselves.
    pub social: bool,
    /// Content on: observations are (user, item, tag) triples and the model
    /// carries a tag distribution per topic.
    pub content: bool,
    pub topics: usize,
    pub seed: u64,
    /// Absolute log-likelihood improvement below which training stops.
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            social: false,
            content: false,
            topics: 60,
            seed: 42,
            epsilon: 1e-4,
            max_iters: 50,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.topics == 0 {
            return Err("topic count must be at least 1".into());
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err("epsilon must be positive".into());
        }
        if self.max_iters == 0 {
            return Err("max_iters must be at least 1".into());
        }
        Ok(())
    }

    pub fn variant_name(&self) -> &'static str {
        match (self.social, self.content) {
            (false, false) => "cf",
            (true, false) => "cf+si",
            (false, true) => "cf+ic",
            (true, true) => "cf+si+ic",
        }
    }
}

/// Dense row-major matrix of probabilities; each row is one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// The learned parameter set of one model variant.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub(crate) social: bool,
    pub(crate) content: bool,
    pub(crate) seed: u64,
    /// Pr(z), length K.
    pub(crate) topic_prior: Vec<f64>,
    /// Influencer lists per user: support[u] = F(u), sorted, contains u.
    pub(crate) support: Vec<Vec<u32>>,
    /// Pr(u|f) aligned with `support`: influence[u][k] pairs with
    /// support[u][k] = f. Normalized per f over the users f can influence.
    pub(crate) influence: Vec<Vec<f64>>,
    /// Pr(f|z), K rows over users.
    pub(crate) topic_user: Matrix,
    /// Pr(i|z), K rows over items.
    pub(crate) topic_item: Matrix,
    /// Pr(w|z), K rows over tags; present only for content models.
    pub(crate) topic_tag: Option<Matrix>,
}

/// Generative-direction influence Pr(f|u), normalized per user.
#[derive(Debug, Clone)]
pub struct GenerativeInfluence {
    /// rows[u][k] pairs with the model's support[u][k].
    pub rows: Vec<Vec<f64>>,
    /// Users whose weights were all zero and fell back to uniform.
    pub uniform_fallbacks: Vec<u32>,
}

impl ParamSet {
    #[allow(clippy::too_many_arguments)]
    pub fn from_tables(
        social: bool,
        content: bool,
        seed: u64,
        topic_prior: Vec<f64>,
        support: Vec<Vec<u32>>,
        influence: Vec<Vec<f64>>,
        topic_user: Matrix,
        topic_item: Matrix,
        topic_tag: Option<Matrix>,
    ) -> Self {
        let k = topic_prior.len();
        assert_eq!(topic_user.rows(), k);
        assert_eq!(topic_item.rows(), k);
        assert_eq!(support.len(), topic_user.cols());
        assert_eq!(support.len(), influence.len());
        for (u, (s, w)) in support.iter().zip(&influence).enumerate() {
            assert_eq!(s.len(), w.len(), "support/influence mismatch for user {u}");
            assert!(
                s.binary_search(&(u as u32)).is_ok(),
                "missing self pair for user {u}"
            );
        }
        assert_eq!(content, topic_tag.is_some(), "tag table presence must match content flag");
        if let Some(t) = &topic_tag {
            assert_eq!(t.rows(), k);
        }
        ParamSet {
            social,
            content,
            seed,
            topic_prior,
            support,
            influence,
            topic_user,
            topic_item,
            topic_tag,
        }
    }

    pub fn k(&self) -> usize {
        self.topic_prior.len()
    }

    pub fn n_users(&self) -> usize {
        self.topic_user.cols()
    }

    pub fn n_items(&self) -> usize {
        self.topic_item.cols()
    }

    pub fn n_tags(&self) -> usize {
        self.topic_tag.as_ref().map_or(0, Matrix::cols)
    }

    pub fn social(&self) -> bool {
        self.social
    }

    pub fn content(&self) -> bool {
        self.content
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn topic_prior(&self) -> &[f64] {
        &self.topic_prior
    }

    pub fn topic_user(&self) -> &Matrix {
        &self.topic_user
    }

    pub fn topic_item(&self) -> &Matrix {
        &self.topic_item
    }

    pub fn topic_tag(&self) -> Option<&Matrix> {
        self.topic_tag.as_ref()
    }

    /// The influencer list the model actually uses for `u` (collapses to
    /// `[u]` for social-off models).
    pub fn influencers(&self, u: u32) -> &[u32] {
        &self.support[u as usize]
    }

    /// Pr(u|f) values aligned with `influencers(u)`.
    pub fn influence_row(&self, u: u32) -> &[f64] {
        &self.influence[u as usize]
    }

    /// Pr(u|f) for a single pair; f must be an influencer of u.
    pub fn influence_weight(&self, f: u32, u: u32) -> f64 {
        let pos = self.support[u as usize]
            .binary_search(&f)
            .unwrap_or_else(|_| panic!("user {f} is not an influencer of {u}"));
        self.influence[u as usize][pos]
    }

    /// Joint probability Pr(u, f, z, i[, w]) as the product of the factor
    /// tables. `f` must be an influencer of `u`; the tag is required exactly
    /// for content models.
    pub fn joint_prob(&self, u: u32, f: u32, z: usize, i: u32, w: Option<u32>) -> f64 {
        assert_eq!(
            w.is_some(),
            self.content,
            "tag must be provided iff the model is content-on"
        );
        let base = self.topic_prior[z]
            * self.influence_weight(f, u)
            * self.topic_user.row(z)[f as usize]
            * self.topic_item.row(z)[i as usize];
        match w {
            Some(w) => base * self.topic_tag.as_ref().unwrap().row(z)[w as usize],
            None => base,
        }
    }

    /// Pr(u, i) of the four-factor model: sum over topics and influencers.
    pub(crate) fn pair_prob(&self, u: u32, i: u32) -> f64 {
        let friends = &self.support[u as usize];
        let weights = &self.influence[u as usize];
        let mut total = 0.0;
        for z in 0..self.k() {
            let users = self.topic_user.row(z);
            let base = self.topic_prior[z] * self.topic_item.row(z)[i as usize];
            let mut inner = 0.0;
            for (f, puf) in friends.iter().zip(weights) {
                inner += puf * users[*f as usize];
            }
            total += base * inner;
        }
        total
    }

    /// Per-triple probability Pr(u, i, w) for content models.
    pub(crate) fn triple_prob(&self, u: u32, i: u32, w: u32) -> f64 {
        let tags = self.topic_tag.as_ref().expect("content model required");
        let friends = &self.support[u as usize];
        let weights = &self.influence[u as usize];
        let mut total = 0.0;
        for z in 0..self.k() {
            let users = self.topic_user.row(z);
            let base = self.topic_prior[z]
                * self.topic_item.row(z)[i as usize]
                * tags.row(z)[w as usize];
            let mut inner = 0.0;
            for (f, puf) in friends.iter().zip(weights) {
                inner += puf * users[*f as usize];
            }
            total += base * inner;
        }
        total
    }

    /// Unnormalized ranking score for recommending item `i` to user `u`.
    /// Content models additionally sum the tag factor over the item's tag
    /// set, so a tagless item scores zero.
    pub fn prob_item_given_user(&self, corpus: &Corpus, u: u32, i: u32) -> f64 {
        if !self.content {
            return self.pair_prob(u, i);
        }
        let tags = self.topic_tag.as_ref().unwrap();
        let item_tags = corpus.item_tags(i);
        if item_tags.is_empty() {
            return 0.0;
        }
        let friends = &self.support[u as usize];
        let weights = &self.influence[u as usize];
        let mut total = 0.0;
        for z in 0..self.k() {
            let users = self.topic_user.row(z);
            let tag_row = tags.row(z);
            let tag_sum: f64 = item_tags.iter().map(|&w| tag_row[w as usize]).sum();
            let base = self.topic_prior[z] * self.topic_item.row(z)[i as usize] * tag_sum;
            let mut inner = 0.0;
            for (f, puf) in friends.iter().zip(weights) {
                inner += puf * users[*f as usize];
            }
            total += base * inner;
        }
        total
    }

    /// Pr(u, f, i) for a directed influencer pair, summed over topics. The
    /// tag factor is deliberately excluded; this is the group scoring form.
    /// `f` must be an influencer of `u` other than `u` itself.
    pub fn pair_joint(&self, u: u32, f: u32, i: u32) -> f64 {
        assert_ne!(u, f, "pair_joint requires two distinct users");
        let puf = self.influence_weight(f, u);
        let mut total = 0.0;
        for z in 0..self.k() {
            total += self.topic_prior[z]
                * puf
                * self.topic_user.row(z)[f as usize]
                * self.topic_item.row(z)[i as usize];
        }
        total
    }

    /// Log-likelihood of a set of observations under this model. Content
    /// models take triples, others pairs; zero probabilities are clamped.
    pub fn log_likelihood(&self, observations: &[Observation]) -> f64 {
        let mut ll = 0.0;
        for obs in observations {
            let p = match (self.content, obs.tag) {
                (true, Some(w)) => self.triple_prob(obs.user, obs.item, w),
                (false, None) => self.pair_prob(obs.user, obs.item),
                (content, _) => panic!(
                    "observation shape does not match model: content={content}, tag={:?}",
                    obs.tag
                ),
            };
            ll += p.max(LOG_PROB_FLOOR).ln();
        }
        ll
    }

    /// Derives the generative influence Pr(f|u) from the learned tables:
    /// Pr(f|u) proportional to the topic-summed Pr(z)Pr(u|f)Pr(f|z),
    /// normalized over the influencers of each user.
    pub fn derive_generative_influence(&self) -> GenerativeInfluence {
        let mut rows = Vec::with_capacity(self.support.len());
        let mut uniform_fallbacks = Vec::new();
        for (u, (friends, weights)) in self.support.iter().zip(&self.influence).enumerate() {
            let mut row: Vec<f64> = friends
                .iter()
                .zip(weights)
                .map(|(&f, &puf)| {
                    (0..self.k())
                        .map(|z| self.topic_prior[z] * puf * self.topic_user.row(z)[f as usize])
                        .sum()
                })
                .collect();
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                for v in &mut row {
                    *v /= total;
                }
            } else {
                let uniform = 1.0 / row.len() as f64;
                row.iter_mut().for_each(|v| *v = uniform);
                uniform_fallbacks.push(u as u32);
            }
            rows.push(row);
        }
        GenerativeInfluence {
            rows,
            uniform_fallbacks,
        }
    }

    /// Verifies every normalization family within `tol`. Returns a
    /// description of the first violated family.
    pub fn check_normalization(&self, tol: f64) -> Result<(), String> {
        let check = |label: String, sum: f64| -> Result<(), String> {
            if (sum - 1.0).abs() > tol {
                Err(format!("{label} sums to {sum}"))
            } else {
                Ok(())
            }
        };
        if self.topic_prior.iter().any(|&v| v < 0.0) {
            return Err("negative entry in topic prior".into());
        }
        check("Pr(z)".into(), self.topic_prior.iter().sum())?;
        for z in 0..self.k() {
            check(format!("Pr(f|z={z})"), self.topic_user.row(z).iter().sum())?;
            check(format!("Pr(i|z={z})"), self.topic_item.row(z).iter().sum())?;
            if let Some(t) = &self.topic_tag {
                check(format!("Pr(w|z={z})"), t.row(z).iter().sum())?;
            }
        }
        let mut per_influencer = vec![0.0f64; self.n_users()];
        for (friends, weights) in self.support.iter().zip(&self.influence) {
            for (&f, &v) in friends.iter().zip(weights) {
                if v < 0.0 {
                    return Err(format!("negative influence entry for f={f}"));
                }
                per_influencer[f as usize] += v;
            }
        }
        // only influencers that appear in some support list carry mass
        let mut appears = vec![false; self.n_users()];
        for friends in &self.support {
            for &f in friends {
                appears[f as usize] = true;
            }
        }
        for (f, (&sum, &seen)) in per_influencer.iter().zip(&appears).enumerate() {
            if seen {
                check(format!("Pr(u|f={f})"), sum)?;
            }
        }
        Ok(())
    }
}

/// Effective influencer lists for a config: the corpus friend lists when
/// social is on, otherwise just the self pair.
pub(crate) fn build_support(config: &ModelConfig, corpus: &Corpus) -> Vec<Vec<u32>> {
    if config.social {
        (0..corpus.n_users() as u32)
            .map(|u| corpus.friends(u).to_vec())
            .collect()
    } else {
        (0..corpus.n_users() as u32).map(|u| vec![u]).collect()
    }
}

fn jaccard(a: &[u32], b: &[u32]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut inter = 0usize;
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                x += 1;
                y += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

fn random_distribution<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = row.iter().sum();
    for v in &mut row {
        *v /= total;
    }
    row
}

/// Initializes a parameter set: influence weights start from the Jaccard
/// similarity of train item sets (self pairs start at 1, so self influence
/// dominates before normalization), topic tables from seeded positive
/// pseudo-random values normalized per distribution.
pub fn init_params(config: &ModelConfig, corpus: &Corpus, train: &[Observation]) -> ParamSet {
    config.validate().expect("invalid model config");
    assert!(corpus.n_users() > 0 && corpus.n_items() > 0, "empty corpus");
    let k = config.topics;
    let n_users = corpus.n_users();
    let n_items = corpus.n_items();
    let support = build_support(config, corpus);
    let item_sets = Corpus::user_item_sets(n_users, train);

    // raw Jaccard weights, then normalize per influencer f
    let mut influence: Vec<Vec<f64>> = support
        .iter()
        .enumerate()
        .map(|(u, friends)| {
            friends
                .iter()
                .map(|&f| jaccard(&item_sets[u], &item_sets[f as usize]))
                .collect()
        })
        .collect();
    let mut totals = vec![0.0f64; n_users];
    let mut group_sizes = vec![0usize; n_users];
    for (friends, weights) in support.iter().zip(&influence) {
        for (&f, &v) in friends.iter().zip(weights) {
            totals[f as usize] += v;
            group_sizes[f as usize] += 1;
        }
    }
    for (friends, weights) in support.iter().zip(influence.iter_mut()) {
        for (&f, v) in friends.iter().zip(weights.iter_mut()) {
            let total = totals[f as usize];
            *v = if total > 0.0 {
                *v / total
            } else {
                1.0 / group_sizes[f as usize] as f64
            };
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let topic_prior = random_distribution(&mut rng, k);
    let mut topic_user = Matrix::zeros(k, n_users);
    for z in 0..k {
        topic_user.row_mut(z).copy_from_slice(&random_distribution(&mut rng, n_users));
    }
    let mut topic_item = Matrix::zeros(k, n_items);
    for z in 0..k {
        topic_item.row_mut(z).copy_from_slice(&random_distribution(&mut rng, n_items));
    }
    let topic_tag = if config.content {
        let n_tags = corpus.n_tags();
        assert!(n_tags > 0, "content model requires a non-empty tag space");
        let mut m = Matrix::zeros(k, n_tags);
        for z in 0..k {
            m.row_mut(z).copy_from_slice(&random_distribution(&mut rng, n_tags));
        }
        Some(m)
    } else {
        None
    };

    ParamSet::from_tables(
        config.social,
        config.content,
        config.seed,
        topic_prior,
        support,
        influence,
        topic_user,
        topic_item,
        topic_tag,
    )
}
