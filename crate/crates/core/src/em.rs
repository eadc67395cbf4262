//! Serial EM trainer.
//!
//! One iteration is a single fused pass over the train observations: the
//! per-observation posterior over (topic, influencer) pairs is computed and
//! immediately folded into unnormalized posterior sums, and the pass's
//! denominators double as the log-likelihood of the input parameters. The
//! M-step normalizes the sums along each table's axis.

use std::io::{self, Write};
use std::time::Instant;

use crate::corpus::{Corpus, Observation};
use crate::params::{init_params, Matrix, ModelConfig, ParamSet, LOG_PROB_FLOOR};

/// Added to every accumulator cell before normalization so that zero cells
/// cannot freeze a parameter at zero permanently. A normalization group with
/// no mass at all comes out exactly uniform.
pub const ACCUMULATOR_SMOOTHING: f64 = 1e-10;

/// Normalized joint posterior Pr(z, f | u, i[, w]) for one observation,
/// K rows by |F(u)| columns.
#[derive(Debug, Clone)]
pub struct PosteriorBlock {
    pub user: u32,
    pub item: u32,
    pub tag: Option<u32>,
    pub k: usize,
    pub n_influencers: usize,
    /// Row-major K x |F(u)|.
    pub probs: Vec<f64>,
    /// True when every numerator was zero and the posterior fell back to
    /// uniform.
    pub degenerate: bool,
}

impl PosteriorBlock {
    pub fn get(&self, z: usize, friend_pos: usize) -> f64 {
        self.probs[z * self.n_influencers + friend_pos]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Unnormalized posterior sums, one accumulator per parameter table.
#[derive(Debug, Clone)]
pub struct Accumulators {
    pub topic_prior: Vec<f64>,
    /// Aligned with the parameter set's influencer lists.
    pub influence: Vec<Vec<f64>>,
    pub topic_user: Matrix,
    pub topic_item: Matrix,
    pub topic_tag: Option<Matrix>,
    pub n_observations: u64,
}

impl Accumulators {
    pub fn zeros_like(params: &ParamSet) -> Self {
        Accumulators {
            topic_prior: vec![0.0; params.k()],
            influence: params
                .influence
                .iter()
                .map(|row| vec![0.0; row.len()])
                .collect(),
            topic_user: Matrix::zeros(params.k(), params.n_users()),
            topic_item: Matrix::zeros(params.k(), params.n_items()),
            topic_tag: params
                .topic_tag
                .as_ref()
                .map(|t| Matrix::zeros(t.rows(), t.cols())),
            n_observations: 0,
        }
    }

    /// Folds one posterior block into the sums.
    pub fn absorb(&mut self, params: &ParamSet, block: &PosteriorBlock) {
        let friends = params.influencers(block.user);
        debug_assert_eq!(friends.len(), block.n_influencers);
        for z in 0..block.k {
            let row = &block.probs[z * block.n_influencers..(z + 1) * block.n_influencers];
            let user_row = self.topic_user.row_mut(z);
            let mut row_sum = 0.0;
            for (&f, &p) in friends.iter().zip(row) {
                user_row[f as usize] += p;
                row_sum += p;
            }
            self.topic_prior[z] += row_sum;
            self.topic_item.row_mut(z)[block.item as usize] += row_sum;
            if let (Some(acc), Some(w)) = (self.topic_tag.as_mut(), block.tag) {
                acc.row_mut(z)[w as usize] += row_sum;
            }
        }
        let inf_row = &mut self.influence[block.user as usize];
        for (pos, slot) in inf_row.iter_mut().enumerate() {
            let mut col_sum = 0.0;
            for z in 0..block.k {
                col_sum += block.probs[z * block.n_influencers + pos];
            }
            *slot += col_sum;
        }
        self.n_observations += 1;
    }

    /// Total mass of the Pr(z) accumulator; equals the observation count
    /// after a full pass.
    pub fn prior_mass(&self) -> f64 {
        self.topic_prior.iter().sum()
    }
}

/// E-step for one observation: normalized posterior over (topic,
/// influencer) pairs under the current parameters.
pub fn e_step(params: &ParamSet, user: u32, item: u32, tag: Option<u32>) -> PosteriorBlock {
    assert_eq!(
        tag.is_some(),
        params.content(),
        "tag must be provided iff the model is content-on"
    );
    let friends = params.influencers(user);
    let weights = params.influence_row(user);
    let k = params.k();
    let nf = friends.len();
    let mut probs = vec![0.0f64; k * nf];
    let mut denom = 0.0;
    for z in 0..k {
        let users = params.topic_user.row(z);
        let mut base = params.topic_prior[z] * params.topic_item.row(z)[item as usize];
        if let Some(w) = tag {
            base *= params.topic_tag.as_ref().unwrap().row(z)[w as usize];
        }
        let row = &mut probs[z * nf..(z + 1) * nf];
        for ((slot, &f), &puf) in row.iter_mut().zip(friends).zip(weights) {
            let num = base * puf * users[f as usize];
            *slot = num;
            denom += num;
        }
    }
    let mut degenerate = false;
    if denom > 0.0 {
        probs.iter_mut().for_each(|p| *p /= denom);
    } else {
        degenerate = true;
        let uniform = 1.0 / (k * nf) as f64;
        probs.iter_mut().for_each(|p| *p = uniform);
    }
    PosteriorBlock {
        user,
        item,
        tag,
        k,
        n_influencers: nf,
        probs,
        degenerate,
    }
}

/// M-step: smooths and normalizes posterior sums into the next parameter
/// set. The template supplies the influencer structure, which training never
/// changes.
pub fn m_step(acc: &Accumulators, template: &ParamSet) -> ParamSet {
    let normalize = |values: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = values.iter().map(|&v| v + ACCUMULATOR_SMOOTHING).collect();
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|v| *v /= total);
        } else {
            let uniform = 1.0 / out.len() as f64;
            out.iter_mut().for_each(|v| *v = uniform);
        }
        out
    };

    let topic_prior = normalize(&acc.topic_prior);

    let normalize_rows = |m: &Matrix| -> Matrix {
        let mut out = Matrix::zeros(m.rows(), m.cols());
        for z in 0..m.rows() {
            out.row_mut(z).copy_from_slice(&normalize(m.row(z)));
        }
        out
    };
    let topic_user = normalize_rows(&acc.topic_user);
    let topic_item = normalize_rows(&acc.topic_item);
    let topic_tag = acc.topic_tag.as_ref().map(normalize_rows);

    // Pr(u|f): smooth every cell, then normalize per influencer f
    let n_users = template.n_users();
    let mut influence: Vec<Vec<f64>> = acc
        .influence
        .iter()
        .map(|row| row.iter().map(|&v| v + ACCUMULATOR_SMOOTHING).collect())
        .collect();
    let mut totals = vec![0.0f64; n_users];
    for (friends, row) in template.support.iter().zip(&influence) {
        for (&f, &v) in friends.iter().zip(row) {
            totals[f as usize] += v;
        }
    }
    let mut group_sizes = vec![0usize; n_users];
    for friends in &template.support {
        for &f in friends {
            group_sizes[f as usize] += 1;
        }
    }
    for (friends, row) in template.support.iter().zip(influence.iter_mut()) {
        for (&f, v) in friends.iter().zip(row.iter_mut()) {
            let total = totals[f as usize];
            *v = if total > 0.0 {
                *v / total
            } else {
                1.0 / group_sizes[f as usize] as f64
            };
        }
    }

    ParamSet::from_tables(
        template.social,
        template.content,
        template.seed,
        topic_prior,
        template.support.clone(),
        influence,
        topic_user,
        topic_item,
        topic_tag,
    )
}

/// Result of one fused E+M pass.
#[derive(Debug)]
pub struct IterationOutcome {
    pub params: ParamSet,
    /// Log-likelihood of the INPUT parameters on the train set, read off the
    /// E-step denominators.
    pub log_likelihood: f64,
    pub degenerate_posteriors: usize,
}

/// One fused EM iteration: posterior per observation folded straight into
/// the accumulators, then one M-step.
pub fn run_iteration(params: &ParamSet, train: &[Observation]) -> IterationOutcome {
    let mut acc = Accumulators::zeros_like(params);
    let mut ll = 0.0;
    let mut degenerate = 0usize;
    let k = params.k();
    let mut numerators: Vec<f64> = Vec::new();

    for obs in train {
        let friends = params.influencers(obs.user);
        let weights = params.influence_row(obs.user);
        let nf = friends.len();
        numerators.clear();
        numerators.resize(k * nf, 0.0);
        let mut denom = 0.0;
        for z in 0..k {
            let users = params.topic_user.row(z);
            let mut base = params.topic_prior[z] * params.topic_item.row(z)[obs.item as usize];
            if let Some(w) = obs.tag {
                base *= params.topic_tag.as_ref().unwrap().row(z)[w as usize];
            }
            let row = &mut numerators[z * nf..(z + 1) * nf];
            for ((slot, &f), &puf) in row.iter_mut().zip(friends).zip(weights) {
                let num = base * puf * users[f as usize];
                *slot = num;
                denom += num;
            }
        }
        ll += denom.max(LOG_PROB_FLOOR).ln();
        let inv = if denom > 0.0 {
            1.0 / denom
        } else {
            degenerate += 1;
            let uniform = 1.0 / (k * nf) as f64;
            numerators.iter_mut().for_each(|p| *p = uniform);
            1.0
        };

        let inf_row = &mut acc.influence[obs.user as usize];
        for z in 0..k {
            let row = &numerators[z * nf..(z + 1) * nf];
            let user_row = acc.topic_user.row_mut(z);
            let mut row_sum = 0.0;
            for ((&f, &num), slot) in friends.iter().zip(row).zip(inf_row.iter_mut()) {
                let p = num * inv;
                user_row[f as usize] += p;
                *slot += p;
                row_sum += p;
            }
            acc.topic_prior[z] += row_sum;
            acc.topic_item.row_mut(z)[obs.item as usize] += row_sum;
            if let (Some(tag_acc), Some(w)) = (acc.topic_tag.as_mut(), obs.tag) {
                tag_acc.row_mut(z)[w as usize] += row_sum;
            }
        }
        acc.n_observations += 1;
    }

    IterationOutcome {
        params: m_step(&acc, params),
        log_likelihood: ll,
        degenerate_posteriors: degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iter: usize,
    /// Log-likelihood of the parameters entering this iteration.
    pub log_likelihood: f64,
    pub delta: Option<f64>,
    pub millis: u128,
}

/// Per-iteration log-likelihood trace and termination outcome.
#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub iterations: Vec<IterationRecord>,
    /// Log-likelihood of the returned parameters (one extra evaluation).
    pub final_log_likelihood: f64,
    pub reason: Termination,
    pub degenerate_posteriors: usize,
}

impl TrainTrace {
    /// Line-oriented log: `iter<TAB>loglik<TAB>delta<TAB>ms`.
    pub fn write_log<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for rec in &self.iterations {
            match rec.delta {
                Some(d) => writeln!(w, "{}\t{}\t{}\t{}", rec.iter, rec.log_likelihood, d, rec.millis)?,
                None => writeln!(w, "{}\t{}\tna\t{}", rec.iter, rec.log_likelihood, rec.millis)?,
            }
        }
        writeln!(w, "final\t{}\tna\t0", self.final_log_likelihood)
    }
}

/// Runs EM from a fresh initialization until the train log-likelihood
/// improves by less than epsilon (absolute) or max_iters is reached.
pub fn train(
    config: &ModelConfig,
    corpus: &Corpus,
    train: &[Observation],
) -> (ParamSet, TrainTrace) {
    config.validate().expect("invalid model config");
    check_observation_shape(config, train);
    let mut params = init_params(config, corpus, train);
    let mut trace = Vec::new();
    let mut prev_ll: Option<f64> = None;
    let mut reason = Termination::MaxIters;
    let mut degenerate = 0usize;

    for iter in 1..=config.max_iters {
        let start = Instant::now();
        let outcome = run_iteration(&params, train);
        let millis = start.elapsed().as_millis();
        degenerate += outcome.degenerate_posteriors;
        let delta = prev_ll.map(|p| outcome.log_likelihood - p);
        trace.push(IterationRecord {
            iter,
            log_likelihood: outcome.log_likelihood,
            delta,
            millis,
        });
        prev_ll = Some(outcome.log_likelihood);
        params = outcome.params;
        if let Some(d) = delta {
            if d < config.epsilon {
                reason = Termination::Converged;
                break;
            }
        }
    }

    let final_log_likelihood = params.log_likelihood(train);
    (
        params,
        TrainTrace {
            iterations: trace,
            final_log_likelihood,
            reason,
            degenerate_posteriors: degenerate,
        },
    )
}

pub(crate) fn check_observation_shape(config: &ModelConfig, train: &[Observation]) {
    if let Some(obs) = train.first() {
        assert_eq!(
            obs.tag.is_some(),
            config.content,
            "train observations must be triples iff the model is content-on"
        );
    }
}
