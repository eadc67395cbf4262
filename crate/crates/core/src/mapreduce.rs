//! Partitioned parallel trainer.
//!
//! Each map task first normalizes the previous iteration's posterior sums
//! into its own parameter snapshot (deferred normalization), computes
//! posteriors for its slice of the train set, and emits keyed packed value
//! arrays. A shuffle groups emissions by key in (partition index, emission
//! sequence) order; reducers sum the grouped arrays element-wise in that
//! fixed order, so results do not depend on the worker count. The topic
//! prior sums are never emitted; they are reconstructed as row sums of the
//! friend-topic accumulator.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::time::Instant;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::corpus::{Corpus, Observation};
use crate::em::{
    check_observation_shape, m_step, Accumulators, IterationRecord, Termination, TrainTrace,
};
use crate::error::{Error, Result};
use crate::params::{init_params, ModelConfig, ParamSet, LOG_PROB_FLOOR};

/// Which accumulator family an emission belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    /// Key: user id as an influencer; values: per-topic posterior sums.
    FriendTopic = 0,
    /// Key: item id; values: per-topic posterior sums.
    ItemTopic = 1,
    /// Key: tag id; values: per-topic posterior sums.
    TagTopic = 2,
    /// Key: user id; values: per-influencer posterior sums (topic-summed).
    UserFriend = 3,
}

impl Role {
    pub fn as_byte(self) -> u8 {
        self as u8
    }

    pub fn from_byte(b: u8) -> Option<Role> {
        match b {
            0 => Some(Role::FriendTopic),
            1 => Some(Role::ItemTopic),
            2 => Some(Role::TagTopic),
            3 => Some(Role::UserFriend),
            _ => None,
        }
    }
}

/// One keyed packed value array flowing from map to reduce.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub role: Role,
    pub id: u32,
    pub values: Vec<f64>,
}

impl Emission {
    /// Byte layout: role byte, u32 LE id, u32 LE length, f64 LE values.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_u8(self.role.as_byte())?;
        w.write_u32::<LittleEndian>(self.id)?;
        w.write_u32::<LittleEndian>(self.values.len() as u32)?;
        for &v in &self.values {
            w.write_f64::<LittleEndian>(v)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Emission> {
        let io = |e: std::io::Error| Error::Checkpoint(format!("truncated emission: {e}"));
        let role_byte = r.read_u8().map_err(io)?;
        let role = Role::from_byte(role_byte)
            .ok_or_else(|| Error::Checkpoint(format!("unknown emission role {role_byte}")))?;
        let id = r.read_u32::<LittleEndian>().map_err(io)?;
        let len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let mut values = vec![0.0f64; len];
        r.read_f64_into::<LittleEndian>(&mut values).map_err(io)?;
        Ok(Emission { role, id, values })
    }
}

/// A contiguous slice of the train set assigned to one map task.
#[derive(Debug, Clone, Copy)]
pub struct Partition<'a> {
    pub worker: usize,
    /// Index of the first observation in the full train list.
    pub offset: usize,
    pub observations: &'a [Observation],
}

/// Contiguous, equal-size (within one) partitioning by observation index.
pub fn partition_observations(train: &[Observation], n_partitions: usize) -> Vec<Partition<'_>> {
    assert!(n_partitions >= 1, "need at least one partition");
    let n = train.len();
    let base = n / n_partitions;
    let rem = n % n_partitions;
    let mut parts = Vec::with_capacity(n_partitions);
    let mut offset = 0;
    for worker in 0..n_partitions {
        let len = base + usize::from(worker < rem);
        parts.push(Partition {
            worker,
            offset,
            observations: &train[offset..offset + len],
        });
        offset += len;
    }
    debug_assert_eq!(offset, n);
    parts
}

/// Emission granularity. `Combined` pre-sums the item (and tag) posteriors
/// over influencers within each observation, which is algebraically
/// identical to the per-influencer form and shrinks shuffle volume.
/// `Literal` emits one array per influencer, kept for oracle comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmissionMode {
    #[default]
    Combined,
    Literal,
}

/// Everything a map task produces: keyed emissions plus the partition's
/// contribution to the log-likelihood of the snapshot parameters.
#[derive(Debug)]
pub struct MapOutput {
    pub emissions: Vec<Emission>,
    pub log_likelihood: f64,
    pub degenerate_posteriors: usize,
}

/// What a map task receives as the previous iteration's state: the raw
/// posterior sums of the last reduce (the usual case), or, on the first
/// iteration when no reduce has run yet, the initial parameters themselves.
#[derive(Debug, Clone, Copy)]
pub enum MapInput<'a> {
    Params(&'a ParamSet),
    Sums(&'a Accumulators),
}

/// Map task: normalize the previous sums into a local parameter snapshot
/// (identical across mappers, since it is a pure function of the sums), then
/// emit posterior arrays for every observation in the partition.
pub fn map_task(
    partition: &Partition<'_>,
    input: MapInput<'_>,
    template: &ParamSet,
    mode: EmissionMode,
) -> MapOutput {
    let normalized;
    let snapshot = match input {
        MapInput::Params(params) => params,
        MapInput::Sums(prev_sums) => {
            normalized = m_step(prev_sums, template);
            &normalized
        }
    };
    let k = snapshot.k();
    let mut emissions = Vec::new();
    let mut ll = 0.0;
    let mut degenerate = 0usize;
    let mut numerators: Vec<f64> = Vec::new();

    for obs in partition.observations {
        let friends = snapshot.influencers(obs.user);
        let weights = snapshot.influence_row(obs.user);
        let nf = friends.len();
        numerators.clear();
        numerators.resize(k * nf, 0.0);
        let mut denom = 0.0;
        for z in 0..k {
            let users = snapshot.topic_user().row(z);
            let mut base = snapshot.topic_prior()[z] * snapshot.topic_item().row(z)[obs.item as usize];
            if let Some(w) = obs.tag {
                base *= snapshot.topic_tag().unwrap().row(z)[w as usize];
            }
            let row = &mut numerators[z * nf..(z + 1) * nf];
            for ((slot, &f), &puf) in row.iter_mut().zip(friends).zip(weights) {
                let num = base * puf * users[f as usize];
                *slot = num;
                denom += num;
            }
        }
        ll += denom.max(LOG_PROB_FLOOR).ln();
        if denom > 0.0 {
            let inv = 1.0 / denom;
            numerators.iter_mut().for_each(|p| *p *= inv);
        } else {
            degenerate += 1;
            let uniform = 1.0 / (k * nf) as f64;
            numerators.iter_mut().for_each(|p| *p = uniform);
        }

        // per-influencer topic arrays
        for (pos, &f) in friends.iter().enumerate() {
            let values: Vec<f64> = (0..k).map(|z| numerators[z * nf + pos]).collect();
            emissions.push(Emission {
                role: Role::FriendTopic,
                id: f,
                values,
            });
        }

        match mode {
            EmissionMode::Combined => {
                let row_sums: Vec<f64> = (0..k)
                    .map(|z| numerators[z * nf..(z + 1) * nf].iter().sum())
                    .collect();
                if let Some(w) = obs.tag {
                    emissions.push(Emission {
                        role: Role::TagTopic,
                        id: w,
                        values: row_sums.clone(),
                    });
                }
                emissions.push(Emission {
                    role: Role::ItemTopic,
                    id: obs.item,
                    values: row_sums,
                });
            }
            EmissionMode::Literal => {
                for pos in 0..nf {
                    let values: Vec<f64> = (0..k).map(|z| numerators[z * nf + pos]).collect();
                    if let Some(w) = obs.tag {
                        emissions.push(Emission {
                            role: Role::TagTopic,
                            id: w,
                            values: values.clone(),
                        });
                    }
                    emissions.push(Emission {
                        role: Role::ItemTopic,
                        id: obs.item,
                        values,
                    });
                }
            }
        }

        // one per-observation array over influencers, topic-summed
        let friend_sums: Vec<f64> = (0..nf)
            .map(|pos| (0..k).map(|z| numerators[z * nf + pos]).sum())
            .collect();
        emissions.push(Emission {
            role: Role::UserFriend,
            id: obs.user,
            values: friend_sums,
        });
    }

    MapOutput {
        emissions,
        log_likelihood: ll,
        degenerate_posteriors: degenerate,
    }
}

pub type GroupedEmissions = BTreeMap<(Role, u32), Vec<Vec<f64>>>;

/// Groups emissions by key. Buffers must be passed in partition order;
/// within a group, value arrays keep (partition index, emission sequence)
/// order, which fixes the reduction order.
pub fn shuffle(per_worker: Vec<Vec<Emission>>) -> GroupedEmissions {
    let mut grouped = GroupedEmissions::new();
    for buffer in per_worker {
        for emission in buffer {
            grouped
                .entry((emission.role, emission.id))
                .or_default()
                .push(emission.values);
        }
    }
    grouped
}

/// Reduce: element-wise sums per key in shuffle order, routed into
/// accumulator tables by role. The topic-prior sums are reconstructed as
/// row sums of the friend-topic accumulator.
pub fn reduce_task(grouped: &GroupedEmissions, template: &ParamSet) -> Result<Accumulators> {
    let k = template.k();
    let mut acc = Accumulators::zeros_like(template);
    let mut observations = 0u64;
    for (&(role, id), arrays) in grouped {
        let expected = match role {
            Role::FriendTopic | Role::ItemTopic | Role::TagTopic => k,
            Role::UserFriend => template.influencers(id).len(),
        };
        let mut sum = vec![0.0f64; expected];
        for values in arrays {
            if values.len() != expected {
                return Err(Error::EmissionLength(format!("({role:?}, {id})")));
            }
            for (s, v) in sum.iter_mut().zip(values) {
                *s += v;
            }
        }
        match role {
            Role::FriendTopic => {
                for (z, v) in sum.iter().enumerate() {
                    acc.topic_user.row_mut(z)[id as usize] += v;
                }
            }
            Role::ItemTopic => {
                for (z, v) in sum.iter().enumerate() {
                    acc.topic_item.row_mut(z)[id as usize] += v;
                }
            }
            Role::TagTopic => {
                let tag_acc = acc.topic_tag.as_mut().ok_or_else(|| {
                    Error::Dimension("tag emission for a content-off model".into())
                })?;
                for (z, v) in sum.iter().enumerate() {
                    tag_acc.row_mut(z)[id as usize] += v;
                }
            }
            Role::UserFriend => {
                observations += arrays.len() as u64;
                for (slot, v) in acc.influence[id as usize].iter_mut().zip(&sum) {
                    *slot += v;
                }
            }
        }
    }
    for z in 0..k {
        acc.topic_prior[z] = acc.topic_user.row(z).iter().sum();
    }
    acc.n_observations = observations;
    Ok(acc)
}

/// Tuning knobs for the partitioned trainer. Partition boundaries depend
/// only on the data size, so the worker count never changes the result.
#[derive(Debug, Clone, Copy)]
pub struct ParallelOptions {
    /// Thread count for concurrent map tasks.
    pub workers: usize,
    /// Observations per map partition.
    pub partition_size: usize,
    pub mode: EmissionMode,
}

impl Default for ParallelOptions {
    fn default() -> Self {
        ParallelOptions {
            workers: 1,
            partition_size: 4096,
            mode: EmissionMode::Combined,
        }
    }
}

/// Partitioned EM with the serial engine's convergence policy.
pub fn train_parallel(
    config: &ModelConfig,
    corpus: &Corpus,
    train: &[Observation],
    workers: usize,
) -> Result<(ParamSet, TrainTrace)> {
    train_parallel_with(
        config,
        corpus,
        train,
        &ParallelOptions {
            workers,
            ..ParallelOptions::default()
        },
    )
}

pub fn train_parallel_with(
    config: &ModelConfig,
    corpus: &Corpus,
    train: &[Observation],
    options: &ParallelOptions,
) -> Result<(ParamSet, TrainTrace)> {
    config.validate().expect("invalid model config");
    assert!(options.workers >= 1, "need at least one worker");
    check_observation_shape(config, train);

    let template = init_params(config, corpus, train);
    let n_partitions = train.len().div_ceil(options.partition_size).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .expect("failed to build worker pool");

    let mut prev_sums: Option<Accumulators> = None;
    let mut trace = Vec::new();
    let mut prev_ll: Option<f64> = None;
    let mut reason = Termination::MaxIters;
    let mut degenerate = 0usize;

    for iter in 1..=config.max_iters {
        let start = Instant::now();
        let input = match &prev_sums {
            None => MapInput::Params(&template),
            Some(sums) => MapInput::Sums(sums),
        };
        let partitions = partition_observations(train, n_partitions);
        let outputs: Vec<MapOutput> = pool.install(|| {
            partitions
                .par_iter()
                .map(|p| map_task(p, input, &template, options.mode))
                .collect()
        });
        let mut ll = 0.0;
        let mut buffers = Vec::with_capacity(outputs.len());
        for output in outputs {
            ll += output.log_likelihood;
            degenerate += output.degenerate_posteriors;
            buffers.push(output.emissions);
        }
        let grouped = shuffle(buffers);
        prev_sums = Some(reduce_task(&grouped, &template)?);

        let millis = start.elapsed().as_millis();
        let delta = prev_ll.map(|p| ll - p);
        trace.push(IterationRecord {
            iter,
            log_likelihood: ll,
            delta,
            millis,
        });
        prev_ll = Some(ll);
        if let Some(d) = delta {
            if d < config.epsilon {
                reason = Termination::Converged;
                break;
            }
        }
    }

    // the final normalization, deferred past the last reduce
    let params = match prev_sums {
        Some(sums) => m_step(&sums, &template),
        None => template.clone(),
    };
    let final_log_likelihood = params.log_likelihood(train);
    Ok((
        params,
        TrainTrace {
            iterations: trace,
            final_log_likelihood,
            reason,
            degenerate_posteriors: degenerate,
        },
    ))
}
