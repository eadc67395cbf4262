//! Top-n item ranking for an individual user.

use std::collections::HashSet;

use crate::corpus::{Corpus, Observation};
use crate::error::{Error, Result};
use crate::params::ParamSet;

/// Items scored for one query, strictly ordered by (score desc, item asc).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub entries: Vec<(u32, f64)>,
}

/// Per-user train item sets, used to restrict recommendations to fresh
/// items.
#[derive(Debug, Clone)]
pub struct UserHistory {
    items: Vec<HashSet<u32>>,
}

impl UserHistory {
    pub fn from_pairs(n_users: usize, pairs: &[(u32, u32)]) -> Self {
        let mut items = vec![HashSet::new(); n_users];
        for &(u, i) in pairs {
            items[u as usize].insert(i);
        }
        UserHistory { items }
    }

    pub fn from_observations(n_users: usize, observations: &[Observation]) -> Self {
        let mut items = vec![HashSet::new(); n_users];
        for obs in observations {
            items[obs.user as usize].insert(obs.item);
        }
        UserHistory { items }
    }

    pub fn contains(&self, u: u32, i: u32) -> bool {
        self.items[u as usize].contains(&i)
    }

    pub fn n_users(&self) -> usize {
        self.items.len()
    }
}

pub(crate) fn sort_ranked(entries: &mut [(u32, f64)]) {
    entries.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// Ranks the top `n` items for `u` that are absent from the user's train
/// history, by the model's unnormalized item score. Ties break by ascending
/// item index.
pub fn recommend_top_n(
    params: &ParamSet,
    corpus: &Corpus,
    history: &UserHistory,
    u: u32,
    n: usize,
) -> Result<RankedList> {
    assert!(n >= 1, "n must be at least 1");
    if (u as usize) >= params.n_users() {
        return Err(Error::UnknownId {
            kind: "user",
            id: u.to_string(),
        });
    }
    let mut entries: Vec<(u32, f64)> = (0..params.n_items() as u32)
        .filter(|&i| !history.contains(u, i))
        .map(|i| (i, params.prob_item_given_user(corpus, u, i)))
        .collect();
    sort_ranked(&mut entries);
    entries.truncate(n);
    Ok(RankedList { entries })
}
