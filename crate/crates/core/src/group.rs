//! Group recommendation: average and least-misery score aggregation, and
//! the social-influence strategy that sums directed influencer-pair scores
//! over the friend pairs inside the group.

use std::str::FromStr;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::recommend::{sort_ranked, RankedList, UserHistory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStrategy {
    Average,
    LeastMisery,
    SocialInfluence,
}

impl GroupStrategy {
    pub fn label(self) -> &'static str {
        match self {
            GroupStrategy::Average => "avg",
            GroupStrategy::LeastMisery => "misery",
            GroupStrategy::SocialInfluence => "sig",
        }
    }
}

impl FromStr for GroupStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "avg" | "average" => Ok(GroupStrategy::Average),
            "misery" | "least-misery" => Ok(GroupStrategy::LeastMisery),
            "sig" | "social" => Ok(GroupStrategy::SocialInfluence),
            other => Err(format!("unknown strategy `{other}` (expected avg|misery|sig)")),
        }
    }
}

fn check_group(members: &[u32]) -> Result<()> {
    if members.len() < 2 {
        return Err(Error::GroupTooSmall);
    }
    Ok(())
}

/// Mean of the members' individual item scores.
pub fn score_average(params: &ParamSet, corpus: &Corpus, members: &[u32], item: u32) -> Result<f64> {
    check_group(members)?;
    let sum: f64 = members
        .iter()
        .map(|&u| params.prob_item_given_user(corpus, u, item))
        .sum();
    Ok(sum / members.len() as f64)
}

/// Minimum of the members' individual item scores: the least satisfied
/// member vetoes.
pub fn score_least_misery(
    params: &ParamSet,
    corpus: &Corpus,
    members: &[u32],
    item: u32,
) -> Result<f64> {
    check_group(members)?;
    Ok(members
        .iter()
        .map(|&u| params.prob_item_given_user(corpus, u, item))
        .fold(f64::INFINITY, f64::min))
}

/// Directed in-group influencer pairs (f, u): f influences u, both members,
/// f != u. Errors when any member participates in no pair.
pub fn group_friend_pairs(params: &ParamSet, members: &[u32]) -> Result<Vec<(u32, u32)>> {
    check_group(members)?;
    let mut pairs = Vec::new();
    let mut connected = vec![false; members.len()];
    for (a_pos, &u) in members.iter().enumerate() {
        for &f in params.influencers(u) {
            if f == u {
                continue;
            }
            if let Some(b_pos) = members.iter().position(|&m| m == f) {
                pairs.push((f, u));
                connected[a_pos] = true;
                connected[b_pos] = true;
            }
        }
    }
    let isolated: Vec<u32> = members
        .iter()
        .zip(&connected)
        .filter(|(_, &c)| !c)
        .map(|(&m, _)| m)
        .collect();
    if !isolated.is_empty() {
        return Err(Error::IsolatedMembers(isolated));
    }
    Ok(pairs)
}

/// Sum of the pair scores Pr(u, f, i) over every directed friend pair in
/// the group. Every member must have at least one friend in the group.
pub fn score_social_influence(
    params: &ParamSet,
    _corpus: &Corpus,
    members: &[u32],
    item: u32,
) -> Result<f64> {
    let pairs = group_friend_pairs(params, members)?;
    Ok(pairs
        .iter()
        .map(|&(f, u)| params.pair_joint(u, f, item))
        .sum())
}

/// Ranks items fresh for every member by the chosen group strategy,
/// breaking ties by ascending item index.
pub fn recommend_group(
    params: &ParamSet,
    corpus: &Corpus,
    history: &UserHistory,
    members: &[u32],
    n: usize,
    strategy: GroupStrategy,
) -> Result<RankedList> {
    assert!(n >= 1, "n must be at least 1");
    check_group(members)?;
    // validate once up front so an ineligible group fails fast
    let pairs = match strategy {
        GroupStrategy::SocialInfluence => Some(group_friend_pairs(params, members)?),
        _ => None,
    };
    let mut entries = Vec::new();
    for i in 0..params.n_items() as u32 {
        if members.iter().any(|&u| history.contains(u, i)) {
            continue;
        }
        let score = match (strategy, &pairs) {
            (GroupStrategy::Average, _) => score_average(params, corpus, members, i)?,
            (GroupStrategy::LeastMisery, _) => score_least_misery(params, corpus, members, i)?,
            (GroupStrategy::SocialInfluence, Some(pairs)) => pairs
                .iter()
                .map(|&(f, u)| params.pair_joint(u, f, i))
                .sum(),
            (GroupStrategy::SocialInfluence, None) => unreachable!(),
        };
        entries.push((i, score));
    }
    sort_ranked(&mut entries);
    entries.truncate(n);
    Ok(RankedList { entries })
}
