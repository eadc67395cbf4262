//! Corpus ingestion: interning of string identifiers, interaction histories,
//! the friendship graph and per-item tag sets, plus train/test splitting.
//!
//! File formats are line oriented UTF-8 with tab separators:
//! interactions `user<TAB>item`, friendship `user<TAB>friend` (one directed
//! edge per line), tags `item<TAB>tag`, group events
//! `item<TAB>member1,member2,...`. Lines starting with `#` are comments.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Bidirectional mapping between external string ids and dense indices.
#[derive(Debug, Clone, Default)]
pub struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index for `name`, interning it if unseen.
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&idx) = self.index.get(name) {
            return idx;
        }
        let idx = u32::try_from(self.names.len()).expect("interner overflow");
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), idx);
        idx
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: u32) -> &str {
        &self.names[idx as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One training observation: a user-item pair, with the tag set only on
/// content-expanded triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Observation {
    pub user: u32,
    pub item: u32,
    pub tag: Option<u32>,
}

impl Observation {
    pub fn pair(user: u32, item: u32) -> Self {
        Observation {
            user,
            item,
            tag: None,
        }
    }

    pub fn triple(user: u32, item: u32, tag: u32) -> Self {
        Observation {
            user,
            item,
            tag: Some(tag),
        }
    }
}

/// Immutable view of the loaded data: interned users/items/tags, the ordered
/// interaction log, directed friendship adjacency (with self-loops) and
/// per-item tag sets.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub users: Interner,
    pub items: Interner,
    pub tags: Interner,
    pub interactions: Vec<(u32, u32)>,
    friends: Vec<Vec<u32>>,
    item_tags: Vec<Vec<u32>>,
}

impl Corpus {
    /// Assembles a corpus from raw parts, materializing self-loops and
    /// sorting/deduplicating adjacency and tag lists.
    pub fn from_parts(
        users: Interner,
        items: Interner,
        tags: Interner,
        interactions: Vec<(u32, u32)>,
        friend_edges: &[(u32, u32)],
        item_tag_pairs: &[(u32, u32)],
    ) -> Self {
        let n_users = users.len();
        let n_items = items.len();
        let mut friends = vec![Vec::new(); n_users];
        for &(u, f) in friend_edges {
            friends[u as usize].push(f);
        }
        for (u, list) in friends.iter_mut().enumerate() {
            list.push(u as u32);
            list.sort_unstable();
            list.dedup();
        }
        let mut item_tags = vec![Vec::new(); n_items];
        for &(i, w) in item_tag_pairs {
            item_tags[i as usize].push(w);
        }
        for list in &mut item_tags {
            list.sort_unstable();
            list.dedup();
        }
        Corpus {
            users,
            items,
            tags,
            interactions,
            friends,
            item_tags,
        }
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_tags(&self) -> usize {
        self.tags.len()
    }

    /// Friend list F(u), sorted, always containing `u` itself.
    pub fn friends(&self, u: u32) -> &[u32] {
        &self.friends[u as usize]
    }

    /// Tag set W_i, sorted, duplicate free.
    pub fn item_tags(&self, i: u32) -> &[u32] {
        &self.item_tags[i as usize]
    }

    pub fn avg_friends(&self) -> f64 {
        if self.friends.is_empty() {
            return 0.0;
        }
        // excludes the forced self-loop
        let total: usize = self.friends.iter().map(|f| f.len() - 1).sum();
        total as f64 / self.friends.len() as f64
    }

    pub fn avg_tags_per_item(&self) -> f64 {
        if self.item_tags.is_empty() {
            return 0.0;
        }
        let total: usize = self.item_tags.iter().map(Vec::len).sum();
        total as f64 / self.item_tags.len() as f64
    }

    /// Per-user sorted distinct item sets from a list of observations.
    pub fn user_item_sets(n_users: usize, observations: &[Observation]) -> Vec<Vec<u32>> {
        let mut sets = vec![Vec::new(); n_users];
        for obs in observations {
            sets[obs.user as usize].push(obs.item);
        }
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
        }
        sets
    }
}

/// A per-user holdout partition of the interaction log.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Vec<(u32, u32)>,
    pub test: Vec<(u32, u32)>,
    pub seed: u64,
}

/// A recorded group activity: distinct members and the item they selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupEvent {
    pub members: Vec<u32>,
    pub item: u32,
}

/// Result of loading a group-event file: kept events plus drop statistics.
#[derive(Debug, Clone)]
pub struct GroupEventLoad {
    pub events: Vec<GroupEvent>,
    pub dropped: usize,
    pub avg_group_size: f64,
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufReader::new(file).lines().enumerate())
}

fn parse_pair<'a>(path: &Path, line_no: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    line.split_once('\t')
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: line_no + 1,
            msg: format!("expected two tab-separated fields, got `{line}`"),
        })
}

fn read_line(path: &Path, line: std::io::Result<String>) -> Result<String> {
    line.map(|l| l.trim_end_matches('\r').to_owned())
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn skip_line(line: &str) -> bool {
    line.is_empty() || line.starts_with('#')
}

/// Loads interactions, friendship edges and (optionally) item tags.
///
/// Users that appear only in the friendship file are still interned; every
/// user ends up with a self-loop in the adjacency. A tag line referencing an
/// item absent from the interaction log is an error.
pub fn load_corpus(
    interactions_path: &Path,
    friends_path: &Path,
    tags_path: Option<&Path>,
) -> Result<Corpus> {
    let mut users = Interner::new();
    let mut items = Interner::new();
    let mut tags = Interner::new();

    let mut interactions = Vec::new();
    for (line_no, line) in open_lines(interactions_path)? {
        let line = read_line(interactions_path, line)?;
        if skip_line(&line) {
            continue;
        }
        let (user, item) = parse_pair(interactions_path, line_no, &line)?;
        interactions.push((users.intern(user), items.intern(item)));
    }

    let mut friend_edges = Vec::new();
    for (line_no, line) in open_lines(friends_path)? {
        let line = read_line(friends_path, line)?;
        if skip_line(&line) {
            continue;
        }
        let (user, friend) = parse_pair(friends_path, line_no, &line)?;
        friend_edges.push((users.intern(user), users.intern(friend)));
    }

    let mut item_tag_pairs = Vec::new();
    if let Some(tags_path) = tags_path {
        for (line_no, line) in open_lines(tags_path)? {
            let line = read_line(tags_path, line)?;
            if skip_line(&line) {
                continue;
            }
            let (item, tag) = parse_pair(tags_path, line_no, &line)?;
            let item_idx = items.get(item).ok_or_else(|| Error::Parse {
                path: tags_path.to_path_buf(),
                line: line_no + 1,
                msg: format!("tag references unknown item `{item}`"),
            })?;
            item_tag_pairs.push((item_idx, tags.intern(tag)));
        }
    }

    Ok(Corpus::from_parts(
        users,
        items,
        tags,
        interactions,
        &friend_edges,
        &item_tag_pairs,
    ))
}

/// Loads group events, resolving member ids against the corpus. Events with
/// fewer than two resolvable members are dropped and counted.
pub fn load_group_events(path: &Path, corpus: &Corpus) -> Result<GroupEventLoad> {
    let mut events = Vec::new();
    let mut dropped = 0usize;
    let mut member_total = 0usize;
    for (line_no, line) in open_lines(path)? {
        let line = read_line(path, line)?;
        if skip_line(&line) {
            continue;
        }
        let (item, member_list) = parse_pair(path, line_no, &line)?;
        let item = corpus.items.get(item).ok_or_else(|| Error::UnknownId {
            kind: "item",
            id: item.to_owned(),
        })?;
        let mut members: Vec<u32> = member_list
            .split(',')
            .filter_map(|m| corpus.users.get(m.trim()))
            .collect();
        members.sort_unstable();
        members.dedup();
        if members.len() < 2 {
            dropped += 1;
            continue;
        }
        member_total += members.len();
        events.push(GroupEvent { members, item });
    }
    let avg_group_size = if events.is_empty() {
        0.0
    } else {
        member_total as f64 / events.len() as f64
    };
    Ok(GroupEventLoad {
        events,
        dropped,
        avg_group_size,
    })
}

/// Per-user holdout split. Sampling is at the distinct-item level so that a
/// user's test items never appear in their train half even when the log
/// contains repeated (user, item) observations; every occurrence of a held
/// out item moves to test. Each user keeps at least one train item, and the
/// draw for a user depends only on (seed, user index).
pub fn split_holdout(corpus: &Corpus, fraction: f64, seed: u64) -> Split {
    assert!(
        fraction > 0.0 && fraction < 1.0,
        "holdout fraction must be in (0,1)"
    );
    let n_users = corpus.n_users();
    let mut per_user_items: Vec<Vec<u32>> = vec![Vec::new(); n_users];
    let mut per_user_occurrences = vec![0usize; n_users];
    for &(u, i) in &corpus.interactions {
        per_user_items[u as usize].push(i);
        per_user_occurrences[u as usize] += 1;
    }

    // held[u] = set of items whose occurrences go to test
    let mut held: Vec<Vec<u32>> = vec![Vec::new(); n_users];
    for u in 0..n_users {
        if per_user_occurrences[u] <= 1 {
            continue;
        }
        let distinct = &mut per_user_items[u];
        distinct.sort_unstable();
        distinct.dedup();
        let d = distinct.len();
        if d <= 1 {
            continue;
        }
        let target = ((fraction * d as f64).round() as usize).min(d - 1);
        if target == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u as u64 + 1);
        // partial Fisher-Yates over the sorted distinct items
        let mut pool = distinct.clone();
        for j in 0..target {
            let pick = rng.gen_range(j..pool.len());
            pool.swap(j, pick);
        }
        let mut chosen: Vec<u32> = pool[..target].to_vec();
        chosen.sort_unstable();
        held[u] = chosen;
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for &(u, i) in &corpus.interactions {
        if held[u as usize].binary_search(&i).is_ok() {
            test.push((u, i));
        } else {
            train.push((u, i));
        }
    }
    Split { train, test, seed }
}

/// Plain pair observations from an interaction list.
pub fn pair_observations(pairs: &[(u32, u32)]) -> Vec<Observation> {
    pairs.iter().map(|&(u, i)| Observation::pair(u, i)).collect()
}

/// Outcome of expanding pairs into content triples.
#[derive(Debug, Clone)]
pub struct ContentExpansion {
    pub observations: Vec<Observation>,
    /// Distinct items whose empty tag set removed their pairs.
    pub tagless_items: Vec<u32>,
    pub dropped_pairs: usize,
}

/// Expands each (u, i) pair into one triple (u, i, w) per tag w of item i.
/// Pairs whose item carries no tags contribute nothing and are reported.
pub fn expand_content(corpus: &Corpus, pairs: &[(u32, u32)]) -> ContentExpansion {
    let mut observations = Vec::new();
    let mut tagless = Vec::new();
    let mut dropped_pairs = 0usize;
    for &(u, i) in pairs {
        let tags = corpus.item_tags(i);
        if tags.is_empty() {
            tagless.push(i);
            dropped_pairs += 1;
            continue;
        }
        for &w in tags {
            observations.push(Observation::triple(u, i, w));
        }
    }
    tagless.sort_unstable();
    tagless.dedup();
    ContentExpansion {
        observations,
        tagless_items: tagless,
        dropped_pairs,
    }
}
