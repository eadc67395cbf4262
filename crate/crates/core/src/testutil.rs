//! Shared builders for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Interner};

/// Corpus with the given directed friend edges, no interactions or tags.
pub fn corpus_with_edges(n_users: usize, n_items: usize, edges: &[(u32, u32)]) -> Corpus {
    let mut users = Interner::new();
    for u in 0..n_users {
        users.intern(&format!("u{u}"));
    }
    let mut items = Interner::new();
    for i in 0..n_items {
        items.intern(&format!("i{i}"));
    }
    Corpus::from_parts(users, items, Interner::new(), Vec::new(), edges, &[])
}

/// Random small corpus: every user gets one to three friends, two to five
/// interactions, and every item carries at least one tag when tags exist.
pub fn small_social_corpus(n_users: usize, n_items: usize, n_tags: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
    if n_users > 1 {
        for u in 0..n_users as u32 {
            let degree = rng.gen_range(1..=3.min(n_users - 1));
            for _ in 0..degree {
                let f = loop {
                    let f = rng.gen_range(0..n_users as u32);
                    if f != u {
                        break f;
                    }
                };
                edges.push((u, f));
            }
        }
    }

    let mut item_tag_pairs = Vec::new();
    if n_tags > 0 {
        for i in 0..n_items as u32 {
            let count = rng.gen_range(1..=2.min(n_tags));
            for _ in 0..count {
                item_tag_pairs.push((i, rng.gen_range(0..n_tags as u32)));
            }
        }
    }

    let mut interactions = Vec::new();
    for u in 0..n_users as u32 {
        let count = rng.gen_range(2..=5);
        for _ in 0..count {
            interactions.push((u, rng.gen_range(0..n_items as u32)));
        }
    }

    Corpus::from_parts(users, items, tags, interactions, &edges, &item_tag_pairs)
}
