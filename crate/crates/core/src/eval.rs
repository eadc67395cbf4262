//! Evaluation metrics: precision/recall at n over a holdout split, relative
//! ranking of held-out group events, and the derived influence CDFs.

use std::io::{self, Write};

use crate::corpus::{Corpus, GroupEvent, Split};
use crate::error::Error;
use crate::group::{group_friend_pairs, score_average, score_least_misery, GroupStrategy};
use crate::params::ParamSet;
use crate::recommend::{recommend_top_n, UserHistory};

/// Macro-averaged precision/recall for one cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
    pub users_evaluated: usize,
}

/// Per-user top-n hits against the user's held-out items, macro-averaged
/// over users with a non-empty test set. Precision divides by the requested
/// n, recall by the size of the user's test item set.
pub fn precision_recall_at_n(
    params: &ParamSet,
    corpus: &Corpus,
    split: &Split,
    n_list: &[usize],
) -> Vec<PrecisionRecall> {
    let n_users = corpus.n_users();
    let history = UserHistory::from_pairs(n_users, &split.train);
    let mut test_items: Vec<Vec<u32>> = vec![Vec::new(); n_users];
    for &(u, i) in &split.test {
        test_items[u as usize].push(i);
    }
    for items in &mut test_items {
        items.sort_unstable();
        items.dedup();
    }

    let max_n = n_list.iter().copied().max().unwrap_or(0);
    let mut precision_sum = vec![0.0f64; n_list.len()];
    let mut recall_sum = vec![0.0f64; n_list.len()];
    let mut evaluated = 0usize;

    for u in 0..n_users as u32 {
        let test = &test_items[u as usize];
        if test.is_empty() {
            continue;
        }
        evaluated += 1;
        let ranked = recommend_top_n(params, corpus, &history, u, max_n)
            .expect("user index in range");
        for (slot, &n) in n_list.iter().enumerate() {
            let hits = ranked
                .entries
                .iter()
                .take(n)
                .filter(|(i, _)| test.binary_search(i).is_ok())
                .count();
            precision_sum[slot] += hits as f64 / n as f64;
            recall_sum[slot] += hits as f64 / test.len() as f64;
        }
    }

    n_list
        .iter()
        .enumerate()
        .map(|(slot, &n)| PrecisionRecall {
            n,
            precision: if evaluated > 0 {
                precision_sum[slot] / evaluated as f64
            } else {
                0.0
            },
            recall: if evaluated > 0 {
                recall_sum[slot] / evaluated as f64
            } else {
                0.0
            },
            users_evaluated: evaluated,
        })
        .collect()
}

/// Mean relative ranking over evaluable group events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeRankingReport {
    pub mean: f64,
    pub evaluated: usize,
    /// Events whose group the strategy cannot score (isolated members).
    pub skipped_ineligible: usize,
    /// Events whose ground-truth item is not fresh for every member.
    pub skipped_stale_truth: usize,
}

/// Ranks each event's ground-truth item within the group-fresh candidate
/// list and averages position/length. Tied scores share the best rank.
pub fn relative_ranking(
    params: &ParamSet,
    corpus: &Corpus,
    history: &UserHistory,
    events: &[GroupEvent],
    strategy: GroupStrategy,
) -> RelativeRankingReport {
    let mut total = 0.0f64;
    let mut evaluated = 0usize;
    let mut skipped_ineligible = 0usize;
    let mut skipped_stale_truth = 0usize;

    for event in events {
        let members = &event.members;
        let fresh = |i: u32| !members.iter().any(|&u| history.contains(u, i));
        if !fresh(event.item) {
            skipped_stale_truth += 1;
            continue;
        }
        let pairs = match strategy {
            GroupStrategy::SocialInfluence => match group_friend_pairs(params, members) {
                Ok(pairs) => Some(pairs),
                Err(Error::IsolatedMembers(_)) | Err(Error::GroupTooSmall) => {
                    skipped_ineligible += 1;
                    continue;
                }
                Err(e) => panic!("unexpected scoring error: {e}"),
            },
            _ => None,
        };
        let score = |i: u32| -> f64 {
            match (strategy, &pairs) {
                (GroupStrategy::Average, _) => {
                    score_average(params, corpus, members, i).expect("group size checked")
                }
                (GroupStrategy::LeastMisery, _) => {
                    score_least_misery(params, corpus, members, i).expect("group size checked")
                }
                (GroupStrategy::SocialInfluence, Some(pairs)) => pairs
                    .iter()
                    .map(|&(f, u)| params.pair_joint(u, f, i))
                    .sum(),
                (GroupStrategy::SocialInfluence, None) => unreachable!(),
            }
        };

        let truth_score = score(event.item);
        let mut m = 0usize;
        let mut better = 0usize;
        for i in 0..params.n_items() as u32 {
            if !fresh(i) {
                continue;
            }
            m += 1;
            if score(i) > truth_score {
                better += 1;
            }
        }
        debug_assert!(m >= 1);
        let l = better + 1;
        total += l as f64 / m as f64;
        evaluated += 1;
    }

    RelativeRankingReport {
        mean: if evaluated > 0 {
            total / evaluated as f64
        } else {
            0.0
        },
        evaluated,
        skipped_ineligible,
        skipped_stale_truth,
    }
}

/// Empirical CDFs of the derived generative influence, split into self
/// terms Pr(u|u) and friend terms Pr(f|u), f != u.
#[derive(Debug, Clone)]
pub struct InfluenceCdf {
    pub self_cdf: Vec<(f64, f64)>,
    pub friend_cdf: Vec<(f64, f64)>,
}

fn empirical_cdf(mut values: Vec<f64>) -> Vec<(f64, f64)> {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .into_iter()
        .enumerate()
        .map(|(idx, v)| (v, (idx + 1) as f64 / n))
        .collect()
}

pub fn influence_cdf(params: &ParamSet) -> InfluenceCdf {
    let generative = params.derive_generative_influence();
    let mut self_values = Vec::new();
    let mut friend_values = Vec::new();
    for (u, row) in generative.rows.iter().enumerate() {
        for (&f, &v) in params.influencers(u as u32).iter().zip(row) {
            if f == u as u32 {
                self_values.push(v);
            } else {
                friend_values.push(v);
            }
        }
    }
    InfluenceCdf {
        self_cdf: empirical_cdf(self_values),
        friend_cdf: empirical_cdf(friend_values),
    }
}

/// Writes `value<TAB>cum_fraction` lines.
pub fn write_cdf<W: Write>(w: &mut W, cdf: &[(f64, f64)]) -> io::Result<()> {
    for (value, fraction) in cdf {
        writeln!(w, "{value}\t{fraction}")?;
    }
    Ok(())
}

/// Writes `metric<TAB>n-or-strategy<TAB>value` report lines.
pub fn write_metric_lines<W: Write>(
    w: &mut W,
    precision_recall: &[PrecisionRecall],
    relative: &[(GroupStrategy, RelativeRankingReport)],
) -> io::Result<()> {
    for pr in precision_recall {
        writeln!(w, "precision\t{}\t{}", pr.n, pr.precision)?;
        writeln!(w, "recall\t{}\t{}", pr.n, pr.recall)?;
    }
    for (strategy, report) in relative {
        writeln!(w, "relative_ranking\t{}\t{}", strategy.label(), report.mean)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::pair_observations;
    use crate::params::{init_params, Matrix, ModelConfig};
    use approx::assert_abs_diff_eq;

    #[test]
    fn precision_and_recall_single_hit() {
        // user with test={a}, top-5 containing a: precision 0.2, recall 1.0
        let corpus = crate::testutil::corpus_with_edges(1, 6, &[]);
        let params = ParamSet::from_tables(
            false,
            false,
            0,
            vec![1.0],
            vec![vec![0]],
            vec![vec![1.0]],
            Matrix::from_data(1, 1, vec![1.0]),
            Matrix::from_data(1, 6, vec![0.3, 0.25, 0.2, 0.15, 0.07, 0.03]),
            None,
        );
        let split = Split {
            train: vec![],
            test: vec![(0, 2)],
            seed: 0,
        };
        let report = precision_recall_at_n(&params, &corpus, &split, &[5]);
        assert_abs_diff_eq!(report[0].precision, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(report[0].recall, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn users_without_test_items_are_skipped() {
        let corpus = crate::testutil::corpus_with_edges(2, 4, &[]);
        let params = ParamSet::from_tables(
            false,
            false,
            0,
            vec![1.0],
            vec![vec![0], vec![1]],
            vec![vec![1.0], vec![1.0]],
            Matrix::from_data(1, 2, vec![0.5, 0.5]),
            Matrix::from_data(1, 4, vec![0.4, 0.3, 0.2, 0.1]),
            None,
        );
        let split = Split {
            train: vec![(1, 0)],
            test: vec![(0, 1)],
            seed: 0,
        };
        let report = precision_recall_at_n(&params, &corpus, &split, &[2]);
        assert_eq!(report[0].users_evaluated, 1);
    }

    #[test]
    fn metrics_match_naive_recomputation() {
        let corpus = crate::testutil::small_social_corpus(12, 10, 0, 61);
        let config = ModelConfig {
            social: true,
            topics: 3,
            seed: 61,
            ..ModelConfig::default()
        };
        let split = crate::corpus::split_holdout(&corpus, 0.3, 5);
        let train = pair_observations(&split.train);
        let params = init_params(&config, &corpus, &train);
        let n_list = [3usize, 5];
        let reports = precision_recall_at_n(&params, &corpus, &split, &n_list);

        // naive per-user recomputation
        let history = UserHistory::from_pairs(12, &split.train);
        for (slot, &n) in n_list.iter().enumerate() {
            let mut precision = 0.0;
            let mut recall = 0.0;
            let mut count = 0usize;
            for u in 0..12u32 {
                let test: Vec<u32> = split
                    .test
                    .iter()
                    .filter(|&&(tu, _)| tu == u)
                    .map(|&(_, i)| i)
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                if test.is_empty() {
                    continue;
                }
                count += 1;
                let ranked = recommend_top_n(&params, &corpus, &history, u, n).unwrap();
                let hits = ranked
                    .entries
                    .iter()
                    .filter(|(i, _)| test.contains(i))
                    .count();
                precision += hits as f64 / n as f64;
                recall += hits as f64 / test.len() as f64;
            }
            assert_eq!(reports[slot].users_evaluated, count);
            assert_abs_diff_eq!(
                reports[slot].precision,
                precision / count as f64,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(reports[slot].recall, recall / count as f64, epsilon = 1e-12);
        }
    }

    /// K=1 params whose item scores strictly decrease with the item index.
    fn descending_params(n_users: usize, n_items: usize, edges: &[(u32, u32)]) -> (ParamSet, Corpus) {
        let corpus = crate::testutil::corpus_with_edges(n_users, n_items, edges);
        let support: Vec<Vec<u32>> = (0..n_users as u32)
            .map(|u| corpus.friends(u).to_vec())
            .collect();
        let influence: Vec<Vec<f64>> = support
            .iter()
            .map(|s| vec![1.0 / s.len() as f64; s.len()])
            .collect();
        let mut weights: Vec<f64> = (0..n_items).map(|i| (n_items - i) as f64).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let params = ParamSet::from_tables(
            true,
            false,
            0,
            vec![1.0],
            support,
            influence,
            Matrix::from_data(1, n_users, vec![1.0 / n_users as f64; n_users]),
            Matrix::from_data(1, n_items, weights),
            None,
        );
        (params, corpus)
    }

    #[test]
    fn relative_ranking_tenth_of_hundred_is_point_one() {
        let (params, corpus) = descending_params(2, 100, &[(0, 1), (1, 0)]);
        let history = UserHistory::from_pairs(2, &[]);
        let events = vec![GroupEvent {
            members: vec![0, 1],
            item: 9, // strictly ranked 10th of 100
        }];
        for strategy in [
            GroupStrategy::Average,
            GroupStrategy::LeastMisery,
            GroupStrategy::SocialInfluence,
        ] {
            let report = relative_ranking(&params, &corpus, &history, &events, strategy);
            assert_eq!(report.evaluated, 1);
            assert_eq!(report.mean, 0.1, "strategy {strategy:?}");
        }
    }

    #[test]
    fn relative_ranking_top_item_and_mean() {
        let (params, corpus) = descending_params(2, 10, &[(0, 1), (1, 0)]);
        let history = UserHistory::from_pairs(2, &[]);
        let top = vec![GroupEvent {
            members: vec![0, 1],
            item: 0,
        }];
        let report = relative_ranking(&params, &corpus, &history, &top, GroupStrategy::Average);
        assert_abs_diff_eq!(report.mean, 0.1, epsilon = 1e-12); // 1/10

        let two = vec![
            GroupEvent {
                members: vec![0, 1],
                item: 0, // 1/10
            },
            GroupEvent {
                members: vec![0, 1],
                item: 2, // 3/10
            },
        ];
        let report = relative_ranking(&params, &corpus, &history, &two, GroupStrategy::Average);
        assert_abs_diff_eq!(report.mean, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn sig_ineligible_groups_are_counted() {
        let (params, corpus) = descending_params(3, 5, &[(0, 1), (1, 0)]);
        let history = UserHistory::from_pairs(3, &[]);
        let events = vec![GroupEvent {
            members: vec![0, 2], // no friendship between 0 and 2
            item: 1,
        }];
        let report = relative_ranking(
            &params,
            &corpus,
            &history,
            &events,
            GroupStrategy::SocialInfluence,
        );
        assert_eq!(report.evaluated, 0);
        assert_eq!(report.skipped_ineligible, 1);
    }

    #[test]
    fn stale_truth_is_skipped() {
        let (params, corpus) = descending_params(2, 5, &[(0, 1), (1, 0)]);
        let history = UserHistory::from_pairs(2, &[(0, 3)]);
        let events = vec![GroupEvent {
            members: vec![0, 1],
            item: 3,
        }];
        let report = relative_ranking(&params, &corpus, &history, &events, GroupStrategy::Average);
        assert_eq!(report.evaluated, 0);
        assert_eq!(report.skipped_stale_truth, 1);
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let corpus = crate::testutil::small_social_corpus(8, 5, 0, 71);
        let config = ModelConfig {
            social: true,
            topics: 2,
            seed: 71,
            ..ModelConfig::default()
        };
        let train = pair_observations(&corpus.interactions);
        let params = init_params(&config, &corpus, &train);
        let cdf = influence_cdf(&params);
        for series in [&cdf.self_cdf, &cdf.friend_cdf] {
            for pair in series.windows(2) {
                assert!(pair[0].0 <= pair[1].0);
                assert!(pair[0].1 <= pair[1].1);
            }
            if let Some(last) = series.last() {
                assert_abs_diff_eq!(last.1, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn friendless_world_self_cdf_is_point_mass_at_one() {
        let corpus = crate::testutil::corpus_with_edges(4, 3, &[]);
        let config = ModelConfig {
            social: true,
            topics: 2,
            seed: 3,
            ..ModelConfig::default()
        };
        let params = init_params(&config, &corpus, &[]);
        let cdf = influence_cdf(&params);
        assert!(cdf.friend_cdf.is_empty());
        assert!(cdf.self_cdf.iter().all(|&(v, _)| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn report_line_format() {
        let mut out = Vec::new();
        write_metric_lines(
            &mut out,
            &[PrecisionRecall {
                n: 5,
                precision: 0.25,
                recall: 0.5,
                users_evaluated: 4,
            }],
            &[(
                GroupStrategy::SocialInfluence,
                RelativeRankingReport {
                    mean: 0.125,
                    evaluated: 8,
                    skipped_ineligible: 0,
                    skipped_stale_truth: 0,
                },
            )],
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "precision\t5\t0.25\nrecall\t5\t0.5\nrelative_ranking\tsig\t0.125\n"
        );
    }
}
