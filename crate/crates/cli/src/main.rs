//! Command-line front end: train a model, recommend for users or groups,
//! evaluate on a holdout split, generate synthetic corpora and inspect the
//! learned influence distributions.

mod settings;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use sigrec::checkpoint::{load_checkpoint, save_checkpoint};
use sigrec::corpus::{
    expand_content, load_corpus, load_group_events, pair_observations, split_holdout, Corpus,
    Observation,
};
use sigrec::em::TrainTrace;
use sigrec::eval::{influence_cdf, precision_recall_at_n, relative_ranking, write_cdf};
use sigrec::group::GroupStrategy;
use sigrec::mapreduce::{train_parallel_with, EmissionMode, ParallelOptions};
use sigrec::params::{ModelConfig, ParamSet};
use sigrec::recommend::{recommend_top_n, UserHistory};
use sigrec::synth::{sample_corpus, sample_group_events, PlantedWorld, WorldConfig};

#[derive(Parser)]
#[command(
    name = "sigrec",
    about = "Generative social-influence recommender: EM training, top-n and group recommendation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint
    Train(TrainArgs),
    /// Rank fresh items for a single user
    Recommend(RecommendArgs),
    /// Rank fresh items for a group of users
    Group(GroupArgs),
    /// Split, train and report precision/recall and group metrics
    Eval(EvalArgs),
    /// Generate a synthetic corpus from a planted model
    Synth(SynthArgs),
    /// Write the derived influence distributions as CDF files
    InspectInfluence(InspectArgs),
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Interaction log: one `user<TAB>item` per line
    #[arg(long)]
    interactions: PathBuf,
    /// Friendship edges: one directed `user<TAB>friend` per line
    #[arg(long)]
    friends: Option<PathBuf>,
    /// Item tags: one `item<TAB>tag` per line
    #[arg(long)]
    tags: Option<PathBuf>,
}

#[derive(Args)]
struct ModelFlags {
    /// Model variant: cf, cf+si, cf+ic or cf+si+ic
    #[arg(long)]
    variant: Option<String>,
    /// Number of latent topics
    #[arg(long)]
    topics: Option<usize>,
    /// Absolute log-likelihood improvement under which training stops
    #[arg(long)]
    epsilon: Option<f64>,
    /// Interpret --epsilon per observation instead of on the total
    #[arg(long)]
    epsilon_per_obs: bool,
    /// Maximum EM iterations
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed for parameter initialization and splits
    #[arg(long)]
    seed: Option<u64>,
    /// Map worker threads
    #[arg(long)]
    workers: Option<usize>,
    /// Observations per map partition
    #[arg(long)]
    partition_size: Option<usize>,
    /// Emit one item array per influencer instead of combining
    #[arg(long)]
    literal_emissions: bool,
    /// Training engine: parallel (default) or serial
    #[arg(long)]
    engine: Option<String>,
    /// key=value file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    model: ModelFlags,
    /// Checkpoint output path
    #[arg(long)]
    model_out: PathBuf,
    /// Iteration log output path (default: standard error)
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct RecommendArgs {
    /// Trained checkpoint
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    /// External user id to recommend for
    #[arg(long)]
    user: String,
    /// List length
    #[arg(long, default_value_t = 5)]
    n: usize,
}

#[derive(Args)]
struct GroupArgs {
    /// Trained checkpoint
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Comma-separated member ids
    #[arg(long)]
    members: String,
    /// Scoring strategy: sig, avg or misery
    #[arg(long)]
    strategy: String,
    /// List length
    #[arg(long, default_value_t = 5)]
    n: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    model: ModelFlags,
    /// Group events file: `item<TAB>member1,member2,...`
    #[arg(long)]
    group_events: Option<PathBuf>,
    /// Fraction of each user's items held out for testing
    #[arg(long)]
    holdout: Option<f64>,
    /// Comma-separated recommendation cutoffs
    #[arg(long, default_value = "5,10,20,50")]
    n_list: String,
    /// Report output path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the self-influence CDF here
    #[arg(long)]
    cdf_self: Option<PathBuf>,
    /// Write the friend-influence CDF here
    #[arg(long)]
    cdf_friend: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    users: usize,
    #[arg(long)]
    items: usize,
    #[arg(long, default_value_t = 0)]
    tags: usize,
    #[arg(long)]
    topics: usize,
    /// Number of interaction events to sample
    #[arg(long)]
    events: usize,
    /// Number of group events to sample (0 for none)
    #[arg(long, default_value_t = 0)]
    groups: usize,
    #[arg(long, default_value_t = 3)]
    group_cap: usize,
    #[arg(long, default_value_t = 4)]
    friends_per_user: usize,
    /// Add the reverse of every friendship edge
    #[arg(long)]
    mutual: bool,
    #[arg(long, default_value_t = 3)]
    tags_per_item: usize,
    /// Also draw tags (requires --tags > 0)
    #[arg(long)]
    content: bool,
    #[arg(long, default_value_t = 1.0)]
    self_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    friend_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    friend_weight_spread: f64,
    /// One home topic per user instead of Dirichlet profiles
    #[arg(long)]
    assigned_topics: bool,
    #[arg(long, default_value_t = 0.05)]
    assignment_noise: f64,
    #[arg(long, default_value_t = 0.2)]
    topic_alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    user_alpha: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory for the corpus files and planted checkpoint
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// Trained checkpoint
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Self-influence CDF output path
    #[arg(long)]
    self_out: Option<PathBuf>,
    /// Friend-influence CDF output path
    #[arg(long)]
    friend_out: Option<PathBuf>,
}

/// Usage errors exit with 2, data errors with 1.
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<sigrec::Error> for CliError {
    fn from(e: sigrec::Error) -> Self {
        CliError::Data(anyhow::Error::new(e))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Recommend(args) => cmd_recommend(args),
        Command::Group(args) => cmd_group(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::InspectInfluence(args) => cmd_inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_variant(name: &str) -> Result<(bool, bool), CliError> {
    match name {
        "cf" => Ok((false, false)),
        "cf+si" => Ok((true, false)),
        "cf+ic" => Ok((false, true)),
        "cf+si+ic" => Ok((true, true)),
        other => Err(usage(format!(
            "unknown variant `{other}` (expected cf, cf+si, cf+ic or cf+si+ic)"
        ))),
    }
}

struct ResolvedModel {
    config: ModelConfig,
    epsilon_per_obs: bool,
    workers: usize,
    partition_size: usize,
    mode: EmissionMode,
    serial: bool,
}

fn resolve_model(flags: &ModelFlags) -> Result<ResolvedModel, CliError> {
    let file_config = match &flags.config {
        Some(path) => settings::load_config(path).map_err(CliError::Data)?,
        None => HashMap::new(),
    };
    let get = |flag: &Option<String>, key: &str, default: &str| -> String {
        flag.clone()
            .or_else(|| file_config.get(key).cloned())
            .unwrap_or_else(|| default.to_owned())
    };
    let variant = get(&flags.variant, "variant", "cf+si");
    let (social, content) = parse_variant(&variant)?;
    let defaults = ModelConfig::default();
    macro_rules! resolve_num {
        ($flag:expr, $key:literal, $default:expr) => {
            settings::resolve($flag, &file_config, $key, $default).map_err(CliError::Data)?
        };
    }
    let config = ModelConfig {
        social,
        content,
        topics: resolve_num!(flags.topics, "topics", defaults.topics),
        seed: resolve_num!(flags.seed, "seed", defaults.seed),
        epsilon: resolve_num!(flags.epsilon, "epsilon", defaults.epsilon),
        max_iters: resolve_num!(flags.max_iters, "max-iters", defaults.max_iters),
    };
    config.validate().map_err(usage)?;
    let engine = get(&flags.engine, "engine", "parallel");
    let serial = match engine.as_str() {
        "serial" => true,
        "parallel" => false,
        other => return Err(usage(format!("unknown engine `{other}`"))),
    };
    Ok(ResolvedModel {
        config,
        epsilon_per_obs: flags.epsilon_per_obs,
        workers: resolve_num!(flags.workers, "workers", 1),
        partition_size: resolve_num!(flags.partition_size, "partition-size", 4096),
        mode: if flags.literal_emissions {
            EmissionMode::Literal
        } else {
            EmissionMode::Combined
        },
        serial,
    })
}

fn load_inputs(args: &CorpusArgs, content: bool) -> Result<Corpus, CliError> {
    if content && args.tags.is_none() {
        return Err(usage("content variants require --tags"));
    }
    let interactions = settings::resolve_data_path(&args.interactions);
    let friends = args.friends.as_deref().map(settings::resolve_data_path);
    let tags = args.tags.as_deref().map(settings::resolve_data_path);
    // an absent friends file means an empty friendship graph
    let empty_friends = tempfile::NamedTempFile::new().map_err(|e| CliError::Data(e.into()))?;
    let friends_path = friends.as_deref().unwrap_or_else(|| empty_friends.path());
    let corpus = load_corpus(&interactions, friends_path, tags.as_deref())?;
    eprintln!(
        "loaded {} users, {} items, {} tags, {} interactions (avg {:.2} friends/user, {:.2} tags/item)",
        corpus.n_users(),
        corpus.n_items(),
        corpus.n_tags(),
        corpus.interactions.len(),
        corpus.avg_friends(),
        corpus.avg_tags_per_item()
    );
    Ok(corpus)
}

/// Training observations for the variant: content models expand each pair
/// over the item's tag set.
fn observations_for(
    corpus: &Corpus,
    pairs: &[(u32, u32)],
    content: bool,
) -> Result<Vec<Observation>, CliError> {
    if !content {
        return Ok(pair_observations(pairs));
    }
    let expansion = expand_content(corpus, pairs);
    if expansion.dropped_pairs > 0 {
        eprintln!(
            "warning: {} interactions on {} tagless items contribute nothing to the content model",
            expansion.dropped_pairs,
            expansion.tagless_items.len()
        );
    }
    if expansion.observations.is_empty() {
        return Err(CliError::Data(anyhow!(
            "no content observations: no train item carries tags"
        )));
    }
    Ok(expansion.observations)
}

fn run_training(
    model: &ResolvedModel,
    corpus: &Corpus,
    observations: &[Observation],
) -> Result<(ParamSet, TrainTrace), CliError> {
    let mut config = model.config;
    if model.epsilon_per_obs {
        config.epsilon *= observations.len() as f64;
    }
    if model.serial {
        Ok(sigrec::em::train(&config, corpus, observations))
    } else {
        let options = ParallelOptions {
            workers: model.workers,
            partition_size: model.partition_size,
            mode: model.mode,
        };
        train_parallel_with(&config, corpus, observations, &options).map_err(CliError::from)
    }
}

fn write_trace(trace: &TrainTrace, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("failed to create {}", path.display()))?;
            trace
                .write_log(&mut BufWriter::new(file))
                .context("failed to write trace")?;
        }
        None => {
            trace
                .write_log(&mut std::io::stderr().lock())
                .context("failed to write trace")?;
        }
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let model = resolve_model(&args.model)?;
    if !model.config.social && args.corpus.friends.is_some() {
        eprintln!(
            "warning: variant {} ignores the friendship graph",
            model.config.variant_name()
        );
    }
    let corpus = load_inputs(&args.corpus, model.config.content)?;
    let observations = observations_for(&corpus, &corpus.interactions, model.config.content)?;
    let (params, trace) = run_training(&model, &corpus, &observations)?;
    save_checkpoint(&params, &args.model_out)?;
    write_trace(&trace, &args.trace_out)?;
    eprintln!(
        "trained {} ({} iterations, {:?}); final log-likelihood {:.4}; checkpoint {}",
        model.config.variant_name(),
        trace.iterations.len(),
        trace.reason,
        trace.final_log_likelihood,
        args.model_out.display()
    );
    Ok(())
}

fn check_dimensions(params: &ParamSet, corpus: &Corpus) -> Result<(), CliError> {
    if params.n_users() != corpus.n_users()
        || params.n_items() != corpus.n_items()
        || (params.content() && params.n_tags() != corpus.n_tags())
    {
        return Err(CliError::Data(anyhow!(
            "checkpoint dimensions ({} users, {} items, {} tags) do not match the corpus \
             ({} users, {} items, {} tags); pass the files the model was trained on",
            params.n_users(),
            params.n_items(),
            params.n_tags(),
            corpus.n_users(),
            corpus.n_items(),
            corpus.n_tags()
        )));
    }
    Ok(())
}

fn cmd_recommend(args: RecommendArgs) -> Result<(), CliError> {
    let params = load_checkpoint(&args.model)?;
    let corpus = load_inputs(&args.corpus, params.content())?;
    check_dimensions(&params, &corpus)?;
    let user = corpus
        .users
        .get(&args.user)
        .ok_or_else(|| CliError::Data(anyhow!("unknown user id `{}`", args.user)))?;
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let history = UserHistory::from_pairs(corpus.n_users(), &corpus.interactions);
    let ranked = recommend_top_n(&params, &corpus, &history, user, args.n)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (rank, (item, score)) in ranked.entries.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}", rank + 1, corpus.items.name(*item), score)
            .context("failed to write")?;
    }
    Ok(())
}

fn cmd_group(args: GroupArgs) -> Result<(), CliError> {
    let params = load_checkpoint(&args.model)?;
    let corpus = load_inputs(&args.corpus, params.content())?;
    check_dimensions(&params, &corpus)?;
    let strategy: GroupStrategy = args.strategy.parse().map_err(usage)?;
    let mut members = Vec::new();
    for name in args.members.split(',') {
        let name = name.trim();
        members.push(
            corpus
                .users
                .get(name)
                .ok_or_else(|| CliError::Data(anyhow!("unknown user id `{name}`")))?,
        );
    }
    members.sort_unstable();
    members.dedup();
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let history = UserHistory::from_pairs(corpus.n_users(), &corpus.interactions);
    let ranked = sigrec::group::recommend_group(&params, &corpus, &history, &members, args.n, strategy)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (rank, (item, score)) in ranked.entries.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}", rank + 1, corpus.items.name(*item), score)
            .context("failed to write")?;
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let model = resolve_model(&args.model)?;
    let corpus = load_inputs(&args.corpus, model.config.content)?;
    let holdout = args.holdout.unwrap_or(0.3);
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(usage("--holdout must be in (0,1)"));
    }
    let n_list: Vec<usize> = args
        .n_list
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("--n-list: {e}")))?;
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(usage("--n-list must contain positive cutoffs"));
    }

    let split = split_holdout(&corpus, holdout, model.config.seed);
    eprintln!(
        "split: {} train / {} test interactions (fraction {holdout}, seed {})",
        split.train.len(),
        split.test.len(),
        model.config.seed
    );
    let observations = observations_for(&corpus, &split.train, model.config.content)?;
    let (params, trace) = run_training(&model, &corpus, &observations)?;
    eprintln!(
        "trained {} in {} iterations ({:?})",
        model.config.variant_name(),
        trace.iterations.len(),
        trace.reason
    );

    let precision_recall = precision_recall_at_n(&params, &corpus, &split, &n_list);
    let mut relative = Vec::new();
    if let Some(path) = &args.group_events {
        let path = settings::resolve_data_path(path);
        let load = load_group_events(&path, &corpus)?;
        eprintln!(
            "group events: {} kept, {} dropped, average size {:.2}",
            load.events.len(),
            load.dropped,
            load.avg_group_size
        );
        let history = UserHistory::from_pairs(corpus.n_users(), &split.train);
        for strategy in [
            GroupStrategy::SocialInfluence,
            GroupStrategy::Average,
            GroupStrategy::LeastMisery,
        ] {
            let report = relative_ranking(&params, &corpus, &history, &load.events, strategy);
            eprintln!(
                "{}: {} events evaluated, {} ineligible, {} stale",
                strategy.label(),
                report.evaluated,
                report.skipped_ineligible,
                report.skipped_stale_truth
            );
            relative.push((strategy, report));
        }
    }

    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("failed to create {}", path.display()))?;
            sigrec::eval::write_metric_lines(&mut BufWriter::new(file), &precision_recall, &relative)
                .context("failed to write report")?;
        }
        None => {
            sigrec::eval::write_metric_lines(
                &mut std::io::stdout().lock(),
                &precision_recall,
                &relative,
            )
            .context("failed to write report")?;
        }
    }

    if args.cdf_self.is_some() || args.cdf_friend.is_some() {
        let cdf = influence_cdf(&params);
        if let Some(path) = &args.cdf_self {
            write_cdf_file(path, &cdf.self_cdf)?;
        }
        if let Some(path) = &args.cdf_friend {
            write_cdf_file(path, &cdf.friend_cdf)?;
        }
    }
    Ok(())
}

fn write_cdf_file(path: &Path, cdf: &[(f64, f64)]) -> Result<(), CliError> {
    let file =
        File::create(path).with_context(|| format!("failed to create {}", path.display()))?;
    write_cdf(&mut BufWriter::new(file), cdf).context("failed to write CDF")?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    if args.content && args.tags == 0 {
        return Err(usage("--content requires --tags > 0"));
    }
    if args.users == 0 || args.items == 0 || args.topics == 0 || args.events == 0 {
        return Err(usage("--users, --items, --topics and --events must be positive"));
    }
    let world = PlantedWorld::generate(&WorldConfig {
        n_users: args.users,
        n_items: args.items,
        n_tags: args.tags,
        topics: args.topics,
        seed: args.seed,
        friends_per_user: args.friends_per_user,
        mutual_friends: args.mutual,
        tags_per_item: args.tags_per_item,
        content: args.content,
        self_weight: args.self_weight,
        friend_weight: args.friend_weight,
        friend_weight_spread: args.friend_weight_spread,
        topic_alpha: args.topic_alpha,
        user_alpha: args.user_alpha,
        assigned_topics: args.assigned_topics,
        assignment_noise: args.assignment_noise,
    });
    let events = sample_corpus(&world, args.events, args.seed ^ 0x5eed);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("failed to create {}", args.out.display()))?;

    let write_lines = |name: &str, lines: Vec<String>| -> Result<(), CliError> {
        let path = args.out.join(name);
        let mut out = BufWriter::new(
            File::create(&path).with_context(|| format!("failed to create {}", path.display()))?,
        );
        for line in lines {
            writeln!(out, "{line}").context("write failed")?;
        }
        Ok(())
    };

    let corpus = &world.corpus;
    write_lines(
        "interactions.tsv",
        events
            .iter()
            .map(|o| format!("{}\t{}", corpus.users.name(o.user), corpus.items.name(o.item)))
            .collect(),
    )?;
    let mut friend_lines = Vec::new();
    for u in 0..corpus.n_users() as u32 {
        for &f in corpus.friends(u) {
            if f != u {
                friend_lines.push(format!(
                    "{}\t{}",
                    corpus.users.name(u),
                    corpus.users.name(f)
                ));
            }
        }
    }
    write_lines("friends.tsv", friend_lines)?;
    if args.content {
        // only items present in the sample are interned on reload, so a
        // tag line for an unsampled item would dangle
        let mut sampled_items: Vec<u32> = events.iter().map(|o| o.item).collect();
        sampled_items.sort_unstable();
        sampled_items.dedup();
        let mut tag_lines = Vec::new();
        for &i in &sampled_items {
            for &w in corpus.item_tags(i) {
                tag_lines.push(format!("{}\t{}", corpus.items.name(i), corpus.tags.name(w)));
            }
        }
        write_lines("tags.tsv", tag_lines)?;
    }
    if args.groups > 0 {
        let group_events = sample_group_events(&world, args.groups, args.group_cap, args.seed ^ 0x9);
        write_lines(
            "groups.tsv",
            group_events
                .iter()
                .map(|e| {
                    let members: Vec<&str> =
                        e.members.iter().map(|&m| corpus.users.name(m)).collect();
                    format!("{}\t{}", corpus.items.name(e.item), members.join(","))
                })
                .collect(),
        )?;
    }
    save_checkpoint(&world.params, &args.out.join("planted.ckpt"))?;
    eprintln!(
        "wrote {} events for {} users over {} items to {} (friend influence mass {:.3})",
        events.len(),
        args.users,
        args.items,
        args.out.display(),
        world.friend_influence_mass()
    );
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<(), CliError> {
    let params = load_checkpoint(&args.model)?;
    let corpus = load_inputs(&args.corpus, params.content())?;
    check_dimensions(&params, &corpus)?;
    let cdf = influence_cdf(&params);
    let median = |series: &[(f64, f64)]| -> f64 {
        if series.is_empty() {
            f64::NAN
        } else {
            series[series.len() / 2].0
        }
    };
    eprintln!(
        "self influence: {} values, median {:.4}; friend influence: {} values, median {:.6}",
        cdf.self_cdf.len(),
        median(&cdf.self_cdf),
        cdf.friend_cdf.len(),
        median(&cdf.friend_cdf)
    );
    if let Some(path) = &args.self_out {
        write_cdf_file(path, &cdf.self_cdf)?;
    }
    if let Some(path) = &args.friend_out {
        write_cdf_file(path, &cdf.friend_cdf)?;
    }
    if args.self_out.is_none() && args.friend_out.is_none() {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        writeln!(out, "# self influence CDF").context("write failed")?;
        write_cdf(&mut out, &cdf.self_cdf).context("write failed")?;
        writeln!(out, "# friend influence CDF").context("write failed")?;
        write_cdf(&mut out, &cdf.friend_cdf).context("write failed")?;
    }
    Ok(())
}
