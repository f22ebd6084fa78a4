//! Acceptance suite. Each test is one numbered criterion and prints a
//! single PASS line on success (visible with `--nocapture`); criterion 7
//! (end-to-end pipeline determinism over the command line) lives in the
//! CLI crate's acceptance suite.

mod common;

use std::collections::BTreeSet;
use std::fs;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fixture_path, plain_interests, random_corpus, reference_auc, ts, ReferenceIndex};
use crossact::corpus::{
    link_accounts, parse_github_events, parse_stackoverflow_posts, read_links_file, ActivityRecord,
    ActivityType, Corpus, ItemKey, ItemRecord, PlatformId, ACTIVITY_TYPES,
};
use crossact::experiment::{
    build_split_with, compute_auc, roc_area, roc_points, run_experiment, standardize_apply,
    standardize_fit, svm_objective, train_linear_svm, ExperimentConfig, Hyperparams, Label,
    LinearModel, SplitOptions,
};
use crossact::features::{select_config, FeatureConfig, FeatureContext, FeatureContextOptions};
use crossact::interests::{build_vocabulary, item_interests};
use crossact::synth::{generate_corpus, topic_tags, SynthSpec};

fn item(platform: PlatformId, id: &str, text: &str, tags: &[&str]) -> ItemRecord {
    ItemRecord {
        platform,
        item_id: id.to_string(),
        text: text.to_string(),
        raw_tags: tags.iter().map(|t| t.to_string()).collect(),
        created_at: ts("2014-01-01T00:00:00Z"),
    }
}

fn act(user: &str, item: &str, activity: ActivityType, when: &str) -> ActivityRecord {
    ActivityRecord {
        user_id: user.to_string(),
        item_id: item.to_string(),
        activity,
        timestamp: ts(when),
    }
}

fn context_for(corpus: &Corpus) -> FeatureContext {
    let vocabulary = build_vocabulary(corpus).expect("questions present");
    let interests = item_interests(corpus, &vocabulary);
    FeatureContext::build(
        &corpus.full_view(),
        &interests,
        FeatureContextOptions::default(),
    )
}

#[test]
fn acceptance_01_worked_examples() {
    // Direct: u forked A and B; the query question x shares a tag with
    // A's description only, so sim_fork(u, x) = 1/2.
    let direct = Corpus::from_parts(
        vec![
            item(PlatformId::GitHub, "A", "lstm sequence tools", &[]),
            item(PlatformId::GitHub, "B", "django admin panels", &[]),
            item(PlatformId::StackOverflow, "x", "", &["lstm"]),
            item(PlatformId::StackOverflow, "y", "", &["django"]),
        ],
        vec![
            act("u", "A", ActivityType::Fork, "2014-01-02T00:00:00Z"),
            act("u", "B", ActivityType::Fork, "2014-01-03T00:00:00Z"),
        ],
        vec![],
        None,
    )
    .unwrap()
    .0;
    let features = context_for(&direct)
        .featurize(
            "u",
            &ItemKey {
                platform: PlatformId::StackOverflow,
                item_id: "x".to_string(),
            },
        )
        .unwrap();
    assert_eq!(features.sim_fork, 0.5);

    // Co-activity: u and v co-forked D; v's forks are {C, D} and only C
    // shares a tag with the query z, so sim_cofork(u, z) = (1/2) / 1.
    let co = Corpus::from_parts(
        vec![
            item(PlatformId::GitHub, "C", "xgboost tree boosting", &[]),
            item(PlatformId::GitHub, "D", "web server framework", &[]),
            item(PlatformId::StackOverflow, "z", "", &["xgboost"]),
            item(PlatformId::StackOverflow, "w", "", &["web"]),
        ],
        vec![
            act("u", "D", ActivityType::Fork, "2014-01-02T00:00:00Z"),
            act("v", "C", ActivityType::Fork, "2014-01-03T00:00:00Z"),
            act("v", "D", ActivityType::Fork, "2014-01-04T00:00:00Z"),
        ],
        vec![],
        None,
    )
    .unwrap()
    .0;
    let features = context_for(&co)
        .featurize(
            "u",
            &ItemKey {
                platform: PlatformId::StackOverflow,
                item_id: "z".to_string(),
            },
        )
        .unwrap();
    assert_eq!(features.sim_cofork, 0.5);

    println!("acceptance 01 worked examples: PASS");
}

#[test]
fn acceptance_02_feature_reference_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for corpus_index in 0..100 {
        let corpus = random_corpus(&mut rng, 50, 200, 1000);
        let interests = plain_interests(&corpus);
        let reference = ReferenceIndex::build(corpus.activities(), interests.clone());
        let context = context_for(&corpus);

        let users: Vec<String> = {
            let mut set: BTreeSet<String> =
                corpus.activities().iter().map(|a| a.user_id.clone()).collect();
            set.insert("nobody".to_string());
            set.into_iter().collect()
        };
        let items: Vec<ItemKey> = interests.keys().cloned().collect();

        for query_index in 0..1000 {
            let user = &users[rng.random_range(0..users.len())];
            let key = &items[rng.random_range(0..items.len())];
            let fast = context.featurize(user, key).unwrap().as_array();
            let slow = reference.features(user, key);
            for (component, (a, b)) in fast.iter().zip(slow.iter()).enumerate() {
                assert_eq!(
                    a.to_bits(),
                    b.to_bits(),
                    "corpus {corpus_index} query {query_index} ({user}, {key}) component {component}: {a} vs {b}"
                );
            }
        }
    }
    println!("acceptance 02 feature reference equivalence: PASS");
}

#[test]
fn acceptance_03_auc_and_roc_correctness() {
    let pos = [0.9, 0.4];
    let neg = [0.6, 0.1];
    assert_eq!(compute_auc(&pos, &neg).unwrap(), 0.75);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..1000 {
        let n_pos = rng.random_range(1..=30);
        let n_neg = rng.random_range(1..=30);
        // Scores on a coarse grid so ties are common.
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect()
        };
        let pos = draw(n_pos);
        let neg = draw(n_neg);

        let auc = compute_auc(&pos, &neg).unwrap();
        let oracle = reference_auc(&pos, &neg);
        assert_eq!(auc.to_bits(), oracle.to_bits(), "case {case}: {auc} vs {oracle}");

        let points = roc_points(&pos, &neg).unwrap();
        let area = roc_area(&points);
        assert!(
            (area - auc).abs() < 1e-12,
            "case {case}: trapezoid {area} vs auc {auc}"
        );
    }
    println!("acceptance 03 auc and roc correctness: PASS");
}

#[test]
fn acceptance_04_svm_sanity() {
    // Separable 2-D set.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..60 {
        let mut jitter = || rng.random_range(-0.4..0.4);
        rows.push(vec![2.0 + jitter(), 2.0 + jitter()]);
        labels.push(1.0);
        rows.push(vec![-2.0 + jitter(), -2.0 + jitter()]);
        labels.push(-1.0);
    }
    let model = LinearModel::fit(
        &rows,
        &labels,
        FeatureConfig::GhAct,
        Hyperparams {
            lambda: 0.01,
            epochs: 50,
            seed: 1,
        },
    )
    .unwrap();
    for (row, label) in rows.iter().zip(&labels) {
        let score = model.predict_score(row).unwrap();
        assert!(score * label > 0.0, "misclassified {row:?} ({label}): {score}");
    }

    // Objective on a 200-point random set vs a run with 100x the epochs.
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..200 {
        rows.push(vec![
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ]);
        labels.push(if rng.random_bool(0.5) { 1.0 } else { -1.0 });
    }
    let (means, stds) = standardize_fit(&rows).unwrap();
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| standardize_apply(r, &means, &stds).unwrap())
        .collect();
    let lambda = 0.01;
    let short = Hyperparams {
        lambda,
        epochs: 50,
        seed: 2,
    };
    let long = Hyperparams {
        lambda,
        epochs: 5000,
        seed: 2,
    };
    let (w_short, b_short) = train_linear_svm(&rows, &labels, short).unwrap();
    let (w_long, b_long) = train_linear_svm(&rows, &labels, long).unwrap();
    let objective_short = svm_objective(&w_short, b_short, &rows, &labels, lambda);
    let objective_long = svm_objective(&w_long, b_long, &rows, &labels, lambda);
    assert!(
        (objective_short - objective_long).abs() <= 0.02 * objective_long,
        "objective {objective_short} vs reference {objective_long}"
    );

    // Bit-identical determinism.
    let (w_again, b_again) = train_linear_svm(&rows, &labels, short).unwrap();
    assert_eq!(b_short.to_bits(), b_again.to_bits());
    for (a, b) in w_short.iter().zip(&w_again) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    println!("acceptance 04 svm sanity: PASS");
}

#[test]
fn acceptance_05_synthetic_protocol_claims() {
    let spec = SynthSpec::default();
    assert_eq!(
        (spec.n_users, spec.n_repos, spec.n_questions, spec.n_topics, spec.noise_rate),
        (500, 1000, 1000, 10, 0.15)
    );
    let (corpus, _) = generate_corpus(&spec).unwrap();
    let vocabulary = build_vocabulary(&corpus).unwrap();
    let interests = item_interests(&corpus, &vocabulary);

    for &task in ACTIVITY_TYPES.iter() {
        let config = ExperimentConfig {
            task,
            n_pos: 1000,
            n_neg: 1000,
            ..ExperimentConfig::default()
        };
        assert_eq!(config.runs, 5);
        let output = run_experiment(&corpus, &config).unwrap();
        let mean = |fc: FeatureConfig| -> f64 {
            output
                .report
                .configs
                .iter()
                .find(|c| c.config == fc)
                .unwrap()
                .auc_mean
        };

        // (a) The full configuration carries the planted signal.
        let all = mean(FeatureConfig::All);
        assert!(all >= 0.80, "task {task}: ALL mean AUC {all:.4} < 0.80");

        // (b) ALL is never meaningfully worse than any single
        // configuration.
        for fc in [
            FeatureConfig::SoAct,
            FeatureConfig::SoCoAct,
            FeatureConfig::GhAct,
            FeatureConfig::GhCoAct,
        ] {
            let single = mean(fc);
            assert!(
                all >= single - 0.02,
                "task {task}: ALL {all:.4} vs {fc} {single:.4}"
            );
        }

        // (c) The other platform's direct features alone rank well above
        // chance (the cold-start direction).
        let cross = match task.platform() {
            PlatformId::StackOverflow => FeatureConfig::GhAct,
            PlatformId::GitHub => FeatureConfig::SoAct,
        };
        let cross_mean = mean(cross);
        assert!(
            cross_mean >= 0.60,
            "task {task}: cross-platform {cross} mean AUC {cross_mean:.4} < 0.60"
        );

        // (d) Permutation control: the trained model's test scores give
        // chance AUC once labels are shuffled.
        let mut permuted = Vec::new();
        for &seed in &config.seeds {
            let split = build_split_with(
                &corpus,
                &interests,
                task,
                config.sizes(),
                config.windows(),
                seed,
                SplitOptions::default(),
            )
            .unwrap();
            let rows: Vec<Vec<f64>> = split
                .train
                .iter()
                .map(|(_, v)| select_config(v, FeatureConfig::All))
                .collect();
            let labels: Vec<f64> = split
                .train
                .iter()
                .map(|(i, _)| if i.label == Label::Positive { 1.0 } else { -1.0 })
                .collect();
            let model = LinearModel::fit(
                &rows,
                &labels,
                FeatureConfig::All,
                Hyperparams {
                    lambda: config.lambda,
                    epochs: config.epochs,
                    seed,
                },
            )
            .unwrap();
            let scores: Vec<f64> = split
                .test
                .iter()
                .map(|(_, v)| {
                    model
                        .predict_score(&select_config(v, FeatureConfig::All))
                        .unwrap()
                })
                .collect();
            let mut shuffled: Vec<bool> = split
                .test
                .iter()
                .map(|(i, _)| i.label == Label::Positive)
                .collect();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x00c0_ffee));
            let pos: Vec<f64> = scores
                .iter()
                .zip(&shuffled)
                .filter(|(_, is_pos)| **is_pos)
                .map(|(s, _)| *s)
                .collect();
            let neg: Vec<f64> = scores
                .iter()
                .zip(&shuffled)
                .filter(|(_, is_pos)| !**is_pos)
                .map(|(s, _)| *s)
                .collect();
            permuted.push(compute_auc(&pos, &neg).unwrap());
        }
        let mean_permuted = permuted.iter().sum::<f64>() / permuted.len() as f64;
        assert!(
            (0.45..=0.55).contains(&mean_permuted),
            "task {task}: permuted-label AUC {mean_permuted:.4} off chance"
        );
    }
    println!("acceptance 05 synthetic protocol claims: PASS");
}

#[test]
fn acceptance_06_cold_start_cross_platform_ranking() {
    let spec = SynthSpec {
        n_users: 200,
        n_repos: 400,
        n_questions: 400,
        n_topics: 8,
        tags_per_topic: 4,
        user_affinity_sharpness: 8.0,
        activity_rate: 12.0,
        noise_rate: 0.1,
        seed: 21,
        ..SynthSpec::default()
    };
    let (full, truth) = generate_corpus(&spec).unwrap();

    // Cold users: strip every Stack Overflow activity from 40 users that
    // have GitHub history, leaving them with zero target-platform
    // evidence.
    let gh_active: BTreeSet<&str> = full
        .activities()
        .iter()
        .filter(|a| a.activity.platform() == PlatformId::GitHub)
        .map(|a| a.user_id.as_str())
        .collect();
    let cold: BTreeSet<String> = gh_active.iter().take(40).map(|u| u.to_string()).collect();
    assert_eq!(cold.len(), 40);
    let items: Vec<ItemRecord> = full.items().cloned().collect();
    let activities: Vec<ActivityRecord> = full
        .activities()
        .iter()
        .filter(|a| {
            !(cold.contains(&a.user_id) && a.activity.platform() == PlatformId::StackOverflow)
        })
        .cloned()
        .collect();
    let (corpus, _) =
        Corpus::from_parts(items, activities, full.links().to_vec(), Some(full.window())).unwrap();
    for user in &cold {
        assert!(corpus.activities().iter().all(|a| {
            a.user_id != *user || a.activity.platform() == PlatformId::GitHub
        }));
    }

    let context = context_for(&corpus);
    let tags = topic_tags(spec.n_topics, spec.tags_per_topic).unwrap();
    let questions: Vec<(&ItemRecord, usize)> = corpus
        .items()
        .filter(|i| i.platform == PlatformId::StackOverflow)
        .map(|i| {
            let topic = tags
                .iter()
                .position(|set| set.contains(&i.raw_tags[0]))
                .unwrap();
            (i, topic)
        })
        .collect();

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for user in &cold {
        let favorite = truth[user]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        for (question, topic) in &questions {
            let vector = context.featurize(user, &question.key()).unwrap();
            assert_eq!(vector.sim_ans, 0.0);
            assert_eq!(vector.sim_fav, 0.0);
            let score = vector.sim_fork + vector.sim_watch;
            if *topic == favorite {
                pos.push(score);
            } else {
                neg.push(score);
            }
        }
    }
    let auc = compute_auc(&pos, &neg).unwrap();
    assert!(auc >= 0.60, "cold-start cross-platform AUC {auc:.4} < 0.60");
    println!("acceptance 06 cold start cross platform ranking: PASS (auc {auc:.4})");
}

#[test]
fn acceptance_08_ingestion_fidelity() {
    let posts = fs::read(fixture_path("so_posts.xml")).unwrap();
    let votes = fs::read(fixture_path("so_votes.xml")).unwrap();
    let events = fs::read(fixture_path("gh_events.jsonl")).unwrap();
    let links = fs::read(fixture_path("links.tsv")).unwrap();

    // Hand-enumerated: 3 questions, 2 answers + 2 favorite votes, one
    // non-favorite vote ignored.
    let so = parse_stackoverflow_posts(&posts[..], &votes[..]).unwrap();
    assert_eq!(so.items.len(), 3);
    assert_eq!(so.activities.len(), 4);
    assert_eq!(so.diagnostics.ignored, 1);
    assert_eq!(so.diagnostics.malformed, 0);
    assert_eq!(so.diagnostics.missing_field, 0);

    // Hand-enumerated: 2 repositories from 5 events, 4 fork/watch
    // activities, one PushEvent skipped as an unknown kind.
    let gh = parse_github_events(&events[..]).unwrap();
    assert_eq!(gh.items.len(), 2);
    assert_eq!(gh.activities.len(), 4);
    assert_eq!(gh.diagnostics.unknown_kind, 1);
    let repo = gh
        .items
        .iter()
        .find(|i| i.item_id == "9002")
        .expect("repo 9002 present");
    assert_eq!(repo.text, "javascript sorting utilities and more");
    assert_eq!(repo.created_at, ts("2014-01-09T10:30:00Z"));

    let link_rows = read_links_file(&links[..]).unwrap();
    assert_eq!(link_rows.len(), 2);
    let (corpus, diagnostics) = link_accounts(link_rows.clone(), gh, so).unwrap();
    assert_eq!(corpus.item_count(), 5);
    assert_eq!(corpus.activities().len(), 8);
    let users: BTreeSet<&str> = corpus
        .activities()
        .iter()
        .map(|a| a.user_id.as_str())
        .collect();
    assert_eq!(
        users,
        BTreeSet::from(["u_alice", "u_bob", "gh:carol", "so:503"])
    );
    let base = crossact::corpus::filter_base_users(&corpus, &corpus.window());
    assert_eq!(
        base,
        BTreeSet::from(["u_alice".to_string(), "u_bob".to_string()])
    );
    assert_eq!(diagnostics.dropped_dangling, 0);
    assert_eq!(corpus.window().start, ts("2014-01-05T12:00:00Z"));
    assert_eq!(corpus.window().end, ts("2014-02-04T16:00:01Z"));

    // Duplicate concatenation: feeding every record twice dedups back to
    // the same corpus.
    let so_twice = {
        let mut doubled = parse_stackoverflow_posts(&posts[..], &votes[..]).unwrap();
        let again = parse_stackoverflow_posts(&posts[..], &votes[..]).unwrap();
        doubled.items.extend(again.items);
        doubled.activities.extend(again.activities);
        doubled
    };
    let gh_twice = {
        let mut double_events = events.clone();
        double_events.extend_from_slice(&events);
        parse_github_events(&double_events[..]).unwrap()
    };
    let (doubled_corpus, doubled_diagnostics) =
        link_accounts(link_rows, gh_twice, so_twice).unwrap();
    assert_eq!(doubled_diagnostics.deduplicated, 8);
    assert!(doubled_corpus.items().eq(corpus.items()));
    assert_eq!(doubled_corpus.activities(), corpus.activities());
    assert_eq!(doubled_corpus.window(), corpus.window());

    println!("acceptance 08 ingestion fidelity: PASS");
}
