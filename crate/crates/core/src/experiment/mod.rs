//! The prediction experiment: temporal train/test split, instance
//! sampling, per-configuration SVM training and AUC/ROC evaluation over
//! repeated seeded runs.
//!
//! [`run_experiment`] is the entry point. Each run rebuilds its split
//! from that run's seed, trains one model per feature configuration on
//! standardized slices of the shared feature vectors, and scores the test
//! side. The report carries per-run AUCs plus mean and population
//! standard deviation per configuration, and the full ROC paths.
//!
//! Everything downstream of the corpus is a pure function of
//! `(corpus, config)`: two calls with the same inputs produce
//! bit-identical reports.

pub mod metrics;
pub mod sampling;
pub mod stats;
pub mod svm;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use metrics::{compute_auc, roc_area, roc_points};
pub use sampling::{
    build_split, build_split_with, featurize_instances, sample_negatives, sample_positives,
    sample_split_instances, DatasetSplit, HistorySource, Label, LabeledInstance, SplitOptions,
    SplitSizes, SplitWindows,
};
pub use stats::{render_tag_usage, tag_usage_stats, ActivityTagUsage, TagShare};
pub use svm::{
    standardize_apply, standardize_fit, svm_objective, train_linear_svm, Hyperparams,
};

use crate::corpus::{parse_timestamp, ActivityType, Corpus, Window};
use crate::error::{Error, Result};
use crate::features::{
    select_config, FeatureConfig, FeatureContext, FeatureContextOptions, FeatureVector,
    FEATURE_CONFIGS,
};
use crate::seed::derive_seed;

/// Full description of one experiment, loadable from TOML. Every field
/// has a default, so a config file only states what it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: ActivityType,
    /// Feature configurations to evaluate. `ALL` is appended when absent.
    pub configs: Vec<FeatureConfig>,
    pub train_window: Window,
    pub test_window: Window,
    pub n_pos: usize,
    pub n_neg: usize,
    pub runs: usize,
    /// One seed per run.
    pub seeds: Vec<u64>,
    pub lambda: f64,
    pub epochs: usize,
    /// Optional cap on co-actor set sizes (seeded subsample above it).
    pub co_cap: Option<usize>,
    /// Which period's history featurizes test instances.
    pub history: HistorySource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: ActivityType::Answer,
            configs: FEATURE_CONFIGS.to_vec(),
            train_window: Window {
                start: parse_timestamp("2013-10-01T00:00:00Z").unwrap(),
                end: parse_timestamp("2014-07-01T00:00:00Z").unwrap(),
            },
            test_window: Window {
                start: parse_timestamp("2014-07-01T00:00:00Z").unwrap(),
                end: parse_timestamp("2015-04-01T00:00:00Z").unwrap(),
            },
            n_pos: 5000,
            n_neg: 5000,
            runs: 5,
            seeds: vec![1, 2, 3, 4, 5],
            lambda: 1e-4,
            epochs: 200,
            co_cap: None,
            history: HistorySource::OwnWindow,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".to_string()));
        }
        if self.seeds.len() != self.runs {
            return Err(Error::Config(format!(
                "need one seed per run: {} runs but {} seeds",
                self.runs,
                self.seeds.len()
            )));
        }
        if self.n_pos == 0 || self.n_neg == 0 {
            return Err(Error::Config(
                "n_pos and n_neg must both be positive".to_string(),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config("lambda must be positive".to_string()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".to_string()));
        }
        for (name, window) in [("train_window", self.train_window), ("test_window", self.test_window)] {
            if window.start > window.end {
                return Err(Error::Config(format!(
                    "{name} starts after it ends: {window}"
                )));
            }
        }
        self.windows().validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.configs.is_empty() {
            return Err(Error::Config(
                "configs must name at least one feature configuration".to_string(),
            ));
        }
        if let Some(cap) = self.co_cap {
            if cap == 0 {
                return Err(Error::Config("co_cap must be at least 1".to_string()));
            }
        }
        Ok(())
    }

    pub fn windows(&self) -> SplitWindows {
        SplitWindows {
            train: self.train_window,
            test: self.test_window,
        }
    }

    pub fn sizes(&self) -> SplitSizes {
        SplitSizes {
            n_pos: self.n_pos,
            n_neg: self.n_neg,
        }
    }

    /// The configurations actually evaluated: as listed, deduplicated,
    /// with `ALL` appended when missing.
    pub fn effective_configs(&self) -> Vec<FeatureConfig> {
        let mut out: Vec<FeatureConfig> = Vec::new();
        for &c in &self.configs {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        if !out.contains(&FeatureConfig::All) {
            out.push(FeatureConfig::All);
        }
        out
    }
}

/// A trained linear scorer for one feature configuration, carrying its
/// standardization so raw feature slices score directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub config: FeatureConfig,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_means: Vec<f64>,
    pub feature_stddevs: Vec<f64>,
    pub hyperparams: Hyperparams,
}

impl LinearModel {
    /// Standardizes the rows, trains, and packages the result. Labels are
    /// `+1.0` / `-1.0`.
    pub fn fit(
        rows: &[Vec<f64>],
        labels: &[f64],
        config: FeatureConfig,
        hyperparams: Hyperparams,
    ) -> Result<LinearModel> {
        let (means, stds) = standardize_fit(rows)?;
        let standardized: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| standardize_apply(row, &means, &stds))
            .collect::<Result<_>>()?;
        let (weights, bias) = train_linear_svm(&standardized, labels, hyperparams)?;
        Ok(LinearModel {
            config,
            weights,
            bias,
            feature_means: means,
            feature_stddevs: stds,
            hyperparams,
        })
    }

    /// Scores a raw (unstandardized) feature slice for this model's
    /// configuration.
    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        let z = standardize_apply(x, &self.feature_means, &self.feature_stddevs)?;
        Ok(svm::dot(&self.weights, &z) + self.bias)
    }
}

/// Evaluation results for one feature configuration across all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub config: FeatureConfig,
    /// AUC per run, in run (seed list) order.
    pub auc_per_run: Vec<f64>,
    pub auc_mean: f64,
    /// Population standard deviation over runs; 0 for a single run.
    pub auc_std: f64,
    /// ROC path per run, `(fpr, tpr)` from (0,0) to (1,1).
    pub roc_per_run: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: ActivityType,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub configs: Vec<ConfigReport>,
}

/// Per-run detail beyond what the report aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub seed: u64,
    pub models: BTreeMap<FeatureConfig, LinearModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: EvalReport,
    pub run_details: Vec<RunArtifacts>,
}

/// Runs the full protocol for one task. See the module docs for the
/// shape; errors from sampling, training, or scoring propagate.
pub fn run_experiment(corpus: &Corpus, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let vocabulary = crate::interests::build_vocabulary(corpus)?;
    let interests = crate::interests::item_interests(corpus, &vocabulary);

    let windows = config.windows();
    let sizes = config.sizes();
    let task = config.task;
    let configs = config.effective_configs();

    // Without a co-actor cap the feature contexts depend only on the
    // window, so both are shared across runs. With a cap the subsample is
    // seeded per run and the contexts are rebuilt inside the loop.
    let shared_contexts: Option<(FeatureContext, FeatureContext)> = if config.co_cap.is_none() {
        let train_view = corpus.view(windows.train);
        let test_view = corpus.view(config.history.window_for_test(&windows));
        let options = FeatureContextOptions::default();
        Some((
            FeatureContext::build(&train_view, &interests, options),
            FeatureContext::build(&test_view, &interests, options),
        ))
    } else {
        None
    };

    let mut per_config_auc: BTreeMap<FeatureConfig, Vec<f64>> = BTreeMap::new();
    let mut per_config_roc: BTreeMap<FeatureConfig, Vec<Vec<(f64, f64)>>> = BTreeMap::new();
    let mut run_details = Vec::with_capacity(config.runs);

    for &run_seed in &config.seeds {
        let (train, test) = match &shared_contexts {
            Some((train_context, test_context)) => {
                let (train_instances, test_instances) =
                    sample_split_instances(corpus, task, sizes, windows, run_seed)?;
                (
                    featurize_instances(train_context, train_instances)?,
                    featurize_instances(test_context, test_instances)?,
                )
            }
            None => {
                let split = build_split_with(
                    corpus,
                    &interests,
                    task,
                    sizes,
                    windows,
                    run_seed,
                    SplitOptions {
                        history: config.history,
                        co_cap: config.co_cap,
                    },
                )?;
                (split.train, split.test)
            }
        };

        let hyperparams = Hyperparams {
            lambda: config.lambda,
            epochs: config.epochs,
            seed: derive_seed(run_seed, "svm"),
        };
        let mut models = BTreeMap::new();
        for &fc in &configs {
            let (auc, roc, model) = evaluate_config(&train, &test, fc, hyperparams)?;
            per_config_auc.entry(fc).or_default().push(auc);
            per_config_roc.entry(fc).or_default().push(roc);
            models.insert(fc, model);
        }
        run_details.push(RunArtifacts {
            seed: run_seed,
            models,
        });
    }

    let configs = configs
        .into_iter()
        .map(|fc| {
            let auc_per_run = per_config_auc.remove(&fc).unwrap_or_default();
            let (auc_mean, auc_std) = mean_std(&auc_per_run);
            ConfigReport {
                config: fc,
                auc_per_run,
                auc_mean,
                auc_std,
                roc_per_run: per_config_roc.remove(&fc).unwrap_or_default(),
            }
        })
        .collect();

    Ok(ExperimentOutput {
        report: EvalReport {
            task,
            runs: config.runs,
            seeds: config.seeds.clone(),
            configs,
        },
        run_details,
    })
}

fn evaluate_config(
    train: &[(LabeledInstance, FeatureVector)],
    test: &[(LabeledInstance, FeatureVector)],
    config: FeatureConfig,
    hyperparams: Hyperparams,
) -> Result<(f64, Vec<(f64, f64)>, LinearModel)> {
    let rows: Vec<Vec<f64>> = train
        .iter()
        .map(|(_, v)| select_config(v, config))
        .collect();
    let labels: Vec<f64> = train.iter().map(|(i, _)| label_value(i.label)).collect();
    let model = LinearModel::fit(&rows, &labels, config, hyperparams)?;

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (instance, vector) in test {
        let score = model.predict_score(&select_config(vector, config))?;
        match instance.label {
            Label::Positive => pos.push(score),
            Label::Negative => neg.push(score),
        }
    }
    let auc = compute_auc(&pos, &neg)?;
    let roc = roc_points(&pos, &neg)?;
    Ok((auc, roc, model))
}

fn label_value(label: Label) -> f64 {
    match label {
        Label::Positive => 1.0,
        Label::Negative => -1.0,
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    (mean, var.sqrt())
}

/// Plain-text summary table for an evaluation report.
pub fn render_summary(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "task: {}", report.task);
    let _ = writeln!(out, "runs: {}", report.runs);
    let seeds: Vec<String> = report.seeds.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "seeds: {}", seeds.join(" "));
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<10}  {:>8}  {:>8}  per_run", "config", "auc_mean", "auc_std");
    for config_report in &report.configs {
        let per_run: Vec<String> = config_report
            .auc_per_run
            .iter()
            .map(|a| format!("{a:.4}"))
            .collect();
        let _ = writeln!(
            out,
            "{:<10}  {:>8.4}  {:>8.4}  {}",
            config_report.config.to_string(),
            config_report.auc_mean,
            config_report.auc_std,
            per_run.join(" ")
        );
    }
    out
}

/// Writes `report.json`, `summary.txt`, and one
/// `roc_{config}_run{k}.tsv` per configuration and run into `dir`.
pub fn write_report_files(report: &EvalReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
    fs::write(dir.join("report.json"), json + "\n")?;
    fs::write(dir.join("summary.txt"), render_summary(report))?;
    for config_report in &report.configs {
        for (k, roc) in config_report.roc_per_run.iter().enumerate() {
            let name = format!("roc_{}_run{}.tsv", config_report.config, k + 1);
            let mut file = fs::File::create(dir.join(name))?;
            writeln!(file, "fpr\ttpr")?;
            for (fpr, tpr) in roc {
                writeln!(file, "{fpr:.16e}\t{tpr:.16e}")?;
            }
        }
    }
    Ok(())
}

/// Reads back a `report.json` written by [`write_report_files`].
pub fn read_report_file(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("parsing report: {e}")))
}
