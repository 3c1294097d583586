//! The `mvtool` command line.
//!
//! ```text
//! mvtool [--config FILE] <gen|select|train|cv|emit|simulate> [flags]
//! ```
//!
//! Every flag can also be set in a TOML config file passed with
//! `--config`. Top-level keys apply to every command that has a flag of
//! that name and are ignored by the others; keys in a `[select]`,
//! `[train]`, ... table apply to that command only, override top-level
//! keys, and must name one of its flags. Keys use underscores
//! (`max_versions = 3` for `--max-versions 3`). A flag given on the
//! command line always wins over the file.
//!
//! Exit codes: 0 on success, 2 for invalid input or usage (including
//! scenario, constraint and config errors), 1 for I/O and other internal
//! failures.
//!
//! Reports go to `--out` or standard output, in machine-stable form unless
//! `--format human` is given.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dispatch::{
    code_growth, compile_rules, compile_tree, render_template, simulate, DispatcherSpec, Selector,
    REFERENCE_TEMPLATE,
};
use crate::learners::{
    cross_validate, make_dc_labels, make_regression_samples, train_linear_regression,
    train_regression_tree, train_rule_list, train_tree_classifier, CvData, LearnerSpec, PpmModel,
    Regressor, RuleList, Tree,
};
use crate::model::{read_raw_scenario, validate_scenario, DatasetId, Scenario, VersionId};
use crate::report::{
    cv_report, parse_ids, selection_report, simulation_report, Format, Report, Section,
};
use crate::repselect::{greedy_select, Constraints, Mode, DEFAULT_MIN_GAIN};
use crate::synthgen::{self, SynthConfig};
use crate::{Error, Result};

/// Tag stored in every model file.
pub const MODEL_FORMAT: &str = "MVMODEL v1";

#[derive(Debug, Parser)]
#[command(
    name = "mvtool",
    version,
    about = "Select representative code versions and build run-time dispatchers"
)]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scenario with planted structure.
    Gen(GenArgs),
    /// Select a representative set of versions.
    Select(SelectArgs),
    /// Train a mapping model from features to versions.
    Train(TrainArgs),
    /// Cross-validate a learner.
    Cv(CvArgs),
    /// Compile a trained classifier into a dispatcher file.
    Emit(EmitArgs),
    /// Simulate the adaptive binary on a test scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct GenArgs {
    /// Versions including the baseline.
    #[arg(long)]
    versions: Option<usize>,
    /// Number of datasets to sample.
    #[arg(long)]
    datasets: Option<usize>,
    /// Number of features per dataset.
    #[arg(long)]
    features: Option<usize>,
    /// Planted regions [default: versions - 1].
    #[arg(long)]
    regions: Option<usize>,
    /// Log-normal runtime noise [default: 0].
    #[arg(long)]
    noise: Option<f64>,
    /// Seed for the region structure and, by default, the samples.
    #[arg(long)]
    seed: Option<u64>,
    /// Seed for datasets and runtimes, for held-out sets [default: seed].
    #[arg(long)]
    sample_seed: Option<u64>,
    /// Id of the first generated dataset [default: 0].
    #[arg(long)]
    first_dataset_id: Option<u32>,
    /// Keep datasets this fraction of a cell width away from cuts [default: 0.05].
    #[arg(long)]
    cut_margin: Option<f64>,
    /// Output directory [default: .].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct ReportArgs {
    /// Report file [default: standard output].
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// human or machine [default: machine].
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct SelectArgs {
    /// Scenario directory with versions.csv, datasets.csv, runtimes.csv.
    #[arg(long, value_name = "DIR")]
    scenario: Option<PathBuf>,
    /// Maximum number of non-baseline versions [default: all candidates].
    #[arg(long)]
    max_versions: Option<usize>,
    /// Code size budget as a fraction of the baseline binary [default: unbounded].
    #[arg(long)]
    size_budget: Option<f64>,
    /// Per-dataset loss tolerance against the full oracle [default: 0].
    #[arg(long)]
    loss_tol: Option<f64>,
    /// Minimum objective gain [default: 1e-9].
    #[arg(long)]
    min_gain: Option<f64>,
    /// perf or size [default: perf].
    #[arg(long)]
    mode: Option<String>,
    /// Baseline binary size in bytes [default: the baseline version's code size].
    #[arg(long)]
    baseline_size: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct SetArgs {
    /// Selection report whose `selected` versions to use.
    #[arg(long, value_name = "FILE")]
    selection: Option<PathBuf>,
    /// Representative version ids, comma or space separated.
    #[arg(long, value_name = "IDS")]
    representatives: Option<String>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct LearnerArgs {
    /// Learner descriptor file (TOML with `algorithm = ...`).
    #[arg(long, value_name = "FILE")]
    learner: Option<PathBuf>,
    /// tree, rules, regtree or linreg.
    #[arg(long)]
    algorithm: Option<String>,
    /// Learner hyperparameter, e.g. `--param max_depth=4`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct TrainArgs {
    /// Training scenario directory.
    #[arg(long, value_name = "DIR")]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    set: SetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    learner: LearnerArgs,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct CvArgs {
    /// Scenario directory.
    #[arg(long, value_name = "DIR")]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    set: SetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    learner: LearnerArgs,
    /// Number of folds [default: 10].
    #[arg(long)]
    folds: Option<usize>,
    /// Seed for the fold assignment.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct EmitArgs {
    /// Model file written by `train`.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Dispatcher file to write.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Source template to render the dispatcher through.
    #[arg(long, value_name = "FILE")]
    template: Option<PathBuf>,
    /// Render through the built-in C-like template.
    #[arg(long)]
    reference_template: bool,
    /// Rendered source file [default: <out>.rendered].
    #[arg(long, value_name = "FILE")]
    rendered: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct SimulateArgs {
    /// Test scenario directory.
    #[arg(long, value_name = "DIR")]
    scenario: Option<PathBuf>,
    /// Dispatcher file written by `emit`.
    #[arg(long, value_name = "FILE")]
    dispatcher: Option<PathBuf>,
    /// Model file written by `train`.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Pick the best version of the set with perfect knowledge.
    #[arg(long)]
    oracle: bool,
    /// Always run this version.
    #[arg(long, value_name = "ID")]
    fixed: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    set: SetArgs,
    /// Training scenario, to check for shared dataset ids.
    #[arg(long, value_name = "DIR")]
    train_scenario: Option<PathBuf>,
    /// Baseline binary size in bytes [default: the baseline version's code size].
    #[arg(long)]
    baseline_size: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    report: ReportArgs,
}

/// A trained model as stored by `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub learner: LearnerSpec,
    pub arity: usize,
    pub baseline: VersionId,
    /// Representative set the model was trained for, without the baseline.
    pub representatives: Vec<VersionId>,
    pub train_datasets: Vec<DatasetId>,
    pub model: TrainedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Tree(Tree<VersionId>),
    Rules(RuleList),
    Ppm(PpmModel),
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialize");
        s.push('\n');
        s
    }

    /// Parses and re-validates a model file.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: ModelFile = serde_json::from_str(text)?;
        if m.format != MODEL_FORMAT {
            return Err(Error::Config(format!(
                "model file format {:?}, expected {MODEL_FORMAT:?}",
                m.format
            )));
        }
        m.model = match m.model {
            TrainedModel::Tree(t) => {
                TrainedModel::Tree(Tree::from_nodes(t.arity(), t.nodes().to_vec())?)
            }
            TrainedModel::Rules(r) => {
                compile_rules(&r)?;
                TrainedModel::Rules(r)
            }
            TrainedModel::Ppm(p) => {
                let reps = p.representatives();
                TrainedModel::Ppm(PpmModel::new(p.baseline, &reps, p.models, p.code_sizes)?)
            }
        };
        Ok(m)
    }

    /// The compiled dispatcher of a classification model; `None` for
    /// performance prediction models.
    pub fn dispatcher(&self) -> Result<Option<DispatcherSpec>> {
        match &self.model {
            TrainedModel::Tree(t) => compile_tree(t).map(Some),
            TrainedModel::Rules(r) => compile_rules(r).map(Some),
            TrainedModel::Ppm(_) => Ok(None),
        }
    }
}

/// Runs `mvtool` with `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let name = command_name(&cli.command);
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(_)) {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    eprintln!("\n{}", sub.render_usage());
                }
            }
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Select(_) => "select",
        Command::Train(_) => "train",
        Command::Cv(_) => "cv",
        Command::Emit(_) => "emit",
        Command::Simulate(_) => "simulate",
    }
}

fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => {
            let text = read(path)?;
            Some(
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let file = file.as_ref();
    let name = command_name(&cli.command);
    match cli.command {
        Command::Gen(a) => cmd_gen(merge(&a, file, name)?),
        Command::Select(a) => cmd_select(merge(&a, file, name)?),
        Command::Train(a) => cmd_train(merge(&a, file, name)?),
        Command::Cv(a) => cmd_cv(merge(&a, file, name)?),
        Command::Emit(a) => cmd_emit(merge(&a, file, name)?),
        Command::Simulate(a) => cmd_simulate(merge(&a, file, name)?),
    }
}

fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => true,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

/// Fills flags not given on the command line from the config file.
fn merge<T: Serialize + DeserializeOwned>(
    cli: &T,
    file: Option<&toml::Table>,
    command: &str,
) -> Result<T> {
    let Some(file) = file else {
        return serde_json::from_value(serde_json::to_value(cli)?).map_err(Error::from);
    };
    let Value::Object(mut flags) = serde_json::to_value(cli)? else {
        unreachable!("argument structs serialize to maps")
    };
    let to_json = |v: &toml::Value| serde_json::to_value(v).map_err(Error::from);
    let mut from_file = BTreeMap::new();
    for (k, v) in file {
        if !v.is_table() && flags.contains_key(k) {
            from_file.insert(k.clone(), to_json(v)?);
        }
    }
    if let Some(section) = file.get(command) {
        let table = section
            .as_table()
            .ok_or_else(|| Error::Config(format!("config key {command:?} must be a table")))?;
        for (k, v) in table {
            if !flags.contains_key(k) {
                return Err(Error::Config(format!(
                    "unknown key {k:?} in config [{command}]"
                )));
            }
            from_file.insert(k.clone(), to_json(v)?);
        }
    }
    for (k, v) in from_file {
        if flags.get(&k).is_some_and(is_unset) {
            flags.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(flags))
        .map_err(|e| Error::Config(format!("config file: {e}")))
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| {
        Error::Config(format!(
            "missing required --{flag} (on the command line or in the config file)"
        ))
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn format_of(args: &ReportArgs) -> Result<Format> {
    args.format
        .as_deref()
        .map_or(Ok(Format::Machine), str::parse)
}

fn emit_report(mut report: Report, args: &ReportArgs, started: Instant) -> Result<()> {
    if report.format == Format::Human {
        let ms = started.elapsed().as_secs_f64() * 1e3;
        let e = report.values("run");
        e.push(("elapsed_ms".into(), format!("{ms:.1}")));
    }
    let text = report.to_text();
    match &args.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let versions = required(&a.versions, "versions")?;
    let mut cfg = SynthConfig::new(
        versions,
        required(&a.datasets, "datasets")?,
        required(&a.features, "features")?,
        a.regions.unwrap_or(versions.saturating_sub(1)),
        required(&a.seed, "seed")?,
    );
    cfg.noise_sigma = a.noise.unwrap_or(0.0);
    cfg.sample_seed = a.sample_seed;
    cfg.first_dataset_id = a.first_dataset_id.unwrap_or(0);
    if let Some(m) = a.cut_margin {
        cfg.cut_margin = m;
    }
    let (scenario, truth) = synthgen::generate(&cfg)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("."));
    synthgen::write_dir(&scenario, &truth, &out)?;
    for f in [
        "versions.csv",
        "datasets.csv",
        "runtimes.csv",
        "ground_truth.csv",
    ] {
        println!("{}", out.join(f).display());
    }
    Ok(())
}

fn load(dir: &Option<PathBuf>, flag: &str) -> Result<Scenario> {
    load_dir(&required(dir, flag)?)
}

/// Like `load_scenario_dir`, but lists every violation on stderr before
/// failing with the first.
fn load_dir(dir: &Path) -> Result<Scenario> {
    let open = |name: &str| {
        let path = dir.join(name);
        std::fs::File::open(&path).map_err(|e| Error::io(&path, e))
    };
    let raw = read_raw_scenario(
        open("versions.csv")?,
        open("datasets.csv")?,
        open("runtimes.csv")?,
    )?;
    let violations = validate_scenario(&raw);
    if violations.len() > 1 {
        for v in &violations {
            eprintln!("violation: {v}");
        }
    }
    Scenario::from_raw(raw)
}

fn cmd_select(a: SelectArgs) -> Result<()> {
    let started = Instant::now();
    let format = format_of(&a.report)?;
    let scenario = load(&a.scenario, "scenario")?;
    let matrix = scenario.speedups();
    let constraints = Constraints {
        max_versions: a
            .max_versions
            .unwrap_or(matrix.n_versions().saturating_sub(1)),
        size_budget: a.size_budget.unwrap_or(f64::INFINITY),
        loss_tolerance: a.loss_tol.unwrap_or(0.0),
        min_gain: a.min_gain.unwrap_or(DEFAULT_MIN_GAIN),
        mode: a
            .mode
            .as_deref()
            .map_or(Ok(Mode::PerfPriority), str::parse)?,
    };
    let base = a.baseline_size.unwrap_or(scenario.baseline().code_size);
    if base == 0 {
        return Err(Error::ZeroBaselineSize);
    }
    let set = greedy_select(&matrix, base, &constraints)?;
    emit_report(selection_report(&set, &matrix, format)?, &a.report, started)
}

/// The representative set named by `--representatives` or `--selection`.
fn representatives(a: &SetArgs, scenario: &Scenario) -> Result<Option<Vec<VersionId>>> {
    let ids = match (&a.representatives, &a.selection) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give only one of --representatives and --selection".into(),
            ))
        }
        (Some(list), None) => parse_ids(&list.replace(',', " "))?,
        (None, Some(path)) => {
            let report = Report::parse(&read(path)?)?;
            if report.kind != "selection" {
                return Err(Error::Config(format!(
                    "{} is a {} report, not a selection report",
                    path.display(),
                    report.kind
                )));
            }
            parse_ids(report.get("selection", "selected").ok_or_else(|| {
                Error::Config(format!("{} has no selected versions", path.display()))
            })?)?
        }
        (None, None) => return Ok(None),
    };
    let mut out = Vec::new();
    for id in ids {
        if scenario.version(id).is_none() {
            return Err(Error::UnknownVersion(id));
        }
        if id != scenario.baseline_id() && !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(Some(out))
}

fn require_set(a: &SetArgs, scenario: &Scenario) -> Result<Vec<VersionId>> {
    representatives(a, scenario)?
        .ok_or_else(|| Error::Config("missing --selection or --representatives".into()))
}

fn learner_spec(a: &LearnerArgs) -> Result<LearnerSpec> {
    let mut table = match &a.learner {
        Some(path) => toml::from_str::<toml::Table>(&read(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => toml::Table::new(),
    };
    if let Some(alg) = &a.algorithm {
        table.insert("algorithm".into(), toml::Value::String(alg.clone()));
    }
    for p in &a.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--param expects KEY=VALUE, got {p:?}")))?;
        let value = toml::from_str::<toml::Table>(&format!("v = {}", v.trim()))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(v.trim().into()));
        table.insert(k.trim().into(), value);
    }
    if !table.contains_key("algorithm") {
        return Err(Error::Config("missing --algorithm or --learner".into()));
    }
    LearnerSpec::parse(&toml::to_string(&table).expect("tables serialize"))
}

fn train_model(
    learner: &LearnerSpec,
    scenario: &Scenario,
    reps: &[VersionId],
) -> Result<TrainedModel> {
    let matrix = scenario.speedups();
    Ok(match learner {
        LearnerSpec::Tree(cfg) => TrainedModel::Tree(train_tree_classifier(
            &make_dc_labels(scenario, &matrix, reps)?,
            cfg,
        )?),
        LearnerSpec::Rules(cfg) => TrainedModel::Rules(train_rule_list(
            &make_dc_labels(scenario, &matrix, reps)?,
            cfg,
        )?),
        LearnerSpec::Regtree(_) | LearnerSpec::Linreg => {
            let mut models = BTreeMap::new();
            for &v in reps {
                let samples = make_regression_samples(scenario, &matrix, v)?;
                let model = match learner {
                    LearnerSpec::Regtree(cfg) => {
                        Regressor::RegressionTree(train_regression_tree(&samples, cfg)?)
                    }
                    _ => Regressor::Linear(train_linear_regression(&samples)?),
                };
                models.insert(v, model);
            }
            TrainedModel::Ppm(PpmModel::new(
                scenario.baseline_id(),
                reps,
                models,
                scenario.code_sizes(),
            )?)
        }
    })
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let scenario = load(&a.scenario, "scenario")?;
    let reps = require_set(&a.set, &scenario)?;
    let learner = learner_spec(&a.learner)?;
    let out = required(&a.out, "out")?;
    let model = train_model(&learner, &scenario, &reps)?;
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        learner,
        arity: scenario.arity(),
        baseline: scenario.baseline_id(),
        representatives: reps,
        train_datasets: scenario.datasets().iter().map(|d| d.id).collect(),
        model,
    };
    write(&out, &file.to_json())
}

/// Prefixes every section name, to stack several reports in one.
fn suffix_sections(report: &mut Report, suffix: &str) {
    for s in &mut report.sections {
        let name = match s {
            Section::Values { name, .. } | Section::Table { name, .. } => name,
        };
        name.push(' ');
        name.push_str(suffix);
    }
}

fn cmd_cv(a: CvArgs) -> Result<()> {
    let started = Instant::now();
    let format = format_of(&a.report)?;
    let scenario = load(&a.scenario, "scenario")?;
    let reps = require_set(&a.set, &scenario)?;
    let learner = learner_spec(&a.learner)?;
    let k = a.folds.unwrap_or(10);
    let seed = required(&a.seed, "seed")?;
    let matrix = scenario.speedups();
    let report = if learner.is_classifier() {
        let samples = make_dc_labels(&scenario, &matrix, &reps)?;
        let cv = cross_validate(&learner, CvData::Classification(&samples), k, seed)?;
        cv_report(&cv, format)
    } else {
        // One regression model per representative; each gets its own
        // suffixed sections.
        let mut combined = Report::new("cv", format);
        let mut aggregates = Vec::new();
        for &v in &reps {
            let samples = make_regression_samples(&scenario, &matrix, v)?;
            let cv = cross_validate(&learner, CvData::Regression(&samples), k, seed)?;
            aggregates.push((v, cv.aggregate));
            let mut r = cv_report(&cv, format);
            suffix_sections(&mut r, &format!("version={v}"));
            combined.sections.extend(r.sections);
        }
        let defined: Vec<f64> = aggregates.iter().filter_map(|a| a.1).collect();
        let mean =
            (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        let mean = mean.map_or_else(|| "undefined".to_string(), |m| combined.num(m));
        let e = combined.values("cv");
        e.push(("learner".into(), learner.name().into()));
        e.push((
            "versions".into(),
            reps.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        ));
        e.push(("metric".into(), "rrse_percent".into()));
        e.push(("aggregate".into(), mean));
        let summary = combined.sections.pop().expect("just pushed");
        combined.sections.insert(0, summary);
        combined
    };
    emit_report(report, &a.report, started)
}

fn cmd_emit(a: EmitArgs) -> Result<()> {
    let model = ModelFile::from_json(&read(&required(&a.model, "model")?)?)?;
    let out = required(&a.out, "out")?;
    let spec = model.dispatcher()?.ok_or_else(|| {
        Error::Config(
            "performance prediction models have no dispatcher; pass the model to simulate".into(),
        )
    })?;
    write(&out, spec.serialize())?;
    let template = match (&a.template, a.reference_template) {
        (Some(_), true) => {
            return Err(Error::Config(
                "give only one of --template and --reference-template".into(),
            ))
        }
        (Some(path), false) => Some(read(path)?),
        (None, true) => Some(REFERENCE_TEMPLATE.to_string()),
        (None, false) => None,
    };
    if let Some(t) = template {
        let rendered = render_template(&spec, &t)?;
        let path = a.rendered.unwrap_or_else(|| {
            let mut p = out.clone().into_os_string();
            p.push(".rendered");
            PathBuf::from(p)
        });
        write(&path, &rendered)?;
    }
    println!(
        "nodes={} leaves={} depth={} bytes={}",
        spec.nodes().len(),
        spec.leaf_count(),
        spec.depth(),
        spec.byte_size()
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let format = format_of(&a.report)?;
    let test = load(&a.scenario, "scenario")?;
    let chosen = [
        a.dispatcher.is_some(),
        a.model.is_some(),
        a.oracle,
        a.fixed.is_some(),
    ];
    if chosen.iter().filter(|&&c| c).count() != 1 {
        return Err(Error::Config(
            "give exactly one of --dispatcher, --model, --oracle and --fixed".into(),
        ));
    }
    let model = a
        .model
        .as_ref()
        .map(|p| read(p).and_then(|t| ModelFile::from_json(&t)))
        .transpose()?;
    let spec = match (&a.dispatcher, &model) {
        (Some(path), _) => Some(DispatcherSpec::deserialize(&read(path)?)?),
        (None, Some(m)) => m.dispatcher()?,
        (None, None) => None,
    };

    let reps = match representatives(&a.set, &test)? {
        Some(r) => r,
        None => match (&model, &spec) {
            (Some(m), _) => m.representatives.clone(),
            (None, Some(s)) => s
                .versions()
                .into_iter()
                .filter(|&v| v != test.baseline_id())
                .collect(),
            (None, None) => {
                return Err(Error::Config(
                    "--oracle and --fixed need --selection or --representatives".into(),
                ))
            }
        },
    };
    let train_ids: Option<Vec<DatasetId>> = match (&a.train_scenario, &model) {
        (Some(dir), _) => Some(load_dir(dir)?.datasets().iter().map(|d| d.id).collect()),
        (None, Some(m)) => Some(m.train_datasets.clone()),
        (None, None) => None,
    };

    let selector = match (&spec, &model) {
        (Some(s), _) => Selector::Dispatcher(s),
        (None, Some(m)) => match &m.model {
            TrainedModel::Ppm(p) => Selector::Ppm(p),
            _ => unreachable!("classification models compile to a dispatcher"),
        },
        (None, None) if a.oracle => Selector::Oracle,
        (None, None) => Selector::Fixed(VersionId(a.fixed.expect("checked above"))),
    };
    let mut sim = simulate(&test, selector, &reps, train_ids.as_deref())?;
    if let Some(s) = &spec {
        let base = a.baseline_size.unwrap_or(test.baseline().code_size);
        sim.code_growth = Some(code_growth(
            &reps,
            test.baseline_id(),
            &test.code_sizes(),
            base,
            s,
        )?);
    }
    emit_report(simulation_report(&sim, format), &a.report, started)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_wins_over_config() {
        let file: toml::Table = toml::from_str(
            "seed = 3\nversions = 5\nscenario = \"ignored by gen\"\n[gen]\ndatasets = 20\nversions = 6\n",
        )
        .unwrap();
        let cli = GenArgs {
            versions: Some(4),
            ..Default::default()
        };
        let merged = merge(&cli, Some(&file), "gen").unwrap();
        assert_eq!(merged.versions, Some(4));
        assert_eq!(merged.datasets, Some(20));
        assert_eq!(merged.seed, Some(3));
    }

    #[test]
    fn unknown_command_key_rejected() {
        let file: toml::Table = toml::from_str("[gen]\nmax_versions = 2\n").unwrap();
        assert!(matches!(
            merge(&GenArgs::default(), Some(&file), "gen"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn flattened_and_repeated_flags_merge() {
        let file: toml::Table = toml::from_str(
            "format = \"human\"\n[cv]\nalgorithm = \"tree\"\nparams = [\"max_depth=3\"]\n",
        )
        .unwrap();
        let merged = merge(&CvArgs::default(), Some(&file), "cv").unwrap();
        assert_eq!(merged.report.format.as_deref(), Some("human"));
        assert_eq!(merged.learner.algorithm.as_deref(), Some("tree"));
        assert_eq!(merged.learner.params, vec!["max_depth=3".to_string()]);
    }

    #[test]
    fn learner_from_params() {
        let a = LearnerArgs {
            learner: None,
            algorithm: Some("tree".into()),
            params: vec!["max_depth=3".into(), "prune=true".into()],
        };
        match learner_spec(&a).unwrap() {
            LearnerSpec::Tree(cfg) => {
                assert_eq!(cfg.max_depth, 3);
                assert!(cfg.prune);
            }
            other => panic!("{other:?}"),
        }
        let bad = LearnerArgs {
            algorithm: Some("svm".into()),
            ..Default::default()
        };
        assert!(learner_spec(&bad).is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
