//! Experiment commands behind the command-line front end.
//!
//! Each command writes `manifest.json` before any computation, then a
//! `config.toml` snapshot of the resolved configuration, then its results.
//! Re-running with the same configuration and seed reproduces every CSV byte
//! for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::active_learning::{
    bootstrap_dataset, evaluation_budget_report, preset, run_loop, run_loop_with, write_iterations_csv,
    IterationRecord, LoopError, LoopOutcome, LoopStatus, SurrogateChoice,
};
use crate::baselines::{cga_evolve, exhaustive_search, within_tie, BaselineError};
use crate::config::{ConfigError, RunConfig};
use crate::encoding::{EncodingError, StructureCode};
use crate::problem::TrcProblem;
use crate::qga::{write_trace_csv, GenerationRecord};
use crate::rng::{mix_seed, seeded, stream};
use crate::surrogate::{
    cross_validate, evaluate_rmse, mean_and_sem, FmConfig, FmModel, LabeledDataset, RandomForest, SurrogateError,
};

pub const RMSE_STUDY_HEADER: [&str; 6] = ["model", "n_layers", "train_size", "repeat", "rmse", "l2_penalty"];
pub const RMSE_SUMMARY_HEADER: [&str; 6] = ["model", "n_layers", "train_size", "repeats", "mean_rmse", "sem_rmse"];
pub const COMPARE_HEADER: [&str; 4] = ["surrogate", "iteration", "cumulative_generations", "best_true_fom"];
pub const SPECTRUM_HEADER: [&str; 3] = ["wavelength_nm", "T", "R"];

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error(transparent)]
    Loop(#[from] LoopError),

    #[error(transparent)]
    Baseline(#[from] BaselineError),

    #[error(transparent)]
    Surrogate(#[from] SurrogateError),

    #[error(transparent)]
    Encoding(#[from] EncodingError),

    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    BudgetExhausted,
}

impl RunStatus {
    /// 0 for success or convergence, 2 for an exhausted budget. Errors exit with 1.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::BudgetExhausted => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Qga,
    Cga,
    Exhaustive,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "qga" => Ok(Self::Qga),
            "cga" => Ok(Self::Cga),
            "exhaustive" => Ok(Self::Exhaustive),
            _ => Err(format!("unknown algorithm `{s}`; expected qga, cga or exhaustive")),
        }
    }
}

/// User inputs shared by every command.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Invocation {
    pub config_path: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Raw command line, echoed into the manifest.
    pub args: Vec<String>,
}

impl Invocation {
    pub fn resolve_config(&self) -> Result<RunConfig, ConfigError> {
        let mut config = match &self.config_path {
            Some(path) => RunConfig::load(path, self.preset.as_deref())?,
            None => RunConfig::from_toml_str("", self.preset.as_deref())?,
        };
        if let Some(seed) = self.seed {
            config.run.seed = seed;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    pub config_path: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: u64,
    pub version: String,
    pub started_unix_s: u64,
    pub out_dir: PathBuf,
    pub args: Vec<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CommandError {
    CommandError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_file<F>(path: &Path, body: F) -> Result<(), CommandError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), Box<dyn std::error::Error>>,
{
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CommandError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Creates the run directory, writes the manifest and the config snapshot.
fn start_run(
    command: &str,
    algorithm: Option<Algorithm>,
    inv: &Invocation,
) -> Result<RunConfig, CommandError> {
    let config = inv.resolve_config()?;
    fs::create_dir_all(&inv.out_dir).map_err(|e| io_err(&inv.out_dir, e))?;
    let snapshot = inv.out_dir.join("config.toml");
    if let Some(input) = &inv.config_path {
        if let (Ok(a), Ok(b)) = (input.canonicalize(), snapshot.canonicalize()) {
            if a == b {
                return Err(CommandError::Usage(format!(
                    "output directory would overwrite the input config {}",
                    input.display()
                )));
            }
        }
    }
    let manifest = RunManifest {
        command: command.into(),
        algorithm,
        config_path: inv.config_path.clone(),
        preset: config.preset.clone(),
        seed: config.run.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        started_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        out_dir: inv.out_dir.clone(),
        args: inv.args.clone(),
    };
    write_json(&inv.out_dir.join("manifest.json"), &manifest)?;
    let text = config.to_toml();
    write_file(&snapshot, |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(config)
}

fn write_dataset(path: &Path, data: &LabeledDataset) -> Result<(), CommandError> {
    write_file(path, |w| Ok(data.write_csv(w)?))
}

fn write_records(path: &Path, records: &[IterationRecord]) -> Result<(), CommandError> {
    write_file(path, |w| Ok(write_iterations_csv(w, records)?))
}

fn write_trace(path: &Path, trace: &[GenerationRecord]) -> Result<(), CommandError> {
    write_file(path, |w| Ok(write_trace_csv(w, trace)?))
}

/// Result of a command, for the caller to report.
#[derive(Debug, Clone, Serialize)]
pub struct CommandReport {
    pub status: RunStatus,
    /// One-line human summary.
    pub message: String,
}

/// `optimize`: runs the active-learning loop, the classical GA or the exhaustive search.
pub fn cmd_optimize(inv: &Invocation, algorithm: Algorithm) -> Result<CommandReport, CommandError> {
    let config = start_run("optimize", Some(algorithm), inv)?;
    let problem = config.build_problem()?;
    let out = &inv.out_dir;
    match algorithm {
        Algorithm::Qga => optimize_qga(&config, &problem, out),
        Algorithm::Cga => optimize_cga(&config, &problem, out),
        Algorithm::Exhaustive => optimize_exhaustive(&config, &problem, out),
    }
}

fn material_names(problem: &TrcProblem, code: &StructureCode) -> Vec<String> {
    problem
        .palette()
        .names(code)
        .map(|v| v.into_iter().map(str::to_string).collect())
        .unwrap_or_default()
}

fn optimize_qga(config: &RunConfig, problem: &TrcProblem, out: &Path) -> Result<CommandReport, CommandError> {
    let loop_config = config.loop_config();
    let outcome = match run_loop(&loop_config, problem) {
        Ok(o) => o,
        Err(e) => {
            write_records(&out.join("iterations.csv"), e.records())?;
            return Err(e.into());
        }
    };
    write_loop_outputs(out, "", &outcome)?;
    let budget = evaluation_budget_report(&outcome.records, &loop_config, problem.code_length());
    let status = match outcome.status {
        LoopStatus::Converged => RunStatus::Success,
        LoopStatus::BudgetExhausted => RunStatus::BudgetExhausted,
    };
    #[derive(Serialize)]
    struct Summary<'a> {
        algorithm: Algorithm,
        status: RunStatus,
        loop_status: &'a str,
        best_code: String,
        best_fom: f64,
        best_materials: Vec<String>,
        iterations: usize,
        budget: crate::active_learning::BudgetReport,
    }
    let summary = Summary {
        algorithm: Algorithm::Qga,
        status,
        loop_status: match outcome.status {
            LoopStatus::Converged => "converged",
            LoopStatus::BudgetExhausted => "budget_exhausted",
        },
        best_code: outcome.best_code.to_string(),
        best_fom: outcome.best_true_fom,
        best_materials: material_names(problem, &outcome.best_code),
        iterations: outcome.records.len(),
        budget,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(CommandReport {
        status,
        message: format!(
            "qga: best {} FOM {} after {} iterations ({} labels)",
            summary.best_code, summary.best_fom, summary.iterations, summary.budget.tmm_evaluations
        ),
    })
}

/// `dataset.csv`, `iterations.csv` and one trace per iteration, names prefixed by `prefix`.
fn write_loop_outputs(out: &Path, prefix: &str, outcome: &LoopOutcome) -> Result<(), CommandError> {
    write_dataset(&out.join(format!("{prefix}dataset.csv")), &outcome.dataset)?;
    write_records(&out.join(format!("{prefix}iterations.csv")), &outcome.records)?;
    for (i, trace) in outcome.traces.iter().enumerate() {
        write_trace(&out.join(format!("{prefix}qga_trace_{i}.csv")), trace)?;
    }
    Ok(())
}

fn optimize_cga(config: &RunConfig, problem: &TrcProblem, out: &Path) -> Result<CommandReport, CommandError> {
    let cga = config.cga_config();
    let mut fitness = |c: &StructureCode| problem.fitness(c);
    let outcome = cga_evolve(&cga, &mut fitness, problem.code_length())?;
    write_trace(&out.join("cga_trace.csv"), &outcome.trace)?;
    let best_fom = -outcome.best.fitness / 100.0;
    #[derive(Serialize)]
    struct Summary {
        algorithm: Algorithm,
        status: RunStatus,
        best_code: String,
        best_fom: f64,
        best_materials: Vec<String>,
        generations: usize,
        tmm_evaluations: u64,
    }
    let summary = Summary {
        algorithm: Algorithm::Cga,
        status: RunStatus::Success,
        best_code: outcome.best.code.to_string(),
        best_fom,
        best_materials: material_names(problem, &outcome.best.code),
        generations: outcome.trace.len(),
        tmm_evaluations: outcome.evaluations,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(CommandReport {
        status: RunStatus::Success,
        message: format!(
            "cga: best {} FOM {} after {} evaluations",
            summary.best_code, best_fom, summary.tmm_evaluations
        ),
    })
}

fn optimize_exhaustive(config: &RunConfig, problem: &TrcProblem, out: &Path) -> Result<CommandReport, CommandError> {
    let result = exhaustive_search(|c| problem.fitness(c), problem.code_length(), config.exhaustive.max_code_length)?;
    let best_fom = -result.best_fitness / 100.0;
    #[derive(Serialize)]
    struct Summary {
        algorithm: Algorithm,
        status: RunStatus,
        best_code: String,
        best_fom: f64,
        best_materials: Vec<String>,
        evaluation_count: u64,
        tie_count: u64,
        optima: Vec<String>,
    }
    let summary = Summary {
        algorithm: Algorithm::Exhaustive,
        status: RunStatus::Success,
        best_code: result.best_code.to_string(),
        best_fom,
        best_materials: material_names(problem, &result.best_code),
        evaluation_count: result.evaluation_count,
        tie_count: result.tie_count,
        optima: result.optima.iter().map(|c| c.to_string()).collect(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(CommandReport {
        status: RunStatus::Success,
        message: format!(
            "exhaustive: best {} FOM {} over {} structures ({} tied)",
            summary.best_code, best_fom, summary.evaluation_count, summary.tie_count
        ),
    })
}

/// One trained-and-tested cell of the surrogate study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseRow {
    pub model: SurrogateChoice,
    pub n_layers: usize,
    pub train_size: usize,
    /// 1-based.
    pub repeat: usize,
    pub rmse: f64,
    /// Penalty picked by cross-validation; FM only.
    pub l2_penalty: Option<f64>,
}

/// FM penalty with the lowest mean cross-validated RMSE; ties go to the earlier candidate.
pub fn select_fm_penalty(
    data: &LabeledDataset,
    base: &FmConfig,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64, SurrogateError> {
    let mut best: Option<(f64, f64)> = None;
    for &l2 in grid {
        let cfg = FmConfig { l2_penalty: l2, ..base.clone() };
        let scores = cross_validate(data, folds, seed, |train| FmModel::train(train, &cfg))?;
        let mean = mean_and_sem(&scores).0;
        if best.is_none_or(|(_, m)| mean < m) {
            best = Some((l2, mean));
        }
    }
    best.map(|(l2, _)| l2)
        .ok_or_else(|| SurrogateError::InvalidConfig("empty FM penalty grid".into()))
}

/// Training prefixes and the shared test set of one study repeat.
fn study_split(problem: &TrcProblem, train_max: usize, test_size: usize, seed: u64) -> Result<(LabeledDataset, LabeledDataset), CommandError> {
    let mut rng = seeded(seed, stream::STUDY);
    let all = bootstrap_dataset(problem, train_max + test_size, &mut rng)?;
    let train: Vec<usize> = (0..train_max).collect();
    let test: Vec<usize> = (train_max..train_max + test_size).collect();
    Ok((all.subset(&train)?, all.subset(&test)?))
}

/// Every cell of the study, in (layers, repeat, train size, model) order.
///
/// Within a repeat all models and sizes share one test set, and each smaller
/// training set is a prefix of the larger ones.
pub fn rmse_study(config: &RunConfig) -> Result<Vec<RmseRow>, CommandError> {
    let study = &config.study;
    let train_max = study.train_sizes.iter().copied().max().unwrap_or(0);
    if train_max < 2 || study.train_sizes.iter().any(|&s| s < study.cv_folds.max(2)) {
        return Err(CommandError::Usage(format!(
            "study.train_sizes must all be at least study.cv_folds = {}",
            study.cv_folds
        )));
    }
    let mut rows = Vec::new();
    for &layers in &study.layers {
        let mut cell = config.clone();
        cell.problem.layers = layers;
        if cell.problem.thicknesses_nm.as_ref().is_some_and(|t| t.len() != layers) {
            cell.problem.thicknesses_nm = None;
        }
        let problem = cell.build_problem()?;
        let per_repeat: Vec<Vec<RmseRow>> = (1..=study.repeats)
            .into_par_iter()
            .map(|repeat| -> Result<Vec<RmseRow>, CommandError> {
                let seed = mix_seed(mix_seed(config.run.seed, layers as u64), repeat as u64);
                let (pool, test) = study_split(&problem, train_max, study.test_size, seed)?;
                let mut out = Vec::new();
                for &size in &study.train_sizes {
                    let train = pool.subset(&(0..size).collect::<Vec<_>>())?;
                    let model_seed = mix_seed(seed, size as u64);
                    for &model in &study.models {
                        let (rmse, l2) = match model {
                            SurrogateChoice::RandomForest => {
                                let cfg = crate::surrogate::ForestConfig {
                                    rng_seed: model_seed,
                                    ..config.forest_config()
                                };
                                (evaluate_rmse(&RandomForest::train(&train, &cfg)?, &test)?, None)
                            }
                            SurrogateChoice::FactorizationMachine => {
                                let base = FmConfig {
                                    rng_seed: model_seed,
                                    ..config.fm_config()
                                };
                                let l2 = select_fm_penalty(&train, &base, &study.fm_l2_grid, study.cv_folds, model_seed)?;
                                let cfg = FmConfig { l2_penalty: l2, ..base };
                                (evaluate_rmse(&FmModel::train(&train, &cfg)?, &test)?, Some(l2))
                            }
                            SurrogateChoice::Oracle => unreachable!("rejected by config validation"),
                        };
                        out.push(RmseRow {
                            model,
                            n_layers: layers,
                            train_size: size,
                            repeat,
                            rmse,
                            l2_penalty: l2,
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, _>>()?;
        rows.extend(per_repeat.into_iter().flatten());
    }
    Ok(rows)
}

fn model_name(m: SurrogateChoice) -> &'static str {
    match m {
        SurrogateChoice::RandomForest => "random_forest",
        SurrogateChoice::FactorizationMachine => "factorization_machine",
        SurrogateChoice::Oracle => "oracle",
    }
}

/// Mean and standard error per (model, layers, train size), in first-seen order.
pub fn summarize_rmse(rows: &[RmseRow]) -> Vec<(SurrogateChoice, usize, usize, usize, f64, f64)> {
    let mut keys: Vec<(SurrogateChoice, usize, usize)> = Vec::new();
    for r in rows {
        let k = (r.model, r.n_layers, r.train_size);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(m, n, s)| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| (r.model, r.n_layers, r.train_size) == (m, n, s))
                .map(|r| r.rmse)
                .collect();
            let (mean, sem) = mean_and_sem(&v);
            (m, n, s, v.len(), mean, sem)
        })
        .collect()
}

/// `rmse-study`: surrogate test error against training-set size.
pub fn cmd_rmse_study(inv: &Invocation) -> Result<CommandReport, CommandError> {
    let config = start_run("rmse-study", None, inv)?;
    let rows = rmse_study(&config)?;
    write_file(&inv.out_dir.join("rmse_study.csv"), |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(RMSE_STUDY_HEADER)?;
        for r in &rows {
            c.write_record([
                model_name(r.model).to_string(),
                r.n_layers.to_string(),
                r.train_size.to_string(),
                r.repeat.to_string(),
                r.rmse.to_string(),
                r.l2_penalty.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    let summary = summarize_rmse(&rows);
    write_file(&inv.out_dir.join("rmse_summary.csv"), |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(RMSE_SUMMARY_HEADER)?;
        for (m, n, s, k, mean, sem) in &summary {
            c.write_record([
                model_name(*m).to_string(),
                n.to_string(),
                s.to_string(),
                k.to_string(),
                mean.to_string(),
                sem.to_string(),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(CommandReport {
        status: RunStatus::Success,
        message: format!("rmse-study: {} cells over {} groups", rows.len(), summary.len()),
    })
}

/// Best true FOM after each iteration against cumulative optimizer generations.
pub fn convergence_curve(records: &[IterationRecord]) -> Vec<(usize, usize, f64)> {
    let mut generations = 0;
    records
        .iter()
        .map(|r| {
            generations += r.generations;
            (r.iteration, generations, r.best_true_fom)
        })
        .collect()
}

/// Cumulative generations at which the curve first reaches `threshold`
/// (up to rounding ties); `None` if it never does.
pub fn generations_to_threshold(records: &[IterationRecord], threshold: f64) -> Option<usize> {
    convergence_curve(records)
        .into_iter()
        .find(|&(_, _, fom)| within_tie(-fom, -threshold))
        .map(|(_, g, _)| g)
}

/// Paired runs of one preset from a shared initial dataset and seed.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub preset: String,
    pub forest: LoopOutcome,
    pub fm: LoopOutcome,
}

impl ComparisonRun {
    /// Lower of the two final best FOMs.
    pub fn threshold(&self) -> f64 {
        self.forest.best_true_fom.min(self.fm.best_true_fom)
    }
}

/// Runs RF and FM loops for `preset_name` with the sections of `config` other
/// than the preset-controlled sizes, applying the `[compare]` caps.
pub fn compare_preset(config: &RunConfig, preset_name: &str) -> Result<ComparisonRun, CommandError> {
    let p = preset(preset_name).ok_or_else(|| ConfigError::UnknownPreset(preset_name.into()))?;
    let mut cell = config.clone();
    cell.problem.layers = p.layers;
    if cell.problem.thicknesses_nm.as_ref().is_some_and(|t| t.len() != p.layers) {
        cell.problem.thicknesses_nm = None;
    }
    cell.run.initial_dataset_size = p.initial_dataset_size;
    cell.run.max_iterations = config.compare.max_iterations.map_or(p.iterations, |c| c.min(p.iterations));
    cell.qga.max_generations = config.compare.max_generations.map_or(p.generations, |c| c.min(p.generations));
    cell.qga.population_size = p.population_size;
    let problem = cell.build_problem()?;
    let base = cell.loop_config();
    let initial = bootstrap_dataset(&problem, base.initial_dataset_size, &mut seeded(base.rng_seed, stream::DATASET))?;
    let run = |surrogate| {
        let cfg = crate::active_learning::LoopConfig { surrogate, ..base.clone() };
        run_loop_with(&cfg, &problem, initial.clone())
    };
    Ok(ComparisonRun {
        preset: preset_name.into(),
        forest: run(SurrogateChoice::RandomForest)?,
        fm: run(SurrogateChoice::FactorizationMachine)?,
    })
}

/// `compare`: paired RF and FM convergence for each configured preset.
pub fn cmd_compare(inv: &Invocation) -> Result<CommandReport, CommandError> {
    let config = start_run("compare", None, inv)?;
    let mut lines = Vec::new();
    for name in &config.compare.presets {
        let run = compare_preset(&config, name)?;
        write_file(&inv.out_dir.join(format!("compare_{name}.csv")), |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(COMPARE_HEADER)?;
            for (label, outcome) in [("random_forest", &run.forest), ("factorization_machine", &run.fm)] {
                for (it, g, fom) in convergence_curve(&outcome.records) {
                    c.write_record([label.to_string(), it.to_string(), g.to_string(), fom.to_string()])?;
                }
            }
            c.flush()?;
            Ok(())
        })?;
        write_loop_outputs(&inv.out_dir, &format!("{name}_random_forest_"), &run.forest)?;
        write_loop_outputs(&inv.out_dir, &format!("{name}_factorization_machine_"), &run.fm)?;
        let t = run.threshold();
        let show = |g: Option<usize>| g.map_or("never".to_string(), |g| g.to_string());
        lines.push(format!(
            "{name}: threshold {t}, generations RF {} FM {}",
            show(generations_to_threshold(&run.forest.records, t)),
            show(generations_to_threshold(&run.fm.records, t))
        ));
    }
    Ok(CommandReport {
        status: RunStatus::Success,
        message: lines.join("; "),
    })
}

/// `evaluate`: spectrum and FOM of one code.
pub fn cmd_evaluate(inv: &Invocation, code: &str) -> Result<CommandReport, CommandError> {
    let mut config = start_run("evaluate", None, inv)?;
    let code: StructureCode = code.parse()?;
    // The layer count follows the code unless thicknesses are listed per layer.
    let bits = config.problem.materials.len().trailing_zeros() as usize;
    if config.problem.thicknesses_nm.is_none() && bits > 0 && code.len().is_multiple_of(bits) {
        config.problem.layers = code.len() / bits;
    }
    let problem = config.build_problem()?;
    let spectrum = problem.spectrum(&code)?;
    let fom = problem.fom(&code)?.value();
    write_file(&inv.out_dir.join("spectrum.csv"), |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(SPECTRUM_HEADER)?;
        for (wl, r) in &spectrum {
            c.write_record([wl.to_string(), r.transmittance.to_string(), r.reflectance.to_string()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    #[derive(Serialize)]
    struct Summary {
        code: String,
        fom: f64,
        materials: Vec<String>,
    }
    write_json(
        &inv.out_dir.join("summary.json"),
        &Summary {
            code: code.to_string(),
            fom,
            materials: material_names(&problem, &code),
        },
    )?;
    Ok(CommandReport {
        status: RunStatus::Success,
        message: format!("{code}: FOM {fom}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invocation(dir: &Path, config: &str) -> Invocation {
        let path = dir.join("input.toml");
        fs::write(&path, config).unwrap();
        Invocation {
            config_path: Some(path),
            out_dir: dir.join("out"),
            ..Default::default()
        }
    }

    #[test]
    fn exhaustive_run_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let inv = invocation(dir.path(), "[problem]\nlayers = 3\n");
        let report = cmd_optimize(&inv, Algorithm::Exhaustive).unwrap();
        assert_eq!(report.status.exit_code(), 0);
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(inv.out_dir.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["evaluation_count"], 64);
        assert!(inv.out_dir.join("manifest.json").exists());
        let snapshot = RunConfig::load(&inv.out_dir.join("config.toml"), None).unwrap();
        assert_eq!(snapshot.problem.layers, 3);
    }

    #[test]
    fn exhaustive_refuses_large_spaces() {
        let dir = tempfile::tempdir().unwrap();
        let inv = invocation(dir.path(), "[problem]\nlayers = 11\n");
        assert!(matches!(
            cmd_optimize(&inv, Algorithm::Exhaustive),
            Err(CommandError::Baseline(BaselineError::TooLarge { .. }))
        ));
    }

    #[test]
    fn qga_run_writes_per_iteration_traces() {
        let dir = tempfile::tempdir().unwrap();
        let inv = invocation(
            dir.path(),
            "[problem]\nlayers = 3\n[run]\ninitial_dataset_size = 8\nmax_iterations = 3\n\
             [qga]\nmax_generations = 10\npopulation_size = 6\n[forest]\ntree_count = 10\n",
        );
        let report = cmd_optimize(&inv, Algorithm::Qga).unwrap();
        let records = crate::active_learning::read_iterations_csv(File::open(inv.out_dir.join("iterations.csv")).unwrap()).unwrap();
        assert!(!records.is_empty() && records.len() <= 3);
        for i in 0..records.len() {
            assert!(inv.out_dir.join(format!("qga_trace_{i}.csv")).exists());
        }
        let data = LabeledDataset::read_csv(File::open(inv.out_dir.join("dataset.csv")).unwrap()).unwrap();
        assert_eq!(data.len(), 8 + records.len());
        let exhausted = records.len() == 3 && report.status == RunStatus::BudgetExhausted;
        assert!(exhausted || report.status == RunStatus::Success);
    }

    #[test]
    fn refuses_to_overwrite_input_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        fs::write(&path, "[problem]\nlayers = 2\n").unwrap();
        let inv = Invocation {
            config_path: Some(path.clone()),
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        assert!(matches!(cmd_optimize(&inv, Algorithm::Exhaustive), Err(CommandError::Usage(_))));
        assert_eq!(fs::read_to_string(path).unwrap(), "[problem]\nlayers = 2\n");
    }

    #[test]
    fn study_rows_form_the_cartesian_product() {
        let mut config = RunConfig::default();
        config.study.layers = vec![3, 4];
        config.study.train_sizes = vec![10, 20];
        config.study.repeats = 2;
        config.study.test_size = 15;
        config.study.cv_folds = 3;
        config.forest.tree_count = 10;
        config.fm.epochs = 20;
        let rows = rmse_study(&config).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 2);
        assert!(rows.iter().all(|r| r.rmse.is_finite() && r.rmse >= 0.0));
        assert!(rows
            .iter()
            .all(|r| (r.model == SurrogateChoice::FactorizationMachine) == r.l2_penalty.is_some()));
        assert_eq!(summarize_rmse(&rows).len(), 2 * 2 * 2);
        assert_eq!(rmse_study(&config).unwrap(), rows);

        config.study.models = vec![SurrogateChoice::RandomForest];
        config.study.layers = vec![3];
        config.study.train_sizes = vec![10];
        config.study.repeats = 1;
        assert_eq!(rmse_study(&config).unwrap().len(), 1);
    }

    #[test]
    fn threshold_uses_cumulative_generations() {
        let code: StructureCode = "0101".parse().unwrap();
        let rec = |iteration, generations, best| IterationRecord {
            iteration,
            proposed_code: code.clone(),
            predicted_fom: 0.0,
            proposed_true_fom: best,
            duplicate: false,
            labeled_code: code.clone(),
            labeled_fom: best,
            dataset_size: 0,
            tmm_evaluations: 0,
            surrogate_evaluations: 0,
            generations,
            warm_start_weight: 0.0,
            memory_corrupted: false,
            best_true_fom: best,
            best_code: code.clone(),
        };
        let records = [rec(0, 40, 2.0), rec(1, 30, 1.5), rec(2, 50, 1.2)];
        assert_eq!(convergence_curve(&records)[2], (2, 120, 1.2));
        assert_eq!(generations_to_threshold(&records, 1.5), Some(70));
        assert_eq!(generations_to_threshold(&records, 1.2 + 1e-13), Some(120));
        assert_eq!(generations_to_threshold(&records, 1.0), None);
    }
}
