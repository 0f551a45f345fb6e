//! Run configuration: TOML files layered over built-in defaults and the
//! per-size presets.
//!
//! Resolution order, later wins: defaults, preset fragment (`n6` … `n20`),
//! user file, command-line overrides. Tables merge key by key.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::active_learning::{preset, LoopConfig, Preset, SurrogateChoice, PRESETS};
use crate::baselines::{CgaConfig, DEFAULT_MAX_CODE_LENGTH};
use crate::encoding::MaterialPalette;
use crate::optics::{require_bundled, MaterialTable, SolarSpectrum, SpectralGrid, BUNDLED_MATERIALS};
use crate::problem::TrcProblem;
use crate::qga::{QgaConfig, RotationSchedule};
use crate::surrogate::{FmConfig, ForestConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{}line {line}: {message}", field.as_ref().map(|f| format!("field `{f}`, ")).unwrap_or_default())]
    Parse {
        field: Option<String>,
        line: usize,
        message: String,
    },

    #[error("field `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Invalid {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("unknown preset `{0}`; expected one of n6, n8, n10, n12, n14, n16, n20")]
    UnknownPreset(String),

    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub layers: usize,
    /// Applied to every layer unless `thicknesses_nm` is given.
    pub thickness_nm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thicknesses_nm: Option<Vec<f64>>,
    pub wavelength_start_nm: f64,
    pub wavelength_end_nm: f64,
    pub wavelength_step_nm: f64,
    pub ambient_n: f64,
    pub substrate_n: f64,
    /// Material names in label order.
    pub materials: Vec<String>,
    /// CSV tables by material name; names without a file use bundled data.
    pub material_files: std::collections::BTreeMap<String, PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solar_file: Option<PathBuf>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            layers: 6,
            thickness_nm: crate::problem::DEFAULT_THICKNESS_NM,
            thicknesses_nm: None,
            wavelength_start_nm: crate::problem::DEFAULT_BAND_NM.0,
            wavelength_end_nm: crate::problem::DEFAULT_BAND_NM.1,
            wavelength_step_nm: crate::problem::DEFAULT_STEP_NM,
            ambient_n: 1.0,
            substrate_n: 1.0,
            materials: BUNDLED_MATERIALS.iter().map(|s| s.to_string()).collect(),
            material_files: Default::default(),
            solar_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub initial_dataset_size: usize,
    pub max_iterations: usize,
    pub convergence_repeats: usize,
    pub surrogate: SurrogateChoice,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            initial_dataset_size: 25,
            max_iterations: 10,
            convergence_repeats: 3,
            surrogate: SurrogateChoice::RandomForest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QgaSection {
    pub population_size: usize,
    pub max_generations: usize,
    pub mutation_rate: f64,
    pub theta_max: f64,
    pub theta_min: f64,
    pub stagnation_fraction: f64,
    pub memory_corruption_prob: f64,
}

impl Default for QgaSection {
    fn default() -> Self {
        Self {
            population_size: 25,
            max_generations: 100,
            mutation_rate: 0.001,
            theta_max: 0.1 * PI,
            theta_min: 0.01 * PI,
            stagnation_fraction: 0.5,
            memory_corruption_prob: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestSection {
    pub tree_count: usize,
    /// Omit for unlimited depth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_subsample: f64,
    pub bootstrap: bool,
}

impl Default for ForestSection {
    fn default() -> Self {
        let f = ForestConfig::default();
        Self {
            tree_count: f.tree_count,
            max_depth: f.max_depth,
            min_samples_leaf: f.min_samples_leaf,
            feature_subsample: f.feature_subsample,
            bootstrap: f.bootstrap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmSection {
    pub latent_rank: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
}

impl Default for FmSection {
    fn default() -> Self {
        let f = FmConfig::default();
        Self {
            latent_rank: f.latent_rank,
            learning_rate: f.learning_rate,
            epochs: f.epochs,
            l2_penalty: f.l2_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CgaSection {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Omit for `1 / code_length`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    pub elitism_count: usize,
    pub tournament_size: usize,
}

impl Default for CgaSection {
    fn default() -> Self {
        let c = CgaConfig::default();
        Self {
            population_size: c.population_size,
            generations: c.generations,
            crossover_rate: c.crossover_rate,
            mutation_rate: c.mutation_rate,
            elitism_count: c.elitism_count,
            tournament_size: c.tournament_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExhaustiveSection {
    pub max_code_length: usize,
}

impl Default for ExhaustiveSection {
    fn default() -> Self {
        Self {
            max_code_length: DEFAULT_MAX_CODE_LENGTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    /// Any of `random_forest`, `factorization_machine`.
    pub models: Vec<SurrogateChoice>,
    pub layers: Vec<usize>,
    pub train_sizes: Vec<usize>,
    pub repeats: usize,
    pub test_size: usize,
    pub cv_folds: usize,
    /// Candidate FM penalties, picked per training set by cross-validation.
    pub fm_l2_grid: Vec<f64>,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            models: vec![SurrogateChoice::RandomForest, SurrogateChoice::FactorizationMachine],
            layers: vec![8, 10, 16, 20],
            train_sizes: vec![25, 50, 75, 100],
            repeats: 10,
            test_size: 200,
            cv_folds: 5,
            fm_l2_grid: vec![1e-4, 1e-2, 1e-1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub presets: Vec<String>,
    /// Caps applied to each preset to keep comparisons at desk scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            presets: vec!["n8".into(), "n16".into()],
            max_iterations: None,
            max_generations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub problem: ProblemSection,
    pub run: RunSection,
    pub qga: QgaSection,
    pub forest: ForestSection,
    pub fm: FmSection,
    pub cga: CgaSection,
    pub exhaustive: ExhaustiveSection,
    pub study: StudySection,
    pub compare: CompareSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            problem: ProblemSection::default(),
            run: RunSection::default(),
            qga: QgaSection::default(),
            forest: ForestSection::default(),
            fm: FmSection::default(),
            cga: CgaSection::default(),
            exhaustive: ExhaustiveSection::default(),
            study: StudySection::default(),
            compare: CompareSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

/// The TOML fragment a preset contributes.
pub fn preset_fragment(p: &Preset) -> toml::Table {
    let text = format!(
        "preset = \"{}\"\n[problem]\nlayers = {}\n[run]\ninitial_dataset_size = {}\nmax_iterations = {}\n\
         [qga]\nmax_generations = {}\npopulation_size = {}\n",
        p.name, p.layers, p.initial_dataset_size, p.iterations, p.generations, p.population_size
    );
    text.parse().expect("preset fragment is valid TOML")
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Dotted key assigned on `line`, including its `[section]`.
fn key_on_line(text: &str, line: usize) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let current = lines.get(line.checked_sub(1)?)?;
    let key = current.split('=').next()?.trim();
    if key.is_empty() || key.starts_with('[') || !current.contains('=') {
        return None;
    }
    let section = lines[..line - 1]
        .iter()
        .rev()
        .map(|l| l.trim())
        .find(|l| l.starts_with('[') && l.ends_with(']'))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    Some(match section {
        Some(s) => format!("{s}.{key}"),
        None => key.to_string(),
    })
}

/// Line where `field` (dotted) is assigned in `text`, if anywhere.
fn line_of_field(text: &str, field: &str) -> Option<usize> {
    let total = text.lines().count();
    (1..=total).find(|&l| key_on_line(text, l).as_deref() == Some(field))
}

fn toml_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let line = e.span().map_or(0, |s| line_of(text, s.start));
    ConfigError::Parse {
        field: key_on_line(text, line),
        line,
        message: e.message().to_string(),
    }
}

impl RunConfig {
    /// Resolves defaults, then the preset (from `preset_override` or the
    /// file's `preset` key), then the file contents.
    pub fn from_toml_str(text: &str, preset_override: Option<&str>) -> Result<Self, ConfigError> {
        // Typed parse of the file alone, for errors that point into it.
        let _: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        let user: toml::Table = text.parse().map_err(|e| toml_error(text, &e))?;
        let preset_name = preset_override
            .map(str::to_string)
            .or_else(|| user.get("preset").and_then(|v| v.as_str()).map(str::to_string));
        let mut table = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
        if let Some(name) = &preset_name {
            let p = preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?;
            merge(&mut table, preset_fragment(&p));
        }
        merge(&mut table, user);
        if let Some(name) = preset_name {
            table.insert("preset".into(), toml::Value::String(name));
        }
        let config: RunConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
            field: None,
            line: 0,
            message: e.message().to_string(),
        })?;
        config.validate().map_err(|e| match e {
            ConfigError::Invalid { field, message, .. } => ConfigError::Invalid {
                line: line_of_field(text, &field),
                field,
                message,
            },
            other => other,
        })?;
        Ok(config)
    }

    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        Self::from_toml_str("", Some(name))
    }

    /// Loads a file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path, preset_override: Option<&str>) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut config = Self::from_toml_str(&text, preset_override)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: String| {
            Err(ConfigError::Invalid {
                field: field.into(),
                line: None,
                message,
            })
        };
        let p = &self.problem;
        if p.layers == 0 {
            return invalid("problem.layers", "must be at least 1".into());
        }
        if let Some(t) = &p.thicknesses_nm {
            if t.len() != p.layers {
                return invalid("problem.thicknesses_nm", format!("has {} entries for {} layers", t.len(), p.layers));
            }
        }
        if !(p.wavelength_step_nm > 0.0 && p.wavelength_end_nm > p.wavelength_start_nm) {
            return invalid("problem.wavelength_step_nm", "band must be non-empty with a positive step".into());
        }
        if self.run.initial_dataset_size < 2 {
            return invalid("run.initial_dataset_size", "must be at least 2".into());
        }
        if self.run.max_iterations == 0 {
            return invalid("run.max_iterations", "must be at least 1".into());
        }
        if self.run.convergence_repeats == 0 {
            return invalid("run.convergence_repeats", "must be at least 1".into());
        }
        for (field, v) in [
            ("qga.mutation_rate", self.qga.mutation_rate),
            ("qga.memory_corruption_prob", self.qga.memory_corruption_prob),
            ("cga.crossover_rate", self.cga.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(field, format!("must be a probability, got {v}"));
            }
        }
        if let Some(m) = self.cga.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return invalid("cga.mutation_rate", format!("must be a probability, got {m}"));
            }
        }
        if self.qga.population_size == 0 {
            return invalid("qga.population_size", "must be at least 1".into());
        }
        if self.qga.max_generations == 0 {
            return invalid("qga.max_generations", "must be at least 1".into());
        }
        if !(self.qga.theta_min > 0.0 && self.qga.theta_max >= self.qga.theta_min) {
            return invalid("qga.theta_min", "need theta_max ≥ theta_min > 0".into());
        }
        if !(self.qga.stagnation_fraction > 0.0 && self.qga.stagnation_fraction <= 1.0) {
            return invalid("qga.stagnation_fraction", "must be in (0, 1]".into());
        }
        self.forest_config().validate().map_err(|e| ConfigError::Invalid {
            field: "forest".into(),
            line: None,
            message: e.to_string(),
        })?;
        self.fm_config().validate().map_err(|e| ConfigError::Invalid {
            field: "fm".into(),
            line: None,
            message: e.to_string(),
        })?;
        self.cga_config().validate().map_err(|e| ConfigError::Invalid {
            field: "cga".into(),
            line: None,
            message: e.to_string(),
        })?;
        if self.study.repeats == 0 || self.study.test_size == 0 || self.study.cv_folds < 2 {
            return invalid("study", "repeats and test_size must be positive and cv_folds at least 2".into());
        }
        if self.study.models.contains(&SurrogateChoice::Oracle) {
            return invalid("study.models", "the oracle has no prediction error to study".into());
        }
        for name in &self.compare.presets {
            if preset(name).is_none() {
                return invalid("compare.presets", format!("unknown preset `{name}`"));
            }
        }
        Ok(())
    }

    pub fn qga_config(&self) -> QgaConfig {
        QgaConfig {
            population_size: self.qga.population_size,
            mutation_rate: self.qga.mutation_rate,
            schedule: RotationSchedule {
                theta_max: self.qga.theta_max,
                theta_min: self.qga.theta_min,
                max_generations: self.qga.max_generations,
            },
            stagnation_fraction: self.qga.stagnation_fraction,
            memory_corruption_prob: self.qga.memory_corruption_prob,
            rng_seed: self.run.seed,
        }
    }

    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig {
            tree_count: self.forest.tree_count,
            max_depth: self.forest.max_depth,
            min_samples_leaf: self.forest.min_samples_leaf,
            feature_subsample: self.forest.feature_subsample,
            bootstrap: self.forest.bootstrap,
            rng_seed: self.run.seed,
        }
    }

    pub fn fm_config(&self) -> FmConfig {
        FmConfig {
            latent_rank: self.fm.latent_rank,
            learning_rate: self.fm.learning_rate,
            epochs: self.fm.epochs,
            l2_penalty: self.fm.l2_penalty,
            rng_seed: self.run.seed,
        }
    }

    pub fn cga_config(&self) -> CgaConfig {
        CgaConfig {
            population_size: self.cga.population_size,
            generations: self.cga.generations,
            crossover_rate: self.cga.crossover_rate,
            mutation_rate: self.cga.mutation_rate,
            elitism_count: self.cga.elitism_count,
            tournament_size: self.cga.tournament_size,
            rng_seed: self.run.seed,
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            initial_dataset_size: self.run.initial_dataset_size,
            max_iterations: self.run.max_iterations,
            convergence_repeats: self.run.convergence_repeats,
            surrogate: self.run.surrogate,
            qga: self.qga_config(),
            forest: self.forest_config(),
            fm: self.fm_config(),
            rng_seed: self.run.seed,
        }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Builds the optical problem, reading any material or solar files.
    pub fn build_problem(&self) -> Result<TrcProblem, ConfigError> {
        let p = &self.problem;
        let io = |path: &Path, e: String| ConfigError::Io {
            path: path.to_path_buf(),
            message: e,
        };
        let invalid = |field: &str, message: String| ConfigError::Invalid {
            field: field.into(),
            line: None,
            message,
        };
        let mut materials = Vec::with_capacity(p.materials.len());
        for name in &p.materials {
            let table = match p.material_files.get(name) {
                Some(file) => {
                    let path = self.resolve(file);
                    let f = fs::File::open(&path).map_err(|e| io(&path, e.to_string()))?;
                    MaterialTable::from_csv(name.clone(), f).map_err(|e| io(&path, e.to_string()))?
                }
                None => require_bundled(name).map_err(|e| invalid("problem.materials", e.to_string()))?,
            };
            materials.push(Arc::new(table));
        }
        for name in p.material_files.keys() {
            if !p.materials.contains(name) {
                return Err(invalid("problem.material_files", format!("`{name}` is not listed in problem.materials")));
            }
        }
        let palette = MaterialPalette::new(materials).map_err(|e| invalid("problem.materials", e.to_string()))?;
        let solar = match &p.solar_file {
            Some(file) => {
                let path = self.resolve(file);
                let f = fs::File::open(&path).map_err(|e| io(&path, e.to_string()))?;
                SolarSpectrum::from_csv(f).map_err(|e| io(&path, e.to_string()))?
            }
            None => crate::optics::bundled_solar(),
        };
        let grid = SpectralGrid::uniform(&solar, p.wavelength_start_nm, p.wavelength_end_nm, p.wavelength_step_nm)
            .map_err(|e| invalid("problem.wavelength_start_nm", e.to_string()))?;
        let thicknesses = p.thicknesses_nm.clone().unwrap_or_else(|| vec![p.thickness_nm; p.layers]);
        TrcProblem::new(palette, thicknesses, grid, p.ambient_n, p.substrate_n)
            .map_err(|e| invalid("problem", e.to_string()))
    }
}

/// Names of the bundled presets.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}
