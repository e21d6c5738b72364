//! Artifact loading shared by the subcommands and the service.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use penaltysim::features::{extract_all, read_feature_csv, FeatureVector};
use penaltysim::io::load_records;
use penaltysim::models::{BoostedModel, Task};
use penaltysim::simulator::{EmpiricalTables, Models, SimulationSet};
use penaltysim::{Error, PenaltyRecord, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Which kicks a run looks at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Situation {
    #[default]
    All,
    InGame,
    Shootout,
}

impl Situation {
    pub fn admits(self, r: &PenaltyRecord) -> bool {
        match self {
            Situation::All => true,
            Situation::InGame => !r.is_shootout,
            Situation::Shootout => r.is_shootout,
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(std::io::BufReader::new(open(path)?)).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Features aligned with `records`: read from a feature CSV when given,
/// extracted from the records otherwise.
pub fn features_for(records: &[PenaltyRecord], path: Option<&Path>) -> Result<Vec<FeatureVector>> {
    let Some(path) = path else { return extract_all(records, None) };
    let (ids, fvs) = read_feature_csv(open(path)?)?;
    let by_id: HashMap<&str, &FeatureVector> = ids.iter().map(String::as_str).zip(&fvs).collect();
    records
        .iter()
        .map(|r| {
            by_id
                .get(r.kick_id.as_str())
                .map(|fv| (*fv).clone())
                .ok_or_else(|| invalid(format!("{}: no features for kick {}", path.display(), r.kick_id)))
        })
        .collect()
}

/// Loads a model artifact and checks its task. `flag` names the option
/// that supplies the path, for the error message.
pub fn load_model(path: Option<&Path>, task: Task, flag: &str) -> Result<BoostedModel> {
    let path = path.ok_or_else(|| Error::MissingModel(format!("{} model (no path given; use {flag})", task_name(task))))?;
    let model = BoostedModel::load_file(path)?;
    if model.task != task {
        return Err(Error::WrongTask { expected: format!("{task:?}"), found: format!("{:?}", model.task) });
    }
    Ok(model)
}

pub fn task_name(task: Task) -> &'static str {
    match task {
        Task::Multiclass3 => "direction",
        Task::Regression => "distance",
    }
}

pub fn load_tables(path: &Path) -> Result<EmpiricalTables> {
    let tables: EmpiricalTables = read_json(path)?;
    tables.validate()?;
    Ok(tables)
}

/// Simulation set over the records admitted by `situation`.
pub fn build_set(records: &[PenaltyRecord], features: &[FeatureVector], models: Models<'_>, situation: Situation) -> Result<SimulationSet> {
    let (recs, fvs): (Vec<PenaltyRecord>, Vec<FeatureVector>) = records
        .iter()
        .zip(features)
        .filter(|(r, _)| situation.admits(r))
        .map(|(r, f)| (r.clone(), f.clone()))
        .unzip();
    SimulationSet::build(&recs, &fvs, models)
}

/// Resolves a dataset name to a record file under `dir`. Names are plain
/// file stems, so a reference cannot leave the directory.
pub fn dataset_path(dir: &Path, name: &str) -> Result<PathBuf> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if !ok {
        return Err(invalid(format!("dataset: `{name}` is not a valid dataset name")));
    }
    ["csv", "jsonl"]
        .iter()
        .map(|ext| dir.join(format!("{name}.{ext}")))
        .find(|p| p.is_file())
        .ok_or_else(|| invalid(format!("dataset: unknown dataset `{name}`")))
}

pub fn load_dataset(dir: &Path, name: &str) -> Result<Vec<PenaltyRecord>> {
    load_records(&dataset_path(dir, name)?)
}
