//! Subcommand implementations.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use log::info;
use penaltysim::datagen::{generate, GeneratorConfig};
use penaltysim::features::{grouped_folds, write_feature_csv, BioTable, FeatureVector, PlayerBio};
use penaltysim::gametheory::{estimate_payoff, solve_minimax, Equilibrium, PayoffMatrix};
use penaltysim::io::{load_records, read_csv, save_records, write_csv};
use penaltysim::linkage::{load_overrides, merge, MergeConfig, SourceData};
use penaltysim::models::{
    calibration_bins, direction_dataset, distance_dataset, grid_search, nested_cv, threshold_accuracy, train, CalibrationBin,
    FoldResult, HyperParams, Task, ThresholdAccuracy,
};
use penaltysim::simulator::{
    advise, available_policies, default_range_grid, evaluate_policy, fit_uncertainty, offset_sweep, range_sweep,
    AdviceOptions, EmpiricalTables, FitGrid, GtMode, Models, SimulationSet, DEFAULT_OFFSETS,
};
use penaltysim::{DiveTiming, Error, GoalkeeperProfile, PenaltyRecord, PolicyKind, PolicySpec, Result, UncertaintyParams, Zone};
use serde::Serialize;

use crate::api::ServiceState;
use crate::cli::*;
use crate::pipeline::{build_set, create, features_for, invalid, load_model, load_tables, open, read_json};

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Merge(a) => run_merge(a),
        Command::Generate(a) => run_generate(a),
        Command::Featurize(a) => run_featurize(a),
        Command::Train(a) => run_train(a),
        Command::EvaluateModels(a) => run_evaluate_models(a),
        Command::SolveGame(a) => run_solve_game(a),
        Command::Simulate(a) => run_simulate(a),
        Command::SweepRanges(a) => run_sweep_ranges(a),
        Command::SweepOffset(a) => run_sweep_offset(a),
        Command::FitUncertainty(a) => run_fit(a),
        Command::Advise(a) => run_advise(a),
        Command::Serve(a) => run_serve(a),
    }
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => create(p)?.write_all(bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    write_csv(&mut bytes, rows)?;
    Ok(bytes)
}

// ------------------------------------------------------------- data prep

fn run_merge(a: MergeArgs) -> Result<()> {
    let source_a = SourceData::load_dir(&a.source_a)?;
    let source_b = SourceData::load_dir(&a.source_b)?;
    let overrides = match &a.overrides {
        Some(p) => load_overrides(p)?,
        None => Vec::new(),
    };
    let out = merge(&source_a, &source_b, &overrides, &MergeConfig { time_tolerance: a.time_tolerance })?;
    save_records(&a.out, &out.records)?;
    info!("merged {} kicks into {}", out.records.len(), a.out.display());
    emit(a.report.as_deref(), &json_bytes(&out.report)?)
}

fn run_generate(a: GenerateArgs) -> Result<()> {
    let mut config: GeneratorConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => GeneratorConfig::default(),
    };
    config.n_kicks = a.n;
    config.seed = a.seed;
    let records = generate(&config)?;
    save_records(&a.out, &records)?;
    info!("wrote {} records to {}", records.len(), a.out.display());
    Ok(())
}

fn run_featurize(a: FeaturizeArgs) -> Result<()> {
    let records = load_records(&a.records)?;
    let bio = match &a.bio {
        Some(p) => Some(BioTable::new(read_csv::<PlayerBio, _>(open(p)?)?)),
        None => None,
    };
    let features = penaltysim::features::extract_all(&records, bio.as_ref())?;
    let mut bytes = Vec::new();
    write_feature_csv(&mut bytes, &records, &features)?;
    emit(Some(&a.out), &bytes)
}

// ---------------------------------------------------------------- models

/// Rows and labels of the training set for `task`, with the record index of
/// each row.
fn dataset(task: Task, records: &[PenaltyRecord], features: &[FeatureVector]) -> (Vec<usize>, Vec<FeatureVector>, Vec<f64>) {
    let (idx, labels) = match task {
        Task::Multiclass3 => direction_dataset(records, features),
        Task::Regression => distance_dataset(records, features),
    };
    let rows = idx.iter().map(|i| features[*i].clone()).collect();
    (idx, rows, labels)
}

fn row_folds(records: &[PenaltyRecord], idx: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    let folds = grouped_folds(records, k, seed)?;
    Ok(idx.iter().map(|i| folds[*i]).collect())
}

fn run_train(a: TrainArgs) -> Result<()> {
    let task: Task = a.task.into();
    let records = load_records(&a.records)?;
    let features = features_for(&records, a.features.as_deref())?;
    let (idx, rows, labels) = dataset(task, &records, &features);
    if rows.is_empty() {
        return Err(invalid("no training rows in the records"));
    }
    let hp = if a.tune {
        let seed = a.seed.ok_or_else(|| invalid("--tune requires --seed"))?;
        let folds = row_folds(&records, &idx, a.folds, seed)?;
        let (best, scores) = grid_search(task, &rows, &labels, &folds, &HyperParams::search_grid())?;
        info!("grid scores: {scores:?}");
        best
    } else {
        HyperParams::new(a.learning_rate, a.max_depth, a.n_trees)
    };
    let model = train(task, &rows, &labels, &hp)?;
    model.save_file(&a.out)?;
    info!("trained on {} rows with {hp:?}", rows.len());
    if let Some(path) = &a.tables_out {
        emit(Some(path), &json_bytes(&EmpiricalTables::estimate(&records))?)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ModelReport {
    task: Task,
    n_rows: usize,
    folds: Vec<FoldResult>,
    mean: f64,
    std: f64,
    base_mean: f64,
    base_std: f64,
    folds_beating_base: usize,
    /// Direction only: one-vs-rest over the three classes, pooled.
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<Vec<CalibrationBin>>,
    /// Distance only: side-of-threshold agreement of out-of-fold predictions.
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold_accuracy: Option<Vec<ThresholdAccuracy>>,
}

#[derive(Debug, Serialize)]
struct OofRow<'a> {
    kick_id: &'a str,
    fold: usize,
    label: f64,
    model: String,
    base: String,
}

const THRESHOLDS: [f64; 5] = [2.5, 2.6, 2.7, 2.8, 2.9];

fn run_evaluate_models(a: EvaluateModelsArgs) -> Result<()> {
    let task: Task = a.task.into();
    let records = load_records(&a.records)?;
    let features = features_for(&records, a.features.as_deref())?;
    let (idx, rows, labels) = dataset(task, &records, &features);
    if rows.is_empty() {
        return Err(invalid("no rows to evaluate in the records"));
    }
    let folds = row_folds(&records, &idx, a.folds, a.seed)?;
    let grid = model_grid(&a.grid);
    let cv = nested_cv(task, &rows, &labels, &folds, &grid)?;

    let (calibration, thresholds) = match task {
        Task::Multiclass3 => {
            let mut probs = Vec::new();
            let mut hits = Vec::new();
            for (out, y) in cv.oof.iter().zip(&labels) {
                for (k, p) in out.iter().enumerate() {
                    probs.push(*p);
                    hits.push(*y as usize == k);
                }
            }
            (Some(calibration_bins(&probs, &hits, 10)?), None)
        }
        Task::Regression => {
            let preds: Vec<f64> = cv.oof.iter().map(|o| o[0]).collect();
            let mean = labels.iter().sum::<f64>() / labels.len() as f64;
            let acc = THRESHOLDS.iter().map(|t| threshold_accuracy(&preds, &labels, *t, mean)).collect::<Result<_>>()?;
            (None, Some(acc))
        }
    };
    let report = ModelReport {
        task,
        n_rows: rows.len(),
        folds_beating_base: cv.folds.iter().filter(|f| f.metric < f.base_metric).count(),
        folds: cv.folds.clone(),
        mean: cv.mean,
        std: cv.std,
        base_mean: cv.base_mean,
        base_std: cv.base_std,
        calibration,
        threshold_accuracy: thresholds,
    };
    if let Some(path) = &a.oof_out {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        let oof: Vec<OofRow> = idx
            .iter()
            .enumerate()
            .map(|(r, i)| OofRow { kick_id: &records[*i].kick_id, fold: folds[r], label: labels[r], model: join(&cv.oof[r]), base: join(&cv.oof_base[r]) })
            .collect();
        emit(Some(path), &csv_bytes(&oof)?)?;
    }
    emit(a.out.as_deref(), &json_bytes(&report)?)
}

fn model_grid(g: &GridArgs) -> Vec<HyperParams> {
    let lrs = if g.learning_rates.is_empty() { vec![0.01, 0.05, 0.1] } else { g.learning_rates.clone() };
    let depths = if g.max_depths.is_empty() { vec![3, 4, 5, 6] } else { g.max_depths.clone() };
    let sizes = if g.n_trees.is_empty() { vec![50, 100, 250] } else { g.n_trees.clone() };
    let mut grid = Vec::new();
    for lr in &lrs {
        for d in &depths {
            for n in &sizes {
                grid.push(HyperParams::new(*lr, *d, *n));
            }
        }
    }
    grid
}

// ------------------------------------------------------------------ game

/// Reads a payoff CSV. A first cell that is not a number marks the
/// labelled layout: header row of keeper actions, leading column of kicker
/// actions.
pub fn read_payoff_csv(path: &Path) -> Result<PayoffMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(open(path)?);
    let lines: Vec<Vec<String>> = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    let lines: Vec<Vec<String>> = lines.into_iter().filter(|l| l.iter().any(|c| !c.is_empty())).collect();
    let first = lines.first().ok_or_else(|| invalid(format!("{}: empty payoff file", path.display())))?;
    let labelled = first.first().map_or(true, |c| c.parse::<f64>().is_err());
    let number = |c: &str| c.parse::<f64>().map_err(|_| invalid(format!("{}: `{c}` is not a number", path.display())));
    if !labelled {
        let values: Vec<Vec<f64>> = lines.iter().map(|l| l.iter().map(|c| number(c)).collect()).collect::<Result<_>>()?;
        return PayoffMatrix::from_values(&values);
    }
    let col_labels: Vec<String> = first[1..].to_vec();
    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    for l in &lines[1..] {
        row_labels.push(l[0].clone());
        values.push(l[1..].iter().map(|c| number(c)).collect::<Result<Vec<f64>>>()?);
    }
    let mut m = PayoffMatrix::from_values(&values)?;
    if col_labels.len() != m.n_cols() {
        return Err(invalid(format!("{}: header has {} labels for {} columns", path.display(), col_labels.len(), m.n_cols())));
    }
    m.row_labels = row_labels;
    m.col_labels = col_labels;
    Ok(m)
}

pub fn format_equilibrium(eq: &Equilibrium) -> String {
    let mut s = format!("value\t{:.6}\n", eq.value);
    for (side, mix) in [("kicker", &eq.kicker), ("keeper", &eq.keeper)] {
        for (action, p) in mix.actions.iter().zip(&mix.probabilities) {
            s.push_str(&format!("{side}\t{action}\t{p:.6}\n"));
        }
    }
    s
}

fn run_solve_game(a: SolveGameArgs) -> Result<()> {
    let mut matrix = match (&a.payoff, &a.records) {
        (Some(p), _) => read_payoff_csv(p)?,
        (None, Some(r)) => estimate_payoff(&load_records(r)?),
        (None, None) => return Err(invalid("--payoff or --records is required")),
    };
    if a.restrict {
        matrix = matrix.restrict_to_supported()?;
    }
    let eq = solve_minimax(&matrix)?;
    if a.json {
        emit(None, &json_bytes(&eq)?)
    } else {
        emit(None, format_equilibrium(&eq).as_bytes())
    }
}

// ------------------------------------------------------------- simulator

struct Loaded {
    records: Vec<PenaltyRecord>,
    features: Vec<FeatureVector>,
    tables: EmpiricalTables,
    params: UncertaintyParams,
}

fn load_inputs(i: &SimInputs) -> Result<Loaded> {
    let records = load_records(&i.records)?;
    let features = features_for(&records, i.features.as_deref())?;
    let tables = match &i.tables {
        Some(p) => load_tables(p)?,
        None => EmpiricalTables::estimate(&records),
    };
    let params = UncertaintyParams { mu: i.mu, rho: i.rho };
    params.validate()?;
    Ok(Loaded { records, features, tables, params })
}

impl KeeperArgs {
    /// Profile from `--gk` or the flags; unset correct-corner probabilities
    /// come from the tables.
    fn profile(&self, tables: &EmpiricalTables, early_fallback: Option<f64>) -> Result<GoalkeeperProfile> {
        let mut gk = match &self.gk {
            Some(p) => read_json::<GoalkeeperProfile>(p)?,
            None => {
                let early = self
                    .early_range
                    .or(early_fallback)
                    .ok_or_else(|| invalid("--early-range (or --gk) is required"))?;
                tables.profile(early, self.late_range)
            }
        };
        if let Some(v) = self.early_range {
            gk.early_range = v;
        }
        if self.late_range.is_some() {
            gk.late_range = self.late_range;
        }
        if let Some(p) = self.p_late {
            gk.p_late_correct_independent = p;
            gk.p_late_correct_dependent = p;
        }
        if let Some(p) = self.p_late_independent {
            gk.p_late_correct_independent = p;
        }
        if let Some(p) = self.p_late_dependent {
            gk.p_late_correct_dependent = p;
        }
        if let Some(p) = self.p_early_dependent {
            gk.p_early_correct_dependent = p;
        }
        if let Some(o) = self.start_offset {
            gk.start_offset = o;
        }
        gk.validate()?;
        Ok(gk)
    }
}

impl PolicyArgs {
    /// Requested policies, or all the keeper can run. An explicit policy the
    /// keeper cannot run is an error.
    fn specs(&self, gk: &GoalkeeperProfile, offset: f64) -> Result<Vec<PolicySpec>> {
        let kinds = if self.policies.is_empty() {
            available_policies(gk, self.gt_mix)
        } else {
            let mut kinds = self.policies.clone();
            kinds.dedup();
            kinds
        };
        kinds
            .into_iter()
            .map(|kind| {
                let spec = PolicySpec { kind, offset, early_direction_mix: self.early_mix, gt_mix: self.gt_mix };
                spec.validate()?;
                if kind != PolicyKind::GameTheoretic && kind.uses_late_dive() && !gk.can_dive_late() {
                    return Err(invalid(format!("policy {kind} needs a late range (--late-range)")));
                }
                Ok(spec)
            })
            .collect()
    }
}

fn simulation_set(loaded: &Loaded, inputs: &SimInputs, specs: &[PolicySpec]) -> Result<SimulationSet> {
    let direction = if specs.iter().any(|s| s.kind.needs_direction_model()) {
        Some(load_model(inputs.direction_model.as_deref(), Task::Multiclass3, "--direction-model")?)
    } else {
        None
    };
    let distance = if specs.iter().any(|s| s.kind.needs_distance_model()) {
        Some(load_model(inputs.distance_model.as_deref(), Task::Regression, "--distance-model")?)
    } else {
        None
    };
    let set = build_set(
        &loaded.records,
        &loaded.features,
        Models { direction: direction.as_ref(), distance: distance.as_ref() },
        inputs.situation,
    )?;
    if set.is_empty() {
        return Err(invalid("no on-target kicks to evaluate"));
    }
    Ok(set)
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    policy: PolicyKind,
    n_kicks: usize,
    aggregate: f64,
}

#[derive(Debug, Serialize)]
struct KickRow<'a> {
    policy: PolicyKind,
    kick_id: &'a str,
    dive_timing: DiveTiming,
    p_correct: f64,
    p_save_given_correct: f64,
    p_save: f64,
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let loaded = load_inputs(&a.inputs)?;
    let gk = a.keeper.profile(&loaded.tables, None)?;
    let specs = a.policy.specs(&gk, a.offset)?;
    let set = simulation_set(&loaded, &a.inputs, &specs)?;
    let mode = if a.gt_sample { GtMode::Sampled(a.seed.ok_or_else(|| invalid("--gt-sample requires --seed"))?) } else { GtMode::Expectation };
    let evals = specs
        .iter()
        .map(|s| evaluate_policy(&set, s, &gk, &loaded.params, &loaded.tables, mode))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &a.out {
        let rows: Vec<KickRow> = evals
            .iter()
            .flat_map(|e| {
                e.kicks.iter().map(|k| KickRow {
                    policy: e.policy.kind,
                    kick_id: &k.kick_id,
                    dive_timing: k.dive_timing_used,
                    p_correct: k.p_correct,
                    p_save_given_correct: k.p_save_given_correct,
                    p_save: k.p_save,
                })
            })
            .collect();
        emit(Some(path), &csv_bytes(&rows)?)?;
    }
    let summary: Vec<SummaryRow> = evals.iter().map(|e| SummaryRow { policy: e.policy.kind, n_kicks: e.kicks.len(), aggregate: e.aggregate }).collect();
    emit(None, &csv_bytes(&summary)?)
}

fn or_default(v: &[f64], default: &[f64]) -> Vec<f64> {
    if v.is_empty() { default.to_vec() } else { v.to_vec() }
}

fn run_sweep_ranges(a: SweepRangesArgs) -> Result<()> {
    let loaded = load_inputs(&a.inputs)?;
    let (late_default, early_default) = default_range_grid();
    let late = or_default(&a.late_ranges, &late_default);
    let early = or_default(&a.early_ranges, &early_default);
    let top_early = early.iter().cloned().fold(f64::NAN, f64::max);
    let top_late = late.iter().cloned().fold(f64::NAN, f64::max).min(top_early);
    let mut keeper = a.keeper.profile(&loaded.tables, Some(top_early))?;
    keeper.late_range = keeper.late_range.or(Some(top_late));
    let specs = a.policy.specs(&keeper, 0.0)?;
    let set = simulation_set(&loaded, &a.inputs, &specs)?;
    let rows = range_sweep(&set, &specs, &late, &early, &keeper, &loaded.params, &loaded.tables)?;
    emit(a.out.as_deref(), &csv_bytes(&rows)?)
}

fn run_sweep_offset(a: SweepOffsetArgs) -> Result<()> {
    let loaded = load_inputs(&a.inputs)?;
    let gk = a.keeper.profile(&loaded.tables, None)?;
    let specs = a.policy.specs(&gk, 0.0)?;
    let mut set = simulation_set(&loaded, &a.inputs, &specs)?;
    if a.natural_only {
        set = set.filter(|k| k.zone == Zone::Natural && !k.dependent);
        if set.is_empty() {
            return Err(invalid("no natural-corner kicks to evaluate"));
        }
    }
    let offsets = or_default(&a.offsets, &DEFAULT_OFFSETS);
    let rows = offset_sweep(&set, &specs, &offsets, &gk, &loaded.params, &loaded.tables)?;
    emit(a.out.as_deref(), &csv_bytes(&rows)?)
}

fn run_fit(a: FitArgs) -> Result<()> {
    let records = load_records(&a.records)?;
    let d = FitGrid::default();
    let grid = FitGrid {
        early_ranges: or_default(&a.early_ranges, &d.early_ranges),
        late_ranges: or_default(&a.late_ranges, &d.late_ranges),
        mus: or_default(&a.mus, &d.mus),
        rhos: or_default(&a.rhos, &d.rhos),
    };
    let fit = fit_uncertainty(&records, &grid)?;
    emit(a.out.as_deref(), &json_bytes(&fit)?)
}

fn run_advise(a: AdviseArgs) -> Result<()> {
    let features: FeatureVector = match (&a.context, &a.feature_json) {
        (Some(p), _) => read_json::<penaltysim::features::KickContext>(p)?.to_features()?,
        (None, Some(p)) => read_json(p)?,
        (None, None) => return Err(invalid("--context or --features-json is required")),
    };
    let tables = match &a.tables {
        Some(p) => load_tables(p)?,
        None => return Err(Error::MissingModel("empirical tables (no path given; use --tables)".into())),
    };
    let gk = a.keeper.profile(&tables, None)?;
    let params = UncertaintyParams { mu: a.mu, rho: a.rho };
    let options = AdviceOptions { offset: a.offset, early_direction_mix: a.early_mix, gt_mix: a.gt_mix };
    let direction = load_model(a.direction_model.as_deref(), Task::Multiclass3, "--direction-model")?;
    let distance = match &a.distance_model {
        Some(p) => Some(load_model(Some(p), Task::Regression, "--distance-model")?),
        None => None,
    };
    let advice = advise(&features, &gk, &params, &tables, Models { direction: Some(&direction), distance: distance.as_ref() }, &options, a.seed)?;
    emit(a.out.as_deref(), &json_bytes(&advice)?)
}

// ---------------------------------------------------------------- service

pub fn service_state(a: &ServeArgs) -> Result<ServiceState> {
    let optional = |path: &Option<std::path::PathBuf>, task, flag| -> Result<_> {
        path.as_deref().map(|p| load_model(Some(p), task, flag)).transpose()
    };
    Ok(ServiceState {
        direction: optional(&a.direction_model, Task::Multiclass3, "--direction-model")?,
        distance: optional(&a.distance_model, Task::Regression, "--distance-model")?,
        tables: a.tables.as_deref().map(load_tables).transpose()?,
        records_dir: a.records_dir.clone(),
    })
}

fn run_serve(a: ServeArgs) -> Result<()> {
    let state = Arc::new(service_state(&a)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((a.bind.as_str(), a.port)).await?;
        info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, crate::server::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(())
}
