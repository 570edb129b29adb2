use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fdpnet_core::net::{featurize_records, read_training_set, train, write_model, write_training_set, TrainConfig};
use fdpnet_core::pipeline::{
    aggregate, evaluate_tables, ingest_csv, select_external_with_table, surface_from_tables, system_tables,
    training_records, write_aggregate_csv, write_results_csv, write_surface_csv, IngestOptions,
};
use fdpnet_core::synth::{generate_corpus, read_manifest, write_manifest, write_system_csv, CorpusSpec, DEFAULT_BETA_RANGE};
use fdpnet_core::trex::default_v_grid;
use fdpnet_core::{
    Analytical, CalibrationGrid, Deflation, Error, EstimatorKind, Family, FdpEstimator, FeatureMeta, LossSpec,
    MlpParams, Seed, SyntheticSystem, TrexConfig,
};
use rayon::prelude::*;

use crate::config::{DummyCount, List, Resolver};
use crate::output::{now, OutputSet, RunManifest};
use crate::{
    BuildTrainSetArgs, Command, CommonArgs, DatagenArgs, EvaluateArgs, SelectArgs, SelectorArgs, TrainArgs,
    UsageError,
};

struct RunContext {
    resolver: Resolver,
    seed: Seed,
    out: OutputSet,
    out_dir: PathBuf,
    command: &'static str,
    started: String,
}

impl RunContext {
    fn new(command: &'static str, common: &CommonArgs) -> Result<Self> {
        let started = now();
        let mut resolver = Resolver::load(common.config.as_deref())?;
        let seed = Seed(resolver.required("seed", common.seed)?);
        let out_dir = resolver.path("out", common.out.clone())?.unwrap_or_else(|| PathBuf::from("."));
        if let Some(threads) = resolver.optional("threads", common.threads)? {
            if threads == 0 {
                return Err(UsageError("--threads must be >= 1".into()).into());
            }
            if rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_err() {
                log::warn!("worker pool already initialized; --threads {threads} ignored");
            }
        }
        let out = OutputSet::new(&out_dir)?;
        Ok(RunContext { resolver, seed, out, out_dir, command, started })
    }

    /// Writes the run manifest and moves every output into place.
    fn finish(mut self) -> Result<()> {
        let outputs = self.out.names();
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed.0,
            config: self.resolver.echo(),
            outputs,
            started: self.started.clone(),
            finished: now(),
        };
        self.out.write(format!("run_manifest.{}.json", self.command), |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest)?;
            Ok(w.write_all(b"\n")?)
        })?;
        let placed = self.out.commit()?;
        eprintln!("wrote {} files to {}", placed.len(), self.out_dir.display());
        Ok(())
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match command {
        Command::Datagen(a) => datagen(a),
        Command::BuildTrainSet(a) => build_train_set(a),
        Command::Train(a) => train_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Select(a) => select(a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_families(s: &str) -> Result<Vec<Family>> {
    match s.trim() {
        "training" | "all" => Ok(Family::TRAINING.to_vec()),
        list => list
            .split(',')
            .map(|f| f.parse::<Family>().map_err(|e| usage(e.to_string())))
            .collect(),
    }
}

fn default_grid_list() -> List<f64> {
    List(default_v_grid())
}

/// Selector settings shared by `build-train-set`, `evaluate` and `select`.
fn selector(r: &mut Resolver, a: &SelectorArgs) -> Result<(TrexConfig, Vec<f64>)> {
    let k = r.or_default("k", a.k, 20usize)?;
    let l = r.or_default("l", a.l, DummyCount::PerColumn)?;
    let t_max = r.or_default("t-max", a.t_max, 10usize)?;
    let v_grid = r.or_default("v-grid", a.v_grid.clone(), default_grid_list())?.0;
    let deflation = r.or_default("deflation", a.deflation, Deflation::default())?;
    let trex = TrexConfig { k, l: l.as_option(), t_max, deflation };
    trex.validate()?;
    // Alpha is irrelevant here; 1 only lets the grid shape be validated up front.
    CalibrationGrid::new(v_grid.clone(), t_max, 1.0)?;
    Ok((trex, v_grid))
}

fn regenerate(manifest: &Path) -> Result<Vec<SyntheticSystem>> {
    let records = read_manifest(manifest)?;
    if records.is_empty() {
        return Err(Error::Data { path: manifest.to_path_buf(), reason: "manifest has no systems".into() }.into());
    }
    let systems = records
        .par_iter()
        .map(|rec| rec.regenerate())
        .collect::<fdpnet_core::Result<Vec<_>>>()
        .with_context(|| format!("regenerating systems from {}", manifest.display()))?;
    Ok(systems)
}

fn load_model(path: &Path) -> Result<MlpParams> {
    Ok(fdpnet_core::net::load_model(path)?)
}

fn datagen(a: DatagenArgs) -> Result<()> {
    let mut cx = RunContext::new("datagen", &a.common)?;
    let r = &mut cx.resolver;
    let count = r.or_default("systems", a.systems, 2000usize)?;
    let n = r.or_default("n", a.n, 15usize)?;
    let p = r.or_default("p", a.p, 30usize)?;
    let s = r.or_default("s", a.s, 3usize)?;
    let snr = r.or_default("snr", a.snr, List(vec![0.3, 1.0, 3.0]))?.0;
    let families = parse_families(&r.or_default("families", a.families, "training".to_string())?)?;
    let beta = r.or_default("beta-range", a.beta_range, List(vec![DEFAULT_BETA_RANGE.0, DEFAULT_BETA_RANGE.1]))?.0;
    let dump = r.switch("dump-csv", a.dump_csv)?;
    let [lo, hi] = beta[..] else {
        return Err(usage(format!("--beta-range needs two values, got {}", beta.len())));
    };
    let spec = CorpusSpec { n, p, s, snr_levels: snr, families, beta_range: (lo, hi) };
    // Fail on bad shapes before generating anything.
    spec.config_for(cx.seed, 0).validate()?;

    let systems = generate_corpus(&spec, count, cx.seed)?;
    cx.out.write("manifest.jsonl", |w| Ok(write_manifest(&mut *w, &systems)?))?;
    if dump {
        for (i, sys) in systems.iter().enumerate() {
            let mut y = Vec::new();
            cx.out.write(format!("systems/{i:06}_x.csv"), |w| Ok(write_system_csv(sys, &mut *w, &mut y)?))?;
            cx.out.write(format!("systems/{i:06}_y.csv"), |w| Ok(w.write_all(&y)?))?;
        }
    }
    cx.finish()
}

fn build_train_set(a: BuildTrainSetArgs) -> Result<()> {
    let mut cx = RunContext::new("build-train-set", &a.common)?;
    let manifest = cx.resolver.required_path("manifest", a.manifest)?;
    let (trex, v_grid) = selector(&mut cx.resolver, &a.selector)?;
    let systems = regenerate(&manifest)?;
    let records = training_records(&systems, &trex, &v_grid, cx.seed)?;
    cx.out.write("train_set.txt", |w| Ok(write_training_set(&mut *w, &records)?))?;
    cx.finish()
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let mut cx = RunContext::new("train", &a.common)?;
    let r = &mut cx.resolver;
    let path = r.required_path("train-set", a.train_set)?;
    let epochs = r.or_default("epochs", a.epochs, 10usize)?;
    let lr = r.or_default("lr", a.lr, 1e-3)?;
    let batch_size = r.or_default("batch-size", a.batch_size, 256usize)?;
    let w = r.or_default("w", a.w, 1.1)?;
    let p_max = r.optional("p-max", a.p_max)?;
    let t_max = r.or_default("t-max", a.t_max, 10usize)?;
    let loss = LossSpec::new(w)?;
    if batch_size == 0 || t_max == 0 || !(lr > 0.0 && lr.is_finite()) {
        return Err(usage("--batch-size and --t-max must be >= 1 and --lr > 0"));
    }

    let file = File::open(&path).map_err(|e| Error::Data { path: path.clone(), reason: e.to_string() })?;
    let records = read_training_set(BufReader::new(file), &path)?;
    if records.is_empty() {
        return Err(Error::Data { path, reason: "training set is empty".into() }.into());
    }
    let widest = records.iter().map(|rec| rec.phi.len()).max().unwrap_or(1);
    let p_max = p_max.unwrap_or(widest);
    cx.resolver.optional("p-max", Some(p_max))?;
    let meta = FeatureMeta { p_max, t_max_norm: t_max as f64 };
    let examples = featurize_records(&records, &meta)?;
    let cfg = TrainConfig { epochs, lr, batch_size, loss, seed: cx.seed };
    let (model, trace) = train(&examples, meta, &cfg)?;

    cx.out.write("model.fdpnet", |w| Ok(write_model(&model, &mut *w)?))?;
    cx.out.write("loss_trace.csv", |w| {
        writeln!(w, "epoch,mean_loss")?;
        for (e, loss) in trace.iter().enumerate() {
            writeln!(w, "{},{loss}", e + 1)?;
        }
        Ok(())
    })?;
    cx.finish()
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let mut cx = RunContext::new("evaluate", &a.common)?;
    let r = &mut cx.resolver;
    let manifest = r.required_path("manifest", a.manifest)?;
    let model_path = r.required_path("model", a.model)?;
    let alpha = r.required("alpha", a.alpha)?;
    let (trex, v_grid) = selector(r, &a.selector)?;
    let grid = CalibrationGrid::new(v_grid, trex.t_max, alpha)?;

    let model = load_model(&model_path)?;
    let systems = regenerate(&manifest)?;
    if let Some(sys) = systems.iter().find(|s| s.config.p > model.meta.p_max) {
        return Err(Error::Dimension(format!("system has p = {} but the model's p_max is {}", sys.config.p, model.meta.p_max)).into());
    }
    let tables = system_tables(&systems, &trex, cx.seed)?;
    let methods: [&dyn FdpEstimator; 2] = [&Analytical, &model];
    let records = evaluate_tables(&systems, &tables, &methods, &grid)?;
    let rows = aggregate(&records);
    let surface = surface_from_tables(&systems, &tables, &model, &grid)?;

    cx.out.write("results.csv", |w| Ok(write_results_csv(&mut *w, &records)?))?;
    cx.out.write("aggregate.csv", |w| Ok(write_aggregate_csv(&mut *w, &rows)?))?;
    cx.out.write("surface.csv", |w| Ok(write_surface_csv(&mut *w, &surface)?))?;
    for row in &rows {
        println!(
            "{:<10} snr={:<6} FDR={:.3}±{:.3} TPR={:.3}±{:.3} (n={})",
            row.method.to_string(),
            row.snr,
            row.fdr_mean,
            row.fdr_std,
            row.tpr_mean,
            row.tpr_std,
            row.n_systems
        );
    }
    println!("overestimation fraction {:.3}", surface.overestimation_fraction);
    cx.finish()
}

fn select(a: SelectArgs) -> Result<()> {
    let mut cx = RunContext::new("select", &a.common)?;
    let r = &mut cx.resolver;
    let x = r.required_path("x", a.x)?;
    let y = r.required_path("y", a.y)?;
    let header = r.switch("header", a.header)?;
    let truth = r.path("truth", a.truth)?;
    let model_path = r.path("model", a.model)?;
    let default_estimator = if model_path.is_some() { "learned" } else { "analytical" };
    let estimator = r.or_default("estimator", a.estimator, default_estimator.to_string())?;
    let alpha = r.required("alpha", a.alpha)?;
    let (trex, v_grid) = selector(r, &a.selector)?;
    let grid = CalibrationGrid::new(v_grid, trex.t_max, alpha)?;
    let kind = match estimator.as_str() {
        "analytical" => EstimatorKind::Analytical,
        "learned" => EstimatorKind::Learned,
        other => return Err(usage(format!("unknown estimator {other:?}; expected analytical or learned"))),
    };
    if kind == EstimatorKind::Learned && model_path.is_none() {
        return Err(usage("the learned estimator needs --model"));
    }

    let model = model_path.as_deref().map(load_model).transpose()?;
    let options = IngestOptions { header, truth, p_max: model.as_ref().filter(|_| kind == EstimatorKind::Learned).map(|m| m.meta.p_max) };
    let data = ingest_csv(&x, &y, &options)?;
    let est: &dyn FdpEstimator = match (&model, kind) {
        (Some(m), EstimatorKind::Learned) => m,
        _ => &Analytical,
    };
    let (report, table) = select_external_with_table(&data, est, &trex, &grid, cx.seed)?;

    cx.out.write("report.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        Ok(w.write_all(b"\n")?)
    })?;
    cx.out.write("occurrence.csv", |w| Ok(table.write_csv(&mut *w)?))?;
    println!(
        "selected {} of {} columns: {:?} (v*={}, T*={})",
        report.selected.len(),
        report.p,
        report.selected,
        report.v_star.map_or("-".to_string(), |v| v.to_string()),
        report.t_star.map_or("-".to_string(), |t| t.to_string()),
    );
    if let Some(m) = &report.metrics {
        println!("FDP {:.4} TPP {:.4}", m.fdp, m.tpp);
    }
    cx.finish()
}
