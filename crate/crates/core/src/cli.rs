//! Command-line front end. Exit codes: 0 success, 1 usage, 2 data, 3
//! numeric or run failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::checks;
use crate::data::{self, load_dataset, Dataset, DatasetName, FileChecksum, FoldPlan};
use crate::error::Error;
use crate::model::{self, DefaultContext};
use crate::train::{self, build_id, Comparison, ExperimentConfig, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUN: i32 = 3;

const GRADCHECK_TOLERANCE: f64 = 1e-4;
const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "contextualizer", version, about = "Train and probe Contextualizer sentence classifiers")]
pub struct Cli {
    /// Directory that receives every result and manifest.
    #[arg(long, global = true, default_value = "runs")]
    pub out: PathBuf,

    /// Dataset cache directory [default: $CONTEXTUALIZER_DATA or ./data].
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Install datasets into the cache from a local copy and list the registry.
    FetchData {
        /// Datasets to install or check [default: all].
        #[arg(long = "dataset")]
        datasets: Vec<String>,
        /// Directory holding the raw label files (one subdirectory per dataset or flat).
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Train a single cross-validation fold and save its best checkpoint.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
    /// Five-fold cross-validation; prints the run report as JSON.
    CrossValidate {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Finite-difference check of every autodiff op and a tiny full model.
    Gradcheck {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Factored attention against the explicit degree-3 tensor contraction.
    OracleCheck {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Instrumented multiply-accumulate counts per sequence length, as CSV.
    ComplexityProbe {
        /// Comma-separated sequence lengths.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
        n: Vec<usize>,
        /// Token dimension.
        #[arg(long, default_value_t = 520)]
        m: usize,
        /// Factorization rank.
        #[arg(long, default_value_t = 100)]
        u: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run (or reuse) the configuration grid of a result table and compare.
    Report {
        /// 2 (depth), 3 (default context) or 4 (datasets, learned embeddings).
        #[arg(long)]
        table: u8,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Re-run even when a finished report exists.
        #[arg(long)]
        force: bool,
        /// Only tabulate finished runs; never train.
        #[arg(long)]
        cached_only: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Experiment settings; a config file is applied first, flags override it.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Starting profile: frozen (500-d fixed vectors) or learned (250-d trained vectors).
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub dataset: Option<String>,
    /// Contextualization steps.
    #[arg(long = "K", alias = "k")]
    pub steps: Option<usize>,
    /// Share one attention triple across steps.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub recurrent: Option<bool>,
    #[arg(long)]
    pub default_context: Option<String>,
    /// Word vector size.
    #[arg(long = "v")]
    pub embedding_dim: Option<usize>,
    /// Position vector size.
    #[arg(long = "p")]
    pub position_dim: Option<usize>,
    /// Factorization rank.
    #[arg(long = "u")]
    pub rank: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub learn_embeddings: Option<bool>,
    #[arg(long)]
    pub min_count: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Failed(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Format(_) | Error::Input(_) | Error::Json(_) => EXIT_DATA,
        Error::Numeric(_) | Error::Diverged { .. } | Error::Contract(_) | Error::Shape { .. } => EXIT_RUN,
    }
}

impl ConfigArgs {
    pub fn resolve(&self) -> std::result::Result<ExperimentConfig, String> {
        let dataset: DatasetName = match &self.dataset {
            Some(d) => d.parse().map_err(|e: Error| e.to_string())?,
            None => DatasetName::Mr,
        };
        let mut cfg = match self.profile.as_deref() {
            None | Some("frozen") => ExperimentConfig::frozen_profile(dataset),
            Some("learned") => ExperimentConfig::learned_profile(dataset),
            Some(other) => return Err(format!("unknown profile {other:?}")),
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            cfg.apply_text(&text).map_err(|e| e.to_string())?;
            if self.dataset.is_some() {
                cfg.dataset = dataset;
            }
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.recurrent {
            cfg.recurrent = v;
        }
        if let Some(v) = &self.default_context {
            cfg.default_context = v.parse::<DefaultContext>().map_err(|e| e.to_string())?;
        }
        if let Some(v) = self.embedding_dim {
            cfg.embedding_dim = v;
        }
        if let Some(v) = self.position_dim {
            cfg.position_dim = v;
        }
        if let Some(v) = self.rank {
            cfg.rank = v;
        }
        if let Some(v) = self.learn_embeddings {
            cfg.learn_embeddings = v;
        }
        if let Some(v) = self.min_count {
            cfg.min_count = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.adam.learning_rate = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Everything needed to reproduce a command's outputs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub build: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub config: Option<ExperimentConfig>,
    pub seeds: Vec<(String, u64)>,
    pub datasets: Vec<DatasetManifest>,
}

#[derive(Debug, Serialize)]
pub struct DatasetManifest {
    pub name: DatasetName,
    pub documents: usize,
    pub checksums: Vec<FileChecksum>,
}

impl DatasetManifest {
    fn of(ds: &Dataset) -> Self {
        Self {
            name: ds.name,
            documents: ds.len(),
            checksums: ds.checksums.clone(),
        }
    }
}

struct Context {
    out: PathBuf,
    data: PathBuf,
    argv: Vec<String>,
}

impl Context {
    fn manifest(&self, command: &str) -> Manifest {
        Manifest {
            build: build_id(),
            command: command.to_string(),
            arguments: self.argv.clone(),
            config: None,
            seeds: Vec::new(),
            datasets: Vec::new(),
        }
    }

    fn write(&self, rel: &Path, contents: &str) -> CliResult<PathBuf> {
        let path = self.out.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn write_manifest(&self, dir: &Path, manifest: &Manifest) -> CliResult<()> {
        let json = serde_json::to_string_pretty(manifest).map_err(Error::from)? + "\n";
        self.write(&dir.join("manifest.json"), &json)?;
        Ok(())
    }

    fn load(&self, name: DatasetName) -> CliResult<Dataset> {
        Ok(load_dataset(name, &self.data)?)
    }
}

fn default_data_dir() -> PathBuf {
    std::env::var_os(data::DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let ctx = Context {
        out: cli.out.clone(),
        data: cli.data.clone().unwrap_or_else(default_data_dir),
        argv: argv.iter().skip(1).cloned().collect(),
    };
    match dispatch(&ctx, &cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Failed(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(ctx: &Context, command: &Command) -> CliResult<i32> {
    match command {
        Command::FetchData { datasets, from } => fetch_data(ctx, datasets, from.as_deref()),
        Command::Train { config, fold } => train_one(ctx, config, *fold),
        Command::CrossValidate { config } => cross_validate(ctx, config),
        Command::Gradcheck { seed } => gradcheck(ctx, *seed),
        Command::OracleCheck {
            instances,
            max_dim,
            seed,
        } => oracle_check(ctx, *instances, *max_dim, *seed),
        Command::ComplexityProbe { n, m, u, seed } => complexity_probe(ctx, n, *m, *u, *seed),
        Command::Report {
            table,
            jobs,
            force,
            cached_only,
            seed,
        } => report(ctx, *table, *jobs, *force, *cached_only, *seed),
    }
}

fn fetch_data(ctx: &Context, names: &[String], from: Option<&Path>) -> CliResult<i32> {
    let wanted: Vec<DatasetName> = if names.is_empty() {
        DatasetName::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| n.parse().map_err(|e: Error| Failure::Usage(e.to_string())))
            .collect::<CliResult<_>>()?
    };
    let mut manifest = ctx.manifest("fetch-data");
    let mut missing = 0;
    println!("dataset\texpected\tfound\tsha256");
    for name in wanted {
        if let Some(src) = from {
            match data::install_dataset(name, src, &ctx.data) {
                Ok(_) => info!("installed {name} into {}", ctx.data.display()),
                Err(e) => warn!("{name}: {e}"),
            }
        }
        let info = name.info();
        match load_dataset(name, &ctx.data) {
            Ok(ds) => {
                let sums: Vec<String> = ds.checksums.iter().map(|c| format!("{}={}", c.file, c.sha256)).collect();
                println!("{name}\t{}\t{}\t{}", info.expected_documents, ds.len(), sums.join(" "));
                manifest.datasets.push(DatasetManifest::of(&ds));
            }
            Err(e) => {
                missing += 1;
                println!("{name}\t{}\tmissing\t-", info.expected_documents);
                eprintln!("{name}: {e} (source: {})", info.source);
            }
        }
    }
    ctx.write_manifest(Path::new("fetch-data"), &manifest)?;
    Ok(if missing == 0 { EXIT_OK } else { EXIT_DATA })
}

fn resolve(args: &ConfigArgs) -> CliResult<ExperimentConfig> {
    args.resolve().map_err(Failure::Usage)
}

fn run_manifest(ctx: &Context, command: &str, cfg: &ExperimentConfig, ds: &Dataset) -> Manifest {
    let mut m = ctx.manifest(command);
    m.config = Some(cfg.clone());
    m.seeds = vec![("master".into(), cfg.seed), ("fold_plan".into(), cfg.seed)];
    m.datasets.push(DatasetManifest::of(ds));
    m
}

fn write_plan(ctx: &Context, dir: &Path, plan: &FoldPlan) -> CliResult<()> {
    let mut buf = Vec::new();
    plan.write_manifest(&mut buf).map_err(|e| Error::io(dir.join("folds.tsv"), e))?;
    ctx.write(&dir.join("folds.tsv"), &String::from_utf8_lossy(&buf))?;
    Ok(())
}

fn train_one(ctx: &Context, args: &ConfigArgs, fold: usize) -> CliResult<i32> {
    let cfg = resolve(args)?;
    if fold >= data::FOLDS {
        return Err(Failure::Usage(format!("--fold must be below {}", data::FOLDS)));
    }
    let ds = ctx.load(cfg.dataset)?;
    let plan = FoldPlan::make(&ds, cfg.seed)?;
    let dir = PathBuf::from(cfg.run_id()).join(format!("fold-{fold}"));
    ctx.write_manifest(&dir, &run_manifest(ctx, "train", &cfg, &ds))?;
    write_plan(ctx, &dir, &plan)?;
    ctx.write(&dir.join("config.txt"), &cfg.to_text())?;

    let outcome = train::train_fold(&cfg, &ds, &plan, fold)?;
    let mut ckpt = Vec::new();
    outcome.checkpoint.write_to(&mut ckpt)?;
    let ckpt_path = ctx.out.join(&dir).join("model.ctxz");
    fs::write(&ckpt_path, ckpt).map_err(|e| Error::io(&ckpt_path, e))?;
    let mut vocab = Vec::new();
    outcome
        .encoder
        .vocab
        .write_to(&mut vocab)
        .map_err(|e| Error::io(dir.join("vocab.txt"), e))?;
    ctx.write(&dir.join("vocab.txt"), &String::from_utf8_lossy(&vocab))?;
    ctx.write(&dir.join("embedding.txt"), &format!("{}\n", outcome.encoder.embeddings.header()))?;
    let json = serde_json::to_string_pretty(&outcome.result).map_err(Error::from)? + "\n";
    ctx.write(&dir.join("fold.json"), &json)?;
    print!("{json}");
    Ok(EXIT_OK)
}

/// Runs (or resumes) a full cross-validation and stores it under
/// `out/<run id>/`.
fn run_and_store(ctx: &Context, cfg: &ExperimentConfig, ds: &Dataset) -> CliResult<RunReport> {
    let dir = PathBuf::from(cfg.run_id());
    ctx.write_manifest(&dir, &run_manifest(ctx, "cross-validate", cfg, ds))?;
    write_plan(ctx, &dir, &FoldPlan::make(ds, cfg.seed)?)?;
    ctx.write(&dir.join("config.txt"), &cfg.to_text())?;
    let partial = ctx.out.join(&dir).join("folds.partial.csv");
    let _ = fs::write(&partial, format!("{}\n", train::CSV_HEADER));
    let report = train::run_experiment(cfg, ds, |fold| {
        let line = RunReport::new(cfg.clone(), ds, vec![fold.clone()]).csv_rows().join("\n") + "\n";
        let appended = fs::OpenOptions::new()
            .append(true)
            .open(&partial)
            .and_then(|mut f| std::io::Write::write_all(&mut f, line.as_bytes()));
        if let Err(e) = appended {
            warn!("{}: {e}", partial.display());
        }
        info!(
            "{}: fold {} test accuracy {:.4}",
            cfg.run_id(),
            fold.fold,
            fold.test_accuracy
        );
    })?;
    report.save(&ctx.out.join(&dir))?;
    let _ = fs::remove_file(&partial);
    Ok(report)
}

fn cross_validate(ctx: &Context, args: &ConfigArgs) -> CliResult<i32> {
    let cfg = resolve(args)?;
    let ds = ctx.load(cfg.dataset)?;
    let report = run_and_store(ctx, &cfg, &ds)?;
    print!("{}", report.to_json()?);
    Ok(EXIT_OK)
}

fn gradcheck(ctx: &Context, seed: u64) -> CliResult<i32> {
    let mut rows = checks::op_gradient_checks(seed)?;
    for (label, rec, dc) in [
        ("model n=3 m=6 u=2 K=2 regular learned-default", false, DefaultContext::Learned),
        ("model n=3 m=6 u=2 K=2 recurrent ones-default", true, DefaultContext::Ones),
    ] {
        let c = checks::end_to_end_gradient_check(3, 6, 2, 2, rec, dc, seed)?;
        rows.push(checks::NamedCheck {
            name: label.to_string(),
            max_rel_error: c.max_rel_error,
            entries: c.entries,
        });
    }
    let worst = rows.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let mut text = String::new();
    for r in &rows {
        text.push_str(&format!("{:<48} {:>10.3e} ({} entries)\n", r.name, r.max_rel_error, r.entries));
    }
    text.push_str(&format!("max relative error {worst:.3e} (tolerance {GRADCHECK_TOLERANCE:e})\n"));
    print!("{text}");
    let mut manifest = ctx.manifest("gradcheck");
    manifest.seeds.push(("gradcheck".into(), seed));
    ctx.write_manifest(Path::new("gradcheck"), &manifest)?;
    ctx.write(Path::new("gradcheck/result.txt"), &text)?;
    Ok(if worst < GRADCHECK_TOLERANCE { EXIT_OK } else { EXIT_RUN })
}

fn oracle_check(ctx: &Context, instances: usize, max_dim: usize, seed: u64) -> CliResult<i32> {
    if instances == 0 || max_dim == 0 {
        return Err(Failure::Usage("--instances and --max-dim must be positive".into()));
    }
    let worst = checks::factored_oracle_max_error(instances, max_dim, seed)?;
    let text = format!(
        "{instances} instances, u,m <= {max_dim}: max |factored - dense| = {worst:.3e} (tolerance {ORACLE_TOLERANCE:e})\n"
    );
    print!("{text}");
    let mut manifest = ctx.manifest("oracle-check");
    manifest.seeds.push(("oracle".into(), seed));
    ctx.write_manifest(Path::new("oracle-check"), &manifest)?;
    ctx.write(Path::new("oracle-check/result.txt"), &text)?;
    Ok(if worst < ORACLE_TOLERANCE { EXIT_OK } else { EXIT_RUN })
}

fn complexity_probe(ctx: &Context, lengths: &[usize], m: usize, u: usize, seed: u64) -> CliResult<i32> {
    if lengths.is_empty() || lengths.contains(&0) || m == 0 || u == 0 {
        return Err(Failure::Usage("lengths, --m and --u must be positive".into()));
    }
    let rows = model::probe(m, u, lengths, seed)?;
    let mut csv = String::from("n,contextualizer_macs,token_wise_macs,token_wise_pairwise_macs\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.n, r.contextualizer, r.token_wise, r.token_wise_pairwise));
    }
    print!("{csv}");
    if rows.len() >= 2 {
        let slope = |f: fn(&model::ProbeRow) -> u64| {
            model::loglog_slope(&rows.iter().map(|r| (r.n as f64, f(r) as f64)).collect::<Vec<_>>())
        };
        eprintln!(
            "log-log slope: contextualizer {:.3}, token-wise pairwise {:.3}",
            slope(|r| r.contextualizer),
            slope(|r| r.token_wise_pairwise)
        );
    }
    let mut manifest = ctx.manifest("complexity-probe");
    manifest.seeds.push(("probe".into(), seed));
    ctx.write_manifest(Path::new("complexity-probe"), &manifest)?;
    ctx.write(Path::new("complexity-probe/macs.csv"), &csv)?;
    Ok(EXIT_OK)
}

/// Finished report of `cfg` under `out`, if any.
pub fn cached_report(out: &Path, cfg: &ExperimentConfig) -> Option<RunReport> {
    let path = out.join(cfg.run_id()).join("report.json");
    let report = RunReport::load(&path).ok()?;
    (report.config == *cfg).then_some(report)
}

fn report(ctx: &Context, table: u8, jobs: usize, force: bool, cached_only: bool, seed: u64) -> CliResult<i32> {
    let grid = train::table_grid(table, seed).map_err(|e| Failure::Usage(e.to_string()))?;
    if jobs == 0 {
        return Err(Failure::Usage("--jobs must be positive".into()));
    }
    let mut reports: Vec<Option<RunReport>> = grid
        .iter()
        .map(|e| if force { None } else { cached_report(&ctx.out, &e.config) })
        .collect();
    let pending: Vec<usize> = (0..grid.len()).filter(|&i| reports[i].is_none()).collect();

    let mut manifest = ctx.manifest("report");
    manifest.seeds.push(("master".into(), seed));
    if !cached_only && !pending.is_empty() {
        let mut datasets: Vec<DatasetName> = pending.iter().map(|&i| grid[i].config.dataset).collect();
        datasets.sort();
        datasets.dedup();
        let loaded: Vec<Dataset> = datasets.iter().map(|&d| ctx.load(d)).collect::<CliResult<_>>()?;
        for ds in &loaded {
            manifest.datasets.push(DatasetManifest::of(ds));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let fresh: Vec<(usize, CliResult<RunReport>)> = pool.install(|| {
            pending
                .par_iter()
                .map(|&i| {
                    let cfg = &grid[i].config;
                    let ds = loaded.iter().find(|d| d.name == cfg.dataset).expect("dataset loaded");
                    info!("table {table}: running {}", cfg.run_id());
                    (i, run_and_store(ctx, cfg, ds))
                })
                .collect()
        });
        for (i, r) in fresh {
            reports[i] = Some(r?);
        }
    }
    let comparison = Comparison::new(table, &grid, &reports);
    let rendered = comparison.render();
    print!("{rendered}");
    ctx.write(Path::new(&format!("table-{table}.txt")), &rendered)?;
    let json = serde_json::to_string_pretty(&comparison).map_err(Error::from)? + "\n";
    ctx.write(Path::new(&format!("table-{table}.json")), &json)?;
    ctx.write_manifest(Path::new(&format!("table-{table}")), &manifest)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> ConfigArgs {
        #[derive(Parser)]
        struct Wrap {
            #[command(flatten)]
            c: ConfigArgs,
        }
        let mut v = vec!["x"];
        v.extend_from_slice(extra);
        Wrap::try_parse_from(v).unwrap().c
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("base.conf");
        fs::write(&path, "K = 5\nrecurrent = false\nseed = 3\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = args(&["--config", p, "--K", "10", "--recurrent"]).resolve().unwrap();
        assert_eq!((cfg.steps, cfg.recurrent, cfg.seed), (10, true, 3));
        let cfg = args(&["--config", p]).resolve().unwrap();
        assert_eq!((cfg.steps, cfg.recurrent), (5, false));
        let cfg = args(&["--recurrent=false", "--profile", "learned", "--dataset", "cr"]).resolve().unwrap();
        assert!(!cfg.recurrent && cfg.learn_embeddings);
        assert_eq!(cfg.dataset, DatasetName::Cr);
    }

    #[test]
    fn invalid_settings_are_usage_errors() {
        assert!(args(&["--default-context", "zeros"]).resolve().is_err());
        assert!(args(&["--u", "0"]).resolve().is_err());
        assert!(args(&["--profile", "huge"]).resolve().is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::Numeric("x")), EXIT_RUN);
        assert_eq!(
            exit_code(&Error::Diverged {
                epoch: 1,
                batch: 2,
                loss: f64::NAN
            }),
            EXIT_RUN
        );
    }
}
