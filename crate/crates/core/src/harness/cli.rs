//! The `dyntree` command line: `fit`, `predict`, `bf`, `optimize`, `al`,
//! `classify` and `bench`.
//!
//! Tables go out as CSV with a header row, design traces as JSON. Output
//! goes to `--out` when given and to stdout otherwise; progress summaries go
//! to stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use super::experiments::{
    active_learning_experiment, bayes_factor_experiment, classification_experiment, friedman_experiment,
    optimization_experiment, parabola_data, DesignSizes, RunSettings,
};
use super::metrics::{mean_sd, misclassification};
use super::testfn::TestFunction;
use crate::data::{one_hot_encode, CsvSchema, DataStore, Response, ResponseKind, Table};
use crate::design::{active_learn_loop, initial_design, optimize_loop, Bounds, DesignConfig, Heuristic};
use crate::error::{Error, Result};
use crate::leaf::LeafModel;
use crate::particle::{Cloud, FilterConfig, PredictiveSummary};
use crate::rng::substream;
use crate::tree::TreePrior;

#[derive(Debug, Parser)]
#[command(name = "dyntree", version, about = "Dynamic trees fit by particle learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream a CSV through the filter and write a checkpoint.
    Fit(FitArgs),
    /// Predict from a checkpoint over a query CSV or a grid.
    Predict(PredictArgs),
    /// Log Bayes factor trajectories over random reorderings.
    Bf(BfArgs),
    /// Minimize a test function with expected improvement.
    Optimize(OptimizeArgs),
    /// Active learning on a test function.
    Al(AlArgs),
    /// Fit a multinomial-leaf classifier and label a query set.
    Classify(ClassifyArgs),
    /// Run a named benchmark end to end.
    Bench(BenchArgs),
}

/// Filter settings shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    #[arg(long, default_value_t = 1000)]
    pub particles: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Conditioning prefix for the marginal likelihood (model default if unset).
    #[arg(long)]
    pub t0: Option<usize>,
    /// Raise the minimum number of rows per leaf.
    #[arg(long)]
    pub min_leaf: Option<usize>,
}

impl FilterArgs {
    fn prior(&self) -> Result<TreePrior> {
        let p = TreePrior::new(self.alpha, self.beta)?;
        Ok(match self.min_leaf {
            Some(m) => p.with_min_leaf(m),
            None => p,
        })
    }

    fn config(&self, model: LeafModel) -> Result<FilterConfig> {
        if self.particles == 0 {
            return Err(Error::Config("--particles must be positive".into()));
        }
        let mut cfg = FilterConfig::new(model).particles(self.particles).seed(self.seed).prior(self.prior()?);
        cfg.t0 = self.t0;
        Ok(cfg)
    }

    fn settings(&self) -> Result<RunSettings> {
        let mut s = RunSettings::new(self.particles, self.seed);
        s.prior = self.prior()?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    pub response: String,
    /// The response holds class labels 0..C-1.
    #[arg(long)]
    pub class: bool,
    /// Categorical covariate columns to one-hot encode.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Leaf model; multinomial for class responses, constant otherwise.
    #[arg(long)]
    pub leaf: Option<LeafModel>,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Query CSV; every column not listed in --drop is a covariate.
    #[arg(long, conflicts_with = "grid")]
    pub query: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,
    /// Points per dimension of a grid over the training data's bounding box.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BfArgs {
    /// Data CSV; the parabola sample is used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Size of the generated parabola sample.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value = "linear")]
    pub leaf_a: LeafModel,
    #[arg(long, default_value = "constant")]
    pub leaf_b: LeafModel,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value = "exp2d")]
    pub function: TestFunction,
    #[arg(long, default_value = "constant")]
    pub leaf: LeafModel,
    /// Size of the initial Latin hypercube design.
    #[arg(long, default_value_t = 10)]
    pub init: usize,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    #[arg(long, default_value_t = 200)]
    pub candidates: usize,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// JSON trace path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlArgs {
    #[arg(long, default_value = "sincauchy")]
    pub function: TestFunction,
    #[arg(long, default_value = "linear")]
    pub leaf: LeafModel,
    #[arg(long, default_value = "alc")]
    pub heuristic: Heuristic,
    #[arg(long, default_value_t = 10)]
    pub init: usize,
    #[arg(long, default_value_t = 40)]
    pub rounds: usize,
    #[arg(long, default_value_t = 20)]
    pub candidates: usize,
    /// Points per dimension of the RMSE holdout grid.
    #[arg(long, default_value_t = 200)]
    pub holdout: usize,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "class")]
    pub response: String,
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Query CSV with the same columns; the training inputs when absent.
    #[arg(long)]
    pub query: Option<PathBuf>,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Benchmark {
    /// Linear vs constant Bayes factors on the parabola.
    Parabola,
    /// Out-of-sample RMSE on the Friedman function.
    Friedman,
    /// ALM and ALC active learning on sin/Cauchy.
    Sincauchy,
    /// Expected-improvement search on the 2-d exponential.
    Exp2d,
    /// Three-class synthetic classification.
    Classify,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub name: Benchmark,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Restrict to one leaf model where the benchmark compares several.
    #[arg(long)]
    pub leaf: Option<LeafModel>,
    /// Restrict the active learning benchmark to one heuristic.
    #[arg(long)]
    pub heuristic: Option<Heuristic>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Bf(a) => bf(a),
        Command::Optimize(a) => optimize(a),
        Command::Al(a) => al(a),
        Command::Classify(a) => classify(a),
        Command::Bench(a) => bench(a),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io { path: p.into(), source: e })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn io_err(out: Option<&Path>) -> impl Fn(io::Error) -> Error + '_ {
    move |e| Error::Io { path: out.map_or_else(|| "<stdout>".into(), Path::to_path_buf), source: e }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn read_store(path: &Path, response: &str, class: bool, categorical: &[String]) -> Result<(DataStore, Vec<String>)> {
    let table = Table::read(path)?;
    let schema = if class { CsvSchema::class(response) } else { CsvSchema::real(response) };
    if categorical.is_empty() {
        table.into_store(&schema)
    } else {
        let cats: Vec<&str> = categorical.iter().map(String::as_str).collect();
        let (store, mapping) = one_hot_encode(&table, &cats, &schema)?;
        Ok((store, mapping.iter().map(|c| c.name()).collect()))
    }
}

fn fit(a: FitArgs) -> Result<()> {
    let (store, _) = read_store(&a.data, &a.response, a.class, &a.categorical)?;
    let model = a.leaf.unwrap_or(if a.class { LeafModel::Multinomial } else { LeafModel::Constant });
    let cloud = Cloud::fit(a.filter.config(model)?, &store)?;
    cloud.save(&a.out)?;
    eprintln!(
        "fit {} rows, {} leaves per particle, log marginal {:.6}",
        cloud.t(),
        cloud.mean_leaves(),
        cloud.log_marginal_estimate()
    );
    Ok(())
}

fn bounding_grid(store: &DataStore, per_dim: usize) -> Result<Vec<Vec<f64>>> {
    let d = store.dim();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for (x, _) in store.rows() {
        for (r, &v) in ranges.iter_mut().zip(x) {
            *r = (r.0.min(v), r.1.max(v));
        }
    }
    for r in &mut ranges {
        if r.0 >= r.1 {
            *r = (r.0 - 0.5, r.0 + 0.5);
        }
    }
    Ok(Bounds::new(&ranges)?.grid(per_dim))
}

fn query_points(table: &Table, drop: &[String]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    for name in drop {
        table.column(name)?;
    }
    let cols: Vec<usize> = (0..table.headers.len()).filter(|&c| !drop.contains(&table.headers[c])).collect();
    let names = cols.iter().map(|&c| table.headers[c].clone()).collect();
    let mut pts = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        let mut x = Vec::with_capacity(cols.len());
        for &c in &cols {
            match row[c].parse::<f64>() {
                Ok(v) if v.is_finite() => x.push(v),
                _ => return Err(Error::Parse { row: r + 1, column: table.headers[c].clone(), cell: row[c].clone() }),
            }
        }
        pts.push(x);
    }
    Ok((names, pts))
}

fn write_predictions<W: Write + ?Sized>(
    out: &mut W,
    cloud: &Cloud,
    names: &[String],
    pts: &[Vec<f64>],
) -> Result<Vec<PredictiveSummary>> {
    let preds: Vec<PredictiveSummary> = pts.par_iter().map(|x| cloud.predict(x)).collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = names.to_vec();
    match cloud.store().kind() {
        ResponseKind::Real => header.extend(["mean", "variance", "lower", "upper"].map(String::from)),
        ResponseKind::Class { classes } => {
            header.extend((0..classes).map(|c| format!("p{c}")));
            header.extend(["class", "entropy"].map(String::from));
        }
    }
    w.write_record(&header)?;
    for (x, p) in pts.iter().zip(&preds) {
        let mut rec: Vec<String> = x.iter().map(f64::to_string).collect();
        match p {
            PredictiveSummary::Real { mean, variance, lower, upper } => {
                rec.extend([mean.to_string(), fmt_opt(*variance), lower.to_string(), upper.to_string()]);
            }
            PredictiveSummary::Class { probs, class, entropy } => {
                rec.extend(probs.iter().map(f64::to_string));
                rec.extend([class.to_string(), entropy.to_string()]);
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(None))?;
    Ok(preds)
}

fn predict(a: PredictArgs) -> Result<()> {
    let cloud = Cloud::load(&a.checkpoint)?;
    let (names, pts) = match (&a.query, a.grid) {
        (Some(q), _) => query_points(&Table::read(q)?, &a.drop)?,
        (None, Some(n)) => {
            let names = (1..=cloud.store().dim()).map(|j| format!("x{j}")).collect();
            (names, bounding_grid(cloud.store(), n)?)
        }
        (None, None) => return Err(Error::Config("predict needs --query or --grid".into())),
    };
    let mut out = sink(a.out.as_deref())?;
    write_predictions(&mut out, &cloud, &names, &pts)?;
    out.flush().map_err(io_err(a.out.as_deref()))
}

fn bf(a: BfArgs) -> Result<()> {
    let data = match &a.data {
        Some(p) => read_store(p, &a.response, false, &[])?.0,
        None => parabola_data(a.n, a.filter.seed),
    };
    let dim = data.dim();
    let t0 = a.filter.t0.unwrap_or(a.leaf_a.default_t0(dim).max(a.leaf_b.default_t0(dim)));
    let reps = bayes_factor_experiment(&data, a.leaf_a, a.leaf_b, a.reps, t0, a.filter.settings()?, None)?;

    let mut out = sink(a.out.as_deref())?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["rep", "t", "log_bf"])?;
    for r in &reps {
        for &(t, v) in &r.trajectory {
            w.write_record([r.rep.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    if let Some(first) = reps.first() {
        for (k, &(t, _)) in first.trajectory.iter().enumerate() {
            let m = reps.iter().map(|r| r.trajectory[k].1).sum::<f64>() / reps.len() as f64;
            w.write_record(["mean".to_string(), t.to_string(), m.to_string()])?;
        }
    }
    w.flush().map_err(io_err(a.out.as_deref()))?;
    drop(w);
    out.flush().map_err(io_err(a.out.as_deref()))?;

    let finals: Vec<f64> = reps.iter().map(|r| r.log_bf).collect();
    let (m, sd) = mean_sd(&finals);
    let positive = finals.iter().filter(|&&v| v > 0.0).count();
    eprintln!(
        "log BF {} vs {}: mean {m:.4} (sd {sd:.4}), positive in {positive}/{} reorderings",
        a.leaf_a,
        a.leaf_b,
        finals.len()
    );
    Ok(())
}

fn objective(f: TestFunction, seed: u64) -> impl FnMut(&[f64]) -> std::result::Result<Response, Box<dyn std::error::Error + Send + Sync>> {
    let mut rng = substream(seed, "objective-noise", &[]);
    move |x: &[f64]| Ok(Response::Real(f.sample(x, &mut rng)?))
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let cfg = DesignConfig {
        candidates: a.candidates,
        phi: a.phi,
        heuristic: Heuristic::Ei,
        rounds: a.rounds,
        filter: a.filter.config(a.leaf)?,
    };
    let bounds = a.function.bounds();
    let mut obj = objective(a.function, a.filter.seed);
    let init = initial_design(&mut obj, &bounds, a.init, ResponseKind::Real, a.filter.seed)?;
    let run = optimize_loop(&mut obj, init, &bounds, &cfg)?;
    let mut out = sink(a.out.as_deref())?;
    run.trace.write_json(&mut out)?;
    out.flush().map_err(io_err(a.out.as_deref()))?;
    if let (Some(x), Some(m)) = (&run.trace.best_x, run.trace.best_posterior_mean) {
        eprintln!("best x {x:?}, posterior mean {m:.6}, true mean {:.6}", a.function.mean(x)?);
    }
    run.aborted.map_or(Ok(()), Err)
}

fn al(a: AlArgs) -> Result<()> {
    let cfg = DesignConfig {
        candidates: a.candidates,
        phi: 1.0,
        heuristic: a.heuristic,
        rounds: a.rounds,
        filter: a.filter.config(a.leaf)?,
    };
    let bounds = a.function.bounds();
    let grid = a.function.grid(a.holdout);
    let truth: Vec<f64> = grid.iter().map(|x| a.function.mean(x)).collect::<Result<_>>()?;
    let mut obj = objective(a.function, a.filter.seed);
    let init = initial_design(&mut obj, &bounds, a.init, ResponseKind::Real, a.filter.seed)?;
    let run = active_learn_loop(&mut obj, init, &bounds, &cfg, Some((&grid, &truth)))?;
    let mut out = sink(a.out.as_deref())?;
    run.trace.write_json(&mut out)?;
    out.flush().map_err(io_err(a.out.as_deref()))?;
    if let Some(r) = run.trace.rmse {
        eprintln!("holdout RMSE {r:.6} after {} rounds", run.trace.rounds.len());
    }
    run.aborted.map_or(Ok(()), Err)
}

fn classify(a: ClassifyArgs) -> Result<()> {
    // encode training and query rows together so indicator columns agree
    let train = Table::read(&a.data)?;
    let n_train = train.rows.len();
    let mut all = train.clone();
    match a.query.as_ref().map(|q| Table::read(q)).transpose()? {
        Some(q) if q.headers != train.headers => {
            return Err(Error::Config("query columns differ from the training columns".into()));
        }
        Some(q) => all.rows.extend(q.rows),
        None => all.rows.extend(train.rows.iter().cloned()),
    }
    let schema = CsvSchema::class(&a.response);
    let cats: Vec<&str> = a.categorical.iter().map(String::as_str).collect();
    let (store, names) = if cats.is_empty() {
        all.into_store(&schema)?
    } else {
        let (s, m) = one_hot_encode(&all, &cats, &schema)?;
        (s, m.iter().map(|c| c.name()).collect())
    };
    let train_rows: Vec<usize> = (0..n_train).collect();
    let query_rows: Vec<usize> = (n_train..store.len()).collect();
    let cloud = Cloud::fit(a.filter.config(LeafModel::Multinomial)?, &store.select(&train_rows))?;
    let pts: Vec<Vec<f64>> = query_rows.iter().map(|&i| store.x(i).to_vec()).collect();

    let mut out = sink(a.out.as_deref())?;
    let preds = write_predictions(&mut out, &cloud, &names, &pts)?;
    out.flush().map_err(io_err(a.out.as_deref()))?;
    {
        let predicted: Vec<usize> = preds
            .iter()
            .map(|p| match p {
                PredictiveSummary::Class { class, .. } => *class,
                PredictiveSummary::Real { .. } => usize::MAX,
            })
            .collect();
        let observed: Vec<usize> = query_rows.iter().map(|&i| store.y(i).as_class().unwrap_or(usize::MAX)).collect();
        eprintln!("misclassification {:.4} over {} rows", misclassification(&predicted, &observed)?, observed.len());
    }
    Ok(())
}

/// Per-repetition rows followed by `mean` and `sd` rows over each column.
fn write_summary_table<W: Write + ?Sized>(out: &mut W, header: &[&str], rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (label, vals) in rows {
        let mut rec = vec![label.clone()];
        rec.extend(vals.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    let cols = header.len() - 1;
    let stats: Vec<(f64, f64)> =
        (0..cols).map(|c| mean_sd(&rows.iter().map(|r| r.1[c]).collect::<Vec<_>>())).collect();
    for (label, pick) in [("mean", 0), ("sd", 1)] {
        let mut rec = vec![label.to_string()];
        rec.extend(stats.iter().map(|s| if pick == 0 { s.0 } else { s.1 }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(None))?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let settings = a.filter.settings()?;
    let mut header: Vec<String> = vec!["rep".into()];
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    match a.name {
        Benchmark::Parabola => {
            let reps = a.reps.unwrap_or(30);
            let data = parabola_data(100, a.filter.seed);
            let f = TestFunction::Parabola;
            let grid = f.grid(200);
            let truth: Vec<f64> = grid.iter().map(|x| f.mean(x)).collect::<Result<_>>()?;
            let t0 = a.filter.t0.unwrap_or(5);
            let res = bayes_factor_experiment(
                &data,
                LeafModel::Linear,
                LeafModel::Constant,
                reps,
                t0,
                settings,
                Some((&grid, &truth)),
            )?;
            header.extend(["log_bf", "rmse_linear", "rmse_constant"].map(String::from));
            for r in res {
                rows.push((r.rep.to_string(), vec![r.log_bf, r.rmse_a.unwrap_or(f64::NAN), r.rmse_b.unwrap_or(f64::NAN)]));
            }
        }
        Benchmark::Friedman => {
            let res = friedman_experiment(a.reps.unwrap_or(20), 200, 1000, settings)?;
            let models = match a.leaf {
                Some(m) => vec![m],
                None => vec![LeafModel::Linear, LeafModel::Constant],
            };
            for m in &models {
                header.push(format!("rmse_{m}"));
            }
            for r in res {
                let vals = models
                    .iter()
                    .map(|m| match m {
                        LeafModel::Linear => Ok(r.rmse_linear),
                        LeafModel::Constant => Ok(r.rmse_constant),
                        LeafModel::Multinomial => Err(Error::Config("friedman has a real response".into())),
                    })
                    .collect::<Result<Vec<f64>>>()?;
                rows.push((r.rep.to_string(), vals));
            }
        }
        Benchmark::Sincauchy => {
            let sizes = DesignSizes {
                init: 10,
                rounds: a.rounds.unwrap_or(40),
                candidates: a.candidates.unwrap_or(20),
                phi: 1.0,
            };
            let reps = a.reps.unwrap_or(30);
            let model = a.leaf.unwrap_or(LeafModel::Linear);
            let hs = match a.heuristic {
                Some(h) => vec![h],
                None => vec![Heuristic::Alm, Heuristic::Alc],
            };
            let mut cols = Vec::new();
            for &h in &hs {
                header.push(format!("rmse_{}", heuristic_name(h)));
                cols.push(active_learning_experiment(TestFunction::SinCauchy, model, h, reps, sizes, 200, settings)?);
            }
            for rep in 0..reps {
                rows.push((rep.to_string(), cols.iter().map(|c| c[rep]).collect()));
            }
        }
        Benchmark::Exp2d => {
            let sizes = DesignSizes {
                init: 10,
                rounds: a.rounds.unwrap_or(10),
                candidates: a.candidates.unwrap_or(200),
                phi: a.phi.unwrap_or(1.0),
            };
            let model = a.leaf.unwrap_or(LeafModel::Constant);
            let res = optimization_experiment(TestFunction::Exp2d, model, a.reps.unwrap_or(50), sizes, settings)?;
            header.extend(["solution", "best_posterior_mean", "x1", "x2"].map(String::from));
            for r in res {
                let x = |j: usize| r.best_x.get(j).copied().unwrap_or(f64::NAN);
                rows.push((r.rep.to_string(), vec![r.solution, r.best_posterior_mean, x(0), x(1)]));
            }
        }
        Benchmark::Classify => {
            let r = classification_experiment(500, 1000, 0.05, 20, settings)?;
            header.extend(
                ["misclassification", "misclassification_clean", "entropy_argmax_x1", "entropy_argmax_x2", "boundary_distance"]
                    .map(String::from),
            );
            rows.push((
                "0".into(),
                vec![
                    r.misclassification,
                    r.misclassification_clean,
                    r.entropy_argmax[0],
                    r.entropy_argmax[1],
                    r.argmax_boundary_distance,
                ],
            ));
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = sink(a.out.as_deref())?;
    write_summary_table(&mut out, &header, &rows)?;
    out.flush().map_err(io_err(a.out.as_deref()))
}

fn heuristic_name(h: Heuristic) -> &'static str {
    match h {
        Heuristic::Ei => "ei",
        Heuristic::Alm => "alm",
        Heuristic::Alc => "alc",
        Heuristic::Entropy => "entropy",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags_and_defaults() {
        let cli = Cli::try_parse_from(["dyntree", "bench", "friedman", "--reps", "20", "--particles", "1000", "--leaf", "linear"])
            .unwrap();
        let Command::Bench(b) = cli.command else { panic!("bench expected") };
        assert_eq!(b.name, Benchmark::Friedman);
        assert_eq!((b.reps, b.leaf), (Some(20), Some(LeafModel::Linear)));
        assert_eq!((b.filter.alpha, b.filter.beta, b.filter.seed), (0.95, 2.0, 0));

        let cli = Cli::try_parse_from(["dyntree", "bf", "--leaf-a", "linear", "--leaf-b", "constant", "--reps", "30", "--t0", "5"])
            .unwrap();
        let Command::Bf(b) = cli.command else { panic!("bf expected") };
        assert_eq!((b.reps, b.filter.t0), (30, Some(5)));
    }

    #[test]
    fn usage_errors_exit_nonzero() {
        assert_eq!(run_command(["dyntree", "frobnicate"]), 2);
        assert_eq!(run_command(["dyntree", "fit"]), 2);
        assert_eq!(run_command(["dyntree", "al", "--heuristic", "bogus"]), 2);
        assert_eq!(run_command(["dyntree", "predict", "--checkpoint", "/nonexistent/cp.json", "--grid", "3"]), 1);
    }

    #[test]
    fn summary_table_appends_mean_and_sd() {
        let mut buf = Vec::new();
        let rows = vec![("0".to_string(), vec![1.0, 4.0]), ("1".to_string(), vec![3.0, 4.0])];
        write_summary_table(&mut buf, &["rep", "a", "b"], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "rep,a,b\n0,1,4\n1,3,4\nmean,2,4\nsd,1.4142135623730951,0\n");
    }
}
