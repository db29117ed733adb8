//! The `qmc` subcommands. Each `cmd_*` takes its parsed flags, writes its
//! output files and returns a one-line summary.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qudit_qmc::datasets::{
    gen_circles, gen_gaussian_mixture_1d, gen_moons, gen_test_grid, train_test_split, Dataset, Generator,
    MixtureParams,
};
use qudit_qmc::density::{fit, fit_density, DensityModel};
use qudit_qmc::feature_map::{bounding_box, make_anchor_grid, RffMap, RffParams, SoftmaxMap};
use qudit_qmc::metrics::{normalized_mae, pearson, ClassificationMetrics};
use qudit_qmc::qmc::{Prediction, Predictor, Readout};
use qudit_qmc::Error;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::model_file::{load_model, save_model};
use crate::table::{dataset_table, fmt_num, read_dataset, Table};

/// Label cell written for samples whose joint scores all vanish.
pub const DEGENERATE_LABEL: &str = "degenerate";

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    Mixture,
    Grid,
    Moons,
    Circles,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: DataKind,
    #[arg(long)]
    pub out: PathBuf,
    /// Sample count (default 1000, or 2000 for moons and circles).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Inner-to-outer radius ratio for circles.
    #[arg(long, default_value_t = 0.5)]
    pub factor: f64,
    #[arg(long, default_value_t = -3.5, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 3.5, allow_hyphen_values = true)]
    pub hi: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.6])]
    pub weights: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [-1.0, 1.5], allow_hyphen_values = true)]
    pub means: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.6, 0.4])]
    pub stddevs: Vec<f64>,
    /// Add a `pdf` column with the mixture density (grid only).
    #[arg(long)]
    pub with_pdf: bool,
    /// Also write a seeded train/test split with this many training rows.
    #[arg(long, requires_all = ["train_out", "test_out"])]
    pub train_count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    #[arg(long)]
    pub train_out: Option<PathBuf>,
    #[arg(long)]
    pub test_out: Option<PathBuf>,
}

impl GenerateArgs {
    pub fn new(kind: DataKind, out: impl Into<PathBuf>) -> Self {
        GenerateArgs {
            kind,
            out: out.into(),
            n: None,
            seed: 0,
            noise: 0.1,
            factor: 0.5,
            lo: -3.5,
            hi: 3.5,
            weights: vec![0.4, 0.6],
            means: vec![-1.0, 1.5],
            stddevs: vec![0.6, 0.4],
            with_pdf: false,
            train_count: None,
            split_seed: 0,
            train_out: None,
            test_out: None,
        }
    }

    fn mixture(&self) -> Result<MixtureParams> {
        let pair = |v: &[f64], name: &str| -> Result<[f64; 2]> {
            v.try_into()
                .map_err(|_| CliError::input(format!("--{name} takes exactly two values")))
        };
        let params = MixtureParams {
            weights: pair(&self.weights, "weights")?,
            means: pair(&self.means, "means")?,
            stddevs: pair(&self.stddevs, "stddevs")?,
        };
        params.validate()?;
        Ok(params)
    }
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn generator_json(g: &Generator) -> serde_json::Value {
    match g {
        Generator::Mixture { params, n, seed } => json!({
            "kind": "mixture", "n": n, "seed": seed,
            "weights": params.weights, "means": params.means, "stddevs": params.stddevs,
        }),
        Generator::Grid { lo, hi, n } => json!({ "kind": "grid", "lo": lo, "hi": hi, "n": n }),
        Generator::Moons { n, noise, seed } => json!({ "kind": "moons", "n": n, "noise": noise, "seed": seed }),
        Generator::Circles { n, noise, factor, seed } => json!({
            "kind": "circles", "n": n, "noise": noise, "factor": factor, "seed": seed,
        }),
        Generator::Loaded => json!({ "kind": "loaded" }),
    }
}

fn write_dataset(data: &Dataset, extra: &[(&str, Vec<f64>)], out: &Path, meta: serde_json::Value) -> Result<()> {
    let table = dataset_table(data, extra);
    table.write(out)?;
    let meta = json!({
        "generator": generator_json(&data.generator),
        "rng": "ChaCha8Rng",
        "rows": table.rows.len(),
        "columns": table.header,
        "extra": meta,
    });
    write_json(&meta_path(out), &meta)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<String> {
    let default_n = match args.kind {
        DataKind::Moons | DataKind::Circles => 2000,
        _ => 1000,
    };
    let n = args.n.unwrap_or(default_n);
    let mut extra = Vec::new();
    let data = match args.kind {
        DataKind::Mixture => gen_gaussian_mixture_1d(n, &args.mixture()?, args.seed)?,
        DataKind::Grid => {
            let grid = gen_test_grid(args.lo, args.hi, n)?;
            if args.with_pdf {
                let params = args.mixture()?;
                extra.push(("pdf", grid.samples.iter().map(|x| params.pdf(x[0])).collect()));
            }
            grid
        }
        DataKind::Moons => gen_moons(n, args.noise, args.seed)?,
        DataKind::Circles => gen_circles(n, args.noise, args.factor, args.seed)?,
    };
    let pdf_meta = if args.with_pdf {
        let p = args.mixture()?;
        json!({ "pdf": { "weights": p.weights, "means": p.means, "stddevs": p.stddevs } })
    } else {
        json!({})
    };
    write_dataset(&data, &extra, &args.out, pdf_meta)?;
    let mut summary = format!("wrote {} rows to {}", data.len(), args.out.display());
    if let (Some(count), Some(train_out), Some(test_out)) = (args.train_count, &args.train_out, &args.test_out) {
        let (train, test) = train_test_split(&data, count, args.split_seed)?;
        for (part, path, name) in [(&train, train_out, "train"), (&test, test_out, "test")] {
            let meta = json!({ "split": { "part": name, "train_count": count, "split_seed": args.split_seed } });
            let mut part = part.clone();
            part.generator = data.generator.clone();
            write_dataset(&part, &[], path, meta)?;
        }
        summary.push_str(&format!(" ({} train, {} test)", train.len(), test.len()));
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Rff,
    Softmax,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = MapKind::Rff)]
    pub map: MapKind,
    /// Random Fourier feature count (qudit dimension).
    #[arg(long, default_value_t = 18)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Seed for the random Fourier weights.
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    /// Softmax anchors per input axis.
    #[arg(long, value_delimiter = ',', default_values_t = [3, 3])]
    pub grid: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    /// Fit a single density even if the data has labels.
    #[arg(long)]
    pub ignore_labels: bool,
}

impl FitArgs {
    pub fn rff(data: impl Into<PathBuf>, out: impl Into<PathBuf>, dim: usize, gamma: f64, seed: u64) -> Self {
        FitArgs {
            data: data.into(),
            out: out.into(),
            map: MapKind::Rff,
            dim,
            gamma,
            seed,
            grid: vec![3, 3],
            beta: DEFAULT_BETA,
            ignore_labels: false,
        }
    }

    pub fn softmax(data: impl Into<PathBuf>, out: impl Into<PathBuf>, grid: Vec<usize>, beta: f64) -> Self {
        FitArgs {
            map: MapKind::Softmax,
            grid,
            beta,
            ..FitArgs::rff(data, out, 18, DEFAULT_GAMMA, 11)
        }
    }
}

pub fn fit_dataset(data: &Dataset, args: &FitArgs) -> Result<DensityModel> {
    let map = match args.map {
        MapKind::Rff => RffMap::new(RffParams {
            input_dim: data.input_dim(),
            output_dim: args.dim,
            gamma: args.gamma,
            seed: args.seed,
        })?
        .into(),
        MapKind::Softmax => {
            if args.grid.len() != data.input_dim() {
                return Err(CliError::input(format!(
                    "--grid has {} axes but the data has {} columns",
                    args.grid.len(),
                    data.input_dim()
                )));
            }
            let anchors = make_anchor_grid(&bounding_box(&data.samples)?, &args.grid)?;
            SoftmaxMap::new(anchors, args.beta)?.into()
        }
    };
    let model = match (&data.labels, args.ignore_labels) {
        (Some(labels), false) => fit(&data.samples, labels, map, data.num_classes())?,
        _ => fit_density(&data.samples, map)?,
    };
    Ok(model)
}

pub fn cmd_fit(args: &FitArgs) -> Result<String> {
    let data = read_dataset(&args.data)?;
    let model = fit_dataset(&data, args)?;
    save_model(&model, &args.out)?;
    Ok(format!(
        "fitted d={} D={} on {} samples, model written to {}",
        model.dim(),
        model.num_classes(),
        data.len(),
        args.out.display()
    ))
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Estimate probabilities from this many sampled measurements instead
    /// of reading them exactly.
    #[arg(long)]
    pub shots: Option<usize>,
    /// Base seed for shot sampling; sample `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append the classical expectation for comparison.
    #[arg(long)]
    pub with_oracle: bool,
}

impl PredictArgs {
    pub fn new(model: impl Into<PathBuf>, data: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PredictArgs {
            model: model.into(),
            data: data.into(),
            out: out.into(),
            shots: None,
            seed: 0,
            with_oracle: false,
        }
    }

    fn readout(&self) -> Readout {
        match self.shots {
            Some(shots) => Readout::Shots { shots, seed: self.seed },
            None => Readout::Exact,
        }
    }
}

fn prediction_header(model: &DensityModel, with_oracle: bool) -> Vec<String> {
    let classes = model.num_classes();
    let mut h = Vec::new();
    if classes == 1 {
        h.push("density".to_string());
        if with_oracle {
            h.push("oracle".into());
        }
    } else {
        h.push("label".into());
        h.extend((0..classes).map(|j| format!("joint_{j}")));
        h.extend((0..classes).map(|j| format!("posterior_{j}")));
        if with_oracle {
            h.extend((0..classes).map(|j| format!("oracle_{j}")));
        }
    }
    h
}

fn oracle_row(model: &DensityModel, x: &[f64]) -> Result<Vec<String>> {
    let psi = model.embed(x)?;
    model
        .classes()
        .iter()
        .enumerate()
        .map(|(j, c)| Ok(fmt_num(c.prior * model.expectation_oracle(j, &psi)?)))
        .collect()
}

/// Prediction rows in input order. Degenerate samples become a
/// `degenerate` label with NaN scores; any other failure aborts.
pub fn predict_table(model: &DensityModel, samples: &[Vec<f64>], readout: Readout, with_oracle: bool) -> Result<Table> {
    let input_dim = model.feature_map().input_dim();
    if let Some(x) = samples.iter().find(|x| x.len() != input_dim) {
        return Err(CliError::input(format!(
            "model expects {input_dim} input columns, data has {}",
            x.len()
        )));
    }
    let predictor = Predictor::new(model, readout)?;
    let results = predictor.predict_each(samples);
    let classes = model.num_classes();
    let mut table = Table::new(prediction_header(model, with_oracle));
    for (x, result) in samples.iter().zip(results) {
        let mut row = match result {
            Ok(Prediction::Density(p)) => vec![fmt_num(p)],
            Ok(Prediction::Class(c)) => {
                let mut row = vec![c.label.to_string()];
                row.extend(c.joint.iter().chain(&c.posterior).map(|&v| fmt_num(v)));
                row
            }
            Err(Error::DegenerateSample) => {
                let mut row = vec![DEGENERATE_LABEL.to_string()];
                row.extend((0..2 * classes).map(|_| fmt_num(f64::NAN)));
                row
            }
            Err(e) => return Err(e.into()),
        };
        if with_oracle {
            row.extend(oracle_row(model, x)?);
        }
        table.push(row);
    }
    Ok(table)
}

pub fn cmd_predict(args: &PredictArgs) -> Result<String> {
    let model = load_model(&args.model)?;
    let data = read_dataset(&args.data)?;
    let table = predict_table(&model, &data.samples, args.readout(), args.with_oracle)?;
    table.write(&args.out)?;
    let label_col = table.column("label");
    let degenerate = label_col.map_or(0, |c| table.rows.iter().filter(|r| r[c] == DEGENERATE_LABEL).count());
    let mut summary = format!("wrote {} predictions to {}", table.rows.len(), args.out.display());
    if degenerate > 0 {
        summary.push_str(&format!(" ({degenerate} degenerate)"));
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum MetricsReport {
    Classification {
        samples: usize,
        /// Rows predicted `degenerate`, left out of every other field.
        degenerate: usize,
        accuracy: f64,
        precision: Vec<f64>,
        recall: Vec<f64>,
        /// `confusion[truth][predicted]`.
        confusion: Vec<Vec<usize>>,
    },
    Density {
        samples: usize,
        pdf_correlation: f64,
        mean_absolute_error: f64,
        min_density: f64,
    },
}

impl MetricsReport {
    pub fn summary(&self) -> String {
        match self {
            MetricsReport::Classification {
                samples,
                degenerate,
                accuracy,
                ..
            } => format!("accuracy {accuracy:.4} on {samples} samples ({degenerate} degenerate)"),
            MetricsReport::Density {
                samples,
                pdf_correlation,
                mean_absolute_error,
                ..
            } => format!(
                "pdf correlation {pdf_correlation:.4}, mean absolute error {mean_absolute_error:.4e} on {samples} points"
            ),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    /// Labelled dataset, or a grid with a `pdf` column for density models.
    #[arg(long)]
    pub truth: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn evaluate_tables(pred: &Table, truth: &Table) -> Result<MetricsReport> {
    if pred.rows.len() != truth.rows.len() {
        return Err(CliError::input(format!(
            "{} predictions for {} truth rows",
            pred.rows.len(),
            truth.rows.len()
        )));
    }
    if let Some(pc) = pred.column("label") {
        let tc = truth.require("label")?;
        let mut t = Vec::new();
        let mut p = Vec::new();
        let mut degenerate = 0;
        for (i, (pr, tr)) in pred.rows.iter().zip(&truth.rows).enumerate() {
            if pr[pc] == DEGENERATE_LABEL {
                degenerate += 1;
                continue;
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| CliError::input(format!("line {}: bad label {s:?}", i + 2)))
            };
            p.push(parse(&pr[pc])?);
            t.push(parse(&tr[tc])?);
        }
        let m = ClassificationMetrics::compute(&t, &p)?;
        return Ok(MetricsReport::Classification {
            samples: pred.rows.len(),
            degenerate,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            confusion: m.confusion,
        });
    }
    let density = pred.floats(pred.require("density")?)?;
    let pdf = truth.floats(truth.require("pdf")?)?;
    let xs = truth.floats(truth.require("x0")?)?;
    Ok(MetricsReport::Density {
        samples: density.len(),
        pdf_correlation: pearson(&density, &pdf)?,
        mean_absolute_error: normalized_mae(&xs, &density, &pdf)?,
        min_density: density.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(MetricsReport, String)> {
    let report = evaluate_tables(&Table::read(&args.predictions)?, &Table::read(&args.truth)?)?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    let summary = report.summary();
    Ok((report, summary))
}

#[derive(Debug, Clone, Args)]
pub struct PlotdataArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x_range: Vec<f64>,
    /// Required for two-dimensional models.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y_range: Option<Vec<f64>>,
    /// Points along x (default 1000 for 1-D models, 100 for 2-D).
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub ny: usize,
}

fn axis(range: &[f64], n: usize, name: &str) -> Result<Vec<f64>> {
    let [lo, hi] = range
        .try_into()
        .map_err(|_| CliError::input(format!("--{name} takes lo,hi")))?;
    Ok(gen_test_grid(lo, hi, n)?.samples.into_iter().map(|x| x[0]).collect())
}

/// Evaluates the model on a dense grid, x slowest. Columns are
/// `x[,y],density` for density models and `x[,y],P_0..,label` otherwise,
/// where `P_j` is the posterior.
pub fn plot_table(model: &DensityModel, args: &PlotdataArgs) -> Result<Table> {
    let input_dim = model.feature_map().input_dim();
    let points: Vec<Vec<f64>> = match input_dim {
        1 => axis(&args.x_range, args.nx.unwrap_or(1000), "x-range")?
            .into_iter()
            .map(|x| vec![x])
            .collect(),
        2 => {
            let yr = args
                .y_range
                .as_ref()
                .ok_or_else(|| CliError::input("--y-range is required for 2-D models"))?;
            let xs = axis(&args.x_range, args.nx.unwrap_or(100), "x-range")?;
            let ys = axis(yr, args.ny, "y-range")?;
            xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect()
        }
        n => return Err(CliError::input(format!("cannot plot a {n}-dimensional input space"))),
    };
    let pred = predict_table(model, &points, Readout::Exact, false)?;
    let coords = ["x", "y"];
    let classes = model.num_classes();
    let mut header: Vec<String> = coords[..input_dim].iter().map(|s| s.to_string()).collect();
    if classes == 1 {
        header.push("density".into());
    } else {
        header.extend((0..classes).map(|j| format!("P_{j}")));
        header.push("label".into());
    }
    let mut table = Table::new(header);
    for (p, row) in points.iter().zip(pred.rows) {
        let mut out: Vec<String> = p.iter().map(|&v| fmt_num(v)).collect();
        if classes == 1 {
            out.push(row[0].clone());
        } else {
            out.extend(row[1 + classes..1 + 2 * classes].iter().cloned());
            out.push(row[0].clone());
        }
        table.push(out);
    }
    Ok(table)
}

pub fn cmd_plotdata(args: &PlotdataArgs) -> Result<String> {
    let model = load_model(&args.model)?;
    let table = plot_table(&model, args)?;
    table.write(&args.out)?;
    Ok(format!("wrote {} grid rows to {}", table.rows.len(), args.out.display()))
}
