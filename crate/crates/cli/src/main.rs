use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use disc_cli::{
    fit_one, motivation_experiment, run_experiment, scaling_benchmark, write_motivation_csv,
    DataSource, ExperimentConfig, ScalingConfig,
};
use disc_core::{
    acc_labels, ari_labels, cmp, export_encoded, synth_generate_with, write_csv, Partition,
    SynthSpec, Variant,
};

#[derive(Parser)]
#[command(
    name = "disc",
    version,
    about = "Categorical clustering with learned per-cluster value relationships"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit with several restarts and write a report.
    Fit(FitArgs),
    /// Score a saved assignment file against the labels of a dataset.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        /// CSV with a `cluster` column, one row per sample.
        #[arg(long)]
        assignments: PathBuf,
    },
    /// Time fits on synthetic data over sample and attribute grids.
    BenchScaling(BenchArgs),
    /// Random value-relationship baseline on a labeled dataset.
    Motivate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a labeled synthetic categorical dataset.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 5)]
        values: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dominance: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit once and write each sample's tree coordinates.
    ExportEncoding(FitArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_col: Option<String>,
    /// Comma-separated numeric columns.
    #[arg(long, value_delimiter = ',')]
    numeric_cols: Vec<String>,
    /// Comma-separated columns to drop.
    #[arg(long, value_delimiter = ',')]
    ignore_cols: Vec<String>,
}

impl DataArgs {
    fn source(&self) -> DataSource {
        DataSource {
            path: self.data.clone(),
            label: self.label_col.clone(),
            numeric: self.numeric_cols.clone(),
            ignored: self.ignore_cols.clone(),
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "disc")]
    variant: Variant,
    /// Enables the mixed objective with this numeric weight.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_inner: usize,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl FitArgs {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            data: self.data.source(),
            k: self.k,
            restarts: self.restarts,
            seed: self.seed,
            variant: self.variant,
            gamma: self.gamma,
            max_inner: self.max_inner,
            max_outer: self.max_outer,
            out: Some(self.out.clone()),
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000,80000")]
    n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    l_grid: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    fixed_l: usize,
    #[arg(long, default_value_t = 2000)]
    fixed_n: usize,
    #[arg(long, default_value_t = 5)]
    values: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn create(path: &std::path::Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn read_assignments(path: &PathBuf) -> Result<Vec<usize>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let column = reader
        .headers()?
        .iter()
        .position(|h| h == "cluster")
        .context("assignment file has no `cluster` column")?;
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let cell = rec.get(column).context("short row")?;
            cell.trim()
                .parse::<usize>()
                .with_context(|| format!("bad cluster id {cell:?}"))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => {
            let report = run_experiment(&args.config())?;
            let best = report.best_record();
            if let (Some(a), Some(r)) = (&report.aggregates.acc, &report.aggregates.ari) {
                println!("ACC {:.4} ± {:.4}", a.mean, a.std);
                println!("ARI {:.4} ± {:.4}", r.mean, r.std);
            }
            let c = report.aggregates.cmp;
            println!("CMP {:.4} ± {:.4}", c.mean, c.std);
            println!("best seed {} (z = {:.6})", best.seed, best.objective);
            println!("wrote {}", args.out.join("report.json").display());
        }
        Command::Eval { data, assignments } => {
            let dataset = data.source().load()?;
            let assign = read_assignments(&assignments)?;
            if assign.len() != dataset.n() {
                bail!("{} assignments for {} samples", assign.len(), dataset.n());
            }
            let k = assign.iter().max().map_or(0, |m| m + 1);
            let partition = Partition::new(assign, k)?;
            let mut scores = serde_json::Map::new();
            scores.insert("cmp".into(), cmp(&dataset, &partition)?.into());
            if let Some(truth) = dataset.labels() {
                scores.insert("acc".into(), acc_labels(&partition.assign, truth)?.into());
                scores.insert("ari".into(), ari_labels(&partition.assign, truth)?.into());
            }
            println!("{}", serde_json::to_string_pretty(&scores)?);
        }
        Command::BenchScaling(a) => {
            let cfg = ScalingConfig {
                n_grid: a.n_grid,
                l_grid: a.l_grid,
                fixed_l: a.fixed_l,
                fixed_n: a.fixed_n,
                values: a.values,
                k: a.k,
                seed: a.seed,
                repeats: a.repeats,
            };
            let table = scaling_benchmark(&cfg)?;
            let path = a.out.join("scaling.csv");
            let mut out = create(&path)?;
            table.write_csv(&mut out)?;
            out.flush()?;
            for r in &table.rows {
                println!(
                    "{}={:>7}  {:.4}s  ({:.1} inner, {:.5}s each)",
                    r.axis, r.value, r.seconds, r.inner_iterations, r.seconds_per_iteration
                );
            }
            if let Some(s) = table.slope_n {
                println!("log-log slope vs n: {s:.3}");
            }
            if let Some(s) = table.slope_l {
                println!("log-log slope vs l: {s:.3}");
            }
            if let (Some(n), Some(l)) = (table.slope_n_per_iteration, table.slope_l_per_iteration) {
                println!("per-iteration slopes: n {n:.3}, l {l:.3}");
            }
            println!("wrote {}", path.display());
        }
        Command::Motivate {
            data,
            k,
            trials,
            seed,
            out,
        } => {
            let dataset = data.source().load()?;
            let results = motivation_experiment(&dataset, k, trials, seed)?;
            let path = out.join("motivation.csv");
            let mut w = create(&path)?;
            write_motivation_csv(&results, &mut w)?;
            w.flush()?;
            for r in &results {
                println!("{:<11} median ACC {:.4}", r.strategy.name(), r.median);
            }
            println!("wrote {}", path.display());
        }
        Command::Synth {
            n,
            l,
            values,
            k,
            seed,
            dominance,
            out,
        } => {
            let mut spec = SynthSpec::new(n, l, values, k, seed);
            if let Some(d) = dominance {
                spec.dominance = d;
            }
            let dataset = synth_generate_with(&spec)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_csv(&dataset, &out)?;
            println!(
                "wrote {} ({n} rows, {l} attributes, label column `class`)",
                out.display()
            );
        }
        Command::ExportEncoding(args) => {
            let cfg = args.config();
            cfg.validate()?;
            let dataset = cfg.data.load()?;
            let model = fit_one(&dataset, &cfg, cfg.seed)?;
            let table = export_encoded(&dataset, &model)?;
            let path = args.out.join("encoding.csv");
            let mut w = create(&path)?;
            table.write_csv(&mut w)?;
            w.flush()?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
