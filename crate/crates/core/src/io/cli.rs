//! Command line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or format
//! error, 3 numerical failure. Diagnostics go to standard error.
//! `SSMRPE_THREADS` caps the number of worker threads.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::classmap::{render_class_map, DEFAULT_PALETTE};
use super::config::{RunConfig, DEFAULT_D, DEFAULT_K, DEFAULT_REPEATS, DEFAULT_TRAIN_COUNT, DEFAULT_W};
use super::format::{load_cube, load_labels, save_cube, save_labels, write_atomic};
use super::report::{embedded_csv, export_metrics, export_sweep, fixed2, projection_csv};
use crate::cube::{HyperCube, LabelRaster};
use crate::embed::{Method, DEFAULT_RIDGE};
use crate::error::{HsiError, Result};
use crate::eval::{
    fit_embedding, run_prepared, sweep, synthesize, Experiment, MetricsReport, Prepared, Rounding, SplitMode,
    SynthConfig, Trial,
};
use crate::ssgraph::DEFAULT_EPS;
use crate::wmf::{filter_cube, FilterConfig, DEFAULT_GAMMA0};

pub const THREADS_ENV: &str = "SSMRPE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ssmrpe", version, about = "Spatial-spectral dimensionality reduction for hyperspectral cubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted mean filter: writes filtered.hsx
    Filter {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long, default_value_t = DEFAULT_W)]
        w: usize,
        #[arg(long, default_value_t = DEFAULT_GAMMA0)]
        gamma0: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit an embedding and project every pixel: writes projection.csv and embedded.csv
    Embed {
        #[arg(long)]
        cube: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// Fit on this many randomly drawn pixels instead of all of them.
        #[arg(long)]
        fit_count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// One split, fit, project and 1-NN: writes predictions.hsl, classmap.png and metrics.csv
    Classify {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Repeated trials: writes metrics.csv and classmap.png (first trial)
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Grid over window sizes and neighbor counts: writes sweep.csv
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        /// Comma-separated odd window sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        ws: Vec<usize>,
        /// Comma-separated neighbor counts.
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Synthetic block scene: writes cube.hsx and labels.hsl
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SynthConfig::default().size)]
        size: usize,
        #[arg(long, default_value_t = SynthConfig::default().bands)]
        bands: usize,
        #[arg(long, default_value_t = SynthConfig::default().classes)]
        classes: u16,
        #[arg(long, default_value_t = SynthConfig::default().noise)]
        noise: f64,
        #[arg(long, default_value_t = SynthConfig::default().clutter)]
        clutter: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    cube: PathBuf,
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args, Debug, Clone, Copy)]
struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Ssmrpe)]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_W)]
    w: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_D)]
    d: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA0)]
    gamma0: f64,
    /// Gram regularizer, relative to trace(z) / k.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Ridge on the constraint matrix, relative to its mean diagonal.
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// Fit and project WMF-filtered spectra instead of raw ones.
    #[arg(long)]
    project_filtered: bool,
    /// Use this constant in place of the spatial coordinate distance.
    #[arg(long)]
    scd_const: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MethodArg {
    Raw,
    Pca,
    Npe,
    Ssmrpe,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Raw => Method::Raw,
            MethodArg::Pca => Method::Pca,
            MethodArg::Npe => Method::Npe,
            MethodArg::Ssmrpe => Method::Ssmrpe,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RoundingArg {
    Ceil,
    Nearest,
}

#[derive(Args, Debug, Clone, Copy)]
struct SplitArgs {
    /// Training samples per class.
    #[arg(long, conflicts_with = "train_frac")]
    train_count: Option<usize>,
    /// Fraction of each class used for training.
    #[arg(long)]
    train_frac: Option<f64>,
    #[arg(long, value_enum, default_value_t = RoundingArg::Ceil, requires = "train_frac")]
    train_rounding: RoundingArg,
    /// Lower bound on the per-class training count in fraction mode.
    #[arg(long, default_value_t = 1, requires = "train_frac")]
    train_min: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run_config(m: &MethodArgs, s: Option<&SplitArgs>, repeats: usize) -> RunConfig {
    let mut cfg = RunConfig {
        method: m.method.into(),
        w: m.w,
        k: m.k,
        d: m.d,
        gamma0: m.gamma0,
        eps: m.eps,
        ridge: m.ridge,
        repeats,
        project_filtered: m.project_filtered,
        scd_const: m.scd_const,
        ..RunConfig::default()
    };
    if let Some(s) = s {
        cfg.seed = s.seed;
        cfg.split = match (s.train_count, s.train_frac) {
            (_, Some(fraction)) => SplitMode::Fraction {
                fraction,
                rounding: match s.train_rounding {
                    RoundingArg::Ceil => Rounding::Ceil,
                    RoundingArg::Nearest => Rounding::Nearest,
                },
                min: s.train_min,
            },
            (Some(n), None) => SplitMode::Count(n),
            (None, None) => SplitMode::Count(DEFAULT_TRAIN_COUNT),
        };
    }
    cfg
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(e) => return report(e),
    };
    let result = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(HsiError::config(format!("cannot start {n} worker threads: {e}"))),
        },
        None => execute(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}

fn report(e: HsiError) -> i32 {
    eprintln!("ssmrpe: {e}");
    e.exit_code()
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(HsiError::config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(e) => Err(HsiError::config(format!("{THREADS_ENV}: {e}"))),
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Filter { cube, w, gamma0, out_dir } => {
            let cfg = FilterConfig::new(w, gamma0)?;
            let cube = load_cube(&cube)?;
            prepare_out_dir(&out_dir)?;
            save_cube(&filter_cube(&cube, &cfg)?, &out_dir.join("filtered.hsx"))
        }
        Command::Embed {
            cube,
            method,
            fit_count,
            seed,
            out_dir,
        } => {
            let cfg = run_config(&method, None, 1).method_config()?;
            let cube = load_cube(&cube)?;
            let n = cube.pixel_count();
            let fit_pixels: Vec<usize> = match fit_count {
                Some(c) if c == 0 || c > n => {
                    return Err(HsiError::config(format!("fit count must lie in 1..={n}, got {c}")))
                }
                Some(c) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut v = sample(&mut rng, n, c).into_vec();
                    v.sort_unstable();
                    v
                }
                None => (0..n).collect(),
            };
            let prepared = Prepared::new(&cube, &cfg)?;
            let fitted = fit_embedding(&prepared, &cfg, &fit_pixels)?;
            let all: Vec<usize> = (0..n).collect();
            let features = fitted.features(&prepared, &all)?;
            prepare_out_dir(&out_dir)?;
            write_atomic(&out_dir.join("projection.csv"), &projection_csv(&fitted.model)?)?;
            write_atomic(&out_dir.join("embedded.csv"), &embedded_csv(&cube, &all, &features)?)
        }
        Command::Classify {
            data,
            method,
            split,
            out_dir,
        } => {
            let cfg = run_config(&method, Some(&split), 1);
            let (cube, labels) = load_data(&data)?;
            let exp = evaluate(&cube, &labels, &cfg)?;
            prepare_out_dir(&out_dir)?;
            let map = prediction_raster(&labels, &exp.trials[0])?;
            save_labels(&map, &out_dir.join("predictions.hsl"))?;
            render_class_map(&map, &DEFAULT_PALETTE, &out_dir.join("classmap.png"))?;
            export_metrics(&exp.report, &out_dir.join("metrics.csv"))?;
            summarize(&exp.report);
            Ok(())
        }
        Command::Evaluate {
            data,
            method,
            split,
            repeats,
            out_dir,
        } => {
            let cfg = run_config(&method, Some(&split), repeats);
            let (cube, labels) = load_data(&data)?;
            let exp = evaluate(&cube, &labels, &cfg)?;
            prepare_out_dir(&out_dir)?;
            let map = prediction_raster(&labels, &exp.trials[0])?;
            render_class_map(&map, &DEFAULT_PALETTE, &out_dir.join("classmap.png"))?;
            export_metrics(&exp.report, &out_dir.join("metrics.csv"))?;
            summarize(&exp.report);
            Ok(())
        }
        Command::Sweep {
            data,
            method,
            split,
            repeats,
            ws,
            ks,
            out_dir,
        } => {
            let base = run_config(&method, Some(&split), repeats);
            for &w in &ws {
                for &k in &ks {
                    RunConfig { w, k, ..base }.validate()?;
                }
            }
            let cfg = base.method_config()?;
            let (cube, labels) = load_data(&data)?;
            let cells = sweep(&cube, &labels, &ws, &ks, &cfg, &base.split_spec())?;
            prepare_out_dir(&out_dir)?;
            export_sweep(&cells, &out_dir.join("sweep.csv"))
        }
        Command::Synth {
            seed,
            size,
            bands,
            classes,
            noise,
            clutter,
            out_dir,
        } => {
            let cfg = SynthConfig {
                size,
                bands,
                classes,
                noise,
                clutter,
                ..SynthConfig::default()
            };
            let (cube, labels) = synthesize(&cfg, seed)?;
            prepare_out_dir(&out_dir)?;
            save_cube(&cube, &out_dir.join("cube.hsx"))?;
            save_labels(&labels, &out_dir.join("labels.hsl"))
        }
    }
}

fn load_data(data: &DataArgs) -> Result<(HyperCube, LabelRaster)> {
    let cube = load_cube(&data.cube)?;
    let labels = load_labels(&data.labels)?;
    labels.matches(&cube)?;
    Ok((cube, labels))
}

fn evaluate(cube: &HyperCube, labels: &LabelRaster, cfg: &RunConfig) -> Result<Experiment> {
    let mc = cfg.method_config()?;
    if mc.method != Method::Raw && mc.params.d > cube.bands() {
        return Err(HsiError::config(format!(
            "d = {} exceeds the {} bands of the cube",
            mc.params.d,
            cube.bands()
        )));
    }
    let prepared = Prepared::new(cube, &mc)?;
    run_prepared(&prepared, labels, &mc, &cfg.split_spec())
}

/// Training pixels keep their label, test pixels get the prediction and
/// unlabeled pixels stay 0.
fn prediction_raster(labels: &LabelRaster, trial: &Trial) -> Result<LabelRaster> {
    let mut map = vec![0u16; labels.labels().len()];
    for &i in &trial.split.train {
        map[i] = labels.get(i);
    }
    for (&i, &p) in trial.split.test.iter().zip(&trial.predictions) {
        map[i] = p;
    }
    LabelRaster::new(labels.height(), labels.width(), labels.classes(), map)
}

fn summarize(r: &MetricsReport) {
    eprintln!(
        "{}: OA {} ± {}, AA {} ± {}, kappa {} ± {} over {} trial(s)",
        r.method.name(),
        fixed2(r.oa.mean),
        fixed2(r.oa.std),
        fixed2(r.aa.mean),
        fixed2(r.aa.std),
        fixed2(r.kappa.mean),
        fixed2(r.kappa.std),
        r.repeats
    );
}
