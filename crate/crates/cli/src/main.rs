use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tbtlrr::harness::{
    concentration, default_grid, format_spectrum, generate_synthetic, grid_search, noise_sweep, run_pipeline,
    spectrum_dump, DataSource, ExperimentSpec, NoiseKind, SyntheticParams, Variant,
};
use tbtlrr::io::{read_t3b, write_atomic, write_labels, write_t3b};
use tbtlrr::solver::{DictMode, SolverConfig};
use tbtlrr::TransformKind;

#[derive(Parser)]
#[command(name = "tbtlrr", version, about = "Tensor subspace clustering with bilateral low-rank representation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, cluster and score one dataset.
    Cluster(ClusterArgs),
    /// Search lambda and beta over a grid.
    Grid(GridArgs),
    /// Repeat a run over a list of noise levels.
    Sweep(SweepArgs),
    /// Write a synthetic dataset as T3B tensor plus label CSV.
    Synth(SynthArgs),
    /// Dump transform-domain singular values under several transforms.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Clone)]
struct SyntheticOpts {
    #[arg(long, default_value_t = 4)]
    k_subspaces: usize,
    #[arg(long, default_value_t = 20)]
    samples_per_cluster: usize,
    #[arg(long, default_value_t = 30)]
    n1: usize,
    #[arg(long, default_value_t = 4)]
    n3: usize,
    #[arg(long, default_value_t = 3)]
    tubal_rank: usize,
    #[arg(long, default_value_t = 0.0)]
    sparse_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    gaussian_level: f64,
    /// Generator seed; defaults to --seed.
    #[arg(long)]
    data_seed: Option<u64>,
}

impl SyntheticOpts {
    fn params(&self, seed: u64) -> SyntheticParams {
        SyntheticParams {
            k_subspaces: self.k_subspaces,
            samples_per_cluster: self.samples_per_cluster,
            n1: self.n1,
            n3: self.n3,
            tubal_rank: self.tubal_rank,
            sparse_fraction: self.sparse_fraction,
            gaussian_level: self.gaussian_level,
            seed: self.data_seed.unwrap_or(seed),
        }
    }
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Data tensor (T3B). Without it a synthetic dataset is generated.
    #[arg(long, requires = "labels")]
    input: Option<PathBuf>,
    /// Ground-truth labels (CSV), required with --input.
    #[arg(long, requires = "input")]
    labels: Option<PathBuf>,
    /// Solver settings as `key = value` lines; flags override them.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// learned, dct or identity.
    #[arg(long)]
    transform: Option<TransformKind>,
    /// self, ttsvd:R, trpca or trpca:L.
    #[arg(long)]
    dict: Option<DictMode>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Number of clusters; defaults to the number of distinct labels.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = tbtlrr::cluster::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write Z, E, N and the affinities as T3B.
    #[arg(long)]
    dump: bool,
    #[command(flatten)]
    synthetic: SyntheticOpts,
}

impl RunOpts {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut solver = match &self.config {
            Some(p) => SolverConfig::from_kv_file(p)?,
            None => SolverConfig::default(),
        };
        if let Some(v) = self.lambda {
            solver.lambda = v;
        }
        if let Some(v) = self.beta {
            solver.beta = v;
        }
        if let Some(v) = self.transform {
            solver.transform_kind = v;
        }
        if let Some(v) = self.dict {
            solver.dict_mode = v;
        }
        if let Some(v) = self.max_iters {
            solver.max_iters = v;
        }
        let source = match (&self.input, &self.labels) {
            (Some(input), Some(labels)) => DataSource::File {
                input: input.clone(),
                labels: labels.clone(),
            },
            _ => DataSource::Synthetic(self.synthetic.params(self.seed)),
        };
        let spec = ExperimentSpec {
            source,
            solver,
            k: self.k,
            restarts: self.restarts,
            seed: self.seed,
            noise: Default::default(),
            out_dir: self.out.clone(),
            dump_tensors: self.dump,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    run: RunOpts,
    /// Noise injected before solving.
    #[arg(long, default_value = "sparse")]
    noise: NoiseKind,
    /// Level of the injected noise.
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    run: RunOpts,
    /// Comma-separated lambda values; decades 1e-5..1e3 by default.
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    /// Comma-separated beta values; decades 1e-5..1e3 by default.
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunOpts,
    #[arg(long, default_value = "sparse")]
    noise: NoiseKind,
    /// Comma-separated noise levels in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    synthetic: SyntheticOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for `x.t3b` and `labels.csv`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Data tensor (T3B); a synthetic dataset is generated without it.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated transforms to compare.
    #[arg(long, value_delimiter = ',', default_value = "learned,dct,identity")]
    transforms: Vec<TransformKind>,
    /// Number of leading values for the concentration summary; defaults to
    /// k * tubal rank for synthetic data.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    synthetic: SyntheticOpts,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let mut spec = args.run.spec()?;
    spec.noise.kind = args.noise;
    spec.noise.levels = args.level.into_iter().collect();
    spec.validate()?;
    let out = run_pipeline(&spec).context("pipeline failed")?;
    println!(
        "iterations {} converged {} residuals {:.3e} {:.3e} {:.3e}",
        out.iterations, out.converged, out.final_residuals[0], out.final_residuals[1], out.final_residuals[2]
    );
    for v in Variant::ALL {
        let r = out.row(v);
        println!(
            "{v:<8} ACC {:.4} ± {:.4}  NMI {:.4} ± {:.4}",
            r.acc_mean, r.acc_std, r.nmi_mean, r.nmi_std
        );
    }
    println!("results: {}", out.results_path.display());
    Ok(())
}

fn grid(args: GridArgs) -> Result<()> {
    let spec = args.run.spec()?;
    let pick = |v: Vec<f64>| if v.is_empty() { default_grid() } else { v };
    let table = grid_search(&spec, &pick(args.lambdas), &pick(args.betas))?;
    for p in &table.points {
        if let Err(e) = &p.outcome {
            eprintln!("lambda={:e} beta={:e} failed: {e}", p.lambda, p.beta);
        }
    }
    match table.best() {
        Some(best) => {
            let r = best.ranked_row().expect("successful point");
            println!(
                "best lambda={:e} beta={:e} ACC {:.4} NMI {:.4}",
                best.lambda, best.beta, r.acc_mean, r.nmi_mean
            );
        }
        None => bail!("every grid point failed; see {}", table.path.display()),
    }
    println!("table: {}", table.path.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = args.run.spec()?;
    let rows = noise_sweep(&spec, args.noise, &args.levels)?;
    println!("{:>8}  {:>12}  {:>12}", "level", "ACC average", "ACC weighted");
    for r in &rows {
        println!(
            "{:>8}  {:>12.4}  {:>12.4}",
            r.level, r.average.acc_mean, r.weighted.acc_mean
        );
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let (x, labels) = generate_synthetic(&args.synthetic.params(args.seed))?;
    create_dir(&args.out)?;
    write_t3b(args.out.join("x.t3b"), &x)?;
    write_labels(args.out.join("labels.csv"), &labels)?;
    let (n1, n2, n3) = x.dims();
    println!("wrote {n1}x{n2}x{n3} tensor and {} labels to {}", labels.len(), args.out.display());
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> Result<()> {
    let (x, default_top) = match &args.input {
        Some(p) => (read_t3b(p)?, None),
        None => {
            let p = args.synthetic.params(args.seed);
            (generate_synthetic(&p)?.0, Some(p.k_subspaces * p.tubal_rank))
        }
    };
    let dumps = spectrum_dump(&x, &args.transforms)?;
    create_dir(&args.out)?;
    let path = args.out.join("spectrum.csv");
    write_atomic(&path, format_spectrum(&dumps).as_bytes())?;
    if let Some(m) = args.top.or(default_top) {
        for d in &dumps {
            println!("{:<8} top-{m} mass {:.4}", d.kind.to_string(), concentration(&d.spectrum, m));
        }
    }
    println!("spectrum: {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Grid(a) => grid(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
        Command::Spectrum(a) => spectrum(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
