use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use union_harness::config::Bandwidth;
use union_harness::run::{draw_cloud, single_draw, write_cloud_csv, write_outcome};
use union_harness::{
    convergence_sweep, run_experiment, run_once, write_sweep_csv, ExperimentConfig, HarnessError, ModelSource,
    Result, Stage, EXPERIMENT_PRESETS,
};
use union_laplacian::continuum::{nonlocal_energy, DegreeCorrected, LocalFunction, NonlocalOptions, SmoothFunctionSpec};
use union_laplacian::transport::tl2_exact;
use union_laplacian::{presets, Kernel};

#[derive(Parser)]
#[command(name = "union-lap", version, about = "Graph Laplacians on unions of manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample and write it as CSV.
    Sample(Common),
    /// Solve for the smallest eigenpairs and write the result bundle.
    Spectrum(Common),
    /// Solve and compare against the continuum reference.
    Compare(Common),
    /// Nonlocal energy of a function on a model preset.
    Nonlocal(NonlocalArgs),
    /// Exact TL² distance between two CSV files with columns x1..xN,u.
    Tl2 { a: PathBuf, b: PathBuf },
    /// Convergence sweep over the config's sample sizes.
    Sweep(Common),
    /// List presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment preset used when no config is given.
    #[arg(long, default_value = "paper-fig1")]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NonlocalArgs {
    /// Model preset name.
    #[arg(long, default_value = "unit-circle")]
    model: String,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "indicator")]
    kernel: String,
    /// TOML file with a `parts` list (one function per component); the
    /// default is cos θ on circles and the degree-corrected indicator of
    /// the first component otherwise.
    #[arg(long)]
    function: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::preset(&self.preset)?,
        };
        if let Some(s) = self.seed {
            c.seeds = vec![s];
        }
        if let Some(n) = self.n {
            c.n = Some(n);
            c.counts = None;
        }
        if let Some(e) = self.eps {
            c.bandwidth = Bandwidth::Constant(e);
        }
        if let Some(kernel) = &self.kernel {
            c.kernel = kernel.clone();
        }
        if let Some(kind) = &self.kind {
            c.kind = kind.clone();
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        Ok(c)
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| HarnessError::Data(e.to_string()))
}

fn read_atoms(path: &Path) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::Data(e.to_string()))?;
    let width = r.headers().map_err(|e| HarnessError::Data(e.to_string()))?.len();
    if width < 2 {
        return Err(HarnessError::Data(format!("{}: need coordinate columns and a value column", path.display())));
    }
    let (mut points, mut values) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| HarnessError::Data(e.to_string()))?;
        for (j, f) in rec.iter().enumerate() {
            let x: f64 = f.trim().parse().map_err(|_| HarnessError::Data(format!("{}: bad number '{f}'", path.display())))?;
            if j + 1 == width {
                values.push(x);
            } else {
                points.push(x);
            }
        }
    }
    Ok((points, values, width - 1))
}

fn nonlocal(args: &NonlocalArgs) -> Result<()> {
    let model = presets::by_name::<f64>(&args.model).map_err(|e| HarnessError::Stage { stage: Stage::Config, source: e })?;
    let kernel: Kernel = args.kernel.parse().map_err(|e| HarnessError::Stage { stage: Stage::Config, source: e })?;
    let opts = NonlocalOptions::default();
    let stage = |e| HarnessError::Stage { stage: Stage::Diagnostics, source: e };
    let result = match &args.function {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let spec: SmoothFunctionSpec<f64> = toml::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
            nonlocal_energy(&model, &spec, &kernel, args.eps, &opts).map_err(stage)?
        }
        None if model.len() == 1 && !model.components[0].patch.is_flat() => {
            let spec = SmoothFunctionSpec::new(vec![LocalFunction::CircleMode { amplitude: 1.0, m: 1, sine: false }]);
            nonlocal_energy(&model, &spec, &kernel, args.eps, &opts).map_err(stage)?
        }
        None => {
            let mut parts = vec![LocalFunction::constant(0.0); model.len()];
            parts[0] = LocalFunction::constant(1.0);
            let u = DegreeCorrected::new(SmoothFunctionSpec::new(parts), &model, &kernel).map_err(stage)?;
            nonlocal_energy(&model, &u, &kernel, args.eps, &opts).map_err(stage)?
        }
    };
    writeln!(writer(args.out.as_deref())?, "{}", to_json(&result)?)?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preset { action: PresetAction::List } => {
            let mut out = io::stdout().lock();
            for p in EXPERIMENT_PRESETS {
                writeln!(out, "experiment  {p}")?;
            }
            for p in presets::NAMES {
                writeln!(out, "model       {p}")?;
            }
        }
        Command::Sample(common) => {
            let c = common.load()?;
            let r = c.validate()?;
            let cloud = draw_cloud(&r.model, &single_draw(&c)?, c.seeds[0])?;
            write_cloud_csv(writer(common.out.as_deref())?, &cloud)?;
        }
        Command::Spectrum(common) => {
            let c = common.load()?;
            let r = c.validate()?;
            let mut outcome = run_once(&c, &r, &single_draw(&c)?, c.seeds[0])?;
            outcome.bundle.alignment = None;
            outcome.bundle.reference = None;
            match &c.out {
                Some(dir) => {
                    let path = write_outcome(dir, &mut outcome)?;
                    eprintln!("wrote {}", path.display());
                }
                None => println!("{}", to_json(&outcome.bundle.spectrum)?),
            }
        }
        Command::Compare(common) => {
            let c = common.load()?;
            let bundles = run_experiment(&c)?;
            if c.out.is_none() {
                println!("{}", to_json(&bundles)?);
            }
        }
        Command::Nonlocal(args) => nonlocal(&args)?,
        Command::Tl2 { a, b } => {
            let (pa, ua, da) = read_atoms(&a)?;
            let (pb, ub, db) = read_atoms(&b)?;
            if da != db {
                return Err(HarnessError::Data(format!("dimensions differ: {da} vs {db}")));
            }
            let r = tl2_exact(&pa, &ua, &pb, &ub, da).map_err(|e| HarnessError::Stage { stage: Stage::Config, source: e })?;
            println!("{}", to_json(&r)?);
        }
        Command::Sweep(common) => {
            let mut c = common.load()?;
            if let ModelSource::Preset(_) = c.model {
                if c.n_list.is_empty() {
                    c.n_list = ExperimentConfig::preset("paper-sweep")?.n_list;
                }
            }
            let rows = convergence_sweep(&c)?;
            write_sweep_csv(writer(common.out.as_deref())?, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
