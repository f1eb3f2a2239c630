// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiment;
mod pipeline;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rough_lsm::forward::{add_noise, ReferenceField};
use rough_lsm::{LayeredGreen, Point};

use config::ExperimentConfig;
use experiment::{Example, Preset};
use pipeline::CliError;

/// Near-field synthesis and linear sampling reconstruction of a locally
/// rough interface between two half-planes.
#[derive(Debug, Parser)]
#[command(name = "rough-lsm", version)]
struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output; repeat for debug messages.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the forward problem for every source on the line and write the
    /// near-field matrix, plus one noisy copy per positive noise level.
    Synthesize {
        #[command(flatten)]
        config: ConfigArgs,
        /// Matrix file; noisy copies get a `_d<delta>` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write each matrix as `p,q,re,im` CSV next to it.
        #[arg(long)]
        csv: bool,
    },
    /// Compute the indicator on the sampling grid and write the field CSV,
    /// the grayscale image and the interface overlay.
    Invert {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output prefix (default: `<output>/<matrix stem>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add relative Gaussian noise to an existing matrix.
    Noise {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one of the preset example sweeps.
    Experiment {
        #[arg(value_enum)]
        name: Example,
        #[arg(long, value_enum, default_value_t = Preset::Desk)]
        preset: Preset,
        /// Output directory (default: `out/<name>-<preset>`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the layered Green's function from one source to every
    /// measurement point as CSV.
    GreenTable {
        #[command(flatten)]
        config: ConfigArgs,
        /// Source point `x1,x2`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        source: Point,
    },
}

/// A config file plus per-field overrides.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    kappa1: Option<f64>,
    #[arg(long)]
    kappa2: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Sampling grid extent `lo,hi` along x1.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    x_range: Option<[f64; 2]>,
    /// Sampling grid extent `lo,hi` along x2.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    y_range: Option<[f64; 2]>,
    #[arg(long)]
    hx: Option<f64>,
    #[arg(long)]
    hy: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated relative noise levels.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { c.$f = v.clone(); })* };
        }
        set!(profile, kappa1, kappa2, a, b, n, x_range, y_range, hx, hy, alpha, variant, cutoff, seed, noise, output);
        if self.radius.is_some() {
            c.radius = self.radius;
        }
        if self.h.is_some() {
            c.h = self.h;
        }
        Ok(c)
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok([parse(x)?, parse(y)?])
}

fn parse_point(s: &str) -> Result<Point, String> {
    parse_pair(s).map(|[x1, x2]| Point::new(x1, x2))
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    parse_pair(s)
}

fn with_suffix(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| pipeline::io_error(dir, e)),
        _ => Ok(()),
    }
}

fn write_csv(matrix: &rough_lsm::forward::NearFieldMatrix, path: &Path) -> Result<(), CliError> {
    let mut w = std::fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| pipeline::io_error(path, e))?;
    matrix.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| pipeline::io_error(path, e))
}

fn synthesize(args: &ConfigArgs, out: Option<PathBuf>, csv: bool) -> Result<(), CliError> {
    let cfg = args.load()?;
    let res = cfg.resolve()?;
    let out = out.unwrap_or_else(|| cfg.output.join("nearfield.bin"));
    create_parent(&out)?;
    let t = Instant::now();
    let s = pipeline::synthesize(&res)?;
    println!("condition estimate {:.3e}", s.condition);
    println!("synthesis time {:.2} s", t.elapsed().as_secs_f64());
    s.matrix.write_file(&out)?;
    println!("wrote {}", out.display());
    if csv {
        write_csv(&s.matrix, &with_suffix(&out, "", "csv"))?;
    }
    for &delta in cfg.noise.iter().filter(|d| **d > 0.0) {
        let noisy = add_noise(&s.matrix, delta, cfg.seed);
        let path = with_suffix(&out, &format!("_d{delta}"), "bin");
        noisy.write_file(&path)?;
        println!("wrote {}", path.display());
        if csv {
            write_csv(&noisy, &with_suffix(&path, "", "csv"))?;
        }
    }
    Ok(())
}

fn invert(matrix_path: &Path, args: &ConfigArgs, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = args.load()?;
    let res = cfg.resolve()?;
    let matrix = rough_lsm::forward::NearFieldMatrix::read_file(matrix_path).map_err(|e| pipeline::io_error(matrix_path, e))?;
    if res.variant != matrix.variant() {
        return Err(CliError::Config(format!("matrix holds {} data but the configuration asks for {}", matrix.variant(), res.variant)));
    }
    if let (Some(gr), Some(r)) = (res.reference, matrix.reference_radius()) {
        if gr.radius() != r {
            return Err(CliError::Config(format!("matrix was synthesized with half-disk radius {r}, configuration has {}", gr.radius())));
        }
    }
    let reference = pipeline::reference_for(&matrix)?;
    let t = Instant::now();
    let field = pipeline::invert(&matrix, &res, reference.as_ref())?;
    let estimate = pipeline::estimate(&field, res.cutoff)?;
    println!("inversion time {:.2} s", t.elapsed().as_secs_f64());
    let prefix = out.unwrap_or_else(|| {
        let stem = matrix_path.file_stem().map(|s| s.to_owned()).unwrap_or_else(|| "field".into());
        cfg.output.join(stem)
    });
    create_parent(&prefix)?;
    // The profile stored in the matrix is the truth; the config profile is
    // only trusted when the two agree.
    let truth = (matrix.profile_id() == res.profile.id()).then_some(&res.profile);
    let files = pipeline::write_field(&prefix, &field, &estimate, truth)?;
    for p in [&files.field, &files.image, &files.overlay] {
        println!("wrote {}", p.display());
    }
    if let Some(profile) = truth {
        let q = pipeline::quality(&field, &estimate, profile);
        println!("separation ratio {:.3} (region) {:.3} (below), column Jaccard {:.3}", q.region_ratio, q.below_ratio, q.column_jaccard);
    }
    Ok(())
}

fn noise(matrix_path: &Path, delta: f64, seed: u64, out: &Path) -> Result<(), CliError> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(CliError::Config(format!("field 'delta': must be non-negative, got {delta}")));
    }
    let matrix = rough_lsm::forward::NearFieldMatrix::read_file(matrix_path).map_err(|e| pipeline::io_error(matrix_path, e))?;
    create_parent(out)?;
    add_noise(&matrix, delta, seed).write_file(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn experiment(name: Example, preset: Preset, output: Option<PathBuf>) -> Result<(), CliError> {
    let preset_name = match preset {
        Preset::Desk => "desk",
        Preset::Full => "full",
    };
    let dir = output.unwrap_or_else(|| PathBuf::from("out").join(format!("{}-{preset_name}", name.name())));
    let rows = experiment::execute(&experiment::runs(name, preset), &dir)?;
    print!("{}", experiment::summary_table(&rows));
    println!("wrote {}", dir.join("summary.csv").display());
    Ok(())
}

fn green_table(args: &ConfigArgs, source: Point) -> Result<(), CliError> {
    let res = args.load()?.resolve()?;
    if !(source.x2 > 0.0) {
        return Err(CliError::Config("field 'source': must lie above the flat interface".into()));
    }
    let green = std::sync::Arc::new(LayeredGreen::new(res.medium));
    let reference = res.reference.map(|gr| ReferenceField::with_green(green.clone(), gr, res.h)).transpose()?;
    let mut out = std::io::stdout().lock();
    let head = if reference.is_some() { "p,x1,x2,g0_re,g0_im,g0s_re,g0s_im,grs_re,grs_im" } else { "p,x1,x2,g0_re,g0_im,g0s_re,g0s_im" };
    let _ = writeln!(out, "{head}");
    let numerical = |e: rough_lsm::layered_green::GreenError| CliError::Numerical(e.to_string());
    for (p, x) in res.line.points().iter().enumerate() {
        let g = green.g0(x, &source).map_err(numerical)?;
        let gs = green.g0_scattered(x, &source).map_err(numerical)?;
        let mut line = format!("{},{:?},{:?},{:?},{:?},{:?},{:?}", p + 1, x.x1, x.x2, g.re, g.im, gs.re, gs.im);
        if let Some(r) = &reference {
            let v = r.scattered(&source, x)?;
            line.push_str(&format!(",{:?},{:?}", v.re, v.im));
        }
        let _ = writeln!(out, "{line}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("field 'threads': must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Synthesize { config, out, csv } => synthesize(&config, out, csv),
        Command::Invert { matrix, config, out } => invert(&matrix, &config, out),
        Command::Noise { matrix, delta, seed, out } => noise(&matrix, delta, seed, &out),
        Command::Experiment { name, preset, output } => experiment(name, preset, output),
        Command::GreenTable { config, source } => green_table(&config, source),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
