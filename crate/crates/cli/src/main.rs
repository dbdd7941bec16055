//! `shapestat`: two-sample mean and variation tests on planar landmark data.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapestat::calibrate;
use shapestat::config::{AnalysisConfig, Method};
use shapestat::error::CliError;
use shapestat::landmarks::{self, Format, LandmarkFile};
use shapestat::report::{ConfigEcho, Document, ErrorDocument};
use shapestat::runner;
use shapestat::sim::{simulate_kads_stream, SimSpec};
use shapestat::svg;
use shapestat_core::intrinsic::KarcherConfig;

#[derive(Parser)]
#[command(
    name = "shapestat",
    version,
    about = "Nonparametric two-sample tests for planar landmark shapes",
    after_help = "Files not found relative to the working directory are also \
                  searched under $SHAPESTAT_DATA_DIR."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Extrinsic,
    Intrinsic,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Extrinsic => Method::Extrinsic,
            MethodArg::Intrinsic => Method::Intrinsic,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Native,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Native => Format::Native,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Metric(s) to analyze under.
    #[arg(long, value_enum, default_value_t = MethodArg::Extrinsic)]
    method: MethodArg,
    /// Test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Master seed for anything randomized (simulation, calibration, bootstrap).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replicates for calibration runs.
    #[arg(long, default_value_t = 500)]
    replicates: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Landmark file format.
    #[arg(long, value_enum, default_value_t = FormatArg::Native)]
    format: FormatArg,
    /// Karcher iteration step factor.
    #[arg(long, default_value_t = 1.0)]
    karcher_step: f64,
    /// Karcher gradient-norm tolerance.
    #[arg(long, default_value_t = 1e-9)]
    karcher_tol: f64,
    /// Karcher iteration cap.
    #[arg(long, default_value_t = 100)]
    karcher_max_iter: usize,
    /// Step for the finite-difference Hessian of the intrinsic tests.
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
}

impl CommonArgs {
    fn config(&self, bootstrap: Option<usize>) -> AnalysisConfig {
        AnalysisConfig {
            alpha: self.alpha,
            method: self.method.into(),
            karcher: KarcherConfig {
                step: self.karcher_step,
                tol: self.karcher_tol,
                max_iter: self.karcher_max_iter,
            },
            fd_step: self.fd_step,
            seed: self.seed,
            replicates: self.replicates,
            bootstrap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Test equality of mean shapes of two samples.
    MeanTest {
        file_a: PathBuf,
        file_b: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Test equality of shape variations of two samples.
    VariationTest {
        file_a: PathBuf,
        file_b: PathBuf,
        /// Replace the asymptotic p-value with a seeded nonparametric
        /// bootstrap p-value over this many resamples.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Mean shape and variation of a single sample.
    Summary {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Render a sample and its mean shape to an SVG figure.
    Plot {
        file: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Draw a noisy sample around a template object and write it out.
    Simulate {
        /// Landmark file providing the template.
        #[arg(long)]
        template: PathBuf,
        /// Which object of the template file to use (0-based).
        #[arg(long, default_value_t = 0)]
        object: usize,
        /// Per-landmark noise scale relative to centroid size.
        #[arg(long)]
        noise_sd: f64,
        /// Sample size.
        #[arg(short, long)]
        n: usize,
        /// Output landmark file.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo null calibration of the mean tests.
    Calibrate {
        /// Landmark file providing the template.
        #[arg(long)]
        template: PathBuf,
        /// Which object of the template file to use (0-based).
        #[arg(long, default_value_t = 0)]
        object: usize,
        /// Per-landmark noise scale relative to centroid size.
        #[arg(long)]
        noise_sd: f64,
        /// Size of the first sample per replicate.
        #[arg(short, long)]
        n: usize,
        /// Size of the second sample per replicate (defaults to n).
        #[arg(short, long)]
        m: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::MeanTest { .. } => "mean-test",
            Command::VariationTest { .. } => "variation-test",
            Command::Summary { .. } => "summary",
            Command::Plot { .. } => "plot",
            Command::Simulate { .. } => "simulate",
            Command::Calibrate { .. } => "calibrate",
        }
    }
}

/// Resolves a data path, falling back to $SHAPESTAT_DATA_DIR.
fn resolve(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if path.is_relative() {
        if let Ok(root) = std::env::var(shapestat::DATA_DIR_ENV) {
            let candidate = Path::new(&root).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn load(path: &Path, format: Format) -> Result<LandmarkFile, CliError> {
    landmarks::parse_landmarks(&resolve(path), format)
}

fn template_object(path: &Path, format: Format, object: usize) -> Result<shapestat_core::KAd, CliError> {
    let file = load(path, format)?;
    file.objects.get(object).cloned().ok_or_else(|| {
        CliError::Usage(format!(
            "template file '{}' has {} objects, index {object} is out of range",
            file.label,
            file.n()
        ))
    })
}

fn emit(doc: &Document, json_path: Option<&Path>) -> Result<(), CliError> {
    let text = doc.to_json();
    match json_path {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::MeanTest { file_a, file_b, common } => {
            let config = common.config(None);
            let format = common.format.into();
            let a = load(file_a, format)?;
            let b = load(file_b, format)?;
            let doc = runner::run_mean_test(&a, &b, &config, Format::from(common.format).as_str())?;
            emit(&doc, common.json.as_deref())
        }
        Command::VariationTest { file_a, file_b, bootstrap, common } => {
            let config = common.config(*bootstrap);
            let format = common.format.into();
            let a = load(file_a, format)?;
            let b = load(file_b, format)?;
            let doc =
                runner::run_variation_test(&a, &b, &config, Format::from(common.format).as_str())?;
            emit(&doc, common.json.as_deref())
        }
        Command::Summary { file, common } => {
            let config = common.config(None);
            let input = load(file, common.format.into())?;
            let doc = runner::run_summary(&input, &config, Format::from(common.format).as_str())?;
            emit(&doc, common.json.as_deref())
        }
        Command::Plot { file, out, common } => {
            let config = common.config(None);
            config.validate()?;
            let input = load(file, common.format.into())?;
            svg::plot_shapes(&input, &config, out)
        }
        Command::Simulate { template, object, noise_sd, n, out, common } => {
            let config = common.config(None);
            config.validate()?;
            let format = common.format.into();
            let kad = template_object(template, format, *object)?;
            let spec = SimSpec::new(kad, *noise_sd, *n)?;
            let objects = simulate_kads_stream(&spec, config.seed, 0);
            let label = out
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "simulated".into());
            let file = LandmarkFile::new(label, objects)?;
            landmarks::write_landmarks(&file, out, format)
        }
        Command::Calibrate { template, object, noise_sd, n, m, common } => {
            let config = common.config(None);
            let format: Format = common.format.into();
            let kad = template_object(template, format, *object)?;
            let spec = SimSpec::new(kad, *noise_sd, *n)?;
            let report = calibrate::calibrate(&spec, m.unwrap_or(*n), &config)?;
            let mut doc = Document::new("calibrate", ConfigEcho::new(&config, format.as_str()));
            doc.calibration = Some(report);
            emit(&doc, common.json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            println!("{}", ErrorDocument::new(cli.command.name(), &error).to_json());
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
