//! Command-line flags and the JSON run configuration they resolve into.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use projmetric::geodesics::IntegratorConfig;
use projmetric::representation::DEFAULT_K_MAX;
use projmetric::scenarios::DEFAULT_PROFILE;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "projmetric", version, about = "Verify projective transformations of explicit metric families")]
pub struct Cli {
    /// Sampling seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sample points.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Tolerance for isometry/affine/projective residuals.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Report path (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the built scenario to this file.
    #[arg(long, global = true)]
    pub save_scenario: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<CommandArgs>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Levi-Civita family: classification, geodesics and representation.
    VerifyExample(VerifyArgs),
    /// Compare the numeric swap pullback with its closed form.
    PullbackCheck(PullbackArgs),
    /// Flat torus with an SL(2, Z) map.
    Torus(TorusArgs),
    /// Gnomonic sphere patch with a projective-linear map.
    Sphere(SphereArgs),
    /// Representation matrices for maps of a scenario file.
    Representation(RepresentationArgs),
    /// Search for the first nonpositive cos(kα) + s sin(kα).
    Lemma1(LemmaArgs),
    /// Geodesic cross-validation for a scenario file.
    Geodesics(GeodesicArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value = DEFAULT_PROFILE)]
    pub f: String,
    #[arg(long)]
    pub orientable: bool,
    #[arg(long, default_value = "flat")]
    pub base: String,
}

#[derive(Debug, Args)]
pub struct PullbackArgs {
    #[arg(long, default_value = DEFAULT_PROFILE)]
    pub f: String,
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct TorusArgs {
    /// Entries `a,b,c,d` of the integer matrix, row by row.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub matrix: Vec<i64>,
}

#[derive(Debug, Args)]
pub struct SphereArgs {
    /// Nine entries of the 3×3 matrix, row by row.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub matrix: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct RepresentationArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Comma-separated map labels (all maps when omitted).
    #[arg(long, value_delimiter = ',')]
    pub maps: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "1")]
    pub s: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub kmax: u64,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub shots: usize,
    /// Directory receiving one CSV per trace.
    #[arg(long)]
    pub emit_csv: Option<PathBuf>,
}

/// Fully resolved run description, copied verbatim into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub save_scenario: Option<PathBuf>,
    /// Geodesic shots used by `verify-example` and `sphere`.
    pub shots: usize,
    pub integrator: IntegratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: 1,
            samples: 200,
            tol: 1e-8,
            out: None,
            save_scenario: None,
            shots: 20,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    VerifyExample {
        n: usize,
        f: String,
        orientable: bool,
        base: String,
    },
    PullbackCheck {
        f: String,
        grid: usize,
    },
    Torus {
        matrix: [i64; 4],
    },
    Sphere {
        matrix: [f64; 9],
    },
    Representation {
        scenario: PathBuf,
        maps: Option<Vec<String>>,
    },
    Lemma1 {
        alpha: f64,
        s: Vec<f64>,
        kmax: u64,
    },
    Geodesics {
        scenario: PathBuf,
        shots: usize,
        emit_csv: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyExample { .. } => "verify-example",
            Command::PullbackCheck { .. } => "pullback-check",
            Command::Torus { .. } => "torus",
            Command::Sphere { .. } => "sphere",
            Command::Representation { .. } => "representation",
            Command::Lemma1 { .. } => "lemma1",
            Command::Geodesics { .. } => "geodesics",
        }
    }
}

fn entries<T, const N: usize>(v: Vec<T>) -> Result<[T; N], String> {
    let got = v.len();
    v.try_into().map_err(|_| format!("--matrix needs {N} comma-separated entries, got {got}"))
}

impl TryFrom<CommandArgs> for Command {
    type Error = String;

    fn try_from(args: CommandArgs) -> Result<Self, String> {
        Ok(match args {
            CommandArgs::VerifyExample(a) => Command::VerifyExample {
                n: a.n,
                f: a.f,
                orientable: a.orientable,
                base: a.base,
            },
            CommandArgs::PullbackCheck(a) => Command::PullbackCheck { f: a.f, grid: a.grid },
            CommandArgs::Torus(a) => Command::Torus {
                matrix: entries(a.matrix)?,
            },
            CommandArgs::Sphere(a) => Command::Sphere {
                matrix: entries(a.matrix)?,
            },
            CommandArgs::Representation(a) => Command::Representation {
                scenario: a.scenario,
                maps: a.maps,
            },
            CommandArgs::Lemma1(a) => Command::Lemma1 {
                alpha: a.alpha,
                s: a.s,
                kmax: a.kmax,
            },
            CommandArgs::Geodesics(a) => Command::Geodesics {
                scenario: a.scenario,
                shots: a.shots,
                emit_csv: a.emit_csv,
            },
        })
    }
}

/// Merges flags over the optional config file over defaults.
pub fn resolve(cli: Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = cli.command {
        cfg.command = Some(c.try_into()?);
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = cli.tol {
        cfg.tol = v;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    if cli.save_scenario.is_some() {
        cfg.save_scenario = cli.save_scenario;
    }
    if cfg.command.is_none() {
        return Err("no subcommand given (and none in the config file)".into());
    }
    if cfg.samples < 3 {
        return Err(format!("--samples must be at least 3, got {}", cfg.samples));
    }
    if !(cfg.tol > 0.0) {
        return Err(format!("--tol must be positive, got {}", cfg.tol));
    }
    cfg.integrator.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}
