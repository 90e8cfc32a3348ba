use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};
use serde_json::json;

use sublevel::complex::{build_complex, derive_seed};
use sublevel::density::{covering_radius, select_landmarks_maxmin};
use sublevel::models::{config3_pool, ising_landmarks, ModelSpec};
use sublevel::persistence::{persistent_betti, reduce};
use sublevel::voronoi::delaunay_membership;
use sublevel::{sorted_filtration, validate, ConvexDomain, FnObjective, LandmarkSet, ToleranceConfig};
use sublevel_cli::config::{LandmarkSource, RunConfig, Tolerances};
use sublevel_cli::files::{read_diagram, read_points, write_json, ComplexFile, DiagramFile};
use sublevel_cli::{svg, CliError, Result};

/// Seed streams fanned out from `--seed`.
const STREAM_POOL: usize = 0;
const STREAM_LANDMARKS: usize = 1;
const STREAM_BUILD: usize = 2;

/// Pool size and threshold for three-point configuration landmarks.
const CONFIG3_POOL: usize = 4000;
const CONFIG3_LEVEL: f64 = 0.1;
const CONFIG3_HALF_WIDTH: f64 = 1.5;

#[derive(Parser)]
#[command(name = "sublevel", version, about = "Sublevel-set persistent homology from landmark complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the filtered complex and its persistence diagram.
    Build(BuildArgs),
    /// Print a persistent Betti number read off a saved diagram.
    Betti {
        /// diagram.json or diagram.csv
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// Compare the complex of f = 0 on R^d with the Delaunay complex.
    DelaunayCheck {
        /// Points CSV.
        #[arg(long)]
        landmarks: PathBuf,
    },
}

#[derive(clap::Args)]
struct BuildArgs {
    /// Built-in model.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(ModelSpec::NAMES))]
    model: Option<String>,
    /// Points CSV for the density model (implies `--model density`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Landmarks: a points CSV, `maxmin:K`, `ising-lowest:K` or `model`.
    #[arg(long, default_value = "model")]
    landmarks: String,
    /// Candidate pool CSV for `maxmin:K`; defaults to the data or the
    /// model's own sampler.
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Region sample CSV; its covering radius is reported in run_meta.json.
    #[arg(long)]
    region: Option<PathBuf>,
    /// Number of Ising sites.
    #[arg(long)]
    sites: Option<usize>,
    /// Density parameter h.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol_feas: Option<f64>,
    #[arg(long)]
    n_starts: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl BuildArgs {
    fn into_config(self) -> Result<RunConfig> {
        let model = match (self.model, &self.data) {
            (Some(m), _) => m,
            (None, Some(_)) => "density".to_string(),
            (None, None) => return Err(CliError::Config("either --model or --data is required".into())),
        };
        let mut tolerances = Tolerances::default();
        if let Some(t) = self.tol_feas {
            tolerances.tol_feas = t;
        }
        if let Some(n) = self.n_starts {
            tolerances.n_starts = n;
        }
        Ok(RunConfig {
            model,
            data: self.data,
            sites: self.sites,
            h: self.h,
            landmarks: self.landmarks.parse()?,
            pool: self.pool,
            region: self.region,
            max_dim: self.max_dim,
            seed: self.seed,
            tolerances,
            out: self.out,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => args.into_config().and_then(|cfg| cmd_build(&cfg)),
        Command::Betti { diagram, k, a, b } => {
            if a > b {
                Cli::command()
                    .error(clap::error::ErrorKind::ValueValidation, format!("--a ({a}) must not exceed --b ({b})"))
                    .exit();
            }
            cmd_betti(&diagram, k, a, b)
        }
        Command::DelaunayCheck { landmarks } => cmd_delaunay_check(&landmarks),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_landmarks(
    cfg: &RunConfig,
    spec: &ModelSpec,
    model_landmarks: Option<LandmarkSet>,
    data: Option<&[Vec<f64>]>,
) -> Result<LandmarkSet> {
    let landmark_seed = derive_seed(cfg.seed, &[STREAM_LANDMARKS]);
    match &cfg.landmarks {
        LandmarkSource::Model => model_landmarks.ok_or_else(|| {
            CliError::Config(format!("model `{}` has no built-in landmarks; pass --landmarks", spec.name()))
        }),
        LandmarkSource::File(path) => Ok(LandmarkSet::new(read_points(path)?)?),
        LandmarkSource::IsingLowest { count } => match *spec {
            ModelSpec::IsingInterval { sites } => Ok(ising_landmarks(sites, *count, false)?),
            ModelSpec::IsingCircle { sites } => Ok(ising_landmarks(sites, *count, true)?),
            _ => Err(CliError::Config("ising-lowest landmarks need an Ising model".into())),
        },
        LandmarkSource::Maxmin { count } => {
            let pool = match (&cfg.pool, data, spec) {
                (Some(path), _, _) => read_points(path)?,
                (None, Some(d), _) => d.to_vec(),
                (None, None, ModelSpec::Config3) => config3_pool(
                    CONFIG3_POOL,
                    CONFIG3_LEVEL,
                    CONFIG3_HALF_WIDTH,
                    derive_seed(cfg.seed, &[STREAM_POOL]),
                )?,
                _ => return Err(CliError::Config("maxmin landmarks need --pool for this model".into())),
            };
            Ok(select_landmarks_maxmin(&pool, *count, 1, landmark_seed)?)
        }
    }
}

fn cmd_build(cfg: &RunConfig) -> Result<ExitCode> {
    let started = Instant::now();
    let spec = ModelSpec::from_name(&cfg.model, cfg.sites, cfg.h)?;
    let data = match &cfg.data {
        Some(path) => Some(read_points(path)?),
        None if spec.needs_data() => return Err(CliError::Config("the density model needs --data".into())),
        None => None,
    };
    let model = spec.instantiate(data.as_deref())?;
    let landmarks = resolve_landmarks(cfg, &spec, model.landmarks.clone(), data.as_deref())?;
    let tol = cfg.tolerance_config();
    tol.check()?;

    let report = validate(&landmarks, &model.domain, model.objective.as_ref(), &tol);
    if !report.is_ok() {
        eprintln!("{report}");
        return Ok(ExitCode::FAILURE);
    }

    let build_seed = derive_seed(cfg.seed, &[STREAM_BUILD]);
    let complex = build_complex(&landmarks, &model.domain, model.objective.as_ref(), &tol, build_seed)?;
    let diagram = reduce(&sorted_filtration(&complex))?;
    let covering = match &cfg.region {
        Some(path) => Some(covering_radius(&landmarks, &read_points(path)?)),
        None => None,
    };

    let out = &cfg.out;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;
    write_json(&out.join("complex.json"), &ComplexFile::new(&landmarks, &complex))?;
    let diagram_file = DiagramFile::new(&diagram);
    write_json(&out.join("diagram.json"), &diagram_file)?;
    let csv_path = out.join("diagram.csv");
    std::fs::write(&csv_path, diagram_file.to_csv()).map_err(|source| CliError::Io {
        path: csv_path,
        source,
    })?;
    let range = svg::value_range(&diagram_file.points);
    for k in 0..=complex.max_dim() {
        let path = out.join(format!("diagram_{k}.svg"));
        std::fs::write(&path, svg::render(&diagram_file.points, k, range))
            .map_err(|source| CliError::Io { path, source })?;
    }
    let meta = json!({
        "config": cfg,
        "seeds": {
            "base": cfg.seed,
            "pool": derive_seed(cfg.seed, &[STREAM_POOL]),
            "landmarks": derive_seed(cfg.seed, &[STREAM_LANDMARKS]),
            "build": build_seed,
        },
        "landmark_count": landmarks.len(),
        "simplex_counts": complex.count_by_dim(),
        "covering_radius": covering,
        "wall_time_secs": started.elapsed().as_secs_f64(),
    });
    write_json(&out.join("run_meta.json"), &meta)?;

    println!(
        "{} landmarks, simplices per dimension {:?}, {} diagram points; wrote {}",
        landmarks.len(),
        complex.count_by_dim(),
        diagram.points.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_betti(path: &Path, k: usize, a: f64, b: f64) -> Result<ExitCode> {
    let diagram = read_diagram(path)?.to_diagram();
    println!("{}", persistent_betti(&diagram, k, a, b)?);
    Ok(ExitCode::SUCCESS)
}

fn subsets_up_to(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut frontier: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(first) = frontier.first() {
        if first.len() > max_len {
            break;
        }
        out.extend(frontier.iter().cloned());
        frontier = frontier
            .iter()
            .flat_map(|s| {
                let last = *s.last().expect("nonempty");
                (last + 1..n).map(move |j| {
                    let mut t = s.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    out
}

fn cmd_delaunay_check(path: &Path) -> Result<ExitCode> {
    let landmarks = LandmarkSet::new(read_points(path)?)?;
    let d = landmarks.dim();
    let tol = ToleranceConfig {
        max_dim: Some(d),
        ..ToleranceConfig::default()
    };
    let complex = build_complex(&landmarks, &ConvexDomain::whole_space(d), &FnObjective::zero(d), &tol, 0)?;
    let mut mismatches = Vec::new();
    let mut delaunay = 0;
    for s in subsets_up_to(landmarks.len(), d + 1) {
        let expected = delaunay_membership(&s, &landmarks, &tol)?;
        delaunay += usize::from(expected);
        if expected != complex.contains(&s) {
            mismatches.push((s, expected));
        }
    }
    if mismatches.is_empty() {
        println!("PASS: {delaunay} Delaunay simplices match the landmark complex");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL: {} mismatches", mismatches.len());
        for (s, expected) in mismatches.iter().take(20) {
            let side = if *expected { "missing from complex" } else { "not Delaunay" };
            println!("  {s:?}: {side}");
        }
        Ok(ExitCode::FAILURE)
    }
}
