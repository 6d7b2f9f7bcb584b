//! Command line front end: validate data, build the differential,
//! synthesize and certify nets, apply transformations, assemble Bianchi
//! cubes, or run the whole verification battery.
//!
//! Exit codes: 0 all checks pass, 1 a certification failed, 2 the data
//! is invalid, 3 an input/output error.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ribnet::curve::SpectralCurveData;
use ribnet::dataset::{self, DatasetError};
use ribnet::export::{write_net, write_net_to_path, Format};
use ribnet::net::{conjugacy_report, orthogonality_report, synth_net, Grid, NetError};
use ribnet::omega::{build_omega, OmegaError, ResidueTable};
use ribnet::report::RunReport;
use ribnet::ribaucour::{
    bianchi_cube, closed_form_l1, lemma_identities, ribaucour_pair, RibError,
};
use ribnet::tol::Tolerances;

#[derive(Parser)]
#[command(name = "ribnet", version, about = "Orthogonal nets from rational spectral data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Dataset: a JSON file path or a shipped name (ds-n2-l1, ds-n3-l2, ds-n1-l1)
    dataset: String,
    /// Grid as start,end,count per axis, semicolon separated; one spec
    /// replicates over all axes. Default: -1,1,33 on every axis.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Tolerance override KEY=VALUE (repeatable)
    #[arg(long = "tol", value_name = "KEY=VAL")]
    tol: Vec<String>,
    /// Seed for the sampled identity checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report (or exported net) to this path instead of stdout
    #[arg(long)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check structural admissibility of the data
    Validate(Common),
    /// Construct the even differential and print the residue table
    Omega(Common),
    /// Sample the net over a grid and certify orthogonality and conjugacy
    Synth {
        #[command(flatten)]
        common: Common,
        /// Output encoding for --output: csv, json or obj
        #[arg(long, default_value = "json")]
        format: Format,
    },
    /// Certify one Ribaucour transformation
    Transform {
        #[command(flatten)]
        common: Common,
        /// Which movable point to swap (1-based)
        #[arg(long)]
        alpha: usize,
    },
    /// Build all 2^l nets and certify edges and elementary circles
    Cube(Common),
    /// Run the full verification battery
    Verify(Common),
    /// Sample the net and write only its geometry
    Export {
        #[command(flatten)]
        common: Common,
        /// Output encoding: csv, json or obj
        #[arg(long, default_value = "csv")]
        format: Format,
    },
}

enum AppError {
    Certification(String),
    Invalid(String),
    Io(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Certification(_) => 1,
            AppError::Invalid(_) => 2,
            AppError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Certification(m) | AppError::Invalid(m) | AppError::Io(m) => m,
        }
    }
}

impl From<DatasetError> for AppError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => AppError::Io(e.to_string()),
            DatasetError::Curve(_) => AppError::Invalid(e.to_string()),
        }
    }
}

impl From<OmegaError> for AppError {
    fn from(e: OmegaError) -> Self {
        match e {
            OmegaError::InvalidData(_) => AppError::Invalid(e.to_string()),
            OmegaError::NotFound { .. } => AppError::Certification(e.to_string()),
        }
    }
}

impl From<NetError> for AppError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::InvalidData(_) | NetError::GridMismatch { .. } => {
                AppError::Invalid(e.to_string())
            }
            _ => AppError::Certification(e.to_string()),
        }
    }
}

impl From<RibError> for AppError {
    fn from(e: RibError) -> Self {
        match e {
            RibError::Net(inner) => inner.into(),
            RibError::Omega(inner) => inner.into(),
            RibError::IndexOutOfRange { .. } | RibError::NotApplicable(_) => {
                AppError::Invalid(e.to_string())
            }
            _ => AppError::Certification(e.to_string()),
        }
    }
}

fn parse_tols(overrides: &[String]) -> Result<Tolerances, AppError> {
    let mut tol = Tolerances::default();
    for spec in overrides {
        let (key, val) = spec
            .split_once('=')
            .ok_or_else(|| AppError::Invalid(format!("bad tolerance override {spec:?}")))?;
        let v: f64 = val
            .parse()
            .map_err(|_| AppError::Invalid(format!("bad tolerance value in {spec:?}")))?;
        if !tol.set(key.trim(), v) {
            return Err(AppError::Invalid(format!("unknown tolerance key {key:?}")));
        }
    }
    Ok(tol)
}

fn load_all(common: &Common) -> Result<(SpectralCurveData, Grid, Tolerances), AppError> {
    let data = dataset::load(&common.dataset)?;
    let tol = parse_tols(&common.tol)?;
    let grid = match &common.grid {
        Some(spec) => Grid::parse(spec, data.n)
            .map_err(|e| AppError::Invalid(e.to_string()))?,
        None => Grid::default_for(data.n, 33),
    };
    Ok((data, grid, tol))
}

fn emit(common: &Common, text: &str) -> Result<(), AppError> {
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| AppError::Io(e.to_string())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.cmd {
        Cmd::Validate(common) => {
            let data = dataset::load(&common.dataset)?;
            let rep = data.validate();
            emit(&common, &serde_json::to_string_pretty(&rep).unwrap())?;
            if rep.is_admissible() {
                Ok(())
            } else {
                Err(AppError::Invalid(format!(
                    "{} admissibility violations",
                    rep.violations.len()
                )))
            }
        }
        Cmd::Omega(common) => {
            let (data, _, tol) = load_all(&common)?;
            let omega = build_omega(&data, &tol)?;
            let table = ResidueTable {
                residues_q: omega.residues_q.clone(),
                residues_r: omega.residues_r.clone(),
                solution_space_dim: omega.nullity,
            };
            emit(&common, &serde_json::to_string_pretty(&table).unwrap())
        }
        Cmd::Synth { common, format } => {
            let (data, grid, tol) = load_all(&common)?;
            let build = synth_net(&data, &grid, &tol)?;
            let mut rep = RunReport::new(dataset::data_hash(&data));
            rep.orthogonality = Some(orthogonality_report(&build.net, &tol));
            rep.conjugacy = Some(conjugacy_report(&build.net, &tol));
            rep.max_imag = Some(build.net.max_imag);
            rep.finalize(tol.realness);
            if let Some(path) = &common.output {
                write_net_to_path(&build.net, format, path)
                    .map_err(|e| AppError::Io(e.to_string()))?;
                println!("{}", rep.to_json());
            } else {
                println!("{}", rep.to_json());
            }
            if rep.pass {
                Ok(())
            } else {
                Err(AppError::Certification("net certification failed".to_string()))
            }
        }
        Cmd::Transform { common, alpha } => {
            let (data, grid, tol) = load_all(&common)?;
            let rep = ribaucour_pair(&data, &grid, alpha, &tol)?;
            emit(&common, &serde_json::to_string_pretty(&rep).unwrap())?;
            if rep.stats.pass {
                Ok(())
            } else {
                Err(AppError::Certification(
                    "transform certification failed".to_string(),
                ))
            }
        }
        Cmd::Cube(common) => {
            let (data, grid, tol) = load_all(&common)?;
            let rep = bianchi_cube(&data, &grid, &tol)?;
            emit(&common, &serde_json::to_string_pretty(&rep).unwrap())?;
            if rep.pass {
                Ok(())
            } else {
                Err(AppError::Certification("cube certification failed".to_string()))
            }
        }
        Cmd::Verify(common) => {
            let (data, grid, tol) = load_all(&common)?;
            let mut rep = RunReport::new(dataset::data_hash(&data));
            let validation = data.validate();
            let admissible = validation.is_admissible();
            rep.validation = Some(validation);
            if !admissible {
                emit(&common, &rep.to_json())?;
                return Err(AppError::Invalid("data fails admissibility".to_string()));
            }
            let omega = build_omega(&data, &tol)?;
            rep.residues = Some(ResidueTable {
                residues_q: omega.residues_q.clone(),
                residues_r: omega.residues_r.clone(),
                solution_space_dim: omega.nullity,
            });
            let build = synth_net(&data, &grid, &tol)?;
            rep.orthogonality = Some(orthogonality_report(&build.net, &tol));
            rep.conjugacy = Some(conjugacy_report(&build.net, &tol));
            rep.max_imag = Some(build.net.max_imag);
            for alpha in 1..=data.l {
                rep.ribaucour.push(ribaucour_pair(&data, &grid, alpha, &tol)?);
                let u: Vec<f64> = (0..data.n)
                    .map(|i| 0.15 + 0.2 * (alpha + i) as f64 / data.n as f64)
                    .collect();
                rep.lemmas
                    .push(lemma_identities(&data, alpha, &u, common.seed, &tol)?);
            }
            rep.cube = Some(bianchi_cube(&data, &grid, &tol)?);
            if data.l == 1 && data.d.first() == Some(&1.0) && data.d[1..].iter().all(|&v| v == 0.0)
            {
                rep.closed_form = Some(closed_form_l1(&data, &grid, &tol)?);
            }
            rep.finalize(tol.realness);
            emit(&common, &rep.to_json())?;
            if rep.pass {
                Ok(())
            } else {
                Err(AppError::Certification("verification failed".to_string()))
            }
        }
        Cmd::Export { common, format } => {
            let (data, grid, tol) = load_all(&common)?;
            let build = synth_net(&data, &grid, &tol)?;
            match &common.output {
                Some(path) => write_net_to_path(&build.net, format, path)
                    .map_err(|e| AppError::Io(e.to_string())),
                None => {
                    let mut out = std::io::stdout().lock();
                    write_net(&build.net, format, &mut out)
                        .and_then(|_| out.flush().map_err(Into::into))
                        .map_err(|e| AppError::Io(e.to_string()))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("RIBNET_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
