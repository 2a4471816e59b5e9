//! Command-line front end: the five study commands, flat key=value config
//! files with flag overrides, and deterministic CSV/JSON/VTK serialization.

use crate::analytic::{self, OrderConvention};
use crate::bessel::{self, BesselOrder, ZeroIndex};
use crate::mesh::Mesh;
use crate::spectrum::{self, SolveParams, SpectrumResult};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes: 0 success (including an empty spectrum), 2 config error,
/// 3 numerical failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn report(&self) -> i32 {
        match self {
            CliError::Config(m) => {
                eprintln!("error[config]: {}", m.replace('\n', " "));
                EXIT_CONFIG
            }
            CliError::Numerical(m) => {
                eprintln!("error[numeric]: {}", m.replace('\n', " "));
                EXIT_NUMERICAL
            }
        }
    }
}

impl From<spectrum::SpectrumError> for CliError {
    fn from(e: spectrum::SpectrumError) -> Self {
        use spectrum::SpectrumError::*;
        match e {
            Analytic(_) | Mesh(_) | Bessel(_) | TooFewSteps(_) | BadRange(..)
            | TooFewLevels(_) => CliError::Config(e.to_string()),
            Fem(_) | Eigen(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("io: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "abwg",
    version,
    about = "Spectral studies of a slab waveguide with a circular Neumann window \
             threaded by an Aharonov-Bohm flux line"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate Bessel zeros x_{nu,n}, x'_{nu,n} with their closed-form lower bounds
    Zeros {
        /// Order nu > 0
        #[arg(long)]
        nu: f64,
        /// Number of zeros per family
        #[arg(long, default_value_t = 5)]
        n: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sample the critical window-radius curves a0(alpha), a1(alpha)
    Critical {
        #[arg(long, default_value_t = 0.01)]
        alpha_min: f64,
        #[arg(long, default_value_t = 0.99)]
        alpha_max: f64,
        #[arg(long, default_value_t = 99)]
        steps: usize,
        /// Use the order convention nu = alpha instead of nu = dist(alpha, Z)
        #[arg(long)]
        paper_literal: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the full eigenproblem and emit the merged discrete spectrum
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the window radius or the flux parameter
    Sweep {
        /// "radius" or "flux"
        #[arg(long, default_value = "radius")]
        kind: String,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        /// With --kind flux: use the order convention nu = alpha
        #[arg(long)]
        paper_literal: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Convergence study: eigenvalues vs h and vs r_max for one mode
    Converge {
        /// Angular mode to study
        #[arg(long, default_value_t = 0)]
        mode: i32,
        /// Comma-separated truncation radii (defaults derived from geometry)
        #[arg(long)]
        rmax_list: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Slab width
    #[arg(long)]
    d: Option<f64>,
    /// Window radius
    #[arg(long)]
    a: Option<f64>,
    /// Flux parameter (non-integer)
    #[arg(long)]
    alpha: Option<f64>,
    /// Truncation radius
    #[arg(long)]
    rmax: Option<f64>,
    /// Coarse mesh size
    #[arg(long)]
    h: Option<f64>,
    /// Geometric grading ratio
    #[arg(long)]
    grading: Option<f64>,
    /// Number of uniform refinements
    #[arg(long)]
    levels: Option<u32>,
    /// Eigensolver relative residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Threshold margin delta
    #[arg(long)]
    delta: Option<f64>,
    /// Angular modes, e.g. "-2..3" or "-2,-1,0,1"
    #[arg(long)]
    modes: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Eigensolver seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated formats: csv, json, vtk
    #[arg(long)]
    format: Option<String>,
}

/// Fully resolved run configuration; hashed into every output header.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub d: f64,
    pub a: f64,
    pub alpha: f64,
    pub rmax: f64,
    pub h: f64,
    pub grading: f64,
    pub levels: u32,
    pub tol: f64,
    pub delta: f64,
    pub modes: Vec<i32>,
    pub jobs: Option<usize>,
    pub seed: u64,
    pub formats: Vec<String>,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        let mut s = String::new();
        for b in digest {
            write!(s, "{b:02x}").unwrap();
        }
        s
    }

    fn geometry(&self) -> Result<analytic::Geometry, CliError> {
        analytic::Geometry::new(self.d, self.a, self.rmax)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    fn params(&self) -> SolveParams {
        SolveParams {
            h: self.h,
            grading: self.grading,
            levels: self.levels,
            tol: self.tol,
            delta: self.delta,
            seed: self.seed,
            rmax_check: false,
        }
    }
}

fn parse_modes(s: &str) -> Result<Vec<i32>, CliError> {
    let bad = || CliError::Config(format!("cannot parse mode list '{s}'"));
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key=value", path.display(), ln + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn file_num<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("config key '{key}': bad value '{v}'"))),
    }
}

struct Resolved {
    config: RunConfig,
    out_dir: PathBuf,
}

fn resolve(common: &CommonArgs) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(p) => parse_config_file(p)?,
        None => BTreeMap::new(),
    };
    let d = common.d.or(file_num(&file, "d")?).unwrap_or(std::f64::consts::PI);
    let a = common.a.or(file_num(&file, "a")?).unwrap_or(3.0);
    let alpha = common.alpha.or(file_num(&file, "alpha")?).unwrap_or(0.5);
    let rmax = common
        .rmax
        .or(file_num(&file, "rmax")?)
        .unwrap_or(a + 4.0 * d);
    let h = common.h.or(file_num(&file, "h")?).unwrap_or(0.35);
    let grading = common.grading.or(file_num(&file, "grading")?).unwrap_or(1.15);
    let levels = common.levels.or(file_num(&file, "levels")?).unwrap_or(2);
    let tol = common.tol.or(file_num(&file, "tol")?).unwrap_or(1e-8);
    let delta = common.delta.or(file_num(&file, "delta")?).unwrap_or(0.02);
    let seed = common.seed.or(file_num(&file, "seed")?).unwrap_or(0);
    let jobs = common.jobs.or(file_num(&file, "jobs")?);
    let modes = match common.modes.as_deref().or(file.get("modes").map(|s| s.as_str())) {
        Some(s) => parse_modes(s)?,
        None => {
            if alpha.fract() == 0.0 {
                return Err(CliError::Config(format!(
                    "alpha = {alpha} is an integer; the flux must be non-integer"
                )));
            }
            analytic::default_mode_range(alpha)
        }
    };
    let formats: Vec<String> = common
        .format
        .as_deref()
        .or(file.get("format").map(|s| s.as_str()))
        .unwrap_or("csv,json")
        .split(',')
        .map(|s| s.trim().to_lowercase())
        .collect();
    for f in &formats {
        if !["csv", "json", "vtk"].contains(&f.as_str()) {
            return Err(CliError::Config(format!("unknown format '{f}'")));
        }
    }
    let out_dir = common
        .out
        .clone()
        .or(file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let config = RunConfig {
        d,
        a,
        alpha,
        rmax,
        h,
        grading,
        levels,
        tol,
        delta,
        modes,
        jobs,
        seed,
        formats,
    };
    if let Some(j) = jobs {
        // best effort: the global pool can only be configured once
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    Ok(Resolved { config, out_dir })
}

fn header(config_hash: &str) -> String {
    let mut s = String::new();
    writeln!(s, "# abwg v{VERSION}").unwrap();
    writeln!(s, "# config sha256: {config_hash}").unwrap();
    writeln!(s, "# units: lengths in an arbitrary unit L, energies in 1/L^2").unwrap();
    writeln!(
        s,
        "# analytic constants: Bessel zeros from in-process series/backward \
         recurrence evaluation with safeguarded secant refinement"
    )
    .unwrap();
    s
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn cmd_zeros(nu: f64, n: u32, common: &CommonArgs) -> Result<(), CliError> {
    let r = resolve(common)?;
    let order = BesselOrder::new(nu).map_err(|e| CliError::Config(e.to_string()))?;
    let hash = r.config.hash();
    let mut csv = header(&hash);
    csv.push_str("n,x,x_lower_bound,xprime,xprime_lower_bound\n");
    for k in 1..=n {
        let idx = ZeroIndex::new(k).map_err(|e| CliError::Config(e.to_string()))?;
        let x = bessel::zero_j(order, idx).map_err(|e| CliError::Numerical(e.to_string()))?;
        let xb = bessel::lower_bound_zero(order, idx);
        let xp = bessel::zero_j_prime(order, idx)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let xpb = bessel::lower_bound_zero_prime(order, idx)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        writeln!(csv, "{k},{},{},{},{}", fmt(x), fmt(xb), fmt(xp), fmt(xpb)).unwrap();
        println!(
            "n={k}  x_{{nu,{k}}}={x:.12}  (bound {xb:.12})  x'_{{nu,{k}}}={xp:.12}  (bound {xpb:.12})"
        );
    }
    if r.config.formats.iter().any(|f| f == "csv") {
        write_file(&r.out_dir, "zeros.csv", &csv)?;
    }
    Ok(())
}

fn critical_csv(
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    convention: OrderConvention,
    hash: &str,
) -> Result<String, CliError> {
    let curve = spectrum::sweep_flux(alpha_min, alpha_max, steps, convention)?;
    let mut csv = header(hash);
    csv.push_str("alpha,a0_sharp,a1_sharp,a0_conservative,a1_conservative\n");
    for (i, &al) in curve.samples.iter().enumerate() {
        writeln!(
            csv,
            "{},{},{},{},{}",
            fmt(al),
            fmt(curve.curves["a0_sharp"][i]),
            fmt(curve.curves["a1_sharp"][i]),
            fmt(curve.curves["a0_conservative"][i]),
            fmt(curve.curves["a1_conservative"][i]),
        )
        .unwrap();
    }
    Ok(csv)
}

fn cmd_critical(
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    paper_literal: bool,
    common: &CommonArgs,
) -> Result<(), CliError> {
    let r = resolve(common)?;
    let convention = if paper_literal {
        OrderConvention::PaperLiteral
    } else {
        OrderConvention::MinimalOrder
    };
    let csv = critical_csv(alpha_min, alpha_max, steps, convention, &r.config.hash())?;
    write_file(&r.out_dir, "critical.csv", &csv)?;
    println!("critical curves sampled at {steps} flux values");
    Ok(())
}

fn spectrum_csv(result: &SpectrumResult, hash: &str) -> String {
    let mut csv = header(hash);
    csv.push_str("k,value,extrapolated,m,nu,bracket_lo,bracket_hi\n");
    for (k, mv) in result.eigenvalues.iter().enumerate() {
        let (lo, hi) = mv.bracket.unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            k + 1,
            fmt(mv.value),
            mv.extrapolated.map(fmt).unwrap_or_default(),
            mv.m,
            fmt(mv.nu),
            fmt(lo),
            fmt(hi),
        )
        .unwrap();
    }
    csv
}

/// Legacy-ASCII VTK of the (r, z) triangulation with one scalar field.
fn vtk_2d(mesh: &Mesh, field: &[f64], name: &str, hash: &str) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "abwg v{VERSION} config {hash}").unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", mesh.nodes.len()).unwrap();
    for n in &mesh.nodes {
        writeln!(s, "{} {} 0.0", fmt(n.r), fmt(n.z)).unwrap();
    }
    writeln!(s, "CELLS {} {}", mesh.triangles.len(), 4 * mesh.triangles.len()).unwrap();
    for t in &mesh.triangles {
        writeln!(s, "3 {} {} {}", t.v[0], t.v[1], t.v[2]).unwrap();
    }
    writeln!(s, "CELL_TYPES {}", mesh.triangles.len()).unwrap();
    for _ in &mesh.triangles {
        s.push_str("5\n");
    }
    writeln!(s, "POINT_DATA {}", mesh.nodes.len()).unwrap();
    writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
    for v in field {
        writeln!(s, "{}", fmt(*v)).unwrap();
    }
    s
}

/// Revolved bottom-trace surface: the field on z = 0 swept through 64 angular
/// steps as u(r)·cos(mθ), plotted as surface height.
fn vtk_revolved(mesh: &Mesh, field: &[f64], m: i32, hash: &str) -> String {
    let mut bottom: Vec<(f64, f64)> = mesh
        .nodes
        .iter()
        .zip(field)
        .filter(|(n, _)| n.z == 0.0)
        .map(|(n, v)| (n.r, *v))
        .collect();
    bottom.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let steps = 64usize;
    let nr = bottom.len();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "abwg v{VERSION} config {hash} revolved surface").unwrap();
    s.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    writeln!(s, "DIMENSIONS {} {} 1", nr, steps + 1).unwrap();
    writeln!(s, "POINTS {} double", nr * (steps + 1)).unwrap();
    let mut scalars = Vec::with_capacity(nr * (steps + 1));
    for it in 0..=steps {
        let theta = 2.0 * std::f64::consts::PI * it as f64 / steps as f64;
        for &(r, v) in &bottom {
            let u = v * (m as f64 * theta).cos();
            writeln!(
                s,
                "{} {} {}",
                fmt(r * theta.cos()),
                fmt(r * theta.sin()),
                fmt(u)
            )
            .unwrap();
            scalars.push(u);
        }
    }
    writeln!(s, "POINT_DATA {}", nr * (steps + 1)).unwrap();
    s.push_str("SCALARS u double 1\nLOOKUP_TABLE default\n");
    for u in &scalars {
        writeln!(s, "{}", fmt(*u)).unwrap();
    }
    s
}

fn cmd_solve(common: &CommonArgs) -> Result<(), CliError> {
    let r = resolve(common)?;
    let cfg = &r.config;
    let geometry = cfg.geometry()?;
    let result = spectrum::solve_full(&geometry, cfg.alpha, &cfg.modes, &cfg.params())?;
    let hash = cfg.hash();

    println!(
        "classification: {}  (a/d = {:.6})",
        result.classification,
        cfg.a / cfg.d
    );
    println!(
        "discrete eigenvalues below {:.6}: {}",
        result.report_limit,
        result.eigenvalues.len()
    );
    for (k, mv) in result.eigenvalues.iter().enumerate() {
        println!(
            "  lambda_{} = {:.10}  (m = {}, nu = {:.4})",
            k + 1,
            mv.value,
            mv.m,
            mv.nu
        );
    }

    if cfg.formats.iter().any(|f| f == "csv") {
        write_file(&r.out_dir, "eigenvalues.csv", &spectrum_csv(&result, &hash))?;
    }
    if cfg.formats.iter().any(|f| f == "json") {
        let mut json = serde_json::json!({
            "header": {
                "tool": format!("abwg v{VERSION}"),
                "config_sha256": hash,
                "units": "lengths in an arbitrary unit L, energies in 1/L^2",
            },
            "config": cfg,
        });
        json["result"] = serde_json::to_value(&result).expect("result serializes");
        write_file(
            &r.out_dir,
            "spectrum.json",
            &serde_json::to_string_pretty(&json).expect("json renders"),
        )?;
    }
    if cfg.formats.iter().any(|f| f == "vtk") {
        // first eigenfunction of the mode owning the ground state
        if let Some(ground) = result.eigenvalues.first() {
            let mode = result
                .modes
                .iter()
                .find(|mr| mr.m == ground.m)
                .expect("ground mode present");
            if let (Some(mesh), Some(field)) = (&mode.mesh, mode.fields.first()) {
                write_file(
                    &r.out_dir,
                    "eigenfield.vtk",
                    &vtk_2d(mesh, field, "u_ground", &hash),
                )?;
                write_file(
                    &r.out_dir,
                    "eigenfield_revolved.vtk",
                    &vtk_revolved(mesh, field, ground.m, &hash),
                )?;
            }
        }
    }

    if !result.bracket_violations.is_empty() {
        return Err(CliError::Numerical(format!(
            "bracket violations: {}",
            result.bracket_violations.join("; ")
        )));
    }
    Ok(())
}

fn cmd_sweep(
    kind: &str,
    min: Option<f64>,
    max: Option<f64>,
    steps: usize,
    paper_literal: bool,
    common: &CommonArgs,
) -> Result<(), CliError> {
    let r = resolve(common)?;
    let cfg = &r.config;
    let hash = cfg.hash();
    match kind {
        "radius" => {
            let a_min = min.unwrap_or(0.5 * cfg.d);
            let a_max = max.unwrap_or(1.3 * cfg.d);
            let curve = spectrum::sweep_radius(
                cfg.d,
                cfg.rmax,
                a_min,
                a_max,
                steps,
                cfg.alpha,
                &cfg.modes,
                &cfg.params(),
            )?;
            let mut csv = header(&hash);
            if let Some(e) = curve.emergence {
                writeln!(csv, "# emergence radius: {}", fmt(e)).unwrap();
            }
            csv.push_str("a,classification,count,eigenvalues\n");
            for (i, &a) in curve.samples.iter().enumerate() {
                let evs: Vec<String> =
                    curve.eigenvalues[i].iter().map(|&v| fmt(v)).collect();
                writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt(a),
                    curve.classifications[i],
                    curve.eigenvalues[i].len(),
                    evs.join(";")
                )
                .unwrap();
            }
            if cfg.formats.iter().any(|f| f == "csv") {
                write_file(&r.out_dir, "sweep_radius.csv", &csv)?;
            }
            if cfg.formats.iter().any(|f| f == "json") {
                write_file(
                    &r.out_dir,
                    "sweep_radius.json",
                    &serde_json::to_string_pretty(&curve).expect("curve serializes"),
                )?;
            }
            match curve.emergence {
                Some(e) => println!("emergence radius: {e:.6}"),
                None => println!("no emergence within the sampled range"),
            }
        }
        "flux" => {
            let alpha_min = min.unwrap_or(0.01);
            let alpha_max = max.unwrap_or(0.99);
            let convention = if paper_literal {
                OrderConvention::PaperLiteral
            } else {
                OrderConvention::MinimalOrder
            };
            let csv = critical_csv(alpha_min, alpha_max, steps, convention, &hash)?;
            write_file(&r.out_dir, "sweep_flux.csv", &csv)?;
            println!("flux sweep sampled at {steps} points");
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown sweep kind '{other}' (expected radius or flux)"
            )))
        }
    }
    Ok(())
}

fn cmd_converge(mode: i32, rmax_list: Option<&str>, common: &CommonArgs) -> Result<(), CliError> {
    let r = resolve(common)?;
    let cfg = &r.config;
    let geometry = cfg.geometry()?;
    let rmaxes: Vec<f64> = match rmax_list {
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad rmax value '{t}'")))
            })
            .collect::<Result<_, _>>()?,
        None => vec![cfg.rmax, 1.25 * cfg.rmax, 1.5 * cfg.rmax],
    };
    let mut params = cfg.params();
    params.levels = params.levels.max(3);
    let report = spectrum::convergence_study(&geometry, cfg.alpha, mode, &params, &rmaxes)?;
    let hash = cfg.hash();

    let mut csv = header(&hash);
    csv.push_str("h,eigenvalues\n");
    for (h, vals) in &report.h_table {
        let evs: Vec<String> = vals.iter().map(|&v| fmt(v)).collect();
        writeln!(csv, "{},{}", fmt(*h), evs.join(";")).unwrap();
    }
    csv.push_str("rmax,eigenvalues\n");
    for (rm, vals) in &report.rmax_table {
        let evs: Vec<String> = vals.iter().map(|&v| fmt(v)).collect();
        writeln!(csv, "{},{}", fmt(*rm), evs.join(";")).unwrap();
    }
    if cfg.formats.iter().any(|f| f == "csv") {
        write_file(&r.out_dir, "convergence.csv", &csv)?;
    }
    if cfg.formats.iter().any(|f| f == "json") {
        write_file(
            &r.out_dir,
            "convergence.json",
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
    }
    for (k, o) in report.observed_order.iter().enumerate() {
        match o {
            Some(p) => println!("eigenvalue {}: observed order {p:.3}", k + 1),
            None => println!("eigenvalue {}: order not resolved", k + 1),
        }
    }
    println!(
        "rmax monotonicity: {}",
        if report.rmax_monotone { "ok" } else { "violated" }
    );
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("bad arguments");
                return CliError::Config(first.to_string()).report();
            }
            // --help / --version
            print!("{e}");
            return EXIT_OK;
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Zeros { nu, n, common } => cmd_zeros(*nu, *n, common),
        Cmd::Critical {
            alpha_min,
            alpha_max,
            steps,
            paper_literal,
            common,
        } => cmd_critical(*alpha_min, *alpha_max, *steps, *paper_literal, common),
        Cmd::Solve { common } => cmd_solve(common),
        Cmd::Sweep {
            kind,
            min,
            max,
            steps,
            paper_literal,
            common,
        } => cmd_sweep(kind, *min, *max, *steps, *paper_literal, common),
        Cmd::Converge {
            mode,
            rmax_list,
            common,
        } => cmd_converge(*mode, rmax_list.as_deref(), common),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => e.report(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_list_parsing() {
        assert_eq!(parse_modes("-2..3").unwrap(), vec![-2, -1, 0, 1, 2, 3]);
        assert_eq!(parse_modes("0,2, -1").unwrap(), vec![0, 2, -1]);
        assert!(parse_modes("3..-2").is_err());
        assert!(parse_modes("a,b").is_err());
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let mk = |seed| RunConfig {
            d: std::f64::consts::PI,
            a: 3.0,
            alpha: 0.5,
            rmax: 12.0,
            h: 0.3,
            grading: 1.15,
            levels: 2,
            tol: 1e-8,
            delta: 0.02,
            modes: vec![0, 1],
            jobs: None,
            seed,
            formats: vec!["csv".into()],
        };
        assert_eq!(mk(0).hash(), mk(0).hash());
        assert_ne!(mk(0).hash(), mk(1).hash());
        assert_eq!(mk(0).hash().len(), 64);
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "d = 3.14   # slab\nalpha=0.3\nmodes = -1..1\n").unwrap();
        let map = parse_config_file(&path).unwrap();
        assert_eq!(map["d"], "3.14");
        assert_eq!(map["alpha"], "0.3");
        assert_eq!(parse_modes(&map["modes"]).unwrap(), vec![-1, 0, 1]);
        std::fs::write(&path, "no equals sign\n").unwrap();
        assert!(parse_config_file(&path).is_err());
    }
}
