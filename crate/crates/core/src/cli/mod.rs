//! Command-line front end of the `bqk` binary.
//!
//! Exit codes: 0 success, 2 invalid input, 3 violated invariant, 4 solver
//! failure, 5 failed verification.

mod verify;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::classify::{classify_connection, enumerate_classes, quantum_numbers_json};
use crate::error::{Error, Result};
use crate::gauge::{self, ConnectionU1};
use crate::mesh::catalogue::{CatalogueShape, NAMES};
use crate::mesh::{io, refine::refine, MeshComplex};
use crate::operators::FourierCircle;
use crate::spectra::{self, EigenOptions, SpectrumResult, SweepRow};
use crate::units::Units;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "bqk", version, about = "Topological quantum numbers, canonical operators and spectra on meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Homology and the classification card of the inequivalent quantizations.
    Classify,
    /// Lowest eigenvalues of the magnetic Hamiltonian, or a flux-angle sweep.
    Spectrum,
    /// Runs the invariant suite and reports measured numbers.
    Verify,
    /// Lists the catalogue manifolds.
    Catalogue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Options {
    /// Catalogue manifold, NAME[:key=value,...].
    #[arg(long, global = true, conflicts_with = "mesh")]
    manifold: Option<String>,
    /// Mesh file (JSON).
    #[arg(long, global = true)]
    mesh: Option<PathBuf>,
    /// Connection file (JSON edge phases).
    #[arg(long, global = true, conflicts_with_all = ["monopole", "theta"])]
    connection: Option<PathBuf>,
    /// Monopole (uniform flux) connection with Chern number N.
    #[arg(long, global = true, allow_negative_numbers = true, conflicts_with = "theta")]
    monopole: Option<i64>,
    /// Flat connection with flux angles θ_1,θ_2,… around the free cycles.
    #[arg(long, global = true, allow_negative_numbers = true, value_delimiter = ',', conflicts_with = "theta_sweep")]
    theta: Option<Vec<f64>>,
    /// Torsion characters m_1,m_2,… of a flat connection.
    #[arg(long, global = true, value_delimiter = ',')]
    torsion: Option<Vec<i64>>,
    /// Flux-angle sweep a:b:step, endpoints included.
    #[arg(long, global = true)]
    theta_sweep: Option<String>,
    /// Subdivision level (sphere, projective plane) or number of refinements.
    #[arg(long, global = true)]
    subdiv: Option<usize>,
    /// Real constant c of the momentum.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 0.0)]
    c: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    hbar: f64,
    #[arg(short = 'e', long = "charge", global = true, default_value_t = 1.0)]
    charge: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    mass: f64,
    /// Fourier cutoff K of the circle backend (modes |k| ≤ K).
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Number of eigenvalues.
    #[arg(long, global = true)]
    eigs: Option<usize>,
    /// Writes the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed of the random starts and random test data
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Human-readable tables instead of JSON/CSV.
    #[arg(long, global = true)]
    pretty: bool,
    /// Also writes the Hamiltonian triplets to this path.
    #[arg(long, global = true)]
    dump_hamiltonian: Option<PathBuf>,
}

/// Where the configuration manifold comes from.
#[derive(Clone, Debug)]
pub enum ManifoldSource {
    Catalogue(CatalogueShape),
    File { path: PathBuf, refinements: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionSpec {
    Trivial,
    Flat { thetas: Vec<f64>, torsion: Vec<i64> },
    Monopole(i64),
    File(PathBuf),
}

impl ConnectionSpec {
    fn describe(&self) -> Value {
        match self {
            ConnectionSpec::Trivial => json!({"kind": "trivial"}),
            ConnectionSpec::Flat { thetas, torsion } => json!({"kind": "flat", "thetas": thetas, "torsion": torsion}),
            ConnectionSpec::Monopole(n) => json!({"kind": "monopole", "n": n}),
            ConnectionSpec::File(p) => json!({"kind": "file", "path": p.display().to_string()}),
        }
    }

    /// The connection on `mesh`; files are read as given, the other kinds
    /// are rebuilt for any resolution.
    pub fn build(&self, mesh: &MeshComplex) -> Result<ConnectionU1> {
        match self {
            ConnectionSpec::Trivial => Ok(ConnectionU1::trivial(mesh)),
            ConnectionSpec::Monopole(n) => gauge::monopole_connection(mesh, *n),
            ConnectionSpec::Flat { thetas, torsion } => {
                let topo = mesh.topology();
                let mut th = thetas.clone();
                if th.len() == 1 && topo.h1.betti > 1 {
                    th.resize(topo.h1.betti, 0.0);
                }
                let tor = if torsion.is_empty() { vec![0; topo.h1.torsion.len()] } else { torsion.clone() };
                if th.is_empty() && topo.h1.betti > 0 {
                    th = vec![0.0; topo.h1.betti];
                }
                gauge::flat_connection(mesh, &th, &tor)
            }
            ConnectionSpec::File(p) => gauge::parse_connection(mesh, &std::fs::read_to_string(p)?),
        }
    }

    fn refinable(&self) -> bool {
        !matches!(self, ConnectionSpec::File(_))
    }
}

/// Validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub manifold: Option<ManifoldSource>,
    pub connection: ConnectionSpec,
    pub units: Units,
    pub c: f64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub modes: Option<usize>,
    pub eigs: Option<usize>,
    pub sweep: Option<Vec<f64>>,
    pub csv: bool,
    pub pretty: bool,
    pub out: Option<PathBuf>,
    pub dump_hamiltonian: Option<PathBuf>,
}

impl RunConfig {
    fn eigen_options(&self) -> EigenOptions {
        let mut o = EigenOptions { seed: self.seed, ..Default::default() };
        if let Some(t) = self.tol {
            o.tol = t;
        }
        o
    }

    pub fn mesh(&self) -> Result<MeshComplex> {
        match &self.manifold {
            Some(ManifoldSource::Catalogue(shape)) => shape.build(),
            Some(ManifoldSource::File { path, refinements }) => {
                let mut m = io::load_mesh(path)?;
                for _ in 0..*refinements {
                    m = refine(&m)?;
                }
                Ok(m)
            }
            None => Err(Error::InvalidArgument("a manifold is required: pass --manifold or --mesh".into())),
        }
    }

    fn shape(&self) -> Option<CatalogueShape> {
        match &self.manifold {
            Some(ManifoldSource::Catalogue(s)) => Some(*s),
            _ => None,
        }
    }
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code and stable name of an error.
pub fn classify_error(e: &Error) -> (i32, &'static str) {
    match e {
        Error::Parse(_) => (EXIT_INPUT, "parse"),
        Error::NonClosingFace { .. } => (EXIT_INPUT, "non_closing_face"),
        Error::NonPositiveWeight(_) => (EXIT_INPUT, "non_positive_weight"),
        Error::DanglingEdge { .. } => (EXIT_INPUT, "dangling_edge"),
        Error::InvalidMesh(_) => (EXIT_INPUT, "invalid_mesh"),
        Error::UnknownManifold(_) => (EXIT_INPUT, "unknown_manifold"),
        Error::ResolutionTooLow(_) => (EXIT_INPUT, "resolution_too_low"),
        Error::MixedArity => (EXIT_INPUT, "mixed_arity"),
        Error::InvalidDegree(_) => (EXIT_INPUT, "invalid_degree"),
        Error::ShapeMismatch(_) => (EXIT_INPUT, "shape_mismatch"),
        Error::BrokenAntisymmetry(_) => (EXIT_INPUT, "broken_antisymmetry"),
        Error::ManifoldMismatch(..) => (EXIT_INPUT, "manifold_mismatch"),
        Error::InvalidArgument(_) => (EXIT_INPUT, "invalid_argument"),
        Error::NoCycle => (EXIT_INPUT, "no_cycle"),
        Error::Io(_) => (EXIT_INPUT, "io"),
        Error::Json(_) => (EXIT_INPUT, "json"),
        Error::NotACycle => (EXIT_INVARIANT, "not_a_cycle"),
        Error::NonIntegralFlux(_) => (EXIT_INVARIANT, "non_integral_flux"),
        Error::Topology(_) => (EXIT_INVARIANT, "topology"),
        Error::FluxBound { .. } => (EXIT_INVARIANT, "flux_bound"),
        Error::NotHermitian(_) => (EXIT_INVARIANT, "not_hermitian"),
        Error::NonFlatCharacter(_) => (EXIT_INVARIANT, "non_flat_character"),
        Error::NoConvergence(_) => (EXIT_SOLVER, "no_convergence"),
    }
}

fn error_outcome(e: &Error) -> Outcome {
    let (code, kind) = classify_error(e);
    let body = json!({"error": kind, "message": e.to_string(), "exit_code": code});
    Outcome { code, stdout: String::new(), stderr: body.to_string() + "\n" }
}

/// Parses a:b:step into the inclusive list a, a+step, …, b.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidArgument(format!("theta sweep '{s}' must be a:b:step with step > 0"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> =
        parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && step.is_finite() && a.is_finite() && b.is_finite() && b >= a) {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::InvalidArgument("theta sweep has more than 100000 points".into()));
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

/// Parses NAME[:key=value,...] against the catalogue.
pub fn parse_manifold(spec: &str, subdiv: Option<usize>) -> Result<CatalogueShape> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("manifold parameter '{kv}' is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::InvalidArgument(format!("parameter {k} is not a number")))?;
        params.insert(k.trim().to_string(), v);
    }
    let shape = CatalogueShape::parse(name.trim(), &params)?;
    Ok(match (shape, subdiv) {
        (_, None) => shape,
        (CatalogueShape::Sphere { .. }, Some(l)) => CatalogueShape::Sphere { level: l },
        (CatalogueShape::ProjectivePlane { .. }, Some(l)) => CatalogueShape::ProjectivePlane { level: l },
        (s, Some(l)) => s.refined(l),
    })
}

fn config_from(opts: &Options, env_tol: Option<&str>) -> Result<RunConfig> {
    let manifold = match (&opts.manifold, &opts.mesh) {
        (Some(m), None) => Some(ManifoldSource::Catalogue(parse_manifold(m, opts.subdiv)?)),
        (None, Some(p)) => Some(ManifoldSource::File { path: p.clone(), refinements: opts.subdiv.unwrap_or(0) }),
        (None, None) => None,
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("--manifold and --mesh are exclusive".into())),
    };
    let connection = if let Some(p) = &opts.connection {
        ConnectionSpec::File(p.clone())
    } else if let Some(n) = opts.monopole {
        ConnectionSpec::Monopole(n)
    } else if opts.theta.is_some() || opts.torsion.is_some() {
        ConnectionSpec::Flat {
            thetas: opts.theta.clone().unwrap_or_default(),
            torsion: opts.torsion.clone().unwrap_or_default(),
        }
    } else {
        ConnectionSpec::Trivial
    };
    if !opts.c.is_finite() {
        return Err(Error::InvalidArgument("c must be finite".into()));
    }
    let tol = match env_tol {
        None => None,
        Some(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Some(t),
            _ => return Err(Error::InvalidArgument(format!("BQK_TOL='{s}' is not a positive number"))),
        },
    };
    Ok(RunConfig {
        manifold,
        connection,
        units: Units::new(opts.hbar, opts.charge, opts.mass)?,
        c: opts.c,
        seed: opts.seed,
        tol,
        modes: opts.modes,
        eigs: opts.eigs,
        sweep: opts.theta_sweep.as_deref().map(parse_sweep).transpose()?,
        csv: opts.format == Format::Csv,
        pretty: opts.pretty,
        out: opts.out.clone(),
        dump_hamiltonian: opts.dump_hamiltonian.clone(),
    })
}

/// A rendered report: JSON always, CSV and text when the command has them.
struct Report {
    json: Value,
    csv: Option<String>,
    text: String,
}

fn render(cfg: &RunConfig, r: &Report) -> Result<String> {
    if cfg.pretty {
        return Ok(r.text.clone());
    }
    if cfg.csv {
        return r.csv.clone().ok_or_else(|| Error::InvalidArgument("this command has no CSV output".into()));
    }
    Ok(serde_json::to_string_pretty(&r.json)? + "\n")
}

/// Runs the CLI with the process environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let tol = std::env::var("BQK_TOL").ok();
    run_with(args, tol.as_deref())
}

/// Runs the CLI with an explicit tolerance override in place of BQK_TOL.
pub fn run_with<I, T>(args: I, env_tol: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: text },
            };
        }
    };
    let cfg = match config_from(&cli.opts, env_tol) {
        Ok(c) => c,
        Err(e) => return error_outcome(&e),
    };
    let result = match cli.command {
        Command::Classify => cmd_classify(&cfg).map(|r| (r, true)),
        Command::Spectrum => cmd_spectrum(&cfg).map(|r| (r, true)),
        Command::Verify => verify::cmd_verify(&cfg),
        Command::Catalogue => cmd_catalogue(&cfg).map(|r| (r, true)),
    };
    let (report, ok) = match result {
        Ok(r) => r,
        Err(e) => return error_outcome(&e),
    };
    let text = match render(&cfg, &report) {
        Ok(t) => t,
        Err(e) => return error_outcome(&e),
    };
    let stdout = match &cfg.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                return error_outcome(&Error::Io(e));
            }
            String::new()
        }
        None => text,
    };
    if ok {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    } else {
        let failed = report.json.get("failed").cloned().unwrap_or(Value::Null);
        let body = json!({"error": "verification_failed", "failed": failed, "exit_code": EXIT_VERIFY});
        Outcome { code: EXIT_VERIFY, stdout, stderr: body.to_string() + "\n" }
    }
}

fn cmd_classify(cfg: &RunConfig) -> Result<Report> {
    let mesh = cfg.mesh()?;
    let card = enumerate_classes(&mesh);
    let mut json = serde_json::to_value(&card)?;
    let obj = json.as_object_mut().expect("card is an object");
    obj.insert("units".into(), serde_json::to_value(cfg.units)?);
    let mut text = String::new();
    writeln!(text, "manifold          {}", card.manifold).ok();
    if let Some(p) = &card.pi1 {
        writeln!(text, "pi1               {p}").ok();
    }
    writeln!(text, "H1                {}", mesh.topology().h1).ok();
    writeln!(text, "H2                {}", mesh.topology().cohomology2).ok();
    writeln!(text, "quantum numbers   {}", card.quantum_numbers).ok();
    writeln!(text, "reading           {}", card.physical_reading).ok();
    if cfg.connection != ConnectionSpec::Trivial {
        let conn = cfg.connection.build(&mesh)?;
        let q = classify_connection(&mesh, &conn, cfg.c)?;
        let mut qj = quantum_numbers_json(&mesh, &q);
        qj["spec"] = cfg.connection.describe();
        writeln!(text, "connection class  {}", qj).ok();
        obj.insert("connection".into(), qj);
    }
    let mut csv = String::from("field,value\n");
    for (k, v) in obj.iter() {
        let cell = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        writeln!(csv, "{k},\"{}\"", cell.replace('"', "\"\"")).ok();
    }
    Ok(Report { json, csv: Some(csv), text })
}

fn spectrum_text(res: &SpectrumResult, header: &str) -> String {
    let mut s = String::new();
    writeln!(s, "{header}").ok();
    writeln!(s, "{:>5}  {:>22}  {:>7}  {:>9}", "index", "eigenvalue", "cluster", "residual").ok();
    for (i, ((e, c), r)) in res.eigenvalues.iter().zip(&res.cluster_ids).zip(&res.residuals).enumerate() {
        writeln!(s, "{i:>5}  {e:>22.15}  {c:>7}  {r:>9.2e}").ok();
    }
    for c in &res.clusters {
        let gap = c.relative_gap.map_or("-".to_string(), |g| format!("{g:.4}"));
        writeln!(s, "cluster {} size {} mean {:.12} relative gap {}", c.id, c.size, c.mean, gap).ok();
    }
    s
}

fn sweep_report(cfg: &RunConfig, backend: &str, rows: Vec<SweepRow>, extra: Value) -> Result<Report> {
    let mut text = format!("theta sweep ({backend})\n");
    for r in &rows {
        let vals: Vec<String> = r.eigenvalues.iter().map(|e| format!("{e:.10}")).collect();
        writeln!(text, "{:>8.4}  {}", r.theta, vals.join("  ")).ok();
    }
    let csv = spectra::sweep_csv(&rows);
    let json = json!({
        "backend": backend,
        "units": cfg.units,
        "c": cfg.c,
        "rows": rows,
        "setup": extra,
    });
    Ok(Report { json, csv: Some(csv), text })
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Report> {
    let shape = cfg.shape();
    let circle = matches!(shape, Some(CatalogueShape::Circle { .. }));
    let opts = cfg.eigen_options();
    if circle && (cfg.modes.is_some() || cfg.sweep.is_some()) {
        let k_max = cfg.modes.unwrap_or(16);
        if let Some(thetas) = &cfg.sweep {
            let levels = cfg.eigs.unwrap_or(5);
            let rows = spectra::theta_sweep_circle(k_max, thetas, levels, &cfg.units)?;
            return sweep_report(cfg, "fourier", rows, json!({"modes": k_max}));
        }
        let theta = match &cfg.connection {
            ConnectionSpec::Trivial => 0.0,
            ConnectionSpec::Flat { thetas, .. } if thetas.len() == 1 => thetas[0],
            _ => return Err(Error::InvalidArgument("the Fourier circle takes a single --theta".into())),
        };
        let fc = FourierCircle::new(k_max, theta, cfg.units)?;
        let h = fc.hamiltonian();
        let res = spectra::eigen(&h, cfg.eigs.unwrap_or(2 * k_max + 1), &opts)?;
        let momentum: BTreeMap<String, f64> =
            fc.modes().iter().map(|&k| (k.to_string(), fc.momentum_value(k))).collect();
        let mut extra = BTreeMap::new();
        extra.insert("backend".to_string(), json!("fourier"));
        extra.insert("modes".to_string(), json!(k_max));
        extra.insert("theta".to_string(), json!(theta));
        extra.insert("momentum_by_mode".to_string(), json!(momentum));
        extra.insert("c".to_string(), json!(cfg.c));
        let text = spectrum_text(&res, &format!("circle, Fourier modes |k| ≤ {k_max}, θ = {theta}"));
        let csv = res.to_csv();
        return Ok(Report { json: spectra::spectrum_json(&res, &cfg.units, extra), csv: Some(csv), text });
    }

    let mesh = cfg.mesh()?;
    if let Some(thetas) = &cfg.sweep {
        let levels = cfg.eigs.unwrap_or(5).min(mesh.num_vertices());
        let rows = thetas
            .iter()
            .map(|&theta| {
                let conn = gauge::aharonov_bohm_connection(&mesh, theta)?;
                let h = spectra::magnetic_hamiltonian(&mesh, &conn, &cfg.units)?;
                Ok(SweepRow { theta, eigenvalues: spectra::eigen(&h, levels, &opts)?.eigenvalues })
            })
            .collect::<Result<Vec<_>>>()?;
        return sweep_report(cfg, "mesh", rows, json!({"manifold": mesh.name(), "vertices": mesh.num_vertices()}));
    }

    let conn = cfg.connection.build(&mesh)?;
    let h = spectra::magnetic_hamiltonian(&mesh, &conn, &cfg.units)?;
    if let Some(p) = &cfg.dump_hamiltonian {
        let body = if cfg.csv { h.triplets_csv() } else { serde_json::to_string(&h.triplets_json())? + "\n" };
        std::fs::write(p, body)?;
    }
    let default_k = match cfg.connection {
        ConnectionSpec::Monopole(n) => n.unsigned_abs() as usize + 3,
        _ => 6,
    };
    let k = cfg.eigs.unwrap_or(default_k).min(mesh.num_vertices());
    let res = spectra::eigen(&h, k, &opts)?;
    let mut extra = BTreeMap::new();
    extra.insert("backend".to_string(), json!("mesh"));
    extra.insert("manifold".to_string(), json!(mesh.name()));
    extra.insert("vertices".to_string(), json!(mesh.num_vertices()));
    extra.insert("connection".to_string(), cfg.connection.describe());
    extra.insert("c".to_string(), json!(cfg.c));
    if mesh.topology().cohomology2.betti > 0 {
        extra.insert("chern_number".to_string(), json!(gauge::chern_number(&mesh, &conn)?));
    }
    let mut text = spectrum_text(&res, &format!("{} ({} vertices)", mesh.name(), mesh.num_vertices()));
    if let (Some(CatalogueShape::Sphere { level }), ConnectionSpec::Monopole(n)) = (shape, &cfg.connection) {
        let expected = n.unsigned_abs() as usize + 1;
        let mut trend = Vec::new();
        for l in level.min(2)..level {
            let m = CatalogueShape::Sphere { level: l }.build()?;
            let hl = spectra::magnetic_hamiltonian(&m, &gauge::monopole_connection(&m, *n)?, &cfg.units)?;
            let r = spectra::eigen(&hl, k.min(m.num_vertices()), &opts)?;
            trend.push(trend_row(l, &m, &r));
        }
        trend.push(trend_row(level, &mesh, &res));
        writeln!(text, "refinement trend (expected lowest cluster size {expected})").ok();
        for t in &trend {
            writeln!(
                text,
                "  level {} vertices {} cluster {} relative gap {}",
                t["level"], t["vertices"], t["lowest_cluster_size"], t["relative_gap"]
            )
            .ok();
        }
        extra.insert("expected_lowest_cluster_size".to_string(), json!(expected));
        extra.insert("refinement_trend".to_string(), Value::Array(trend));
    }
    let csv = res.to_csv();
    Ok(Report { json: spectra::spectrum_json(&res, &cfg.units, extra), csv: Some(csv), text })
}

fn trend_row(level: usize, mesh: &MeshComplex, r: &SpectrumResult) -> Value {
    let c = r.lowest_cluster();
    json!({
        "level": level,
        "vertices": mesh.num_vertices(),
        "lowest_cluster_size": c.map(|c| c.size),
        "relative_gap": c.and_then(|c| c.relative_gap),
        "eigenvalues": r.eigenvalues,
    })
}

fn catalogue_entry(shape: &CatalogueShape) -> Result<Value> {
    let m = shape.build()?;
    let topo = m.topology();
    Ok(json!({
        "name": shape.name(),
        "shape": shape,
        "vertices": m.num_vertices(),
        "edges": m.num_edges(),
        "faces": m.num_faces(),
        "euler_characteristic": m.euler_characteristic(),
        "orientable": m.is_orientable(),
        "boundary": m.has_boundary(),
        "H0": topo.h0.to_string(),
        "H1": topo.h1.to_string(),
        "H2": topo.cohomology2.to_string(),
    }))
}

fn cmd_catalogue(cfg: &RunConfig) -> Result<Report> {
    let shapes: Vec<CatalogueShape> = match &cfg.manifold {
        Some(ManifoldSource::Catalogue(s)) => vec![*s],
        Some(ManifoldSource::File { .. }) => {
            return Err(Error::InvalidArgument(
                "catalogue lists built-in manifolds; use classify for mesh files".into(),
            ))
        }
        None => NAMES.iter().map(|n| CatalogueShape::parse(n, &BTreeMap::new())).collect::<Result<_>>()?,
    };
    let entries = shapes.iter().map(catalogue_entry).collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("name,vertices,edges,faces,euler_characteristic,orientable,boundary,H0,H1,H2\n");
    let mut text = format!(
        "{:<18}{:>9}{:>8}{:>8}{:>5}  {:<8}{:<8}{:<8}\n",
        "name", "vertices", "edges", "faces", "χ", "H0", "H1", "H2"
    );
    for e in &entries {
        let s = |k: &str| e[k].as_str().unwrap_or_default().to_string();
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            s("name"),
            e["vertices"],
            e["edges"],
            e["faces"],
            e["euler_characteristic"],
            e["orientable"],
            e["boundary"],
            s("H0"),
            s("H1"),
            s("H2")
        )
        .ok();
        writeln!(
            text,
            "{:<18}{:>9}{:>8}{:>8}{:>5}  {:<8}{:<8}{:<8}",
            s("name"),
            e["vertices"].to_string(),
            e["edges"].to_string(),
            e["faces"].to_string(),
            e["euler_characteristic"].to_string(),
            s("H0"),
            s("H1"),
            s("H2")
        )
        .ok();
    }
    Ok(Report { json: json!({"manifolds": entries}), csv: Some(csv), text })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run_with(std::iter::once("bqk").chain(args.iter().copied()), None)
    }

    #[test]
    fn sweep_parsing() {
        let s = parse_sweep("0:1:0.05").unwrap();
        assert_eq!(s.len(), 21);
        assert!((s[20] - 1.0).abs() < 1e-12);
        assert!(parse_sweep("0:1").is_err());
        assert!(parse_sweep("1:0:0.1").is_err());
        assert!(parse_sweep("0:1:0").is_err());
    }

    #[test]
    fn manifold_parsing() {
        assert_eq!(parse_manifold("torus:nu=5,nv=6", None).unwrap(), CatalogueShape::Torus { nu: 5, nv: 6 });
        assert_eq!(parse_manifold("sphere", Some(4)).unwrap(), CatalogueShape::Sphere { level: 4 });
        assert_eq!(parse_manifold("circle:n=8", Some(1)).unwrap(), CatalogueShape::Circle { n: 16 });
        assert!(matches!(parse_manifold("klein", None), Err(Error::UnknownManifold(_))));
        assert!(parse_manifold("torus:nu", None).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["classify"]).code, EXIT_INPUT);
        assert_eq!(run_args(&["classify", "--manifold", "nowhere"]).code, EXIT_INPUT);
        assert_eq!(run_args(&["frobnicate"]).code, EXIT_INPUT);
        assert_eq!(run_args(&["classify", "--manifold", "torus", "--mass", "-1"]).code, EXIT_INPUT);
        assert_eq!(run_args(&["--help"]).code, EXIT_OK);
        // two torsion characters for a single Z_2
        assert_eq!(run_args(&["classify", "--manifold", "projective_plane", "--torsion", "1,2"]).code, EXIT_INPUT);
        let e = run_with(["bqk", "classify", "--manifold", "torus"], Some("abc"));
        assert_eq!(e.code, EXIT_INPUT);
        assert!(e.stderr.contains("BQK_TOL"));
    }

    #[test]
    fn classify_cards() {
        let o = run_args(&["classify", "--manifold", "torus"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["quantum_numbers"], "n ∈ Z, ϑ_1…ϑ_2 ∈ [0,1)");
        assert_eq!(v["classes"]["c"], "R");
        let o = run_args(&["classify", "--manifold", "projective_plane"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["quantum_numbers"], "m ∈ Z_2");
        let o = run_args(&["classify", "--manifold", "annulus", "--theta", "1.25"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        let th = v["connection"]["thetas"].as_object().unwrap().values().next().unwrap().as_f64().unwrap();
        assert!((th - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fourier_spectrum_and_sweep() {
        let o = run_args(&["spectrum", "--manifold", "circle", "--theta", "0.25", "--modes", "64"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        let e: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(e.len(), 129);
        assert_eq!(e[0], 0.0625);
        assert_eq!(e[1], 0.5625);
        let o = run_args(&["spectrum", "--manifold", "circle", "--theta-sweep", "0:1:0.05", "--format", "csv"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert_eq!(o.stdout.lines().count(), 22);
        let pretty = run_args(&["spectrum", "--manifold", "circle", "--modes", "3", "--pretty"]);
        assert!(pretty.stdout.contains("eigenvalue"));
    }

    #[test]
    fn catalogue_lists_everything() {
        let o = run_args(&["catalogue"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["manifolds"].as_array().unwrap().len(), NAMES.len());
        let csv = run_args(&["catalogue", "--format", "csv"]).stdout;
        assert!(csv.lines().any(|l| l.starts_with("projective_plane,") && l.ends_with(",Z_2,Z_2")));
    }
}
