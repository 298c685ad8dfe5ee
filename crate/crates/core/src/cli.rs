//! Config files, initial conditions, CSV output and the subcommands.
//!
//! Every CSV file starts with the full run configuration as `# key = value`
//! lines, so a file can be regenerated from its own header. Floats are
//! written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};

use crate::diagnostics::{fit_decay, trim_stagnation, DecayFit, DiagnosticsRecord, DECAY_FLOOR};
use crate::error::{Error, Result};
use crate::limits::{self, LimitSystem, SweepResult};
use crate::model::{CUpdateMode, CellState, Grid, ModelParams, SolverConfig};
use crate::scheme::{self, RunOutput};
use crate::steady::{self, SteadyProblem, SteadyProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_DECAY_FAILED: i32 = 4;

/// Sampling used when the config leaves `sample_interval` unset.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 1.0;
/// Sampling of the space-time distances in sweeps and of the decay series.
pub const FINE_SAMPLE_INTERVAL: f64 = 0.1;
/// Fit window of the decay command.
pub const DECAY_WINDOW: (f64, f64) = (1.0, 50.0);
/// Minimum coefficient of determination accepted by the decay command.
pub const DECAY_MIN_R_SQUARED: f64 = 0.99;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::NonConvergence { .. } | Error::SingularSystem { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    Constant,
    PerturbedCosine,
    Step,
    FromFile,
}

impl FromStr for IcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "perturbed_cosine" => Ok(Self::PerturbedCosine),
            "step" => Ok(Self::Step),
            "from_file" => Ok(Self::FromFile),
            other => Err(Error::Config(format!("unknown ic_kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for IcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::PerturbedCosine => "perturbed_cosine",
            Self::Step => "step",
            Self::FromFile => "from_file",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub n_cells: usize,
    pub t_end: f64,
    /// `None` selects the command's default sampling.
    pub sample_interval: Option<f64>,
    pub ic_kind: IcKind,
    pub ic_amplitude: f64,
    pub ic_mass: f64,
    pub ic_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Reserved for randomized initial data; none of the current kinds use it.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::preset(1.0),
            solver: SolverConfig::default(),
            n_cells: 100,
            t_end: 100.0,
            sample_interval: None,
            ic_kind: IcKind::PerturbedCosine,
            ic_amplitude: 0.05,
            ic_mass: 0.5,
            ic_file: None,
            output_dir: PathBuf::from("output"),
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "m" => self.params.m = parse_value(key, value)?,
            "chi" => self.params.chi = parse_value(key, value)?,
            "tau" => self.params.tau = parse_value(key, value)?,
            "eta" => self.params.eta = parse_value(key, value)?,
            "dt" => self.solver.dt = parse_value(key, value)?,
            "newton_tol" => self.solver.newton_tol = parse_value(key, value)?,
            "newton_max_iter" => self.solver.newton_max_iter = parse_value(key, value)?,
            "c_update_mode" => self.solver.c_update_mode = value.parse()?,
            "bound_tolerance" => self.solver.bound_tolerance = parse_value(key, value)?,
            "n_cells" => self.n_cells = parse_value(key, value)?,
            "t_end" => self.t_end = parse_value(key, value)?,
            "sample_interval" => self.sample_interval = Some(parse_value(key, value)?),
            "ic_kind" => self.ic_kind = value.parse()?,
            "ic_amplitude" => self.ic_amplitude = parse_value(key, value)?,
            "ic_mass" => self.ic_mass = parse_value(key, value)?,
            "ic_file" => self.ic_file = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = parse_value(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.params.validate().map_err(wrap)?;
        self.solver.validate().map_err(wrap)?;
        if self.n_cells < 2 {
            return Err(Error::Config(format!("n_cells = {} must be at least 2", self.n_cells)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        if let Some(s) = self.sample_interval {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("sample_interval = {s} must be positive")));
            }
        }
        if !(self.ic_mass > 0.0 && self.ic_mass < 1.0) {
            return Err(Error::Config(format!("ic_mass = {} must lie in (0, 1)", self.ic_mass)));
        }
        if !(self.ic_amplitude >= 0.0) {
            return Err(Error::Config(format!(
                "ic_amplitude = {} must be nonnegative",
                self.ic_amplitude
            )));
        }
        if self.ic_kind == IcKind::FromFile && self.ic_file.is_none() {
            return Err(Error::Config("ic_kind = from_file needs ic_file".into()));
        }
        Ok(())
    }

    /// Explicit c-update, `dt = 1e-6`, 100 cells.
    pub fn apply_reference_discretization(&mut self) {
        let base = SolverConfig::reference_discretization();
        self.solver.dt = base.dt;
        self.solver.c_update_mode = CUpdateMode::Explicit;
        self.n_cells = 100;
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_cells)
    }

    pub fn sample_interval_or(&self, default: f64) -> f64 {
        self.sample_interval.unwrap_or(default)
    }

    /// The configuration as `# key = value` lines.
    pub fn header(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "# {k} = {v}");
        };
        kv("m", format!("{:?}", self.params.m));
        kv("chi", format!("{:?}", self.params.chi));
        kv("tau", format!("{:?}", self.params.tau));
        kv("eta", format!("{:?}", self.params.eta));
        kv("dt", format!("{:?}", self.solver.dt));
        kv("newton_tol", format!("{:?}", self.solver.newton_tol));
        kv("newton_max_iter", self.solver.newton_max_iter.to_string());
        kv("c_update_mode", self.solver.c_update_mode.to_string());
        kv("bound_tolerance", format!("{:?}", self.solver.bound_tolerance));
        kv("n_cells", self.n_cells.to_string());
        kv("t_end", format!("{:?}", self.t_end));
        if let Some(si) = self.sample_interval {
            kv("sample_interval", format!("{si:?}"));
        }
        kv("ic_kind", self.ic_kind.to_string());
        kv("ic_amplitude", format!("{:?}", self.ic_amplitude));
        kv("ic_mass", format!("{:?}", self.ic_mass));
        if let Some(f) = &self.ic_file {
            kv("ic_file", f.display().to_string());
        }
        kv("output_dir", self.output_dir.display().to_string());
        kv("seed", self.seed.to_string());
        s
    }
}

pub fn make_initial_condition(config: &RunConfig, grid: &Grid) -> Result<CellState> {
    let mass = config.ic_mass;
    let a = config.ic_amplitude;
    let limit = mass.min(1.0 - mass);
    let check_amplitude = || {
        if a > limit {
            Err(Error::AmplitudeTooLarge { amplitude: a, limit })
        } else {
            Ok(())
        }
    };
    let n = grid.n_cells;
    match config.ic_kind {
        IcKind::Constant => Ok(CellState::constant(grid, mass)),
        IcKind::PerturbedCosine => {
            check_amplitude()?;
            let rho = grid
                .cell_centers()
                .iter()
                .map(|x| mass + a * (std::f64::consts::PI * x).cos())
                .collect();
            CellState::new(rho, vec![mass; n], 0.0)
        }
        IcKind::Step => {
            check_amplitude()?;
            let rho = grid
                .cell_centers()
                .iter()
                .map(|&x| if x < 0.5 { mass + a } else { mass - a })
                .collect();
            CellState::new(rho, vec![mass; n], 0.0)
        }
        IcKind::FromFile => {
            let path = config
                .ic_file
                .as_ref()
                .ok_or_else(|| Error::Config("ic_file missing".into()))?;
            let state = read_snapshot(path)?;
            state.check_grid(grid)?;
            Ok(state)
        }
    }
}

#[inline]
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| io_err(path, e))
}

/// `x,rho,c` rows after the header block; `t` goes into the header.
pub fn snapshot_csv(header: &str, x: &[f64], rho: &[f64], c: &[f64], t: f64) -> String {
    let mut s = String::with_capacity(header.len() + 80 * x.len());
    s.push_str(header);
    let _ = writeln!(s, "# t = {t:?}");
    s.push_str("x,rho,c\n");
    for ((x, r), c) in x.iter().zip(rho).zip(c) {
        let _ = writeln!(s, "{},{},{}", num(*x), num(*r), num(*c));
    }
    s
}

pub fn series_csv(header: &str, records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(header);
    s.push_str("t,mass_rho,mass_c,energy,h1,rho_min,rho_max,c_min,c_max,l2_dist_const\n");
    for r in records {
        let cols = [
            r.t,
            r.mass_rho,
            r.mass_c,
            r.energy,
            r.rel_entropy_h1,
            r.rho_min,
            r.rho_max,
            r.c_min,
            r.c_max,
            r.l2_dist_const,
        ];
        let row: Vec<String> = cols.iter().map(|&v| num(v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn sweep_csv(header: &str, result: &SweepResult) -> String {
    let mut s = String::from(header);
    if result.outside_proven_regime {
        s.push_str("# note = outside proven regime\n");
    }
    s.push_str("param,l2_space_time_dist\n");
    for (p, d) in result.parameter_values.iter().zip(&result.distances) {
        let _ = writeln!(s, "{},{}", num(*p), num(*d));
    }
    s
}

/// Reads a snapshot written by [`snapshot_csv`]; the time is taken from the
/// `# t = ` header line when present.
pub fn read_snapshot(path: &Path) -> Result<CellState> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_snapshot(&text)
}

pub fn parse_snapshot(text: &str) -> Result<CellState> {
    let mut t = 0.0;
    let mut seen_header = false;
    let (mut rho, mut c) = (Vec::new(), Vec::new());
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                if k.trim() == "t" {
                    t = parse_value("t", v.trim())?;
                }
            }
            continue;
        }
        if !seen_header {
            if line != "x,rho,c" {
                return Err(Error::Config(format!("expected header 'x,rho,c', found '{line}'")));
            }
            seen_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!("snapshot row needs 3 columns: '{line}'")));
        }
        rho.push(parse_value("rho", cols[1].trim())?);
        c.push(parse_value("c", cols[2].trim())?);
    }
    if !seen_header {
        return Err(Error::Config("snapshot has no header line".into()));
    }
    CellState::new(rho, c, t)
}

/// Result of `simulate`.
#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub relative_mass_drift: f64,
    pub bound_events: usize,
    pub max_bound_violation: f64,
    pub output: RunOutput,
    pub files: Vec<PathBuf>,
}

pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateSummary> {
    config.validate()?;
    let grid = config.grid()?;
    let initial = make_initial_condition(config, &grid)?;
    let header = config.header();
    let dir = &config.output_dir;
    let x = grid.cell_centers();
    let mut files = Vec::new();
    let mut write_error = None;
    let mut k = 0usize;
    let mut snapshots = |s: &CellState, _: &DiagnosticsRecord| {
        let path = dir.join(format!("snapshot_{k:06}.csv"));
        k += 1;
        if let Err(e) = write_file(&path, &snapshot_csv(&header, &x, &s.rho, &s.c, s.t)) {
            write_error.get_or_insert(e);
        } else {
            files.push(path);
        }
    };
    let interval = config.sample_interval_or(DEFAULT_SAMPLE_INTERVAL);
    let output = scheme::run(
        &initial,
        config.t_end,
        &config.params,
        &config.solver,
        &grid,
        interval,
        &mut [&mut snapshots],
    )?;
    if let Some(e) = write_error {
        return Err(e);
    }
    let series = dir.join("series.csv");
    write_file(&series, &series_csv(&header, &output.records))?;
    files.push(series);

    let m0 = output.records.first().map_or(0.0, |r| r.mass_rho);
    let m1 = output.records.last().map_or(0.0, |r| r.mass_rho);
    let relative_mass_drift = if m0 != 0.0 {
        ((m1 - m0) / m0).abs()
    } else {
        (m1 - m0).abs()
    };
    println!("final time = {}", output.state.t);
    println!("relative mass drift = {relative_mass_drift:e}");
    println!(
        "bound violations = {} (max {:e}, tolerance {:e})",
        output.bound_events, output.max_bound_violation, config.solver.bound_tolerance
    );
    Ok(SimulateSummary {
        relative_mass_drift,
        bound_events: output.bound_events,
        max_bound_violation: output.max_bound_violation,
        output,
        files,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SteadyOutcome {
    Pattern { profile: SteadyProfile, ode_residual: f64 },
    NoSolution,
}

/// Fine grid of the ODE residual check.
const RESIDUAL_POINTS: usize = 2000;

pub fn cmd_steady(m: f64, chi: f64, n_cells: usize, output_dir: &Path) -> Result<SteadyOutcome> {
    let grid = Grid::new(n_cells)?;
    let mut header = String::new();
    let _ = writeln!(header, "# m = {m:?}");
    let _ = writeln!(header, "# chi = {chi:?}");
    let _ = writeln!(header, "# n_cells = {n_cells}");
    let report_path = output_dir.join("steady_report.txt");
    match steady::find_pattern(m, chi, &grid) {
        Ok(profile) => {
            let landmarks = steady::critical_points(m, chi, profile.lambda_star)?;
            let problem = SteadyProblem::new(m, chi, profile.lambda_star, profile.mu_star)?;
            let ode_residual = steady::ode_residual(&problem, &landmarks, RESIDUAL_POINTS)?;
            let csv = snapshot_csv(&header, &profile.x, &profile.rho_values, &profile.c_values, 0.0);
            write_file(&output_dir.join("steady_profile.csv"), &csv)?;
            let mut report = header.clone();
            let _ = writeln!(report, "status = pattern");
            let _ = writeln!(report, "lambda_star = {}", num(profile.lambda_star));
            let _ = writeln!(report, "mu_star = {}", num(profile.mu_star));
            let _ = writeln!(report, "time_map = {}", num(profile.time_map));
            let _ = writeln!(report, "mass = {}", num(profile.mass));
            let _ = writeln!(report, "c_minus = {}", num(profile.c_minus));
            let _ = writeln!(report, "c_plus = {}", num(profile.c_plus));
            let _ = writeln!(report, "ode_residual = {}", num(ode_residual));
            write_file(&report_path, &report)?;
            print!(
                "{}",
                report
                    .lines()
                    .filter(|l| !l.starts_with('#'))
                    .collect::<Vec<_>>()
                    .join("\n")
            );
            println!();
            Ok(SteadyOutcome::Pattern { profile, ode_residual })
        }
        Err(Error::NoSolution { .. }) => {
            let report = format!("{header}status = no_solution\n");
            write_file(&report_path, &report)?;
            println!("no increasing steady state found for m = {m}, chi = {chi}");
            Ok(SteadyOutcome::NoSolution)
        }
        Err(e) => Err(e),
    }
}

fn value_tag(v: f64) -> String {
    format!("{v:e}")
}

/// Runs a sweep toward `which`, writing the distance table and the final
/// snapshot of every run and of the limit system.
pub fn cmd_sweep(which: LimitSystem, config: &RunConfig, values: &[f64]) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.grid()?;
    let initial = make_initial_condition(config, &grid)?;
    let interval = config.sample_interval_or(FINE_SAMPLE_INTERVAL);
    let result = limits::sweep(
        which,
        values,
        &initial,
        &config.params,
        &config.solver,
        &grid,
        config.t_end,
        interval,
    )?;
    if result.outside_proven_regime {
        warn!(
            "outside proven regime: {} sweep with m = {}",
            which.parameter_name(),
            config.params.m
        );
        println!("warning: outside proven regime");
    }
    let name = which.parameter_name();
    let header = config.header();
    let dir = &config.output_dir;
    write_file(&dir.join(format!("sweep_{name}.csv")), &sweep_csv(&header, &result))?;
    let x = grid.cell_centers();
    for (v, s) in result.parameter_values.iter().zip(&result.final_states) {
        let path = dir.join(format!("snapshot_{name}_{}.csv", value_tag(*v)));
        write_file(&path, &snapshot_csv(&header, &x, &s.rho, &s.c, s.t))?;
    }
    let lim = &result.limit_final;
    write_file(
        &dir.join(format!("snapshot_{name}_limit.csv")),
        &snapshot_csv(&header, &x, &lim.rho, &lim.c, lim.t),
    )?;
    for (v, d) in result.parameter_values.iter().zip(&result.distances) {
        println!("{name} = {v:e}: distance {d:e}");
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecayOutcome {
    AlreadyAtEquilibrium,
    /// Outside `1 < m <= 2, chi <= 1`; the fits are reported but not judged.
    OutsideProvenRegime {
        h1: Option<DecayFit>,
        l2: Option<DecayFit>,
    },
    Decaying {
        h1: DecayFit,
        l2: DecayFit,
    },
    Failed {
        h1: Option<DecayFit>,
        l2: Option<DecayFit>,
    },
}

impl DecayOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Failed { .. } => EXIT_DECAY_FAILED,
            _ => EXIT_OK,
        }
    }
}

fn decay_ok(fit: &DecayFit) -> bool {
    fit.mu > 0.0 && fit.r_squared >= DECAY_MIN_R_SQUARED
}

fn describe(label: &str, fit: &Result<DecayFit>) {
    match fit {
        Ok(f) => println!(
            "{label}: mu = {:e}, r^2 = {:.6}, points = {}",
            f.mu, f.r_squared, f.points
        ),
        Err(e) => println!("{label}: {e}"),
    }
}

pub fn cmd_decay(config: &RunConfig) -> Result<DecayOutcome> {
    config.validate()?;
    let p = &config.params;
    let in_regime = p.m > 1.0 && p.m <= 2.0 && p.chi <= 1.0;
    if !in_regime {
        warn!("outside proven regime: m = {}, chi = {}", p.m, p.chi);
        println!("warning: outside proven regime (m = {}, chi = {})", p.m, p.chi);
    }
    let grid = config.grid()?;
    let initial = make_initial_condition(config, &grid)?;
    let interval = config.sample_interval_or(FINE_SAMPLE_INTERVAL);
    let output = scheme::run(&initial, config.t_end, p, &config.solver, &grid, interval, &mut [])?;
    let header = config.header();
    write_file(
        &config.output_dir.join("decay_series.csv"),
        &series_csv(&header, &output.records),
    )?;

    let peak = output
        .records
        .iter()
        .map(|r| r.rel_entropy_h1.max(r.l2_dist_const))
        .fold(0.0, f64::max);
    if peak <= DECAY_FLOOR {
        println!("already at equilibrium");
        return Ok(DecayOutcome::AlreadyAtEquilibrium);
    }
    let h1_series: Vec<(f64, f64)> = output.records.iter().map(|r| (r.t, r.rel_entropy_h1)).collect();
    let l2_series: Vec<(f64, f64)> = output.records.iter().map(|r| (r.t, r.l2_dist_const)).collect();
    let h1 = fit_decay(trim_stagnation(&h1_series), DECAY_WINDOW);
    let l2 = fit_decay(trim_stagnation(&l2_series), DECAY_WINDOW);
    describe("h1", &h1);
    describe("l2_dist_const", &l2);
    info!("decay fits computed over {:?}", DECAY_WINDOW);
    let (h1, l2) = (h1.ok(), l2.ok());
    if !in_regime {
        return Ok(DecayOutcome::OutsideProvenRegime { h1, l2 });
    }
    match (h1, l2) {
        (Some(h), Some(l)) if decay_ok(&h) && decay_ok(&l) => {
            println!("decay check passed");
            Ok(DecayOutcome::Decaying { h1: h, l2: l })
        }
        (h1, l2) => {
            println!("decay check failed");
            Ok(DecayOutcome::Failed { h1, l2 })
        }
    }
}
