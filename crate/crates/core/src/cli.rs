//! Batch front-end: scenario configs, the full pipeline, and artifact files.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver did not converge
//! (artifacts are still written), 4 I/O failure.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::{
    classify_regime_with, gp_energy_map, strong_asymptote, strong_limit_1d, strong_profile_error, thomas_fermi,
    weak_bounds, EnergyBreakdown, ReducedParams, Regime, RegimeTag, RegimeThresholds, StrongAsymptote, ThomasFermi,
    WeakBounds,
};
use crate::error::{Error, Result};
use crate::fock::{quadratic_expectation, synthesize, DEGREE_CAP};
use crate::grid::{ComplexField, Grid2};
use crate::minimizer::{minimize_energy, MinimizerOptions, MinimizerResult};
use crate::symplectic::{build_reduction_map, build_trap_quadratic_form, derive_parameters, DerivedParams, TrapParams};
use crate::theta::{optimize_tau, TauScan};
use crate::vortex::{detect_vortices, lattice_stats, LatticeStats, VortexSet, BULK_MARGIN};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Over-determined `(omega, nu, eps)` triples must satisfy the constraint to this tolerance.
pub const CONSISTENCY_TOL: f64 = 1e-9;

pub const FIGURE1: &str = include_str!("../scenarios/figure1.toml");
pub const FIGURE2: &str = include_str!("../scenarios/figure2.toml");

pub fn bundled_scenario(name: &str) -> Option<&'static str> {
    match name {
        "figure1" => Some(FIGURE1),
        "figure2" => Some(FIGURE2),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub omega: Option<f64>,
    pub nu: Option<f64>,
    pub eps: Option<f64>,
    /// `eps^2`, the form in which anisotropy is often quoted.
    #[serde(alias = "eps_sq")]
    pub eps2: Option<f64>,
    pub g: f64,
}

impl TrapConfig {
    pub fn resolve(&self) -> Result<TrapParams> {
        let eps = match (self.eps, self.eps2) {
            (Some(_), Some(_)) => return Err(Error::Config("give eps or eps2, not both".into())),
            (Some(e), None) => Some(e),
            (None, Some(e2)) if e2 < 0.0 => return Err(Error::Config(format!("eps2 = {e2} is negative"))),
            (None, Some(e2)) => Some(e2.sqrt()),
            (None, None) => None,
        };
        TrapParams::from_any_two(self.omega, self.nu, eps, self.g, CONSISTENCY_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Fock truncation degree; chosen from the expected support when absent.
    pub n: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Points per side of the output and vortex-detection grid.
    pub grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let m = MinimizerOptions::default();
        Self { n: None, tol: m.tol, max_iter: m.max_iter, seed: m.seed, restarts: m.restarts, grid: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    /// Any of "csv", "gnuplot", "json".
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, formats: vec!["csv".into(), "gnuplot".into(), "json".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub trap: TrapConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub regime: RegimeThresholds,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for f in &cfg.output.formats {
            if !["csv", "gnuplot", "json"].contains(&f.as_str()) {
                return Err(Error::Config(format!("unknown output format '{f}'")));
            }
        }
        if cfg.solver.grid < 8 {
            return Err(Error::Config(format!("output grid {} is too small", cfg.solver.grid)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }
}

/// Truncation degree covering a disc of radius `r`, plus one magnetic length.
fn degree_for_radius(r: f64) -> usize {
    let n = (PI * (r + 1.0).powi(2)).ceil() as usize;
    n.div_ceil(16).saturating_mul(16).clamp(16, DEGREE_CAP)
}

pub fn auto_degree(rp: &ReducedParams, regime: &Regime) -> usize {
    let r = match regime.tag {
        RegimeTag::Strong => strong_limit_1d(rp.g0).map(|s| s.r / rp.eps.powf(2.0 / 3.0)).unwrap_or(0.0),
        _ => {
            let tf = thomas_fermi(rp);
            tf.r1.max(tf.r2) * 1.04
        }
    };
    degree_for_radius(r)
}

/// Output grid: 4.5 standard deviations of `|u|^2` along each axis, kept
/// inside the disc the truncated basis can represent.
pub fn output_grid(res: &MinimizerResult, points: usize) -> Result<Grid2> {
    let c = &res.coeffs.c;
    let cap = (c.len() as f64 / PI).sqrt() + 3.0;
    let s1 = quadratic_expectation(c, 1.0, 0.0).sqrt();
    let s2 = quadratic_expectation(c, 0.0, 1.0).sqrt();
    Grid2::centered((4.5 * s1).min(cap), points, (4.5 * s2).min(cap), points)
}

#[derive(Debug, Clone, Serialize)]
pub struct Energies {
    pub min: f64,
    pub min_gp: f64,
    pub thomas_fermi: f64,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub asymptote: Option<f64>,
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub library_version: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    pub degree: usize,
    pub derived: DerivedParams,
    pub reduced: ReducedParams,
    pub regime: Regime,
    pub energies: Energies,
    pub converged: bool,
    pub artifacts: Vec<Artifact>,
    pub wall_time_s: f64,
}

/// Flat parameter and energy table. Bound fields appear only in the weak
/// regime, asymptote fields only in the strong one.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub seed: u64,
    pub degree: usize,
    pub omega: f64,
    pub nu: f64,
    pub eps: f64,
    pub g: f64,
    pub kappa: f64,
    pub g0: f64,
    pub regime: RegimeTag,
    pub regime_ratio: f64,
    pub energy: f64,
    pub energy_gp: f64,
    pub pot_x1: f64,
    pub pot_x2: f64,
    pub quartic: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub truncation_ratio: f64,
    pub tf_energy: f64,
    pub tf_r1: f64,
    pub tf_r2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptote: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_error: Option<f64>,
    pub zeros_total: usize,
    pub bulk_zeros: usize,
    pub zeros_merged: bool,
    pub six_fold_order: Option<f64>,
    pub nn_mean: Option<f64>,
    pub nn_cv: Option<f64>,
}

/// Everything a run computes, before anything is written.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub config: ScenarioConfig,
    pub derived: DerivedParams,
    pub reduced: ReducedParams,
    pub regime: Regime,
    pub tf: ThomasFermi,
    pub weak: Option<WeakBounds>,
    pub strong: Option<StrongAsymptote>,
    pub result: MinimizerResult,
    pub density_grid: Grid2,
    pub field: ComplexField,
    pub vortices: VortexSet,
    pub stats: Option<LatticeStats>,
    pub profile_error: Option<f64>,
}

impl ScenarioOutcome {
    pub fn report(&self) -> Report {
        let (p, r, e) = (&self.derived.trap, &self.result, &self.result.energy);
        Report {
            name: self.config.name.clone(),
            seed: r.seed,
            degree: r.coeffs.degree(),
            omega: p.omega,
            nu: p.nu,
            eps: p.eps,
            g: p.g,
            kappa: self.reduced.kappa,
            g0: self.reduced.g0,
            regime: self.regime.tag,
            regime_ratio: self.regime.ratio,
            energy: e.total,
            energy_gp: gp_energy_map(e.total, &self.derived),
            pot_x1: e.pot_x1,
            pot_x2: e.pot_x2,
            quartic: e.quartic,
            iterations: r.iterations,
            grad_norm: r.grad_norm,
            converged: r.converged,
            truncation_ratio: r.truncation_ratio,
            tf_energy: self.tf.energy,
            tf_r1: self.tf.r1,
            tf_r2: self.tf.r2,
            lower_bound: self.weak.map(|w| w.lower),
            upper_bound: self.weak.map(|w| w.upper),
            printed_lower_bound: self.weak.map(|w| w.printed_lower),
            printed_upper_bound: self.weak.map(|w| w.printed_upper),
            asymptote: self.strong.map(|s| s.prediction),
            floor: self.strong.map(|s| s.floor),
            j: self.strong.map(|s| s.j),
            profile_error: self.profile_error,
            zeros_total: self.vortices.zeros.len(),
            bulk_zeros: self.vortices.bulk_count(),
            zeros_merged: self.vortices.merged,
            six_fold_order: self.stats.map(|s| s.six_fold_order),
            nn_mean: self.stats.map(|s| s.nn_mean),
            nn_cv: self.stats.map(|s| s.nn_cv),
        }
    }

    fn energies(&self) -> Energies {
        let e = self.result.energy.total;
        Energies {
            min: e,
            min_gp: gp_energy_map(e, &self.derived),
            thomas_fermi: self.tf.energy,
            lower_bound: self.weak.map(|w| w.lower),
            upper_bound: self.weak.map(|w| w.upper),
            asymptote: self.strong.map(|s| s.prediction),
            floor: self.strong.map(|s| s.floor),
        }
    }
}

/// derive, classify, bound, minimize, detect vortices.
pub fn compute_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let trap = cfg.trap.resolve()?;
    let derived = derive_parameters(&trap)?;
    let reduced = ReducedParams::new(trap.eps, derived.kappa, derived.g0)?;
    let regime = classify_regime_with(&reduced, &cfg.regime);
    let tf = thomas_fermi(&reduced);
    let weak = (regime.tag == RegimeTag::Weak).then(|| weak_bounds(&reduced));
    let strong = strong_asymptote(&reduced).ok();
    let n = cfg.solver.n.unwrap_or_else(|| auto_degree(&reduced, &regime));
    let opts = MinimizerOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        seed: cfg.solver.seed,
        restarts: cfg.solver.restarts,
        ..Default::default()
    };
    let result = minimize_energy(&reduced, n, &opts)?;
    let density_grid = output_grid(&result, cfg.solver.grid)?;
    let field = synthesize(&result.coeffs, &density_grid);
    let vortices = detect_vortices(&result.coeffs, &density_grid, Some(&tf), BULK_MARGIN);
    let stats = lattice_stats(&vortices).ok();
    let profile_error = match strong {
        Some(_) => Some(strong_profile_error(&field, &reduced)?),
        None => None,
    };
    Ok(ScenarioOutcome {
        config: cfg.clone(),
        derived,
        reduced,
        regime,
        tf,
        weak,
        strong,
        result,
        density_grid,
        field,
        vortices,
        stats,
        profile_error,
    })
}

fn density_csv(field: &ComplexField) -> String {
    let mut s = String::from("x1,x2,density\n");
    for (idx, v) in field.values.iter().enumerate() {
        let (x1, x2) = field.grid.point(idx);
        s.push_str(&format!("{x1},{x2},{:e}\n", v.norm_sqr()));
    }
    s
}

/// Gnuplot `matrix nonuniform`: the first row holds the column count and the
/// x1 coordinates, each further row an x2 coordinate and its densities.
fn density_gnuplot(field: &ComplexField) -> String {
    let g = field.grid;
    let mut s = format!("{}", g.n1);
    for i in 0..g.n1 {
        s.push_str(&format!(" {}", g.x1(i)));
    }
    s.push('\n');
    for j in 0..g.n2 {
        s.push_str(&format!("{}", g.x2(j)));
        for i in 0..g.n1 {
            s.push_str(&format!(" {:e}", field.at(i, j).norm_sqr()));
        }
        s.push('\n');
    }
    s
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn write_artifact(dir: &Path, name: &str, body: &str) -> Result<Artifact> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(body.as_bytes())?;
    Ok(Artifact {
        file: name.to_string(),
        bytes: body.len() as u64,
        sha256: hex::encode(Sha256::digest(body.as_bytes())),
    })
}

/// Writes density, zeros and report files plus `manifest.json`.
pub fn emit_outputs(out: &ScenarioOutcome, dir: &Path, wall_time_s: f64) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let formats = &out.config.output.formats;
    let mut artifacts = Vec::new();
    if formats.iter().any(|f| f == "csv") {
        artifacts.push(write_artifact(dir, "density.csv", &density_csv(&out.field))?);
    }
    if formats.iter().any(|f| f == "gnuplot") {
        artifacts.push(write_artifact(dir, "density.gnu", &density_gnuplot(&out.field))?);
    }
    if formats.iter().any(|f| f == "json") {
        artifacts.push(write_artifact(dir, "zeros.json", &to_json(&out.vortices.zeros)?)?);
        artifacts.push(write_artifact(dir, "report.json", &to_json(&out.report())?)?);
    }
    let manifest = RunManifest {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: out.config.clone(),
        seed: out.result.seed,
        degree: out.result.coeffs.degree(),
        derived: out.derived,
        reduced: out.reduced,
        regime: out.regime,
        energies: out.energies(),
        converged: out.result.converged,
        artifacts,
        wall_time_s,
    };
    fs::write(dir.join("manifest.json"), to_json(&manifest)?)?;
    Ok(manifest)
}

/// Re-hashes every artifact listed in a manifest.
pub fn verify_manifest(m: &RunManifest, dir: &Path) -> Result<bool> {
    for a in &m.artifacts {
        let bytes = fs::read(dir.join(&a.file))?;
        if hex::encode(Sha256::digest(&bytes)) != a.sha256 {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> Result<RunManifest> {
    let t = Instant::now();
    let out = compute_scenario(cfg)?;
    emit_outputs(&out, dir, t.elapsed().as_secs_f64())
}

/// Print to stdout, staying quiet when the reader has gone away.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NonConvergence(_) => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

#[derive(Debug, Parser)]
#[command(name = "lll-gp", version, about = "Rotating condensates in anisotropic traps")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct TrapArgs {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
}

impl TrapArgs {
    fn trap(&self) -> Result<TrapParams> {
        TrapParams::from_any_two(self.omega, self.nu, self.eps, self.g, CONSISTENCY_TOL)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline from a config file or a bundled scenario.
    Run {
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        config: Option<PathBuf>,
        /// Bundled scenario: figure1 or figure2.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derived and reduced parameters as JSON.
    DeriveParams(TrapArgs),
    /// Reduction map and its residuals as JSON.
    Reduce(TrapArgs),
    /// Minimize gamma(tau) over the fundamental domain.
    GammaScan {
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long, default_value_t = 40)]
        refine: usize,
    },
    /// Regime, Thomas-Fermi data and energy bounds as JSON.
    Bounds(TrapArgs),
    /// Minimize the reduced energy and print the energies as JSON.
    Minimize {
        #[command(flatten)]
        trap: TrapArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Serialize)]
struct DerivedOut {
    derived: DerivedParams,
    reduced: ReducedParams,
    regime: Regime,
}

#[derive(Serialize)]
struct ReduceOut {
    derived: DerivedParams,
    chi: [[f64; 4]; 4],
    chi_inv: [[f64; 4]; 4],
    symplectic_residual: f64,
    inverse_residual: f64,
    diagonalization_residual: f64,
    factorization_residual: f64,
}

#[derive(Serialize)]
struct BoundsOut {
    reduced: ReducedParams,
    regime: Regime,
    thomas_fermi: ThomasFermi,
    #[serde(skip_serializing_if = "Option::is_none")]
    weak: Option<WeakBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strong: Option<StrongAsymptote>,
}

#[derive(Serialize)]
struct MinimizeOut {
    degree: usize,
    energy: EnergyBreakdown,
    energy_gp: f64,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    truncation_ratio: f64,
    coefficients: Vec<Complex64>,
}

fn rows(m: &nalgebra::Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn reduced_of(trap: &TrapParams) -> Result<(DerivedParams, ReducedParams, Regime)> {
    let dp = derive_parameters(trap)?;
    let rp = ReducedParams::new(trap.eps, dp.kappa, dp.g0)?;
    let regime = classify_regime_with(&rp, &RegimeThresholds::default());
    Ok((dp, rp, regime))
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config, scenario, seed, out } => {
            let mut cfg = match (config, scenario) {
                (Some(p), _) => ScenarioConfig::load(&p).map_err(|e| match e {
                    Error::Io(io) => Error::Config(format!("cannot read {}: {io}", p.display())),
                    e => e,
                })?,
                (None, Some(name)) => ScenarioConfig::from_toml(
                    bundled_scenario(&name).ok_or_else(|| Error::Config(format!("no bundled scenario '{name}'")))?,
                )?,
                (None, None) => return Err(Error::Config("give --config or --scenario".into())),
            };
            if let Some(s) = seed {
                cfg.solver.seed = s;
            }
            let dir = out
                .or_else(|| cfg.output.dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let m = run_scenario(&cfg, &dir)?;
            emit(&serde_json::to_string_pretty(&m.energies).unwrap_or_default());
            if !m.converged {
                eprintln!("solver did not converge; artifacts written to {}", dir.display());
                return Ok(EXIT_NO_CONVERGENCE);
            }
            Ok(EXIT_OK)
        }
        Command::DeriveParams(t) => {
            let (derived, reduced, regime) = reduced_of(&t.trap()?)?;
            emit(to_json(&DerivedOut { derived, reduced, regime })?.trim_end());
            Ok(EXIT_OK)
        }
        Command::Reduce(t) => {
            let trap = t.trap()?;
            let dp = derive_parameters(&trap)?;
            let map = build_reduction_map(&dp)?;
            let q = build_trap_quadratic_form(&trap);
            let out = ReduceOut {
                derived: dp,
                chi: rows(&map.chi),
                chi_inv: rows(&map.chi_inv),
                symplectic_residual: map.symplectic_residual(),
                inverse_residual: map.inverse_residual(),
                diagonalization_residual: map.diagonalization_residual(&q, dp.mu1, dp.mu2),
                factorization_residual: map.factorization_residual(),
            };
            emit(to_json(&out)?.trim_end());
            Ok(EXIT_OK)
        }
        Command::GammaScan { grid, refine } => {
            let scan = TauScan { n_re: grid, n_im: grid, ..Default::default() };
            let opt = optimize_tau(&scan, refine)?;
            emit(to_json(&opt)?.trim_end());
            Ok(EXIT_OK)
        }
        Command::Bounds(t) => {
            let (_, reduced, regime) = reduced_of(&t.trap()?)?;
            let out = BoundsOut {
                reduced,
                regime,
                thomas_fermi: thomas_fermi(&reduced),
                weak: (regime.tag == RegimeTag::Weak).then(|| weak_bounds(&reduced)),
                strong: strong_asymptote(&reduced).ok(),
            };
            emit(to_json(&out)?.trim_end());
            Ok(EXIT_OK)
        }
        Command::Minimize { trap, n, seed, restarts, tol } => {
            let (dp, rp, regime) = reduced_of(&trap.trap()?)?;
            let n = n.unwrap_or_else(|| auto_degree(&rp, &regime));
            let opts = MinimizerOptions { seed, restarts, tol, ..Default::default() };
            let r = minimize_energy(&rp, n, &opts)?;
            let out = MinimizeOut {
                degree: n,
                energy: r.energy,
                energy_gp: gp_energy_map(r.energy.total, &dp),
                iterations: r.iterations,
                grad_norm: r.grad_norm,
                converged: r.converged,
                truncation_ratio: r.truncation_ratio,
                coefficients: r.coeffs.c,
            };
            emit(to_json(&out)?.trim_end());
            Ok(if r.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
