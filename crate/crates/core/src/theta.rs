//! Jacobi theta function, the lattice state `u_tau`, the Abrikosov ratio
//! `gamma(tau)` and its minimization over lattice shapes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, DEGREE_CAP};
use crate::grid::{ComplexField, Grid2};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Lattice shape parameter in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeTau {
    pub tau: Complex64,
}

impl LatticeTau {
    pub fn new(tau: Complex64) -> Result<Self> {
        if tau.im.is_nan() || tau.im < 1e-6 || !tau.re.is_finite() {
            return Err(Error::Grid(format!("tau = {tau} must have Im tau >= 1e-6")));
        }
        Ok(Self { tau })
    }

    /// `e^{2 i pi / 3}`.
    pub fn hexagonal() -> Self {
        Self { tau: Complex64::from_polar(1.0, 2.0 * PI / 3.0) }
    }

    pub fn square() -> Self {
        Self { tau: I }
    }

    pub fn im(&self) -> f64 {
        self.tau.im
    }

    /// Side of the scaled lattice `(Z + tau Z) / sqrt(tau_I)`, whose cells have unit area.
    pub fn cell_side(&self) -> f64 {
        1.0 / self.tau.im.sqrt()
    }

    /// Representative in `|tau| >= 1`, `-1/2 <= Re tau <= 0`.
    ///
    /// Uses `tau -> tau + 1`, `tau -> -1/tau` and the reflection `tau -> -conj(tau)`,
    /// all of which leave `gamma` unchanged.
    pub fn canonical(&self) -> Self {
        let mut t = self.tau;
        for _ in 0..200 {
            t.re -= t.re.round();
            if t.norm_sqr() < 1.0 - 1e-15 {
                t = -1.0 / t;
            } else {
                break;
            }
        }
        if t.re > 0.0 {
            t = Complex64::new(-t.re, t.im);
        }
        Self { tau: t }
    }
}

/// `Theta(z, tau) = exp(log_factor) * value`, with `value` a series evaluated at a
/// point reduced into the fundamental cell.
pub fn theta_reduced(z: Complex64, tau: &LatticeTau) -> (Complex64, Complex64) {
    let t = tau.tau;
    let b = z.im / t.im;
    let a = z.re - b * t.re;
    let m = b.round();
    let n = a.round();
    let zr = z - m * t - n;
    // Theta(w + n + m tau) = (-1)^{n+m} e^{-i pi m^2 tau - 2 i pi m w} Theta(w)
    let log_factor = I * PI * (n + m) - I * PI * m * m * t - 2.0 * PI * I * m * zr;
    (log_factor, theta_series(zr, t))
}

/// `2 sum_{n>=0} (-1)^n e^{i pi tau (n+1/2)^2} sin((2n+1) pi z)`, the pairwise
/// combination of the `n` and `-n-1` terms; exactly zero at `z = 0`.
fn theta_series(z: Complex64, tau: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    for n in 0..2_000_000u64 {
        let h = n as f64 + 0.5;
        let term = sign * (I * PI * tau * h * h).exp() * ((2.0 * h) * PI * z).sin();
        acc += term;
        let mag = term.norm();
        if n > 0 && (mag <= 1e-17 * acc.norm() || mag < 1e-300) {
            break;
        }
        sign = -sign;
    }
    2.0 * acc
}

/// Jacobi theta function `(1/i) sum_n (-1)^n e^{i pi tau (n+1/2)^2} e^{(2n+1) i pi z}`.
pub fn theta_eval(z: Complex64, tau: &LatticeTau) -> Complex64 {
    let (lf, v) = theta_reduced(z, tau);
    v * lf.exp()
}

/// `u_tau(x) = e^{pi/2 (z^2 - |z|^2)} Theta(sqrt(tau_I) z, tau)`, combined in log
/// domain so large arguments stay finite.
pub fn u_tau_eval(x1: f64, x2: f64, tau: &LatticeTau) -> Complex64 {
    let z = Complex64::new(x1, x2);
    let (lf, v) = theta_reduced(tau.im().sqrt() * z, tau);
    let pre = Complex64::new(-PI * x2 * x2, PI * x1 * x2);
    v * (lf + pre).exp()
}

/// Samples of `u_tau`.
pub fn u_tau_field(tau: &LatticeTau, grid: &Grid2) -> ComplexField {
    ComplexField::from_fn(*grid, |x1, x2| u_tau_eval(x1, x2, tau))
}

/// `gamma(tau) = sum_{j,k} e^{-(pi / tau_I) |j tau - k|^2}`.
pub fn gamma_tau(tau: &LatticeTau) -> f64 {
    let t = tau.tau;
    let cut = 40.0; // e^{-40} ~ 4e-18
    let jmax = (cut / (PI * t.im)).sqrt().ceil() as i64;
    let kspan = (cut * t.im / PI).sqrt().ceil() as i64 + 1;
    let mut s = 0.0;
    for j in -jmax..=jmax {
        let center = (j as f64 * t.re).round() as i64;
        for k in center - kspan..=center + kspan {
            let d = j as f64 * t - k as f64;
            s += (-(PI / t.im) * d.norm_sqr()).exp();
        }
    }
    s
}

/// Cell averages `(mean |u_tau|^2, mean |u_tau|^4)` by the midpoint rule on an
/// `n x n` parametrization of one cell of the scaled lattice.
pub fn cell_averages(tau: &LatticeTau, n: usize) -> (f64, f64) {
    let s = tau.cell_side();
    let (mut m2, mut m4) = (0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let p = ((a as f64 + 0.5) / n as f64 + (b as f64 + 0.5) / n as f64 * tau.tau) * s;
            let v = u_tau_eval(p.re, p.im, tau).norm_sqr();
            m2 += v;
            m4 += v * v;
        }
    }
    let cnt = (n * n) as f64;
    (m2 / cnt, m4 / cnt)
}

/// `gamma(tau)` as the quotient of cell averages.
pub fn gamma_tau_cell_average(tau: &LatticeTau, n: usize) -> f64 {
    let (m2, m4) = cell_averages(tau, n);
    m4 / (m2 * m2)
}

/// Multiplier of the lattice Euler-Lagrange relation, `gamma(tau) / sqrt(2 tau_I)`.
pub fn abrikosov_multiplier(tau: &LatticeTau) -> f64 {
    gamma_tau(tau) / (2.0 * tau.im()).sqrt()
}

/// Coarse scan specification for [`optimize_tau`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauScan {
    pub n_re: usize,
    pub n_im: usize,
    pub im_max: f64,
    /// Keep `Re tau` at this value (a one-dimensional slice).
    pub fixed_re: Option<f64>,
}

impl Default for TauScan {
    fn default() -> Self {
        Self { n_re: 21, n_im: 21, im_max: 2.0, fixed_re: None }
    }
}

impl TauScan {
    pub fn imaginary_axis(n: usize, im_max: f64) -> Self {
        Self { n_re: 1, n_im: n, im_max, fixed_re: Some(0.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauOptimum {
    pub tau: LatticeTau,
    pub gamma: f64,
    pub evaluations: usize,
}

fn golden_min(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coarse grid scan over the fundamental domain followed by [`refine_tau`].
pub fn optimize_tau(scan: &TauScan, refine: usize) -> Result<TauOptimum> {
    if scan.n_im < 2 || scan.n_re < 1 {
        return Err(Error::Grid("scan needs at least 2 points along Im tau".into()));
    }
    let mut best = (f64::INFINITY, Complex64::new(0.0, 1.0));
    let mut evals = 0;
    for a in 0..scan.n_re {
        let re = match scan.fixed_re {
            Some(r) => r,
            None if scan.n_re == 1 => 0.0,
            None => -0.5 + a as f64 / (scan.n_re - 1) as f64,
        };
        let lo = (1.0 - re * re).max(0.0).sqrt().max(1e-3);
        for b in 0..scan.n_im {
            let im = lo + (scan.im_max - lo) * b as f64 / (scan.n_im - 1) as f64;
            let t = LatticeTau { tau: Complex64::new(re, im) };
            let g = gamma_tau(&t);
            evals += 1;
            if g < best.0 {
                best = (g, t.tau);
            }
        }
    }
    let step = (scan.im_max - 0.5) / (scan.n_im - 1) as f64;
    let mut out = refine_from(LatticeTau { tau: best.1 }, step.max(0.05), refine, scan.fixed_re.is_some())?;
    out.evaluations += evals;
    Ok(out)
}

/// Local refinement from a seed: alternating golden-section searches on
/// `Re tau` and `Im tau` in the full half plane, then reduction to the canonical
/// representative.
pub fn refine_tau(seed: LatticeTau, refine: usize) -> Result<TauOptimum> {
    refine_from(seed, 0.1, refine, false)
}

fn refine_from(seed: LatticeTau, radius: f64, rounds: usize, fix_re: bool) -> Result<TauOptimum> {
    let mut t = seed.tau;
    let mut evals = 0usize;
    let mut moved = f64::INFINITY;
    for _ in 0..rounds.max(1) {
        let prev = t;
        if !fix_re {
            let im = t.im;
            let mut f = |re: f64| {
                evals += 1;
                gamma_tau(&LatticeTau { tau: Complex64::new(re, im) })
            };
            t.re = golden_min(&mut f, t.re - radius, t.re + radius, 1e-10);
        }
        let re = t.re;
        let mut f = |im: f64| {
            evals += 1;
            gamma_tau(&LatticeTau { tau: Complex64::new(re, im) })
        };
        t.im = golden_min(&mut f, (t.im - radius).max(1e-3), t.im + radius, 1e-10);
        moved = (t - prev).norm();
        if moved < 1e-9 {
            break;
        }
    }
    if moved > 1e-6 {
        return Err(Error::NonConvergence(format!(
            "tau refinement still moving by {moved:e} after {rounds} rounds"
        )));
    }
    let tau = LatticeTau { tau: t }.canonical();
    Ok(TauOptimum { tau, gamma: gamma_tau(&tau), evaluations: evals })
}

/// Winding number of `f` along a closed polygon, by summing wrapped phase steps.
pub fn winding_along(path: &[Complex64], f: impl Fn(Complex64) -> Complex64) -> i64 {
    let vals: Vec<Complex64> = path.iter().map(|&p| f(p)).collect();
    let mut total = 0.0;
    for i in 0..vals.len() {
        let a = vals[i];
        let b = vals[(i + 1) % vals.len()];
        total += (b / a).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

/// Zeros of `u_tau` inside one (shifted) cell of the scaled lattice, counted by
/// winding along the cell boundary.
pub fn zeros_per_cell(tau: &LatticeTau, shift: Complex64, samples_per_side: usize) -> i64 {
    let s = tau.cell_side();
    let corners = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        1.0 + tau.tau,
        tau.tau,
    ];
    let mut path = Vec::with_capacity(4 * samples_per_side);
    for k in 0..4 {
        let (p, q) = (corners[k], corners[(k + 1) % 4]);
        for i in 0..samples_per_side {
            let t = i as f64 / samples_per_side as f64;
            path.push((p + (q - p) * t) * s + shift);
        }
    }
    winding_along(&path, |p| u_tau_eval(p.re, p.im, tau))
}

/// Window used to make `u_tau` square integrable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeWindow {
    /// Window diameter in cell sides.
    pub cells: f64,
    /// Width of the raised-cosine skirt in cell sides.
    pub skirt_cells: f64,
    /// Distance kept between the comparison region and the skirt.
    pub margin: f64,
    /// Grid spacing.
    pub h: f64,
}

impl LatticeWindow {
    pub fn new(cells: f64) -> Self {
        Self { cells, skirt_cells: 1.0, margin: 2.0, h: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbrikosovReport {
    pub lambda: f64,
    /// `||Pi_0(|w u|^2 w u) - lambda w^3 u|| / ||w^3 u||` on the core.
    pub residual: f64,
    /// The same with `lambda = 0`, i.e. the scale of the left side.
    pub residual_without_multiplier: f64,
    pub core_radius: f64,
    pub degree: usize,
}

/// Euler-Lagrange residual of the lattice state, `Pi_0(|u|^2 u) = lambda_tau u`,
/// on the plateau of a smooth radial window.
///
/// `n` is the Fock truncation; `None` picks one that covers the window.
pub fn abrikosov_el_residual(tau: &LatticeTau, win: &LatticeWindow, n: Option<usize>) -> Result<AbrikosovReport> {
    let side = tau.cell_side();
    let r_out = 0.5 * win.cells * side;
    let skirt = win.skirt_cells * side;
    let r_plateau = r_out - skirt;
    if 2.0 * r_plateau < 4.0 * side {
        return Err(Error::Window(format!(
            "plateau spans {:.2} cells, need at least 4",
            2.0 * r_plateau / side
        )));
    }
    let r_core = r_plateau - win.margin;
    if r_core < side {
        return Err(Error::Window(format!("core radius {r_core:.3} is below one cell")));
    }
    let degree = n.unwrap_or(((PI * (r_out + 4.0).powi(2)).ceil() as usize).min(DEGREE_CAP));
    let half = r_out + 0.5;
    let npts = (2.0 * half / win.h).ceil() as usize;
    let grid = Grid2::square(half, npts)?;
    let w = |x1: f64, x2: f64| {
        let r = x1.hypot(x2);
        if r <= r_plateau {
            1.0
        } else if r >= r_out {
            0.0
        } else {
            0.5 * (1.0 + (PI * (r - r_plateau) / skirt).cos())
        }
    };
    let mut rhs = ComplexField::zeros(grid);
    let mut core = Vec::new();
    for (idx, slot) in rhs.values.iter_mut().enumerate() {
        let (x1, x2) = grid.point(idx);
        let wx = w(x1, x2);
        if wx == 0.0 {
            continue;
        }
        let v = wx * u_tau_eval(x1, x2, tau);
        *slot = v * v.norm_sqr();
        if x1.hypot(x2) <= r_core {
            core.push((x1, x2, v));
        }
    }
    let c = fock::project_lll(&rhs, degree)?;
    let lambda = abrikosov_multiplier(tau);
    let (mut num, mut den, mut lhs_sq) = (0.0, 0.0, 0.0);
    for (x1, x2, v) in core {
        let p = fock::eval_at(&c, x1, x2);
        num += (p - lambda * v).norm_sqr();
        den += v.norm_sqr();
        lhs_sq += p.norm_sqr();
    }
    Ok(AbrikosovReport {
        lambda,
        residual: (num / den).sqrt(),
        residual_without_multiplier: (lhs_sq / den).sqrt(),
        core_radius: r_core,
        degree,
    })
}
