//! The reduced energy on the lowest Landau level,
//!
//! ```text
//! E(u) = int 1/2 (eps^2 x1^2 + kappa^2 x2^2) |u|^2 + g0/2 |u|^4,
//! ```
//!
//! and the closed-form objects around it: Thomas-Fermi profile, regime
//! classification, weak-regime bounds and lattice ansatz, and the
//! one-dimensional limit problem of the strong regime.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, apply_quadratic, solve_shifted_quadratic, FockCoefficients, QuarticTable};
use crate::grid::{ComplexField, Grid2};
use crate::symplectic::{derive_parameters, DerivedParams, TrapParams};
use crate::theta::{gamma_tau, u_tau_eval, LatticeTau};

/// Tolerance on `||u|| = 1` for energy evaluation.
pub const NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedParams {
    pub eps: f64,
    pub kappa: f64,
    pub g0: f64,
}

impl ReducedParams {
    pub fn new(eps: f64, kappa: f64, g0: f64) -> Result<Self> {
        if !(eps > 0.0 && kappa > 0.0 && g0 > 0.0) || !(eps + kappa + g0).is_finite() {
            return Err(Error::InvalidTrap(format!(
                "reduced parameters must be positive and finite: eps={eps}, kappa={kappa}, g0={g0}"
            )));
        }
        Ok(Self { eps, kappa, g0 })
    }
}

impl From<&DerivedParams> for ReducedParams {
    fn from(dp: &DerivedParams) -> Self {
        Self { eps: dp.trap.eps, kappa: dp.kappa, g0: dp.g0 }
    }
}

pub fn reduced_params(p: &TrapParams) -> Result<ReducedParams> {
    let dp = derive_parameters(p)?;
    ReducedParams::new(dp.trap.eps, dp.kappa, dp.g0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub pot_x1: f64,
    pub pot_x2: f64,
    pub quartic: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(pot_x1: f64, pot_x2: f64, quartic: f64) -> Self {
        Self { pot_x1, pot_x2, quartic, total: pot_x1 + pot_x2 + quartic }
    }
}

fn check_norm(n2: f64) -> Result<()> {
    if (n2.sqrt() - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2.sqrt()));
    }
    Ok(())
}

/// Energy by grid quadrature of a sampled field.
pub fn energy_of_field(u: &ComplexField, rp: &ReducedParams) -> Result<EnergyBreakdown> {
    check_norm(u.norm_sq())?;
    Ok(EnergyBreakdown::new(
        0.5 * rp.eps * rp.eps * u.weighted_norm_sq(|x1, _| x1 * x1),
        0.5 * rp.kappa * rp.kappa * u.weighted_norm_sq(|_, x2| x2 * x2),
        0.5 * rp.g0 * u.quartic(),
    ))
}

/// Energy and gradient on the truncated Fock space `span(phi_0..phi_N)`.
///
/// Quadratic terms use the exact pentadiagonal matrix elements, the quartic
/// term the exact pair expansion of [`QuarticTable`].
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub rp: ReducedParams,
    table: QuarticTable,
}

impl EnergyModel {
    pub fn new(rp: ReducedParams, n: usize) -> Result<Self> {
        Ok(Self { rp, table: QuarticTable::new(n)? })
    }

    pub fn degree(&self) -> usize {
        self.table.degree()
    }

    fn h(&self, c: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let e2 = 0.5 * self.rp.eps * self.rp.eps;
        let k2 = 0.5 * self.rp.kappa * self.rp.kappa;
        (apply_quadratic(c, e2, 0.0), apply_quadratic(c, 0.0, k2))
    }

    fn check(&self, c: &FockCoefficients) -> Result<()> {
        if c.degree() != self.degree() {
            return Err(Error::Grid(format!(
                "coefficient degree {} does not match model degree {}",
                c.degree(),
                self.degree()
            )));
        }
        check_norm(c.norm_sq())
    }

    pub fn energy(&self, c: &FockCoefficients) -> Result<EnergyBreakdown> {
        self.check(c)?;
        Ok(self.energy_unchecked(&c.c).0)
    }

    /// Breakdown plus `dE/d(conj c) = H c + g0 <|u|^2 u, phi_k>`.
    pub fn energy_and_gradient(&self, c: &FockCoefficients) -> Result<(EnergyBreakdown, Vec<Complex64>)> {
        self.check(c)?;
        Ok(self.energy_unchecked(&c.c))
    }

    pub(crate) fn energy_unchecked(&self, c: &[Complex64]) -> (EnergyBreakdown, Vec<Complex64>) {
        let (h1, h2) = self.h(c);
        let dot = |h: &[Complex64]| h.iter().zip(c).map(|(a, b)| (b.conj() * a).re).sum::<f64>();
        let q = self.table.pair_amplitudes(c);
        let quart = 0.25 * self.rp.g0 * q.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let cubic = self.table.cubic_from_amplitudes(c, &q);
        let grad = (0..c.len()).map(|k| h1[k] + h2[k] + cubic[k] * self.rp.g0).collect();
        (EnergyBreakdown::new(dot(&h1), dot(&h2), quart), grad)
    }

    /// Total energy without the gradient.
    pub(crate) fn energy_only(&self, c: &[Complex64]) -> f64 {
        let (e2, k2) = (0.5 * self.rp.eps * self.rp.eps, 0.5 * self.rp.kappa * self.rp.kappa);
        let q = self.table.pair_amplitudes(c);
        fock::quadratic_expectation(c, e2, k2) + 0.25 * self.rp.g0 * q.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `(H + sigma)^{-1} g`, the preconditioner of the descent.
    pub fn precondition(&self, g: &[Complex64], sigma: f64) -> Vec<Complex64> {
        let (e2, k2) = (0.5 * self.rp.eps * self.rp.eps, 0.5 * self.rp.kappa * self.rp.kappa);
        solve_shifted_quadratic(g, e2, k2, sigma)
    }

    /// `||P(H u + g0 |u|^2 u) - lambda u||` with `lambda = <H u + g0 |u|^2 u, u>`.
    pub fn euler_lagrange_residual(&self, c: &FockCoefficients) -> Result<(f64, f64)> {
        let (_, g) = self.energy_and_gradient(c)?;
        let lambda: f64 = g.iter().zip(&c.c).map(|(a, b)| (b.conj() * a).re).sum();
        let r = g.iter().zip(&c.c).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
        Ok((r, lambda))
    }
}

/// `E_GP = 2 alpha/(alpha + 2 omega^2 + nu^2) E_LLL + mu2/(4 pi) - mu1/(8 pi) (b1 b2 + 1/(b1 b2))`
/// with `E_LLL = (2 beta2 / gamma) E`.
pub fn gp_energy_map(e_reduced: f64, dp: &DerivedParams) -> f64 {
    let (scale, offset) = gp_affine(dp);
    scale * e_reduced + offset
}

pub fn gp_energy_map_inverse(e_gp: f64, dp: &DerivedParams) -> f64 {
    let (scale, offset) = gp_affine(dp);
    (e_gp - offset) / scale
}

fn gp_affine(dp: &DerivedParams) -> (f64, f64) {
    let (w, nu) = (dp.trap.omega, dp.trap.nu);
    let scale = 2.0 * dp.alpha / (dp.alpha + 2.0 * w * w + nu * nu) * 2.0 * dp.beta2 / dp.gamma_par;
    let bb = dp.beta1 * dp.beta2;
    (scale, dp.mu2 / (4.0 * PI) - dp.mu1 / (8.0 * PI) * (bb + 1.0 / bb))
}

/// Minimizer of `E` without the holomorphy constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThomasFermi {
    pub r1: f64,
    pub r2: f64,
    /// Energy of the inverted parabola, `(2/3) sqrt(g0 eps kappa / pi)`.
    pub energy: f64,
}

impl ThomasFermi {
    /// `|u|^2 = 2/(pi R1 R2) (1 - x1^2/R1^2 - x2^2/R2^2)_+`.
    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let s = 1.0 - (x1 / self.r1).powi(2) - (x2 / self.r2).powi(2);
        2.0 / (PI * self.r1 * self.r2) * s.max(0.0)
    }

    /// Membership of the ellipse shrunk by `margin`.
    pub fn contains(&self, x1: f64, x2: f64, margin: f64) -> bool {
        (x1 / self.r1).powi(2) + (x2 / self.r2).powi(2) < margin * margin
    }
}

pub fn thomas_fermi(rp: &ReducedParams) -> ThomasFermi {
    let ReducedParams { eps, kappa, g0 } = *rp;
    ThomasFermi {
        r1: (4.0 * g0 * kappa / (PI * eps.powi(3))).powf(0.25),
        r2: (4.0 * g0 * eps / (PI * kappa.powi(3))).powf(0.25),
        energy: tf_energy(g0, eps, kappa),
    }
}

fn tf_energy(g0: f64, eps: f64, kappa: f64) -> f64 {
    2.0 / 3.0 * (g0 * eps * kappa / PI).sqrt()
}

/// Bracket for the weak-regime minimum. `lower` is the Thomas-Fermi energy and
/// `upper` the lattice-ansatz leading term `(2/3) sqrt(g0 b eps kappa / pi)`
/// with `b = gamma(j)`. The `printed_*` fields carry the same bracket with
/// `2 g0` under the root, which exceeds the Thomas-Fermi energy by `sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakBounds {
    pub lower: f64,
    pub upper: f64,
    pub printed_lower: f64,
    pub printed_upper: f64,
    pub b: f64,
}

pub fn weak_bounds(rp: &ReducedParams) -> WeakBounds {
    let b = gamma_tau(&LatticeTau::hexagonal());
    let lower = tf_energy(rp.g0, rp.eps, rp.kappa);
    let s2 = 2f64.sqrt();
    WeakBounds { lower, upper: lower * b.sqrt(), printed_lower: lower * s2, printed_upper: lower * (2.0 * b).sqrt(), b }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeTag {
    Weak,
    Intermediate,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `kappa / eps^{1/3}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { low: 0.3, high: 3.0 }
    }
}

pub fn classify_regime(rp: &ReducedParams) -> Regime {
    classify_regime_with(rp, &RegimeThresholds::default())
}

pub fn classify_regime_with(rp: &ReducedParams, th: &RegimeThresholds) -> Regime {
    let ratio = rp.kappa / rp.eps.cbrt();
    let tag = if ratio < th.low {
        RegimeTag::Weak
    } else if ratio > th.high {
        RegimeTag::Strong
    } else {
        RegimeTag::Intermediate
    };
    Regime { tag, ratio }
}

/// `Pi_0(u_tau rho)` normalized, with `rho(x) = p(x1/R1, x2/R2) / sqrt(R1 R2)`
/// and `p(x) = sqrt(2/(pi sqrt(gamma))) (1 - |x|^2 / sqrt(gamma))_+^{1/2}`.
pub fn weak_ansatz(rp: &ReducedParams, tau: &LatticeTau, grid: &Grid2, n: usize) -> Result<(FockCoefficients, EnergyBreakdown)> {
    let regime = classify_regime(rp);
    if regime.tag == RegimeTag::Strong {
        return Err(Error::Regime(format!(
            "lattice ansatz needs the weak regime, kappa/eps^(1/3) = {:.3}",
            regime.ratio
        )));
    }
    let tf = thomas_fermi(rp);
    let sg = gamma_tau(tau).sqrt();
    let reach = sg.sqrt();
    let edge = (tf.r1 * reach + 2.0 * grid.h1()).max(tf.r2 * reach + 2.0 * grid.h2());
    if grid.x1_max < edge || -grid.x1_min < edge || grid.x2_max < edge || -grid.x2_min < edge {
        return Err(Error::Resolution(format!("grid does not cover the profile support of radius {edge:.3}")));
    }
    let amp = (2.0 / (PI * sg)).sqrt() / (tf.r1 * tf.r2).sqrt();
    let field = ComplexField::from_fn(*grid, |x1, x2| {
        let s = 1.0 - ((x1 / tf.r1).powi(2) + (x2 / tf.r2).powi(2)) / sg;
        if s <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        u_tau_eval(x1, x2, tau) * (amp * s.sqrt())
    });
    let c = fock::project_lll(&field, n)?.normalized();
    let e = EnergyModel::new(*rp, n)?.energy(&c)?;
    Ok((c, e))
}

/// Minimizer of `J = inf { int t^2/2 p^2 + g0/2 p^4 : int p^2 = 1 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongLimit1d {
    pub g0: f64,
    /// Support radius `(3 g0 / 2)^{1/3}`.
    pub r: f64,
    /// `(3/10) (3 g0 / 2)^{2/3}`.
    pub j: f64,
    /// Euler-Lagrange multiplier `R^2 / 2`.
    pub lambda: f64,
}

impl StrongLimit1d {
    pub fn p_sq(&self, t: f64) -> f64 {
        3.0 / (4.0 * self.r) * (1.0 - (t / self.r).powi(2)).max(0.0)
    }

    pub fn p(&self, t: f64) -> f64 {
        self.p_sq(t).sqrt()
    }
}

pub fn strong_limit_1d(g0: f64) -> Result<StrongLimit1d> {
    if g0.is_nan() || g0 <= 0.0 {
        return Err(Error::InvalidTrap(format!("g0 must be positive, got {g0}")));
    }
    let r = (1.5 * g0).cbrt();
    Ok(StrongLimit1d { g0, r, j: 0.3 * r * r, lambda: 0.5 * r * r })
}

/// One-dimensional energy of samples `p` on nodes `t` with spacing `dt`.
pub fn energy_1d(t: &[f64], p: &[f64], dt: f64, g0: f64) -> f64 {
    t.iter().zip(p).map(|(t, p)| 0.5 * t * t * p * p + 0.5 * g0 * p.powi(4)).sum::<f64>() * dt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongAsymptote {
    /// `kappa^2 / (8 pi)`, a lower bound for every normalized state.
    pub floor: f64,
    pub j: f64,
    /// `kappa^2 / (8 pi) + eps^{2/3} J(g0)`.
    pub prediction: f64,
}

pub fn strong_asymptote(rp: &ReducedParams) -> Result<StrongAsymptote> {
    let regime = classify_regime(rp);
    if regime.tag != RegimeTag::Strong {
        return Err(Error::Regime(format!(
            "strong asymptote needs kappa/eps^(1/3) > 3, got {:.3}",
            regime.ratio
        )));
    }
    let floor = rp.kappa * rp.kappa / (8.0 * PI);
    let j = strong_limit_1d(rp.g0)?.j;
    Ok(StrongAsymptote { floor, j, prediction: floor + rp.eps.powf(2.0 / 3.0) * j })
}

/// Relative `L^2` distance between `|u|` and the limiting profile
/// `eps^{1/3} 2^{1/4} e^{-pi x2^2} p(eps^{2/3} x1)`.
pub fn strong_profile_error(u: &ComplexField, rp: &ReducedParams) -> Result<f64> {
    let lim = strong_limit_1d(rp.g0)?;
    let (e13, e23) = (rp.eps.cbrt(), rp.eps.powf(2.0 / 3.0));
    let a = e13 * 2f64.powf(0.25);
    let (mut num, mut den) = (0.0, 0.0);
    for (idx, v) in u.values.iter().enumerate() {
        let (x1, x2) = u.grid.point(idx);
        let t = a * (-PI * x2 * x2).exp() * lim.p(e23 * x1);
        num += (v.norm() - t).powi(2);
        den += t * t;
    }
    Ok((num / den).sqrt())
}
