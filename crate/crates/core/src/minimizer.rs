//! Minimization of the reduced energy over the unit sphere of the truncated
//! Fock space.
//!
//! The iteration is Riemannian gradient descent: the gradient is projected on
//! the tangent space of the sphere, the step length starts from the
//! Barzilai-Borwein quotient and is cut by Armijo backtracking, and the new
//! point is renormalized. Energy never increases across accepted steps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{classify_regime, weak_ansatz, EnergyBreakdown, EnergyModel, ReducedParams, RegimeTag};
use crate::error::{Error, Result};
use crate::fock::FockCoefficients;
use crate::grid::Grid2;
use crate::theta::LatticeTau;

#[derive(Debug, Clone, PartialEq)]
pub enum WarmStart {
    /// Lattice ansatz in the weak regime, strip window otherwise.
    Auto,
    Lattice(LatticeTau),
    StripWindow,
    Random,
    Coefficients(FockCoefficients),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerOptions {
    /// Relative tolerance: converged once the gradient norm is below `tol * max(1, E)`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Random restarts on top of the warm start.
    pub restarts: usize,
    pub warm_start: WarmStart,
    /// Grid for the lattice ansatz projection.
    pub ansatz_grid: Option<Grid2>,
    pub armijo_slope: f64,
    pub backtrack: f64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 20_000,
            seed: 0,
            restarts: 3,
            warm_start: WarmStart::Auto,
            ansatz_grid: None,
            armijo_slope: 1e-4,
            backtrack: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerResult {
    pub coeffs: FockCoefficients,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    /// Norm of the tangent gradient, equal to the Euler-Lagrange residual.
    pub grad_norm: f64,
    pub converged: bool,
    pub seed: u64,
    /// `|c_N| / max |c_k|`.
    pub truncation_ratio: f64,
    /// Which start produced the result: 0 for the warm start, `r` for restart `r`.
    pub start: usize,
}

fn re_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn normalize(c: &mut [Complex64]) {
    let n = re_dot(c, c).sqrt();
    c.iter_mut().for_each(|v| *v /= n);
}

fn tangent(c: &[Complex64], g: &mut [Complex64]) {
    let l = re_dot(c, g);
    g.iter_mut().zip(c).for_each(|(g, c)| *g -= c * l);
}

/// Descent from one start. Returns the final point, its energy, iteration
/// count, gradient norm and convergence flag.
///
/// The search direction is the tangent part of `(H + lambda)^{-1} g`, where
/// `lambda = <g, c>` is the current multiplier. `H` is banded, so this costs
/// O(N) and removes the stiffness of the quadratic part.
pub fn descend(
    model: &EnergyModel,
    start: &FockCoefficients,
    opts: &MinimizerOptions,
) -> Result<(FockCoefficients, EnergyBreakdown, usize, f64, bool)> {
    let mut c = start.c.clone();
    if c.len() != model.degree() + 1 {
        return Err(Error::Grid(format!("start has degree {}, model {}", c.len() - 1, model.degree())));
    }
    normalize(&mut c);
    let (mut e, mut g) = model.energy_unchecked(&c);
    let direction = |c: &[Complex64], g: &mut Vec<Complex64>| -> Vec<Complex64> {
        let lambda = re_dot(c, g).max(0.0);
        tangent(c, g);
        let mut d = model.precondition(g, lambda.max(1e-12));
        tangent(c, &mut d);
        d
    };
    let mut d = direction(&c, &mut g);
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut step = 1.0;
    let mut it = 0;
    loop {
        let gn = re_dot(&g, &g).sqrt();
        if gn < opts.tol * e.total.max(1.0) {
            return Ok((FockCoefficients { c }, e, it, gn, true));
        }
        if it == opts.max_iter {
            return Ok((FockCoefficients { c }, e, it, gn, false));
        }
        if let Some((s, y)) = &prev {
            let sy = re_dot(s, y);
            step = if sy > 0.0 { re_dot(s, s) / sy } else { 1.0 };
        }
        // Directional derivative of E along -d is -2 Re<g, d>.
        let slope = 2.0 * re_dot(&g, &d);
        let mut t = step;
        // Energy differences below a few ulps of E are rounding noise.
        let noise = 4.0 * f64::EPSILON * e.total.abs();
        let cn = loop {
            let mut cn: Vec<Complex64> = c.iter().zip(&d).map(|(c, d)| c - d * t).collect();
            normalize(&mut cn);
            if model.energy_only(&cn) <= e.total - opts.armijo_slope * t * slope + noise {
                break cn;
            }
            t *= opts.backtrack;
            if t < 1e-16 {
                // No decrease possible at working precision.
                return Ok((FockCoefficients { c }, e, it, gn, false));
            }
        };
        let (en, mut gn_vec) = model.energy_unchecked(&cn);
        let dn = direction(&cn, &mut gn_vec);
        let s: Vec<Complex64> = cn.iter().zip(&c).map(|(a, b)| a - b).collect();
        let y: Vec<Complex64> = dn.iter().zip(&d).map(|(a, b)| a - b).collect();
        prev = Some((s, y));
        c = cn;
        e = en;
        g = gn_vec;
        d = dn;
        it += 1;
    }
}

fn random_start(n: usize, rng: &mut ChaCha8Rng) -> FockCoefficients {
    let decay = (n as f64 / 4.0).max(1.0);
    let c = (0..=n)
        .map(|k| {
            let a = (-(k as f64) / decay).exp();
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * a
        })
        .collect();
    FockCoefficients { c }.normalized()
}

fn warm_start(rp: &ReducedParams, n: usize, opts: &MinimizerOptions, rng: &mut ChaCha8Rng) -> Result<FockCoefficients> {
    let lattice = |tau: &LatticeTau| -> Result<FockCoefficients> {
        let grid = match opts.ansatz_grid {
            Some(g) => g,
            None => {
                let half = (n as f64 / std::f64::consts::PI).sqrt() + 1.0;
                Grid2::square(half, (2.0 * half / 0.05).ceil() as usize)?
            }
        };
        Ok(weak_ansatz(rp, tau, &grid, n)?.0)
    };
    match &opts.warm_start {
        WarmStart::Auto => match classify_regime(rp).tag {
            RegimeTag::Weak => lattice(&LatticeTau::hexagonal()),
            _ => Ok(FockCoefficients::strip_window(n).normalized()),
        },
        WarmStart::Lattice(tau) => lattice(tau),
        WarmStart::StripWindow => Ok(FockCoefficients::strip_window(n).normalized()),
        WarmStart::Random => Ok(random_start(n, rng)),
        WarmStart::Coefficients(c) => Ok(c.resized(n).normalized()),
    }
}

/// Best of the warm start and `opts.restarts` random starts.
pub fn minimize_energy(rp: &ReducedParams, n: usize, opts: &MinimizerOptions) -> Result<MinimizerResult> {
    if n < 4 {
        return Err(Error::Grid(format!("truncation degree {n} is below 4")));
    }
    let model = EnergyModel::new(*rp, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![warm_start(rp, n, opts, &mut rng)?];
    for _ in 0..opts.restarts {
        starts.push(random_start(n, &mut rng));
    }
    let mut best: Option<MinimizerResult> = None;
    for (k, s) in starts.iter().enumerate() {
        let (c, e, it, gn, ok) = descend(&model, s, opts)?;
        if best.as_ref().is_none_or(|b| e.total < b.energy.total) {
            best = Some(MinimizerResult {
                truncation_ratio: c.truncation_ratio(),
                coeffs: c,
                energy: e,
                iterations: it,
                grad_norm: gn,
                converged: ok,
                seed: opts.seed,
                start: k,
            });
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::apply_quadratic;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    #[test]
    fn quadratic_problem_matches_eigensolve() {
        let n = 16;
        let rp = ReducedParams { eps: 0.4, kappa: 0.9, g0: 0.0 };
        let opts = MinimizerOptions { tol: 1e-10, warm_start: WarmStart::Random, restarts: 1, ..Default::default() };
        let r = minimize_energy(&rp, n, &opts).unwrap();
        let h = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            let e = FockCoefficients::unit(j, n);
            apply_quadratic(&e.c, 0.5 * rp.eps * rp.eps, 0.5 * rp.kappa * rp.kappa)[i].re
        });
        let lmin = h.symmetric_eigenvalues().min();
        assert!(r.converged);
        assert!((r.energy.total - lmin).abs() < 1e-12, "{} {lmin}", r.energy.total);
    }

    #[test]
    fn isotropic_quadratic_ground_state() {
        let rp = ReducedParams { eps: 0.3, kappa: 0.3, g0: 0.0 };
        let opts = MinimizerOptions { tol: 1e-12, warm_start: WarmStart::Random, restarts: 0, ..Default::default() };
        let r = minimize_energy(&rp, 8, &opts).unwrap();
        assert!((r.energy.total - 0.09 / (2.0 * PI)).abs() < 1e-12);
        assert!((r.coeffs.c[0].norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn energy_monotone_and_residual_small() {
        let rp = ReducedParams::new(0.1, 0.3, 2.0).unwrap();
        let n = 40;
        let model = EnergyModel::new(rp, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = random_start(n, &mut rng);
        let mut last = model.energy(&c).unwrap().total;
        let step = MinimizerOptions { max_iter: 1, tol: 0.0, ..Default::default() };
        for _ in 0..50 {
            let (next, e, ..) = descend(&model, &c, &step).unwrap();
            assert!(e.total <= last * (1.0 + 1e-15));
            last = e.total;
            c = next;
        }
        let opts = MinimizerOptions { tol: 1e-8, ..Default::default() };
        let (c, _, _, gn, ok) = descend(&model, &c, &opts).unwrap();
        assert!(ok);
        let (res, _) = model.euler_lagrange_residual(&c).unwrap();
        assert!(res < 10.0 * 1e-8 && (res - gn).abs() < 1e-12);
        assert!((c.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic_given_seed() {
        let rp = ReducedParams::new(0.1, 0.3, 2.0).unwrap();
        let opts = MinimizerOptions { seed: 9, restarts: 2, ..Default::default() };
        let a = minimize_energy(&rp, 30, &opts).unwrap();
        let b = minimize_energy(&rp, 30, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_degree_rejected() {
        let rp = ReducedParams::new(0.1, 0.3, 2.0).unwrap();
        assert!(minimize_energy(&rp, 3, &MinimizerOptions::default()).is_err());
    }
}
