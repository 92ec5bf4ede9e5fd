//! The reduced Bargmann space: functions `f(z) e^{-pi |z|^2 / 2}` with `f`
//! holomorphic and `z = x1 + i x2`.
//!
//! The orthonormal basis is `phi_k = sqrt(pi^k / k!) z^k e^{-pi |z|^2 / 2}`; the
//! normalization comes from `||z^k e^{-pi|z|^2/2}||^2 = k! / pi^k` (polar
//! Gaussian moments). Evaluation runs the recursion
//! `phi_k = sqrt(pi / k) z phi_{k-1}` with a separate exponent, so high degrees
//! far from the origin neither overflow nor turn into NaN.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid2};

/// Largest truncation degree accepted anywhere in the crate.
pub const DEGREE_CAP: usize = 2048;

/// Largest grid the direct kernel quadrature will accept.
pub const KERNEL_ORACLE_MAX_POINTS: usize = 64 * 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients of `u = sum c_k phi_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockCoefficients {
    pub c: Vec<Complex64>,
}

impl FockCoefficients {
    pub fn new(c: Vec<Complex64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Grid("empty coefficient vector".into()));
        }
        if c.len() > DEGREE_CAP + 1 {
            return Err(Error::DegreeCap { degree: c.len() - 1, cap: DEGREE_CAP });
        }
        if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Grid("non-finite coefficient".into()));
        }
        Ok(Self { c })
    }

    /// The basis vector `e_k` truncated at degree `n`.
    pub fn unit(k: usize, n: usize) -> Self {
        let mut c = vec![ZERO; n.max(k) + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self { c }
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    /// Equals `||u||^2` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            self.c.iter_mut().for_each(|v| *v /= n);
        }
        self
    }

    /// `|c_N| / max |c_k|`; large values mean mass is leaking past the cap.
    pub fn truncation_ratio(&self) -> f64 {
        let m = self.c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            0.0
        } else {
            self.c[self.degree()].norm() / m
        }
    }

    /// `Some(ratio)` when the truncation ratio exceeds `threshold` (1e-3 is the usual choice).
    pub fn truncation_warning(&self, threshold: f64) -> Option<f64> {
        let r = self.truncation_ratio();
        (r > threshold).then_some(r)
    }

    /// Same function at a different truncation degree (zero padded or cut).
    pub fn resized(&self, n: usize) -> Self {
        let mut c = self.c.clone();
        c.resize(n + 1, ZERO);
        Self { c }
    }

    /// Coefficients of the window `e^{-pi x2^2 + i pi x1 x2}` (entire part
    /// `e^{pi z^2 / 2}`), tapered by `(1 - (k/n)^2)^2` so the truncation is smooth.
    pub fn strip_window(n: usize) -> Self {
        let lf = ln_factorials(n);
        let c = (0..=n)
            .map(|k| {
                if k % 2 == 1 {
                    return ZERO;
                }
                let m = k / 2;
                let t = k as f64 / n.max(1) as f64;
                let taper = (1.0 - t * t).max(0.0).powi(2);
                let v = (0.5 * lf[k] - m as f64 * std::f64::consts::LN_2 - lf[m]).exp();
                Complex64::new(v * taper, 0.0)
            })
            .collect();
        Self { c }
    }
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Fills `out[k] = phi_k(z)` for `k < out.len()`.
pub fn basis_values(x1: f64, x2: f64, out: &mut [Complex64]) {
    let z = Complex64::new(x1, x2);
    let mut m = Complex64::new(1.0, 0.0);
    let mut log_scale = -PI * (x1 * x1 + x2 * x2) / 2.0;
    const BIG: f64 = 1e100;
    let ln_big = BIG.ln();
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            m *= z * (PI / k as f64).sqrt();
            let a = m.norm();
            if a > BIG {
                m /= BIG;
                log_scale += ln_big;
            } else if a < 1.0 / BIG && a > 0.0 {
                m *= BIG;
                log_scale -= ln_big;
            }
        }
        *slot = m * log_scale.exp();
    }
}

/// `phi_k` by the closed form in log domain, for the single-degree oracle.
fn basis_closed_form(k: usize, ln_kfact: f64, x1: f64, x2: f64) -> Complex64 {
    let r2 = x1 * x1 + x2 * x2;
    if r2 == 0.0 {
        return if k == 0 { Complex64::new(1.0, 0.0) } else { ZERO };
    }
    let kf = k as f64;
    let log_mod = 0.5 * (kf * PI.ln() - ln_kfact) + 0.5 * kf * r2.ln() - PI * r2 / 2.0;
    Complex64::from_polar(log_mod.exp(), kf * x2.atan2(x1))
}

/// Samples of `phi_k`.
pub fn fock_basis_eval(k: usize, grid: &Grid2) -> Result<ComplexField> {
    if k > DEGREE_CAP {
        return Err(Error::DegreeCap { degree: k, cap: DEGREE_CAP });
    }
    let lf = ln_factorials(k)[k];
    Ok(ComplexField::from_fn(*grid, |x1, x2| basis_closed_form(k, lf, x1, x2)))
}

/// `sum c_k phi_k` at one point.
pub fn eval_at(c: &FockCoefficients, x1: f64, x2: f64) -> Complex64 {
    let mut phi = vec![ZERO; c.c.len()];
    basis_values(x1, x2, &mut phi);
    phi.iter().zip(&c.c).map(|(p, a)| p * a).sum()
}

/// Value of `u` and of `f'(z) e^{-pi|z|^2/2}`, where `u = f(z) e^{-pi|z|^2/2}`.
///
/// The derivative uses `d/dz [sqrt(pi^k/k!) z^k] = sqrt(pi k) sqrt(pi^(k-1)/(k-1)!) z^(k-1)`.
pub fn eval_with_derivative(c: &FockCoefficients, x1: f64, x2: f64) -> (Complex64, Complex64) {
    let mut phi = vec![ZERO; c.c.len()];
    basis_values(x1, x2, &mut phi);
    let u = phi.iter().zip(&c.c).map(|(p, a)| p * a).sum();
    let du = (1..c.c.len()).map(|k| c.c[k] * (PI * k as f64).sqrt() * phi[k - 1]).sum();
    (u, du)
}

/// Samples of `sum c_k phi_k` on a grid.
pub fn synthesize(c: &FockCoefficients, grid: &Grid2) -> ComplexField {
    let mut phi = vec![ZERO; c.c.len()];
    let mut out = ComplexField::zeros(*grid);
    for (idx, slot) in out.values.iter_mut().enumerate() {
        let (x1, x2) = grid.point(idx);
        basis_values(x1, x2, &mut phi);
        *slot = phi.iter().zip(&c.c).map(|(p, a)| p * a).sum();
    }
    out
}

/// Fock-expansion projector: `c_k = <u, phi_k>` by midpoint quadrature.
pub fn project_lll(u: &ComplexField, n: usize) -> Result<FockCoefficients> {
    if n > DEGREE_CAP {
        return Err(Error::DegreeCap { degree: n, cap: DEGREE_CAP });
    }
    let mut c = vec![ZERO; n + 1];
    let mut phi = vec![ZERO; n + 1];
    for (idx, v) in u.values.iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        let (x1, x2) = u.grid.point(idx);
        basis_values(x1, x2, &mut phi);
        for (ck, p) in c.iter_mut().zip(&phi) {
            *ck += v * p.conj();
        }
    }
    let w = u.grid.cell_area();
    c.iter_mut().for_each(|v| *v *= w);
    Ok(FockCoefficients { c })
}

/// `Pi_0 u` on the grid of `u`, by truncated Fock expansion.
pub fn project_field(u: &ComplexField, n: usize) -> Result<ComplexField> {
    Ok(synthesize(&project_lll(u, n)?, &u.grid))
}

/// The projector's integral kernel `e^{-pi|x-y|^2/2 + i pi (x2 y1 - y2 x1)}`.
pub fn projector_kernel(x: (f64, f64), y: (f64, f64)) -> Complex64 {
    let (d1, d2) = (x.0 - y.0, x.1 - y.1);
    Complex64::from_polar(
        (-PI * (d1 * d1 + d2 * d2) / 2.0).exp(),
        PI * (x.1 * y.0 - y.1 * x.0),
    )
}

/// Direct O(M^2) quadrature of the kernel integral; small grids only.
pub fn project_kernel_oracle(u: &ComplexField) -> Result<ComplexField> {
    let g = u.grid;
    if g.len() > KERNEL_ORACLE_MAX_POINTS {
        return Err(Error::Grid(format!(
            "kernel oracle limited to {KERNEL_ORACLE_MAX_POINTS} points, got {}",
            g.len()
        )));
    }
    let pts: Vec<(f64, f64)> = (0..g.len()).map(|i| g.point(i)).collect();
    let w = g.cell_area();
    let values = pts
        .iter()
        .map(|&x| {
            pts.iter()
                .zip(&u.values)
                .map(|(&y, v)| projector_kernel(x, y) * v)
                .sum::<Complex64>()
                * w
        })
        .collect();
    Ok(ComplexField { grid: g, values })
}

/// Both sides of `int |grad |u||^2 = pi int |u|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarlenReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Share of `||u||^2` sitting in the masked cells.
    pub excluded_mass: f64,
}

impl CarlenReport {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs
    }
}

/// Checks Carlen's identity on a grid.
///
/// `grad |u| = Re(conj(u) grad u) / |u|`, with `grad u` from central differences
/// of the smooth complex field; cells where `|u| < 1e-6 max|u|` are excluded.
pub fn carlen_check(c: &FockCoefficients, grid: &Grid2) -> CarlenReport {
    let u = synthesize(c, grid);
    let d1 = u.derivative_fd(0);
    let d2 = u.derivative_fd(1);
    let floor = 1e-6 * u.max_abs();
    let mut lhs = 0.0;
    let mut excluded = 0.0;
    for i in 0..u.values.len() {
        let v = u.values[i];
        let a = v.norm();
        if a < floor {
            excluded += a * a;
            continue;
        }
        let g1 = (v.conj() * d1.values[i]).re / a;
        let g2 = (v.conj() * d2.values[i]).re / a;
        lhs += g1 * g1 + g2 * g2;
    }
    let w = grid.cell_area();
    let mass = u.norm_sq();
    CarlenReport { lhs: lhs * w, rhs: PI * mass, excluded_mass: excluded * w / mass }
}

/// Applies `a1 x1^2 + a2 x2^2` in the Fock basis (pentadiagonal, exact).
///
/// `<phi_k, x_j^2 phi_k> = (2k + 2) / (4 pi)` and
/// `<phi_{k+2}, x_1^2 phi_k> = -<phi_{k+2}, x_2^2 phi_k> = sqrt((k+1)(k+2)) / (4 pi)`.
pub fn apply_quadratic(c: &[Complex64], a1: f64, a2: f64) -> Vec<Complex64> {
    let n = c.len();
    let s = 1.0 / (4.0 * PI);
    let mut out: Vec<Complex64> = (0..n).map(|k| c[k] * ((a1 + a2) * (2 * k + 2) as f64 * s)).collect();
    for k in 0..n.saturating_sub(2) {
        let off = (a1 - a2) * (((k + 1) * (k + 2)) as f64).sqrt() * s;
        out[k] += c[k + 2] * off;
        out[k + 2] += c[k] * off;
    }
    out
}

/// Solves `(a1 x1^2 + a2 x2^2 + sigma) x = rhs` in the basis.
///
/// The matrix couples `k` to `k +- 2` only, so even and odd degrees form two
/// independent tridiagonal systems.
pub fn solve_shifted_quadratic(rhs: &[Complex64], a1: f64, a2: f64, sigma: f64) -> Vec<Complex64> {
    let n = rhs.len();
    let s = 1.0 / (4.0 * PI);
    let diag = |k: usize| (a1 + a2) * (2 * k + 2) as f64 * s + sigma;
    let off = |k: usize| (a1 - a2) * (((k + 1) * (k + 2)) as f64).sqrt() * s;
    let mut out = vec![ZERO; n];
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..n).step_by(2).collect();
        let m = idx.len();
        if m == 0 {
            continue;
        }
        let mut cp = vec![0.0; m];
        let mut dp = vec![ZERO; m];
        for (t, &k) in idx.iter().enumerate() {
            let lower = if t > 0 { off(idx[t - 1]) } else { 0.0 };
            let upper = if t + 1 < m { off(k) } else { 0.0 };
            let denom = diag(k) - if t > 0 { lower * cp[t - 1] } else { 0.0 };
            cp[t] = upper / denom;
            dp[t] = (rhs[k] - if t > 0 { dp[t - 1] * lower } else { ZERO }) / denom;
        }
        out[idx[m - 1]] = dp[m - 1];
        for t in (0..m - 1).rev() {
            out[idx[t]] = dp[t] - out[idx[t + 1]] * cp[t];
        }
    }
    out
}

/// `<u, (a1 x1^2 + a2 x2^2) u>` in the basis.
pub fn quadratic_expectation(c: &[Complex64], a1: f64, a2: f64) -> f64 {
    apply_quadratic(c, a1, a2)
        .iter()
        .zip(c)
        .map(|(h, v)| (v.conj() * h).re)
        .sum()
}

/// `int x2^2 |u|^2 / ||u||^2` from the exact matrix elements.
pub fn x2sq_rayleigh(c: &FockCoefficients) -> f64 {
    quadratic_expectation(&c.c, 0.0, 1.0) / c.norm_sq()
}

/// Same quotient by quadrature of the synthesized field.
pub fn x2sq_rayleigh_on_grid(c: &FockCoefficients, grid: &Grid2) -> f64 {
    let u = synthesize(c, grid);
    u.weighted_norm_sq(|_, x2| x2 * x2) / u.norm_sq()
}

/// Table of `b_{s,i} = sqrt(C(s,i) / 2^s)` for the pair expansion
/// `phi_i phi_j = b_{s,i} sqrt(pi^s / s!) z^s e^{-pi |z|^2}` with `s = i + j`.
///
/// Distinct `s` are orthogonal in `L^2`, which gives the exact quartic term
/// `int |u|^4 = (1/2) sum_s |Q_s|^2` with `Q_s = sum_{i+j=s} c_i c_j b_{s,i}`.
#[derive(Debug, Clone)]
pub struct QuarticTable {
    n: usize,
    // rows[s][i - lo(s)]
    rows: Vec<Vec<f64>>,
}

impl QuarticTable {
    pub fn new(n: usize) -> Result<Self> {
        if n > DEGREE_CAP {
            return Err(Error::DegreeCap { degree: n, cap: DEGREE_CAP });
        }
        let lf = ln_factorials(2 * n);
        let ln2 = std::f64::consts::LN_2;
        let rows = (0..=2 * n)
            .map(|s| {
                let (lo, hi) = (s.saturating_sub(n), s.min(n));
                (lo..=hi)
                    .map(|i| (0.5 * (lf[s] - lf[i] - lf[s - i] - s as f64 * ln2)).exp())
                    .collect()
            })
            .collect();
        Ok(Self { n, rows })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    fn lo(&self, s: usize) -> usize {
        s.saturating_sub(self.n)
    }

    /// `Q_s` for `s = 0..=2N`.
    pub fn pair_amplitudes(&self, c: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(c.len(), self.n + 1);
        self.rows
            .iter()
            .enumerate()
            .map(|(s, row)| {
                let lo = self.lo(s);
                row.iter()
                    .enumerate()
                    .map(|(t, b)| {
                        let i = lo + t;
                        c[i] * c[s - i] * *b
                    })
                    .sum()
            })
            .collect()
    }

    /// `int |u|^4`.
    pub fn quartic(&self, c: &[Complex64]) -> f64 {
        0.5 * self.pair_amplitudes(c).iter().map(|q| q.norm_sqr()).sum::<f64>()
    }

    /// `<|u|^2 u, phi_k>` for `k = 0..=N`, given the pair amplitudes.
    pub fn cubic_from_amplitudes(&self, c: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.n + 1];
        for (s, row) in self.rows.iter().enumerate() {
            let lo = self.lo(s);
            let qs = q[s] * 0.5;
            for (t, b) in row.iter().enumerate() {
                let k = lo + t;
                out[k] += qs * c[s - k].conj() * *b;
            }
        }
        out
    }

    /// `<|u|^2 u, phi_k>`, the truncated projection of the cubic term.
    pub fn cubic_projection(&self, c: &[Complex64]) -> Vec<Complex64> {
        let q = self.pair_amplitudes(c);
        self.cubic_from_amplitudes(c, &q)
    }
}

/// Same projection by grid synthesis of `|u|^2 u` and quadrature.
pub fn cubic_projection_on_grid(c: &FockCoefficients, grid: &Grid2) -> Result<Vec<Complex64>> {
    let mut u = synthesize(c, grid);
    u.values.iter_mut().for_each(|v| *v *= v.norm_sqr());
    Ok(project_lll(&u, c.degree())?.c)
}

/// Bargmann-type transform of a function of one variable,
/// `(W v)(y, eta) = int v(x) 2^{1/4} e^{-pi (x - y)^2} e^{-2 i pi (x - y/2) eta} dx`,
/// sampled on `grid` with `x1 = eta`, `x2 = y`.
///
/// `xs` are equally spaced nodes with spacing `dx`.
pub fn bargmann_transform(xs: &[f64], dx: f64, v: &[Complex64], grid: &Grid2) -> ComplexField {
    let norm = 2f64.powf(0.25) * dx;
    ComplexField::from_fn(*grid, |eta, y| {
        xs.iter()
            .zip(v)
            .map(|(&x, f)| {
                let env = (-PI * (x - y) * (x - y)).exp();
                f * Complex64::from_polar(env, -2.0 * PI * (x - y / 2.0) * eta)
            })
            .sum::<Complex64>()
            * norm
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(n: usize, seed: u64) -> FockCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..=n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        FockCoefficients { c }.normalized()
    }

    #[test]
    fn basis_norms_and_orthogonality() {
        let g = Grid2::square(7.0, 256).unwrap();
        let fields: Vec<_> = (0..=12).map(|k| fock_basis_eval(k, &g).unwrap()).collect();
        for j in 0..fields.len() {
            for k in 0..fields.len() {
                let ip = fields[j].inner(&fields[k]);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-8, "{j} {k} {ip}");
            }
        }
    }

    #[test]
    fn recursion_matches_closed_form() {
        let lf = ln_factorials(600);
        let mut phi = vec![ZERO; 601];
        for &(x1, x2) in &[(0.3, -0.2), (5.0, 7.0), (-13.0, 2.5), (0.0, 0.0)] {
            basis_values(x1, x2, &mut phi);
            for k in [0, 1, 7, 100, 333, 600] {
                let a = basis_closed_form(k, lf[k], x1, x2);
                assert!((phi[k] - a).norm() <= 1e-10 * a.norm().max(1e-300), "{k} {x1} {x2}");
            }
        }
        // far out the Gaussian underflows; the recursion must not produce NaN
        basis_values(40.0, 0.0, &mut phi);
        assert!(phi.iter().all(|v| v.re.is_finite()));
    }

    #[test]
    fn matrix_elements_match_quadrature() {
        let g = Grid2::square(8.0, 256).unwrap();
        let n = 20;
        let c = random_coeffs(n, 3);
        let u = synthesize(&c, &g);
        for (a1, a2) in [(1.0, 0.0), (0.0, 1.0), (0.3, 2.0)] {
            let exact = quadratic_expectation(&c.c, a1, a2);
            let quad = u.weighted_norm_sq(|x1, x2| a1 * x1 * x1 + a2 * x2 * x2);
            assert!((exact - quad).abs() < 1e-10, "{exact} {quad}");
        }
    }

    #[test]
    fn quartic_table_matches_quadrature() {
        let g = Grid2::square(7.0, 256).unwrap();
        let c = random_coeffs(16, 9);
        let t = QuarticTable::new(16).unwrap();
        let u = synthesize(&c, &g);
        assert!((t.quartic(&c.c) - u.quartic()).abs() < 1e-10);
        let exact = t.cubic_projection(&c.c);
        let grid = cubic_projection_on_grid(&c, &g).unwrap();
        for (a, b) in exact.iter().zip(&grid) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn cubic_projection_is_the_gradient() {
        let t = QuarticTable::new(10).unwrap();
        let c = random_coeffs(10, 5);
        let grad = t.cubic_projection(&c.c);
        let h = 1e-6;
        for k in [0, 3, 10] {
            let mut p = c.c.clone();
            p[k] += h;
            let mut m = c.c.clone();
            m[k] -= h;
            // d/d(Re c_k) of int |u|^4 equals 4 Re <|u|^2 u, phi_k>
            let fd = (t.quartic(&p) - t.quartic(&m)) / (2.0 * h);
            assert!((fd - 4.0 * grad[k].re).abs() < 1e-6, "{fd} {}", grad[k]);
        }
    }

    #[test]
    fn projection_reproduces_basis() {
        let g = Grid2::square(6.0, 128).unwrap();
        let u = fock_basis_eval(3, &g).unwrap();
        let c = project_lll(&u, 20).unwrap();
        for (k, v) in c.c.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-8);
        }
        assert!(synthesize(&c, &g).sub(&u).norm() < 1e-8);
    }

    #[test]
    fn shifted_gaussian_loses_mass() {
        let g = Grid2::square(6.0, 128).unwrap();
        let u = ComplexField::from_fn(g, |x1, x2| {
            Complex64::new((-PI * ((x1 - 0.7).powi(2) + (x2 + 0.2).powi(2))).exp(), 0.0)
        });
        let p = project_field(&u, 60).unwrap();
        assert!(p.norm() < u.norm() - 1e-3);
    }

    #[test]
    fn kernel_oracle_reproduces_ground_state() {
        let g = Grid2::square(4.0, 64).unwrap();
        let u = fock_basis_eval(0, &g).unwrap();
        let p = project_kernel_oracle(&u).unwrap();
        assert!(p.sub(&u).norm() < 1e-6);
    }

    #[test]
    fn carlen_on_ground_state() {
        let g = Grid2::square(6.0, 256).unwrap();
        let r = carlen_check(&FockCoefficients::unit(0, 0), &g);
        assert!(r.relative_gap() < 1e-2);
        assert!((r.rhs - PI).abs() < 1e-8);
    }

    #[test]
    fn x2sq_of_ground_state() {
        let v = x2sq_rayleigh(&FockCoefficients::unit(0, 4));
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn strip_window_sequence_descends() {
        let vals: Vec<f64> = [16, 64, 256].iter().map(|&n| x2sq_rayleigh(&FockCoefficients::strip_window(n))).collect();
        let floor = 1.0 / (4.0 * PI);
        assert!(vals[0] > vals[1] && vals[1] > vals[2] && vals[2] >= floor);
        assert!(vals[2] < 1.02 * floor);
    }

    #[test]
    fn bargmann_of_gaussian_is_ground_state() {
        let xs: Vec<f64> = (0..400).map(|i| -5.0 + (i as f64 + 0.5) * 0.025).collect();
        let v: Vec<Complex64> = xs
            .iter()
            .map(|x| Complex64::new(2f64.powf(0.25) * (-PI * x * x).exp(), 0.0))
            .collect();
        let g = Grid2::square(4.0, 64).unwrap();
        let w = bargmann_transform(&xs, 0.025, &v, &g);
        let phi0 = fock_basis_eval(0, &g).unwrap();
        assert!(w.sub(&phi0).norm() < 1e-8);
    }

    #[test]
    fn truncation_flag() {
        let mut c = FockCoefficients::unit(0, 8);
        assert!(c.truncation_warning(1e-3).is_none());
        c.c[8] = Complex64::new(0.1, 0.0);
        assert!(c.truncation_warning(1e-3).is_some());
    }

    #[test]
    fn shifted_quadratic_solve_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let r: Vec<Complex64> = (0..37).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let x = solve_shifted_quadratic(&r, 0.01, 1.3, 0.2);
        let back = apply_quadratic(&x, 0.01, 1.3);
        for k in 0..r.len() {
            assert!((back[k] + x[k] * 0.2 - r[k]).norm() < 1e-12);
        }
    }
}