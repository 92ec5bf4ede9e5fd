//! The metaplectic operator attached to the reduction map, anisotropic
//! lowest-Landau-level states, and the annihilator that characterizes them.
//!
//! With `D = (2 i pi)^{-1} d/dx` and the transform `v^(xi) = int e^{-2 i pi x xi} v`,
//!
//! ```text
//! (M v)(x) = (l1 l2)^{-1/2} e^{2 i pi d ((l1 l2)^{-1} - c) x1 x2} (e^{2 i pi d^{-1} D1 D2} v)(x1 / l1, x2 / l2).
//! ```
//!
//! The multiplier runs through a 2D FFT. The dilation is exact if the output
//! lives on the dilated grid, which is what [`apply_metaplectic`] returns;
//! [`apply_metaplectic_onto`] resamples onto an arbitrary grid instead.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fft2, ComplexField, Grid2};
use crate::symplectic::{DerivedParams, TrapParams};

/// Largest field modulus tolerated on the boundary, relative to the maximum.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Default degree cap for polynomial entire factors.
pub const POLY_DEGREE_CAP: usize = 64;

/// Polynomial truncation of an entire function.
#[derive(Debug, Clone, PartialEq)]
pub struct EntirePoly {
    pub coeffs: Vec<Complex64>,
}

impl EntirePoly {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_cap(coeffs, POLY_DEGREE_CAP)
    }

    pub fn with_cap(mut coeffs: Vec<Complex64>, cap: usize) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        if coeffs.len() - 1 > cap {
            return Err(Error::DegreeCap { degree: coeffs.len() - 1, cap });
        }
        Ok(Self { coeffs })
    }

    pub fn constant(a: Complex64) -> Self {
        Self { coeffs: vec![a] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * w + a)
    }
}

/// Shape data of the anisotropic lowest Landau level. Unlike the full
/// [`DerivedParams`] it stays defined at eps = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LllShape {
    pub beta2: f64,
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
}

impl LllShape {
    pub fn from_trap(p: &TrapParams) -> Self {
        let (w, n2) = (p.omega, p.nu * p.nu);
        let alpha = (n2 * n2 + 4.0 * w * w).sqrt();
        let mu2 = (1.0 + w * w + alpha).sqrt();
        Self {
            beta2: 2.0 * w * mu2 / (alpha + 2.0 * w * w + n2),
            gamma: 2.0 * alpha / w,
            nu: p.nu,
            alpha,
        }
    }
}

impl From<&DerivedParams> for LllShape {
    fn from(dp: &DerivedParams) -> Self {
        Self { beta2: dp.beta2, gamma: dp.gamma_par, nu: dp.trap.nu, alpha: dp.alpha }
    }
}

/// `F(x1 + i b2 x2) exp(-g pi/(4 b2) [x1^2 (1 - nu^2/(2a)) + (b2 x2)^2 (1 + nu^2/(2a))]) exp(-i pi nu^2 g x1 x2 / (4a))`.
pub fn anisotropic_lll_sample(shape: &LllShape, f: &EntirePoly, grid: &Grid2) -> Result<ComplexField> {
    let LllShape { beta2: b, gamma: g, nu, alpha: a } = *shape;
    if 2.0 * a - nu * nu <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "2 alpha - nu^2 = {} leaves the Gaussian without decay",
            2.0 * a - nu * nu
        )));
    }
    let r = nu * nu / (2.0 * a);
    Ok(ComplexField::from_fn(*grid, |x1, x2| {
        let env = -g * PI / (4.0 * b) * (x1 * x1 * (1.0 - r) + (b * x2).powi(2) * (1.0 + r));
        let phase = -PI * nu * nu * g * x1 * x2 / (4.0 * a);
        f.eval(Complex64::new(x1, b * x2)) * Complex64::from_polar(env.exp(), phase)
    }))
}

/// `||L u|| / ||u||` for
/// `L = (l2 c d - d/l1) x1 + l2 D2 - i mu2 l1 d^{-1} D1 - i mu2 c l1 x2`,
/// derivatives by 4th-order central differences.
pub fn annihilator_residual(dp: &DerivedParams, u: &ComplexField) -> f64 {
    let DerivedParams { lambda1: l1, lambda2: l2, c, d, mu2, .. } = *dp;
    let d1 = u.d_operator_fd(0);
    let d2 = u.d_operator_fd(1);
    let a = l2 * c * d - d / l1;
    let i = Complex64::new(0.0, 1.0);
    let mut num = 0.0;
    for (idx, v) in u.values.iter().enumerate() {
        let (x1, x2) = u.grid.point(idx);
        let lu = a * x1 * v + l2 * d2.values[idx] - i * (mu2 * l1 / d) * d1.values[idx] - i * (mu2 * c * l1 * x2) * v;
        num += lu.norm_sqr();
    }
    (num * u.grid.cell_area()).sqrt() / u.norm()
}

fn check_boundary(v: &ComplexField, what: &str) -> Result<()> {
    let m = v.max_abs();
    let b = v.boundary_max_abs();
    if m == 0.0 || b > BOUNDARY_TOL * m {
        return Err(Error::Resolution(format!(
            "{what}: boundary modulus {b:.3e} vs max {m:.3e}; enlarge the grid"
        )));
    }
    Ok(())
}

/// Fourier multiplier `e^{2 i pi s xi1 xi2}` applied through the FFT.
fn shear_multiplier(v: &ComplexField, s: f64) -> ComplexField {
    let g = v.grid;
    let (len1, len2) = (g.x1_max - g.x1_min, g.x2_max - g.x2_min);
    let mut data = v.values.clone();
    fft2(&mut data, g.n1, g.n2, false);
    for i in 0..g.n1 {
        let xi1 = Grid2::frequency(i, g.n1, len1);
        for j in 0..g.n2 {
            let xi2 = Grid2::frequency(j, g.n2, len2);
            data[i * g.n2 + j] *= Complex64::from_polar(1.0, 2.0 * PI * s * xi1 * xi2);
        }
    }
    fft2(&mut data, g.n1, g.n2, true);
    ComplexField { grid: g, values: data }
}

fn chirp(dp: &DerivedParams) -> f64 {
    2.0 * PI * dp.d * (1.0 / (dp.lambda1 * dp.lambda2) - dp.c)
}

/// `M v` on the grid dilated by `(l1, l2)`.
pub fn apply_metaplectic(dp: &DerivedParams, v: &ComplexField) -> Result<ComplexField> {
    v.grid.check_fft_ready()?;
    check_boundary(v, "input")?;
    let w = shear_multiplier(v, 1.0 / dp.d);
    check_boundary(&w, "sheared field")?;
    let (l1, l2) = (dp.lambda1, dp.lambda2);
    let grid = v.grid.dilated(l1, l2);
    let (amp, k) = ((l1 * l2).powf(-0.5), chirp(dp));
    let mut out = ComplexField { grid, values: w.values };
    for (idx, val) in out.values.iter_mut().enumerate() {
        let (x1, x2) = grid.point(idx);
        *val *= Complex64::from_polar(amp, k * x1 * x2);
    }
    Ok(out)
}

/// `M v` resampled onto `target`: the sheared field is refined spectrally by a
/// factor 2, then read off at `(x1 / l1, x2 / l2)` by bicubic interpolation.
pub fn apply_metaplectic_onto(dp: &DerivedParams, v: &ComplexField, target: &Grid2) -> Result<ComplexField> {
    v.grid.check_fft_ready()?;
    check_boundary(v, "input")?;
    let w = shear_multiplier(v, 1.0 / dp.d);
    check_boundary(&w, "sheared field")?;
    let fine = w.oversample_spectral(2)?;
    let (l1, l2) = (dp.lambda1, dp.lambda2);
    let pulled = target.dilated(1.0 / l1, 1.0 / l2);
    let mut out = fine.resample_bicubic(&pulled);
    out.grid = *target;
    let (amp, k) = ((l1 * l2).powf(-0.5), chirp(dp));
    for (idx, val) in out.values.iter_mut().enumerate() {
        let (x1, x2) = target.point(idx);
        *val *= Complex64::from_polar(amp, k * x1 * x2);
    }
    Ok(out)
}

/// `M* u`, returned on the grid of `u` dilated by `(1/l1, 1/l2)`.
pub fn apply_metaplectic_adjoint(dp: &DerivedParams, u: &ComplexField) -> Result<ComplexField> {
    u.grid.check_fft_ready()?;
    check_boundary(u, "input")?;
    let (l1, l2) = (dp.lambda1, dp.lambda2);
    let (amp, k) = ((l1 * l2).sqrt(), chirp(dp));
    let mut w = u.clone();
    for (idx, val) in w.values.iter_mut().enumerate() {
        let (x1, x2) = u.grid.point(idx);
        *val *= Complex64::from_polar(amp, -k * x1 * x2);
    }
    w.grid = u.grid.dilated(1.0 / l1, 1.0 / l2);
    let out = shear_multiplier(&w, -1.0 / dp.d);
    check_boundary(&out, "sheared field")?;
    Ok(out)
}

/// `G_ij = Re <X_i u, X_j u>` for `X = (x1, x2, D1, D2)`, with spectral `D`.
///
/// For a quadratic symbol with matrix `Q`, `<q^w u, u> = sum_ij Q_ij G_ij`,
/// because the Weyl symbol of `X_i X_j` is the symmetrized product.
pub fn weyl_gram(u: &ComplexField) -> Matrix4<f64> {
    let x1 = u.multiply_by(|x1, _| Complex64::new(x1, 0.0));
    let x2 = u.multiply_by(|_, x2| Complex64::new(x2, 0.0));
    let d1 = u.d_operator_spectral(0);
    let d2 = u.d_operator_spectral(1);
    let ops = [x1, x2, d1, d2];
    Matrix4::from_fn(|i, j| ops[i].inner(&ops[j]).re)
}

/// `<q^w u, u>` for the quadratic symbol `X^T Q X`.
pub fn weyl_expectation(q: &Matrix4<f64>, u: &ComplexField) -> f64 {
    q.component_mul(&weyl_gram(u)).sum()
}

/// `||l^w u||^2` for the linear symbol `<a, X>`.
pub fn linear_form_square(a: &Vector4<f64>, u: &ComplexField) -> f64 {
    (a.transpose() * weyl_gram(u) * a)[(0, 0)]
}

/// Normalized oscillator ground state `(2 mu1)^{1/4} (2 mu2)^{1/4} e^{-pi (mu1 y1^2 + mu2 y2^2)}`.
pub fn oscillator_ground_state(mu1: f64, mu2: f64, grid: &Grid2) -> ComplexField {
    let a = (4.0 * mu1 * mu2).powf(0.25);
    ComplexField::from_fn(*grid, |y1, y2| Complex64::new(a * (-PI * (mu1 * y1 * y1 + mu2 * y2 * y2)).exp(), 0.0))
}
