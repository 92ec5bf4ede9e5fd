//! Trap quadratic form, Williamson frequencies, the derived parameter set and
//! the explicit symplectic map that puts the trap form in normal form.
//!
//! Phase-space coordinates are ordered `(x1, x2, xi1, xi2)` throughout and the
//! symplectic matrix is `sigma = [[0, I], [-I, 0]]`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest rotation ratio accepted by default. Several derived parameters
/// divide by omega.
pub const DEFAULT_OMEGA_FLOOR: f64 = 1e-3;

/// Tolerance on `omega^2 + nu^2 + eps^2 = 1`.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Physical trap inputs: rotation ratio, anisotropy, residual and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapParams {
    pub omega: f64,
    pub nu: f64,
    pub eps: f64,
    pub g: f64,
}

impl TrapParams {
    /// Checks the constraint and the default omega floor.
    pub fn new(omega: f64, nu: f64, eps: f64, g: f64) -> Result<Self> {
        Self::with_floor(omega, nu, eps, g, DEFAULT_OMEGA_FLOOR)
    }

    pub fn with_floor(omega: f64, nu: f64, eps: f64, g: f64, floor: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("nu", nu), ("eps", eps), ("g", g)] {
            if !v.is_finite() {
                return Err(Error::InvalidTrap(format!("{name} is not finite")));
            }
        }
        if nu < 0.0 || eps < 0.0 {
            return Err(Error::InvalidTrap("nu and eps must be non-negative".into()));
        }
        if g <= 0.0 {
            return Err(Error::InvalidTrap(format!("coupling g = {g} must be positive")));
        }
        if omega < floor {
            return Err(Error::InvalidTrap(format!(
                "omega = {omega} is below the floor {floor}"
            )));
        }
        let s = omega * omega + nu * nu + eps * eps;
        if (s - 1.0).abs() > CONSTRAINT_TOL {
            return Err(Error::InvalidTrap(format!(
                "omega^2 + nu^2 + eps^2 = {s}, expected 1"
            )));
        }
        Ok(Self { omega, nu, eps, g })
    }

    /// eps is solved from the constraint.
    pub fn from_omega_nu(omega: f64, nu: f64, g: f64) -> Result<Self> {
        let eps = remaining(omega, nu, "omega", "nu")?;
        Self::new(omega, nu, eps, g)
    }

    /// omega is solved from the constraint.
    pub fn from_nu_eps(nu: f64, eps: f64, g: f64) -> Result<Self> {
        let omega = remaining(nu, eps, "nu", "eps")?;
        Self::new(omega, nu, eps, g)
    }

    /// nu is solved from the constraint.
    pub fn from_omega_eps(omega: f64, eps: f64, g: f64) -> Result<Self> {
        let nu = remaining(omega, eps, "omega", "eps")?;
        Self::new(omega, nu, eps, g)
    }

    /// Accepts any two (or all three, if consistent to `tol`) of omega, nu, eps.
    pub fn from_any_two(
        omega: Option<f64>,
        nu: Option<f64>,
        eps: Option<f64>,
        g: f64,
        tol: f64,
    ) -> Result<Self> {
        match (omega, nu, eps) {
            (Some(o), Some(n), None) => Self::from_omega_nu(o, n, g),
            (None, Some(n), Some(e)) => Self::from_nu_eps(n, e, g),
            (Some(o), None, Some(e)) => Self::from_omega_eps(o, e, g),
            (Some(o), Some(n), Some(e)) => {
                let s = o * o + n * n + e * e;
                if (s - 1.0).abs() > tol {
                    return Err(Error::InvalidTrap(format!(
                        "over-determined inputs are inconsistent: omega^2 + nu^2 + eps^2 = {s}"
                    )));
                }
                Self::from_omega_nu(o, n, g)
            }
            _ => Err(Error::InvalidTrap(
                "give two of omega, nu, eps".into(),
            )),
        }
    }
}

fn remaining(a: f64, b: f64, na: &str, nb: &str) -> Result<f64> {
    let r = 1.0 - a * a - b * b;
    if r < -CONSTRAINT_TOL {
        return Err(Error::InvalidTrap(format!(
            "{na}^2 + {nb}^2 = {} exceeds 1: the trap form is not positive and q^w is unbounded from below",
            1.0 - r
        )));
    }
    Ok(r.max(0.0).sqrt())
}

/// Block symplectic matrix `[[0, I], [-I, 0]]`.
pub fn sigma() -> Matrix4<f64> {
    let mut s = Matrix4::zeros();
    s[(0, 2)] = 1.0;
    s[(1, 3)] = 1.0;
    s[(2, 0)] = -1.0;
    s[(3, 1)] = -1.0;
    s
}

/// Poisson bracket of the linear forms `<a, X>` and `<b, X>`.
pub fn poisson_bracket(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    (sigma() * a).dot(b)
}

/// Symmetric 4x4 matrix of a quadratic form on phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm4 {
    pub q: Matrix4<f64>,
}

impl QuadraticForm4 {
    pub fn from_matrix(q: Matrix4<f64>) -> Result<Self> {
        let scale = q.amax().max(1.0);
        if (q - q.transpose()).amax() > 1e-14 * scale {
            return Err(Error::Indefinite("matrix is not symmetric".into()));
        }
        Ok(Self { q })
    }

    /// Value `X^T Q X`.
    pub fn value(&self, x: &Vector4<f64>) -> f64 {
        x.dot(&(self.q * x))
    }

    /// `F = sigma Q`.
    pub fn fundamental_matrix(&self) -> Matrix4<f64> {
        sigma() * self.q
    }

    /// Eigenvalues of the symmetric matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = self.q.symmetric_eigenvalues();
        let mut v = [e[0], e[1], e[2], e[3]];
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues()[0] > 0.0
    }

    /// Number of singular values above `tol`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        self.q
            .singular_values()
            .iter()
            .filter(|&&s| s > tol)
            .count()
    }

    /// Recognizes the trap pattern and returns `(omega, nu)`.
    pub fn as_trap(&self) -> Option<(f64, f64)> {
        let q = &self.q;
        let t = 1e-14;
        let omega = -q[(0, 3)];
        let nu2 = 1.0 - q[(0, 0)];
        let pattern = (q[(2, 2)] - 1.0).abs() < t
            && (q[(3, 3)] - 1.0).abs() < t
            && (q[(1, 1)] - 1.0 - nu2).abs() < t
            && (q[(1, 2)] - omega).abs() < t
            && q[(0, 1)].abs() < t
            && q[(0, 2)].abs() < t
            && q[(1, 3)].abs() < t
            && q[(2, 3)].abs() < t;
        (pattern && omega > 0.0 && nu2 >= 0.0).then(|| (omega, nu2.sqrt()))
    }
}

/// `q = xi1^2 + xi2^2 + (1 - nu^2) x1^2 + (1 + nu^2) x2^2 - 2 omega (x1 xi2 - x2 xi1)`.
pub fn build_trap_quadratic_form(p: &TrapParams) -> QuadraticForm4 {
    let (w, n2) = (p.omega, p.nu * p.nu);
    #[rustfmt::skip]
    let q = Matrix4::new(
        1.0 - n2, 0.0,      0.0, -w,
        0.0,      1.0 + n2, w,   0.0,
        0.0,      w,        1.0, 0.0,
        -w,       0.0,      0.0, 1.0,
    );
    QuadraticForm4 { q }
}

/// Closed-form frequencies of a trap form, `mu^2 = 1 + omega^2 -/+ alpha`.
///
/// mu1 is computed as `eps sqrt(2 nu^2 + eps^2) / mu2`, which avoids the
/// cancellation in `1 + omega^2 - alpha` and gives exactly 0 when eps = 0.
pub fn trap_frequencies(omega: f64, nu: f64, eps: f64) -> (f64, f64) {
    let alpha = (nu.powi(4) + 4.0 * omega * omega).sqrt();
    let mu2 = (1.0 + omega * omega + alpha).sqrt();
    let mu1 = eps * (2.0 * nu * nu + eps * eps).sqrt() / mu2;
    (mu1, mu2)
}

/// Eigen route: imaginary parts of the eigenvalues of `sigma Q`.
pub fn frequencies_by_eigensolver(q: &QuadraticForm4) -> Result<(f64, f64)> {
    let ev = q.fundamental_matrix().complex_eigenvalues();
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    // A defective zero eigenvalue (rank-deficient Q) splits by ~sqrt(machine eps).
    let tol = 1e-6 * scale;
    let mut im = Vec::with_capacity(4);
    for z in ev.iter() {
        if z.re.abs() > tol {
            return Err(Error::Indefinite(format!(
                "sigma Q has eigenvalue {z} off the imaginary axis"
            )));
        }
        im.push(z.im.abs());
    }
    im.sort_by(f64::total_cmp);
    Ok((0.5 * (im[0] + im[1]), 0.5 * (im[2] + im[3])))
}

/// Williamson frequencies `0 <= mu1 <= mu2` of a positive semi-definite form.
///
/// Trap forms are answered by the closed forms after checking them against
/// the eigensolver to 1e-10; other forms go through the eigensolver alone.
pub fn williamson_frequencies(q: &QuadraticForm4) -> Result<(f64, f64)> {
    let numeric = frequencies_by_eigensolver(q)?;
    let Some((omega, nu)) = q.as_trap() else {
        return Ok(numeric);
    };
    let e2 = 1.0 - omega * omega - nu * nu;
    if e2 < -CONSTRAINT_TOL {
        return Err(Error::Indefinite(format!(
            "omega^2 + nu^2 = {} exceeds 1",
            1.0 - e2
        )));
    }
    // Inputs with eps = 0 leave a rounding residue in 1 - omega^2 - nu^2.
    let e2 = if e2.abs() <= CONSTRAINT_TOL { 0.0 } else { e2 };
    let closed = trap_frequencies(omega, nu, e2.sqrt());
    // The eigensolver cannot resolve a defective zero pair below ~1e-8.
    let tol1 = if closed.0 < 1e-6 { 1e-6 } else { 1e-10 };
    if (closed.0 - numeric.0).abs() > tol1 || (closed.1 - numeric.1).abs() > 1e-10 {
        return Err(Error::FrequencyMismatch {
            closed_mu1: closed.0,
            closed_mu2: closed.1,
            numeric_mu1: numeric.0,
            numeric_mu2: numeric.1,
        });
    }
    Ok(closed)
}

/// The full derived parameter set of a trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub trap: TrapParams,
    pub alpha: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma_par: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub c: f64,
    pub d: f64,
    pub kappa1: f64,
    pub kappa: f64,
    pub g0: f64,
    pub g1: f64,
}

/// `alpha - 2 omega^2 + nu^2`, written without cancellation.
///
/// Uses `alpha - 2 omega^2 = (nu^4 + 4 omega^2 (1 - omega^2)) / (alpha + 2 omega^2)`
/// and `1 - omega^2 = nu^2 + eps^2`.
fn small_gap(omega: f64, nu: f64, eps: f64, alpha: f64) -> f64 {
    let w2 = omega * omega;
    let n2 = nu * nu;
    (n2 * n2 + 4.0 * w2 * (n2 + eps * eps)) / (alpha + 2.0 * w2) + n2
}

pub fn derive_parameters(p: &TrapParams) -> Result<DerivedParams> {
    let TrapParams { omega, nu, eps, g } = *p;
    if omega <= 0.0 {
        return Err(Error::Degenerate("omega must be positive".into()));
    }
    let (w2, n2, e2) = (omega * omega, nu * nu, eps * eps);
    let alpha = (n2 * n2 + 4.0 * w2).sqrt();
    let (mu1, mu2) = trap_frequencies(omega, nu, eps);
    let gap = small_gap(omega, nu, eps, alpha);
    let wide = alpha + 2.0 * w2 + n2;
    if gap <= 0.0 {
        return Err(Error::Degenerate(format!(
            "alpha - 2 omega^2 + nu^2 = {gap} must be positive"
        )));
    }
    let beta1 = 2.0 * omega * mu1 / gap;
    let beta2 = 2.0 * omega * mu2 / wide;
    let gamma_par = 2.0 * alpha / omega;
    let lambda1 = (gap / (2.0 * alpha)).sqrt();
    let lambda2 = (wide / (2.0 * alpha)).sqrt();
    let d = gamma_par * lambda1 * lambda2 / 2.0;
    let c = (lambda1 * lambda1 + lambda2 * lambda2) / (2.0 * lambda1 * lambda2);
    let kappa1 = (wide * (2.0 * n2 + e2) / (alpha - n2 + 2.0 * w2)).sqrt();
    let g1 = g * wide / (2.0 * alpha);
    Ok(DerivedParams {
        trap: *p,
        alpha,
        mu1,
        mu2,
        beta1,
        beta2,
        gamma_par,
        lambda1,
        lambda2,
        c,
        d,
        kappa1,
        kappa: kappa1 / beta2,
        g0: g1 * gamma_par * gamma_par / (4.0 * beta2),
        g1,
    })
}

/// Block matrix `[[I, 0], [A, I]] [[B^-1, 0], [0, B^T]] [[I, -C], [0, I]]`.
pub fn generating_product(a: &Matrix2<f64>, b: &Matrix2<f64>, c: &Matrix2<f64>) -> Result<Matrix4<f64>> {
    let b_inv = b
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("B is singular".into()))?;
    let mut lower = Matrix4::identity();
    lower.fixed_view_mut::<2, 2>(2, 0).copy_from(a);
    let mut mid = Matrix4::zeros();
    mid.fixed_view_mut::<2, 2>(0, 0).copy_from(&b_inv);
    mid.fixed_view_mut::<2, 2>(2, 2).copy_from(&b.transpose());
    let mut upper = Matrix4::identity();
    upper.fixed_view_mut::<2, 2>(0, 2).copy_from(&(-c));
    Ok(lower * mid * upper)
}

/// The reduction map chi with its inverse and generating factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    pub chi: Matrix4<f64>,
    pub chi_inv: Matrix4<f64>,
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

pub fn build_reduction_map(dp: &DerivedParams) -> Result<SymplecticMap> {
    let DerivedParams {
        lambda1: l1,
        lambda2: l2,
        c,
        d,
        ..
    } = *dp;
    if l1 * l2 < 1e-300 || d < 1e-300 {
        return Err(Error::Degenerate(format!(
            "lambda1 lambda2 = {} makes B singular",
            l1 * l2
        )));
    }
    let cd = c * d;
    let off = d / (l1 * l2) - cd;
    let a = Matrix2::new(0.0, off, off, 0.0);
    let b = Matrix2::new(1.0 / l1, 0.0, 0.0, 1.0 / l2);
    let cm = Matrix2::new(0.0, 1.0 / d, 1.0 / d, 0.0);
    #[rustfmt::skip]
    let chi = Matrix4::new(
        l1,                 0.0,                0.0,    -l1 / d,
        0.0,                l2,                 -l2 / d, 0.0,
        0.0,                d / l1 - l2 * cd,   c * l2,  0.0,
        d / l2 - l1 * cd,   0.0,                0.0,     c * l1,
    );
    #[rustfmt::skip]
    let chi_inv = Matrix4::new(
        c * l2,             0.0,                0.0,     l2 / d,
        0.0,                c * l1,             l1 / d,  0.0,
        0.0,                -d / l2 + l1 * cd,  l1,      0.0,
        -d / l1 + l2 * cd,  0.0,                0.0,     l2,
    );
    Ok(SymplecticMap {
        chi,
        chi_inv,
        a,
        b,
        c: cm,
    })
}

impl SymplecticMap {
    /// `max |chi^T sigma chi - sigma|`.
    pub fn symplectic_residual(&self) -> f64 {
        let s = sigma();
        (self.chi.transpose() * s * self.chi - s).amax()
    }

    /// `max |chi chi_inv - I|`.
    pub fn inverse_residual(&self) -> f64 {
        (self.chi * self.chi_inv - Matrix4::identity()).amax()
    }

    /// `max |chi^T Q chi - diag(mu1^2, mu2^2, 1, 1)|`.
    pub fn diagonalization_residual(&self, q: &QuadraticForm4, mu1: f64, mu2: f64) -> f64 {
        let target = Matrix4::from_diagonal(&Vector4::new(mu1 * mu1, mu2 * mu2, 1.0, 1.0));
        (self.chi.transpose() * q.q * self.chi - target).amax()
    }

    /// `max |chi - product form rebuilt from (A, B, C)|`.
    pub fn factorization_residual(&self) -> f64 {
        match generating_product(&self.a, &self.b, &self.c) {
            Ok(p) => (p - self.chi).amax(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Residual of `chi(Bx + C eta, eta) = (x, Ax + B^T eta)`, the statement that
    /// `S(x, eta) = (<Ax,x> + 2<Bx,eta> + <C eta,eta>)/2` generates chi.
    pub fn generating_function_residual(&self, x: &Vector2<f64>, eta: &Vector2<f64>) -> f64 {
        let ds_deta = self.b * x + self.c * eta;
        let ds_dx = self.a * x + self.b.transpose() * eta;
        let lhs = self.chi * Vector4::new(ds_deta[0], ds_deta[1], eta[0], eta[1]);
        let rhs = Vector4::new(x[0], x[1], ds_dx[0], ds_dx[1]);
        (lhs - rhs).amax()
    }
}

/// The four weighted squares whose sum is the trap form, each as
/// `(weight, linear form)` in the order eta1^2, mu1^2 y1^2, mu2^2 y2^2, eta2^2.
pub fn normal_form_squares(dp: &DerivedParams) -> [(f64, Vector4<f64>); 4] {
    let TrapParams { omega, nu, eps, .. } = dp.trap;
    let (w2, n2, e2, a) = (omega * omega, nu * nu, eps * eps, dp.alpha);
    let lo = (a - n2) / (2.0 * omega);
    let hi = (a + n2) / (2.0 * omega);
    let gap = small_gap(omega, nu, eps, a);
    [
        (gap / (2.0 * a), Vector4::new(0.0, -lo, 1.0, 0.0)),
        (
            (a + 2.0 * w2 - n2) * e2 / (2.0 * a * dp.mu2 * dp.mu2),
            Vector4::new(hi, 0.0, 0.0, 1.0),
        ),
        (
            2.0 * w2 * (1.0 + w2 + a) / (a * (a + 2.0 * w2 + n2)),
            Vector4::new(0.0, hi, 1.0, 0.0),
        ),
        ((a + 2.0 * w2 + n2) / (2.0 * a), Vector4::new(-lo, 0.0, 0.0, 1.0)),
    ]
}

/// Evaluates the sum of squares at a phase-space point.
pub fn normal_form_value(dp: &DerivedParams, x: &Vector4<f64>) -> f64 {
    normal_form_squares(dp)
        .iter()
        .map(|(w, f)| w * f.dot(x).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig1() -> TrapParams {
        TrapParams::from_nu_eps(0.03, 0.002f64.sqrt(), 1.0).unwrap()
    }

    fn fig2() -> TrapParams {
        TrapParams::from_nu_eps(0.73, 0.002f64.sqrt(), 1.0).unwrap()
    }

    #[test]
    fn quadratic_form_entries() {
        let p = TrapParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let q = build_trap_quadratic_form(&p).q;
        assert_eq!(q.diagonal(), Vector4::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(q[(0, 3)], -1.0);
        assert_eq!(q[(3, 0)], -1.0);
        assert_eq!(q[(1, 2)], 1.0);
        assert_eq!(q[(2, 1)], 1.0);
        assert_eq!(q.iter().filter(|v| **v != 0.0).count(), 8);
    }

    #[test]
    fn identity_form_has_unit_frequencies() {
        let q = QuadraticForm4::from_matrix(Matrix4::identity()).unwrap();
        let (m1, m2) = williamson_frequencies(&q).unwrap();
        assert_relative_eq!(m1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn figure1_frequencies() {
        let q = build_trap_quadratic_form(&fig1());
        let (m1, m2) = williamson_frequencies(&q).unwrap();
        assert_relative_eq!(m1, 1.379e-3, max_relative = 1e-3);
        assert_relative_eq!(m2, 1.998549, max_relative = 1e-6);
    }

    #[test]
    fn isotropic_frequencies() {
        let p = TrapParams::from_omega_nu(0.6, 0.0, 1.0).unwrap();
        let (m1, m2) = williamson_frequencies(&build_trap_quadratic_form(&p)).unwrap();
        assert_relative_eq!(m1, 0.4, epsilon = 1e-12);
        assert_relative_eq!(m2, 1.6, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_rank() {
        let iso = TrapParams::from_omega_nu(1.0, 0.0, 1.0).unwrap();
        let q = build_trap_quadratic_form(&iso);
        assert_eq!(q.numerical_rank(1e-10), 2);
        assert_eq!(williamson_frequencies(&q).unwrap().0, 0.0);
        let aniso = TrapParams::from_omega_nu((1.0f64 - 0.09).sqrt(), 0.3, 1.0).unwrap();
        let q = build_trap_quadratic_form(&aniso);
        assert_eq!(q.numerical_rank(1e-10), 3);
        assert!(!q.is_positive_definite());
        assert_eq!(williamson_frequencies(&q).unwrap().0, 0.0);
    }

    #[test]
    fn unbounded_trap_is_rejected() {
        let err = TrapParams::from_omega_nu(1.0, 0.45, 1.0).unwrap_err();
        assert!(err.to_string().contains("unbounded"));
        assert!(TrapParams::new(0.5, 0.5, 0.5, 1.0).is_err());
        assert!(TrapParams::from_omega_nu(1e-4, 0.1, 1.0).is_err());
        assert!(TrapParams::from_any_two(Some(0.6), Some(0.0), Some(0.8), 1.0, 1e-9).is_ok());
        assert!(TrapParams::from_any_two(Some(0.6), Some(0.0), Some(0.7), 1.0, 1e-9).is_err());
    }

    #[test]
    fn scenario_parameters() {
        // Reference values recomputed independently from the beta2, gamma, mu2 chain.
        let d1 = derive_parameters(&fig1()).unwrap();
        assert_relative_eq!(d1.kappa, 0.0616719, max_relative = 1e-5);
        assert_relative_eq!(d1.g0, 3.998901, max_relative = 1e-5);
        assert_relative_eq!(d1.beta2, 0.999775, max_relative = 1e-5);
        let d2 = derive_parameters(&fig2()).unwrap();
        assert_relative_eq!(d2.kappa, 1.624930, max_relative = 1e-5);
        assert_relative_eq!(d2.g0, 5.779127, max_relative = 1e-5);
        assert_relative_eq!(d2.gamma_par, 4.294454, max_relative = 1e-5);
    }

    #[test]
    fn isotropic_collapse() {
        let dp = derive_parameters(&TrapParams::from_omega_nu(0.8, 0.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(dp.kappa1, 0.6, epsilon = 1e-14);
        assert_relative_eq!(dp.beta2, 1.0, epsilon = 1e-14);
        assert_relative_eq!(dp.gamma_par, 4.0, epsilon = 1e-14);
        assert_relative_eq!(dp.beta1, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn poisson_brackets_of_normal_forms() {
        let dp = derive_parameters(&fig2()).unwrap();
        let sq = normal_form_squares(&dp);
        let (eta1, y1, y2, eta2) = (&sq[0].1, &sq[1].1, &sq[2].1, &sq[3].1);
        let w = dp.trap.omega;
        assert_relative_eq!(poisson_bracket(eta1, y1), dp.alpha / w, epsilon = 1e-12);
        assert_relative_eq!(poisson_bracket(eta2, y2), dp.alpha / w, epsilon = 1e-12);
        assert!(poisson_bracket(eta1, eta2).abs() < 1e-12);
        assert!(poisson_bracket(eta1, y2).abs() < 1e-12);
        assert!(poisson_bracket(eta2, y1).abs() < 1e-12);
        assert!(poisson_bracket(y1, y2).abs() < 1e-12);
        // Rows of chi^-1 are canonical: {eta_j, y_k} = delta_jk.
        let m = build_reduction_map(&dp).unwrap();
        let r = |i: usize| m.chi_inv.row(i).transpose();
        assert_relative_eq!(poisson_bracket(&r(2), &r(0)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(poisson_bracket(&r(3), &r(1)), 1.0, epsilon = 1e-12);
        assert!(poisson_bracket(&r(2), &r(1)).abs() < 1e-12);
        assert!(poisson_bracket(&r(0), &r(1)).abs() < 1e-12);
    }

    fn feasible() -> impl Strategy<Value = TrapParams> {
        (0.1f64..0.999, 0.0f64..0.9, 0.0f64..1.0).prop_filter_map("infeasible", |(w, n, t)| {
            let room = 1.0 - w * w - n * n;
            if room <= 1e-6 {
                return None;
            }
            // spread eps over its range so small values get exercised
            let eps = (room * (0.01 + 0.99 * t)).sqrt();
            let nu = (1.0 - w * w - eps * eps).sqrt();
            TrapParams::from_nu_eps(nu, eps, 1.0).ok()
        })
    }

    proptest! {
        #[test]
        fn derived_invariants(p in feasible()) {
            let dp = derive_parameters(&p).unwrap();
            let (w, n, e) = (p.omega, p.nu, p.eps);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            prop_assert!(rel(dp.mu1.powi(2) * dp.mu2.powi(2), 2.0*n*n*e*e + e.powi(4)) < 1e-12);
            prop_assert!((dp.lambda1.powi(2) + dp.lambda2.powi(2) - 1.0 - n*n/dp.alpha).abs() < 1e-12);
            prop_assert!(rel(dp.c * dp.d, (dp.alpha + n*n) / (2.0*w)) < 1e-12);
            prop_assert!(dp.kappa1.powi(2) >= (2.0*n*n + e*e) * (1.0 - 1e-12));
            prop_assert!(dp.mu2.powi(2) >= 1.0 && dp.mu2.powi(2) <= 4.0);
        }

        #[test]
        fn reduction_map_residuals(p in feasible(), xs in prop::array::uniform4(-3.0f64..3.0)) {
            let dp = derive_parameters(&p).unwrap();
            let m = build_reduction_map(&dp).unwrap();
            let q = build_trap_quadratic_form(&p);
            prop_assert!(m.symplectic_residual() < 1e-10);
            prop_assert!(m.inverse_residual() < 1e-10);
            prop_assert!(m.factorization_residual() < 1e-10);
            prop_assert!(m.diagonalization_residual(&q, dp.mu1, dp.mu2) < 1e-10);
            let x = Vector2::new(xs[0], xs[1]);
            let eta = Vector2::new(xs[2], xs[3]);
            prop_assert!(m.generating_function_residual(&x, &eta) < 1e-10);
            let pt = Vector4::new(xs[0], xs[1], xs[2], xs[3]);
            let qv = q.value(&pt);
            prop_assert!((normal_form_value(&dp, &pt) - qv).abs() <= 1e-10 * qv.abs().max(1e-300));
        }

        #[test]
        fn closed_form_matches_eigensolver(p in feasible()) {
            let q = build_trap_quadratic_form(&p);
            let (m1, m2) = trap_frequencies(p.omega, p.nu, p.eps);
            let (n1, n2) = frequencies_by_eigensolver(&q).unwrap();
            prop_assert!((m1 - n1).abs() < 1e-10, "{m1} {n1}");
            prop_assert!((m2 - n2).abs() < 1e-10);
        }
    }
}
