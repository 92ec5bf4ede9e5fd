//! Vortex detection and lattice statistics.
//!
//! Zeros are found as plaquettes with nonzero phase winding, then polished by
//! Newton's method on the entire factor `f` of `u = f(z) e^{-pi|z|^2/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::energy::ThomasFermi;
use crate::error::{Error, Result};
use crate::fock::{eval_with_derivative, synthesize, FockCoefficients};
use crate::grid::Grid2;

/// Plaquettes with a corner below this fraction of `max |u|` are skipped.
pub const ZERO_FLOOR: f64 = 1e-6;

/// Zeros inside the Thomas-Fermi ellipse shrunk by this factor are bulk zeros.
pub const BULK_MARGIN: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub x1: f64,
    pub x2: f64,
    pub winding: i64,
    pub bulk: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VortexSet {
    pub zeros: Vec<Zero>,
    /// Set when nonzero-winding plaquettes touched each other, i.e. the grid
    /// may not separate nearby zeros.
    pub merged: bool,
}

impl VortexSet {
    pub fn bulk(&self) -> impl Iterator<Item = &Zero> {
        self.zeros.iter().filter(|z| z.bulk)
    }

    pub fn bulk_count(&self) -> usize {
        self.bulk().count()
    }
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Newton on `f / f'` from the plaquette center. `None` unless the iteration
/// converges within `reach` of the seed: aliased phase on a coarse grid
/// produces windings with no zero behind them, and those fail here.
fn newton(c: &FockCoefficients, seed: Complex64, reach: f64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..40 {
        let (u, du) = eval_with_derivative(c, z.re, z.im);
        if du.norm() == 0.0 {
            return None;
        }
        let dz = u / du;
        z -= dz;
        if (z - seed).norm() > reach {
            return None;
        }
        if dz.norm() < 1e-12 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    None
}

/// Zeros of the field `sum c_k phi_k` sampled on `grid`. With a Thomas-Fermi
/// profile, zeros inside its ellipse scaled by `margin` are tagged bulk;
/// without one every zero is bulk.
pub fn detect_vortices(c: &FockCoefficients, grid: &Grid2, tf: Option<&ThomasFermi>, margin: f64) -> VortexSet {
    let u = synthesize(c, grid);
    let floor = ZERO_FLOOR * u.max_abs();
    let (n1, n2) = (grid.n1, grid.n2);
    let mut wind = vec![0i64; (n1 - 1) * (n2 - 1)];
    for i in 0..n1 - 1 {
        for j in 0..n2 - 1 {
            let corners = [u.at(i, j), u.at(i + 1, j), u.at(i + 1, j + 1), u.at(i, j + 1)];
            if corners.iter().any(|v| v.norm() <= floor) {
                continue;
            }
            let total: f64 = (0..4).map(|k| wrap((corners[(k + 1) % 4] / corners[k]).arg())).sum();
            wind[i * (n2 - 1) + j] = (total / (2.0 * PI)).round() as i64;
        }
    }
    let mut merged = false;
    let mut zeros: Vec<Zero> = Vec::new();
    let mut cells: Vec<(usize, usize)> = Vec::new();
    let (h1, h2) = (grid.h1(), grid.h2());
    for i in 0..n1 - 1 {
        for j in 0..n2 - 1 {
            let w = wind[i * (n2 - 1) + j];
            if w == 0 {
                continue;
            }
            let seed = Complex64::new(0.5 * (grid.x1(i) + grid.x1(i + 1)), 0.5 * (grid.x2(j) + grid.x2(j + 1)));
            let Some(z) = newton(c, seed, h1.hypot(h2)) else {
                continue;
            };
            if cells.iter().any(|&(a, b)| a.abs_diff(i) <= 1 && b.abs_diff(j) <= 1) {
                merged = true;
            }
            if zeros.iter().any(|o| (Complex64::new(o.x1, o.x2) - z).norm() < 0.25 * h1.min(h2)) {
                continue;
            }
            cells.push((i, j));
            let bulk = tf.is_none_or(|t| t.contains(z.re, z.im, margin));
            zeros.push(Zero { x1: z.re, x2: z.im, winding: w, bulk });
        }
    }
    VortexSet { zeros, merged }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeStats {
    pub count: usize,
    pub nn_mean: f64,
    /// Coefficient of variation of nearest-neighbor distances.
    pub nn_cv: f64,
    /// Mean over interior sites of `|psi6|`.
    pub six_fold_order: f64,
    /// `|mean psi6|` over interior sites, sensitive to a global orientation.
    pub global_order: f64,
    pub interior_sites: usize,
}

/// Triangles of the Delaunay triangulation (Bowyer-Watson), plus the flag of
/// sites that touched the enclosing super triangle (the hull).
pub fn delaunay(pts: &[(f64, f64)]) -> (Vec<[usize; 3]>, Vec<bool>) {
    let n = pts.len();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &(x, y) in pts {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-12);
    let mid = (0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
    let mut v: Vec<(f64, f64)> = pts.to_vec();
    v.push((mid.0 - 20.0 * span, mid.1 - span));
    v.push((mid.0, mid.1 + 20.0 * span));
    v.push((mid.0 + 20.0 * span, mid.1 - span));
    let circ = |t: &[usize; 3], v: &[(f64, f64)]| {
        let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
        let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
        let (a2, b2, c2) = (a.0 * a.0 + a.1 * a.1, b.0 * b.0 + b.1 * b.1, c.0 * c.0 + c.1 * c.1);
        let ux = (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d;
        let uy = (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d;
        (ux, uy, (a.0 - ux).powi(2) + (a.1 - uy).powi(2))
    };
    let mut tris: Vec<([usize; 3], (f64, f64, f64))> = vec![([n, n + 1, n + 2], circ(&[n, n + 1, n + 2], &v))];
    for p in 0..n {
        let (x, y) = v[p];
        let (bad, keep): (Vec<_>, Vec<_>) = tris
            .into_iter()
            .partition(|(_, (cx, cy, r2))| (x - cx).powi(2) + (y - cy).powi(2) < r2 * (1.0 + 1e-12));
        tris = keep;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (t, _) in &bad {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                if let Some(pos) = edges.iter().position(|&(a, b)| (a, b) == (e.1, e.0) || (a, b) == e) {
                    edges.swap_remove(pos);
                } else {
                    edges.push(e);
                }
            }
        }
        for (a, b) in edges {
            let t = [a, b, p];
            tris.push((t, circ(&t, &v)));
        }
    }
    let mut hull = vec![false; n];
    let mut out = Vec::new();
    for (t, _) in tris {
        if t.iter().any(|&k| k >= n) {
            t.iter().filter(|&&k| k < n).for_each(|&k| hull[k] = true);
        } else {
            out.push(t);
        }
    }
    (out, hull)
}

/// Nearest-neighbor statistics and bond-orientational order of the bulk zeros.
///
/// Bonds are Delaunay edges no longer than 1.3 times the median
/// nearest-neighbor distance; hull sites are left out of the order average.
pub fn lattice_stats(v: &VortexSet) -> Result<LatticeStats> {
    let pts: Vec<(f64, f64)> = v.bulk().map(|z| (z.x1, z.x2)).collect();
    lattice_stats_of_points(&pts)
}

pub fn lattice_stats_of_points(pts: &[(f64, f64)]) -> Result<LatticeStats> {
    let n = pts.len();
    if n < 6 {
        return Err(Error::InsufficientZeros { found: n, needed: 6 });
    }
    let dist = |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
    let nn: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let mean = nn.iter().sum::<f64>() / n as f64;
    let var = nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
    let mut sorted = nn.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[n / 2];
    let (tris, hull) = delaunay(pts);
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in &tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if dist(a, b) <= 1.3 * median && !nbrs[a].contains(&b) {
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
        }
    }
    let psi: Vec<Complex64> = (0..n)
        .filter(|&i| !hull[i] && !nbrs[i].is_empty())
        .map(|i| {
            let s: Complex64 = nbrs[i]
                .iter()
                .map(|&j| Complex64::from_polar(1.0, 6.0 * (pts[j].1 - pts[i].1).atan2(pts[j].0 - pts[i].0)))
                .sum();
            s / nbrs[i].len() as f64
        })
        .collect();
    if psi.is_empty() {
        return Err(Error::InsufficientZeros { found: 0, needed: 1 });
    }
    let m = psi.len() as f64;
    Ok(LatticeStats {
        count: n,
        nn_mean: mean,
        nn_cv: var.sqrt() / mean,
        six_fold_order: psi.iter().map(|p| p.norm()).sum::<f64>() / m,
        global_order: (psi.iter().sum::<Complex64>() / m).norm(),
        interior_sites: psi.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::project_lll;
    use crate::grid::ComplexField;
    use crate::theta::{u_tau_eval, LatticeTau};

    fn lattice(a: Complex64, b: Complex64, r: i32) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for m in -r..=r {
            for n in -r..=r {
                let p = a * m as f64 + b * n as f64;
                if p.norm() <= r as f64 * 0.9 * a.norm() {
                    out.push((p.re, p.im));
                }
            }
        }
        out
    }

    #[test]
    fn single_vortex_at_origin() {
        let c = FockCoefficients::unit(1, 6);
        let v = detect_vortices(&c, &Grid2::square(2.0, 40).unwrap(), None, BULK_MARGIN);
        assert_eq!(v.zeros.len(), 1);
        let z = v.zeros[0];
        assert_eq!(z.winding, 1);
        assert!(z.x1.hypot(z.x2) < 1e-10);
    }

    #[test]
    fn hexagonal_and_square_order() {
        let hex = lattice_stats_of_points(&lattice(Complex64::new(1.0, 0.0), Complex64::new(0.5, 3f64.sqrt() / 2.0), 6)).unwrap();
        assert!(hex.nn_cv < 1e-6);
        assert!((hex.six_fold_order - 1.0).abs() < 1e-9);
        let sq = lattice_stats_of_points(&lattice(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 6)).unwrap();
        assert!(sq.six_fold_order <= 0.1, "{sq:?}");
        assert!(matches!(lattice_stats_of_points(&[(0.0, 0.0); 3]), Err(Error::InsufficientZeros { .. })));
    }

    #[test]
    fn delaunay_counts() {
        let pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.1), (0.5, 0.45)];
        let (t, hull) = delaunay(&pts);
        assert_eq!(t.len(), 4);
        assert_eq!(hull, vec![true, true, true, true, false]);
    }

    #[test]
    fn windowed_lattice_zeros() {
        let tau = LatticeTau::hexagonal();
        let side = tau.cell_side();
        let (flat, r) = (4.0, 6.0);
        let g = Grid2::square(r + 0.5, 260).unwrap();
        let field = ComplexField::from_fn(g, |x1, x2| {
            let s = x1.hypot(x2);
            let w = if s <= flat {
                1.0
            } else if s >= r {
                0.0
            } else {
                0.5 * (1.0 + (PI * (s - flat) / (r - flat)).cos())
            };
            u_tau_eval(x1, x2, &tau) * w
        });
        let c = project_lll(&field, 320).unwrap();
        let v = detect_vortices(&c, &Grid2::square(3.0, 121).unwrap(), None, BULK_MARGIN);
        let mut checked = 0;
        for z in v.zeros.iter().filter(|z| z.x1.hypot(z.x2) < 2.0) {
            let p = Complex64::new(z.x1, z.x2) / side;
            let n = (p.im / tau.tau.im).round();
            let m = (p.re - n * tau.tau.re).round();
            let q = (m + n * tau.tau) * side;
            assert!((q - Complex64::new(z.x1, z.x2)).norm() < 1e-2 * side, "{z:?}");
            checked += 1;
        }
        assert!(checked >= 7, "{checked}");
    }
}
