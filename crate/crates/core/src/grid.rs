//! Rectangular sampling grids and complex fields living on them.
//!
//! Samples sit at cell midpoints, `x = x_min + (i + 1/2) h`, so the plain sum
//! times the cell area is the midpoint rule.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2 {
    pub x1_min: f64,
    pub x1_max: f64,
    pub n1: usize,
    pub x2_min: f64,
    pub x2_max: f64,
    pub n2: usize,
}

impl Grid2 {
    pub fn new(x1_min: f64, x1_max: f64, n1: usize, x2_min: f64, x2_max: f64, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::Grid(format!("grid {n1}x{n2} is too small")));
        }
        if !(x1_max > x1_min && x2_max > x2_min) {
            return Err(Error::Grid("empty grid extent".into()));
        }
        Ok(Self { x1_min, x1_max, n1, x2_min, x2_max, n2 })
    }

    /// `[-l1, l1] x [-l2, l2]`.
    pub fn centered(l1: f64, n1: usize, l2: f64, n2: usize) -> Result<Self> {
        Self::new(-l1, l1, n1, -l2, l2, n2)
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::centered(half_width, n, half_width, n)
    }

    pub fn h1(&self) -> f64 {
        (self.x1_max - self.x1_min) / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        (self.x2_max - self.x2_min) / self.n2 as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.x1_min + (i as f64 + 0.5) * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.x2_min + (j as f64 + 0.5) * self.h2()
    }

    /// Coordinates of the flat index `i * n2 + j`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.x1(idx / self.n2), self.x2(idx % self.n2))
    }

    /// Same samples, coordinates multiplied by `(s1, s2)`.
    pub fn dilated(&self, s1: f64, s2: f64) -> Self {
        Self {
            x1_min: s1 * self.x1_min,
            x1_max: s1 * self.x1_max,
            n1: self.n1,
            x2_min: s2 * self.x2_min,
            x2_max: s2 * self.x2_max,
            n2: self.n2,
        }
    }

    /// Both sizes are powers of two and at least 8.
    pub fn check_fft_ready(&self) -> Result<()> {
        for n in [self.n1, self.n2] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::Grid(format!(
                    "size {n} must be a power of two >= 8 for the transform"
                )));
            }
        }
        Ok(())
    }

    /// Signed DFT frequency of index `k` along an axis of `n` samples and length `len`.
    pub fn frequency(k: usize, n: usize, len: f64) -> f64 {
        let k = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        k / len
    }
}

/// Complex samples on a [`Grid2`], stored with x2 as the fast index.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid2,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid2) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n2 + j]
    }

    /// `<self, other> = sum self * conj(other) dA`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        s * self.grid.cell_area()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Integral of `w(x) |u|^2`.
    pub fn weighted_norm_sq(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let (x1, x2) = self.grid.point(idx);
                w(x1, x2) * v.norm_sqr()
            })
            .sum();
        s * self.grid.cell_area()
    }

    /// Integral of `|u|^4`.
    pub fn quartic(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * self.grid.cell_area()
    }

    pub fn scale(&mut self, s: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
        self
    }

    /// Pointwise product with a function of position.
    pub fn multiply_by(&self, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let (x1, x2) = self.grid.point(idx);
                v * f(x1, x2)
            })
            .collect();
        Self { grid: self.grid, values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self { grid: self.grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring of samples.
    pub fn boundary_max_abs(&self) -> f64 {
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        let mut m: f64 = 0.0;
        for i in 0..n1 {
            m = m.max(self.at(i, 0).norm()).max(self.at(i, n2 - 1).norm());
        }
        for j in 0..n2 {
            m = m.max(self.at(0, j).norm()).max(self.at(n1 - 1, j).norm());
        }
        m
    }

    /// 4th-order central difference of `du/dx_axis` (axis 0 is x1); samples
    /// outside the grid are taken as zero.
    pub fn derivative_fd(&self, axis: usize) -> Self {
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        let h = if axis == 0 { self.grid.h1() } else { self.grid.h2() };
        let get = |i: isize, j: isize| -> Complex64 {
            if i < 0 || j < 0 || i >= n1 as isize || j >= n2 as isize {
                Complex64::new(0.0, 0.0)
            } else {
                self.values[i as usize * n2 + j as usize]
            }
        };
        let (di, dj) = if axis == 0 { (1, 0) } else { (0, 1) };
        let mut out = Self::zeros(self.grid);
        for i in 0..n1 as isize {
            for j in 0..n2 as isize {
                let f = |s: isize| get(i + s * di, j + s * dj);
                out.values[i as usize * n2 + j as usize] =
                    (-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h);
            }
        }
        out
    }

    /// `D u = (2 i pi)^{-1} du/dx_axis` by 4th-order differences.
    pub fn d_operator_fd(&self, axis: usize) -> Self {
        let mut out = self.derivative_fd(axis);
        out.scale(Complex64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI)));
        out
    }

    /// `D u` by spectral differentiation: multiplication by the frequency.
    pub fn d_operator_spectral(&self, axis: usize) -> Self {
        let g = self.grid;
        let (len1, len2) = (g.x1_max - g.x1_min, g.x2_max - g.x2_min);
        let mut data = self.values.clone();
        fft2(&mut data, g.n1, g.n2, false);
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                let xi = if axis == 0 {
                    Grid2::frequency(i, g.n1, len1)
                } else {
                    Grid2::frequency(j, g.n2, len2)
                };
                // The Nyquist mode has no consistent sign; drop it.
                let nyq = if axis == 0 { i == g.n1 / 2 } else { j == g.n2 / 2 };
                data[i * g.n2 + j] *= if nyq { 0.0 } else { xi };
            }
        }
        fft2(&mut data, g.n1, g.n2, true);
        Self { grid: g, values: data }
    }

    /// Keys cubic-convolution interpolation onto `target`; zero outside the source.
    pub fn resample_bicubic(&self, target: &Grid2) -> Self {
        let g = self.grid;
        let (h1, h2) = (g.h1(), g.h2());
        let get = |i: isize, j: isize| -> Complex64 {
            if i < 0 || j < 0 || i >= g.n1 as isize || j >= g.n2 as isize {
                Complex64::new(0.0, 0.0)
            } else {
                self.values[i as usize * g.n2 + j as usize]
            }
        };
        Self::from_fn(*target, |x1, x2| {
            let s1 = (x1 - g.x1_min) / h1 - 0.5;
            let s2 = (x2 - g.x2_min) / h2 - 0.5;
            if s1 < -1.0 || s2 < -1.0 || s1 > g.n1 as f64 || s2 > g.n2 as f64 {
                return Complex64::new(0.0, 0.0);
            }
            let (i0, j0) = (s1.floor() as isize, s2.floor() as isize);
            let (t1, t2) = (s1 - i0 as f64, s2 - j0 as f64);
            let w1 = keys_weights(t1);
            let w2 = keys_weights(t2);
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, wa) in w1.iter().enumerate() {
                for (b, wb) in w2.iter().enumerate() {
                    acc += get(i0 - 1 + a as isize, j0 - 1 + b as isize) * (wa * wb);
                }
            }
            acc
        })
    }

    /// Band-limited refinement by zero padding the spectrum, `factor` a power of two.
    pub fn oversample_spectral(&self, factor: usize) -> Result<Self> {
        let g = self.grid;
        g.check_fft_ready()?;
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::Grid(format!("oversampling factor {factor} must be a power of two")));
        }
        let (m1, m2) = (g.n1 * factor, g.n2 * factor);
        let mut data = self.values.clone();
        fft2(&mut data, g.n1, g.n2, false);
        let mut big = vec![Complex64::new(0.0, 0.0); m1 * m2];
        let map = |k: usize, n: usize, m: usize| if k < n / 2 { k } else { m - (n - k) };
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                let (fi, fj) = (Grid2::frequency(i, g.n1, 1.0), Grid2::frequency(j, g.n2, 1.0));
                // Move from the coarse midpoints to the fine ones.
                let ph1 = phase_shift(fi, g.n1, factor);
                let ph2 = phase_shift(fj, g.n2, factor);
                big[map(i, g.n1, m1) * m2 + map(j, g.n2, m2)] = data[i * g.n2 + j] * ph1 * ph2;
            }
        }
        fft2(&mut big, m1, m2, true);
        let grid = Grid2 { n1: m1, n2: m2, ..g };
        let s = Complex64::new((factor * factor) as f64, 0.0);
        Ok(Self { grid, values: big.into_iter().map(|v| v * s).collect() })
    }
}

/// Phase taking a mode of integer frequency `k` (cycles per grid length) from
/// sample offset `h/2` to `h/(2 factor)`.
fn phase_shift(k: f64, n: usize, factor: usize) -> Complex64 {
    let dx = 0.5 / factor as f64 - 0.5; // in units of the coarse spacing
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k * dx / n as f64)
}

fn keys_weights(t: f64) -> [f64; 4] {
    let a = -0.5;
    let k = |x: f64| {
        let x = x.abs();
        if x <= 1.0 {
            (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0
        } else if x < 2.0 {
            a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a
        } else {
            0.0
        }
    };
    [k(1.0 + t), k(t), k(1.0 - t), k(2.0 - t)]
}

/// In-place unnormalized 2D DFT (forward `e^{-2 i pi}`), or its normalized inverse.
pub fn fft2(data: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (f1, f2) = if inverse {
        (planner.plan_fft_inverse(n1), planner.plan_fft_inverse(n2))
    } else {
        (planner.plan_fft_forward(n1), planner.plan_fft_forward(n2))
    };
    for row in data.chunks_exact_mut(n2) {
        f2.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            col[i] = data[i * n2 + j];
        }
        f1.process(&mut col);
        for i in 0..n1 {
            data[i * n2 + j] = col[i];
        }
    }
    if inverse {
        let s = 1.0 / (n1 * n2) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}
