//! Spectral calculus on a uniform periodic grid standing in for the line.
//!
//! The Fourier transform is unitary, `û(ξ) = (2π)^{-1/2} ∫ u(x) e^{-ixξ} dx`,
//! and discrete integrals are `h Σ`. Spectral coefficients are stored in
//! FFT order: index `m` carries frequency `2πk/L` with `k = m` for
//! `m < N/2` and `k = m − N` otherwise.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Uniform periodic grid on `[−L/2, L/2)` with `N` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
}

/// Complex samples `u(x_j)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Unitary Fourier coefficients `û(ξ_m)` in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap_or_else(|e| e.into_inner());
    if forward {
        p.plan_fft_forward(n)
    } else {
        p.plan_fft_inverse(n)
    }
}

impl Grid {
    /// Validates `L > 0` and `N ≥ 8` a power of two.
    pub fn new(l: f64, n: usize) -> Result<Self, GridError> {
        if !(l.is_finite() && l > 0.0) {
            return Err(GridError::InvalidGrid(format!("length must be positive, got {l}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(GridError::InvalidGrid(format!(
                "point count must be a power of two ≥ 8, got {n}"
            )));
        }
        Ok(Self { l, n })
    }

    /// Domain length `L`.
    pub fn length(&self) -> f64 {
        self.l
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; grids have at least eight points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing `h = L/N`.
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Frequency spacing `Δξ = 2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// Node `x_j = −L/2 + j h`.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.l + j as f64 * self.h()
    }

    /// All nodes.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Signed integer wavenumber `k` of FFT index `m`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Frequency `ξ_m = 2πk/L` of FFT index `m`.
    pub fn freq(&self, m: usize) -> f64 {
        self.wavenumber(m) as f64 * self.dxi()
    }

    /// All frequencies in FFT order.
    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.freq(m)).collect()
    }

    /// FFT index of the Nyquist mode.
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Samples a function of `x`.
    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> GridFunction {
        GridFunction {
            grid: *self,
            values: (0..self.n).map(|j| f(self.x(j))).collect(),
        }
    }

    /// Samples a real function of `x`.
    pub fn sample_real(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        self.sample(|x| Complex64::new(f(x), 0.0))
    }
}

impl Default for Grid {
    /// `L = 64`, `N = 1024`.
    fn default() -> Self {
        Self { l: 64.0, n: 1024 }
    }
}

impl GridFunction {
    /// Wraps samples, checking length and finiteness.
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(GridError::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// The zero function.
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Underlying grid.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Sample values.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Mutable sample values.
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Consumes into sample values.
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Multiplies by a real scalar.
    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Discrete integral `h Σ u_j`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.h()
    }

    /// `∫ |u|² dx`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.h()
    }

    /// `sup |u|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when every sample has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Circular shift by `k` grid points (`k > 0` moves the profile right).
    pub fn roll(&self, k: isize) -> Self {
        let n = self.grid.len() as isize;
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (j, v) in self.values.iter().enumerate() {
            let t = (j as isize + k).rem_euclid(n) as usize;
            values[t] = *v;
        }
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Band-limited translate `u(x − δ)`, with the Nyquist mode dropped.
    pub fn translate(&self, delta: f64) -> Self {
        let mut s = to_spectral(self);
        for m in 0..self.grid.len() {
            let xi = self.grid.freq(m);
            s.coeffs[m] *= Complex64::from_polar(1.0, -xi * delta);
        }
        s.coeffs[self.grid.nyquist()] = Complex64::new(0.0, 0.0);
        to_physical(&s)
    }
}

impl SpectralFunction {
    /// Wraps coefficients in FFT order.
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self, GridError> {
        if coeffs.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Underlying grid.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable coefficients.
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `Σ |û_m|² Δξ`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dxi()
    }
}

/// Unitary discrete Fourier transform.
pub fn to_spectral(f: &GridFunction) -> SpectralFunction {
    let g = f.grid;
    let mut buf = f.values.clone();
    plan(g.len(), true).process(&mut buf);
    let scale = g.h() / (2.0 * PI).sqrt();
    // The grid starts at −L/2, which contributes the phase e^{iπk} = (−1)^m.
    for (m, c) in buf.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { scale } else { -scale };
        *c *= sign;
    }
    SpectralFunction {
        grid: g,
        coeffs: buf,
    }
}

/// Inverse of [`to_spectral`].
pub fn to_physical(s: &SpectralFunction) -> GridFunction {
    let g = s.grid;
    let mut buf = s.coeffs.clone();
    let scale = (2.0 * PI).sqrt() / g.h() / g.len() as f64;
    for (m, c) in buf.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { scale } else { -scale };
        *c *= sign;
    }
    plan(g.len(), false).process(&mut buf);
    GridFunction {
        grid: g,
        values: buf,
    }
}

/// `(iξ)^order` with the Nyquist mode zeroed for `order ≥ 1`.
pub fn derivative_symbol(grid: &Grid, m: usize, order: u32) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if m == grid.nyquist() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, grid.freq(m)).powu(order)
}

/// `(d/dx)^order f` by multiplication with `(iξ)^order`.
///
/// Accuracy is documented for `order ≤ 8`.
pub fn spectral_derivative(f: &GridFunction, order: u32) -> GridFunction {
    if order == 0 {
        return f.clone();
    }
    let mut s = to_spectral(f);
    for m in 0..f.grid.len() {
        s.coeffs[m] *= derivative_symbol(&f.grid, m, order);
    }
    to_physical(&s)
}

/// `∫ (1+ξ²)^s |û(ξ)|² dξ` as a sum over grid frequencies.
pub fn sobolev_norm_sq(f: &GridFunction, s: f64) -> f64 {
    let sp = to_spectral(f);
    sobolev_norm_sq_spectral(&sp, s)
}

/// As [`sobolev_norm_sq`] on precomputed coefficients.
pub fn sobolev_norm_sq_spectral(sp: &SpectralFunction, s: f64) -> f64 {
    let g = sp.grid;
    (0..g.len())
        .map(|m| {
            let xi = g.freq(m);
            (1.0 + xi * xi).powf(s) * sp.coeffs[m].norm_sqr()
        })
        .sum::<f64>()
        * g.dxi()
}

/// Littlewood–Paley block of a frequency: `None` for `|ξ| < 1`, otherwise
/// `Some(j)` with `2^j ≤ |ξ| < 2^{j+1}`.
pub fn dyadic_block(xi: f64) -> Option<u32> {
    let a = xi.abs();
    if a < 1.0 {
        None
    } else {
        Some(a.log2().floor() as u32)
    }
}

/// Dyadic Besov proxy `‖P_{<1} f‖ + Σ_{j≥0} 2^{-j/2} ‖P_j f‖_{L²}`.
///
/// The low block `|ξ| < 1` carries weight one; block `j` covers
/// `2^j ≤ |ξ| < 2^{j+1}`.
pub fn besov_smallness(f: &GridFunction) -> f64 {
    let sp = to_spectral(f);
    let g = sp.grid;
    let mut low = 0.0;
    let mut blocks: Vec<f64> = Vec::new();
    for m in 0..g.len() {
        let e = sp.coeffs[m].norm_sqr() * g.dxi();
        match dyadic_block(g.freq(m)) {
            None => low += e,
            Some(j) => {
                let j = j as usize;
                if blocks.len() <= j {
                    blocks.resize(j + 1, 0.0);
                }
                blocks[j] += e;
            }
        }
    }
    low.sqrt()
        + blocks
            .iter()
            .enumerate()
            .map(|(j, e)| 2f64.powf(-(j as f64) / 2.0) * e.sqrt())
            .sum::<f64>()
}

/// On-disk JSON form of a grid function.
#[derive(Serialize, Deserialize)]
struct GridFunctionJson {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl GridFunction {
    /// Serializes to `{"L","N","re","im"}`.
    pub fn to_json(&self) -> String {
        let j = GridFunctionJson {
            l: self.grid.length(),
            n: self.grid.len(),
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        };
        serde_json::to_string(&j).expect("grid function serializes")
    }

    /// Parses `{"L","N","re","im"}`; a missing `im` array is not accepted.
    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let j: GridFunctionJson =
            serde_json::from_str(text).map_err(|e| GridError::Parse(e.to_string()))?;
        let grid = Grid::new(j.l, j.n)?;
        if j.re.len() != j.n || j.im.len() != j.n {
            return Err(GridError::LengthMismatch {
                expected: j.n,
                found: j.re.len().min(j.im.len()),
            });
        }
        let values = j
            .re
            .iter()
            .zip(&j.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        GridFunction::new(grid, values)
    }

    /// Serializes to CSV with header `x,re,im`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "re", "im"]).expect("in-memory write");
        for (j, v) in self.values.iter().enumerate() {
            w.write_record([
                format!("{:.17e}", self.grid.x(j)),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }

    /// Parses CSV with columns `x,re,im`; the grid is inferred from the nodes.
    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| GridError::Parse(e.to_string()))?;
            let get = |i: usize| -> Result<f64, GridError> {
                rec.get(i)
                    .ok_or_else(|| GridError::Parse(format!("missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| GridError::Parse(e.to_string()))
            };
            xs.push(get(0)?);
            values.push(Complex64::new(get(1)?, get(2)?));
        }
        if xs.len() < 2 {
            return Err(GridError::Parse("need at least two rows".into()));
        }
        let n = xs.len();
        let h = xs[1] - xs[0];
        let grid = Grid::new(h * n as f64, n)?;
        if (xs[0] - grid.x(0)).abs() > 1e-9 * grid.length() {
            return Err(GridError::Parse(format!(
                "first node {} does not match −L/2 = {}",
                xs[0],
                grid.x(0)
            )));
        }
        GridFunction::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> GridFunction {
        Grid::default().sample_real(|x| (-x * x).exp())
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(64.0, 1000).is_err());
        assert!(Grid::new(64.0, 4).is_err());
        assert!(Grid::new(-1.0, 16).is_err());
        assert!(Grid::new(64.0, 16).is_ok());
    }

    #[test]
    fn zero_transforms_to_zero() {
        let z = GridFunction::zeros(Grid::default());
        assert!(to_spectral(&z).coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn pure_mode_has_single_coefficient() {
        let g = Grid::new(64.0, 64).unwrap();
        let k = 5;
        let xi = g.freq(k);
        let f = g.sample(|x| Complex64::from_polar(1.0, xi * x));
        let s = to_spectral(&f);
        for (m, c) in s.coeffs().iter().enumerate() {
            if m == k {
                assert!((c.norm() - 64.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let s = to_spectral(&gauss());
        let g = Grid::default();
        for m in 0..g.len() {
            let xi = g.freq(m);
            let exact = (-xi * xi / 4.0).exp() / 2f64.sqrt();
            assert!((s.coeffs()[m] - exact).norm() <= 1e-12, "m={m}");
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let f = Grid::default().sample(|x| Complex64::new((-x * x).exp(), x.sin() / (1.0 + x * x)));
        let back = to_physical(&to_spectral(&f));
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_examples() {
        let g = Grid::default();
        let c = g.sample_real(|_| 3.0);
        assert!(spectral_derivative(&c, 1).sup_norm() < 1e-12);
        let w = 2.0 * PI / g.length();
        let s = g.sample_real(|x| (w * x).sin());
        let d2 = spectral_derivative(&s, 2);
        for j in 0..g.len() {
            let e = (d2.values()[j].re + w * w * (w * g.x(j)).sin()).abs();
            assert!(e < 1e-12, "{e}");
        }
        let d1 = spectral_derivative(&gauss(), 1);
        for j in 0..g.len() {
            let x = g.x(j);
            assert!((d1.values()[j].re + 2.0 * x * (-x * x).exp()).abs() <= 1e-10);
        }
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_norm_sq(&GridFunction::zeros(Grid::default()), 0.7), 0.0);
        let f = gauss();
        let v = sobolev_norm_sq(&f, 0.0);
        assert!((v - (PI / 2.0).sqrt()).abs() < 1e-10);
        assert!((v - f.l2_norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn besov_single_block_and_small_gaussian() {
        let g = Grid::new(2.0 * PI, 64).unwrap();
        // Frequency 5 lies in block j = 2.
        let f = g.sample(|x| Complex64::from_polar(1.0, 5.0 * x));
        let b = besov_smallness(&f);
        assert!((b - 0.5 * f.l2_norm_sq().sqrt()).abs() < 1e-12);
        assert!(besov_smallness(&gauss().scale(0.1)) < 0.2);
        assert_eq!(besov_smallness(&GridFunction::zeros(g)), 0.0);
    }

    #[test]
    fn json_and_csv_roundtrip() {
        let g = Grid::new(16.0, 16).unwrap();
        let f = g.sample(|x| Complex64::new(x, -x * x));
        let j = GridFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(j, f);
        let c = GridFunction::from_csv(&f.to_csv()).unwrap();
        for (a, b) in c.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(c.grid().len(), 16);
        assert!((c.grid().length() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn translate_matches_roll() {
        let f = gauss();
        let h = f.grid().h();
        let a = f.translate(3.0 * h);
        let b = f.roll(3);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
