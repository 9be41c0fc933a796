//! Uniform periodic grids, centered discrete Fourier transforms and the free propagator.
//!
//! The lattice is `x_j = (j - N/2)·h` per axis with `h = L/N`, and the dual
//! lattice is `ξ_k = (k - N/2)/L`. Transforms approximate
//! `f̂(ξ) = ∫ f(x) e^{-2πixξ} dx` by the Riemann sum, so the forward map is
//! `h^d` times a centered DFT and the inverse is `(1/L)^d` times a centered
//! inverse DFT.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{check_dim, GaussianState};

/// Relative tail level below which a sampled Gaussian counts as contained in the box.
pub const TAIL_TOLERANCE: f64 = 1e-14;
/// Relative spectral level required at the Nyquist shell before propagation.
pub const NYQUIST_TOLERANCE: f64 = 1e-10;

/// Parallel sums add fixed-size chunks in order, so results do not depend on the thread count.
const SUM_CHUNK: usize = 4096;

fn ordered_sum<F: Fn(&Complex64) -> f64 + Sync>(values: &[Complex64], f: F) -> f64 {
    values
        .par_chunks(SUM_CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(dim: usize, extent: f64, points: usize) -> Result<Self> {
        check_dim(dim)?;
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid size {points} must be a power of two >= 2"
            )));
        }
        if extent <= 0.0 || !extent.is_finite() {
            return Err(Error::Domain(format!(
                "grid extent {extent} must be positive"
            )));
        }
        Ok(Grid {
            dim,
            extent,
            points,
        })
    }

    /// Desk-scale default: `L = 64, N = 2^14` in one dimension, `L = 32, N = 2^10` in two,
    /// and `L = 16, N = 2^7` in three.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            1 => Grid::new(1, 64.0, 1 << 14),
            2 => Grid::new(2, 32.0, 1 << 10),
            3 => Grid::new(3, 16.0, 1 << 7),
            _ => Err(Error::Domain(format!("dimension {dim} outside 1..=3"))),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `h^d`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency volume element `(1/L)^d`.
    pub fn frequency_cell(&self) -> f64 {
        (1.0 / self.extent).powi(self.dim as i32)
    }

    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.points / 2) as f64) * self.spacing()
    }

    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) / self.extent
    }

    /// Row-major multi-index of a flat index; unused trailing axes are zero.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut xi = [0.0; 3];
        for a in 0..self.dim {
            xi[a] = self.freq(idx[a]);
        }
        xi
    }

    /// Flat index of the lattice point nearest the origin, `x = 0`.
    pub fn origin(&self) -> usize {
        let half = self.points / 2;
        (0..self.dim).fold(0, |acc, _| acc * self.points + half)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// Fails when a Gaussian that has spread to `|x| ≈ 4π|t|·bandwidth` no longer fits in half the box.
    pub fn check_dispersal(&self, bandwidth: f64, t: f64) -> Result<()> {
        let reach = 4.0 * PI * t.abs() * bandwidth;
        if reach >= self.extent / 2.0 {
            return Err(Error::Resolution {
                reason: format!("dispersed width {reach:.3} exceeds half the box at t = {t}"),
                suggested_extent: Some((4.0 * reach).max(2.0 * self.extent)),
            });
        }
        Ok(())
    }
}

/// Complex samples on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("sampled values must be finite".into()));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Evaluates `f` at every lattice point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)[..grid.dim]))
            .collect();
        SampledField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        SampledField {
            grid: self.grid,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    fn zip_with<F: Fn(Complex64, Complex64) -> Complex64 + Sync>(
        &self,
        other: &SampledField,
        f: F,
    ) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .par_iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(SampledField {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &SampledField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &SampledField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Riemann-weighted `L^p` norm; `p = ∞` is the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s = ordered_sum(&self.values, |v| v.norm().powf(p));
        (s * self.grid.cell()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let s = ordered_sum(&self.values, |v| v.norm_sqr());
        (s * self.grid.cell()).sqrt()
    }

    /// `L^p` norm of a spectrum, weighted by the frequency cell `(1/L)^d`.
    pub fn spectral_lp_norm(&self, p: f64) -> f64 {
        let cell = self.grid.cell();
        self.lp_norm(p)
            * if p.is_infinite() {
                1.0
            } else {
                (self.grid.frequency_cell() / cell).powf(1.0 / p)
            }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .par_iter()
            .map(|v| v.norm())
            .reduce(|| 0.0, f64::max)
    }

    /// Riemann-weighted `∫ self · conj(other)`.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let s: Complex64 = self
            .values
            .par_chunks(SUM_CHUNK)
            .zip(other.values.par_chunks(SUM_CHUNK))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x * y.conj())
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        Ok(s * self.grid.cell())
    }

    pub fn max_abs_diff(&self, other: &SampledField) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Periodic translation by whole lattice steps: `(T_s f)(x) = f(x - s·h)`.
    pub fn translate(&self, shift: &[isize]) -> Result<Self> {
        if shift.len() != self.grid.dim {
            return Err(Error::DimensionMismatch {
                left: shift.len(),
                right: self.grid.dim,
            });
        }
        let n = self.grid.points as isize;
        let g = self.grid;
        let values = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let idx = g.multi_index(i);
                let src = (0..g.dim).fold(0usize, |acc, a| {
                    acc * g.points + (idx[a] as isize - shift[a]).rem_euclid(n) as usize
                });
                self.values[src]
            })
            .collect();
        Ok(SampledField { grid: g, values })
    }
}

/// Samples a decaying state on the lattice.
///
/// Fails when the tail at `|x| = L/2` exceeds [`TAIL_TOLERANCE`] of the peak.
pub fn sample(state: &GaussianState, grid: &Grid) -> Result<SampledField> {
    check_state_grid(state, grid)?;
    let re = state.c.re;
    let tail = (-PI * re * (grid.extent / 2.0).powi(2)).exp();
    if tail >= TAIL_TOLERANCE {
        let needed = 2.0 * (-TAIL_TOLERANCE.ln() / (PI * re)).sqrt();
        return Err(Error::Resolution {
            reason: format!("tail {tail:.2e} of peak at the box edge"),
            suggested_extent: Some(needed.ceil()),
        });
    }
    Ok(SampledField::from_fn(*grid, |x| state.evaluate(x)))
}

/// Samples the periodization `Σ_m state(x + mL)` of a decaying state.
///
/// This is the exact continuum counterpart of grid propagation once the
/// state has spread beyond the box.
pub fn sample_periodic(state: &GaussianState, grid: &Grid) -> Result<SampledField> {
    check_state_grid(state, grid)?;
    let re = state.c.re;
    let l = grid.extent;
    // images beyond |x| > reach contribute below e^{-40} relative
    let reach = (40.0 / (PI * re)).sqrt();
    let m_max = (reach / l).ceil() as i64 + 1;
    let d = grid.dim;
    let images: Vec<[f64; 3]> = {
        let range: Vec<i64> = (-m_max..=m_max).collect();
        let mut out = Vec::new();
        let (r1, r2) = match d {
            1 => (vec![0], vec![0]),
            2 => (range.clone(), vec![0]),
            _ => (range.clone(), range.clone()),
        };
        for &a in &range {
            for &b in &r1 {
                for &c in &r2 {
                    out.push([a as f64 * l, b as f64 * l, c as f64 * l]);
                }
            }
        }
        out
    };
    Ok(SampledField::from_fn(*grid, |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut y = [0.0; 3];
        for shift in &images {
            for a in 0..d {
                y[a] = x[a] + shift[a];
            }
            acc += state.evaluate(&y[..d]);
        }
        acc
    }))
}

fn check_state_grid(state: &GaussianState, grid: &Grid) -> Result<()> {
    if state.dim != grid.dim {
        return Err(Error::DimensionMismatch {
            left: state.dim,
            right: grid.dim,
        });
    }
    if state.c.re <= 0.0 {
        return Err(Error::Domain(
            "only decaying states (Re c > 0) can be sampled".into(),
        ));
    }
    Ok(())
}

/// Rotates every axis by `N/2`; its own inverse for even `N`.
fn half_roll(values: &[Complex64], grid: &Grid) -> Vec<Complex64> {
    let n = grid.points;
    let half = n / 2;
    (0..values.len())
        .into_par_iter()
        .map(|i| {
            let idx = grid.multi_index(i);
            let src = (0..grid.dim).fold(0usize, |acc, a| acc * n + (idx[a] + half) % n);
            values[src]
        })
        .collect()
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft(n, direction)
}

/// In-place unnormalized DFT along every axis of a row-major cube.
fn dft_all_axes(values: &mut [Complex64], grid: &Grid, direction: FftDirection) {
    let n = grid.points;
    let fft = plan(n, direction);
    for axis in 0..grid.dim {
        let stride = n.pow((grid.dim - 1 - axis) as u32);
        if stride == 1 {
            values.par_chunks_mut(n).for_each(|line| fft.process(line));
            continue;
        }
        // gather strided lines, transform, scatter back
        let block = stride * n;
        values.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for offset in 0..stride {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = chunk[offset + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    chunk[offset + k * stride] = *v;
                }
            }
        });
    }
}

fn centered_transform(f: &SampledField, direction: FftDirection, weight: f64) -> SampledField {
    let mut values = half_roll(&f.values, &f.grid);
    dft_all_axes(&mut values, &f.grid, direction);
    let mut values = half_roll(&values, &f.grid);
    values.par_iter_mut().for_each(|v| *v *= weight);
    SampledField {
        grid: f.grid,
        values,
    }
}

/// Riemann-sum Fourier transform on the centered frequency lattice.
pub fn forward_transform(f: &SampledField) -> SampledField {
    centered_transform(f, FftDirection::Forward, f.grid.cell())
}

/// Inverse of [`forward_transform`].
pub fn inverse_transform(f: &SampledField) -> SampledField {
    let w = (1.0 / f.grid.extent).powi(f.grid.dim as i32);
    centered_transform(f, FftDirection::Inverse, w)
}

fn check_nyquist(spectrum: &SampledField) -> Result<()> {
    let g = spectrum.grid;
    let peak = spectrum.max_abs();
    if peak == 0.0 {
        return Ok(());
    }
    let shell = (0..g.len())
        .into_par_iter()
        .filter(|&i| g.multi_index(i)[..g.dim].contains(&0))
        .map(|i| spectrum.values[i].norm())
        .reduce(|| 0.0, f64::max);
    if shell > NYQUIST_TOLERANCE * peak {
        return Err(Error::Resolution {
            reason: format!(
                "spectrum at the Nyquist shell is {:.2e} of peak; refine N",
                shell / peak
            ),
            suggested_extent: None,
        });
    }
    Ok(())
}

/// Applies `e^{itΔ}` as the multiplier `e^{-4π²it|ξ|²}`.
pub fn free_propagate(f: &SampledField, t: f64) -> Result<SampledField> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    let spectrum = forward_transform(f);
    check_nyquist(&spectrum)?;
    Ok(inverse_transform(&apply_free_multiplier(spectrum, t)))
}

/// Propagates one field to many times in parallel.
pub fn free_propagate_many(f: &SampledField, times: &[f64]) -> Result<Vec<SampledField>> {
    let spectrum = forward_transform(f);
    check_nyquist(&spectrum)?;
    Ok(times
        .par_iter()
        .map(|&t| inverse_transform(&apply_free_multiplier(spectrum.clone(), t)))
        .collect())
}

pub(crate) fn apply_free_multiplier(mut spectrum: SampledField, t: f64) -> SampledField {
    let g = spectrum.grid;
    spectrum
        .values
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, v)| {
            let xi = g.frequency(i);
            let xi2: f64 = xi[..g.dim].iter().map(|s| s * s).sum();
            *v *= Complex64::from_polar(1.0, -4.0 * PI * PI * t * xi2);
        });
    spectrum
}

/// Periodic convolution with Riemann weight `h^d`.
pub fn convolve(f: &SampledField, g: &SampledField) -> Result<SampledField> {
    f.grid.check_same(&g.grid)?;
    let product = forward_transform(f).mul(&forward_transform(g))?;
    Ok(inverse_transform(&product))
}

/// Writes the binary layout: `dim` (u64), `N` per axis (u64), `L` per axis (f64),
/// then interleaved re/im f64 samples, all little-endian and row-major.
pub fn write_field<W: Write>(f: &SampledField, mut w: W) -> Result<()> {
    let g = f.grid;
    let mut buf = Vec::with_capacity(8 * (1 + 2 * g.dim + 2 * g.len()));
    buf.extend_from_slice(&(g.dim as u64).to_le_bytes());
    for _ in 0..g.dim {
        buf.extend_from_slice(&(g.points as u64).to_le_bytes());
    }
    for _ in 0..g.dim {
        buf.extend_from_slice(&g.extent.to_le_bytes());
    }
    for v in &f.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a field written by [`write_field`]. Grids must be cubic.
pub fn read_field<R: Read>(mut r: R) -> Result<SampledField> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)
            .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        Ok(word)
    };
    let dim = u64::from_le_bytes(next(&mut r)?) as usize;
    check_dim(dim).map_err(|e| Error::Format(e.to_string()))?;
    let mut ns = Vec::with_capacity(dim);
    for _ in 0..dim {
        ns.push(u64::from_le_bytes(next(&mut r)?) as usize);
    }
    let mut ls = Vec::with_capacity(dim);
    for _ in 0..dim {
        ls.push(f64::from_le_bytes(next(&mut r)?));
    }
    if ns.iter().any(|&n| n != ns[0]) || ls.iter().any(|&l| l != ls[0]) {
        return Err(Error::Format("only cubic grids are supported".into()));
    }
    let grid = Grid::new(dim, ls[0], ns[0]).map_err(|e| Error::Format(e.to_string()))?;
    let mut raw = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut raw)
        .map_err(|e| Error::Format(format!("truncated samples: {e}")))?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SampledField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{free_evolve_gaussian, GaussianState};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1, 16.0, 100).is_err());
        assert!(Grid::new(4, 16.0, 64).is_err());
        assert!(Grid::new(1, -1.0, 64).is_err());
        let g = Grid::new(2, 8.0, 16).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.point(g.origin())[..2], [0.0, 0.0]);
        assert_relative_eq!(g.spacing() * 16.0, 8.0);
    }

    #[test]
    fn sample_peak_and_l2() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        let u = GaussianState::unit(1).unwrap().scale(c(0.0, 2.0));
        let f = sample(&u, &g).unwrap();
        assert_eq!(f.values()[g.origin()], c(0.0, 2.0));
        assert_relative_eq!(f.l2_norm(), 2.0 * 2f64.powf(-0.25), max_relative = 1e-13);
    }

    #[test]
    fn sample_rejects_wide_state() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        let u = GaussianState::phi(c(0.01, 0.0), 1).unwrap();
        match sample(&u, &g) {
            Err(Error::Resolution {
                suggested_extent: Some(l),
                ..
            }) => assert!(l > 16.0),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        let f = sample(&GaussianState::unit(1).unwrap(), &g).unwrap();
        let fh = forward_transform(&f);
        assert!(fh.max_abs_diff(&f).unwrap() < 1e-13);
    }

    #[test]
    fn transform_round_trip_and_parseval_2d() {
        let g = Grid::new(2, 12.0, 64).unwrap();
        let u = GaussianState::new(c(1.0, 0.5), c(1.3, 0.7), 2).unwrap();
        let f = sample(&u, &g).unwrap().translate(&[3, -5]).unwrap();
        let fh = forward_transform(&f);
        let back = inverse_transform(&fh);
        assert!(back.max_abs_diff(&f).unwrap() < 1e-12 * f.max_abs());
        assert_relative_eq!(fh.spectral_lp_norm(2.0), f.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn transform_matches_closed_form_3d() {
        let g = Grid::new(3, 10.0, 64).unwrap();
        let u = GaussianState::new(c(1.0, 0.0), c(0.8, 0.4), 3).unwrap();
        let fh = forward_transform(&sample(&u, &g).unwrap());
        let exact = u.fourier().unwrap();
        let err = (0..g.len())
            .map(|i| (fh.values()[i] - exact.evaluate(&g.frequency(i))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn propagate_identity_and_unitarity() {
        let g = Grid::new(1, 32.0, 1024).unwrap();
        let f = sample(&GaussianState::unit(1).unwrap(), &g).unwrap();
        assert_eq!(free_propagate(&f, 0.0).unwrap(), f);
        let v = free_propagate(&f, 0.7).unwrap();
        assert_relative_eq!(v.l2_norm(), f.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn propagate_matches_oracle() {
        let g = Grid::new(1, 64.0, 1 << 12).unwrap();
        let u = GaussianState::unit(1).unwrap();
        let num = free_propagate(&sample(&u, &g).unwrap(), 0.3).unwrap();
        let exact = sample_periodic(&free_evolve_gaussian(&u, 0.3).unwrap(), &g).unwrap();
        assert!(num.max_abs_diff(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn propagate_rejects_unresolved() {
        let g = Grid::new(1, 16.0, 32).unwrap();
        let f = sample(&GaussianState::phi(c(25.0, 0.0), 1).unwrap(), &g).unwrap();
        assert!(matches!(
            free_propagate(&f, 1.0),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn convolve_unit_gaussians() {
        let g = Grid::new(1, 32.0, 1 << 10).unwrap();
        let u = sample(&GaussianState::unit(1).unwrap(), &g).unwrap();
        let w = convolve(&u, &u).unwrap();
        let exact = sample(
            &GaussianState::new(c(2f64.powf(-0.5), 0.0), c(0.5, 0.0), 1).unwrap(),
            &g,
        )
        .unwrap();
        assert!(w.max_abs_diff(&exact).unwrap() < 1e-8 * exact.max_abs());
    }

    #[test]
    fn convolve_commutes_and_concentrated_kernel_is_identity() {
        let g = Grid::new(1, 32.0, 1 << 12).unwrap();
        let u = sample(
            &GaussianState::new(c(1.0, 0.3), c(0.6, 1.1), 1).unwrap(),
            &g,
        )
        .unwrap();
        let v = sample(&GaussianState::unit(1).unwrap(), &g)
            .unwrap()
            .translate(&[7])
            .unwrap();
        let a = convolve(&u, &v).unwrap();
        let b = convolve(&v, &u).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);

        // unit-mass approximate identity with standard deviation ~0.008
        let delta = sample(
            &GaussianState::new(c(50.0, 0.0), c(2500.0, 0.0), 1).unwrap(),
            &g,
        )
        .unwrap();
        let w = convolve(&u, &delta).unwrap();
        assert!(w.max_abs_diff(&u).unwrap() < 1e-3);
    }

    #[test]
    fn convolve_grid_mismatch() {
        let a = SampledField::zeros(Grid::new(1, 8.0, 16).unwrap());
        let b = SampledField::zeros(Grid::new(1, 8.0, 32).unwrap());
        assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(2, 6.0, 8).unwrap();
        let f = SampledField::from_fn(g, |x| c(x[0], x[1] * 2.0));
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 * (1 + 2 + 2) + 16 * 64);
        assert_eq!(&buf[..8], &2u64.to_le_bytes());
        let g2 = read_field(buf.as_slice()).unwrap();
        assert_eq!(f, g2);
        assert!(read_field(&buf[..30]).is_err());
    }

    #[test]
    fn new_rejects_nan() {
        let g = Grid::new(1, 8.0, 4).unwrap();
        assert!(SampledField::new(g, vec![c(f64::NAN, 0.0); 4]).is_err());
        assert!(SampledField::new(g, vec![c(0.0, 0.0); 3]).is_err());
    }
}
