//! Numerical Wiener amalgam norms of sampled fields and two-level time norms of scalar series.
//!
//! The local profile `y ↦ ‖f·T_y g‖_B` is evaluated on the sampling lattice
//! itself and measured globally with Riemann weights, so every discrete
//! quantity converges to its continuum counterpart.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::oracle::{exact_flq_lr_norm, GaussianState};
use crate::spectral::{convolve, forward_transform, sample, Grid, SampledField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    /// `e^{-π|x/w|²}`
    Gaussian { width: f64 },
    /// Indicator of the cube `|x_i| ≤ ρ`.
    Boxcar { half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub unit_l2: bool,
}

impl WindowSpec {
    /// The unit Gaussian `e^{-π|x|²}`, unnormalized, as used by the closed forms.
    pub const UNIT_GAUSSIAN: WindowSpec = WindowSpec {
        kind: WindowKind::Gaussian { width: 1.0 },
        unit_l2: false,
    };

    pub fn gaussian(width: f64) -> Result<Self> {
        Self::validated(WindowKind::Gaussian { width }, false)
    }

    pub fn boxcar(half_width: f64) -> Result<Self> {
        Self::validated(WindowKind::Boxcar { half_width }, false)
    }

    pub fn normalized(self) -> Self {
        WindowSpec {
            unit_l2: true,
            ..self
        }
    }

    fn validated(kind: WindowKind, unit_l2: bool) -> Result<Self> {
        let size = match kind {
            WindowKind::Gaussian { width } => width,
            WindowKind::Boxcar { half_width } => half_width,
        };
        if size <= 0.0 || !size.is_finite() {
            return Err(Error::Domain(format!(
                "window size must be positive, got {size}"
            )));
        }
        Ok(WindowSpec { kind, unit_l2 })
    }

    /// Unnormalized window value.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            WindowKind::Gaussian { width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-PI * r2 / (width * width)).exp()
            }
            WindowKind::Boxcar { half_width } => {
                if x.iter().all(|v| v.abs() <= half_width * (1.0 + 1e-12)) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius beyond which the window is zero to double precision.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            WindowKind::Gaussian { width } => 4.5 * width,
            WindowKind::Boxcar { half_width } => half_width,
        }
    }

    /// Factor applied to samples: `1/‖g‖` on the given lattice when `unit_l2` is set.
    fn normalization(&self, h: f64, d: usize) -> f64 {
        if !self.unit_l2 {
            return 1.0;
        }
        let m = (self.support_radius() / h).ceil() as i64 + 1;
        let s: f64 = stencil_points(d, m as isize)
            .iter()
            .map(|o| {
                let x: Vec<f64> = o[..d].iter().map(|&k| k as f64 * h).collect();
                self.eval(&x).powi(2)
            })
            .sum();
        1.0 / (s * h.powi(d as i32)).sqrt()
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self::UNIT_GAUSSIAN
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum LocalKind {
    Lebesgue(Exponent),
    FourierLebesgue(Exponent),
}

impl LocalKind {
    pub fn exponent(&self) -> Exponent {
        match *self {
            LocalKind::Lebesgue(p) | LocalKind::FourierLebesgue(p) => p,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LocalKind::Lebesgue(_) => "L",
            LocalKind::FourierLebesgue(_) => "FL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmalgamSpec {
    pub local: LocalKind,
    pub global: Exponent,
    pub window: WindowSpec,
}

impl AmalgamSpec {
    pub fn lebesgue(p: Exponent, q: Exponent) -> Self {
        AmalgamSpec {
            local: LocalKind::Lebesgue(p),
            global: q,
            window: WindowSpec::UNIT_GAUSSIAN,
        }
    }

    pub fn fourier_lebesgue(p: Exponent, q: Exponent) -> Self {
        AmalgamSpec {
            local: LocalKind::FourierLebesgue(p),
            global: q,
            window: WindowSpec::UNIT_GAUSSIAN,
        }
    }

    pub fn with_window(self, window: WindowSpec) -> Self {
        AmalgamSpec { window, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedTimeSpec {
    pub inner: Exponent,
    pub outer: Exponent,
    pub window: WindowSpec,
}

impl MixedTimeSpec {
    pub fn new(inner: Exponent, outer: Exponent) -> Self {
        MixedTimeSpec {
            inner,
            outer,
            window: WindowSpec::UNIT_GAUSSIAN,
        }
    }

    pub fn with_window(self, window: WindowSpec) -> Self {
        MixedTimeSpec { window, ..self }
    }
}

fn weighted_lp(values: impl Iterator<Item = f64>, p: Exponent, cell: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        let pv = p.value();
        (values.map(|v| v.powf(pv)).sum::<f64>() * cell).powf(1.0 / pv)
    }
}

/// Zero-padded patch geometry for Fourier–Lebesgue local norms.
struct Patch {
    grid: Grid,
    window: Vec<f64>,
    offsets: Vec<[isize; 3]>,
}

impl Patch {
    fn new(field_grid: &Grid, window: &WindowSpec) -> Result<Self> {
        let h = field_grid.spacing();
        let d = field_grid.dim;
        let radius = window.support_radius();
        if 2.0 * radius > field_grid.extent {
            return Err(Error::Resolution {
                reason: format!("window support {radius} does not fit inside the grid"),
                suggested_extent: Some(4.0 * radius),
            });
        }
        let span = (2.0 * radius / h).ceil() as usize + 1;
        // factor 4 padding keeps frequency spacing well below the local bandwidth scale
        let m = (4 * span).next_power_of_two().max(16);
        let grid = Grid::new(d, m as f64 * h, m)?;
        let norm = window.normalization(h, d);
        let n = field_grid.points as isize;
        let mut window_vals = Vec::with_capacity(grid.len());
        let mut offsets = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let idx = grid.multi_index(i);
            let mut off = [0isize; 3];
            let mut inside = true;
            for a in 0..d {
                off[a] = idx[a] as isize - (m / 2) as isize;
                if off[a].abs() * 2 >= n {
                    inside = false;
                }
            }
            let x = grid.point(i);
            window_vals.push(if inside {
                window.eval(&x[..d]) * norm
            } else {
                0.0
            });
            offsets.push(off);
        }
        Ok(Patch {
            grid,
            window: window_vals,
            offsets,
        })
    }

    fn local_fl(&self, f: &SampledField, y: &[usize; 3], p: Exponent) -> f64 {
        let g = f.grid();
        let n = g.points as isize;
        let d = g.dim;
        let vals = f.values();
        let patch: Vec<Complex64> = self
            .offsets
            .iter()
            .zip(&self.window)
            .map(|(off, &w)| {
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let src = (0..d).fold(0usize, |acc, a| {
                    acc * g.points + (y[a] as isize + off[a]).rem_euclid(n) as usize
                });
                vals[src] * w
            })
            .collect();
        let field = SampledField::new(self.grid, patch).expect("patch shape");
        let spectrum = forward_transform(&field);
        let dxi = (1.0 / self.grid.extent).powi(d as i32);
        weighted_lp(spectrum.values().iter().map(|v| v.norm()), p, dxi)
    }
}

fn window_field(grid: &Grid, window: &WindowSpec) -> SampledField {
    let norm = window.normalization(grid.spacing(), grid.dim);
    SampledField::from_fn(*grid, |x| Complex64::new(window.eval(x) * norm, 0.0))
}

fn lattice_offset(grid: &Grid, y: &[isize]) -> Result<[usize; 3]> {
    if y.len() != grid.dim {
        return Err(Error::DimensionMismatch {
            left: y.len(),
            right: grid.dim,
        });
    }
    let n = grid.points as isize;
    let mut idx = [0usize; 3];
    for a in 0..grid.dim {
        idx[a] = (y[a] + n / 2).rem_euclid(n) as usize;
    }
    Ok(idx)
}

/// `‖f·T_y g‖_B` at the lattice point `y·h` (`y` counted from the origin).
pub fn local_norm(f: &SampledField, spec: &AmalgamSpec, y: &[isize]) -> Result<f64> {
    let grid = f.grid();
    let idx = lattice_offset(grid, y)?;
    match spec.local {
        LocalKind::FourierLebesgue(p) => Ok(Patch::new(grid, &spec.window)?.local_fl(f, &idx, p)),
        LocalKind::Lebesgue(p) => {
            let shift: Vec<isize> = y.to_vec();
            let w = window_field(grid, &spec.window).translate(&shift)?;
            Ok(f.mul(&w)?.lp_norm(p.value()))
        }
    }
}

/// The local profile `y ↦ ‖f·T_y g‖_B` over the full translation lattice.
pub fn local_profile(f: &SampledField, spec: &AmalgamSpec) -> Result<Vec<f64>> {
    let grid = *f.grid();
    if 2.0 * spec.window.support_radius() > grid.extent {
        return Err(Error::Resolution {
            reason: "window support does not fit inside the grid".into(),
            suggested_extent: Some(4.0 * spec.window.support_radius()),
        });
    }
    match spec.local {
        LocalKind::Lebesgue(p) if !p.is_infinite() => {
            // ‖f T_y g‖_p^p = (|f|^p ∗ |g|^p)(y) for the even windows used here
            let pv = p.value();
            let fp = f.map(|v| Complex64::new(v.norm().powf(pv), 0.0));
            let gp = window_field(&grid, &spec.window).map(|v| Complex64::new(v.re.powf(pv), 0.0));
            let conv = convolve(&fp, &gp)?;
            Ok(conv
                .values()
                .iter()
                .map(|v| v.re.max(0.0).powf(1.0 / pv))
                .collect())
        }
        LocalKind::Lebesgue(_) => {
            let radius = spec.window.support_radius();
            let h = grid.spacing();
            let m = (radius / h).ceil() as isize;
            let norm = spec.window.normalization(h, grid.dim);
            let d = grid.dim;
            let n = grid.points as isize;
            let stencil: Vec<([isize; 3], f64)> = stencil_points(d, m)
                .into_iter()
                .map(|o| {
                    let x: Vec<f64> = o[..d].iter().map(|&k| k as f64 * h).collect();
                    (o, spec.window.eval(&x) * norm)
                })
                .filter(|(_, w)| *w > 0.0)
                .collect();
            let vals = f.values();
            Ok((0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let idx = grid.multi_index(i);
                    stencil
                        .iter()
                        .map(|(o, w)| {
                            let src = (0..d).fold(0usize, |acc, a| {
                                acc * grid.points + (idx[a] as isize + o[a]).rem_euclid(n) as usize
                            });
                            vals[src].norm() * w
                        })
                        .fold(0.0, f64::max)
                })
                .collect())
        }
        LocalKind::FourierLebesgue(p) => {
            let patch = Patch::new(&grid, &spec.window)?;
            Ok((0..grid.len())
                .into_par_iter()
                .map(|i| patch.local_fl(f, &grid.multi_index(i), p))
                .collect())
        }
    }
}

fn stencil_points(d: usize, m: isize) -> Vec<[isize; 3]> {
    let r: Vec<isize> = (-m..=m).collect();
    let mut out = Vec::new();
    match d {
        1 => r.iter().for_each(|&a| out.push([a, 0, 0])),
        2 => r
            .iter()
            .for_each(|&a| r.iter().for_each(|&b| out.push([a, b, 0]))),
        _ => r.iter().for_each(|&a| {
            r.iter()
                .for_each(|&b| r.iter().for_each(|&c| out.push([a, b, c])))
        }),
    }
    out
}

/// `‖f‖_{W(B, L^q)}` with Riemann weight `h^d` on the global sum.
pub fn amalgam_norm(f: &SampledField, spec: &AmalgamSpec) -> Result<f64> {
    let profile = local_profile(f, spec)?;
    Ok(weighted_lp(
        profile.into_iter(),
        spec.global,
        f.grid().cell(),
    ))
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::NonUniformGrid(
            "need at least two time samples".into(),
        ));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(Error::NonUniformGrid("times must increase".into()));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::NonUniformGrid(format!(
                "step {} differs from {}",
                w[1] - w[0],
                dt
            )));
        }
    }
    Ok(dt)
}

/// `‖F‖_{W(L^{q1}, L^{q2})_t}` of a nonnegative series on a uniform time grid, zero outside it.
///
/// The translation lattice is the time lattice extended by the window radius on both sides.
pub fn time_mixed_norm(times: &[f64], values: &[f64], spec: &MixedTimeSpec) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            left: times.len(),
            right: values.len(),
        });
    }
    let dt = check_uniform(times)?;
    if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain(
            "time series values must be finite and nonnegative".into(),
        ));
    }
    let m = (spec.window.support_radius() / dt).ceil() as isize;
    let norm = spec.window.normalization(dt, 1);
    let weights: Vec<f64> = (-m..=m)
        .map(|k| spec.window.eval(&[k as f64 * dt]) * norm)
        .collect();
    let n = values.len() as isize;
    let profile: Vec<f64> = (-m..n + m)
        .into_par_iter()
        .map(|k| {
            let terms = (-m..=m).filter_map(|o| {
                let j = k + o;
                (0..n)
                    .contains(&j)
                    .then(|| values[j as usize] * weights[(o + m) as usize])
            });
            weighted_lp(terms, spec.inner, dt)
        })
        .collect();
    Ok(weighted_lp(profile.into_iter(), spec.outer, dt))
}

/// `‖ ‖F(t,·)‖_X ‖_{W(L^{q1},L^{q2})_t}` for a field sampled on a uniform time grid.
pub fn space_time_norm(
    times: &[f64],
    fields: &[SampledField],
    x_spec: &AmalgamSpec,
    t_spec: &MixedTimeSpec,
) -> Result<f64> {
    if times.len() != fields.len() {
        return Err(Error::DimensionMismatch {
            left: times.len(),
            right: fields.len(),
        });
    }
    let xs = fields
        .iter()
        .map(|f| amalgam_norm(f, x_spec))
        .collect::<Result<Vec<_>>>()?;
    time_mixed_norm(times, &xs, t_spec)
}

/// `|⟨F,G⟩_{L²_t L²_x}|` divided by
/// `‖F‖_{W(L^∞,L^q)_t W(L²,L^r)_x} · ‖G‖_{W(L¹,L^{q'})_t W(L²,L^{r'})_x}`.
pub fn holder_pairing_check(
    times: &[f64],
    f: &[SampledField],
    g: &[SampledField],
    q: Exponent,
    r: Exponent,
) -> Result<f64> {
    if f.len() != g.len() || f.len() != times.len() {
        return Err(Error::DimensionMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    let dt = check_uniform(times)?;
    let mut pairing = Complex64::new(0.0, 0.0);
    for (a, b) in f.iter().zip(g) {
        pairing += a.inner(b)?;
    }
    let pairing = pairing.norm() * dt;
    let fx = AmalgamSpec::lebesgue(Exponent::TWO, r);
    let gx = AmalgamSpec::lebesgue(Exponent::TWO, r.conjugate());
    let nf = space_time_norm(times, f, &fx, &MixedTimeSpec::new(Exponent::INFINITY, q))?;
    let ng = space_time_norm(
        times,
        g,
        &gx,
        &MixedTimeSpec::new(Exponent::ONE, q.conjugate()),
    )?;
    if nf == 0.0 || ng == 0.0 {
        return Ok(0.0);
    }
    Ok(pairing / (nf * ng))
}

/// One row of the norm-evaluation export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub field_id: String,
    pub local_kind: String,
    pub p: f64,
    pub q: f64,
    pub window: String,
    pub value: f64,
    pub grid_n: usize,
    pub grid_l: f64,
}

impl NormRow {
    pub fn new(
        field_id: impl Into<String>,
        f: &SampledField,
        spec: &AmalgamSpec,
        value: f64,
    ) -> Self {
        let window = match spec.window.kind {
            WindowKind::Gaussian { width } => format!("gaussian:{width}"),
            WindowKind::Boxcar { half_width } => format!("boxcar:{half_width}"),
        };
        NormRow {
            field_id: field_id.into(),
            local_kind: spec.local.label().to_string(),
            p: spec.local.exponent().value(),
            q: spec.global.value(),
            window,
            value,
            grid_n: f.grid().points,
            grid_l: f.grid().extent,
        }
    }
}

/// A grid on which both the state and its windowed spectra are resolved to double precision.
///
/// The extent covers the state's decay radius plus two window radii on each side; the
/// spacing resolves the largest local frequency `|Im c|·x` plus the spectral radius of the
/// windowed product.
pub fn resolve_grid(state: &GaussianState, window: &WindowSpec) -> Result<Grid> {
    if state.c.re <= 0.0 {
        return Err(Error::Domain("only decaying states can be resolved".into()));
    }
    const LOG_EPS: f64 = 36.8;
    let radius = (LOG_EPS / (PI * state.c.re)).sqrt();
    let wr = window.support_radius();
    let extent = 2.0 * (radius + 2.2 * wr);
    let w2 = match window.kind {
        WindowKind::Gaussian { width } => 1.0 / (width * width),
        // a boxcar has no spectral decay; budget as for a unit Gaussian
        WindowKind::Boxcar { .. } => 1.0,
    };
    let c1 = state.c + w2;
    let spread = (LOG_EPS * c1.norm_sqr() / (PI * c1.re)).sqrt();
    let band = state.c.im.abs() * (radius + wr) + spread;
    let points = ((2.0 * extent * band).ceil() as usize)
        .next_power_of_two()
        .max(64);
    Grid::new(state.dim, extent, points)
}

/// Numeric versus closed-form `W(FL^q, L^r)` norm of `f_{a+ib}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub a: f64,
    pub b: f64,
    pub q: Exponent,
    pub r: Exponent,
    pub exact: f64,
    pub numeric: f64,
    pub rel_err: f64,
    pub grid_n: usize,
    pub grid_l: f64,
}

/// Compares every `(q, r)` pair for one `f_{a+ib}`; the local profile is shared across `r`.
pub fn compare_flq_lr(
    a: f64,
    b: f64,
    qs: &[Exponent],
    rs: &[Exponent],
    d: usize,
) -> Result<Vec<OracleComparison>> {
    let state = GaussianState::f_ab(a, b, d)?;
    let grid = resolve_grid(&state, &WindowSpec::UNIT_GAUSSIAN)?;
    let field = sample(&state, &grid)?;
    let mut out = Vec::with_capacity(qs.len() * rs.len());
    for &q in qs {
        let profile = local_profile(&field, &AmalgamSpec::fourier_lebesgue(q, Exponent::ONE))?;
        for &r in rs {
            let numeric = weighted_lp(profile.iter().copied(), r, grid.cell());
            let exact = exact_flq_lr_norm(a, b, q, r, d)?;
            out.push(OracleComparison {
                a,
                b,
                q,
                r,
                exact,
                numeric,
                rel_err: (numeric - exact).abs() / exact,
                grid_n: grid.points,
                grid_l: grid.extent,
            });
        }
    }
    Ok(out)
}

/// `‖f∗u‖_{W(FL^p,L^q)} / (‖f‖_{W(FL^∞,L^1)}·‖u‖_{W(FL^p,L^q)})`.
pub fn convolution_check(
    f: &SampledField,
    u: &SampledField,
    p: Exponent,
    q: Exponent,
) -> Result<f64> {
    let spec = AmalgamSpec::fourier_lebesgue(p, q);
    let num = amalgam_norm(&convolve(f, u)?, &spec)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let nf = amalgam_norm(
        f,
        &AmalgamSpec::fourier_lebesgue(Exponent::INFINITY, Exponent::ONE),
    )?;
    Ok(num / (nf * amalgam_norm(u, &spec)?))
}
