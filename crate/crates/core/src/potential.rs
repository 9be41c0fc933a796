//! Split-step solver for `i∂_t u + Δu = V(t,x)u`, rough potentials, and Duhamel iteration.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::Path;

use crate::amalgam::{amalgam_norm, AmalgamSpec};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::spectral::{
    apply_free_multiplier, forward_transform, inverse_transform, read_field, write_field,
    SampledField,
};

/// Relative spectral level below which a frequency counts as unresolved.
pub const BAND_TOLERANCE: f64 = 1e-10;
/// Largest allowed `dt·4π²|ξ|²` over the resolved band.
pub const MAX_STEP_PHASE: f64 = 0.1;
/// Picard differences below this fraction of `‖u0‖_{L²}` count as converged.
pub const ROUNDING_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// Time exponent `α ∈ [1, ∞)`.
    pub alpha: Exponent,
    /// Space exponent with `d < p ≤ ∞` and `1/α + d/p ≤ 1`.
    pub p: Exponent,
    /// Sobolev order `s > 1/p' - 1/2` of the spatial profile.
    pub sobolev_s: f64,
    pub seed: u64,
    pub real_valued: bool,
    pub amplitude: f64,
}

impl PotentialSpec {
    pub fn new(alpha: Exponent, p: Exponent, sobolev_s: f64, seed: u64) -> Self {
        PotentialSpec {
            alpha,
            p,
            sobolev_s,
            seed,
            real_valued: true,
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        PotentialSpec { amplitude, ..self }
    }

    pub fn complex(self) -> Self {
        PotentialSpec {
            real_valued: false,
            ..self
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let df = d as f64;
        if self.alpha.is_infinite() {
            return Err(Error::Exponent("alpha must be finite".into()));
        }
        if !self.p.is_infinite() && self.p.value() <= df {
            return Err(Error::Exponent(format!(
                "p = {} must exceed d = {d}",
                self.p
            )));
        }
        if self.alpha.recip() + df * self.p.recip() > 1.0 + 1e-12 {
            return Err(Error::Exponent(format!(
                "1/alpha + d/p = {} exceeds 1",
                self.alpha.recip() + df * self.p.recip()
            )));
        }
        let floor = self.p.conjugate().recip() - 0.5;
        if !(self.sobolev_s.is_finite() && self.sobolev_s > floor) {
            return Err(Error::Domain(format!(
                "sobolev_s = {} must exceed 1/p' - 1/2 = {floor}",
                self.sobolev_s
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Domain("amplitude must be finite".into()));
        }
        Ok(())
    }
}

/// `M` uniform steps of size `T/M`; a negative horizon runs backwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if horizon == 0.0 || !horizon.is_finite() || steps == 0 {
            return Err(Error::Domain(format!(
                "time grid needs a nonzero horizon and steps, got T = {horizon}, M = {steps}"
            )));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| m as f64 * self.dt()).collect()
    }

    pub fn reversed(&self) -> Self {
        TimeGrid {
            horizon: -self.horizon,
            ..*self
        }
    }

    /// Requires `|dt|·4π²|ξ|² < 0.1` over the resolved band of `field`.
    pub fn check_resolution(&self, field: &SampledField) -> Result<()> {
        let band = resolved_band(field);
        let phase = self.dt().abs() * 4.0 * PI * PI * band * band;
        if phase >= MAX_STEP_PHASE {
            let needed = (self.horizon.abs() * 4.0 * PI * PI * band * band / MAX_STEP_PHASE).ceil()
                as usize
                + 1;
            return Err(Error::Resolution {
                reason: format!(
                    "step phase {phase:.3} over band {band:.3} is too coarse; use at least {needed} steps"
                ),
                suggested_extent: None,
            });
        }
        Ok(())
    }
}

/// Largest `|ξ|` at which the spectrum exceeds `BAND_TOLERANCE` of its peak.
pub fn resolved_band(field: &SampledField) -> f64 {
    let spectrum = forward_transform(field);
    let g = *spectrum.grid();
    let peak = spectrum.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    spectrum
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > BAND_TOLERANCE * peak)
        .map(|(i, _)| {
            let xi = g.frequency(i);
            xi[..g.dim].iter().map(|s| s * s).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// A potential that is constant in time on each step: `fields[m]` acts on `[t_m, t_{m+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSeries {
    fields: Vec<SampledField>,
}

impl PotentialSeries {
    pub fn new(fields: Vec<SampledField>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::Domain("potential series is empty".into()))?;
        for f in &fields[1..] {
            first.grid().check_same(f.grid())?;
        }
        Ok(PotentialSeries { fields })
    }

    pub fn constant(field: SampledField, tgrid: &TimeGrid) -> Self {
        PotentialSeries {
            fields: vec![field; tgrid.steps],
        }
    }

    /// Samples `v(t, x)` at the midpoint of each step.
    pub fn from_fn<F>(grid: crate::spectral::Grid, tgrid: &TimeGrid, v: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Complex64 + Sync,
    {
        let dt = tgrid.dt();
        let fields = (0..tgrid.steps)
            .map(|m| {
                let t = (m as f64 + 0.5) * dt;
                SampledField::from_fn(grid, |x| v(t, x))
            })
            .collect();
        PotentialSeries { fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[SampledField] {
        &self.fields
    }

    pub fn is_real(&self) -> bool {
        self.fields
            .iter()
            .all(|f| f.values().iter().all(|v| v.im == 0.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        PotentialSeries {
            fields: self
                .fields
                .iter()
                .map(|f| f.scale(Complex64::new(s, 0.0)))
                .collect(),
        }
    }

    /// `V + c` for a constant `c`.
    pub fn shifted(&self, c: Complex64) -> Self {
        PotentialSeries {
            fields: self.fields.iter().map(|f| f.map(|v| v + c)).collect(),
        }
    }

    /// The series read backwards in time.
    pub fn reversed(&self) -> Self {
        PotentialSeries {
            fields: self.fields.iter().rev().cloned().collect(),
        }
    }

    /// `max_m ‖V(t_m)‖_{L^∞}`.
    pub fn sup_norm(&self) -> f64 {
        self.fields
            .iter()
            .map(SampledField::max_abs)
            .fold(0.0, f64::max)
    }
}

/// Fourier-series coefficients for modes `k = -K..=K` of one time step:
/// `|c_k| = (1+|k|)^{-s-1/2}` with phases drawn from the seeded stream `step`.
pub fn rough_coefficients(spec: &PotentialSpec, modes: usize, step: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(step);
    let k_max = modes as isize;
    let size = |k: isize| (1.0 + k.unsigned_abs() as f64).powf(-spec.sobolev_s - 0.5);
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * modes + 1];
    if spec.real_valued {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        c[modes] = Complex64::new(sign * size(0), 0.0);
        for k in 1..=k_max {
            let v = Complex64::from_polar(size(k), rng.gen_range(0.0..2.0 * PI));
            c[(k_max + k) as usize] = v;
            c[(k_max - k) as usize] = v.conj();
        }
    } else {
        for k in -k_max..=k_max {
            c[(k_max + k) as usize] = Complex64::from_polar(size(k), rng.gen_range(0.0..2.0 * PI));
        }
    }
    c
}

/// `(Σ_k (1+|k|)^{2σ}|c_k|²)^{1/2}` for coefficients indexed `k = -K..=K`.
pub fn coefficient_sobolev_norm(coeffs: &[Complex64], sigma: f64) -> f64 {
    let k_max = (coeffs.len() / 2) as isize;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i as isize - k_max).unsigned_abs() as f64;
            (1.0 + k).powf(2.0 * sigma) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Number of Fourier modes used on a grid: a quarter of the points, so that the
/// envelope product stays clear of the Nyquist shell.
pub fn rough_modes(grid: &crate::spectral::Grid) -> usize {
    grid.points / 4
}

/// `Σ_{|k|≤K} c_k e^{2πikx/L}` on a one-dimensional grid, through one inverse transform.
///
/// The grid's frequency lattice is `k/L`, so the coefficients sit exactly on it.
pub fn fourier_series(grid: &crate::spectral::Grid, coeffs: &[Complex64]) -> Result<SampledField> {
    let modes = coeffs.len() / 2;
    if grid.dim != 1 || 2 * modes >= grid.points {
        return Err(Error::Domain(format!(
            "{} modes do not fit a {}-point one-dimensional grid",
            2 * modes + 1,
            grid.points
        )));
    }
    let centre = grid.points / 2;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); grid.points];
    for (i, c) in coeffs.iter().enumerate() {
        spectrum[centre + i - modes] = c * grid.extent;
    }
    Ok(inverse_transform(&SampledField::new(*grid, spectrum)?))
}

/// `V(t_m, x) = A·e^{-π(8x/L)²}·Σ_{|k|≤K} c_k(t_m) e^{2πikx/L}`, redrawn independently on each step.
pub fn make_rough_potential(
    spec: &PotentialSpec,
    grid: &crate::spectral::Grid,
    tgrid: &TimeGrid,
) -> Result<PotentialSeries> {
    if grid.dim != 1 {
        return Err(Error::Domain(
            "rough potentials are built in d = 1; use a smooth potential in higher dimensions"
                .into(),
        ));
    }
    spec.validate(grid.dim)?;
    let modes = rough_modes(grid);
    let width = grid.extent / 8.0;
    let envelope = SampledField::from_fn(*grid, |x| {
        Complex64::new(spec.amplitude * (-PI * (x[0] / width).powi(2)).exp(), 0.0)
    });
    let fields = (0..tgrid.steps)
        .map(|m| {
            let series = fourier_series(grid, &rough_coefficients(spec, modes, m as u64))?;
            let v = series.mul(&envelope)?;
            Ok(if spec.real_valued {
                v.map(|z| Complex64::new(z.re, 0.0))
            } else {
                v
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PotentialSeries::new(fields)
}

fn free_step(f: &SampledField, t: f64) -> SampledField {
    inverse_transform(&apply_free_multiplier(forward_transform(f), t))
}

fn check_series(u0: &SampledField, v: &PotentialSeries, tgrid: &TimeGrid) -> Result<()> {
    u0.grid().check_same(v.fields[0].grid())?;
    if v.len() != tgrid.steps {
        return Err(Error::Domain(format!(
            "potential has {} steps, time grid has {}",
            v.len(),
            tgrid.steps
        )));
    }
    tgrid.check_resolution(u0)
}

/// Strang splitting: half free step, phase `e^{-iV dt}`, half free step.
/// `observe` sees every snapshot `u(t_m)`, `m = 0..=M`.
pub fn split_step_with<F>(
    u0: &SampledField,
    v: &PotentialSeries,
    tgrid: &TimeGrid,
    mut observe: F,
) -> Result<SampledField>
where
    F: FnMut(usize, &SampledField),
{
    check_series(u0, v, tgrid)?;
    let dt = tgrid.dt();
    let mut u = u0.clone();
    observe(0, &u);
    for (m, vm) in v.fields.iter().enumerate() {
        let half = free_step(&u, dt / 2.0);
        let kicked = half.mul(&vm.map(|x| (Complex64::new(0.0, -dt) * x).exp()))?;
        u = free_step(&kicked, dt / 2.0);
        observe(m + 1, &u);
    }
    Ok(u)
}

/// All snapshots `u(t_0), …, u(t_M)` of the split-step solution.
pub fn split_step_evolve(
    u0: &SampledField,
    v: &PotentialSeries,
    tgrid: &TimeGrid,
) -> Result<Vec<SampledField>> {
    let mut out = Vec::with_capacity(tgrid.steps + 1);
    split_step_with(u0, v, tgrid, |_, u| out.push(u.clone()))?;
    Ok(out)
}

/// Result of iterating the Duhamel map.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun {
    /// `max_m ‖Φ^{n+1} - Φ^n‖_{L²}` at each iteration.
    pub differences: Vec<f64>,
    /// Successive quotients of `differences` (0 once the differences vanish).
    pub ratios: Vec<f64>,
    /// The last iterate on the time lattice.
    pub solution: Vec<SampledField>,
}

impl PicardRun {
    /// The largest measured contraction factor.
    pub fn contraction(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// `Φ(w)(t_m) = e^{it_mΔ}u0 - i∫_0^{t_m} e^{i(t_m-s)Δ}V(s)w(s) ds` with the composite
/// trapezoid rule on each step, using the step's own potential at both ends.
fn duhamel_map(
    free: &[SampledField],
    v: &PotentialSeries,
    w: &[SampledField],
    dt: f64,
) -> Result<Vec<SampledField>> {
    let half = Complex64::new(dt / 2.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out = Vec::with_capacity(free.len());
    out.push(free[0].clone());
    let mut acc = SampledField::zeros(*free[0].grid());
    for m in 1..free.len() {
        let vm = &v.fields[m - 1];
        let left = vm.mul(&w[m - 1])?.scale(half);
        acc = free_step(&acc.add(&left)?, dt);
        acc = acc.add(&vm.mul(&w[m])?.scale(half))?;
        out.push(free[m].add(&acc.scale(minus_i))?);
    }
    Ok(out)
}

/// Iterates the Duhamel map up to `n_iter` times from the free solution, stopping once
/// successive iterates agree to rounding.
///
/// Fails with [`Error::Divergence`] when the last three ratios all exceed 1.
pub fn picard_iterate(
    u0: &SampledField,
    v: &PotentialSeries,
    tgrid: &TimeGrid,
    n_iter: usize,
) -> Result<PicardRun> {
    check_series(u0, v, tgrid)?;
    let dt = tgrid.dt();
    let mut free = Vec::with_capacity(tgrid.steps + 1);
    free.push(u0.clone());
    for m in 0..tgrid.steps {
        let next = free_step(&free[m], dt);
        free.push(next);
    }
    // differences at this level are rounding noise, so their ratios carry no information
    let floor = ROUNDING_FLOOR * u0.l2_norm();
    let mut w = free.clone();
    let mut differences = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let next = duhamel_map(&free, v, &w, dt)?;
        let diff = next
            .iter()
            .zip(&w)
            .map(|(a, b)| a.sub(b).map(|d| d.l2_norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        differences.push(diff);
        w = next;
        if diff <= floor {
            break;
        }
    }
    let ratios: Vec<f64> = differences
        .windows(2)
        .map(|p| if p[0] <= floor { 0.0 } else { p[1] / p[0] })
        .collect();
    if ratios.len() >= 3 && ratios[ratios.len() - 3..].iter().all(|&r| r > 1.0) {
        let ratio = *ratios.last().expect("nonempty");
        return Err(Error::Divergence {
            ratio,
            hint: format!(
                "Duhamel iteration diverges on |t| <= {}; shrink the interval so that C·‖V‖ < 1/2",
                tgrid.horizon.abs()
            ),
        });
    }
    Ok(PicardRun {
        differences,
        ratios,
        solution: w,
    })
}

/// The contraction interval actually used for a potential family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaChoice {
    pub delta: f64,
    pub ratio: f64,
    /// Every `(δ, measured ratio)` tried, largest first; divergent runs record `∞`.
    pub tried: Vec<(f64, f64)>,
}

/// Largest dyadic `δ = 2^{-k}`, `k = 0..=max_halvings`, whose measured contraction is below 1/2.
///
/// `potential` builds the potential on a given time grid; each trial uses steps of size at most `dt`.
pub fn choose_delta<F>(
    u0: &SampledField,
    potential: F,
    dt: f64,
    n_iter: usize,
    max_halvings: u32,
) -> Result<DeltaChoice>
where
    F: Fn(&TimeGrid) -> Result<PotentialSeries>,
{
    let mut tried = Vec::new();
    for k in 0..=max_halvings {
        let delta = 0.5f64.powi(k as i32);
        let tgrid = TimeGrid::new(delta, (delta / dt).ceil() as usize)?;
        let ratio = match picard_iterate(u0, &potential(&tgrid)?, &tgrid, n_iter) {
            Ok(run) => run.contraction(),
            Err(Error::Divergence { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        tried.push((delta, ratio));
        if ratio < 0.5 {
            return Ok(DeltaChoice {
                delta,
                ratio,
                tried,
            });
        }
    }
    let ratio = tried.last().map_or(f64::INFINITY, |t| t.1);
    Err(Error::Divergence {
        ratio,
        hint: format!(
            "no dyadic interval down to 2^-{max_halvings} contracts below 1/2; lower the potential amplitude"
        ),
    })
}

/// `‖fh‖_{W(FL^r,L^{r'})} / (‖f‖_{W(FL^{p'},L^p)}·‖h‖_{W(FL^{q'},L^q)})` for `1/p + 1/q = 1/r'`.
pub fn multiplication_check(
    f: &SampledField,
    h: &SampledField,
    p: Exponent,
    q: Exponent,
    r: Exponent,
) -> Result<f64> {
    let gap = p.recip() + q.recip() - r.conjugate().recip();
    if gap.abs() > 1e-12 {
        return Err(Error::Exponent(format!(
            "1/p + 1/q must equal 1/r' (p = {p}, q = {q}, r = {r})"
        )));
    }
    let product = f.mul(h)?;
    let num = amalgam_norm(&product, &AmalgamSpec::fourier_lebesgue(r, r.conjugate()))?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let nf = amalgam_norm(f, &AmalgamSpec::fourier_lebesgue(p.conjugate(), p))?;
    let nh = amalgam_norm(h, &AmalgamSpec::fourier_lebesgue(q.conjugate(), q))?;
    Ok(num / (nf * nh))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    /// Byte offset of the field inside the data file.
    pub offset: u64,
}

/// Index of a sequence of fields stored back to back in one binary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub seed: u64,
    pub spec: serde_json::Value,
    pub data_file: String,
    pub entries: Vec<SnapshotEntry>,
}

impl SnapshotManifest {
    /// Writes `<stem>.bin` and `<stem>.json` in `dir`.
    pub fn write(
        dir: &Path,
        stem: &str,
        seed: u64,
        spec: serde_json::Value,
        times: &[f64],
        fields: &[SampledField],
    ) -> Result<SnapshotManifest> {
        if times.len() != fields.len() {
            return Err(Error::Domain(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        let data_file = format!("{stem}.bin");
        let mut w = BufWriter::new(File::create(dir.join(&data_file))?);
        let mut entries = Vec::with_capacity(fields.len());
        for (t, f) in times.iter().zip(fields) {
            entries.push(SnapshotEntry {
                t: *t,
                offset: w.stream_position()?,
            });
            write_field(f, &mut w)?;
        }
        w.flush()?;
        let manifest = SnapshotManifest {
            seed,
            spec,
            data_file,
            entries,
        };
        let json =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(dir.join(format!("{stem}.json")), json)?;
        Ok(manifest)
    }

    pub fn read(path: &Path) -> Result<SnapshotManifest> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Loads entry `index`, resolving the data file next to the manifest directory `dir`.
    pub fn load(&self, dir: &Path, index: usize) -> Result<SampledField> {
        let entry = self.entries.get(index).ok_or_else(|| {
            Error::Format(format!(
                "snapshot {index} out of range ({} entries)",
                self.entries.len()
            ))
        })?;
        let mut r = BufReader::new(File::open(dir.join(&self.data_file))?);
        r.seek(SeekFrom::Start(entry.offset))?;
        read_field(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::exp;
    use crate::oracle::GaussianState;
    use crate::spectral::{free_propagate, sample, Grid};

    fn small_grid() -> Grid {
        Grid::new(1, 32.0, 512).unwrap()
    }

    fn unit(grid: &Grid) -> SampledField {
        sample(&GaussianState::unit(1).unwrap(), grid).unwrap()
    }

    fn rough_spec() -> PotentialSpec {
        PotentialSpec::new(exp(2.0), exp(4.0), 0.3, 11)
    }

    #[test]
    fn spec_validation() {
        assert!(rough_spec().validate(1).is_ok());
        assert!(PotentialSpec::new(exp(1.5), exp(2.5), 0.3, 0)
            .validate(1)
            .is_err());
        assert!(PotentialSpec::new(exp(2.0), exp(4.0), 0.2, 0)
            .validate(1)
            .is_err());
        assert!(PotentialSpec::new(exp(2.0), exp(1.0), 1.0, 0)
            .validate(1)
            .is_err());
    }

    #[test]
    fn resolution_check_suggests_steps() {
        let g = small_grid();
        let u = unit(&g);
        assert!(TimeGrid::new(1.0, 10)
            .unwrap()
            .check_resolution(&u)
            .is_err());
        match TimeGrid::new(1.0, 10).unwrap().check_resolution(&u) {
            Err(Error::Resolution { reason, .. }) => assert!(reason.contains("steps")),
            other => panic!("{other:?}"),
        }
        assert!(TimeGrid::new(0.1, 400)
            .unwrap()
            .check_resolution(&u)
            .is_ok());
    }

    #[test]
    fn zero_potential_is_free_flow() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.5, 2000).unwrap();
        let v = PotentialSeries::constant(SampledField::zeros(g), &tg);
        let end = split_step_with(&u, &v, &tg, |_, _| {}).unwrap();
        let exact = free_propagate(&u, 0.5).unwrap();
        assert!(end.max_abs_diff(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn constant_potential_is_a_phase() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.5, 2000).unwrap();
        let c = 0.7;
        let v =
            PotentialSeries::constant(SampledField::from_fn(g, |_| Complex64::new(c, 0.0)), &tg);
        let end = split_step_with(&u, &v, &tg, |_, _| {}).unwrap();
        let exact = free_propagate(&u, 0.5)
            .unwrap()
            .scale(Complex64::from_polar(1.0, -c * 0.5));
        assert!(end.max_abs_diff(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn rough_potential_is_real_and_deterministic() {
        let g = small_grid();
        let tg = TimeGrid::new(0.1, 8).unwrap();
        let a = make_rough_potential(&rough_spec(), &g, &tg).unwrap();
        let b = make_rough_potential(&rough_spec(), &g, &tg).unwrap();
        assert_eq!(a, b);
        assert!(a.is_real());
        assert_ne!(a.fields()[0], a.fields()[1]);
        let c = make_rough_potential(&rough_spec().complex(), &g, &tg).unwrap();
        assert!(!c.is_real());
    }

    #[test]
    fn rough_coefficients_have_the_stated_roughness() {
        let spec = rough_spec();
        let norm = |k: usize, sigma: f64| {
            coefficient_sobolev_norm(&rough_coefficients(&spec, k, 0), sigma)
        };
        let below = spec.sobolev_s - 0.25;
        let above = spec.sobolev_s + 0.5;
        assert!(norm(2048, below) / norm(1024, below) < 1.02);
        let growth = norm(2048, above) / norm(1024, above);
        assert!((growth - 2f64.sqrt()).abs() < 0.05, "{growth}");
    }

    #[test]
    fn mass_is_conserved_for_real_rough_potentials() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 400).unwrap();
        let v = make_rough_potential(&rough_spec(), &g, &tg).unwrap();
        let m0 = u.l2_norm();
        let mut drift: f64 = 0.0;
        split_step_with(&u, &v, &tg, |_, w| {
            drift = drift.max((w.l2_norm() - m0).abs() / m0);
        })
        .unwrap();
        assert!(drift / 0.1 < 1e-10, "{drift}");
    }

    #[test]
    fn time_reversal_recovers_the_datum() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 2600).unwrap();
        let v = make_rough_potential(&rough_spec(), &g, &tg).unwrap();
        let end = split_step_with(&u, &v, &tg, |_, _| {}).unwrap();
        let back = split_step_with(&end, &v.reversed(), &tg.reversed(), |_, _| {}).unwrap();
        assert!(back.max_abs_diff(&u).unwrap() < 1e-8);
    }

    #[test]
    fn gauge_shift_is_a_global_phase() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 400).unwrap();
        let v = make_rough_potential(&rough_spec(), &g, &tg).unwrap();
        let c = 1.3;
        let a = split_step_with(&u, &v, &tg, |_, _| {}).unwrap();
        let b = split_step_with(&u, &v.shifted(Complex64::new(c, 0.0)), &tg, |_, _| {}).unwrap();
        let rotated = a.scale(Complex64::from_polar(1.0, -c * 0.1));
        assert!(b.max_abs_diff(&rotated).unwrap() < 1e-10);
    }

    #[test]
    fn smooth_limit_matches_truncated_series() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 400).unwrap();
        let spec = PotentialSpec::new(exp(2.0), exp(4.0), 30.0, 5);
        let rough = make_rough_potential(&spec, &g, &tg).unwrap();
        let width = g.extent / 8.0;
        let fields = (0..tg.steps)
            .map(|m| {
                let c = rough_coefficients(&spec, rough_modes(&g), m as u64);
                let k0 = rough_modes(&g);
                SampledField::from_fn(g, |x| {
                    let env = (-PI * (x[0] / width).powi(2)).exp();
                    let s: Complex64 = (-1..=1)
                        .map(|k: isize| {
                            c[(k0 as isize + k) as usize]
                                * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x[0] / g.extent)
                        })
                        .sum();
                    Complex64::new(env * s.re, 0.0)
                })
            })
            .collect();
        let smooth = PotentialSeries::new(fields).unwrap();
        let a = split_step_with(&u, &rough, &tg, |_, _| {}).unwrap();
        let b = split_step_with(&u, &smooth, &tg, |_, _| {}).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-6);
    }

    #[test]
    fn picard_with_zero_potential_is_fixed() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.05, 200).unwrap();
        let v = PotentialSeries::constant(SampledField::zeros(g), &tg);
        let run = picard_iterate(&u, &v, &tg, 3).unwrap();
        assert!(run.differences.iter().all(|&d| d == 0.0));
        assert_eq!(run.contraction(), 0.0);
    }

    #[test]
    fn picard_ratio_scales_with_the_potential() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 400).unwrap();
        let v = PotentialSeries::from_fn(g, &tg, |_, x| {
            Complex64::new((2.0 * PI * x[0] / g.extent).cos(), 0.0)
        });
        let full = picard_iterate(&u, &v, &tg, 2).unwrap().contraction();
        let half = picard_iterate(&u, &v.scaled(0.5), &tg, 2)
            .unwrap()
            .contraction();
        assert!(full < 0.5);
        assert!((half / full - 0.5).abs() < 0.02, "{full} {half}");
    }

    #[test]
    fn picard_limit_matches_split_step() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 400).unwrap();
        let v = PotentialSeries::from_fn(g, &tg, |_, x| {
            Complex64::new(2.0 * (2.0 * PI * x[0] / g.extent).cos(), 0.0)
        });
        let run = picard_iterate(&u, &v, &tg, 12).unwrap();
        let split = split_step_with(&u, &v, &tg, |_, _| {}).unwrap();
        let last = run.solution.last().unwrap();
        assert!(last.sub(&split).unwrap().l2_norm() / split.l2_norm() < 1e-4);
    }

    #[test]
    fn picard_stops_at_rounding() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(0.1, 400).unwrap();
        let v = PotentialSeries::from_fn(g, &tg, |_, x| {
            Complex64::new((2.0 * PI * x[0] / g.extent).cos(), 0.0)
        });
        let run = picard_iterate(&u, &v, &tg, 60).unwrap();
        assert!(run.differences.len() < 60);
        assert!(*run.differences.last().unwrap() <= ROUNDING_FLOOR * u.l2_norm());
        assert!(run.contraction() < 0.5);
    }

    #[test]
    fn divergence_is_reported() {
        let g = small_grid();
        let u = unit(&g);
        let tg = TimeGrid::new(1.0, 4000).unwrap();
        let v = PotentialSeries::constant(
            SampledField::from_fn(g, |_| Complex64::new(0.0, -40.0)),
            &tg,
        );
        assert!(matches!(
            picard_iterate(&u, &v, &tg, 5),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn multiplication_examples() {
        let g = Grid::new(1, 32.0, 1024).unwrap();
        let f = unit(&g);
        let four = exp(4.0);
        assert_eq!(
            multiplication_check(&f, &SampledField::zeros(g), four, four, Exponent::TWO).unwrap(),
            0.0
        );
        assert!(multiplication_check(&f, &f, four, four, exp(4.0)).is_err());
        let r = multiplication_check(&f, &f, four, four, Exponent::TWO).unwrap();
        assert!(r > 0.1 && r < 10.0, "{r}");
    }

    #[test]
    fn snapshots_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = small_grid();
        let fields = vec![unit(&g), unit(&g).scale(Complex64::new(0.0, 2.0))];
        let m = SnapshotManifest::write(
            dir.path(),
            "solution",
            3,
            serde_json::json!({"alpha": 2}),
            &[0.0, 0.5],
            &fields,
        )
        .unwrap();
        let back = SnapshotManifest::read(&dir.path().join("solution.json")).unwrap();
        assert_eq!(m, back);
        assert_eq!(back.load(dir.path(), 1).unwrap(), fields[1]);
        assert!(back.load(dir.path(), 2).is_err());
    }

    #[test]
    fn fourier_series_matches_direct_sum() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let spec = rough_spec().complex();
        let c = rough_coefficients(&spec, 10, 3);
        let fast = fourier_series(&g, &c).unwrap();
        let direct = SampledField::from_fn(g, |x| {
            c.iter()
                .enumerate()
                .map(|(i, ck)| {
                    let k = i as f64 - 10.0;
                    ck * Complex64::from_polar(1.0, 2.0 * PI * k * x[0] / g.extent)
                })
                .sum()
        });
        assert!(fast.max_abs_diff(&direct).unwrap() < 1e-12);
        assert!(fourier_series(&g, &rough_coefficients(&spec, 32, 0)).is_err());
    }
}
