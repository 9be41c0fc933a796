//! Fixed-time decay envelopes, the admissible exponent region, and Strichartz ratios.
//!
//! Every norm here is an exact Gaussian-window value from [`crate::oracle`];
//! time integrals over those closed forms use adaptive quadrature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::amalgam::{WindowKind, WindowSpec};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::oracle::{check_dim, exact_chirp_amalgam_norm, free_evolve_gaussian, GaussianState};
use crate::quad::{integrate, integrate_to_infinity, maximize_with_hints};

const TOL: f64 = 1e-12;

/// Exponents `(s, r, q)` tied by `1/s = 1/r + (2/q)(1/2 - 1/r)`, all in `[2, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedTimeSpec {
    pub s: Exponent,
    pub r: Exponent,
    pub q: Exponent,
    pub d: usize,
}

impl FixedTimeSpec {
    /// Derives `s` from `r` and `q`.
    pub fn new(r: Exponent, q: Exponent, d: usize) -> Result<Self> {
        let inv_s = r.recip() + 2.0 * q.recip() * (0.5 - r.recip());
        Self::with_s(Exponent::from_reciprocal(inv_s)?, r, q, d)
    }

    pub fn with_s(s: Exponent, r: Exponent, q: Exponent, d: usize) -> Result<Self> {
        check_dim(d)?;
        for (name, e) in [("s", s), ("r", r), ("q", q)] {
            if e.value() < 2.0 {
                return Err(Error::Exponent(format!("{name} = {e} must be >= 2")));
            }
        }
        let gap = s.recip() - r.recip() - 2.0 * q.recip() * (0.5 - r.recip());
        if gap.abs() > TOL {
            return Err(Error::Exponent(format!(
                "1/s = 1/r + (2/q)(1/2 - 1/r) violated by {gap:.3e}"
            )));
        }
        Ok(FixedTimeSpec { s, r, q, d })
    }

    /// `|t|^{d(2/q-1)(1-2/r)} (1+t²)^{d(1/4-1/q)(1-2/r)}`.
    pub fn envelope(&self, t: f64) -> f64 {
        let d = self.d as f64;
        let k = 1.0 - 2.0 * self.r.recip();
        let iq = self.q.recip();
        t.abs().powf(d * (2.0 * iq - 1.0) * k) * (1.0 + t * t).powf(d * (0.25 - iq) * k)
    }
}

/// `‖K_t‖_{W(FL^p, L^∞)}` with the unit Gaussian window.
///
/// `K_t` is exactly the chirp `f_{4πti}`, so this is the chirp norm at `a = 4πt`.
pub fn kernel_amalgam_norm(t: f64, p: Exponent, d: usize) -> Result<f64> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain("kernel norm needs t != 0".into()));
    }
    exact_chirp_amalgam_norm(4.0 * PI * t, p, d)
}

/// `‖e^{itΔ}u0‖_{W(FL^{s'},L^r)} / (envelope(t)·‖u0‖_{W(FL^s,L^{r'})})`.
pub fn fixed_time_ratio(u0: &GaussianState, t: f64, spec: &FixedTimeSpec) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::Domain("fixed-time ratio needs t != 0".into()));
    }
    if u0.dim != spec.d {
        return Err(Error::DimensionMismatch {
            left: u0.dim,
            right: spec.d,
        });
    }
    let lhs = free_evolve_gaussian(u0, t)?.flq_lr_norm(spec.s.conjugate(), spec.r)?;
    let rhs = u0.flq_lr_norm(spec.s, spec.r.conjugate())?;
    Ok(lhs / (spec.envelope(t) * rhs))
}

/// Extremes of a positive ratio over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
}

impl RatioRange {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    fn of(values: impl Iterator<Item = f64>) -> Self {
        values.fold(
            RatioRange {
                min: f64::INFINITY,
                max: 0.0,
            },
            |acc, v| RatioRange {
                min: acc.min.min(v),
                max: acc.max.max(v),
            },
        )
    }
}

/// [`fixed_time_ratio`] over the λ-family `e^{-πλ²|x|²}` and a set of times.
pub fn fixed_time_sweep(
    spec: &FixedTimeSpec,
    lambdas: &[f64],
    times: &[f64],
) -> Result<RatioRange> {
    let pairs: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| times.iter().map(move |&t| (l, t)))
        .collect();
    let ratios = pairs
        .par_iter()
        .map(|&(l, t)| fixed_time_ratio(&GaussianState::rescaled_unit(l, spec.d)?, t, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioRange::of(ratios.into_iter()))
}

/// Exponents `(q1, r1)` of the inner and `(q2, r2)` of the outer amalgam layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    pub q1: Exponent,
    pub r1: Exponent,
    pub q2: Exponent,
    pub r2: Exponent,
    pub d: usize,
}

impl RegionQuery {
    pub fn new(q1: f64, r1: f64, q2: f64, r2: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(RegionQuery {
            q1: Exponent::new(q1)?,
            r1: Exponent::new(r1)?,
            q2: Exponent::new(q2)?,
            r2: Exponent::new(r2)?,
            d,
        })
    }
}

impl fmt::Display for RegionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{}) d={}",
            self.q1, self.r1, self.q2, self.r2, self.d
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Q2BelowTwo,
    R2BelowTwo,
    R1ExceedsR2,
    Index1,
    Index2,
    R1InfiniteInDim2,
    R2InfiniteInDim2,
    R1AboveCap,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Violation::Q2BelowTwo => "q2 < 2",
            Violation::R2BelowTwo => "r2 < 2",
            Violation::R1ExceedsR2 => "r1 > r2",
            Violation::Index1 => "2/q1 + d/r1 < d/2",
            Violation::Index2 => "2/q2 + d/r2 > d/2",
            Violation::R1InfiniteInDim2 => "(r,d)=(inf,2) excluded",
            Violation::R2InfiniteInDim2 => "(r,d)=(inf,2) excluded",
            Violation::R1AboveCap => "r1 > 2d/(d-2)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub reasons: Vec<Violation>,
}

/// `2/q1 + d/r1 ≥ d/2`.
pub fn index1_holds(q1: Exponent, r1: Exponent, d: usize) -> bool {
    2.0 * q1.recip() + d as f64 * r1.recip() >= d as f64 / 2.0 - TOL
}

/// `2/q2 + d/r2 ≤ d/2`.
pub fn index2_holds(q2: Exponent, r2: Exponent, d: usize) -> bool {
    2.0 * q2.recip() + d as f64 * r2.recip() <= d as f64 / 2.0 + TOL
}

/// Whether `r1` respects the cap `r1 ≤ 2d/(d-2)` (vacuous for `d ≤ 2`).
pub fn below_cap(r1: Exponent, d: usize) -> bool {
    d < 3 || r1.recip() >= (d as f64 - 2.0) / (2.0 * d as f64) - TOL
}

/// Inner-layer membership: index condition, the `(∞,2)` exclusion and the cap.
pub fn inner_layer(q1: Exponent, r1: Exponent, d: usize) -> bool {
    index1_holds(q1, r1, d) && !(r1.is_infinite() && d == 2) && below_cap(r1, d)
}

/// Outer-layer membership: `q2, r2 ≥ 2`, index condition and the `(∞,2)` exclusion.
pub fn outer_layer(q2: Exponent, r2: Exponent, d: usize) -> bool {
    q2.value() >= 2.0
        && r2.value() >= 2.0
        && index2_holds(q2, r2, d)
        && !(r2.is_infinite() && d == 2)
}

pub fn is_admissible(query: &RegionQuery) -> Admissibility {
    let RegionQuery { q1, r1, q2, r2, d } = *query;
    let mut reasons = Vec::new();
    if q2.value() < 2.0 {
        reasons.push(Violation::Q2BelowTwo);
    }
    if r2.value() < 2.0 {
        reasons.push(Violation::R2BelowTwo);
    }
    if r1.value() > r2.value() {
        reasons.push(Violation::R1ExceedsR2);
    }
    if !index1_holds(q1, r1, d) {
        reasons.push(Violation::Index1);
    }
    if !index2_holds(q2, r2, d) {
        reasons.push(Violation::Index2);
    }
    if d == 2 && r1.is_infinite() {
        reasons.push(Violation::R1InfiniteInDim2);
    }
    if d == 2 && r2.is_infinite() {
        reasons.push(Violation::R2InfiniteInDim2);
    }
    if !below_cap(r1, d) {
        reasons.push(Violation::R1AboveCap);
    }
    Admissibility {
        admissible: reasons.is_empty(),
        reasons,
    }
}

/// A `W(L^{q1}, L^{q2})_t` norm of a closed-form time profile.
///
/// The profile is cut to `[-T, T]` when `horizon` is set; `y_range` restricts the
/// global integral to a window of translations (used for lower bounds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeNorm {
    pub inner: Exponent,
    pub outer: Exponent,
    pub window: WindowSpec,
    pub horizon: Option<f64>,
    pub y_range: Option<(f64, f64)>,
    /// Width of the profile's central peak; guides breakpoints and scan hints.
    pub peak_scale: f64,
    /// Length scale of the profile's algebraic tails.
    pub tail_scale: f64,
}

impl TimeNorm {
    pub fn new(inner: Exponent, outer: Exponent, window: WindowSpec) -> Self {
        TimeNorm {
            inner,
            outer,
            window,
            horizon: None,
            y_range: None,
            peak_scale: 1.0,
            tail_scale: 1.0,
        }
    }

    pub fn horizon(self, t: f64) -> Self {
        TimeNorm {
            horizon: Some(t),
            ..self
        }
    }

    pub fn restricted(self, lo: f64, hi: f64) -> Self {
        TimeNorm {
            y_range: Some((lo, hi)),
            ..self
        }
    }

    pub fn scales(self, peak: f64, tail: f64) -> Self {
        TimeNorm {
            peak_scale: peak,
            tail_scale: tail.max(1.0),
            ..self
        }
    }

    fn window_value(&self, t: f64) -> f64 {
        let g = self.window.eval(&[t]);
        if !self.window.unit_l2 {
            return g;
        }
        let norm = match self.window.kind {
            WindowKind::Gaussian { width } => (width * width / 2.0).powf(0.25),
            WindowKind::Boxcar { half_width } => (2.0 * half_width).sqrt(),
        };
        g / norm
    }

    fn marks(&self) -> Vec<f64> {
        let s = self.peak_scale;
        let mut m = vec![0.0];
        for k in [0.1, 1.0, 10.0, 100.0] {
            m.push(k * s);
            m.push(-k * s);
        }
        m
    }

    fn local<F: Fn(f64) -> f64>(&self, f: &F, y: f64) -> f64 {
        let rho = self.window.support_radius();
        let (mut lo, mut hi) = (y - rho, y + rho);
        if let Some(t) = self.horizon {
            lo = lo.max(-t);
            hi = hi.min(t);
        }
        if lo >= hi {
            return 0.0;
        }
        let marks = self.marks();
        let h = |t: f64| f(t) * self.window_value(t - y);
        if self.inner.is_infinite() {
            let mut hints = marks.clone();
            hints.push(y);
            maximize_with_hints(h, lo, hi, &hints)
        } else {
            let q = self.inner.value();
            integrate(|t| h(t).powf(q), lo, hi, &marks, 1e-11).powf(1.0 / q)
        }
    }

    pub fn evaluate<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let rho = self.window.support_radius();
        let local = |y: f64| self.local(&f, y);
        let bounded = self.y_range.or(self.horizon.map(|t| (-t - rho, t + rho)));
        let mut marks = self.marks();
        marks.extend([rho, -rho]);
        if let Some(t) = self.horizon {
            marks.extend([t, -t, t - rho, rho - t]);
        }
        if self.outer.is_infinite() {
            let (lo, hi) =
                bounded.unwrap_or((-rho - 10.0 * self.tail_scale, rho + 10.0 * self.tail_scale));
            return maximize_with_hints(local, lo, hi, &marks);
        }
        let q = self.outer.value();
        let integrand = |y: f64| local(y).powf(q);
        // a local sup has kinks in y, so high accuracy there costs far more than it gains
        let tol = if self.inner.is_infinite() { 1e-6 } else { 1e-9 };
        let total = match bounded {
            Some((lo, hi)) => integrate(integrand, lo, hi, &marks, tol),
            None => {
                let b = rho + 1.0;
                integrate(integrand, -b, b, &marks, tol)
                    + integrate_to_infinity(integrand, b, self.tail_scale, tol)
                    + integrate_to_infinity(|y| integrand(-y), b, self.tail_scale, tol)
            }
        };
        total.powf(1.0 / q)
    }
}

/// One raster cell of the admissible region in the `(1/q, 1/r)` unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub inv_q: f64,
    pub inv_r: f64,
    /// Inner-layer (index-1) membership of `(q1, r1) = (q, r)`.
    pub inner: bool,
    /// Outer-layer (index-2) membership of `(q2, r2) = (q, r)`.
    pub outer: bool,
}

/// Rasterizes both layers on a `(resolution+1)²` lattice including the edges.
pub fn region_raster(d: usize, resolution: usize) -> Result<Vec<RegionCell>> {
    check_dim(d)?;
    if resolution == 0 {
        return Err(Error::Config("region resolution must be positive".into()));
    }
    let mut cells = Vec::with_capacity((resolution + 1).pow(2));
    for i in 0..=resolution {
        for j in 0..=resolution {
            let inv_q = i as f64 / resolution as f64;
            let inv_r = j as f64 / resolution as f64;
            let q = Exponent::from_reciprocal(inv_q)?;
            let r = Exponent::from_reciprocal(inv_r)?;
            cells.push(RegionCell {
                inv_q,
                inv_r,
                inner: inner_layer(q, r, d),
                outer: outer_layer(q, r, d),
            });
        }
    }
    Ok(cells)
}

/// `t ↦ ‖e^{itΔ}u0‖_{W(L^{r1},L^{r2})}` from the closed form.
pub fn lr_profile(u0: GaussianState, r1: Exponent, r2: Exponent) -> impl Fn(f64) -> f64 + Sync {
    move |t| {
        free_evolve_gaussian(&u0, t)
            .and_then(|u| u.lr1_lr2_norm(r1, r2))
            .expect("decaying data stay decaying under the flow")
    }
}

/// `t ↦ ‖e^{itΔ}u0‖_{W(FL^q,L^r)}` from the closed form.
pub fn flq_profile(u0: GaussianState, q: Exponent, r: Exponent) -> impl Fn(f64) -> f64 + Sync {
    move |t| {
        free_evolve_gaussian(&u0, t)
            .and_then(|u| u.flq_lr_norm(q, r))
            .expect("decaying data stay decaying under the flow")
    }
}

/// Dispersion time scale `1/(4π Re c)` of a Gaussian datum.
pub fn dispersion_time(u0: &GaussianState) -> f64 {
    1.0 / (4.0 * PI * u0.c.re)
}

/// `‖e^{itΔ}u0‖_{W(L^{q1},L^{q2})_t W(L^{r1},L^{r2})_x} / ‖u0‖_{L²}` over `t ∈ [-T, T]`,
/// with unit Gaussian windows in both variables.
pub fn strichartz_ratio(u0: &GaussianState, query: &RegionQuery, horizon: f64) -> Result<f64> {
    let adm = is_admissible(query);
    if !adm.admissible {
        let reasons: Vec<String> = adm.reasons.iter().map(|r| r.to_string()).collect();
        return Err(Error::Exponent(format!(
            "inadmissible {query}: {}",
            reasons.join(", ")
        )));
    }
    if u0.dim != query.d {
        return Err(Error::DimensionMismatch {
            left: u0.dim,
            right: query.d,
        });
    }
    let tau = dispersion_time(u0);
    let norm = TimeNorm::new(query.q1, query.q2, WindowSpec::UNIT_GAUSSIAN)
        .horizon(horizon)
        .scales(tau, tau);
    let mixed = norm.evaluate(lr_profile(*u0, query.r1, query.r2));
    Ok(mixed / u0.l2_norm()?)
}

/// Strichartz ratios over a λ-family and a ladder of horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzSweep {
    pub query: RegionQuery,
    pub lambdas: Vec<f64>,
    pub horizons: Vec<f64>,
    /// `ratios[i][j]` at horizon `i` and λ index `j`.
    pub ratios: Vec<Vec<f64>>,
    /// Largest `max/min` over λ across the requested horizons.
    pub spread: f64,
    /// Largest relative change between the last two requested horizons.
    pub last_change: f64,
    /// First horizon (from doubling the last requested one) whose doubling changes every ratio by < `tol`.
    pub converged_horizon: Option<f64>,
    /// Largest relative change across the doubling of `converged_horizon`.
    pub settled_change: Option<f64>,
}

impl StrichartzSweep {
    pub fn bounded(&self, max_spread: f64) -> bool {
        self.spread <= max_spread
    }
}

/// Runs [`strichartz_ratio`] over `lambdas × horizons`, then keeps doubling the last
/// horizon (at most `max_doublings` times) until the ratios settle within `tol`.
pub fn strichartz_sweep(
    query: &RegionQuery,
    lambdas: &[f64],
    horizons: &[f64],
    tol: f64,
    max_doublings: usize,
) -> Result<StrichartzSweep> {
    if lambdas.is_empty() || horizons.is_empty() {
        return Err(Error::Config(
            "strichartz sweep needs lambdas and horizons".into(),
        ));
    }
    let row = |t: f64| -> Result<Vec<f64>> {
        lambdas
            .par_iter()
            .map(|&l| strichartz_ratio(&GaussianState::rescaled_unit(l, query.d)?, query, t))
            .collect()
    };
    let ratios = horizons
        .iter()
        .map(|&t| row(t))
        .collect::<Result<Vec<_>>>()?;
    let spread = ratios
        .iter()
        .map(|r| RatioRange::of(r.iter().copied()).spread())
        .fold(0.0, f64::max);
    let change = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| ((y - x) / x).abs())
            .fold(0.0, f64::max)
    };
    let last_change = if ratios.len() >= 2 {
        change(&ratios[ratios.len() - 2], &ratios[ratios.len() - 1])
    } else {
        0.0
    };
    let mut converged_horizon = None;
    let mut settled_change = None;
    if ratios.len() >= 2 && last_change < tol {
        converged_horizon = Some(horizons[horizons.len() - 2]);
        settled_change = Some(last_change);
    } else {
        let mut t = *horizons.last().expect("non-empty");
        let mut prev = ratios.last().expect("non-empty").clone();
        for _ in 0..max_doublings {
            let next = row(2.0 * t)?;
            let c = change(&prev, &next);
            if c < tol {
                converged_horizon = Some(t);
                settled_change = Some(c);
                break;
            }
            t *= 2.0;
            prev = next;
        }
    }
    Ok(StrichartzSweep {
        query: *query,
        lambdas: lambdas.to_vec(),
        horizons: horizons.to_vec(),
        ratios,
        spread,
        last_change,
        converged_horizon,
        settled_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::exp;
    use approx::assert_relative_eq;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn fixed_time_spec_relation() {
        let s = FixedTimeSpec::new(exp(4.0), exp(4.0), 1).unwrap();
        // 1/s = 1/4 + (1/2)(1/4)
        assert_relative_eq!(s.s.recip(), 0.375, epsilon = 1e-15);
        assert!(FixedTimeSpec::with_s(exp(3.0), exp(4.0), exp(4.0), 1).is_err());
        assert!(FixedTimeSpec::new(exp(1.5), exp(4.0), 1).is_err());
        let r_inf = FixedTimeSpec::new(Exponent::INFINITY, exp(4.0), 1).unwrap();
        assert_eq!(r_inf.s, exp(4.0));
    }

    #[test]
    fn kernel_norm_slopes() {
        let slope = |p: f64, t1: f64, t2: f64| {
            let f = |t| kernel_amalgam_norm(t, exp(p), 1).unwrap().ln();
            (f(t2) - f(t1)) / (t2 / t1).ln()
        };
        assert!((slope(1.0, 1e-6, 1e-5) + 1.0).abs() < 1e-3);
        assert!((slope(2.0, 1e5, 1e6) + 0.5).abs() < 1e-3);
        assert!(kernel_amalgam_norm(0.0, exp(1.0), 1).is_err());
        // t = 1/(4π), p = 2, d = 1: a = 1, value 2^{-1/4}
        let v = kernel_amalgam_norm(1.0 / (4.0 * PI), exp(2.0), 1).unwrap();
        assert_relative_eq!(v, 2f64.powf(-0.25), max_relative = 1e-14);
    }

    #[test]
    fn conservation_case_is_constant_in_t() {
        let spec = FixedTimeSpec::new(exp(2.0), exp(2.0), 1).unwrap();
        let u0 = GaussianState::rescaled_unit(0.7, 1).unwrap();
        let r0 = fixed_time_ratio(&u0, 0.01, &spec).unwrap();
        for t in [0.3, 5.0, 400.0] {
            assert_relative_eq!(
                fixed_time_ratio(&u0, t, &spec).unwrap(),
                r0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn fixed_time_ratio_is_even_in_t() {
        let spec = FixedTimeSpec::new(exp(6.0), exp(3.0), 2).unwrap();
        let u0 = GaussianState::rescaled_unit(1.7, 2).unwrap();
        for t in [0.05, 2.0] {
            let a = fixed_time_ratio(&u0, t, &spec).unwrap();
            let b = fixed_time_ratio(&u0, -t, &spec).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn admissibility_examples() {
        let q = RegionQuery::new(INF, 2.0, INF, 2.0, 1).unwrap();
        assert!(is_admissible(&q).admissible);

        let q = RegionQuery::new(2.0, INF, INF, INF, 2).unwrap();
        let a = is_admissible(&q);
        assert!(!a.admissible);
        assert!(a.reasons.contains(&Violation::R1InfiniteInDim2));
        assert_eq!(
            Violation::R1InfiniteInDim2.to_string(),
            "(r,d)=(inf,2) excluded"
        );

        let q = RegionQuery::new(1.0, 8.0, INF, 8.0, 3).unwrap();
        let a = is_admissible(&q);
        assert!(a.reasons.contains(&Violation::R1AboveCap));
        assert!(!a.admissible);
    }

    #[test]
    fn time_norm_diagonal_matches_lebesgue() {
        // W(L^2, L^2) of e^{-πt²} with the unit Gaussian window: ‖f‖₂‖g‖₂ = 2^{-1/2}
        let n = TimeNorm::new(exp(2.0), exp(2.0), WindowSpec::UNIT_GAUSSIAN);
        let v = n.evaluate(|t| (-PI * t * t).exp());
        assert_relative_eq!(v, 0.5f64.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn time_norm_sup_sup_is_peak() {
        let n = TimeNorm::new(
            Exponent::INFINITY,
            Exponent::INFINITY,
            WindowSpec::UNIT_GAUSSIAN,
        )
        .scales(1e-3, 1.0);
        let v = n.evaluate(|t| 1.0 / (1.0 + (t / 1e-3).powi(2)));
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn conservation_pair_ratio_is_window_constant() {
        let q = RegionQuery::new(INF, 2.0, INF, 2.0, 1).unwrap();
        for lam in [0.1, 1.0, 10.0] {
            let u0 = GaussianState::rescaled_unit(lam, 1).unwrap();
            let r = strichartz_ratio(&u0, &q, 10.0).unwrap();
            assert_relative_eq!(r, 2f64.powf(-0.25), max_relative = 1e-9);
        }
    }

    #[test]
    fn strichartz_rejects_inadmissible() {
        let q = RegionQuery::new(8.0, 4.0, 8.0, 2.0, 1).unwrap();
        let u0 = GaussianState::unit(1).unwrap();
        assert!(matches!(
            strichartz_ratio(&u0, &q, 10.0),
            Err(Error::Exponent(_))
        ));
    }

    #[test]
    fn region_examples() {
        let cells = region_raster(3, 12).unwrap();
        for c in &cells {
            let expected =
                2.0 * c.inv_q + 3.0 * c.inv_r >= 1.5 - 1e-12 && c.inv_r >= 1.0 / 6.0 - 1e-12;
            assert_eq!(c.inner, expected, "{c:?}");
        }
        // no cap in d = 1
        let one = region_raster(1, 4).unwrap();
        assert!(one.iter().any(|c| c.inner && c.inv_r == 0.0));
        assert!(region_raster(1, 0).is_err());
    }

    fn exponent_from(inv: f64) -> Exponent {
        Exponent::from_reciprocal(inv).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn admissibility_is_monotone(
            a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=0.5, e in 0.0f64..=0.5,
            shrink in 0.0f64..=1.0, which in 0usize..4, d in 1usize..=3,
        ) {
            let q = RegionQuery {
                q1: exponent_from(a), r1: exponent_from(b),
                q2: exponent_from(c), r2: exponent_from(e), d,
            };
            proptest::prop_assume!(is_admissible(&q).admissible);
            // decreasing q1 or r1 raises the reciprocal; increasing q2 or r2 lowers it
            let mut moved = q;
            match which {
                0 => moved.q1 = exponent_from(a + (1.0 - a) * shrink),
                1 => moved.r1 = exponent_from(b + (1.0 - b) * shrink),
                2 => moved.q2 = exponent_from(c * (1.0 - shrink)),
                _ => moved.r2 = exponent_from(e * (1.0 - shrink)),
            }
            proptest::prop_assume!(!(d == 2 && moved.r2.is_infinite()));
            proptest::prop_assert!(is_admissible(&moved).admissible, "{} -> {}", q, moved);
        }
    }
}
