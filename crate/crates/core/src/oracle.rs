//! Closed-form Gaussian and chirp arithmetic.
//!
//! Everything here is exact: generalized Gaussians `A·e^{-πc|x|²}` with
//! `Re c ≥ 0` are closed under convolution and under the free Schrödinger
//! flow, and their Wiener amalgam norms against the unit Gaussian window
//! `g(x) = e^{-π|x|²}` reduce to elementary expressions. These values serve
//! as ground truth for the numerical engines in [`crate::spectral`] and
//! [`crate::amalgam`].
//!
//! Complex powers use the principal branch. Along the evolution path
//! `t ↦ 1 + 4πitc` the imaginary part never vanishes for `t ≠ 0`, so the
//! principal branch is the one continuous from `t = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exponent::Exponent;

/// Highest spatial dimension supported by the toolkit.
pub const MAX_DIM: usize = 3;

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "dimension {d} outside 1..={MAX_DIM}"
        )))
    }
}

/// `z^{-d/2}` on the principal branch.
fn pow_neg_half_dim(z: Complex64, d: usize) -> Complex64 {
    z.powf(-(d as f64) / 2.0)
}

/// The generalized Gaussian `x ↦ amplitude·e^{-πc|x|²}` on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub amplitude: Complex64,
    pub c: Complex64,
    pub dim: usize,
}

impl GaussianState {
    pub fn new(amplitude: Complex64, c: Complex64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if c == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("Gaussian parameter c must be nonzero".into()));
        }
        if c.re < 0.0 || !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::Domain(format!("Re(c) must be >= 0, got c = {c}")));
        }
        if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(Error::Domain("amplitude must be finite".into()));
        }
        Ok(GaussianState { amplitude, c, dim })
    }

    /// `e^{-πc|x|²}` with unit amplitude (the `φ^{(c)}` family).
    pub fn phi(c: Complex64, dim: usize) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), c, dim)
    }

    /// The unit Gaussian `e^{-π|x|²}`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::phi(Complex64::new(1.0, 0.0), dim)
    }

    /// The rescaled datum `e^{-πλ²|x|²}`.
    pub fn rescaled_unit(lambda: f64, dim: usize) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Self::phi(Complex64::new(lambda * lambda, 0.0), dim)
    }

    /// `f_{a+ib}(x) = (a+ib)^{-d/2} e^{-π|x|²/(a+ib)}`; its Fourier transform is `e^{-π(a+ib)|ξ|²}`.
    ///
    /// `a = 0` gives the pure chirp `f_{bi}`.
    pub fn f_ab(a: f64, b: f64, dim: usize) -> Result<Self> {
        let z = Complex64::new(a, b);
        if a < 0.0 || z == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain(format!(
                "f_(a+ib) needs a >= 0 and a+ib != 0, got {z}"
            )));
        }
        Self::new(pow_neg_half_dim(z, dim), z.inv(), dim)
    }

    /// The free Schrödinger kernel `K_t(x) = (4πit)^{-d/2} e^{i|x|²/(4t)}`.
    pub fn kernel(t: f64, dim: usize) -> Result<Self> {
        if t == 0.0 || !t.is_finite() {
            return Err(Error::Domain("kernel K_t needs t != 0".into()));
        }
        let z = Complex64::new(0.0, 4.0 * PI * t);
        Self::new(pow_neg_half_dim(z, dim), z.inv(), dim)
    }

    pub fn is_chirp(&self) -> bool {
        self.c.re == 0.0
    }

    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.amplitude * (-PI * self.c * r2).exp()
    }

    /// Fourier transform under `f̂(ξ) = ∫ f(x) e^{-2πixξ} dx`: a Gaussian with parameter `1/c`.
    pub fn fourier(&self) -> Result<Self> {
        let amp = self.amplitude * pow_neg_half_dim(self.c, self.dim);
        Self::new(amp, self.c.inv(), self.dim)
    }

    /// Pointwise product of two states.
    pub fn multiply(&self, other: &GaussianState) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Self::new(self.amplitude * other.amplitude, self.c + other.c, self.dim)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        GaussianState {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }

    /// `‖·‖_{L^p}`; for `p = ∞` the peak modulus.
    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        let amp = self.amplitude.norm();
        if p.is_infinite() {
            return Ok(amp);
        }
        if self.c.re <= 0.0 {
            return Err(Error::Domain(
                "chirps have no finite L^p norm for p < inf".into(),
            ));
        }
        let pv = p.value();
        Ok(amp * (pv * self.c.re).powf(-(self.dim as f64) / (2.0 * pv)))
    }

    /// `‖·‖_{L²}`; invariant under the free flow.
    pub fn l2_norm(&self) -> Result<f64> {
        self.lp_norm(Exponent::TWO)
    }

    /// `⟨self, other⟩ = ∫ self · conj(other)`.
    pub fn inner(&self, other: &GaussianState) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let a = self.c + other.c.conj();
        let v = gauss_integral(a, &vec![Complex64::new(0.0, 0.0); self.dim], self.dim)?;
        Ok(self.amplitude * other.amplitude.conj() * v)
    }

    /// Exact `W(FL^q, L^r)` norm with the unit Gaussian window.
    pub fn flq_lr_norm(&self, q: Exponent, r: Exponent) -> Result<f64> {
        let w = self.c.inv();
        if w.re <= 0.0 {
            return Err(Error::Domain(
                "W(FL^q, L^r) closed form needs a decaying state (Re c > 0)".into(),
            ));
        }
        let scale = self.amplitude.norm() * w.norm().powf(self.dim as f64 / 2.0);
        Ok(scale * exact_flq_lr_norm(w.re, w.im, q, r, self.dim)?)
    }

    /// Exact `W(L^{r1}, L^{r2})` norm with the unit Gaussian window.
    pub fn lr1_lr2_norm(&self, r1: Exponent, r2: Exponent) -> Result<f64> {
        if self.c.re <= 0.0 {
            return Err(Error::Domain(
                "W(L^r1, L^r2) closed form needs a decaying state (Re c > 0)".into(),
            ));
        }
        Ok(self.amplitude.norm() * exact_lr1_lr2_norm(self.c.re, self.c.im, r1, r2, self.dim)?)
    }
}

/// `∫_{R^d} e^{-πa|x|² - 2πi z·x} dx = a^{-d/2} e^{-π z·z/a}` for scalar `a` with `Re a ≥ 0`, `a ≠ 0`.
pub fn gauss_integral(a: Complex64, z: &[Complex64], d: usize) -> Result<Complex64> {
    check_dim(d)?;
    if z.len() != d {
        return Err(Error::DimensionMismatch {
            left: z.len(),
            right: d,
        });
    }
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("gauss_integral: a = 0".into()));
    }
    if a.re < 0.0 {
        return Err(Error::Domain(format!(
            "gauss_integral: Re(a) < 0 (a = {a})"
        )));
    }
    let zz: Complex64 = z.iter().map(|v| v * v).sum();
    Ok(pow_neg_half_dim(a, d) * (-PI * zz / a).exp())
}

/// `φ^{(c1)} ∗ φ^{(c2)} = (c1+c2)^{-d/2} φ^{(c1 c2/(c1+c2))}`, carried through amplitudes.
///
/// At most one factor may be a pure chirp.
pub fn gauss_convolve(u: &GaussianState, v: &GaussianState) -> Result<GaussianState> {
    if u.dim != v.dim {
        return Err(Error::DimensionMismatch {
            left: u.dim,
            right: v.dim,
        });
    }
    if u.is_chirp() && v.is_chirp() {
        return Err(Error::Domain("cannot convolve two pure chirps".into()));
    }
    let s = u.c + v.c;
    GaussianState::new(
        u.amplitude * v.amplitude * pow_neg_half_dim(s, u.dim),
        u.c * v.c / s,
        u.dim,
    )
}

/// Exact free evolution `e^{itΔ}` of a decaying Gaussian:
/// `c ↦ c/(1+4πitc)`, `amplitude ↦ amplitude·(1+4πitc)^{-d/2}`.
pub fn free_evolve_gaussian(u0: &GaussianState, t: f64) -> Result<GaussianState> {
    if u0.c.re <= 0.0 {
        return Err(Error::Domain(
            "free evolution of chirp data is excluded".into(),
        ));
    }
    if t == 0.0 {
        return Ok(*u0);
    }
    let z = Complex64::new(1.0, 0.0) + Complex64::new(0.0, 4.0 * PI * t) * u0.c;
    GaussianState::new(u0.amplitude * pow_neg_half_dim(z, u0.dim), u0.c / z, u0.dim)
}

/// Exact `W(FL^p, L^∞)` norm of the chirp `f_{ai}` with the unit Gaussian window:
/// `(1+a²)^{(d/2)(1/p-1/2)} |a|^{-d/p} p^{-d/(2p)}`.
pub fn exact_chirp_amalgam_norm(a: f64, p: Exponent, d: usize) -> Result<f64> {
    check_dim(d)?;
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Domain(
            "chirp parameter a must be finite and nonzero".into(),
        ));
    }
    let df = d as f64;
    let ip = p.recip();
    Ok((1.0 + a * a).powf(0.5 * df * (ip - 0.5)) * a.abs().powf(-df * ip) * p.gaussian_factor(d))
}

/// Exact `W(FL^q, L^r)` norm of `f_{a+ib}` with the unit Gaussian window:
/// `q^{-d/2q} r^{-d/2r} a^{-d/2r} ((a+1)²+b²)^{(d/2)(1/q-1/2)} (a(a+1)+b²)^{(d/2)(1/r-1/q)}`.
pub fn exact_flq_lr_norm(a: f64, b: f64, q: Exponent, r: Exponent, d: usize) -> Result<f64> {
    check_dim(d)?;
    if a <= 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "exact_flq_lr_norm needs a > 0, got a = {a}"
        )));
    }
    let df = d as f64;
    let (iq, ir) = (q.recip(), r.recip());
    let outer = (a + 1.0).powi(2) + b * b;
    let inner = a * (a + 1.0) + b * b;
    Ok(q.gaussian_factor(d)
        * r.gaussian_factor(d)
        * a.powf(-0.5 * df * ir)
        * outer.powf(0.5 * df * (iq - 0.5))
        * inner.powf(0.5 * df * (ir - iq)))
}

/// Exact `W(L^{r1}, L^{r2})` norm of `φ^{(a+ib)}` with the unit Gaussian window:
/// `[r1(a+1)]^{-d/(2r1)} ((a+1)/(r2 a))^{d/(2r2)}`. Independent of `b`.
pub fn exact_lr1_lr2_norm(a: f64, b: f64, r1: Exponent, r2: Exponent, d: usize) -> Result<f64> {
    check_dim(d)?;
    if a <= 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "exact_lr1_lr2_norm needs a > 0, got a = {a}"
        )));
    }
    let df = d as f64;
    let local = if r1.is_infinite() {
        1.0
    } else {
        (r1.value() * (a + 1.0)).powf(-df / (2.0 * r1.value()))
    };
    let global = if r2.is_infinite() {
        1.0
    } else {
        ((a + 1.0) / (r2.value() * a)).powf(df / (2.0 * r2.value()))
    };
    Ok(local * global)
}

/// The equivalence-class profile of `‖u(λ²t, λ·)‖_{W(L^{r1}, L^{r2})}` for the unit Gaussian datum:
/// `λ^{-d/r2} (1+(tλ²)²)^{(d/2)(1/r1-1/2)} (1+λ²+(tλ²)²)^{(d/2)(1/r2-1/r1)}`.
///
/// Defined only up to a window constant; use it for exponents, not levels.
pub fn evolved_rescaled_norm(
    lambda: f64,
    t: f64,
    r1: Exponent,
    r2: Exponent,
    d: usize,
) -> Result<f64> {
    check_dim(d)?;
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let df = d as f64;
    let (i1, i2) = (r1.recip(), r2.recip());
    let s = t * lambda * lambda;
    Ok(lambda.powf(-df * i2)
        * (1.0 + s * s).powf(0.5 * df * (i1 - 0.5))
        * (1.0 + lambda * lambda + s * s).powf(0.5 * df * (i2 - i1)))
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn state(d: usize) -> impl Strategy<Value = GaussianState> {
        (0.05f64..5.0, -5.0f64..5.0, 0.1f64..3.0, -3.0f64..3.0).prop_map(move |(re, im, ar, ai)| {
            GaussianState::new(Complex64::new(ar, ai), Complex64::new(re, im), d).unwrap()
        })
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    proptest! {
        #[test]
        fn convolution_commutes(u in state(1), v in state(1)) {
            let a = gauss_convolve(&u, &v).unwrap();
            let b = gauss_convolve(&v, &u).unwrap();
            prop_assert!(close(a.amplitude, b.amplitude, 1e-13));
            prop_assert!(close(a.c, b.c, 1e-13));
        }

        #[test]
        fn convolution_associates(u in state(1), v in state(1), w in state(1)) {
            let a = gauss_convolve(&gauss_convolve(&u, &v).unwrap(), &w).unwrap();
            let b = gauss_convolve(&u, &gauss_convolve(&v, &w).unwrap()).unwrap();
            prop_assert!(close(a.c, b.c, 1e-10));
            // Branches agree because every intermediate parameter has positive real part.
            prop_assert!(close(a.amplitude, b.amplitude, 1e-10));
        }

        #[test]
        fn evolution_group_law(u in state(1), s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let two_steps = free_evolve_gaussian(&free_evolve_gaussian(&u, s).unwrap(), t).unwrap();
            let one_step = free_evolve_gaussian(&u, s + t).unwrap();
            prop_assert!(close(two_steps.amplitude, one_step.amplitude, 1e-10));
            prop_assert!(close(two_steps.c, one_step.c, 1e-10));
        }

        #[test]
        fn evolution_group_law_3d(u in state(3), s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let two_steps = free_evolve_gaussian(&free_evolve_gaussian(&u, s).unwrap(), t).unwrap();
            let one_step = free_evolve_gaussian(&u, s + t).unwrap();
            prop_assert!(close(two_steps.amplitude, one_step.amplitude, 1e-10));
        }

        #[test]
        fn evolution_conserves_l2(u in state(2), t in -50.0f64..50.0) {
            let n0 = u.l2_norm().unwrap();
            let n1 = free_evolve_gaussian(&u, t).unwrap().l2_norm().unwrap();
            prop_assert!((n0 - n1).abs() <= 1e-12 * n0);
        }

        #[test]
        fn lr1_lr2_is_b_independent(a in 0.01f64..100.0, b in -100.0f64..100.0,
                                     r1 in 1.0f64..20.0, r2 in 1.0f64..20.0, d in 1usize..=3) {
            let r1 = Exponent::new(r1).unwrap();
            let r2 = Exponent::new(r2).unwrap();
            let x = exact_lr1_lr2_norm(a, b, r1, r2, d).unwrap();
            let y = exact_lr1_lr2_norm(a, 0.0, r1, r2, d).unwrap();
            prop_assert_eq!(x, y);
        }

        #[test]
        fn flq_two_two_identity(a in 0.01f64..50.0, b in -50.0f64..50.0, d in 1usize..=3) {
            let f = GaussianState::f_ab(a, b, d).unwrap();
            let lhs = exact_flq_lr_norm(a, b, Exponent::TWO, Exponent::TWO, d).unwrap();
            let rhs = f.l2_norm().unwrap() * 2f64.powf(-(d as f64) / 4.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }
}
