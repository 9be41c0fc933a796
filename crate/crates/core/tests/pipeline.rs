use amalgam_core::amalgam::{amalgam_norm, resolve_grid, AmalgamSpec, WindowSpec};
use amalgam_core::bounds::{fixed_time_ratio, FixedTimeSpec};
use amalgam_core::exponent::exp;
use amalgam_core::oracle::{exact_flq_lr_norm, free_evolve_gaussian};
use amalgam_core::spectral::{free_propagate, read_field, sample, write_field};
use amalgam_core::{Exponent, GaussianState};

#[test]
fn numerically_evolved_norm_matches_closed_form() {
    // e^{itΔ}e^{-π|x|²} is f_{1+4πit}
    let t = 0.5;
    let u0 = GaussianState::unit(1).unwrap();
    let evolved = free_evolve_gaussian(&u0, t).unwrap();
    let grid = resolve_grid(&evolved, &WindowSpec::UNIT_GAUSSIAN).unwrap();
    let numeric = free_propagate(&sample(&u0, &grid).unwrap(), t).unwrap();
    for (q, r) in [(2.0, 4.0), (1.0, f64::INFINITY), (4.0, 1.0)] {
        let got = amalgam_norm(&numeric, &AmalgamSpec::fourier_lebesgue(exp(q), exp(r))).unwrap();
        let want =
            exact_flq_lr_norm(1.0, 4.0 * std::f64::consts::PI * t, exp(q), exp(r), 1).unwrap();
        assert!(
            (got - want).abs() / want < 1e-3,
            "q={q} r={r}: {got} vs {want}"
        );
    }
}

#[test]
fn fixed_time_ratio_stays_bounded_along_the_flow() {
    let spec = FixedTimeSpec::new(exp(4.0), Exponent::TWO, 1).unwrap();
    let u0 = GaussianState::rescaled_unit(2.0, 1).unwrap();
    for t in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let ratio = fixed_time_ratio(&u0, t, &spec).unwrap();
        assert!(
            ratio.is_finite() && ratio > 0.0 && ratio < 10.0,
            "t={t}: {ratio}"
        );
    }
}

#[test]
fn sampled_fields_survive_serialization() {
    let u0 = GaussianState::f_ab(1.0, 2.0, 2).unwrap();
    let grid = resolve_grid(&u0, &WindowSpec::UNIT_GAUSSIAN).unwrap();
    let f = sample(&u0, &grid).unwrap();
    let mut buf = Vec::new();
    write_field(&f, &mut buf).unwrap();
    assert_eq!(read_field(buf.as_slice()).unwrap(), f);
}
