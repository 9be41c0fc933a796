//! One function per experiment, each returning report rows plus plot-ready tables.

use std::f64::consts::PI;
use std::path::Path;

use amalgam_core::amalgam::{amalgam_norm, compare_flq_lr, resolve_grid, AmalgamSpec, WindowSpec};
use amalgam_core::bounds::{
    inner_layer, is_admissible, outer_layer, region_raster, strichartz_ratio, strichartz_sweep,
    RegionQuery, Violation,
};
use amalgam_core::oracle::{exact_flq_lr_norm, free_evolve_gaussian};
use amalgam_core::potential::{
    choose_delta, make_rough_potential, picard_iterate, split_step_with, PotentialSeries,
    PotentialSpec, SnapshotManifest, TimeGrid,
};
use amalgam_core::report::{Criterion, ReportRow};
use amalgam_core::sharpness::{
    bump_experiment, check_fixed_time, check_inner_index, check_outer_index, check_space_order,
    check_time_exponents, log_space, sharpness_suite, BumpConfig, SharpnessVerdict,
};
use amalgam_core::spectral::{free_propagate, sample, sample_periodic};
use amalgam_core::{Exponent, GaussianState, Grid};
use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, RunConfig};

/// Pointwise tolerance of the free propagator against the exact evolution.
pub const PROPAGATOR_TOL: f64 = 1e-8;
/// Relative `L²` drift tolerated by the free propagator.
pub const MASS_TOL: f64 = 1e-12;
/// Largest acceptable `max/min` of a Strichartz ratio over the λ-family.
pub const MAX_SPREAD: f64 = 20.0;
/// Relative change under horizon doubling that counts as settled.
pub const HORIZON_TOL: f64 = 0.01;
pub const MAX_DOUBLINGS: usize = 4;
/// Mass drift per unit time tolerated by the split-step solver.
pub const DRIFT_TOL: f64 = 1e-10;
pub const STRANG_ORDER_TOL: f64 = 0.1;
/// Largest Picard contraction ratio accepted for the chosen δ.
pub const CONTRACTION_TARGET: f64 = 0.5;
pub const PICARD_AGREEMENT_TOL: f64 = 1e-4;
pub const REGION_SPOT_CHECKS: usize = 10;

/// A CSV file besides `<experiment>.csv`.
pub struct Table {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn table<T: Serialize>(name: &str, records: &[T]) -> Result<Table> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    Ok(Table {
        name: name.to_string(),
        bytes: w.into_inner().context("flushing CSV")?,
    })
}

#[derive(Default)]
pub struct Outcome {
    pub rows: Vec<ReportRow>,
    pub tables: Vec<Table>,
}

pub fn run(exp: Experiment, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    match exp {
        Experiment::Norms => norms(cfg),
        Experiment::FixedTime => fixed_time(cfg, out),
        Experiment::Strichartz => strichartz(cfg),
        Experiment::Sharpness => sharpness(cfg),
        Experiment::Potential => potential(cfg, out),
        Experiment::Region => region(cfg),
        Experiment::All => unreachable!("`all` is expanded before dispatch"),
    }
}

/// The experiment's own grid with any `--grid-n`/`--grid-l` override applied.
fn with_overrides(cfg: &RunConfig, g: Grid) -> Result<Grid> {
    Ok(Grid::new(
        g.dim,
        cfg.grid_l.unwrap_or(g.extent),
        cfg.grid_n.unwrap_or(g.points),
    )?)
}

fn bool_row(experiment: &str, case: &str, inputs: String, ok: bool) -> ReportRow {
    ReportRow::new(
        experiment,
        case,
        inputs,
        1.0,
        if ok { 1.0 } else { 0.0 },
        0.0,
        Criterion::Absolute,
    )
}

#[derive(Serialize)]
struct NormRecord {
    a: f64,
    b: f64,
    q: String,
    r: String,
    exact: f64,
    numeric: f64,
    rel_err: f64,
    grid_n: usize,
    grid_l: f64,
}

fn norms(cfg: &RunConfig) -> Result<Outcome> {
    let ps: Vec<Exponent> = cfg.exponents.iter().map(|e| e.0).collect();
    let pairs: Vec<(f64, f64)> = cfg
        .widths_a
        .iter()
        .flat_map(|&a| cfg.widths_b.iter().map(move |&b| (a, b)))
        .collect();
    let overridden = cfg.grid_n.is_some() || cfg.grid_l.is_some();
    let nested = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<NormRecord>> {
            if !overridden {
                return Ok(compare_flq_lr(a, b, &ps, &ps, cfg.dim)?
                    .into_iter()
                    .map(|c| NormRecord {
                        a,
                        b,
                        q: c.q.to_string(),
                        r: c.r.to_string(),
                        exact: c.exact,
                        numeric: c.numeric,
                        rel_err: c.rel_err,
                        grid_n: c.grid_n,
                        grid_l: c.grid_l,
                    })
                    .collect());
            }
            let state = GaussianState::f_ab(a, b, cfg.dim)?;
            let grid = with_overrides(cfg, resolve_grid(&state, &WindowSpec::UNIT_GAUSSIAN)?)?;
            let field = sample(&state, &grid)?;
            let mut recs = Vec::new();
            for &q in &ps {
                for &r in &ps {
                    let numeric = amalgam_norm(&field, &AmalgamSpec::fourier_lebesgue(q, r))?;
                    let exact = exact_flq_lr_norm(a, b, q, r, cfg.dim)?;
                    recs.push(NormRecord {
                        a,
                        b,
                        q: q.to_string(),
                        r: r.to_string(),
                        exact,
                        numeric,
                        rel_err: (numeric - exact).abs() / exact,
                        grid_n: grid.points,
                        grid_l: grid.extent,
                    });
                }
            }
            Ok(recs)
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<NormRecord> = nested.into_iter().flatten().collect();
    let rows = records
        .iter()
        .map(|c| {
            ReportRow::new(
                "norms",
                &format!("a={} b={} q={} r={}", c.a, c.b, c.q, c.r),
                format!("d={} N={} L={}", cfg.dim, c.grid_n, c.grid_l),
                c.exact,
                c.numeric,
                cfg.tol_norm,
                Criterion::Relative,
            )
        })
        .collect();
    Ok(Outcome {
        rows,
        tables: vec![table("norms_table", &records)?],
    })
}

fn verdict_rows(experiment: &str, vs: &[SharpnessVerdict], tol: f64) -> Vec<ReportRow> {
    vs.iter()
        .map(|v| ReportRow::from_verdict(experiment, v, tol))
        .collect()
}

fn fixed_time(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let grid = with_overrides(cfg, Grid::default_for(cfg.dim)?)?;
    let u0 = GaussianState::unit(cfg.dim)?;
    let f = sample(&u0, &grid)?;
    let mass = f.l2_norm();
    let inputs = format!("d={} N={} L={}", cfg.dim, grid.points, grid.extent);
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    for &t in &cfg.times {
        let numeric = free_propagate(&f, t)?;
        let exact = sample_periodic(&free_evolve_gaussian(&u0, t)?, &grid)?;
        let err = numeric.max_abs_diff(&exact)?;
        let drift = (numeric.l2_norm() - mass).abs() / mass;
        let case = format!("t={t}");
        rows.push(ReportRow::new(
            "fixed-time",
            &format!("propagator {case}"),
            inputs.clone(),
            0.0,
            err,
            PROPAGATOR_TOL,
            Criterion::AtMost,
        ));
        rows.push(ReportRow::new(
            "fixed-time",
            &format!("mass {case}"),
            inputs.clone(),
            0.0,
            drift,
            MASS_TOL,
            Criterion::AtMost,
        ));
        if cfg.dump_fields {
            fields.push(numeric);
        }
    }
    if cfg.dump_fields {
        SnapshotManifest::write(
            out,
            "fixed-time-fields",
            cfg.seed,
            serde_json::json!({ "state": "unit-gaussian", "dim": cfg.dim, "grid": grid }),
            &cfg.times,
            &fields,
        )?;
    }
    let verdicts = cfg
        .r
        .par_iter()
        .map(|r| check_fixed_time(r.0, cfg.dim, cfg.tol_slope))
        .collect::<amalgam_core::Result<Vec<_>>>()?;
    for [_, blowup, decay] in &verdicts {
        rows.extend(verdict_rows(
            "fixed-time",
            &[decay.clone(), blowup.clone()],
            cfg.tol_slope,
        ));
    }
    Ok(Outcome {
        rows,
        tables: Vec::new(),
    })
}

#[derive(Serialize)]
struct StrichartzRecord {
    quadruple: String,
    horizon: f64,
    lambda: f64,
    ratio: f64,
}

fn strichartz(cfg: &RunConfig) -> Result<Outcome> {
    let lambdas = log_space(cfg.lambda_min, cfg.lambda_max, cfg.lambda_count);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for quad in &cfg.quadruples {
        let [q1, r1, q2, r2] = quad.0.map(|e| e.0.value());
        let query = RegionQuery::new(q1, r1, q2, r2, cfg.dim)?;
        let s = strichartz_sweep(&query, &lambdas, &cfg.horizons, HORIZON_TOL, MAX_DOUBLINGS)?;
        let case = query.to_string();
        let inputs = format!(
            "lambda in [{}, {}] x {}, T={:?}",
            cfg.lambda_min, cfg.lambda_max, cfg.lambda_count, cfg.horizons
        );
        rows.push(ReportRow::new(
            "strichartz",
            &format!("spread {case}"),
            inputs.clone(),
            MAX_SPREAD,
            s.spread,
            0.0,
            Criterion::AtMost,
        ));
        rows.push(ReportRow::new(
            "strichartz",
            &format!("horizon-doubling {case}"),
            format!(
                "{inputs}, settled at T={}",
                s.converged_horizon
                    .map_or("never".to_string(), |t| t.to_string())
            ),
            HORIZON_TOL,
            s.settled_change.unwrap_or(f64::NAN),
            0.0,
            Criterion::AtMost,
        ));
        for (t, ratios) in s.horizons.iter().zip(&s.ratios) {
            for (l, ratio) in lambdas.iter().zip(ratios) {
                records.push(StrichartzRecord {
                    quadruple: case.clone(),
                    horizon: *t,
                    lambda: *l,
                    ratio: *ratio,
                });
            }
        }
    }
    let two = Exponent::TWO;
    let four = Exponent::new(4.0)?;
    let bad = RegionQuery::new(f64::INFINITY, 4.0, f64::INFINITY, 2.0, cfg.dim)?;
    let rejected = strichartz_ratio(&GaussianState::unit(cfg.dim)?, &bad, 10.0).is_err();
    rows.push(bool_row(
        "strichartz",
        "inadmissible-rejected",
        bad.to_string(),
        rejected,
    ));
    let [gap, _] = check_space_order(four, two, 1.0, cfg.dim, cfg.tol_slope)?;
    rows.push(ReportRow::from_verdict("strichartz", &gap, cfg.tol_slope));
    Ok(Outcome {
        rows,
        tables: vec![table("strichartz_ratios", &records)?],
    })
}

fn single_claim(cfg: &RunConfig, claim: &str) -> Result<Vec<SharpnessVerdict>> {
    let (d, tol) = (cfg.dim, cfg.tol_slope);
    let mut vs = Vec::new();
    match claim {
        "r-at-least-2" | "small-time-blowup" | "large-time-decay" => {
            for r in &cfg.r {
                vs.extend(check_fixed_time(r.0, d, tol)?);
            }
        }
        "beta-lower" | "alpha-upper" => {
            for r in &cfg.r {
                vs.extend(check_time_exponents(r.0, d, cfg.alpha.0, cfg.beta.0, tol)?);
            }
        }
        "r1-le-r2" | "lr-decay" => vs.extend(check_space_order(cfg.r1.0, cfg.r2.0, 1.0, d, tol)?),
        "index-inner" => vs.push(check_inner_index(
            cfg.q1.0, cfg.r1.0, cfg.q2.0, cfg.r2.0, d, tol,
        )?),
        "index-outer" => vs.push(check_outer_index(
            cfg.q1.0, cfg.r1.0, cfg.q2.0, cfg.r2.0, d, tol,
        )?),
        _ => vs.push(bump_experiment(&BumpConfig::standard()?, &[4, 8, 16], tol)?.verdict),
    }
    vs.retain(|v| v.claim == claim);
    Ok(vs)
}

fn sharpness(cfg: &RunConfig) -> Result<Outcome> {
    let vs = match &cfg.claim {
        Some(c) => single_claim(cfg, c)?,
        None => sharpness_suite(cfg.tol_slope)?,
    };
    Ok(Outcome {
        rows: verdict_rows("sharpness", &vs, cfg.tol_slope),
        tables: Vec::new(),
    })
}

fn potential(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let grid = with_overrides(cfg, Grid::new(1, 32.0, 512)?)?;
    if grid.dim != 1 {
        anyhow::bail!("the potential experiment runs in one dimension");
    }
    let u0 = sample(&GaussianState::unit(1)?, &grid)?;
    let spec = PotentialSpec::new(
        cfg.potential_alpha.0,
        cfg.potential_p.0,
        cfg.sobolev_s,
        cfg.seed,
    )
    .with_amplitude(cfg.amplitude);
    spec.validate(1)?;
    let inputs = format!(
        "alpha={} p={} s={} amplitude={} seed={} N={} L={}",
        cfg.potential_alpha,
        cfg.potential_p,
        cfg.sobolev_s,
        cfg.amplitude,
        cfg.seed,
        grid.points,
        grid.extent
    );
    let mut rows = Vec::new();

    let steps = (cfg.potential_horizon / cfg.time_step).ceil() as usize;
    let tg = TimeGrid::new(cfg.potential_horizon, steps)?;
    let v = make_rough_potential(&spec, &grid, &tg)?;
    let m0 = u0.l2_norm();
    let mut drift: f64 = 0.0;
    let stride = (steps / 10).max(1);
    let mut snaps = (Vec::new(), Vec::new());
    let dump = cfg.dump_fields;
    split_step_with(&u0, &v, &tg, |m, u| {
        drift = drift.max((u.l2_norm() - m0).abs() / m0);
        if dump && m % stride == 0 {
            snaps.0.push(m as f64 * tg.dt());
            snaps.1.push(u.clone());
        }
    })?;
    if dump {
        SnapshotManifest::write(
            out,
            "potential-fields",
            cfg.seed,
            serde_json::to_value(spec).context("serializing potential spec")?,
            &snaps.0,
            &snaps.1,
        )?;
    }
    rows.push(ReportRow::new(
        "potential",
        "mass-drift-rate",
        format!("{inputs} T={} M={steps}", cfg.potential_horizon),
        0.0,
        drift / cfg.potential_horizon,
        DRIFT_TOL,
        Criterion::AtMost,
    ));

    let smooth = Grid::new(1, 8.0, 128)?;
    let w0 = sample(&GaussianState::unit(1)?, &smooth)?;
    let solve = |m: usize| -> Result<_> {
        let tg = TimeGrid::new(1.0, m)?;
        let v = PotentialSeries::from_fn(smooth, &tg, |_, x| {
            Complex64::new((2.0 * PI * x[0] / smooth.extent).cos(), 0.0)
        });
        Ok(split_step_with(&w0, &v, &tg, |_, _| {})?)
    };
    let (a, b, c) = (solve(3000)?, solve(6000)?, solve(12000)?);
    let order = (a.sub(&b)?.l2_norm() / b.sub(&c)?.l2_norm()).log2();
    rows.push(ReportRow::new(
        "potential",
        "strang-order",
        "V=cos(2 pi x/8) T=1 M=3000,6000,12000 N=128 L=8".to_string(),
        2.0,
        order,
        STRANG_ORDER_TOL,
        Criterion::Absolute,
    ));

    let choice = choose_delta(
        &u0,
        |tg| make_rough_potential(&spec, &grid, tg),
        cfg.time_step,
        4,
        10,
    )?;
    let steps = (choice.delta / cfg.time_step).ceil() as usize * cfg.picard_refine;
    let tg = TimeGrid::new(choice.delta, steps)?;
    let v = make_rough_potential(&spec, &grid, &tg)?;
    let picard = picard_iterate(&u0, &v, &tg, 30)?;
    let split = split_step_with(&u0, &v, &tg, |_, _| {})?;
    let last = picard
        .solution
        .last()
        .context("Picard run produced no iterate")?;
    let agree = last.sub(&split)?.l2_norm() / split.l2_norm();
    let picard_inputs = format!("{inputs} delta={} M={steps}", choice.delta);
    rows.push(ReportRow::new(
        "potential",
        "picard-contraction",
        picard_inputs.clone(),
        CONTRACTION_TARGET,
        picard.contraction(),
        0.0,
        Criterion::AtMost,
    ));
    rows.push(ReportRow::new(
        "potential",
        "picard-vs-split-step",
        picard_inputs,
        0.0,
        agree,
        PICARD_AGREEMENT_TOL,
        Criterion::AtMost,
    ));
    Ok(Outcome {
        rows,
        tables: Vec::new(),
    })
}

/// Violations that depend on the inner pair alone.
fn inner_violation(v: &Violation) -> bool {
    matches!(
        v,
        Violation::Index1 | Violation::R1InfiniteInDim2 | Violation::R1AboveCap
    )
}

fn outer_violation(v: &Violation) -> bool {
    matches!(
        v,
        Violation::Q2BelowTwo
            | Violation::R2BelowTwo
            | Violation::Index2
            | Violation::R2InfiniteInDim2
    )
}

fn region(cfg: &RunConfig) -> Result<Outcome> {
    let cells = region_raster(cfg.dim, cfg.resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks = sample_indices(&mut rng, cells.len(), REGION_SPOT_CHECKS.min(cells.len()));
    let mut mismatches = 0usize;
    for i in picks.iter() {
        let c = &cells[i];
        let q = Exponent::from_reciprocal(c.inv_q)?;
        let r = Exponent::from_reciprocal(c.inv_r)?;
        // pair the cell with a fixed partner; only the cell's own constraints are read back
        let as_inner = RegionQuery {
            q1: q,
            r1: r,
            q2: Exponent::INFINITY,
            r2: Exponent::INFINITY,
            d: cfg.dim,
        };
        let as_outer = RegionQuery {
            q1: Exponent::INFINITY,
            r1: Exponent::TWO,
            q2: q,
            r2: r,
            d: cfg.dim,
        };
        let inner = !is_admissible(&as_inner).reasons.iter().any(inner_violation);
        let outer = !is_admissible(&as_outer).reasons.iter().any(outer_violation);
        if inner != c.inner
            || outer != c.outer
            || inner != inner_layer(q, r, cfg.dim)
            || outer != outer_layer(q, r, cfg.dim)
        {
            mismatches += 1;
        }
    }
    let rows = vec![ReportRow::new(
        "region",
        "raster-spot-check",
        format!(
            "d={} resolution={} checks={} seed={}",
            cfg.dim,
            cfg.resolution,
            picks.len(),
            cfg.seed
        ),
        0.0,
        mismatches as f64,
        0.0,
        Criterion::Absolute,
    )];
    Ok(Outcome {
        rows,
        tables: vec![table("region_raster", &cells)?],
    })
}
