//! Adaptive Gauss–Kronrod quadrature and bounded maximization for smooth scalar maps.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`, splitting at the given breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);

    let mut intervals: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    for _ in 0..4000 {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= rel_tol * total.abs() || err < 1e-300 {
            break;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (a0, b0, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (a0 + b0);
        if m <= a0 || m >= b0 {
            break;
        }
        let (v1, e1) = gk15(&f, a0, m);
        let (v2, e2) = gk15(&f, m, b0);
        intervals.push((a0, m, v1, e1));
        intervals.push((m, b0, v2, e2));
    }
    sign * intervals.iter().map(|iv| iv.2).sum::<f64>()
}

/// Integrates `f` over `[a, ∞)` using the map `t = a + s·u/(1-u)`; `scale` sets `s`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel_tol: f64) -> f64 {
    let g = |u: f64| {
        let w = 1.0 - u;
        let t = a + scale * u / w;
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (w * w)
        }
    };
    // Most mass of the integrands used here sits near t - a ~ scale.
    integrate(g, 0.0, 1.0, &[0.25, 0.5, 0.75, 0.9, 0.99], rel_tol)
}

/// Maximum of `f` on `[a, b]`: dense scan followed by golden-section refinement.
pub fn maximize<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    maximize_with_hints(f, a, b, &[])
}

/// As [`maximize`], with extra scan points where narrow peaks may hide.
pub fn maximize_with_hints<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, hints: &[f64]) -> f64 {
    if a >= b {
        return f(a);
    }
    let n = 256;
    let step = (b - a) / n as f64;
    let mut pts: Vec<f64> = (0..=n).map(|i| a + i as f64 * step).collect();
    pts.extend(hints.iter().copied().filter(|&h| h > a && h < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &x) in pts.iter().enumerate() {
        let v = f(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = pts[best_i.saturating_sub(1)];
    let mut hi = pts[(best_i + 1).min(pts.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if hi - lo <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    best.max(f1).max(f2)
}
