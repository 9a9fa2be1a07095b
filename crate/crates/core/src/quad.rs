//! Adaptive Gauss–Kronrod quadrature and mode-centred integration of
//! log-integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{numerical, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions { abs_tol, rel_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // Rounding floor of `error`; bisection cannot push the error below it.
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let resasc = resasc * h;
    let resabs = resabs * h;
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let mut floor = 0.0;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * resabs;
        err = err.max(floor);
    }
    Segment { a, b, value: resk * half, error: err, floor }
}

/// Globally adaptive G7–K15 integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, intervals: 0 });
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(numerical(format!("integrate needs finite limits, got [{a}, {b}]")));
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let first = kronrod15(&mut f, a, b);
    if !first.value.is_finite() {
        return Err(numerical(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_floor = first.floor;
    heap.push(first);
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()).max(2.0 * total_floor) {
        if heap.len() >= opts.max_intervals {
            return Err(numerical(format!(
                "adaptive quadrature on [{a}, {b}] hit {} intervals: value {total:e}, error estimate {total_err:e}",
                opts.max_intervals
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval collapsed to adjacent floats: accept what we have.
            heap.push(Segment { error: 0.0, floor: 0.0, ..worst });
            total_err = heap.iter().map(|s| s.error).sum();
            if heap.iter().all(|s| s.error == 0.0) {
                break;
            }
            continue;
        }
        let left = kronrod15(&mut f, worst.a, mid);
        let right = kronrod15(&mut f, mid, worst.b);
        if !left.value.is_finite() || !right.value.is_finite() {
            return Err(numerical(format!("non-finite integrand near [{}, {}]", worst.a, worst.b)));
        }
        total += left.value + right.value - worst.value;
        total_err = (total_err + left.error + right.error - worst.error).max(0.0);
        total_floor = (total_floor + left.floor + right.floor - worst.floor).max(0.0);
        heap.push(left);
        heap.push(right);
    }
    // Final re-sum in position order so the result does not carry update drift.
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let total: f64 = segs.iter().map(|s| s.value).sum();
    let total_err: f64 = segs.iter().map(|s| s.error).sum();
    let heap_len = segs.len();
    Ok(QuadResult { value: total, abs_error: total_err, intervals: heap_len })
}

/// Integrate over consecutive breakpoints, summing the pieces in order.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    let mut out = QuadResult { value: 0.0, abs_error: 0.0, intervals: 0 };
    for w in points.windows(2) {
        let r = integrate(&mut f, w[0], w[1], opts)?;
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.intervals += r.intervals;
    }
    Ok(out)
}

/// Result of integrating `exp(φ)` in log space.
#[derive(Debug, Clone, Copy)]
pub struct LogQuad {
    pub ln_value: f64,
    pub rel_error: f64,
}

const MAX_PANELS: usize = 20_000;
const PANEL_CUTOFF: f64 = 1e-17;

/// `ln ∫_lower^upper exp(φ(v)) dv` for a unimodal `φ` whose maximum on
/// `[lower, upper]` is at `mode`.
///
/// Panels of initial width `scale` are laid out from the mode in both
/// directions, widening geometrically, until a panel contributes less than
/// `1e-17` of the running total. Everything is integrated relative to
/// `φ(mode)`, so no intermediate overflows or underflows.
pub fn ln_integrate_unimodal<F: Fn(f64) -> f64>(
    phi: F,
    mode: f64,
    scale: f64,
    lower: f64,
    upper: f64,
) -> Result<LogQuad> {
    if !(lower <= mode && mode <= upper) {
        return Err(numerical(format!("mode {mode} outside [{lower}, {upper}]")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(numerical(format!("panel scale must be positive and finite, got {scale}")));
    }
    let peak = phi(mode);
    if !peak.is_finite() {
        return Err(numerical(format!("log-integrand not finite at the mode ({mode}): {peak}")));
    }
    let g = |v: f64| (phi(v) - peak).exp();
    let mut total = 0.0;
    let mut err = 0.0;
    let mut right = Vec::new();
    let mut left = Vec::new();
    for (dir, out) in [(1.0f64, &mut right), (-1.0, &mut left)] {
        let bound = if dir > 0.0 { upper } else { lower };
        let mut start = mode;
        let mut width = scale;
        for j in 0..MAX_PANELS {
            if start == bound {
                break;
            }
            let mut end = start + dir * width;
            if (dir > 0.0 && end > bound) || (dir < 0.0 && end < bound) {
                end = bound;
            }
            let (a, b) = if dir > 0.0 { (start, end) } else { (end, start) };
            let opts = QuadOptions::tol(PANEL_CUTOFF * (total + scale) * 0.1, 1e-15);
            let r = integrate(g, a, b, opts)?;
            out.push(r.value);
            total += r.value;
            err += r.abs_error;
            if j >= 2 && r.value <= PANEL_CUTOFF * total {
                break;
            }
            if j + 1 == MAX_PANELS {
                return Err(numerical("unimodal integration did not reach a negligible tail"));
            }
            start = end;
            if j % 4 == 3 {
                width *= 2.0;
            }
        }
    }
    // Sum smallest-first for a deterministic, well-conditioned total.
    let mut parts: Vec<f64> = right.into_iter().chain(left).collect();
    parts.sort_by(f64::total_cmp);
    let sum: f64 = parts.iter().sum();
    if !(sum > 0.0) {
        return Err(numerical(format!("unimodal integral vanished or is not finite: {sum}")));
    }
    Ok(LogQuad { ln_value: peak + sum.ln(), rel_error: err / sum + f64::EPSILON * parts.len() as f64 })
}
