//! Adaptive Gauss-Kronrod quadrature.
//!
//! Global adaptive bisection on a 7/15-point Gauss-Kronrod pair (QUADPACK's
//! QAG scheme): the interval with the largest error estimate is split until
//! the summed estimate falls under `max(rel_tol * |I|, abs_tol)`.
//!
//! Two specialised entry points sit on top of it:
//!
//! * [`integrate_sqrt_endpoint`] for `int_0^a k^3 f(k) sqrt(a^2 - k^2) dk`,
//!   which maps `k = a sin(theta)` so the square-root endpoint never gets
//!   sampled;
//! * [`integrate_semi_infinite`] for `int_0^inf`, which walks geometrically
//!   growing panels until the tail bound is met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        }
    }

    /// Multiplies value and error by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        QuadResult {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_evaluations: 1_000_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("rel_tol", "must be positive and finite"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::invalid("abs_tol", "must be non-negative"));
        }
        if self.max_evaluations < 15 {
            return Err(Error::invalid("max_evaluations", "must allow one 15-point rule"));
        }
        Ok(())
    }
}

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

/// 7-point Gauss weights, attached to the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Roundoff floor of `error`; splitting cannot go below it.
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    // Largest error first; ties broken on position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::NonFinite("integrand"));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut samples = [(0.0f64, 0.0f64); 7];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::NonFinite("integrand"));
        }
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *sample = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let scale = half.abs();
    let error = rescale_error((kronrod - gauss) * half, res_abs * scale, res_asc * scale);
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error,
        floor: 50.0 * f64::EPSILON * res_abs * scale,
    })
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let ratio = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if ratio < 1.0 { res_asc * ratio } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the
/// partition given by `points` (which must be non-decreasing).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: &QuadOptions) -> Result<QuadResult> {
    opts.validate()?;
    if points.len() < 2 {
        return Err(Error::invalid("points", "need at least two endpoints"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("integration limits"));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("points", "breakpoints must be non-decreasing"));
    }

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod(&f, w[0], w[1])?);
            evaluations += 15;
        }
    }
    if heap.is_empty() {
        return Ok(QuadResult::zero());
    }

    loop {
        // Summation in a fixed (position) order keeps results independent of
        // heap internals.
        let (value, error) = totals(&heap);
        let target = (opts.rel_tol * value.abs()).max(opts.abs_tol);
        if error <= target {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        let best = QuadResult {
            value,
            error_estimate: error,
            evaluations,
        };
        if evaluations + 30 > opts.max_evaluations {
            return Err(Error::NonConvergence { best });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.error <= worst.floor || !(mid > worst.a && mid < worst.b) {
            // Roundoff-limited, or no room left to split in double precision.
            return Err(Error::NonConvergence { best });
        }
        heap.push(gauss_kronrod(&f, worst.a, mid)?);
        heap.push(gauss_kronrod(&f, mid, worst.b)?);
        evaluations += 30;
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// `int_0^a k^3 f(k) sqrt(a^2 - k^2) dk`.
///
/// Evaluated as `a^5 int_0^{pi/2} sin^3 cos^2 f(a sin theta) dtheta`.
pub fn integrate_sqrt_endpoint<F: Fn(f64) -> f64>(f: F, a: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_sqrt_endpoint_with_breaks(f, a, &[], opts)
}

/// Same as [`integrate_sqrt_endpoint`], with known non-smooth points of `f`
/// (in `k`) used to seed the partition.
pub fn integrate_sqrt_endpoint_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    k_breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite("upper limit"));
    }
    if a < 0.0 {
        return Err(Error::invalid("a", "upper limit must be non-negative"));
    }
    if a == 0.0 {
        return Ok(QuadResult::zero());
    }
    let mut thetas = vec![0.0];
    let mut inner: Vec<f64> = k_breaks
        .iter()
        .filter(|&&k| k > 0.0 && k < a)
        .map(|&k| (k / a).asin())
        .collect();
    inner.sort_by(f64::total_cmp);
    thetas.extend(inner);
    thetas.push(FRAC_PI_2);

    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        s * s * s * c * c * f(a * s)
    };
    let r = integrate_with_breaks(integrand, &thetas, opts)?;
    Ok(r.scaled(a.powi(5)))
}

/// Naive midpoint rule for the same integral as [`integrate_sqrt_endpoint`],
/// sampled directly in `k`. The error estimate is the change between `n` and
/// `2n` cells.
pub fn integrate_sqrt_endpoint_midpoint<F: Fn(f64) -> f64>(f: F, a: f64, n: usize) -> QuadResult {
    let rule = |cells: usize| {
        let h = a / cells as f64;
        (0..cells)
            .map(|i| {
                let k = (i as f64 + 0.5) * h;
                k * k * k * f(k) * (a * a - k * k).sqrt()
            })
            .sum::<f64>()
            * h
    };
    let n = n.max(1);
    let coarse = rule(n);
    let fine = rule(2 * n);
    QuadResult {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        evaluations: 3 * n,
    }
}

/// `int_0^inf f`, for integrands that eventually decay.
///
/// `decay_scale` marks where decay is expected to have set in; `[0,
/// decay_scale]` is seeded with 16 equal cells, then panels double in length
/// until the geometric tail bound drops below `rel_tol` of the running total.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, decay_scale: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if !(decay_scale > 0.0 && decay_scale.is_finite()) {
        return Err(Error::invalid("decay_scale", "must be positive and finite"));
    }
    let seeds: Vec<f64> = (0..=16).map(|i| decay_scale * i as f64 / 16.0).collect();
    integrate_semi_infinite_from(f, &seeds, opts)
}

const MAX_PANELS: usize = 200;

/// Like [`integrate_semi_infinite`], with the first panel `[0, seeds.last()]`
/// partitioned at `seeds`.
pub fn integrate_semi_infinite_from<F: Fn(f64) -> f64>(f: F, seeds: &[f64], opts: &QuadOptions) -> Result<QuadResult> {
    opts.validate()?;
    let mut seeds: Vec<f64> = seeds.iter().copied().filter(|s| *s >= 0.0).collect();
    seeds.sort_by(f64::total_cmp);
    if seeds.first() != Some(&0.0) {
        seeds.insert(0, 0.0);
    }
    let first_end = *seeds.last().unwrap();
    if !(first_end > 0.0 && first_end.is_finite()) {
        return Err(Error::invalid("seeds", "first panel must have positive finite length"));
    }

    let head = integrate_with_breaks(&f, &seeds, opts)?;
    let mut value = head.value;
    let mut error = head.error_estimate;
    let mut evaluations = head.evaluations;
    let mut previous = head.value.abs();
    let mut lo = first_end;

    for _ in 0..MAX_PANELS {
        let hi = 2.0 * lo;
        if !hi.is_finite() {
            break;
        }
        let panel_opts = QuadOptions {
            abs_tol: opts.abs_tol.max(0.1 * opts.rel_tol * value.abs()),
            max_evaluations: opts.max_evaluations.saturating_sub(evaluations).max(15),
            ..*opts
        };
        let panel = integrate(&f, lo, hi, &panel_opts)?;
        value += panel.value;
        error += panel.error_estimate;
        evaluations += panel.evaluations;
        let current = panel.value.abs();

        let ratio = if previous > 0.0 {
            current / previous
        } else if current == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio < 0.5 {
            let tail = current * ratio / (1.0 - ratio);
            if tail <= (opts.rel_tol * value.abs()).max(opts.abs_tol) {
                return Ok(QuadResult {
                    value,
                    error_estimate: error + tail,
                    evaluations,
                });
            }
        }
        if evaluations >= opts.max_evaluations {
            break;
        }
        previous = current;
        lo = hi;
    }
    Err(Error::TailNotReached {
        omega_max: lo,
        accumulated: value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> QuadOptions {
        QuadOptions::default()
    }

    #[test]
    fn endpoint_integral_of_one() {
        let r = integrate_sqrt_endpoint(|_| 1.0, 1.0, &opts()).unwrap();
        assert!((r.value - 2.0 / 15.0).abs() < 1e-14);
        assert!(r.error_estimate >= 0.0 && r.evaluations > 0);
        let r = integrate_sqrt_endpoint(|_| 1.0, 2.0, &opts()).unwrap();
        assert!((r.value / (2.0 / 15.0 * 32.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn empty_interval() {
        let r = integrate_sqrt_endpoint(|_| 1.0, 0.0, &opts()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(integrate_sqrt_endpoint(|_| 1.0, -1.0, &opts()).is_err());
    }

    #[test]
    fn endpoint_with_band_breaks() {
        // f = indicator of [0.3, 0.8] on a = 1. Closed form from the
        // antiderivative W^{3/2}(a^2/3 - W/5), W = a^2 - k^2.
        let prim = |k: f64| {
            let w: f64 = 1.0 - k * k;
            -(w.powf(1.5) * (1.0 / 3.0 - w / 5.0))
        };
        let exact = prim(0.8) - prim(0.3);
        let band = |k: f64| if (0.3..=0.8).contains(&k) { 1.0 } else { 0.0 };
        let r = integrate_sqrt_endpoint_with_breaks(band, 1.0, &[0.3, 0.8], &opts()).unwrap();
        assert!((r.value / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_semi_infinite(|w| (-w).exp(), 1.0, &opts()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_semi_infinite(|w| (-w).exp(), 37.0, &opts()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_gaussian_moment() {
        let exact = 15.0 / 16.0 * std::f64::consts::PI.sqrt();
        let r = integrate_semi_infinite(|w| w.powi(6) * (-w * w).exp(), 1.0, &opts()).unwrap();
        assert!((r.value / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_zero() {
        let r = integrate_semi_infinite(|_| 0.0, 1.0, &opts()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn semi_infinite_tail_not_reached() {
        let r = integrate_semi_infinite(|w| 1.0 / (1.0 + w), 1.0, &opts());
        assert!(matches!(r, Err(Error::TailNotReached { .. })));
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let tight = QuadOptions {
            max_evaluations: 45,
            ..opts()
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &tight);
        match r {
            Err(Error::NonConvergence { best }) => assert!(best.evaluations <= 45),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand() {
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, &opts()),
            Err(Error::NonFinite(_))
        ));
    }

    fn poly(coeffs: &[f64], k: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * k + c)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn substitution_matches_midpoint(
            coeffs in proptest::collection::vec(-3.0f64..3.0, 1..5),
            a in 0.1f64..3.0,
        ) {
            let sub = integrate_sqrt_endpoint(|k| poly(&coeffs, k), a, &opts()).unwrap();
            let mid = integrate_sqrt_endpoint_midpoint(|k| poly(&coeffs, k), a, 4000);
            let budget = sub.error_estimate + mid.error_estimate + 1e-12 * sub.value.abs();
            prop_assert!((sub.value - mid.value).abs() <= budget,
                "{} vs {} (budget {})", sub.value, mid.value, budget);
        }

        #[test]
        fn linearity(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, s in 0.5f64..4.0) {
            let f = |w: f64| (-w / s).exp();
            let g = |w: f64| w * w * (-w * w).exp();
            let o = opts();
            let i_f = integrate_semi_infinite(f, 1.0, &o).unwrap().value;
            let i_g = integrate_semi_infinite(g, 1.0, &o).unwrap().value;
            let combo = integrate_semi_infinite(|w| alpha * f(w) + beta * g(w), 1.0, &o).unwrap().value;
            let expected = alpha * i_f + beta * i_g;
            let scale = alpha.abs() * i_f + beta.abs() * i_g;
            prop_assert!((combo - expected).abs() <= 10.0 * o.rel_tol * scale + 1e-300);
        }

        #[test]
        fn monotonicity(c in 0.0f64..2.0, a in 0.1f64..2.0) {
            let o = opts();
            let lo = integrate_sqrt_endpoint(|k| k * k, a, &o).unwrap();
            let hi = integrate_sqrt_endpoint(|k| k * k + c, a, &o).unwrap();
            prop_assert!(hi.value >= lo.value - hi.error_estimate - lo.error_estimate);
        }
    }
}
