//! Adaptive Gauss–Kronrod (7/15) quadrature with global interval bisection.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Positive Kronrod abscissae, largest first; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
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

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            abs: 0.0,
            rel,
            max_intervals: 4096,
        }
    }

    pub fn absolute(abs: f64) -> Self {
        Tolerance {
            abs,
            rel: 0.0,
            max_intervals: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
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

fn roundoff_floor(res_abs: f64) -> f64 {
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        50.0 * f64::EPSILON * res_abs
    } else {
        0.0
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        e = res_asc * (1.0f64).min((200.0 * e / res_asc).powf(1.5));
    }
    e.max(roundoff_floor(res_abs))
}

/// Single 15-point Kronrod estimate on `[a, b]` with the QUADPACK error model.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (value, error, _) = gk15_with_floor(f, a, b);
    (value, error)
}

// Also returns the part of the error estimate that is pure roundoff.
fn gk15_with_floor<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    );
    (res_k * half, err, roundoff_floor(res_abs * abs_half))
}

/// Integrates `f` over `[a, b]`, bisecting the interval with the largest error
/// estimate until the summed error meets `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (value, error, floor) = gk15_with_floor(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        error,
        floor,
    });
    let (mut total, mut total_err, mut total_floor) = (value, error, floor);
    let mut intervals = 1;
    loop {
        // error at the roundoff floor cannot be reduced by splitting
        let target = tol.abs.max(tol.rel * total.abs()).max(2.0 * total_floor);
        if total_err <= target {
            break;
        }
        if intervals >= tol.max_intervals {
            return Err(Error::Quadrature {
                a,
                b,
                error: total_err,
                intervals,
            });
        }
        let worst = heap.pop().expect("heap holds every live interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // cannot split further in floating point
            return Err(Error::Quadrature {
                a,
                b,
                error: total_err,
                intervals,
            });
        }
        let (v1, e1, r1) = gk15_with_floor(&f, worst.a, mid);
        let (v2, e2, r2) = gk15_with_floor(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_floor += r1 + r2 - worst.floor;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            floor: r1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            floor: r2,
        });
        intervals += 1;
    }
    // re-sum to shed the drift of incremental updates
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact_on_one_interval() {
        // K15 integrates degree <= 22 exactly
        let r = integrate(
            |x| x.powi(10) - 3.0 * x.powi(3),
            0.0,
            2.0,
            Tolerance::relative(1e-14),
        )
        .unwrap();
        let exact = 2f64.powi(11) / 11.0 - 3.0 * 16.0 / 4.0;
        assert!((r.value - exact).abs() < 1e-12 * exact.abs());
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn smooth_transcendental() {
        let r = integrate(f64::sin, 0.0, PI, Tolerance::relative(1e-13)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x| (-x * x).exp(), -8.0, 8.0, Tolerance::relative(1e-13)).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn kink_is_refined() {
        let r = integrate(|x| (x - 0.3).abs(), 0.0, 1.0, Tolerance::absolute(1e-12)).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-12);
        assert!(r.intervals > 1);
    }

    #[test]
    fn reversed_and_empty_ranges() {
        let r = integrate(|x| x, 1.0, 0.0, Tolerance::relative(1e-12)).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
        assert_eq!(
            integrate(|x| x, 2.0, 2.0, Tolerance::relative(1e-12))
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-12,
            max_intervals: 8,
        };
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
