//! Exact rational evaluation of the mean intersection number.
//!
//! For degree `N` and Sobolev order `r`, with `τⱼ = Σ_{q≤r} j^{2q}`,
//! `μ(N) = 1 + 2Σ 1/τⱼ` and `λᵣ(N)² = Σ j²/τⱼ`, the average number of
//! intersection points of two curves drawn from the unit ball is
//!
//! ```text
//! 2^{8N+3} λᵣ(N)² ((2N)!)⁴ (2N+1) / ( μ(N) ((4N+1)!)² )
//! ```
//!
//! which for `r = 0` (`μ = 2N+1`, `λ² = 1+4+…+N²`) collapses to
//! `2^{8N+3} ((2N)!)⁴ (1+4+…+N²) / ((4N+1)!)²`. Both forms are kept so they
//! can be checked against each other.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::curve::SobolevOrder;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        Ok(ExactRational(BigRational::new(numerator, denominator)))
    }

    pub fn from_integer<T: Into<BigInt>>(n: T) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn recip(&self) -> Self {
        ExactRational(self.0.recip())
    }

    /// Nearest-ish `f64`, within one unit in the last place.
    ///
    /// Numerator and denominator are brought to a common binary scale before
    /// any float conversion, so huge factorial ratios never overflow.
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.numerator(), self.denominator())
    }
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let n = num.magnitude();
    let d = den.magnitude();
    // aim for a quotient with 66 significant bits
    let shift = 66 + d.bits() as i64 - n.bits() as i64;
    let (scaled_n, scaled_d): (BigUint, BigUint) = if shift >= 0 {
        (n << shift as u64, d.clone())
    } else {
        (n.clone(), d << (-shift) as u64)
    };
    let (q, rem) = scaled_n.div_rem(&scaled_d);
    let mut q = q.to_u128().expect("quotient has at most 67 bits");
    if !rem.is_zero() {
        // sticky bit, far below the rounding position
        q |= 1;
    }
    let mag = ldexp(q as f64, -shift);
    if negative {
        -mag
    } else {
        mag
    }
}

fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator().is_one() {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), self.denominator())
        }
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        ExactRational(r)
    }
}

macro_rules! forward_op {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
    };
}

forward_op!(Add, add);
forward_op!(Sub, sub);
forward_op!(Mul, mul);
forward_op!(Div, div);

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ExactRational", 2)?;
        st.serialize_field("numerator", &self.numerator().to_string())?;
        st.serialize_field("denominator", &self.denominator().to_string())?;
        st.end()
    }
}

/// An exact value together with its float rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanValue {
    pub exact: ExactRational,
    pub approx: f64,
}

impl MeanValue {
    pub fn new(exact: ExactRational) -> Self {
        let approx = exact.to_f64();
        MeanValue { exact, approx }
    }
}

impl Serialize for MeanValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MeanValue", 3)?;
        st.serialize_field("numerator", &self.exact.numerator().to_string())?;
        st.serialize_field("denominator", &self.exact.denominator().to_string())?;
        st.serialize_field("approx", &self.approx)?;
        st.end()
    }
}

// ---------------------------------------------------------------------------
// Building blocks

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `τⱼ = 1 + j² + … + j^{2r}`.
pub fn tau(j: u64, r: SobolevOrder) -> BigUint {
    assert!(j >= 1, "tau is defined for j >= 1");
    let j2 = BigUint::from(j) * j;
    let mut term = BigUint::one();
    let mut sum = BigUint::one();
    for _ in 0..r.0 {
        term *= &j2;
        sum += &term;
    }
    sum
}

fn rational(n: BigUint, d: BigUint) -> ExactRational {
    ExactRational(BigRational::new(n.into(), d.into()))
}

/// `μ(N) = 1 + 2 Σ_{j=1}^{N} 1/τⱼ`.
pub fn mu(n: u64, r: SobolevOrder) -> ExactRational {
    let sum = (1..=n).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::one(), tau(j, r).into())
    });
    ExactRational(BigRational::one() + sum * BigInt::from(2))
}

/// `λᵣ(N)² = Σ_{j=1}^{N} j²/τⱼ`.
pub fn lambda_sq(n: u64, r: SobolevOrder) -> ExactRational {
    ExactRational((1..=n).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::from(j * j), tau(j, r).into())
    }))
}

/// `π^k / k!` written as an exact coefficient times a power of `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMultiple {
    pub coefficient: ExactRational,
    pub pi_power: u32,
}

impl PiMultiple {
    pub fn to_f64(&self) -> f64 {
        self.coefficient.to_f64() * std::f64::consts::PI.powi(self.pi_power as i32)
    }

    pub fn squared(&self) -> PiMultiple {
        PiMultiple {
            coefficient: &self.coefficient * &self.coefficient,
            pi_power: 2 * self.pi_power,
        }
    }
}

/// Volume of the unit ball in `ℝ^{2k}`: `π^k / k!`.
pub fn ball_volume_even(k: u32) -> Result<PiMultiple> {
    if k == 0 {
        return Err(Error::Precondition("ball_volume_even needs k >= 1".into()));
    }
    Ok(PiMultiple {
        coefficient: rational(BigUint::one(), factorial(k as u64)),
        pi_power: k,
    })
}

/// Volume of the space of pairs `B(N,1) × B(N,1)`: `(π^{2N+1}/(2N+1)!)²`.
pub fn pair_space_volume(n: u64) -> PiMultiple {
    ball_volume_even(2 * n as u32 + 1)
        .expect("2N+1 >= 1")
        .squared()
}

/// `2^{8N+3} ((2N)!)⁴ / ((4N+1)!)²`, shared by both closed forms.
fn common_factor(n: u64) -> ExactRational {
    let num = (BigUint::one() << (8 * n + 3)) * factorial(2 * n).pow(4);
    let den = factorial(4 * n + 1).pow(2);
    rational(num, den)
}

/// The `L₂` closed form `2^{8N+3}((2N)!)⁴(1+4+…+N²)/((4N+1)!)²`, evaluated
/// independently of `μ` and `λᵣ`.
pub fn mean_intersections_l2(n: u64) -> ExactRational {
    let squares = BigUint::from(n) * (n + 1) * (2 * n + 1) / 6u32;
    common_factor(n) * rational(squares, BigUint::one())
}

/// Mean intersection number for the unit ball of the `W₂ʳ` metric.
pub fn mean_intersections_exact(n: u64, r: SobolevOrder) -> MeanValue {
    let odd = rational(BigUint::from(2 * n + 1), BigUint::one());
    let value = common_factor(n) * lambda_sq(n, r) * odd / mu(n, r);
    MeanValue::new(value)
}

/// Ratio of the `L₂` mean to its leading asymptote `π N²/3`.
pub fn asymptote_ratio(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("asymptote_ratio needs N >= 1".into()));
    }
    let mean = mean_intersections_exact(n, SobolevOrder::L2).approx;
    Ok(mean / (std::f64::consts::PI / 3.0 * (n as f64).powi(2)))
}

// ---------------------------------------------------------------------------
// Large-N behaviour for r >= 1

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub exact: ExactRational,
    pub approx: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevLimitReport {
    pub r: u32,
    pub rows: Vec<LimitRow>,
    /// `2π λᵣ(∞)² / μ(∞)`; `None` for `r = 1` where `λᵣ(∞)²` diverges.
    pub limit: Option<f64>,
    /// Relative bound on the truncation error of the two series.
    pub tail_bound: Option<f64>,
    pub ratio_to_two_pi_over_r_squared: Option<f64>,
    pub ratio_to_two_pi_over_r_plus_one: Option<f64>,
}

/// Evaluates the mean over `n_list` and, for `r ≥ 2`, the candidate limit
/// `2π λᵣ(∞)²/μ(∞)` with its two comparison ratios.
pub fn sobolev_limit_report(r: SobolevOrder, n_list: &[u64]) -> Result<SobolevLimitReport> {
    if r.0 == 0 {
        return Err(Error::Precondition(
            "the L2 mean grows without bound; no limit report for r = 0".into(),
        ));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "N list must be non-empty and strictly ascending".into(),
        ));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            let m = mean_intersections_exact(n, r);
            LimitRow {
                n,
                exact: m.exact,
                approx: m.approx,
            }
        })
        .collect();
    let mut report = SobolevLimitReport {
        r: r.0,
        rows,
        limit: None,
        tail_bound: None,
        ratio_to_two_pi_over_r_squared: None,
        ratio_to_two_pi_over_r_plus_one: None,
    };
    if r.0 >= 2 {
        let lam = weighted_series(2, r, 1e-12)?;
        let inv = weighted_series(0, r, 1e-12)?;
        let mu_inf = 1.0 + 2.0 * inv.value;
        let limit = std::f64::consts::TAU * lam.value / mu_inf;
        let rf = r.0 as f64;
        report.limit = Some(limit);
        report.tail_bound = Some(lam.relative_bound + inv.relative_bound);
        report.ratio_to_two_pi_over_r_squared = Some(limit / (std::f64::consts::TAU / (rf * rf)));
        report.ratio_to_two_pi_over_r_plus_one = Some(limit / (std::f64::consts::TAU / (rf + 1.0)));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: u64,
    pub relative_bound: f64,
}

/// `Σ_{j≥1} j^p / τⱼ(r)` for a convergent choice (`2r - p ≥ 2`).
///
/// Terms up to `J` are summed directly; the tail uses Euler–Maclaurin,
/// `Σ_{j>J} f(j) ≈ ∫_J^∞ f − f(J)/2 − f'(J)/12 + f'''(J)/720`. `J` doubles
/// until the first omitted correction, bounded by `|f⁽⁵⁾(J)|/30240`, plus
/// the quadrature error falls below `rel_tol` of the total.
pub fn weighted_series(p: u32, r: SobolevOrder, rel_tol: f64) -> Result<SeriesSum> {
    if 2 * r.0 < p + 2 {
        return Err(Error::Precondition(format!(
            "series of j^{p}/tau_j diverges for r = {}",
            r.0
        )));
    }
    let term = |j: f64| j.powi(p as i32) / r.weight_f(j);
    let mut cutoff: u64 = 16;
    let mut head = 0.0;
    let mut summed: u64 = 0;
    loop {
        // Kahan-free is fine: terms are positive and decreasing
        for j in (summed + 1)..=cutoff {
            head += term(j as f64);
        }
        summed = cutoff;
        let jc = cutoff as f64;
        let d = taylor_derivatives(p, r, jc);
        let tail_integral = tail_integral(p, r, jc)?;
        let tail = tail_integral.value - d[0] / 2.0 - d[1] / 12.0 + d[3] / 720.0;
        let total = head + tail;
        let bound = d[5].abs() / 30240.0 + tail_integral.error;
        if bound <= rel_tol * total.abs() || cutoff >= 1 << 24 {
            return Ok(SeriesSum {
                value: total,
                terms: cutoff,
                relative_bound: bound / total.abs(),
            });
        }
        cutoff *= 2;
    }
}

impl SobolevOrder {
    /// `τ(x) = Σ_{q≤r} x^{2q}` at real `x`.
    fn weight_f(self, x: f64) -> f64 {
        let x2 = x * x;
        let mut t = 1.0;
        let mut s = 1.0;
        for _ in 0..self.0 {
            t *= x2;
            s += t;
        }
        s
    }
}

/// `f^{(k)}(x)` for `k = 0..=5` where `f(x) = x^p / τ(x)`.
///
/// Works with `g(s) = f(x(1+s))`, whose Taylor coefficients stay O(1) after
/// dividing numerator and denominator by `x^{2r}`.
fn taylor_derivatives(p: u32, r: SobolevOrder, x: f64) -> [f64; 6] {
    const K: usize = 6;
    // (1+s)^n truncated
    let binom_series = |n: u32| -> [f64; K] {
        let mut c = [0.0; K];
        let mut v = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k as u32 > n {
                break;
            }
            *ck = v;
            v = v * (n - k as u32) as f64 / (k as f64 + 1.0);
        }
        c
    };
    let two_r = 2 * r.0;
    let mut num = binom_series(p);
    let scale = x.powi(p as i32 - two_r as i32);
    num.iter_mut().for_each(|c| *c *= scale);
    let mut den = [0.0; K];
    for q in 0..=r.0 {
        let w = x.powi(2 * q as i32 - two_r as i32);
        for (d, b) in den.iter_mut().zip(binom_series(2 * q)) {
            *d += w * b;
        }
    }
    // series division num / den
    let mut g = [0.0; K];
    for k in 0..K {
        let mut acc = num[k];
        for i in 0..k {
            acc -= g[i] * den[k - i];
        }
        g[k] = acc / den[0];
    }
    let mut out = [0.0; K];
    let mut fact = 1.0;
    for k in 0..K {
        if k > 0 {
            fact *= k as f64;
        }
        out[k] = g[k] * fact / x.powi(k as i32);
    }
    out
}

/// `∫_x^∞ t^p/τ(t) dt` through `t = x/u`, which maps the tail to `(0, 1]`.
fn tail_integral(p: u32, r: SobolevOrder, x: f64) -> Result<crate::quadrature::QuadResult> {
    let two_r = 2 * r.0 as i32;
    let p = p as i32;
    let integrand = move |u: f64| {
        if u <= 0.0 {
            // only the q = r term of the denominator survives at u = 0
            return if two_r - p - 2 == 0 {
                x.powi(p + 1 - two_r)
            } else {
                0.0
            };
        }
        let num = x.powi(p + 1 - two_r) * u.powi(two_r - p - 2);
        let den: f64 = (0..=two_r / 2)
            .map(|q| x.powi(2 * q - two_r) * u.powi(two_r - 2 * q))
            .sum();
        num / den
    };
    integrate(integrand, 0.0, 1.0, Tolerance::relative(1e-14))
}
