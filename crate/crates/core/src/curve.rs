//! Degree-`N` trigonometric plane curves and their `W₂ʳ` metric.
//!
//! A curve is stored by its Fourier coefficients
//!
//! ```text
//! x(φ) = a₀ + Σⱼ aⱼ cos jφ + bⱼ sin jφ
//! y(φ) = ã₀ + Σⱼ ãⱼ cos jφ + b̃ⱼ sin jφ        j = 1..N
//! ```
//!
//! The `W₂ʳ` dot product weights the constant terms by 2 and every
//! frequency-`j` coefficient by `τⱼ = 1 + j² + … + j²ʳ`. `r = 0` is the plain
//! `L₂` structure with all `τⱼ = 1`.

use std::f64::consts::TAU;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Sobolev order `r` of the coefficient metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SobolevOrder(pub u32);

impl SobolevOrder {
    pub const L2: SobolevOrder = SobolevOrder(0);

    /// `τⱼ = Σ_{q=0}^{r} j^{2q}` as a float. See [`crate::exact::tau`] for the
    /// exact integer.
    pub fn weight(self, j: usize) -> f64 {
        let j2 = (j * j) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for _ in 0..self.0 {
            term *= j2;
            sum += term;
        }
        sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanePoint { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Fourier coefficients of a trigonometric plane curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCurve {
    xa: Vec<f64>,
    xb: Vec<f64>,
    ya: Vec<f64>,
    yb: Vec<f64>,
}

impl TrigCurve {
    /// `xa`, `ya` hold `a₀..a_N`; `xb`, `yb` hold `b₁..b_N`.
    pub fn new(xa: Vec<f64>, xb: Vec<f64>, ya: Vec<f64>, yb: Vec<f64>) -> Result<Self> {
        let n = xb.len();
        if xa.len() != n + 1 || ya.len() != n + 1 || yb.len() != n {
            return Err(Error::InvalidCurve(format!(
                "coefficient lengths (xa {}, xb {}, ya {}, yb {}) do not describe one degree",
                xa.len(),
                xb.len(),
                ya.len(),
                yb.len()
            )));
        }
        if xa
            .iter()
            .chain(&xb)
            .chain(&ya)
            .chain(&yb)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidCurve("non-finite coefficient".into()));
        }
        Ok(TrigCurve { xa, xb, ya, yb })
    }

    pub fn zero(degree: usize) -> Self {
        TrigCurve {
            xa: vec![0.0; degree + 1],
            xb: vec![0.0; degree],
            ya: vec![0.0; degree + 1],
            yb: vec![0.0; degree],
        }
    }

    /// Circle of the given radius and centre, padded to `degree ≥ 1`.
    pub fn circle(degree: usize, center: PlanePoint, radius: f64) -> Self {
        assert!(degree >= 1, "a circle needs degree >= 1");
        let mut c = TrigCurve::zero(degree);
        c.xa[0] = center.x;
        c.ya[0] = center.y;
        c.xa[1] = radius;
        c.yb[0] = radius;
        c
    }

    pub fn degree(&self) -> usize {
        self.xb.len()
    }

    pub fn xa(&self) -> &[f64] {
        &self.xa
    }

    pub fn xb(&self) -> &[f64] {
        &self.xb
    }

    pub fn ya(&self) -> &[f64] {
        &self.ya
    }

    pub fn yb(&self) -> &[f64] {
        &self.yb
    }

    /// True when every non-constant coefficient vanishes.
    pub fn is_constant(&self) -> bool {
        self.xa[1..]
            .iter()
            .chain(&self.xb)
            .chain(&self.ya[1..])
            .chain(&self.yb)
            .all(|&v| v == 0.0)
    }

    pub fn evaluate(&self, phi: f64) -> PlanePoint {
        self.evaluate_with_derivative(phi).0
    }

    pub fn derivative(&self, phi: f64) -> PlanePoint {
        self.evaluate_with_derivative(phi).1
    }

    /// Position and velocity at `phi`, sharing one harmonic recurrence.
    pub fn evaluate_with_derivative(&self, phi: f64) -> (PlanePoint, PlanePoint) {
        let phi = phi.rem_euclid(TAU);
        let (s1, c1) = phi.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut p = PlanePoint::new(self.xa[0], self.ya[0]);
        let mut v = PlanePoint::default();
        for j in 1..=self.degree() {
            // cos jφ, sin jφ by rotation; accurate enough for the degrees used here
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            let (ax, bx, ay, by) = (self.xa[j], self.xb[j - 1], self.ya[j], self.yb[j - 1]);
            p.x += ax * c + bx * s;
            p.y += ay * c + by * s;
            let jf = j as f64;
            v.x += jf * (bx * c - ax * s);
            v.y += jf * (by * c - ay * s);
        }
        (p, v)
    }

    /// `W₂ʳ` dot product. Errors on degree mismatch.
    pub fn inner_product(&self, other: &TrigCurve, r: SobolevOrder) -> Result<f64> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        let mut sum = 2.0 * (self.xa[0] * other.xa[0] + self.ya[0] * other.ya[0]);
        for j in 1..=self.degree() {
            let t = self.xa[j] * other.xa[j]
                + self.xb[j - 1] * other.xb[j - 1]
                + self.ya[j] * other.ya[j]
                + self.yb[j - 1] * other.yb[j - 1];
            sum += r.weight(j) * t;
        }
        Ok(sum)
    }

    pub fn norm(&self, r: SobolevOrder) -> f64 {
        self.inner_product(self, r)
            .expect("a curve has the degree of itself")
            .sqrt()
    }

    /// A Lipschitz constant of `φ ↦ evaluate(φ)`:
    /// `Σⱼ j (|(aⱼ, bⱼ)| + |(ãⱼ, b̃ⱼ)|)`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.harmonic_bound(1)
    }

    /// Upper bound on `|f''(φ)|`, i.e. the Lipschitz constant of the velocity.
    pub fn curvature_bound(&self) -> f64 {
        self.harmonic_bound(2)
    }

    fn harmonic_bound(&self, power: i32) -> f64 {
        (1..=self.degree())
            .map(|j| {
                (j as f64).powi(power)
                    * (self.xa[j].hypot(self.xb[j - 1]) + self.ya[j].hypot(self.yb[j - 1]))
            })
            .sum()
    }

    /// Coordinates in which the `W₂ʳ` norm is the Euclidean norm.
    ///
    /// Layout: `[√2 a₀, √2 ã₀, then √τⱼ·(aⱼ, bⱼ, ãⱼ, b̃ⱼ) for j = 1..N]`.
    pub fn to_isometric(&self, r: SobolevOrder) -> Vec<f64> {
        let mut u = Vec::with_capacity(isometric_dim(self.degree()));
        u.push(self.xa[0] * std::f64::consts::SQRT_2);
        u.push(self.ya[0] * std::f64::consts::SQRT_2);
        for j in 1..=self.degree() {
            let w = r.weight(j).sqrt();
            u.extend([
                self.xa[j] * w,
                self.xb[j - 1] * w,
                self.ya[j] * w,
                self.yb[j - 1] * w,
            ]);
        }
        u
    }

    /// Inverse of [`TrigCurve::to_isometric`].
    pub fn from_isometric(degree: usize, r: SobolevOrder, u: &[f64]) -> Self {
        assert_eq!(u.len(), isometric_dim(degree), "isometric vector length");
        let mut c = TrigCurve::zero(degree);
        c.xa[0] = u[0] / std::f64::consts::SQRT_2;
        c.ya[0] = u[1] / std::f64::consts::SQRT_2;
        for j in 1..=degree {
            let w = r.weight(j).sqrt();
            let block = &u[2 + 4 * (j - 1)..2 + 4 * j];
            c.xa[j] = block[0] / w;
            c.xb[j - 1] = block[1] / w;
            c.ya[j] = block[2] / w;
            c.yb[j - 1] = block[3] / w;
        }
        c
    }

    /// Applies the plane rotation by `theta` to the image of the curve.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let rot = |x: &[f64], y: &[f64]| -> (Vec<f64>, Vec<f64>) {
            x.iter()
                .zip(y)
                .map(|(&x, &y)| (c * x - s * y, s * x + c * y))
                .unzip()
        };
        let (xa, ya) = rot(&self.xa, &self.ya);
        let (xb, yb) = rot(&self.xb, &self.yb);
        TrigCurve { xa, xb, ya, yb }
    }

    pub fn translated(&self, by: PlanePoint) -> Self {
        let mut c = self.clone();
        c.xa[0] += by.x;
        c.ya[0] += by.y;
        c
    }

    /// Reparameterizes by `φ ↦ φ + shift` (rotation of the source circle).
    pub fn phase_shifted(&self, shift: f64) -> Self {
        let mut c = self.clone();
        for j in 1..=self.degree() {
            let (s, co) = (j as f64 * shift).sin_cos();
            let (a, b) = (self.xa[j], self.xb[j - 1]);
            c.xa[j] = a * co + b * s;
            c.xb[j - 1] = b * co - a * s;
            let (a, b) = (self.ya[j], self.yb[j - 1]);
            c.ya[j] = a * co + b * s;
            c.yb[j - 1] = b * co - a * s;
        }
        c
    }
}

/// Real dimension `4N + 2` of the space of degree-`N` curves.
pub fn isometric_dim(degree: usize) -> usize {
    4 * degree + 2
}

/// `μ(N) = 1 + 2 Σⱼ 1/τⱼ` in floating point.
pub fn mu_f64(degree: usize, r: SobolevOrder) -> f64 {
    1.0 + 2.0 * (1..=degree).map(|j| 1.0 / r.weight(j)).sum::<f64>()
}

/// Radius `√(μ(N)/2)` of the disc of values `f(φ)` over the unit ball;
/// `√((2N+1)/2)` for `L₂`.
pub fn point_radius_bound(degree: usize, r: SobolevOrder) -> f64 {
    (mu_f64(degree, r) / 2.0).sqrt()
}

// ---------------------------------------------------------------------------
// JSON curve file

/// On-disk curve: `{"degree", "r", "x": {"a", "b"}, "y": {"a", "b"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub degree: usize,
    pub r: SobolevOrder,
    pub x: CoefficientBlock,
    pub y: CoefficientBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBlock {
    #[serde(serialize_with = "serialize_full_precision")]
    pub a: Vec<f64>,
    #[serde(serialize_with = "serialize_full_precision")]
    pub b: Vec<f64>,
}

/// 17 significant digits, enough to round-trip any `f64`.
fn serialize_full_precision<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::Error as _;
    let raw: Result<Vec<Box<RawValue>>, _> = v
        .iter()
        .map(|x| {
            if !x.is_finite() {
                return Err(S::Error::custom("non-finite coefficient"));
            }
            RawValue::from_string(format!("{x:.16e}")).map_err(S::Error::custom)
        })
        .collect();
    s.collect_seq(raw?)
}

impl CurveFile {
    pub fn new(curve: &TrigCurve, r: SobolevOrder) -> Self {
        CurveFile {
            degree: curve.degree(),
            r,
            x: CoefficientBlock {
                a: curve.xa.clone(),
                b: curve.xb.clone(),
            },
            y: CoefficientBlock {
                a: curve.ya.clone(),
                b: curve.yb.clone(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates; schema errors carry serde's line/column context.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(text)?;
        file.curve()?;
        Ok(file)
    }

    pub fn curve(&self) -> Result<TrigCurve> {
        let c = TrigCurve::new(
            self.x.a.clone(),
            self.x.b.clone(),
            self.y.a.clone(),
            self.y.b.clone(),
        )?;
        if c.degree() != self.degree {
            return Err(Error::InvalidCurve(format!(
                "declared degree {} but coefficients have degree {}",
                self.degree,
                c.degree()
            )));
        }
        Ok(c)
    }
}

impl Serialize for TrigCurve {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CurveFile::new(self, SobolevOrder::L2).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigCurve {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        CurveFile::deserialize(d)?.curve().map_err(D::Error::custom)
    }
}
