//! Reproducible sampling of curves and curve pairs.
//!
//! Every draw is a pure function of a [`SeedSpec`]: the master seed keys a
//! ChaCha8 generator and the stream index selects one of its 2⁶⁴ independent
//! keystreams. Nothing is shared between samples, so any worker can produce
//! any sample.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curve::{isometric_dim, SobolevOrder, TrigCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Sub-seed `k` of this seed. Children of distinct seeds (or distinct `k`)
    /// land on unrelated keys.
    pub fn child(&self, k: u64) -> SeedSpec {
        SeedSpec {
            master_seed: splitmix64(
                self.master_seed
                    ^ splitmix64(self.stream_index.wrapping_add(0x5851_F42D_4C95_7F2D)),
            ),
            stream_index: k,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePair {
    pub f: TrigCurve,
    pub g: TrigCurve,
}

/// Uniform point in the Euclidean ball of `radius` in `ℝ^dim`: normalized
/// Gaussian direction, radius scaled by `U^{1/dim}`.
pub fn uniform_ball_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let mut u: Vec<f64> = Vec::with_capacity(dim);
    let norm = loop {
        u.clear();
        u.extend((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            break n;
        }
    };
    let uniform: f64 = rng.random();
    let scale = radius * uniform.powf(1.0 / dim as f64) / norm;
    u.iter_mut().for_each(|v| *v *= scale);
    u
}

/// Curve drawn uniformly from the unit ball of the `W₂ʳ` metric.
pub fn sample_unit_ball_curve(degree: usize, r: SobolevOrder, seed: SeedSpec) -> TrigCurve {
    let mut rng = seed.rng();
    let u = uniform_ball_point(&mut rng, isometric_dim(degree), 1.0);
    TrigCurve::from_isometric(degree, r, &u)
}

/// Independent uniform curves `f`, `g` from sub-seeds 0 and 1.
pub fn sample_pair(degree: usize, r: SobolevOrder, seed: SeedSpec) -> CurvePair {
    CurvePair {
        f: sample_unit_ball_curve(degree, r, seed.child(0)),
        g: sample_unit_ball_curve(degree, r, seed.child(1)),
    }
}

/// Pair with density proportional to `max(‖f‖, ‖g‖)^k` on the product of
/// unit balls, by rejection from [`sample_pair`]. The first attempt uses
/// `seed` itself, so `k = 0` reproduces `sample_pair` exactly.
pub fn sample_max_norm_weighted_pair(
    degree: usize,
    r: SobolevOrder,
    k: f64,
    seed: SeedSpec,
) -> Result<CurvePair> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Precondition(format!(
            "weight exponent must be finite and >= 0, got {k}"
        )));
    }
    for attempt in 0u64.. {
        let s = if attempt == 0 {
            seed
        } else {
            seed.child(attempt + 2)
        };
        let pair = sample_pair(degree, r, s);
        if k == 0.0 {
            return Ok(pair);
        }
        let m = pair.f.norm(r).max(pair.g.norm(r));
        let u: f64 = s.child(2).rng().random();
        if u < m.powf(k) {
            return Ok(pair);
        }
    }
    unreachable!("the attempt counter is unbounded")
}

// ---------------------------------------------------------------------------
// The incidence fiber L(0,0) = {(f, g) : f(0) = g(0)}

/// Orthonormal basis (in isometric pair coordinates) of the codimension-2
/// subspace `f(0) = g(0)` of the `L₂` pair space.
#[derive(Debug, Clone)]
pub struct FiberBasis {
    degree: usize,
    normals: [Vec<f64>; 2],
    basis: Vec<Vec<f64>>,
}

impl FiberBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Precondition("fiber sampling needs N >= 1".into()));
        }
        let half = isometric_dim(degree);
        let dim = 2 * half;
        // f(0).x - g(0).x and f(0).y - g(0).y as linear forms
        let mut nx = vec![0.0; dim];
        let mut ny = vec![0.0; dim];
        for (offset, sign) in [(0, 1.0), (half, -1.0)] {
            nx[offset] = sign * std::f64::consts::FRAC_1_SQRT_2;
            ny[offset + 1] = sign * std::f64::consts::FRAC_1_SQRT_2;
            for j in 0..degree {
                nx[offset + 2 + 4 * j] = sign;
                ny[offset + 4 + 4 * j] = sign;
            }
        }
        let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let candidates = [nx, ny].into_iter().chain((0..dim).map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        }));
        for mut v in candidates {
            // two Gram–Schmidt passes
            for _ in 0..2 {
                for b in &accepted {
                    let d = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                }
            }
            let n = dot(&v, &v).sqrt();
            if n > 1e-8 {
                v.iter_mut().for_each(|x| *x /= n);
                accepted.push(v);
            }
            if accepted.len() == dim {
                break;
            }
        }
        assert_eq!(accepted.len(), dim, "Gram-Schmidt must span the pair space");
        let basis = accepted.split_off(2);
        let mut it = accepted.into_iter();
        let normals = [it.next().unwrap(), it.next().unwrap()];
        Ok(FiberBasis {
            degree,
            normals,
            basis,
        })
    }

    /// Shared instance per degree.
    pub fn cached(degree: usize) -> Result<Arc<FiberBasis>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FiberBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().expect("cache lock").get(&degree) {
            return Ok(b.clone());
        }
        let b = Arc::new(FiberBasis::new(degree)?);
        cache.lock().expect("cache lock").insert(degree, b.clone());
        Ok(b)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension `8N + 2` of the fiber.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn normals(&self) -> &[Vec<f64>; 2] {
        &self.normals
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Radius of the ball in the fiber that contains `L(0,0) ∩ B²(N,1)`.
    pub const SEARCH_RADIUS: f64 = std::f64::consts::SQRT_2;

    /// One rejection attempt: a uniform point of the `√2`-ball of the fiber,
    /// kept only if both curves lie in the unit ball.
    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<CurvePair> {
        let coords = uniform_ball_point(rng, self.dim(), Self::SEARCH_RADIUS);
        let half = isometric_dim(self.degree);
        let mut point = vec![0.0; 2 * half];
        for (c, b) in coords.iter().zip(&self.basis) {
            point.iter_mut().zip(b).for_each(|(p, v)| *p += c * v);
        }
        let (uf, ug) = point.split_at(half);
        if dot(uf, uf) > 1.0 || dot(ug, ug) > 1.0 {
            return None;
        }
        Some(CurvePair {
            f: TrigCurve::from_isometric(self.degree, SobolevOrder::L2, uf),
            g: TrigCurve::from_isometric(self.degree, SobolevOrder::L2, ug),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct FiberDraw {
    pub pair: CurvePair,
    pub attempts: u64,
}

impl FiberDraw {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// A pair uniform on `L(0,0) ∩ B²(N,1)` (`L₂` metric), by rejection.
pub fn sample_fiber_pair(degree: usize, seed: SeedSpec) -> Result<FiberDraw> {
    let basis = FiberBasis::cached(degree)?;
    let mut rng = seed.rng();
    let mut attempts = 0;
    loop {
        attempts += 1;
        if let Some(pair) = basis.attempt(&mut rng) {
            return Ok(FiberDraw { pair, attempts });
        }
    }
}
