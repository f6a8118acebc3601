//! Numeric reproduction of the derivation of the `L₂` mean.
//!
//! The mean is assembled from independent pieces, each checked against its
//! closed form:
//!
//! * `k(A) = √(1 - 2A²/μ(N))`, the radius of the slice `{f ∈ B(N,1) : f(0) = U}`
//!   with `|U| = A`;
//! * `Ξ(A)`, the integral of `|f'(0)|` over that slice, by quadrature of
//!   `∫₀^{k} 2πρ·λρ·π^{2N-1}/(2N-1)!·(k²-ρ²)^{2N-1} dρ` and in closed form
//!   `π^{2N} 2^{4N} k^{4N+1} λ (2N)!/(4N+1)!`;
//! * the Buffon factor `2/π = mean |sin θ|`;
//! * the projection factor `4/(2N+1)` between the fiber measure and the
//!   product of slice measure and `dx dy`;
//! * `((2N+1)/2) ∫₀^{π/2} sin γ cos^{8N+3} γ dγ = 1/8`.
//!
//! [`assemble_mean_from_chain`] multiplies them back together, and
//! [`fiber_mc_check`] estimates the same fiber integral by plain Monte Carlo
//! on `L(0,0)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::curve::{mu_f64, point_radius_bound, SobolevOrder, TrigCurve};
use crate::error::{Error, Result};
use crate::exact::{lambda_sq, mean_intersections_exact};
use crate::exec::Execution;
use crate::quadrature::{integrate, Tolerance};
use crate::sampling::{FiberBasis, SeedSpec};

pub const XI_QUAD_TOL: f64 = 1e-10;
pub const XI_AGREEMENT: f64 = 1e-8;
pub const EIGHT_TOL: f64 = 1e-12;
pub const BUFFON_TOL: f64 = 1e-12;
pub const ASSEMBLY_TOL: f64 = 1e-8;
pub const ROUTE_AGREEMENT: f64 = 1e-10;
pub const FIBER_SIGMAS: f64 = 3.0;
/// Fiber checks below this acceptance rate exceed the sampling budget.
pub const MIN_FIBER_ACCEPTANCE: f64 = 1e-4;

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn lambda_f64(n: usize) -> f64 {
    lambda_sq(n as u64, SobolevOrder::L2).to_f64().sqrt()
}

/// Radius `√(1 - 2A²/μ(N))` of the slice of curves with `|f(0)| = A`.
pub fn k_of_a(a: f64, degree: usize, r: SobolevOrder) -> Result<f64> {
    let max = point_radius_bound(degree, r);
    if !(0.0..=max * (1.0 + 4.0 * f64::EPSILON)).contains(&a) {
        return Err(Error::Precondition(format!("A = {a} outside [0, {max}]")));
    }
    Ok((1.0 - 2.0 * a * a / mu_f64(degree, r)).max(0.0).sqrt())
}

fn check_xi_args(a: f64, degree: usize) -> Result<f64> {
    if degree == 0 {
        return Err(Error::Precondition("Xi needs N >= 1".into()));
    }
    k_of_a(a, degree, SobolevOrder::L2)
}

/// `Ξ(A) = π^{2N} 2^{4N} k(A)^{4N+1} λ(N) (2N)! / (4N+1)!`, in log space.
pub fn xi_closed_form(a: f64, degree: usize) -> Result<f64> {
    let k = check_xi_args(a, degree)?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let n = degree as u64;
    let ln = 2.0 * n as f64 * PI.ln()
        + 4.0 * n as f64 * 2f64.ln()
        + (4 * n + 1) as f64 * k.ln()
        + lambda_f64(degree).ln()
        + ln_factorial(2 * n)
        - ln_factorial(4 * n + 1);
    Ok(ln.exp())
}

/// `Ξ(A)` by adaptive quadrature over the radius `ρ` of the `(b, b̃)` disc.
pub fn xi_quadrature(a: f64, degree: usize) -> Result<f64> {
    let k = check_xi_args(a, degree)?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let n = degree as u64;
    // 2π · λ · π^{2N-1}/(2N-1)!, the volume of the unit (4N-2)-ball included
    let prefactor = (TAU.ln() + lambda_f64(degree).ln() + (2 * n - 1) as f64 * PI.ln()
        - ln_factorial(2 * n - 1))
    .exp();
    let k2 = k * k;
    let power = (2 * n - 1) as i32;
    let integrand = |rho: f64| prefactor * rho * rho * (k2 - rho * rho).max(0.0).powi(power);
    Ok(integrate(integrand, 0.0, k, Tolerance::relative(XI_QUAD_TOL))?.value)
}

/// Left side of `((2N+1)/2) ∫₀^{π/2} sin γ cos^{8N+3} γ dγ = 1/8`, by quadrature.
pub fn eight_integral(degree: usize) -> Result<f64> {
    let p = (8 * degree + 3) as i32;
    let q = integrate(
        |g: f64| g.sin() * g.cos().powi(p),
        0.0,
        FRAC_PI_2,
        Tolerance::relative(1e-14),
    )?;
    Ok((2 * degree + 1) as f64 / 2.0 * q.value)
}

/// The same integral from the antiderivative `-cos^{8N+4}/(8N+4)`.
pub fn eight_integral_antiderivative(degree: usize) -> f64 {
    let p = (8 * degree + 4) as f64;
    let anti = |g: f64| -g.cos().powi(8 * degree as i32 + 4) / p;
    (2 * degree + 1) as f64 / 2.0 * (anti(FRAC_PI_2) - anti(0.0))
}

/// Mean of `|sin θ|` over `[0, 2π]` by quadrature.
pub fn buffon_average() -> Result<f64> {
    Ok(integrate(|t: f64| t.sin().abs(), 0.0, TAU, Tolerance::absolute(1e-15))?.value / TAU)
}

/// Means of `|sin θ|` over `[0, π]` and `[π, 2π]`.
pub fn buffon_halves() -> Result<(f64, f64)> {
    let tol = Tolerance::absolute(1e-15);
    let lo = integrate(|t: f64| t.sin().abs(), 0.0, PI, tol)?.value / PI;
    let hi = integrate(|t: f64| t.sin().abs(), PI, TAU, tol)?.value / PI;
    Ok((lo, hi))
}

/// Monte Carlo mean of `|sin θ|`, with its standard error.
pub fn buffon_monte_carlo(draws: u64, seed: SeedSpec) -> (f64, f64) {
    let mut rng = seed.rng();
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let v = (TAU * rng.random::<f64>()).sin().abs();
        s += v;
        s2 += v * v;
    }
    let n = draws as f64;
    let mean = s / n;
    let var = (s2 - s * s / n) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ratio of the fiber measure to (slice measure × `dx dy`), computed from the
/// pair `(½ + Σ cos jφ, 0)` for both curves: its squared norm over the square
/// of its value at 0. Equals `4/(2N+1)`.
pub fn projection_factor(degree: usize) -> f64 {
    let mut xa = vec![1.0; degree + 1];
    xa[0] = 0.5;
    let c = TrigCurve::new(
        xa,
        vec![0.0; degree],
        vec![0.0; degree + 1],
        vec![0.0; degree],
    )
    .expect("well-formed coefficients");
    let pair_norm_sq = 2.0 * c.inner_product(&c, SobolevOrder::L2).expect("same degree");
    let projected = c.evaluate(0.0).x;
    pair_norm_sq / (projected * projected)
}

/// Which route to use for `Ξ(A)` inside the assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiRoute {
    Quadrature,
    ClosedForm,
}

/// Reassembles the `L₂` mean: `∫₀^{R} 2πA Ξ(A)² dA` times
/// `(1/(2N+1))·(2/π)·(4/(2N+1))`, times `4π²`, over the pair-space volume.
pub fn assemble_mean_with(degree: usize, route: XiRoute) -> Result<f64> {
    if !(1..=8).contains(&degree) {
        return Err(Error::Precondition(format!(
            "chain assembly supports 1 <= N <= 8, got {degree}"
        )));
    }
    let radius = point_radius_bound(degree, SobolevOrder::L2);
    let xi = |a: f64| -> Result<f64> {
        // guard against A creeping past R in the last ulp
        let a = a.min(radius);
        match route {
            XiRoute::Quadrature => xi_quadrature(a, degree),
            XiRoute::ClosedForm => xi_closed_form(a, degree),
        }
    };
    let failure = std::cell::Cell::new(None);
    let outer = integrate(
        |a: f64| match xi(a) {
            Ok(x) => TAU * a * x * x,
            Err(e) => {
                failure.set(Some(e.to_string()));
                f64::NAN
            }
        },
        0.0,
        radius,
        Tolerance::relative(XI_QUAD_TOL),
    );
    if let Some(msg) = failure.take() {
        return Err(Error::Precondition(format!(
            "inner quadrature failed: {msg}"
        )));
    }
    let fiber_integral = outer?.value;
    let n = degree as u64;
    let odd = (2 * n + 1) as f64;
    let buffon = buffon_average()?;
    let ln_prefactor = (1.0 / odd).ln() + buffon.ln() + projection_factor(degree).ln();
    // volume of B²(N,1) = (π^{2N+1}/(2N+1)!)²
    let ln_volume = 2.0 * ((2 * n + 1) as f64 * PI.ln() - ln_factorial(2 * n + 1));
    Ok((ln_prefactor + fiber_integral.ln() + (4.0 * PI * PI).ln() - ln_volume).exp())
}

pub fn assemble_mean_from_chain(degree: usize) -> Result<f64> {
    assemble_mean_with(degree, XiRoute::Quadrature)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub attempts: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// Mean of `|det(f'(0), g'(0))|/(2N+1)` over accepted pairs.
    pub mean_integrand: f64,
    pub min_integrand: f64,
}

const FIBER_CHUNK: u64 = 4096;

/// Monte Carlo estimate of the mean intersection number from the integral of
/// `|det(f'(0), g'(0))|/(2N+1)` over `L(0,0) ∩ B²(N,1)`.
///
/// The fiber volume is estimated (acceptance rate × volume of the `√2`-ball
/// of dimension `8N+2`), not taken from the closed form. The standard error is
/// that of the per-attempt product, so it carries both factors.
pub fn fiber_mc_check(
    degree: usize,
    attempts: u64,
    seed: SeedSpec,
    exec: Execution,
) -> Result<FiberEstimate> {
    if !(1..=3).contains(&degree) {
        return Err(Error::Precondition(format!(
            "fiber check supports 1 <= N <= 3, got {degree}"
        )));
    }
    if attempts < 2 {
        return Err(Error::Precondition(
            "fiber check needs at least 2 attempts".into(),
        ));
    }
    let basis = FiberBasis::cached(degree)?;
    let odd = (2 * degree + 1) as f64;
    let chunks = attempts.div_ceil(FIBER_CHUNK);
    let partials = exec.map(0..chunks, |c| {
        let mut rng = seed.child(c).rng();
        let todo = FIBER_CHUNK.min(attempts - c * FIBER_CHUNK);
        let (mut acc, mut s, mut s2, mut min) = (0u64, 0.0, 0.0, f64::INFINITY);
        for _ in 0..todo {
            if let Some(pair) = basis.attempt(&mut rng) {
                let (df, dg) = (pair.f.derivative(0.0), pair.g.derivative(0.0));
                let h = (df.x * dg.y - df.y * dg.x).abs() / odd;
                acc += 1;
                s += h;
                s2 += h * h;
                min = min.min(h);
            }
        }
        (acc, s, s2, min)
    });
    let (mut accepted, mut sum, mut sum_sq, mut min_integrand) = (0u64, 0.0, 0.0, f64::INFINITY);
    for (a, s, s2, m) in partials {
        accepted += a;
        sum += s;
        sum_sq += s2;
        min_integrand = min_integrand.min(m);
    }
    let n = attempts as f64;
    let rate = accepted as f64 / n;
    if rate < MIN_FIBER_ACCEPTANCE {
        return Err(Error::AcceptanceTooLow {
            rate,
            min: MIN_FIBER_ACCEPTANCE,
        });
    }
    let dim = basis.dim() as u64;
    let half = dim / 2;
    // |B^{2m}(√2)| = (2π)^m / m!
    let ln_ball = half as f64 * TAU.ln() - ln_factorial(half);
    let d = degree as u64;
    let ln_volume = 2.0 * ((2 * d + 1) as f64 * PI.ln() - ln_factorial(2 * d + 1));
    let scale = (ln_ball + (4.0 * PI * PI).ln() - ln_volume).exp();
    let var_h = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    let mean_integrand = if accepted > 0 {
        sum / accepted as f64
    } else {
        0.0
    };
    Ok(FiberEstimate {
        estimate: scale * rate * mean_integrand,
        stderr: scale * (var_h / n).sqrt(),
        attempts,
        accepted,
        acceptance_rate: rate,
        mean_integrand,
        min_integrand: if accepted > 0 { min_integrand } else { 0.0 },
    })
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "bound", rename_all = "snake_case")]
pub enum Criterion {
    Relative(f64),
    Absolute(f64),
    /// `|numeric - closed| ≤ k·stderr`.
    Sigmas {
        k: f64,
        stderr: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub name: String,
    pub closed_form_value: f64,
    pub numeric_value: f64,
    pub relative_error: f64,
    pub criterion: Criterion,
    pub passed: bool,
}

impl ChainStep {
    pub fn new(name: impl Into<String>, closed: f64, numeric: f64, criterion: Criterion) -> Self {
        let abs = (numeric - closed).abs();
        let relative_error = if closed != 0.0 {
            abs / closed.abs()
        } else {
            abs
        };
        let passed = match criterion {
            Criterion::Relative(t) => relative_error <= t,
            Criterion::Absolute(t) => abs <= t,
            Criterion::Sigmas { k, stderr } => abs <= k * stderr,
        };
        ChainStep {
            name: name.into(),
            closed_form_value: closed,
            numeric_value: numeric,
            relative_error,
            criterion,
            passed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
}

impl ChainReport {
    pub fn all_passed(&self) -> bool {
        self.steps.iter().all(|s| s.passed)
    }

    pub fn push(&mut self, step: ChainStep) {
        self.steps.push(step);
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<28} {:>22} {:>22} {:>10}  {}\n",
            "step", "closed form", "numeric", "rel.err", "status"
        );
        for s in &self.steps {
            out.push_str(&format!(
                "{:<28} {:>22.15e} {:>22.15e} {:>10.2e}  {}\n",
                s.name,
                s.closed_form_value,
                s.numeric_value,
                s.relative_error,
                if s.passed { "ok" } else { "FAIL" }
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    /// Rejection attempts for the fiber Monte Carlo step; `None` skips it.
    pub fiber_attempts: Option<u64>,
    pub seed: SeedSpec,
    pub exec: Execution,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            fiber_attempts: None,
            seed: SeedSpec::new(0x5EED, 0),
            exec: Execution::Sequential,
        }
    }
}

/// Every step of the chain for each degree in `degrees` (each `1..=8`).
pub fn verify_chain(degrees: &[usize], opts: &ChainOptions) -> Result<ChainReport> {
    let mut report = ChainReport::default();
    let buffon = buffon_average()?;
    report.push(ChainStep::new(
        "buffon_average",
        2.0 / PI,
        buffon,
        Criterion::Absolute(BUFFON_TOL),
    ));
    let (lo, hi) = buffon_halves()?;
    report.push(ChainStep::new(
        "buffon_half_symmetry",
        lo,
        hi,
        Criterion::Absolute(BUFFON_TOL),
    ));

    for &n in degrees {
        if !(1..=8).contains(&n) {
            return Err(Error::Precondition(format!(
                "chain supports 1 <= N <= 8, got {n}"
            )));
        }
        let nn = n as u64;
        let lam_numeric: f64 = (1..=n).map(|j| (j * j) as f64).sum();
        report.push(ChainStep::new(
            format!("lambda_sq[N={n}]"),
            (nn * (nn + 1) * (2 * nn + 1) / 6) as f64,
            lam_numeric,
            Criterion::Relative(0.0),
        ));
        let radius = point_radius_bound(n, SobolevOrder::L2);
        report.push(ChainStep::new(
            format!("k_at_max_radius[N={n}]"),
            0.0,
            k_of_a(radius, n, SobolevOrder::L2)?,
            Criterion::Absolute(1e-7),
        ));
        for (label, a) in [
            ("0", 0.0),
            ("0.3", 0.3),
            ("0.5R", 0.5 * radius),
            ("0.8R", 0.8 * radius),
        ] {
            report.push(ChainStep::new(
                format!("xi[N={n},A={label}]"),
                xi_closed_form(a, n)?,
                xi_quadrature(a, n)?,
                Criterion::Relative(XI_AGREEMENT),
            ));
        }
        report.push(ChainStep::new(
            format!("eight_integral[N={n}]"),
            0.125,
            eight_integral(n)?,
            Criterion::Absolute(EIGHT_TOL),
        ));
        report.push(ChainStep::new(
            format!("projection_factor[N={n}]"),
            4.0 / (2 * n + 1) as f64,
            projection_factor(n),
            Criterion::Relative(4.0 * f64::EPSILON),
        ));
        let exact = mean_intersections_exact(nn, SobolevOrder::L2).approx;
        let assembled = assemble_mean_from_chain(n)?;
        report.push(ChainStep::new(
            format!("assembly[N={n}]"),
            exact,
            assembled,
            Criterion::Relative(ASSEMBLY_TOL),
        ));
        report.push(ChainStep::new(
            format!("assembly_routes[N={n}]"),
            assemble_mean_with(n, XiRoute::ClosedForm)?,
            assembled,
            Criterion::Relative(ROUTE_AGREEMENT),
        ));
        if let Some(attempts) = opts.fiber_attempts {
            if n <= 3 {
                let fib = fiber_mc_check(n, attempts, opts.seed.child(nn), opts.exec)?;
                report.push(ChainStep::new(
                    format!("fiber_mc[N={n}]"),
                    exact,
                    fib.estimate,
                    Criterion::Sigmas {
                        k: FIBER_SIGMAS,
                        stderr: fib.stderr,
                    },
                ));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_examples() {
        let r0 = SobolevOrder::L2;
        assert_eq!(k_of_a(0.0, 1, r0).unwrap(), 1.0);
        assert!(k_of_a(point_radius_bound(1, r0), 1, r0).unwrap() < 1e-7);
        assert!((k_of_a(1.0, 1, r0).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(k_of_a(-0.1, 1, r0).is_err());
        assert!(k_of_a(1.3, 1, r0).is_err());
        assert!(k_of_a(1.3, 1, SobolevOrder(0)).is_err());
    }

    #[test]
    fn xi_closed_form_examples() {
        let expect = 4.0 * PI * PI / 15.0;
        assert!((xi_closed_form(0.0, 1).unwrap() - expect).abs() < 1e-14 * expect);
        let r = point_radius_bound(2, SobolevOrder::L2);
        assert!(xi_closed_form(r, 2).unwrap() < 1e-30);
        let grid: Vec<f64> = (0..50)
            .map(|i| xi_closed_form(r * i as f64 / 49.0, 2).unwrap())
            .collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
        assert!(xi_closed_form(0.1, 0).is_err());
    }

    #[test]
    fn xi_routes_agree() {
        for n in 1..=3 {
            let r = point_radius_bound(n, SobolevOrder::L2);
            for a in [0.0, 0.3, 0.8 * r] {
                let c = xi_closed_form(a, n).unwrap();
                let q = xi_quadrature(a, n).unwrap();
                assert!((c - q).abs() <= XI_AGREEMENT * c, "N={n} A={a}: {c} vs {q}");
            }
            assert!(xi_quadrature(r, n).unwrap() < 1e-30);
        }
    }

    #[test]
    fn eight_integral_is_one_eighth() {
        for n in [0, 1, 5, 8] {
            assert!((eight_integral(n).unwrap() - 0.125).abs() < EIGHT_TOL);
            assert!((eight_integral_antiderivative(n) - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn buffon() {
        assert!((buffon_average().unwrap() - 2.0 / PI).abs() < BUFFON_TOL);
        let (lo, hi) = buffon_halves().unwrap();
        assert!((lo - hi).abs() < 1e-12);
        let (m, se) = buffon_monte_carlo(1_000_000, SeedSpec::new(2, 0));
        assert!((m - 2.0 / PI).abs() < 3.0 * se);
    }

    #[test]
    fn projection_factor_is_four_over_odd() {
        for n in 1..=10 {
            let expect = 4.0 / (2 * n + 1) as f64;
            assert!((projection_factor(n) - expect).abs() <= 4.0 * f64::EPSILON * expect);
        }
    }

    #[test]
    fn assembly_reproduces_exact_mean() {
        for n in [1, 3] {
            let exact = mean_intersections_exact(n as u64, SobolevOrder::L2).approx;
            let got = assemble_mean_from_chain(n).unwrap();
            assert!(
                (got - exact).abs() < ASSEMBLY_TOL * exact,
                "N={n}: {got} vs {exact}"
            );
            let closed = assemble_mean_with(n, XiRoute::ClosedForm).unwrap();
            assert!((got - closed).abs() < 1e-10 * closed);
        }
        assert!(assemble_mean_from_chain(0).is_err());
        assert!(assemble_mean_from_chain(9).is_err());
    }

    #[test]
    fn fiber_preconditions() {
        assert!(fiber_mc_check(0, 100, SeedSpec::new(1, 0), Execution::Sequential).is_err());
        assert!(fiber_mc_check(4, 100, SeedSpec::new(1, 0), Execution::Sequential).is_err());
    }

    #[test]
    fn fiber_stderr_shrinks_like_root_two() {
        let s = SeedSpec::new(77, 0);
        let a = fiber_mc_check(1, 100_000, s, Execution::Sequential).unwrap();
        let b = fiber_mc_check(1, 200_000, s, Execution::Sequential).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio - 2f64.sqrt()).abs() < 0.1, "{ratio}");
        assert!(a.min_integrand >= 0.0);
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate < 1.0);
    }

    #[test]
    fn report_flags_failures() {
        let ok = ChainStep::new("a", 1.0, 1.0 + 1e-12, Criterion::Relative(1e-10));
        let bad = ChainStep::new("b", 1.0, 1.1, Criterion::Absolute(1e-3));
        let sig = ChainStep::new(
            "c",
            1.0,
            1.2,
            Criterion::Sigmas {
                k: 3.0,
                stderr: 0.1,
            },
        );
        assert!(ok.passed && !bad.passed && sig.passed);
        let rep = ChainReport {
            steps: vec![ok, bad],
        };
        assert!(!rep.all_passed());
        assert!(rep.to_table().contains("FAIL"));
    }
}
