//! Counting the solutions `(φ, ψ) ∈ T²` of `f(φ) = g(ψ)`.
//!
//! Pipeline:
//!
//! 1. sample each curve as a closed polyline whose chords are at most
//!    `seg_target` long (vertex count driven by the curve's Lipschitz bound);
//! 2. bucket the segments of `g` in a uniform grid over the overlap of the two
//!    bounding boxes and probe it with the segments of `f`;
//! 3. every proper crossing seeds a 2-D Newton solve of `f(φ) - g(ψ) = 0`;
//!    segment pairs that pass within the chord sagitta of each other seed one
//!    too, which recovers pairs of roots hidden inside a single chord;
//! 4. roots are wrapped to the torus and merged within `dedupe_radius`.
//!
//! A pass that ends with a failed crossing seed, an odd count or a touching
//! contact is repeated once at an eighth of the chord length. Whatever is
//! still wrong after that is reported through `degenerate`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::curve::{point_radius_bound, PlanePoint, SobolevOrder, TrigCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountingConfig {
    /// Target chord length of the polylines.
    pub seg_target: f64,
    /// Newton stops once the parameter step is below this.
    pub newton_tol: f64,
    /// Torus distance under which two roots are the same root.
    pub dedupe_radius: f64,
    pub max_newton_iters: u32,
    /// Roots with `|det J|` below this are not transversal.
    pub degeneracy_threshold: f64,
    /// Residual scale used for acceptance checks; `√(μ(N)/2)` by default.
    pub point_radius: f64,
}

impl CountingConfig {
    pub fn for_degree(degree: usize, r: SobolevOrder) -> Self {
        let radius = point_radius_bound(degree, r);
        CountingConfig {
            seg_target: 0.02 * radius,
            newton_tol: 1e-12,
            dedupe_radius: 1e-6,
            max_newton_iters: 50,
            degeneracy_threshold: 1e-8,
            point_radius: radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("seg_target", self.seg_target),
            ("newton_tol", self.newton_tol),
            ("dedupe_radius", self.dedupe_radius),
            ("degeneracy_threshold", self.degeneracy_threshold),
            ("point_radius", self.point_radius),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_newton_iters == 0 {
            return Err(Error::Precondition(
                "max_newton_iters must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionResult {
    pub count: usize,
    /// Roots `(φ, ψ)`, both wrapped to `[0, 2π)`, sorted by `φ`.
    pub solutions: Vec<(f64, f64)>,
    /// Smallest `|det(f'(φ), -g'(ψ))|` over the roots; `∞` when there are none.
    pub min_abs_det: f64,
    pub degenerate: bool,
    pub oracle_stable: Option<bool>,
}

// ---------------------------------------------------------------------------
// Geometry primitives

fn orient(a: PlanePoint, b: PlanePoint, c: PlanePoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// True iff the open segments cross transversally. Shared endpoints and
/// collinear overlaps are not crossings.
pub fn segment_proper_cross(
    p1: PlanePoint,
    p2: PlanePoint,
    q1: PlanePoint,
    q2: PlanePoint,
) -> Result<bool> {
    if p1 == p2 || q1 == q2 {
        return Err(Error::ZeroLengthSegment);
    }
    Ok(proper_cross(p1, p2, q1, q2).is_some())
}

/// Fractions `(t, s)` along each segment at a proper crossing.
fn proper_cross(
    p1: PlanePoint,
    p2: PlanePoint,
    q1: PlanePoint,
    q2: PlanePoint,
) -> Option<(f64, f64)> {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    if !((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) {
        return None;
    }
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if !((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return None;
    }
    Some((o3 / (o3 - o4), o1 / (o1 - o2)))
}

/// Closest point of segment `ab` to `p`, as (fraction, distance).
fn point_segment(p: PlanePoint, a: PlanePoint, b: PlanePoint) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = PlanePoint::new(a.x + t * dx, a.y + t * dy);
    (t, p.dist(c))
}

/// Distance between two non-crossing segments with the fractions realizing it.
fn segment_gap(p1: PlanePoint, p2: PlanePoint, q1: PlanePoint, q2: PlanePoint) -> (f64, f64, f64) {
    let candidates = [
        {
            let (s, d) = point_segment(p1, q1, q2);
            (d, 0.0, s)
        },
        {
            let (s, d) = point_segment(p2, q1, q2);
            (d, 1.0, s)
        },
        {
            let (t, d) = point_segment(q1, p1, p2);
            (d, t, 0.0)
        },
        {
            let (t, d) = point_segment(q2, p1, p2);
            (d, t, 1.0)
        },
    ];
    candidates
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("four candidates")
}

fn wrap(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn torus_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = |x: f64, y: f64| {
        let t = (x - y).abs() % TAU;
        t.min(TAU - t)
    };
    d(a.0, b.0).hypot(d(a.1, b.1))
}

// ---------------------------------------------------------------------------
// Newton refinement

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRoot {
    pub phi: f64,
    pub psi: f64,
    /// `det(f'(φ), -g'(ψ))` at the root.
    pub det: f64,
    pub residual: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NewtonFailure {
    /// `|det J|` fell below the degeneracy threshold.
    Singular {
        min_residual: f64,
    },
    MaxIterations {
        min_residual: f64,
    },
}

impl NewtonFailure {
    pub fn min_residual(&self) -> f64 {
        match *self {
            NewtonFailure::Singular { min_residual }
            | NewtonFailure::MaxIterations { min_residual } => min_residual,
        }
    }
}

/// Newton's method on `F(φ, ψ) = f(φ) - g(ψ)` with Jacobian columns
/// `f'(φ)` and `-g'(ψ)`.
pub fn newton_refine(
    f: &TrigCurve,
    g: &TrigCurve,
    phi0: f64,
    psi0: f64,
    cfg: &CountingConfig,
) -> std::result::Result<NewtonRoot, NewtonFailure> {
    const MAX_STEP: f64 = 0.5;
    let (mut phi, mut psi) = (phi0, psi0);
    let mut min_residual = f64::INFINITY;
    for it in 0..cfg.max_newton_iters {
        let (p, dp) = f.evaluate_with_derivative(phi);
        let (q, dq) = g.evaluate_with_derivative(psi);
        let (fx, fy) = (p.x - q.x, p.y - q.y);
        let residual = fx.hypot(fy);
        min_residual = min_residual.min(residual);
        let det = dq.x * dp.y - dp.x * dq.y;
        if det.abs() < cfg.degeneracy_threshold {
            return Err(NewtonFailure::Singular { min_residual });
        }
        let mut dphi = (dq.x * fy - dq.y * fx) / det;
        let mut dpsi = (dp.x * fy - dp.y * fx) / det;
        let step = dphi.hypot(dpsi);
        if step > MAX_STEP {
            dphi *= MAX_STEP / step;
            dpsi *= MAX_STEP / step;
        }
        phi -= dphi;
        psi -= dpsi;
        let at_noise_floor = residual <= 8.0 * f64::EPSILON * (p.norm() + q.norm());
        if step <= cfg.newton_tol || at_noise_floor {
            let (p, dp) = f.evaluate_with_derivative(phi);
            let (q, dq) = g.evaluate_with_derivative(psi);
            let det = dq.x * dp.y - dp.x * dq.y;
            if det.abs() < cfg.degeneracy_threshold {
                return Err(NewtonFailure::Singular { min_residual });
            }
            return Ok(NewtonRoot {
                phi: wrap(phi),
                psi: wrap(psi),
                det,
                residual: p.dist(q),
                iterations: it,
            });
        }
    }
    Err(NewtonFailure::MaxIterations { min_residual })
}

// ---------------------------------------------------------------------------
// Polylines and the candidate grid

struct Polyline {
    vertices: Vec<PlanePoint>,
    step: f64,
    /// Bound on the distance between a chord and its arc.
    sagitta: f64,
    max_chord: f64,
}

impl Polyline {
    fn uniform(c: &TrigCurve, m: usize) -> Self {
        let step = TAU / m as f64;
        let vertices: Vec<PlanePoint> = (0..m).map(|k| c.evaluate(k as f64 * step)).collect();
        let max_chord = (0..m)
            .map(|k| vertices[k].dist(vertices[(k + 1) % m]))
            .fold(0.0, f64::max);
        Polyline {
            vertices,
            step,
            sagitta: c.curvature_bound() * step * step / 8.0,
            max_chord,
        }
    }

    fn len(&self) -> usize {
        self.vertices.len()
    }

    fn segment(&self, k: usize) -> (PlanePoint, PlanePoint) {
        (
            self.vertices[k],
            self.vertices[(k + 1) % self.vertices.len()],
        )
    }

    fn bbox(&self) -> BBox {
        self.vertices.iter().fold(BBox::EMPTY, |b, &p| b.with(p))
    }
}

#[derive(Debug, Clone, Copy)]
struct BBox {
    lo: PlanePoint,
    hi: PlanePoint,
}

impl BBox {
    const EMPTY: BBox = BBox {
        lo: PlanePoint {
            x: f64::INFINITY,
            y: f64::INFINITY,
        },
        hi: PlanePoint {
            x: f64::NEG_INFINITY,
            y: f64::NEG_INFINITY,
        },
    };

    fn of(a: PlanePoint, b: PlanePoint) -> Self {
        BBox::EMPTY.with(a).with(b)
    }

    fn with(self, p: PlanePoint) -> Self {
        BBox {
            lo: PlanePoint::new(self.lo.x.min(p.x), self.lo.y.min(p.y)),
            hi: PlanePoint::new(self.hi.x.max(p.x), self.hi.y.max(p.y)),
        }
    }

    fn padded(self, pad: f64) -> Self {
        BBox {
            lo: PlanePoint::new(self.lo.x - pad, self.lo.y - pad),
            hi: PlanePoint::new(self.hi.x + pad, self.hi.y + pad),
        }
    }

    fn intersect(self, o: BBox) -> Option<BBox> {
        let b = BBox {
            lo: PlanePoint::new(self.lo.x.max(o.lo.x), self.lo.y.max(o.lo.y)),
            hi: PlanePoint::new(self.hi.x.min(o.hi.x), self.hi.y.min(o.hi.y)),
        };
        (b.lo.x <= b.hi.x && b.lo.y <= b.hi.y).then_some(b)
    }
}

/// Uniform bucket grid over a region, in CSR layout.
struct Grid {
    region: BBox,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    items: Vec<u32>,
}

impl Grid {
    const MAX_CELLS: usize = 1 << 20;

    fn build(region: BBox, cell: f64, boxes: impl Iterator<Item = (u32, BBox)> + Clone) -> Self {
        let (w, h) = (region.hi.x - region.lo.x, region.hi.y - region.lo.y);
        let mut cell = cell;
        while (w / cell).ceil().max(1.0) * (h / cell).ceil().max(1.0) > Self::MAX_CELLS as f64 {
            cell *= 2.0;
        }
        let nx = ((w / cell).ceil() as usize).max(1);
        let ny = ((h / cell).ceil() as usize).max(1);
        let mut grid = Grid {
            region,
            cell,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            items: Vec::new(),
        };
        for (_, b) in boxes.clone() {
            if let Some((x0, x1, y0, y1)) = grid.cell_range(b) {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        grid.starts[y * nx + x + 1] += 1;
                    }
                }
            }
        }
        for i in 1..grid.starts.len() {
            grid.starts[i] += grid.starts[i - 1];
        }
        let mut fill = grid.starts.clone();
        grid.items = vec![0; grid.starts[nx * ny]];
        for (id, b) in boxes {
            if let Some((x0, x1, y0, y1)) = grid.cell_range(b) {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let c = y * nx + x;
                        grid.items[fill[c]] = id;
                        fill[c] += 1;
                    }
                }
            }
        }
        grid
    }

    fn cell_range(&self, b: BBox) -> Option<(usize, usize, usize, usize)> {
        let b = b.intersect(self.region)?;
        let ix = |v: f64, lo: f64, n: usize| (((v - lo) / self.cell) as usize).min(n - 1);
        Some((
            ix(b.lo.x, self.region.lo.x, self.nx),
            ix(b.hi.x, self.region.lo.x, self.nx),
            ix(b.lo.y, self.region.lo.y, self.ny),
            ix(b.hi.y, self.region.lo.y, self.ny),
        ))
    }

    fn cell_items(&self, x: usize, y: usize) -> &[u32] {
        let c = y * self.nx + x;
        &self.items[self.starts[c]..self.starts[c + 1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SeedKind {
    Crossing,
    NearMiss,
}

/// Newton seeds `(φ₀, ψ₀)` from crossing and near-missing segment pairs.
fn candidate_seeds(pf: &Polyline, pg: &Polyline) -> Vec<(f64, f64, SeedKind)> {
    let pad = pf.sagitta + pg.sagitta;
    let Some(region) = pf.bbox().padded(pad).intersect(pg.bbox().padded(pad)) else {
        return Vec::new();
    };
    let cell = pf.max_chord.max(pg.max_chord).max(f64::MIN_POSITIVE);
    let g_boxes = (0..pg.len()).map(|k| {
        let (a, b) = pg.segment(k);
        (k as u32, BBox::of(a, b).padded(pad))
    });
    let grid = Grid::build(region, cell, g_boxes);
    let mut stamp = vec![u32::MAX; pg.len()];
    let mut seeds = Vec::new();
    for i in 0..pf.len() {
        let (p1, p2) = pf.segment(i);
        if p1 == p2 {
            continue;
        }
        let Some((x0, x1, y0, y1)) = grid.cell_range(BBox::of(p1, p2)) else {
            continue;
        };
        for y in y0..=y1 {
            for x in x0..=x1 {
                for &j in grid.cell_items(x, y) {
                    if stamp[j as usize] == i as u32 {
                        continue;
                    }
                    stamp[j as usize] = i as u32;
                    let (q1, q2) = pg.segment(j as usize);
                    if q1 == q2 {
                        continue;
                    }
                    let (fi, gj) = (i as f64, j as f64);
                    if let Some((t, s)) = proper_cross(p1, p2, q1, q2) {
                        seeds.push(((fi + t) * pf.step, (gj + s) * pg.step, SeedKind::Crossing));
                    } else {
                        let (gap, t, s) = segment_gap(p1, p2, q1, q2);
                        if gap <= pad {
                            seeds.push((
                                (fi + t) * pf.step,
                                (gj + s) * pg.step,
                                SeedKind::NearMiss,
                            ));
                        }
                    }
                }
            }
        }
    }
    seeds
}

fn vertex_count(c: &TrigCurve, seg_target: f64) -> usize {
    let m = (TAU * c.lipschitz_bound() / seg_target).ceil();
    (m.min(1e6) as usize).max(64)
}

#[derive(Debug, Default)]
struct PassOutcome {
    roots: Vec<NewtonRoot>,
    crossing_failure: bool,
    touching: bool,
}

fn run_pass(
    f: &TrigCurve,
    g: &TrigCurve,
    seg_target: f64,
    cfg: &CountingConfig,
    roots: &mut Vec<NewtonRoot>,
) -> PassOutcome {
    let pf = Polyline::uniform(f, vertex_count(f, seg_target));
    let pg = Polyline::uniform(g, vertex_count(g, seg_target));
    let touch_tol = 1e-9 * cfg.point_radius;
    let residual_tol = 10.0 * cfg.newton_tol * cfg.point_radius;
    let mut out = PassOutcome::default();
    for (phi0, psi0, kind) in candidate_seeds(&pf, &pg) {
        match newton_refine(f, g, phi0, psi0, cfg) {
            Ok(root) if root.residual <= residual_tol => {
                if !roots
                    .iter()
                    .any(|r| torus_dist((r.phi, r.psi), (root.phi, root.psi)) <= cfg.dedupe_radius)
                {
                    roots.push(root);
                }
            }
            Ok(_) => out.crossing_failure |= kind == SeedKind::Crossing,
            Err(fail) => match kind {
                SeedKind::Crossing => out.crossing_failure = true,
                SeedKind::NearMiss => out.touching |= fail.min_residual() <= touch_tol,
            },
        }
    }
    out.roots = roots.clone();
    out
}

/// Counts the intersection points of two curves of equal degree.
pub fn count_intersections(
    f: &TrigCurve,
    g: &TrigCurve,
    cfg: &CountingConfig,
) -> Result<IntersectionResult> {
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch {
            left: f.degree(),
            right: g.degree(),
        });
    }
    cfg.validate()?;
    for c in [f, g] {
        let all = c.xa().iter().chain(c.xb()).chain(c.ya()).chain(c.yb());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite coefficient".into()));
        }
    }
    if f.is_constant() || g.is_constant() {
        // a point meets a curve only on a null set; two equal points everywhere
        let coincident = f.is_constant() && g.is_constant() && f.evaluate(0.0) == g.evaluate(0.0);
        return Ok(IntersectionResult {
            count: 0,
            solutions: Vec::new(),
            min_abs_det: f64::INFINITY,
            degenerate: coincident,
            oracle_stable: None,
        });
    }

    let mut roots = Vec::new();
    let mut pass = run_pass(f, g, cfg.seg_target, cfg, &mut roots);
    let troubled = |p: &PassOutcome| p.crossing_failure || p.touching || p.roots.len() % 2 == 1;
    if troubled(&pass) {
        pass = run_pass(f, g, cfg.seg_target / 8.0, cfg, &mut roots);
    }
    let degenerate = troubled(&pass);
    let mut solutions: Vec<(f64, f64)> = roots.iter().map(|r| (r.phi, r.psi)).collect();
    solutions.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(IntersectionResult {
        count: solutions.len(),
        solutions,
        min_abs_det: roots
            .iter()
            .map(|r| r.det.abs())
            .fold(f64::INFINITY, f64::min),
        degenerate,
        oracle_stable: None,
    })
}

/// [`count_intersections`] plus the brute-force oracle at `oracle_vertices`.
pub fn count_with_oracle(
    f: &TrigCurve,
    g: &TrigCurve,
    cfg: &CountingConfig,
    oracle_vertices: usize,
) -> Result<(IntersectionResult, BruteForceCount)> {
    let mut res = count_intersections(f, g, cfg)?;
    let oracle = brute_force_count(f, g, oracle_vertices)?;
    res.oracle_stable = Some(oracle.stable);
    Ok((res, oracle))
}

// ---------------------------------------------------------------------------
// Brute-force oracle

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BruteForceCount {
    pub count: usize,
    pub stable: bool,
}

/// All-pairs proper crossings of uniform polylines at `M`, `2M` and `4M`
/// vertices. Stable iff the three counts agree.
pub fn brute_force_count(f: &TrigCurve, g: &TrigCurve, m: usize) -> Result<BruteForceCount> {
    if m < 256 {
        return Err(Error::Precondition(format!(
            "oracle needs M >= 256, got {m}"
        )));
    }
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch {
            left: f.degree(),
            right: g.degree(),
        });
    }
    let counts: Vec<usize> = [m, 2 * m, 4 * m]
        .iter()
        .map(|&k| all_pairs_crossings(&sample_uniform(f, k), &sample_uniform(g, k)))
        .collect();
    Ok(BruteForceCount {
        count: counts[2],
        stable: counts[0] == counts[1] && counts[1] == counts[2],
    })
}

fn sample_uniform(c: &TrigCurve, m: usize) -> Vec<PlanePoint> {
    (0..m)
        .map(|k| c.evaluate(TAU * k as f64 / m as f64))
        .collect()
}

fn all_pairs_crossings(a: &[PlanePoint], b: &[PlanePoint]) -> usize {
    let segs = |v: &[PlanePoint]| -> Vec<(PlanePoint, PlanePoint, BBox)> {
        (0..v.len())
            .map(|k| {
                let (p, q) = (v[k], v[(k + 1) % v.len()]);
                (p, q, BBox::of(p, q))
            })
            .filter(|s| s.0 != s.1)
            .collect()
    };
    let (sa, sb) = (segs(a), segs(b));
    let mut n = 0;
    for &(p1, p2, ba) in &sa {
        for &(q1, q2, bb) in &sb {
            if ba.hi.x < bb.lo.x || bb.hi.x < ba.lo.x || ba.hi.y < bb.lo.y || bb.hi.y < ba.lo.y {
                continue;
            }
            if proper_cross(p1, p2, q1, q2).is_some() {
                n += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> PlanePoint {
        PlanePoint::new(x, y)
    }

    fn circle(cx: f64, cy: f64, r: f64) -> TrigCurve {
        TrigCurve::circle(1, pt(cx, cy), r)
    }

    fn cfg() -> CountingConfig {
        CountingConfig::for_degree(1, SobolevOrder(0))
    }

    #[test]
    fn proper_cross_examples() {
        assert!(segment_proper_cross(pt(0., -1.), pt(0., 1.), pt(-1., 0.), pt(1., 0.)).unwrap());
        assert!(!segment_proper_cross(pt(0., 0.), pt(1., 0.), pt(0., 1.), pt(1., 1.)).unwrap());
        assert!(!segment_proper_cross(pt(0., 0.), pt(1., 0.), pt(1., 0.), pt(2., 0.)).unwrap());
        // collinear overlap
        assert!(!segment_proper_cross(pt(0., 0.), pt(2., 0.), pt(1., 0.), pt(3., 0.)).unwrap());
        // T-junction: endpoint on the other segment's interior
        assert!(!segment_proper_cross(pt(0., 0.), pt(2., 0.), pt(1., 0.), pt(1., 1.)).unwrap());
        assert!(matches!(
            segment_proper_cross(pt(0., 0.), pt(0., 0.), pt(1., 0.), pt(1., 1.)),
            Err(Error::ZeroLengthSegment)
        ));
    }

    #[test]
    fn two_circles_meet_twice() {
        let f = circle(0.0, 0.0, 1.0);
        let g = circle(1.5, 0.0, 1.0);
        let res = count_intersections(&f, &g, &cfg()).unwrap();
        assert_eq!(res.count, 2);
        assert!(!res.degenerate);
        for &(phi, psi) in &res.solutions {
            let p = f.evaluate(phi);
            assert!(p.dist(g.evaluate(psi)) < 1e-12);
            assert!((p.x - 0.75).abs() < 1e-12);
        }
        let bf = brute_force_count(&f, &g, 1024).unwrap();
        assert_eq!(
            bf,
            BruteForceCount {
                count: 2,
                stable: true
            }
        );
    }

    #[test]
    fn disjoint_circles() {
        let f = circle(0.0, 0.0, 1.0);
        let g = circle(3.0, 0.0, 0.2);
        let res = count_intersections(&f, &g, &cfg()).unwrap();
        assert_eq!((res.count, res.degenerate), (0, false));
        assert_eq!(
            brute_force_count(&f, &g, 256).unwrap(),
            BruteForceCount {
                count: 0,
                stable: true
            }
        );
    }

    #[test]
    fn coincident_curves_are_degenerate() {
        let f = circle(0.0, 0.0, 1.0);
        assert!(count_intersections(&f, &f, &cfg()).unwrap().degenerate);
        // same image, shifted parameter
        let g = f.phase_shifted(0.4);
        assert!(count_intersections(&f, &g, &cfg()).unwrap().degenerate);
    }

    #[test]
    fn tangent_circles_are_degenerate() {
        let f = circle(0.0, 0.0, 1.0);
        let g = circle(2.0, 0.0, 1.0);
        let res = count_intersections(&f, &g, &cfg()).unwrap();
        assert!(res.degenerate, "{res:?}");
    }

    #[test]
    fn close_root_pair_inside_one_chord_is_found() {
        // circles overlapping by 1e-5: the two crossings are ~6e-3 apart in
        // the plane, far inside one chord of length ~0.024
        let f = circle(0.0, 0.0, 1.0);
        let g = circle(2.0 - 1e-5, 0.0, 1.0);
        let res = count_intersections(&f, &g, &cfg()).unwrap();
        assert_eq!(res.count, 2, "{res:?}");
        assert!(!res.degenerate);
    }

    #[test]
    fn newton_examples() {
        let f = circle(0.0, 0.0, 1.0);
        let g = circle(1.5, 0.0, 1.0);
        let c = cfg();
        let phi = (0.75f64).acos();
        let psi = std::f64::consts::PI - phi;
        let root = newton_refine(&f, &g, phi + 0.02, psi - 0.03, &c).unwrap();
        assert!(root.residual < 1e-10);
        assert!((root.phi - phi).abs() < 1e-12 && (root.psi - psi).abs() < 1e-12);

        // start on an exact solution of a pair built to meet at (1, 0)
        let h = circle(2.0, 0.0, 1.0).rotated(0.0);
        let k = circle(1.0, 1.0, 1.0);
        let exact =
            newton_refine(&h, &k, std::f64::consts::PI, 1.5 * std::f64::consts::PI, &c).unwrap();
        assert_eq!(exact.iterations, 0);
        assert!((exact.phi - std::f64::consts::PI).abs() < 1e-15);

        for seed in [(0.1, 0.2), (1.0, 1.0), (3.0, 5.0)] {
            assert!(newton_refine(&f, &f, seed.0, seed.1, &c).is_err());
        }
    }

    #[test]
    fn constant_curves() {
        let mut a = TrigCurve::zero(0);
        let b = TrigCurve::zero(0).translated(pt(0.1, 0.2));
        let c0 = CountingConfig::for_degree(0, SobolevOrder(0));
        let r = count_intersections(&a, &b, &c0).unwrap();
        assert_eq!((r.count, r.degenerate), (0, false));
        a = a.translated(pt(0.1, 0.2));
        assert!(count_intersections(&a, &b, &c0).unwrap().degenerate);
    }

    #[test]
    fn rejects_mismatched_degrees_and_bad_config() {
        let f = circle(0.0, 0.0, 1.0);
        let g = TrigCurve::circle(2, pt(0.0, 0.0), 0.5);
        assert!(matches!(
            count_intersections(&f, &g, &cfg()),
            Err(Error::DegreeMismatch { .. })
        ));
        let mut bad = cfg();
        bad.newton_tol = 0.0;
        assert!(count_intersections(&f, &f, &bad).is_err());
        assert!(brute_force_count(&f, &f, 100).is_err());
    }

    #[test]
    fn torus_distance_wraps() {
        assert!(torus_dist((0.0, 0.0), (TAU - 1e-9, 1e-9)) < 2e-9);
        assert_eq!(wrap(-0.0), 0.0);
        assert!(wrap(-1e-20) < TAU);
    }
}
