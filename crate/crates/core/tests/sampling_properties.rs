use std::f64::consts::{PI, SQRT_2};

use curvecross::curve::isometric_dim;
use curvecross::sampling::{
    sample_fiber_pair, sample_max_norm_weighted_pair, sample_pair, sample_unit_ball_curve,
};
use curvecross::{SeedSpec, SobolevOrder};

const DRAWS: u64 = 100_000;

#[test]
fn constant_term_is_uniform_on_the_disc() {
    const SECTORS: usize = 16;
    let mut hits = [0u64; SECTORS];
    for i in 0..DRAWS {
        let c = sample_unit_ball_curve(0, SobolevOrder::L2, SeedSpec::new(31, i));
        let (x, y) = (SQRT_2 * c.xa()[0], SQRT_2 * c.ya()[0]);
        assert!(x.hypot(y) <= 1.0 + 1e-12);
        let angle = y.atan2(x) + PI;
        hits[((angle / (2.0 * PI) * SECTORS as f64) as usize).min(SECTORS - 1)] += 1;
    }
    let expected = DRAWS as f64 / SECTORS as f64;
    let chi2: f64 = hits
        .iter()
        .map(|&h| (h as f64 - expected).powi(2) / expected)
        .sum();
    // upper 1e-3 point of chi-square with 15 degrees of freedom
    assert!(chi2 < 37.697, "chi2 = {chi2}, hits {hits:?}");
}

#[test]
fn isometric_coordinates_share_one_variance() {
    let degree = 3;
    let dim = isometric_dim(degree);
    let mut sum_sq = vec![0.0; dim];
    for i in 0..DRAWS {
        let u = sample_unit_ball_curve(degree, SobolevOrder::L2, SeedSpec::new(32, i))
            .to_isometric(SobolevOrder::L2);
        for (s, v) in sum_sq.iter_mut().zip(&u) {
            *s += v * v;
        }
    }
    let var: Vec<f64> = sum_sq.iter().map(|s| s / DRAWS as f64).collect();
    let hi = var.iter().cloned().fold(f64::MIN, f64::max);
    let lo = var.iter().cloned().fold(f64::MAX, f64::min);
    let mean = var.iter().sum::<f64>() / dim as f64;
    assert!((hi - lo) / mean < 0.02, "{var:?}");
    // uniform in the unit d-ball: E[x_i^2] = 1/(d+2)
    assert!((mean - 1.0 / (dim as f64 + 2.0)).abs() < 0.01 * mean);
}

#[test]
fn radial_law_and_independence() {
    let degree = 2;
    let r = SobolevOrder(1);
    let d = isometric_dim(degree) as i32;
    let (mut sum_pow, mut sf, mut sg, mut sff, mut sgg, mut sfg) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..DRAWS {
        let pair = sample_pair(degree, r, SeedSpec::new(33, i));
        let (nf, ng) = (pair.f.norm(r), pair.g.norm(r));
        sum_pow += nf.powi(d);
        sf += nf;
        sg += ng;
        sff += nf * nf;
        sgg += ng * ng;
        sfg += nf * ng;
    }
    let n = DRAWS as f64;
    // the d-th power of the radius is uniform on [0, 1]
    assert!((sum_pow / n - 0.5).abs() < 0.005);
    let cov = sfg / n - sf * sg / (n * n);
    let corr = cov / ((sff / n - (sf / n).powi(2)) * (sgg / n - (sg / n).powi(2))).sqrt();
    assert!(corr.abs() < 0.01, "corr = {corr}");
}

#[test]
fn equal_seeds_give_identical_coefficients() {
    let seed = SeedSpec::new(34, 12);
    let a = sample_pair(4, SobolevOrder(2), seed);
    let b = sample_pair(4, SobolevOrder(2), seed);
    assert_eq!(a, b);
    let c = sample_pair(4, SobolevOrder(2), SeedSpec::new(34, 13));
    assert_ne!(a, c);
}

#[test]
fn weighting_favours_larger_pairs() {
    let r = SobolevOrder::L2;
    let max_norm = |f: f64, g: f64| f.max(g);
    let (mut uniform, mut weighted) = (0.0, 0.0);
    let n = 10_000u64;
    for i in 0..n {
        let u = sample_pair(1, r, SeedSpec::new(35, i));
        uniform += max_norm(u.f.norm(r), u.g.norm(r));
        let w = sample_max_norm_weighted_pair(1, r, 4.0, SeedSpec::new(36, i)).unwrap();
        assert!(w.f.norm(r) <= 1.0 + 1e-12 && w.g.norm(r) <= 1.0 + 1e-12);
        weighted += max_norm(w.f.norm(r), w.g.norm(r));
    }
    assert!(weighted > uniform);
}

#[test]
fn fiber_pairs_meet_at_the_base_point() {
    let r = SobolevOrder::L2;
    let mut attempts = 0;
    for i in 0..1_000 {
        let draw = sample_fiber_pair(2, SeedSpec::new(37, i)).unwrap();
        attempts += draw.attempts;
        let (p, q) = (draw.pair.f.evaluate(0.0), draw.pair.g.evaluate(0.0));
        assert!(p.dist(q) < 1e-12);
        assert!(draw.pair.f.norm(r) <= 1.0 + 1e-12 && draw.pair.g.norm(r) <= 1.0 + 1e-12);
    }
    let rate = 1_000.0 / attempts as f64;
    assert!(rate > 0.0 && rate < 1.0);
}
