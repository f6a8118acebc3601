use std::f64::consts::TAU;

use curvecross::curve::point_radius_bound;
use curvecross::intersection::{brute_force_count, count_intersections, count_with_oracle};
use curvecross::sampling::sample_pair;
use curvecross::{CountingConfig, Execution, PlanePoint, SeedSpec, SobolevOrder, TrigCurve};

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[test]
fn counts_are_even_bounded_and_rarely_degenerate() {
    const PAIRS: u64 = 10_000;
    for n in 1..=3usize {
        let r = SobolevOrder::L2;
        let cfg = CountingConfig::for_degree(n, r);
        let tol = 1e-9 * cfg.point_radius;
        let results = Execution::with_workers(workers()).map(0..PAIRS, |i| {
            let pair = sample_pair(n, r, SeedSpec::new(500 + n as u64, i));
            let res = count_intersections(&pair.f, &pair.g, &cfg).unwrap();
            let worst = res
                .solutions
                .iter()
                .map(|&(phi, psi)| pair.f.evaluate(phi).dist(pair.g.evaluate(psi)))
                .fold(0.0, f64::max);
            (res.count, res.degenerate, worst)
        });
        let mut degenerate = 0;
        for (count, deg, worst) in results {
            assert!(count <= 4 * n * n, "N={n}: {count} roots");
            assert!(worst <= tol, "N={n}: residual {worst:e}");
            if deg {
                degenerate += 1;
            } else {
                assert_eq!(count % 2, 0, "N={n}: odd count {count}");
            }
        }
        assert!(
            degenerate as f64 <= 0.001 * PAIRS as f64,
            "N={n}: {degenerate} degenerate"
        );
    }
}

#[test]
fn common_rotation_leaves_count_unchanged() {
    let r = SobolevOrder::L2;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let cfg = CountingConfig::for_degree(n, r);
        let pair = sample_pair(n, r, SeedSpec::new(600, i));
        let base = count_intersections(&pair.f, &pair.g, &cfg).unwrap();
        let theta = 0.37 + TAU * i as f64 / 100.0;
        let turned =
            count_intersections(&pair.f.rotated(theta), &pair.g.rotated(theta), &cfg).unwrap();
        if !base.degenerate && !turned.degenerate {
            assert_eq!(base.count, turned.count, "pair {i}");
        }
    }
}

#[test]
fn translation_and_reparametrisation_leave_count_unchanged() {
    let r = SobolevOrder::L2;
    for i in 0..50u64 {
        let cfg = CountingConfig::for_degree(2, r);
        let pair = sample_pair(2, r, SeedSpec::new(601, i));
        let base = count_intersections(&pair.f, &pair.g, &cfg).unwrap();
        let shift = PlanePoint::new(0.3, -0.2);
        let moved = count_intersections(&pair.f.translated(shift), &pair.g.translated(shift), &cfg)
            .unwrap();
        let phased = count_intersections(&pair.f.phase_shifted(1.1), &pair.g, &cfg).unwrap();
        assert_eq!(base.count, moved.count, "pair {i}");
        assert_eq!(base.count, phased.count, "pair {i}");
    }
}

#[test]
fn oracle_agrees_on_a_small_batch() {
    let r = SobolevOrder::L2;
    let cfg = CountingConfig::for_degree(2, r);
    let mut compared = 0;
    for i in 0..60u64 {
        let pair = sample_pair(2, r, SeedSpec::new(602, i));
        let (res, oracle) = count_with_oracle(&pair.f, &pair.g, &cfg, 256).unwrap();
        assert_eq!(res.oracle_stable, Some(oracle.stable));
        if oracle.stable && !res.degenerate {
            compared += 1;
            assert_eq!(res.count, oracle.count, "pair {i}");
        }
    }
    assert!(compared > 50);
}

#[test]
fn circle_fixture_meets_twice() {
    let f = TrigCurve::circle(1, PlanePoint::new(0.0, 0.0), 1.0);
    let g = TrigCurve::circle(1, PlanePoint::new(1.5, 0.0), 1.0);
    let cfg = CountingConfig::for_degree(1, SobolevOrder::L2);
    let res = count_intersections(&f, &g, &cfg).unwrap();
    assert_eq!(res.count, 2);
    assert!(!res.degenerate);
    assert_eq!(brute_force_count(&f, &g, 256).unwrap().count, 2);
    let bound = point_radius_bound(1, SobolevOrder::L2);
    assert!(bound > 1.0);
}
