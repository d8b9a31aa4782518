use super::*;
use crate::hierarchy::WaitingTimeLaw;
use crate::pmf::ExactPmf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn path1(values: &[i64]) -> WalkPath {
    WalkPath::from_positions(1, values.to_vec()).unwrap()
}

#[test]
fn sign_change_basic() {
    let p = path1(&[0, 1, -2, 3]);
    let ev = detect_sign_change(&p, 0, true);
    assert_eq!(ev.len(), 2);
    assert_eq!(ev[0].n, 1);
    assert_eq!(ev[1].n, 2);
}

#[test]
fn sign_change_excludes_zero_endpoints() {
    let p = path1(&[0, 1, 0, -1]);
    for strict in [true, false] {
        assert!(detect_sign_change(&p, 0, strict).is_empty());
    }
}

#[test]
fn unit_walk_never_sign_changes() {
    // ±1 steps cannot skip zero.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = simulate_with_steps(1, 10_000, &mut rng, unit_step);
    assert!(detect_sign_change(&p, 0, true).is_empty());
}

#[test]
fn strict_and_literal_sign_change_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let law = WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 5)]).unwrap();
    let p = simulate_walk(1, &law, None, 2000, &mut rng).unwrap();
    assert_eq!(
        detect_sign_change(&p, 0, true),
        detect_sign_change(&p, 0, false)
    );
}

#[test]
fn level_crossing_examples() {
    let p = path1(&[0, 2]);
    assert_eq!(detect_level_crossing(&p, 0, 1.0).len(), 1);
    // Endpoint counts: the closed interval decision.
    assert_eq!(detect_level_crossing(&p, 0, 2.0).len(), 1);
    assert_eq!(detect_level_crossing(&p, 0, 2.5).len(), 0);
    let flat = path1(&[0, 0, 0]);
    assert!(detect_level_crossing(&flat, 0, 1.0).is_empty());
}

#[test]
fn vn_examples() {
    // (1,0) → (-2,0) flips sign with the second coordinate pinned at 0.
    let p = WalkPath::from_positions(2, vec![0, 0, 1, 0, -2, 0]).unwrap();
    let ev = detect_vn(&p).unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].n, 1);

    let q = WalkPath::from_positions(2, vec![0, 0, 1, 0, -2, 1]).unwrap();
    assert!(detect_vn(&q).unwrap().is_empty());

    // Zero endpoint in the first coordinate disqualifies.
    let r = WalkPath::from_positions(2, vec![0, 0, -2, 0]).unwrap();
    assert!(detect_vn(&r).unwrap().is_empty());

    assert!(detect_vn(&path1(&[0, 1])).is_err());
}

#[test]
fn polygonal_hits_inside_and_far() {
    let bounds = AxisBox::centered_cube(2, 1.0);
    // Path staying inside the box: every segment hits.
    let inside = WalkPath::from_positions(2, vec![0, 0, 1, 0, 0, 1, 1, 1]).unwrap();
    let (count, idx) = count_polygonal_hits(&inside, &bounds).unwrap();
    assert_eq!(count, 3);
    assert_eq!(idx, vec![0, 1, 2]);
    // Segments between positions with all coordinates ≥ 2 never hit; only
    // the launch segment from the origin does.
    let far = WalkPath::from_positions(2, vec![0, 0, 5, 5, 7, 5, 9, 9]).unwrap();
    let (far_count, far_idx) = count_polygonal_hits(&far, &bounds).unwrap();
    assert_eq!(far_count, 1);
    assert_eq!(far_idx, vec![0]);
}

#[test]
fn segment_hits_are_dominated_by_coordinate_hits() {
    // Every segment hit implies per-coordinate interval hits, so the count
    // is at most the minimum of the coordinate counts.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bounds = AxisBox::centered_cube(3, 1.0);
    for _ in 0..50 {
        let p = simulate_with_steps(3, 200, &mut rng, |r| r.random_range(-2..=2));
        let (count, idx) = count_polygonal_hits(&p, &bounds).unwrap();
        let mut coord_counts = [0u64; 3];
        for n in 0..p.steps() {
            for c in 0..3 {
                if interval_hits(p.coord(c, n), p.coord(c, n + 1), -1.0, 1.0) {
                    coord_counts[c] += 1;
                }
            }
        }
        assert!(count <= *coord_counts.iter().min().unwrap());
        for n in idx {
            for c in 0..3 {
                assert!(
                    interval_hits(p.coord(c, n), p.coord(c, n + 1), -1.0, 1.0),
                    "segment hit at {n} without coordinate {c} interval hit"
                );
            }
        }
    }
}

#[test]
fn interval_hit_implies_membership_or_crossing() {
    // A coordinate interval meeting [-1,1] at step n forces S_n ∈ [-1,1]
    // or a crossing of level -1 or 1 at n.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let p = simulate_with_steps(1, 500, &mut rng, |r| r.random_range(-3..=3));
        let cross_lo: std::collections::HashSet<usize> =
            detect_level_crossing(&p, 0, -1.0).into_iter().map(|e| e.n).collect();
        let cross_hi: std::collections::HashSet<usize> =
            detect_level_crossing(&p, 0, 1.0).into_iter().map(|e| e.n).collect();
        for n in 0..p.steps() {
            if interval_hits(p.coord(0, n), p.coord(0, n + 1), -1.0, 1.0) {
                let inside = (-1..=1).contains(&p.coord(0, n));
                assert!(
                    inside || cross_lo.contains(&n) || cross_hi.contains(&n),
                    "interval hit at {n} with neither membership nor crossing"
                );
            }
        }
    }
}

#[test]
fn negation_symmetry_of_detectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = simulate_with_steps(1, 1000, &mut rng, |r| r.random_range(-2..=2));
    let q = p.negated();
    let ev_p: Vec<usize> = detect_sign_change(&p, 0, true).into_iter().map(|e| e.n).collect();
    let ev_q: Vec<usize> = detect_sign_change(&q, 0, true).into_iter().map(|e| e.n).collect();
    assert_eq!(ev_p, ev_q);
    let up: Vec<usize> = detect_level_crossing(&p, 0, 1.5).into_iter().map(|e| e.n).collect();
    let down: Vec<usize> = detect_level_crossing(&q, 0, -1.5).into_iter().map(|e| e.n).collect();
    assert_eq!(up, down);
}

#[test]
fn zero_law_walk_stays_at_origin() {
    let law = WaitingTimeLaw::from_ratios(&[(1, 1, 0)]).unwrap();
    let s = law.sampler().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        assert_eq!(sample_increment_value(&s, None, &mut rng), 0);
    }
    let p = simulate_walk(2, &law, None, 50, &mut rng).unwrap();
    assert_eq!(p.position(50), &[0, 0]);
}

#[test]
fn increment_meta_reports_g_and_levels() {
    let law = WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 2, 4)]).unwrap();
    let s = law.sampler().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut g_sum = 0u64;
    let n = 100_000;
    for _ in 0..n {
        let inc = sample_increment(&s, None, &mut rng).unwrap();
        assert_eq!(inc.kappas.len(), inc.g as usize);
        assert!(inc.kappas.iter().all(|&k| k == 1 || k == 2));
        g_sum += inc.g as u64;
    }
    // E G = 3/2, SE ≈ sqrt(3/4 / n) ≈ 0.0027.
    let mean = g_sum as f64 / n as f64;
    assert!((mean - 1.5).abs() < 0.01, "mean G = {mean}");
    assert!(sample_increment(&s, Some(3), &mut rng).is_err());
}

#[test]
fn alternating_structure_with_constant_waiting_time() {
    // With T ≡ 1 the increment is ε·(G mod 2)·(-1)-ish: P(X=0) = 1/4 and
    // P(X=±1) = 3/8 each in the G-geometric limit.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 1_000_000u64;
    let mut counts = [0u64; 3]; // -1, 0, +1
    for _ in 0..n {
        let eps: i64 = if rng.random::<bool>() { 1 } else { -1 };
        let g = sample_geometric_23(&mut rng);
        let sum: i64 = (1..=g).map(|i| if i % 2 == 0 { 1 } else { -1 }).sum();
        let x = eps * sum;
        counts[(x + 1) as usize] += 1;
    }
    let p0 = counts[1] as f64 / n as f64;
    let p1 = counts[2] as f64 / n as f64;
    let pm1 = counts[0] as f64 / n as f64;
    // Three standard errors at 10⁶ draws.
    let se = (0.25 * 0.75 / n as f64).sqrt() * 3.0;
    assert!((p0 - 0.25).abs() < se, "P(X=0) = {p0}");
    let se = (0.375 * 0.625 / n as f64).sqrt() * 3.0;
    assert!((p1 - 0.375).abs() < se, "P(X=1) = {p1}");
    assert!((pm1 - 0.375).abs() < se, "P(X=-1) = {pm1}");
}

#[test]
fn sampler_agrees_with_exact_increment_law() {
    // Empirical increment law vs the exact alternating-sum mixture for
    // randomized small laws (chi-square, p > 0.01 at 10⁵ draws).
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut meta_rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..10 {
        let y1 = meta_rng.random_range(0..3u64);
        let y2 = meta_rng.random_range(y1 + 1..y1 + 5);
        let num = meta_rng.random_range(1..4i64);
        let law = WaitingTimeLaw::from_ratios(&[(num, 4, y1), (4 - num, 4, y2)]).unwrap();
        let s = law.sampler().unwrap();
        let (exact, _) = ExactPmf::law_of_x(&law.as_pmf().unwrap(), 20).unwrap();
        let n = 100_000u64;
        let samples: Vec<i64> = (0..n)
            .map(|_| sample_increment_value(&s, None, &mut rng))
            .collect();
        let res = crate::verify::stats::chi_square_vs_pmf(&samples, &exact);
        assert!(
            res.p_value > 0.01,
            "trial {trial}: chi-square p = {} (stat {}, df {}) for {law:?}",
            res.p_value,
            res.stat,
            res.df
        );
    }
}

#[test]
fn truncated_increments_follow_truncated_law() {
    let law = WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 4, 3), (1, 4, 9)]).unwrap();
    let s = law.sampler().unwrap();
    let trunc = law.truncated(2).unwrap();
    let (exact, _) = ExactPmf::law_of_x(&trunc.as_pmf().unwrap(), 20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000u64;
    let samples: Vec<i64> = (0..n)
        .map(|_| sample_increment_value(&s, Some(2), &mut rng))
        .collect();
    let res = crate::verify::stats::chi_square_vs_pmf(&samples, &exact);
    assert!(
        res.p_value > 0.01,
        "chi-square p = {} (stat {}, df {})",
        res.p_value,
        res.stat,
        res.df
    );
}

#[test]
fn coordinate_marginals_are_centered_and_uncorrelated() {
    let law = WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 3)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let replicas = 10_000;
    let n = 100;
    let mut sum = [0f64; 2];
    let mut sum_sq = [0f64; 2];
    let mut cross = 0f64;
    for _ in 0..replicas {
        let p = simulate_walk(2, &law, None, n, &mut rng).unwrap();
        let x = p.coord(0, n) as f64;
        let y = p.coord(1, n) as f64;
        sum[0] += x;
        sum[1] += y;
        sum_sq[0] += x * x;
        sum_sq[1] += y * y;
        cross += x * y;
    }
    let m = replicas as f64;
    let mean = [sum[0] / m, sum[1] / m];
    let var = [
        sum_sq[0] / m - mean[0] * mean[0],
        sum_sq[1] / m - mean[1] * mean[1],
    ];
    // Empirical mean within 3 SE of 0 by symmetry.
    for c in 0..2 {
        let se = (var[c] / m).sqrt();
        assert!(mean[c].abs() < 3.0 * se + 1e-9, "coord {c} mean {}", mean[c]);
    }
    // Coordinates empirically uncorrelated: |r| < 0.03 at 10⁴ replicas.
    let r = (cross / m - mean[0] * mean[1]) / (var[0] * var[1]).sqrt();
    assert!(r.abs() < 0.03, "correlation {r}");
}

#[test]
fn rejects_zero_length_walks() {
    let law = WaitingTimeLaw::from_ratios(&[(1, 1, 1)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    assert!(simulate_walk(1, &law, None, 0, &mut rng).is_err());
    let p = simulate_walk(1, &law, None, 1, &mut rng).unwrap();
    assert_eq!(p.steps(), 1);
}

#[test]
fn direct_position_samplers_match_step_laws() {
    // S_n sampled directly agrees in mean/variance with stepped paths.
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 64u64;
    let reps = 200_000;
    let mut var_direct = 0f64;
    for _ in 0..reps {
        let s = lazy_position(n, &mut rng) as f64;
        var_direct += s * s;
    }
    var_direct /= reps as f64;
    // Var S_n = n/2 for the lazy walk.
    assert!(
        (var_direct - n as f64 / 2.0).abs() < 0.5,
        "lazy direct variance {var_direct}"
    );
    let mut var_unit = 0f64;
    for _ in 0..reps {
        let s = unit_position(n, &mut rng) as f64;
        var_unit += s * s;
    }
    var_unit /= reps as f64;
    assert!(
        (var_unit - n as f64).abs() < 1.0,
        "unit direct variance {var_unit}"
    );
}

#[test]
fn events_csv_shape() {
    let p = path1(&[0, 2, -1]);
    let mut events = detect_level_crossing(&p, 0, 1.0);
    events.extend(detect_sign_change(&p, 0, true));
    let csv = events_to_csv(&events);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kind,n,coord,payload");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
}
