use super::*;
use crate::pmf::ExactPmf;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn law_31() -> WaitingTimeLaw {
    WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 3)]).unwrap()
}

fn config(dim: usize, rule: SwitchRule, phases: usize) -> DrwConfig {
    DrwConfig {
        dim,
        law: law_31(),
        rule,
        phases,
        initial: InitialDirection::RandomHorizontal,
    }
}

#[test]
fn zero_law_pins_everything_to_origin() {
    let cfg = DrwConfig {
        law: WaitingTimeLaw::from_ratios(&[(1, 1, 0)]).unwrap(),
        ..config(2, SwitchRule::Full, 50)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    assert!(trace.phases.iter().all(|p| p.duration == 0));
    assert_eq!(trace.final_position, vec![0, 0]);
    let ev = point_events(&trace, &[0, 0]).unwrap();
    // Every phase boundary is a direction change at the origin.
    assert_eq!(ev.direction_changes, 49);
    assert_eq!(ev.visits, 50);
    assert_eq!(ev.time_visits, 1);
    assert!(ev.direction_changes <= ev.visits + 1);
}

#[test]
fn bookkeeping_replays_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for dim in [1usize, 2, 3] {
        let rule = if dim >= 2 {
            SwitchRule::Perpendicular
        } else {
            SwitchRule::Full
        };
        let cfg = DrwConfig {
            initial: InitialDirection::Axis {
                axis: 0,
                positive: true,
            },
            ..config(dim, rule, 500)
        };
        let trace = simulate_drw(&cfg, &mut rng).unwrap();
        let mut pos = vec![0i64; dim];
        for p in &trace.phases {
            assert_eq!(p.start, pos, "phase start disagrees with replay");
            let delta = if p.dir.positive { 1 } else { -1 };
            pos[p.dir.axis] += delta * p.duration as i64;
        }
        assert_eq!(pos, trace.final_position);
    }
}

#[test]
fn full_rule_is_uniform_over_other_directions() {
    // d = 2: three choices at every turn, chi-square at 10⁵ turns.
    let cfg = config(2, SwitchRule::Full, 100_001);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let mut counts = std::collections::HashMap::new();
    for w in trace.phases.windows(2) {
        assert_ne!(w[1].dir, w[0].dir, "direction repeated under full rule");
        // Classify the transition relative to the previous direction.
        let rel = if w[1].dir.axis == w[0].dir.axis {
            0 // reversal
        } else if w[1].dir.positive {
            1
        } else {
            2
        };
        *counts.entry(rel).or_insert(0u64) += 1;
    }
    let n = trace.phases.len() as f64 - 1.0;
    let expected = n / 3.0;
    let stat: f64 = (0..3)
        .map(|k| {
            let o = *counts.get(&k).unwrap_or(&0) as f64;
            (o - expected) * (o - expected) / expected
        })
        .sum();
    // df = 2, p > 0.01 needs stat < 9.21.
    assert!(stat < 9.21, "chi-square {stat}");
}

#[test]
fn perpendicular_rule_never_reverses_and_is_uniform() {
    let cfg = DrwConfig {
        initial: InitialDirection::Axis {
            axis: 2,
            positive: true,
        },
        ..config(3, SwitchRule::Perpendicular, 100_001)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let mut counts = std::collections::HashMap::new();
    for w in trace.phases.windows(2) {
        assert_ne!(
            w[1].dir.axis, w[0].dir.axis,
            "perpendicular rule stayed on the same axis"
        );
        // Four perpendicular options; classify by (axis offset, sign).
        let offset = (w[1].dir.axis + 3 - w[0].dir.axis) % 3;
        *counts.entry((offset, w[1].dir.positive)).or_insert(0u64) += 1;
    }
    let n = trace.phases.len() as f64 - 1.0;
    let expected = n / 4.0;
    let stat: f64 = counts
        .values()
        .map(|&o| (o as f64 - expected) * (o as f64 - expected) / expected)
        .sum();
    assert_eq!(counts.len(), 4);
    // df = 3, p > 0.01 needs stat < 11.34.
    assert!(stat < 11.34, "chi-square {stat}");
}

#[test]
fn embedded_walk_hand_trace() {
    // Alternating H,V,H,V with unit durations, all positive: embedded
    // points (1,1) and (2,2).
    let phases = vec![
        Phase {
            dir: Dir { axis: 0, positive: true },
            duration: 1,
            start: vec![0, 0],
        },
        Phase {
            dir: Dir { axis: 1, positive: true },
            duration: 1,
            start: vec![1, 0],
        },
        Phase {
            dir: Dir { axis: 0, positive: true },
            duration: 1,
            start: vec![1, 1],
        },
        Phase {
            dir: Dir { axis: 1, positive: true },
            duration: 1,
            start: vec![2, 1],
        },
    ];
    let trace = DrwTrace {
        dim: 2,
        phases,
        final_position: vec![2, 2],
    };
    let path = embedded_walk(&trace).unwrap();
    assert_eq!(path.steps(), 2);
    assert_eq!(path.position(0), &[0, 0]);
    assert_eq!(path.position(1), &[1, 1]);
    assert_eq!(path.position(2), &[2, 2]);
}

#[test]
fn embedded_walk_of_short_trace_is_origin_only() {
    let cfg = config(2, SwitchRule::Full, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let path = embedded_walk(&trace).unwrap();
    assert_eq!(path.steps(), 0);
    assert_eq!(path.position(0), &[0, 0]);
}

#[test]
fn embedded_increments_match_alternating_sum_law() {
    // The embedded increment components follow the exact mixture law; the
    // final (possibly truncated) increment is dropped.
    let cfg = config(2, SwitchRule::Full, 400_000);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let path = embedded_walk(&trace).unwrap();
    assert!(path.steps() > 10_000, "too few embedded increments");
    let (exact, _) = ExactPmf::law_of_x(&law_31().as_pmf().unwrap(), 20).unwrap();
    let n = path.steps() - 1;
    for coord in 0..2 {
        let samples: Vec<i64> = (0..n)
            .map(|i| path.coord(coord, i + 1) - path.coord(coord, i))
            .collect();
        let res = crate::verify::stats::chi_square_vs_pmf(&samples, &exact);
        assert!(
            res.p_value > 0.01,
            "coord {coord}: chi-square p = {} (stat {}, df {})",
            res.p_value,
            res.stat,
            res.df
        );
    }
}

#[test]
fn horizontal_flip_counts_are_geometric_two_thirds() {
    // The number of horizontal segments between vertical phases has mean
    // 3/2 (geometric with parameter 2/3).
    let cfg = config(2, SwitchRule::Full, 200_000);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let mut runs = Vec::new();
    let mut current = 0u64;
    for p in &trace.phases {
        if p.dir.axis == 0 {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    let n = runs.len() as f64;
    let mean = runs.iter().sum::<u64>() as f64 / n;
    // Geometric(2/3): mean 3/2, variance 3/4.
    let se = (0.75 / n).sqrt();
    assert!((mean - 1.5).abs() < 3.0 * se, "mean run {mean}, se {se}");
}

#[test]
fn perpendicular_vertical_component_is_symmetric() {
    // Under the perpendicular rule in d = 3, vertical-run displacements
    // form a symmetric 1D walk.
    let cfg = DrwConfig {
        initial: InitialDirection::Axis {
            axis: 0,
            positive: true,
        },
        ..config(3, SwitchRule::Perpendicular, 300_000)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let vertical = 2usize;
    let mut displacements = Vec::new();
    let mut in_run = false;
    let mut run_start = 0i64;
    for (i, p) in trace.phases.iter().enumerate() {
        if p.dir.axis == vertical && !in_run {
            in_run = true;
            run_start = p.start[vertical];
        }
        if in_run && p.dir.axis != vertical {
            displacements.push(p.start[vertical] - run_start);
            in_run = false;
        }
        let _ = i;
    }
    let n = displacements.len() as f64;
    let pos = displacements.iter().filter(|&&d| d > 0).count() as f64;
    let neg = displacements.iter().filter(|&&d| d < 0).count() as f64;
    let mean: f64 = displacements.iter().sum::<i64>() as f64 / n;
    let var: f64 =
        displacements.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 3.0 * (var / n).sqrt() + 1e-12, "mean {mean}");
    // Up and down displacements are equally likely.
    let diff = (pos - neg).abs() / (pos + neg).sqrt();
    assert!(diff < 3.5, "sign imbalance {diff}");
}

#[test]
fn point_events_far_point_and_bound() {
    let cfg = DrwConfig {
        law: WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 2, 2)]).unwrap(),
        ..config(2, SwitchRule::Full, 2000)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    // A far point is never visited.
    let far = point_events(&trace, &[1_000_000, 0]).unwrap();
    assert_eq!(far.visits, 0);
    assert_eq!(far.direction_changes, 0);
    // Bookkeeping bound at a frequently-visited point.
    for point in [[0i64, 0], [1, 0], [0, 1], [-1, -1]] {
        let ev = point_events(&trace, &point).unwrap();
        assert!(
            ev.direction_changes <= ev.visits + 1,
            "changes {} > visits {} + 1 at {point:?}",
            ev.direction_changes,
            ev.visits
        );
        assert!(ev.time_visits <= ev.visits);
    }
    assert!(point_events(&trace, &[0, 0, 0]).is_err());
}

#[test]
fn config_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    assert!(simulate_drw(&config(1, SwitchRule::Perpendicular, 5), &mut rng).is_err());
    assert!(simulate_drw(&config(2, SwitchRule::Full, 0), &mut rng).is_err());
    let bad_axis = DrwConfig {
        initial: InitialDirection::Axis {
            axis: 5,
            positive: true,
        },
        ..config(2, SwitchRule::Full, 5)
    };
    assert!(simulate_drw(&bad_axis, &mut rng).is_err());
}

#[test]
fn trace_csv_shape() {
    let cfg = config(3, SwitchRule::Full, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trace = simulate_drw(&cfg, &mut rng).unwrap();
    let csv = trace.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "phase_index,direction,duration,start_x0,start_x1,start_x2");
    assert_eq!(lines.len(), 5);
}
