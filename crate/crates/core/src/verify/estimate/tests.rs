use super::*;
use crate::hierarchy::compute_a;
use crate::stream::StreamKey;
use crate::walks::{lazy_step_pmf, unit_step_pmf};

fn key(seed: u64) -> StreamKey {
    StreamKey::new(seed, 7)
}

#[test]
fn unit_walk_return_at_two_steps() {
    // P(S₂ = 0) = 1/2 exactly for the ±1 walk.
    let req = EstimateRequest {
        kind: WalkKind::Unit,
        dim: 1,
        event: EventSpec::ReturnToZero,
        n: 2,
        replicas: 200_000,
        confidence: 0.99,
    };
    let est = estimate_event_prob(&req, key(1)).unwrap();
    assert!(est.ci_lo <= 0.5 && 0.5 <= est.ci_hi, "{est:?}");
    assert!((est.point - 0.5).abs() < 0.01);
}

#[test]
fn lazy_walk_return_matches_exact_convolution() {
    // Exact P(S₂ = 0) = 3/8 from the convolution oracle.
    let exact = lazy_step_pmf().to_float().convolve_power(2).unwrap().prob_at(0);
    assert!((exact - 0.375).abs() < 1e-12);
    let req = EstimateRequest {
        kind: WalkKind::Lazy,
        dim: 1,
        event: EventSpec::ReturnToZero,
        n: 2,
        replicas: 200_000,
        confidence: 0.99,
    };
    let est = estimate_event_prob(&req, key(2)).unwrap();
    assert!(est.ci_lo <= exact && exact <= est.ci_hi, "{est:?}");
}

#[test]
fn impossible_event_estimates_zero() {
    // The ±1 walk cannot return at odd times.
    let req = EstimateRequest {
        kind: WalkKind::Unit,
        dim: 1,
        event: EventSpec::ReturnToZero,
        n: 3,
        replicas: 10_000,
        confidence: 0.99,
    };
    let est = estimate_event_prob(&req, key(3)).unwrap();
    assert_eq!(est.point, 0.0);
    assert_eq!(est.ci_lo, 0.0);
}

#[test]
fn degenerate_law_short_circuits() {
    let law = crate::hierarchy::WaitingTimeLaw::from_ratios(&[(1, 1, 0)]).unwrap();
    let req = EstimateRequest {
        kind: WalkKind::Waiting { law, trunc: None },
        dim: 2,
        event: EventSpec::ReturnToZero,
        n: 64,
        replicas: 1000,
        confidence: 0.99,
    };
    let est = estimate_event_prob(&req, key(4)).unwrap();
    assert_eq!(est.point, 1.0);
    assert_eq!((est.ci_lo, est.ci_hi), (1.0, 1.0));
}

#[test]
fn estimate_is_deterministic_for_a_fixed_key() {
    let req = EstimateRequest {
        kind: WalkKind::Lazy,
        dim: 3,
        event: EventSpec::SegmentHit { half: 1.0 },
        n: 16,
        replicas: 50_000,
        confidence: 0.99,
    };
    let a = estimate_event_prob(&req, key(5)).unwrap();
    let b = estimate_event_prob(&req, key(5)).unwrap();
    assert_eq!(a.point, b.point);
    assert_eq!((a.ci_lo, a.ci_hi), (b.ci_lo, b.ci_hi));
}

#[test]
fn calibration_coverage_of_wilson_intervals() {
    // For an exactly computable event, the 99% interval covers the truth
    // in at least 95 of 100 fixed-seed repetitions.
    let exact = 0.375; // lazy P(S₂ = 0)
    let mut covered = 0;
    for seed in 0..100 {
        let req = EstimateRequest {
            kind: WalkKind::Lazy,
            dim: 1,
            event: EventSpec::ReturnToZero,
            n: 2,
            replicas: 2000,
            confidence: 0.99,
        };
        let est = estimate_event_prob(&req, key(1000 + seed)).unwrap();
        if est.ci_lo <= exact && exact <= est.ci_hi {
            covered += 1;
        }
    }
    assert!(covered >= 95, "coverage {covered}/100");
}

#[test]
fn fit_exponent_recovers_exact_power_laws() {
    let mk = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, EstimateWithCI)> {
        [8u64, 16, 32, 64, 128, 256, 512]
            .iter()
            .map(|&n| {
                let p = f(n as f64);
                (
                    n as f64,
                    EstimateWithCI {
                        point: p,
                        ci_lo: p,
                        ci_hi: p,
                        replicas: 0,
                        seed: 0,
                    },
                )
            })
            .collect()
    };
    let fit = fit_exponent(&mk(&|n| n.powf(-0.5)), 0.99).unwrap();
    assert!((fit.slope + 0.5).abs() < 1e-9, "slope {}", fit.slope);
    let fit = fit_exponent(&mk(&|n| 3.7 * n.powf(-1.5)), 0.99).unwrap();
    assert!((fit.slope + 1.5).abs() < 1e-9, "slope {}", fit.slope);
}

#[test]
fn fit_exponent_on_exact_unit_walk_returns() {
    // Exact P(S_{2m} = 0) over a dyadic grid gives slope ≈ −1/2.
    let step = unit_step_pmf().to_float();
    let grid: Vec<u64> = vec![8, 16, 32, 64, 128, 256, 512];
    let probs = exact_return_probs(&step, &grid).unwrap();
    let samples: Vec<(f64, EstimateWithCI)> = probs
        .into_iter()
        .map(|(n, p)| {
            (
                n as f64,
                EstimateWithCI {
                    point: p,
                    ci_lo: p,
                    ci_hi: p,
                    replicas: 0,
                    seed: 0,
                },
            )
        })
        .collect();
    let fit = fit_exponent(&samples, 0.99).unwrap();
    assert!(
        fit.slope > -0.56 && fit.slope < -0.44,
        "slope {}",
        fit.slope
    );
}

#[test]
fn fit_exponent_excludes_zero_points() {
    let mut samples: Vec<(f64, EstimateWithCI)> = [8u64, 16, 32, 64, 128]
        .iter()
        .map(|&n| {
            let p = (n as f64).powf(-0.5);
            (
                n as f64,
                EstimateWithCI {
                    point: p,
                    ci_lo: p,
                    ci_hi: p,
                    replicas: 0,
                    seed: 0,
                },
            )
        })
        .collect();
    samples.push((
        256.0,
        EstimateWithCI {
            point: 0.0,
            ci_lo: 0.0,
            ci_hi: 0.0,
            replicas: 0,
            seed: 0,
        },
    ));
    let fit = fit_exponent(&samples, 0.99).unwrap();
    assert_eq!(fit.excluded, vec![5]);
    assert!((fit.slope + 0.5).abs() < 1e-9);
    // Too few positive points is an error.
    assert!(fit_exponent(&samples[..3], 0.99).is_err());
}

#[test]
fn quantile_bound_holds_for_spread_law() {
    // A law with real spread: on the lattice the zero atom of S_n would
    // dominate the right-hand side for tightly concentrated increments.
    let law = crate::hierarchy::WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 2, 15)]).unwrap();
    let (x_law, _) = crate::pmf::ExactPmf::law_of_x(&law.as_pmf().unwrap(), 20).unwrap();
    let report = check_quantile_bound(&x_law, 0.5, 64, 200_000, 0.99, key(6)).unwrap();
    assert!(report.holds, "{report:?}");
    assert!(report.lhs.point > 0.0);
}

#[test]
fn quantile_bound_degenerate_and_extreme_alpha() {
    let degenerate = crate::pmf::ExactPmf::delta(0);
    let r = check_quantile_bound(&degenerate, 0.5, 16, 1000, 0.99, key(7)).unwrap();
    assert!(r.holds);
    assert_eq!(r.lhs.point, 0.0);
    assert_eq!(r.rhs, 0.0);

    // Alpha near 1 puts γ at 0; the weakest form still runs and holds.
    let law = crate::hierarchy::WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 2, 15)]).unwrap();
    let (x_law, _) = crate::pmf::ExactPmf::law_of_x(&law.as_pmf().unwrap(), 20).unwrap();
    let r = check_quantile_bound(&x_law, 0.99, 16, 100_000, 0.99, key(8)).unwrap();
    assert_eq!(r.gamma, 0);
    assert!(r.holds, "{r:?}");
}

#[test]
fn qkn2_holds_on_a_small_grid() {
    let law = crate::hierarchy::WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 16)]).unwrap();
    let rows = check_qkn2(&law, compute_a(), &[16, 64], 100_000, 0.99, key(9)).unwrap();
    for row in &rows {
        assert!(row.holds, "{row:?}");
        assert!(row.s_hat.ci_hi <= row.bound);
    }
    // n = 1: the one-step exact law pins P(X⁽²⁾ = 0) directly.
    let (x2, _) =
        crate::pmf::FloatPmf::law_of_x(&law.as_pmf().unwrap().to_float(), 40).unwrap();
    let rows = check_qkn2(&law, compute_a(), &[1], 200_000, 0.99, key(10)).unwrap();
    let exact_p0 = x2.prob_at(0);
    assert!(
        rows[0].s_hat.ci_lo <= exact_p0 && exact_p0 <= rows[0].s_hat.ci_hi,
        "exact {exact_p0} outside {:?}",
        rows[0].s_hat
    );
}

#[test]
fn qkn2_rejects_degenerate_inputs() {
    let one_level = crate::hierarchy::WaitingTimeLaw::from_ratios(&[(1, 1, 4)]).unwrap();
    assert!(check_qkn2(&one_level, compute_a(), &[16], 1000, 0.99, key(11)).is_err());
    let tiny_p2 =
        crate::hierarchy::WaitingTimeLaw::from_ratios(&[(9_999_999, 10_000_000, 1), (1, 10_000_000, 8)])
            .unwrap();
    assert!(check_qkn2(&tiny_p2, compute_a(), &[16], 1000, 0.99, key(12)).is_err());
}

#[test]
fn series_partial_sums_track_the_harmonic_series() {
    // p_n = n^{-1/2} exactly: Σ p_n² is the harmonic series.
    let grid: Vec<u64> = vec![4, 8, 16, 32, 64, 128, 256];
    let exact = |n: u64| -> EstimateWithCI {
        let p = (n as f64).powf(-0.5);
        EstimateWithCI {
            point: p,
            ci_lo: p,
            ci_hi: p,
            replicas: 0,
            seed: 0,
        }
    };
    let returns: Vec<(u64, EstimateWithCI)> = grid.iter().map(|&n| (n, exact(n))).collect();
    let rows = series_partial_sums(&returns, &returns).unwrap();
    // Power-law interpolation reproduces p_n = n^{-1/2} exactly between
    // grid points, so the partial sum is Σ_{n=4}^{N} 1/n.
    let last = rows.last().unwrap();
    let harmonic: f64 = (4..=256).map(|n| 1.0 / n as f64).sum();
    assert!(
        (last.sum_return_sq - harmonic).abs() < 1e-6,
        "{} vs {harmonic}",
        last.sum_return_sq
    );
    // Faster decay converges: p_n = n^{-0.6}.
    let fast = |n: u64| -> EstimateWithCI {
        let p = (n as f64).powf(-0.6);
        EstimateWithCI {
            point: p,
            ci_lo: p,
            ci_hi: p,
            replicas: 0,
            seed: 0,
        }
    };
    let fast_grid: Vec<(u64, EstimateWithCI)> = grid.iter().map(|&n| (n, fast(n))).collect();
    let rows = series_partial_sums(&fast_grid, &fast_grid).unwrap();
    let tail_growth = rows.last().unwrap().sum_return_sq
        - rows[rows.len() - 2].sum_return_sq;
    assert!(tail_growth < 0.9 * (rows[1].sum_return_sq - rows[0].sum_return_sq));
}

#[test]
fn request_validation() {
    let bad = EstimateRequest {
        kind: WalkKind::Unit,
        dim: 2,
        event: EventSpec::SignChange,
        n: 4,
        replicas: 1000,
        confidence: 0.99,
    };
    assert!(estimate_event_prob(&bad, key(13)).is_err());
    let few = EstimateRequest {
        kind: WalkKind::Unit,
        dim: 1,
        event: EventSpec::ReturnToZero,
        n: 4,
        replicas: 10,
        confidence: 0.99,
    };
    assert!(estimate_event_prob(&few, key(14)).is_err());
}
