//! Verification suites behind `walklab verify --suite <name>`.
//!
//! Each suite returns machine-readable check rows plus any CSV artifacts
//! to be written alongside the report. All randomness is derived from the
//! master seed through counter-based streams, so reruns are byte-identical.

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walklab_core::hierarchy::{compute_a, WaitingTimeLaw};
use walklab_core::pmf::{ExactPmf, Weight};
use walklab_core::stream::StreamKey;
use walklab_core::verify::{
    check_maxest, check_momest, check_qkn2, check_quantile_bound, check_recurrevents,
    check_unimod, check_unimodest, estimate_event_prob, log_series_deviation, series_partial_sums,
    standard_catalog, stats, CheckRow, EstimateRequest, EstimateWithCI, EventSpec, WalkKind,
    D_PRIME,
};
use walklab_core::walks::sample_increment_value;

pub struct SuiteResult {
    pub rows: Vec<CheckRow>,
    /// `(file name, contents)` artifacts to write next to the report.
    pub artifacts: Vec<(String, String)>,
}

fn rat(n: i64, d: i64) -> BigRational {
    <BigRational as Weight>::from_ratio(n, d)
}

/// Random mixture of `R[0, y]` (equivalently, a non-increasing law).
fn random_nonincreasing(rng: &mut ChaCha8Rng, max_levels: usize, max_y: i64) -> ExactPmf {
    let levels = rng.random_range(1..=max_levels);
    let parts: Vec<(i64, u32)> = (0..levels)
        .map(|_| (rng.random_range(0..=max_y), rng.random_range(1..8)))
        .collect();
    let total: u32 = parts.iter().map(|(_, w)| w).sum();
    let comps: Vec<(BigRational, ExactPmf)> = parts
        .into_iter()
        .map(|(y, w)| {
            (
                rat(w as i64, total as i64),
                ExactPmf::uniform(0, y).expect("valid interval"),
            )
        })
        .collect();
    let refs: Vec<(BigRational, &ExactPmf)> = comps.iter().map(|(w, p)| (w.clone(), p)).collect();
    ExactPmf::mix(&refs).expect("convex mixture")
}

/// Random symmetric unimodal law with standard deviation at least one.
fn random_symmetric_unimodal(rng: &mut ChaCha8Rng) -> ExactPmf {
    loop {
        let levels = rng.random_range(1..4usize);
        let parts: Vec<(i64, u32)> = (0..levels)
            .map(|_| (rng.random_range(0..=24), rng.random_range(1..8)))
            .collect();
        let total: u32 = parts.iter().map(|(_, w)| w).sum();
        let comps: Vec<(BigRational, ExactPmf)> = parts
            .into_iter()
            .map(|(y, w)| {
                (
                    rat(w as i64, total as i64),
                    ExactPmf::uniform(-y, y).expect("valid interval"),
                )
            })
            .collect();
        let refs: Vec<(BigRational, &ExactPmf)> =
            comps.iter().map(|(w, p)| (w.clone(), p)).collect();
        let mu = ExactPmf::mix(&refs).expect("convex mixture");
        if mu.moments().variance >= rat(1, 1) {
            return mu;
        }
    }
}

/// The exact appendix-lemma suite: moment inequality, alternating-sum
/// shape and variance identities, the small-ball lower bound with the
/// derived constant, the concentration grid, the counting-variable bound,
/// and the log-series identity.
pub fn lemmas_suite(seed: u64) -> anyhow::Result<SuiteResult> {
    let mut rows = Vec::new();

    // Moment inequality over 10,000 randomized mixtures, exact.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f6d); // "mom"
    let mut failures = 0u64;
    for _ in 0..10_000 {
        let tau = random_nonincreasing(&mut rng, 8, 30);
        let r = check_momest(&tau)?;
        if !r.holds || !r.corollary_holds {
            failures += 1;
        }
    }
    rows.push(CheckRow::le(
        "momest",
        "10000 randomized mixtures".into(),
        failures as f64,
        0.0,
        failures == 0,
    ));

    // Alternating-sum law: shape + Wald identity + variance sandwich.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x756e69); // "uni"
    let mut failures = 0u64;
    for _ in 0..100 {
        let tau = random_nonincreasing(&mut rng, 4, 6);
        let r = check_unimod(&tau, 20)?;
        if !(r.symmetric && r.unimodal && r.wald_matches && r.sandwich_holds) {
            failures += 1;
        }
    }
    rows.push(CheckRow::le(
        "unimod",
        "100 randomized laws, g_max=20".into(),
        failures as f64,
        0.0,
        failures == 0,
    ));

    // Small-ball lower bound with the derived constant d'.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x626c6c); // "bll"
    let mut failures = 0u64;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..1000 {
        let mu = random_symmetric_unimodal(&mut rng);
        let sigma = Weight::as_f64(&mu.moments().variance).sqrt();
        let grid: Vec<f64> = (1..=sigma.floor() as i64).map(|c| c as f64).collect();
        let r = check_unimodest(&mu, &grid)?;
        if !r.holds {
            failures += 1;
        }
        min_ratio = min_ratio.min(r.min_ratio);
    }
    rows.push(CheckRow::ge(
        "unimodest",
        format!("1000 randomized laws, min ratio {min_ratio:.4}"),
        min_ratio,
        D_PRIME,
        failures == 0,
    ));

    // Concentration grid, exact supremum.
    let maxest = check_maxest(&[1, 2, 4, 8, 16], &[1, 2, 4, 8, 16, 32, 64])?;
    rows.push(CheckRow::le(
        "maxest",
        "grid m in 1..64, y in 1..16".into(),
        maxest.sup,
        1.5,
        maxest.within_bound,
    ));

    // Counting-variable bound over the catalog, exact.
    for system in standard_catalog() {
        let grid: Vec<u64> = (0..=system.horizon as u64).collect();
        let report = check_recurrevents(&system, &grid)?;
        let worst = report
            .rows
            .iter()
            .map(|r| Weight::as_f64(&r.p_phi_gt_r) - Weight::as_f64(&r.bound))
            .fold(f64::INFINITY, f64::min);
        rows.push(CheckRow::ge(
            "recurrevents",
            report.name.clone(),
            worst,
            0.0,
            report.all_hold,
        ));
    }

    // Log-series identity used inside bound computations.
    for q in [0.5, 0.1, 0.01] {
        let dev = log_series_deviation(q);
        rows.push(CheckRow::le(
            "logseries",
            format!("q={q}"),
            dev,
            1e-10,
            dev < 1e-10,
        ));
    }

    Ok(SuiteResult {
        rows,
        artifacts: Vec::new(),
    })
}

fn chi_square_counts(counts: &[u64], expected: &[f64]) -> f64 {
    counts
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Statistical checks of the coupled bundle construction and the embedded
/// walk of the reinforced walk.
pub fn coupling_suite(seed: u64) -> anyhow::Result<SuiteResult> {
    let mut rows = Vec::new();
    let law = WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 4, 10), (1, 4, 100)])?;
    let sampler = law.sampler()?;

    // Marginal of T⁽¹⁾ against the level-1 truncation at 10⁶ draws.
    let key = StreamKey::new(seed, 0xC0);
    {
        let n = 1_000_000u64;
        let mut counts = [0u64; 2];
        let mut rng = key.stream(1);
        for _ in 0..n {
            let b = sampler.sample_bundle(1, &mut rng);
            counts[b.levels[0] as usize] += 1;
        }
        let expected = [n as f64 / 2.0, n as f64 / 2.0];
        let stat = chi_square_counts(&counts, &expected);
        let p = stats::chi_square_p_value(stat, 1.0);
        rows.push(CheckRow::ge(
            "bundle-marginal",
            "T(1) vs truncated law, 1e6 draws".into(),
            p,
            0.01,
            p > 0.01,
        ));
    }

    // Independence of (T⁽¹⁾, 1{κ = 3}) at 10⁶ draws.
    {
        let n = 1_000_000u64;
        let mut table = vec![vec![0u64; 2]; 2];
        let mut rng = key.stream(2);
        for _ in 0..n {
            let b = sampler.sample_bundle(1, &mut rng);
            table[b.levels[0] as usize][usize::from(b.kappa == 3)] += 1;
        }
        let res = stats::chi_square_independence(&table);
        rows.push(CheckRow::ge(
            "bundle-coupling-independence",
            "(T(1), kappa=3) joint, 1e6 draws".into(),
            res.p_value,
            0.001,
            res.p_value > 0.001,
        ));
    }

    // Truncated bundle at K = L is indistinguishable from the plain one.
    {
        let n = 100_000u64;
        let expected: Vec<f64> = [0.5, 0.25, 0.25].iter().map(|p| p * n as f64).collect();
        for (name, sub) in [("plain", 3u64), ("truncated", 4u64)] {
            let mut counts = [0u64; 3];
            let mut rng = key.stream(sub);
            for _ in 0..n {
                let b = if name == "plain" {
                    sampler.sample_bundle(3, &mut rng)
                } else {
                    sampler.sample_truncated_bundle(3, &mut rng)
                };
                counts[b.kappa - 1] += 1;
            }
            let stat = chi_square_counts(&counts, &expected);
            let p = stats::chi_square_p_value(stat, 2.0);
            rows.push(CheckRow::ge(
                "truncation-consistency",
                format!("{name} kappa distribution, 1e5 draws"),
                p,
                0.01,
                p > 0.01,
            ));
        }
    }

    // Sampled increments against the exact alternating-sum mixture.
    {
        let small = WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 3)])?;
        let s = small.sampler()?;
        let (exact, _) = ExactPmf::law_of_x(&small.as_pmf()?, 20)?;
        let mut rng = key.stream(5);
        let samples: Vec<i64> = (0..100_000)
            .map(|_| sample_increment_value(&s, None, &mut rng))
            .collect();
        let res = stats::chi_square_vs_pmf(&samples, &exact);
        rows.push(CheckRow::ge(
            "increment-vs-oracle",
            "law 3/4:1,1/4:3, 1e5 draws".into(),
            res.p_value,
            0.01,
            res.p_value > 0.01,
        ));
    }

    Ok(SuiteResult {
        rows,
        artifacts: Vec::new(),
    })
}

/// The recursive return-probability estimate on a synthetic two-level law.
pub fn qkn2_suite(seed: u64, replicas: u64, confidence: f64) -> anyhow::Result<SuiteResult> {
    let law = WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 16)])?;
    let key = StreamKey::new(seed, 0xD0);
    let rows_data = check_qkn2(&law, compute_a(), &[16, 64, 256], replicas, confidence, key)?;
    let rows = rows_data
        .iter()
        .map(|r| {
            CheckRow::le(
                "qkn2",
                format!(
                    "n={} s1={:.6} escalated={}",
                    r.n, r.s1_exact, r.escalated
                ),
                r.s_hat.ci_hi,
                r.bound,
                r.holds,
            )
        })
        .collect();
    Ok(SuiteResult {
        rows,
        artifacts: Vec::new(),
    })
}

/// The sign-change-vs-quantile lower bound.
pub fn quantile_suite(seed: u64, replicas: u64, confidence: f64) -> anyhow::Result<SuiteResult> {
    let law = WaitingTimeLaw::from_ratios(&[(1, 2, 1), (1, 2, 15)])?;
    let (x_law, _) = ExactPmf::law_of_x(&law.as_pmf()?, 20)?;
    let key = StreamKey::new(seed, 0xD1);
    let report = check_quantile_bound(&x_law, 0.5, 64, replicas, confidence, key)?;
    let rows = vec![CheckRow::ge(
        "quantile-bound",
        format!("alpha=0.5 n=64 gamma={}", report.gamma),
        report.lhs.ci_hi,
        report.rhs,
        report.holds,
    )];
    Ok(SuiteResult {
        rows,
        artifacts: Vec::new(),
    })
}

/// Partial-sum diagnostics for the return and sign-change series of the
/// level-1 walk: exact return probabilities, Monte Carlo sign changes.
pub fn series_suite(seed: u64, replicas: u64, confidence: f64) -> anyhow::Result<SuiteResult> {
    let law = WaitingTimeLaw::from_ratios(&[(3, 4, 1), (1, 4, 16)])?;
    let level1 = law.truncated(1)?;
    let (x1, _) = walklab_core::pmf::FloatPmf::law_of_x(&level1.as_pmf()?.to_float(), 40)?;
    let grid: Vec<u64> = vec![4, 8, 16, 32, 64, 128, 256];
    let returns: Vec<(u64, EstimateWithCI)> = grid
        .iter()
        .map(|&n| -> anyhow::Result<_> {
            let p = x1.convolve_power(n)?.prob_at(0);
            Ok((
                n,
                EstimateWithCI {
                    point: p,
                    ci_lo: p,
                    ci_hi: p,
                    replicas: 0,
                    seed,
                },
            ))
        })
        .collect::<anyhow::Result<_>>()?;
    let key = StreamKey::new(seed, 0xD2);
    let sign_changes: Vec<(u64, EstimateWithCI)> = grid
        .iter()
        .enumerate()
        .map(|(i, &n)| -> anyhow::Result<_> {
            let req = EstimateRequest {
                kind: WalkKind::Waiting {
                    law: level1.clone(),
                    trunc: None,
                },
                dim: 1,
                event: EventSpec::SignChange,
                n,
                replicas,
                confidence,
            };
            Ok((n, estimate_event_prob(&req, key.sub(i as u64))?))
        })
        .collect::<anyhow::Result<_>>()?;
    let rows_data = series_partial_sums(&returns, &sign_changes)?;
    let mut csv = String::from(
        "n,sum_return_sq,sum_return_sq_lo,sum_return_sq_hi,sum_cross,sum_cross_lo,sum_cross_hi\n",
    );
    for r in &rows_data {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.sum_return_sq,
            r.sum_return_sq_lo,
            r.sum_return_sq_hi,
            r.sum_cross,
            r.sum_cross_lo,
            r.sum_cross_hi
        ));
    }
    // Diagnostic only: emitting the curves is the check.
    let rows = vec![CheckRow::ge(
        "series-partial-sums",
        format!("grid {:?}, diagnostic", grid),
        rows_data.len() as f64,
        grid.len() as f64,
        rows_data.len() == grid.len(),
    )];
    Ok(SuiteResult {
        rows,
        artifacts: vec![("series.csv".to_string(), csv)],
    })
}

/// Wilson-interval calibration against an exactly computable probability.
pub fn calibration_suite(seed: u64) -> anyhow::Result<SuiteResult> {
    let exact = 0.375; // lazy-walk P(S₂ = 0) from the convolution oracle
    let mut covered = 0u64;
    for i in 0..100 {
        let req = EstimateRequest {
            kind: WalkKind::Lazy,
            dim: 1,
            event: EventSpec::ReturnToZero,
            n: 2,
            replicas: 2000,
            confidence: 0.99,
        };
        let est = estimate_event_prob(&req, StreamKey::new(seed, 0xE0).sub(i))?;
        if est.ci_lo <= exact && exact <= est.ci_hi {
            covered += 1;
        }
    }
    let rows = vec![CheckRow::ge(
        "mc-calibration",
        "100 seeds, 99% Wilson vs exact 3/8".into(),
        covered as f64,
        95.0,
        covered >= 95,
    )];
    Ok(SuiteResult {
        rows,
        artifacts: Vec::new(),
    })
}

/// Which suites `--suite all` runs, in order.
pub fn run_suite(
    name: &str,
    seed: u64,
    replicas: Option<u64>,
    confidence: f64,
) -> anyhow::Result<SuiteResult> {
    match name {
        "lemmas" => lemmas_suite(seed),
        "coupling" => coupling_suite(seed),
        "qkn2" => qkn2_suite(seed, replicas.unwrap_or(1_000_000), confidence),
        "quantile" => quantile_suite(seed, replicas.unwrap_or(1_000_000), confidence),
        "series" => series_suite(seed, replicas.unwrap_or(100_000), confidence),
        "calibration" => calibration_suite(seed),
        other => anyhow::bail!("unknown suite {other:?}"),
    }
}

pub const ALL_SUITES: &[&str] = &[
    "lemmas",
    "coupling",
    "qkn2",
    "quantile",
    "series",
    "calibration",
];
