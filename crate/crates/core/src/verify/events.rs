//! Exact verification of the counting-variable estimate
//! `P(Φ > r) ≥ 1 − r / E(Φ)` for adapted event families whose conditional
//! occurrence probabilities are dominated by their unconditional
//! time-shifted versions.

use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::pmf::Weight;

/// Maximum horizon an event system may declare.
pub const MAX_HORIZON: usize = 16;

/// A finite-horizon Markov event family: time-homogeneous kernel, a
/// per-state event predicate, and a start state. `E₀` is the whole space
/// by convention; `E_n` for `n ≥ 1` is "the state at time n satisfies the
/// predicate".
#[derive(Debug, Clone)]
pub struct EventSystem {
    pub name: String,
    /// `kernel[s]` lists `(target, probability)` with probabilities
    /// summing to one.
    pub kernel: Vec<Vec<(usize, BigRational)>>,
    pub event: Vec<bool>,
    pub start: usize,
    pub horizon: usize,
}

impl EventSystem {
    pub fn validate(&self) -> Result<()> {
        let n = self.kernel.len();
        if self.event.len() != n {
            return Err(Error::Precondition("event predicate length mismatch".into()));
        }
        if self.start >= n {
            return Err(Error::Precondition("start state out of range".into()));
        }
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return Err(Error::Precondition(format!(
                "horizon must be in 1..={MAX_HORIZON}"
            )));
        }
        for (s, row) in self.kernel.iter().enumerate() {
            let mut total = BigRational::zero();
            for (t, p) in row {
                if *t >= n {
                    return Err(Error::Precondition(format!("state {s} jumps out of range")));
                }
                if p.is_negative() {
                    return Err(Error::Precondition("negative transition probability".into()));
                }
                total += p;
            }
            if !total.is_one() {
                return Err(Error::Precondition(format!(
                    "row {s} sums to {total}, not 1"
                )));
            }
        }
        Ok(())
    }

    fn step_distribution(&self, dist: &[BigRational]) -> Vec<BigRational> {
        let mut next = vec![BigRational::zero(); self.kernel.len()];
        for (s, p) in dist.iter().enumerate() {
            if num::Zero::is_zero(p) {
                continue;
            }
            for (t, q) in &self.kernel[s] {
                next[*t] = &next[*t] + &(p * q);
            }
        }
        next
    }

    fn event_mass(&self, dist: &[BigRational]) -> BigRational {
        dist.iter()
            .enumerate()
            .filter(|(s, _)| self.event[*s])
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// `P(event after j steps | start in `from`)` for `j = 0..=horizon`.
    fn event_profile(&self, from: usize) -> Vec<BigRational> {
        let mut dist = vec![BigRational::zero(); self.kernel.len()];
        dist[from] = BigRational::one();
        let mut out = Vec::with_capacity(self.horizon + 1);
        out.push(self.event_mass(&dist));
        for _ in 0..self.horizon {
            dist = self.step_distribution(&dist);
            out.push(self.event_mass(&dist));
        }
        out
    }
}

/// One row of the report: exact `P(Φ > r)` against the bound `1 − r/E(Φ)`.
#[derive(Debug, Clone)]
pub struct RecurreventsRow {
    pub r: u64,
    pub p_phi_gt_r: BigRational,
    pub bound: BigRational,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct RecurreventsReport {
    pub name: String,
    pub e_phi: BigRational,
    pub rows: Vec<RecurreventsRow>,
    pub all_hold: bool,
}

/// Verifies the domination hypothesis exhaustively, computes the exact law
/// of the counting variable Φ (including `E₀`), and checks the bound for
/// every `r` in the grid.
pub fn check_recurrevents(system: &EventSystem, r_grid: &[u64]) -> Result<RecurreventsReport> {
    system.validate()?;
    let n_states = system.kernel.len();
    let horizon = system.horizon;

    // Hypothesis: for every state s in the event set reachable at time m
    // with positive probability, P(E_{m+j} | state s at m) ≤ P(E_j) for
    // all j ≤ horizon − m. The kernel is time-homogeneous, so the
    // conditional probability is P_s(event after j steps); checking from
    // the earliest reach time of each state covers every later one.
    let unconditional = system.event_profile(system.start);
    {
        let mut earliest_reach: Vec<Option<usize>> = vec![None; n_states];
        let mut dist = vec![BigRational::zero(); n_states];
        dist[system.start] = BigRational::one();
        for m in 1..horizon {
            dist = system.step_distribution(&dist);
            for (s, p) in dist.iter().enumerate() {
                if !num::Zero::is_zero(p) && system.event[s] && earliest_reach[s].is_none() {
                    earliest_reach[s] = Some(m);
                }
            }
        }
        for s in 0..n_states {
            if let Some(m) = earliest_reach[s] {
                let profile = system.event_profile(s);
                for j in 1..=horizon - m {
                    if profile[j] > unconditional[j] {
                        return Err(Error::HypothesisViolation { m, n: m + j, state: s });
                    }
                }
            }
        }
    }

    // Exact law of Φ = 1 + #{1 ≤ n ≤ horizon : E_n} by dynamic programming
    // over (state, count).
    let mut dp: Vec<Vec<BigRational>> =
        vec![vec![BigRational::zero(); horizon + 2]; n_states];
    dp[system.start][1] = BigRational::one(); // E₀ always occurs
    for _ in 0..horizon {
        let mut next: Vec<Vec<BigRational>> =
            vec![vec![BigRational::zero(); horizon + 2]; n_states];
        for s in 0..n_states {
            for c in 0..=horizon + 1 {
                let p = &dp[s][c];
                if num::Zero::is_zero(p) {
                    continue;
                }
                for (t, q) in &system.kernel[s] {
                    let c2 = c + usize::from(system.event[*t]);
                    next[*t][c2] = &next[*t][c2] + &(p * q);
                }
            }
        }
        dp = next;
    }
    let mut phi_law = vec![BigRational::zero(); horizon + 2];
    for s in 0..n_states {
        for c in 0..=horizon + 1 {
            phi_law[c] = &phi_law[c] + &dp[s][c];
        }
    }

    let e_phi: BigRational = phi_law
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (c, p)| {
            acc + p * BigRational::from_integer(num::BigInt::from(c))
        });

    let mut rows = Vec::new();
    for &r in r_grid {
        let p_gt: BigRational = phi_law
            .iter()
            .enumerate()
            .filter(|(c, _)| *c as u64 > r)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p);
        let bound = &BigRational::one()
            - &(BigRational::from_integer(num::BigInt::from(r)) / &e_phi);
        let holds = p_gt >= bound;
        rows.push(RecurreventsRow {
            r,
            p_phi_gt_r: p_gt,
            bound,
            holds,
        });
    }
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(RecurreventsReport {
        name: system.name.clone(),
        e_phi,
        rows,
        all_hold,
    })
}

// ── System catalog ────────────────────────────────────────────────────────────

fn rat(n: i64, d: i64) -> BigRational {
    <BigRational as Weight>::from_ratio(n, d)
}

/// iid events of probability `num/den` at each step.
pub fn bernoulli_iid(num: i64, den: i64, horizon: usize) -> EventSystem {
    let row = vec![(1usize, rat(num, den)), (0usize, rat(den - num, den))];
    EventSystem {
        name: format!("bernoulli_{num}_{den}"),
        kernel: vec![row.clone(), row],
        event: vec![false, true],
        start: 0,
        horizon,
    }
}

/// Events that occur at every step with certainty.
pub fn all_certain(horizon: usize) -> EventSystem {
    EventSystem {
        name: "all_certain".into(),
        kernel: vec![vec![(0, rat(1, 1))]],
        event: vec![true],
        start: 0,
        horizon,
    }
}

/// Returns to the start of a lattice walk with steps −1/0/+1 weighted
/// `(down, stay, up)` (denominator `den`), truncated nowhere: the state
/// space covers every position reachable within the horizon.
pub fn walk_return(down: i64, stay: i64, up: i64, den: i64, horizon: usize) -> EventSystem {
    assert_eq!(down + stay + up, den);
    let span = horizon as i64;
    let width = (2 * span + 1) as usize;
    let idx = |x: i64| (x + span) as usize;
    let mut kernel = vec![Vec::new(); width];
    for x in -span..=span {
        let mut row = Vec::new();
        // Clamp at the (unreachable-in-time) edges to keep rows stochastic.
        let xd = (x - 1).max(-span);
        let xu = (x + 1).min(span);
        if down > 0 {
            row.push((idx(xd), rat(down, den)));
        }
        if stay > 0 {
            row.push((idx(x), rat(stay, den)));
        }
        if up > 0 {
            row.push((idx(xu), rat(up, den)));
        }
        kernel[idx(x)] = row;
    }
    let mut event = vec![false; width];
    event[idx(0)] = true;
    EventSystem {
        name: format!("walk_return_{down}_{stay}_{up}_{den}"),
        kernel,
        event,
        start: idx(0),
        horizon,
    }
}

/// Returns to vertex 0 of the nearest-neighbour walk on a cycle of `m`
/// vertices.
pub fn cycle_return(m: usize, horizon: usize) -> EventSystem {
    let mut kernel = Vec::with_capacity(m);
    for v in 0..m {
        kernel.push(vec![
            ((v + 1) % m, rat(1, 2)),
            ((v + m - 1) % m, rat(1, 2)),
        ]);
    }
    let mut event = vec![false; m];
    event[0] = true;
    EventSystem {
        name: format!("cycle_return_{m}"),
        kernel,
        event,
        start: 0,
        horizon,
    }
}

/// Returns to state 0 of a two-state chain with `P(0→1) = a`, `P(1→0) = b`
/// (rationals over `den`).
pub fn two_state_return(a: i64, b: i64, den: i64, horizon: usize) -> EventSystem {
    EventSystem {
        name: format!("two_state_{a}_{b}_{den}"),
        kernel: vec![
            vec![(1, rat(a, den)), (0, rat(den - a, den))],
            vec![(0, rat(b, den)), (1, rat(den - b, den))],
        ],
        event: vec![true, false],
        start: 0,
        horizon,
    }
}

/// A deliberately non-dominated family: entering the event set guarantees
/// staying in it, used to exercise the hypothesis check.
pub fn sticky_violation(horizon: usize) -> EventSystem {
    EventSystem {
        name: "sticky_violation".into(),
        kernel: vec![
            vec![(1, rat(1, 4)), (0, rat(3, 4))],
            vec![(1, rat(1, 1))],
        ],
        event: vec![false, true],
        start: 0,
        horizon,
    }
}

/// The standard catalog used by the acceptance suite: at least twenty
/// enumerable systems satisfying the domination hypothesis.
pub fn standard_catalog() -> Vec<EventSystem> {
    let mut out = Vec::new();
    for &(num, den) in &[(3i64, 10i64), (1, 2), (1, 10), (9, 10), (2, 3)] {
        out.push(bernoulli_iid(num, den, 10));
    }
    out.push(bernoulli_iid(3, 10, 14));
    out.push(all_certain(12));
    out.push(walk_return(1, 0, 1, 2, 14)); // simple ±1 walk
    out.push(walk_return(1, 2, 1, 4, 14)); // lazy walk
    out.push(walk_return(1, 1, 1, 3, 12)); // uniform {-1,0,1}
    out.push(walk_return(2, 1, 2, 5, 12));
    out.push(walk_return(1, 4, 1, 6, 14));
    out.push(cycle_return(3, 14));
    out.push(cycle_return(4, 14));
    out.push(cycle_return(5, 12));
    out.push(cycle_return(7, 14));
    out.push(two_state_return(1, 1, 2, 14));
    out.push(two_state_return(1, 3, 4, 14));
    out.push(two_state_return(3, 2, 4, 12));
    out.push(two_state_return(1, 1, 10, 14));
    out.push(walk_return(1, 0, 1, 2, 8));
    out.push(walk_return(1, 2, 1, 4, 8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_matches_binomial() {
        // N = 10, p = 0.3: E Φ = 1 + 10·0.3 = 4 and
        // P(Φ > 2) = P(Bin(10, 0.3) ≥ 2) ≈ 0.8507 ≥ 1 − 2/4.
        let sys = bernoulli_iid(3, 10, 10);
        let report = check_recurrevents(&sys, &[0, 1, 2, 3]).unwrap();
        assert_eq!(report.e_phi, rat(4, 1));
        let row = report.rows.iter().find(|r| r.r == 2).unwrap();
        let p = Weight::as_f64(&row.p_phi_gt_r);
        assert!((p - 0.8507).abs() < 1e-3, "P(Φ>2) = {p}");
        assert!(row.holds);
        assert!(report.all_hold);

        // Exact binomial oracle: P(Bin(10,0.3) ≥ 2) = 1 − q¹⁰ − 10·p·q⁹.
        let q = rat(7, 10);
        let p_rat = rat(3, 10);
        let q9 = (0..9).fold(rat(1, 1), |acc, _| acc * &q);
        let expect = rat(1, 1) - &q9 * &q - rat(10, 1) * p_rat * q9;
        assert_eq!(row.p_phi_gt_r, expect);
    }

    #[test]
    fn certain_events_always_occur() {
        let sys = all_certain(12);
        let report = check_recurrevents(&sys, &[0, 3, 12]).unwrap();
        for row in &report.rows {
            if row.r <= 12 {
                assert_eq!(row.p_phi_gt_r, rat(1, 1), "r = {}", row.r);
            }
        }
        assert_eq!(report.e_phi, rat(13, 1));
    }

    #[test]
    fn renewal_walks_pass_hypothesis_and_bound() {
        for sys in [
            walk_return(1, 0, 1, 2, 14),
            walk_return(1, 2, 1, 4, 12),
            cycle_return(4, 12),
        ] {
            let grid: Vec<u64> = (0..=sys.horizon as u64).collect();
            let report = check_recurrevents(&sys, &grid).unwrap();
            assert!(report.all_hold, "{} failed the bound", report.name);
        }
    }

    #[test]
    fn violation_is_detected_with_witness() {
        let sys = sticky_violation(8);
        match check_recurrevents(&sys, &[0, 1]) {
            Err(crate::error::Error::HypothesisViolation { m, n, state }) => {
                assert!(state == 1 && n > m, "witness (m={m}, n={n}, state={state})");
            }
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn catalog_is_large_enough_and_valid() {
        let cat = standard_catalog();
        assert!(cat.len() >= 20);
        for sys in &cat {
            sys.validate().unwrap();
            assert!(sys.horizon <= 14);
        }
    }

    #[test]
    fn rejects_malformed_systems() {
        let mut sys = bernoulli_iid(1, 2, 10);
        sys.kernel[0][0].1 = rat(3, 4); // row no longer sums to 1
        assert!(sys.validate().is_err());
        let mut sys = bernoulli_iid(1, 2, 10);
        sys.horizon = 40;
        assert!(sys.validate().is_err());
    }
}
