//! Lemma oracles, Monte Carlo estimators, and estimate-vs-bound checks.

pub mod estimate;
pub mod events;
pub mod lemmas;
pub mod stats;

use serde::Serialize;

pub use estimate::{
    check_qkn2, check_quantile_bound, estimate_event_prob, exact_return_probs, fit_exponent,
    series_partial_sums, EstimateRequest, EstimateWithCI, EventSpec, FitResult, QknRow,
    QuantileBoundReport, SeriesRow, WalkKind,
};
pub use events::{check_recurrevents, standard_catalog, EventSystem, RecurreventsReport};
pub use lemmas::{
    check_maxest, check_momest, check_unimod, check_unimodest, log_series_deviation,
    MaxestReport, MomestReport, UnimodReport, UnimodestReport, D_PRIME,
};

/// One row of a machine-readable check report:
/// `check_name,param_summary,lhs,rhs,margin,holds`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl CheckRow {
    /// A check of the form `lhs ≤ rhs`; margin is the distance from
    /// violation.
    pub fn le(check: &str, params: String, lhs: f64, rhs: f64, holds: bool) -> Self {
        CheckRow {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            margin: rhs - lhs,
            holds,
        }
    }

    /// A check of the form `lhs ≥ rhs`.
    pub fn ge(check: &str, params: String, lhs: f64, rhs: f64, holds: bool) -> Self {
        CheckRow {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            margin: lhs - rhs,
            holds,
        }
    }
}

/// CSV emission for check rows.
pub fn checks_to_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("check_name,param_summary,lhs,rhs,margin,holds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.check, r.params, r.lhs, r.rhs, r.margin, r.holds
        ));
    }
    out
}
