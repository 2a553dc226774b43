//! Inequality-suite runner: a registry of checkers keyed by suite ID,
//! seeded instance generators, and margin reporting.
//!
//! Every checker computes both sides of its inequality from first
//! principles, in code paths independent of the constructive operations it
//! audits. Failures carry the full instance descriptor so any verdict can
//! be replayed from `(suite, seed, N, params)`. Each suite also has a
//! deliberately violated variant so the harness itself can be shown to be
//! capable of failing.

use serde::Serialize;

/// Verdict tolerance: pass iff `rhs - lhs >= -1e-9`.
pub const MARGIN_TOL: f64 = 1e-9;

/// Instance-level verdict for one inequality: LHS, RHS, and margin.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub skipped: bool,
    pub skip_reason: Option<String>,
}

impl CheckReport {
    pub fn new(check_id: &str, lhs: f64, rhs: f64, instance: String) -> Self {
        let margin = rhs - lhs;
        CheckReport {
            check_id: check_id.to_string(),
            instance,
            lhs,
            rhs,
            margin,
            pass: margin >= -MARGIN_TOL,
            skipped: false,
            skip_reason: None,
        }
    }

    pub fn skipped(check_id: &str, instance: String, reason: String) -> Self {
        CheckReport {
            check_id: check_id.to_string(),
            instance,
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            pass: false,
            skipped: true,
            skip_reason: Some(reason),
        }
    }
}

/// Named constants used in right-hand sides, collected in one place.
pub mod constants {
    /// Inverse-theorem exponent constant.
    pub const C0: f64 = 16_777_216.0; // 2^24
    /// Bohr regularity constant.
    pub const REGULARITY: f64 = 100.0;
    /// Centrality window denominators.
    pub const CENTRALITY_LOW: f64 = 400.0;
    pub const CENTRALITY_HIGH: f64 = 200.0;
    /// Cover-cardinality bases for Bohr sets and progressions.
    pub const BOHR_COVER_BASE: f64 = 5.0;
    pub const GAP_COVER_BASE: f64 = 3.0;
}
