//! Surface-code resource estimation.
//!
//! Flags are only useful if their own error rate is well below the body
//! noise they guard, so each flag qubit is imagined as a distance-`d`
//! rotated-surface-code logical qubit. An empirical fit maps the base noise
//! strength and the distance to the flag's logical error rate:
//!
//! ```text
//! p_f(p_ncs, d) = 0.08 * (p_ncs / 0.0053)^(0.58 d - 0.27)
//! ```
//!
//! Below the pseudo-threshold `p_ncs = 0.0053` the rate falls exponentially
//! with `d`; at the threshold it is flat at `0.08`; above it no distance
//! helps. [`required_distance`] inverts the fit to the smallest odd `d >= 3`
//! meeting a target rate, and [`estimate_total`] prices a flagged circuit in
//! physical qubits (`2 d^2 - 1` per flag). Totals exclude the machinery for
//! error-corrected flag-data interaction, so they are lower bounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchgen::{gen_adder_like, AdderSpec};
use crate::circuit::Circuit;
use crate::flagger::{flag_circuit, FlagBudget};

/// Base noise strength at which the fit's rate stops depending on `d`.
pub const PSEUDO_THRESHOLD: f64 = 0.0053;
/// Flag logical error rate at the pseudo-threshold, for every distance.
pub const RATE_AT_THRESHOLD: f64 = 0.08;

/// Logical error rate of a distance-`d` surface-code flag qubit under base
/// noise `p_ncs`, per the empirical fit above.
pub fn flag_error_rate(p_ncs: f64, d: u32) -> f64 {
    debug_assert!(p_ncs > 0.0 && p_ncs.is_finite(), "p_ncs must be positive");
    debug_assert!(d >= 1, "distance must be at least 1");
    RATE_AT_THRESHOLD * (p_ncs / PSEUDO_THRESHOLD).powf(0.58 * f64::from(d) - 0.27)
}

/// Physical qubits of one rotated-surface-code logical qubit.
pub fn qubits_per_flag(d: u32) -> u64 {
    2 * u64::from(d) * u64::from(d) - 1
}

#[derive(Debug, Error)]
pub enum ResourceError {
    /// No finite odd distance reaches the target rate: either the target is
    /// nonpositive, or the base noise sits at/above the pseudo-threshold
    /// while the target lies below the d=3 floor.
    #[error(
        "no surface-code distance reaches p_f <= {p_f_target} at p_ncs = {p_ncs} \
         (d = 3 already gives {floor})"
    )]
    Infeasible {
        p_ncs: f64,
        p_f_target: f64,
        /// Rate at the smallest allowed distance, d = 3.
        floor: f64,
    },
    #[error("circuit has no flags; nothing to estimate")]
    NoFlags,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Smallest odd `d >= 3` with `flag_error_rate(p_ncs, d) <= p_f_target`.
///
/// Solved in closed form from the fit and then fixed up against the actual
/// formula, so it is exact even when the answer is millions (near the
/// pseudo-threshold the exponential decay gets arbitrarily slow).
pub fn required_distance(p_ncs: f64, p_f_target: f64) -> Result<u32, ResourceError> {
    if !(p_ncs > 0.0) || !p_ncs.is_finite() {
        return Err(ResourceError::InvalidInput(format!(
            "p_ncs must be positive and finite, got {p_ncs}"
        )));
    }
    if !p_f_target.is_finite() {
        return Err(ResourceError::InvalidInput(format!(
            "p_f_target must be finite, got {p_f_target}"
        )));
    }
    let floor = flag_error_rate(p_ncs, 3);
    if p_f_target <= 0.0 {
        return Err(ResourceError::Infeasible {
            p_ncs,
            p_f_target,
            floor,
        });
    }
    if floor <= p_f_target {
        return Ok(3);
    }
    if p_ncs >= PSEUDO_THRESHOLD {
        // Rate is flat or increasing in d: the d = 3 floor is as good as it
        // gets.
        return Err(ResourceError::Infeasible {
            p_ncs,
            p_f_target,
            floor,
        });
    }

    // 0.08 r^(0.58 d - 0.27) <= t  <=>  d >= (ln(t / 0.08) / ln r + 0.27) / 0.58
    // (ln r < 0 here). Start at the analytic bound, then correct for float
    // slop by stepping in exact formula evaluations.
    let ratio = p_ncs / PSEUDO_THRESHOLD;
    let bound = ((p_f_target / RATE_AT_THRESHOLD).ln() / ratio.ln() + 0.27) / 0.58;
    let mut d = (bound.ceil().max(3.0)) as u32;
    if d % 2 == 0 {
        d += 1;
    }
    d = d.max(3);
    while flag_error_rate(p_ncs, d) > p_f_target {
        d += 2;
    }
    while d > 3 && flag_error_rate(p_ncs, d - 2) <= p_f_target {
        d -= 2;
    }
    Ok(d)
}

/// Surface-code cost of protecting a circuit's flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    /// Chosen odd code distance, `>= 3`.
    pub distance: u32,
    /// Flag logical error rate actually achieved at that distance
    /// (`<=` the requested target).
    pub p_f_achieved: f64,
    /// Physical qubits per flag, `2 d^2 - 1`.
    pub qubits_per_flag: u64,
    /// Data qubits plus all flag qubits' physical cost. A lower bound: the
    /// flag-data interaction overhead is excluded.
    pub total_physical_qubits: u64,
}

impl ResourceEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Resource estimate from bare counts: the flag noise target is `m * p_ncs`
/// (flag-gadget gates run at that strength, so the code must hold the flag's
/// logical rate at or below it).
pub fn estimate_from_counts(
    n_data: usize,
    n_flags: usize,
    p_ncs: f64,
    m: f64,
) -> Result<ResourceEstimate, ResourceError> {
    if n_flags == 0 {
        return Err(ResourceError::NoFlags);
    }
    if !(m >= 0.0) || !m.is_finite() {
        return Err(ResourceError::InvalidInput(format!(
            "multiplier m must be nonnegative and finite, got {m}"
        )));
    }
    let d = required_distance(p_ncs, m * p_ncs)?;
    let per_flag = qubits_per_flag(d);
    Ok(ResourceEstimate {
        distance: d,
        p_f_achieved: flag_error_rate(p_ncs, d),
        qubits_per_flag: per_flag,
        total_physical_qubits: n_data as u64 + n_flags as u64 * per_flag,
    })
}

/// Resource estimate for a flagged circuit at base noise `p_ncs` and flag
/// multiplier `m`.
pub fn estimate_total(
    c_flagged: &Circuit,
    p_ncs: f64,
    m: f64,
) -> Result<ResourceEstimate, ResourceError> {
    estimate_from_counts(c_flagged.n_data(), c_flagged.n_flags(), p_ncs, m)
}

/// One line of a resource sweep table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Family size parameter N (not the data-qubit count).
    pub n: usize,
    pub p_ncs: f64,
    pub m: f64,
    /// Required code distance at (p_ncs, m).
    pub d: u32,
    pub total_qubits: u64,
}

/// Stable sweep CSV schema, version 1.
pub fn sweep_csv_header() -> &'static str {
    "n,p_ncs,m,d,total_qubits"
}

impl SweepRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.p_ncs, self.m, self.d, self.total_qubits
        )
    }
}

/// Resource sweep over the adder-like family: one row per
/// `(size, p_ncs, m)` in nested order, flagging each size's circuit with
/// `budget`. Combinations whose distance is infeasible are skipped; sizes
/// whose circuits take no flags are skipped likewise.
pub fn sweep_adder_family(
    sizes: &[usize],
    p_grid: &[f64],
    m_grid: &[f64],
    budget: FlagBudget,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &n in sizes {
        let flagged = flag_circuit(&gen_adder_like(AdderSpec { n_bits: n }), budget);
        if flagged.n_flags() == 0 {
            continue;
        }
        for &p_ncs in p_grid {
            for &m in m_grid {
                if let Ok(est) = estimate_total(&flagged, p_ncs, m) {
                    rows.push(SweepRow {
                        n,
                        p_ncs,
                        m,
                        d: est.distance,
                        total_qubits: est.total_physical_qubits,
                    });
                }
            }
        }
    }
    rows
}
