//! Auto-tuning of the flag noise multiplier `m`.
//!
//! Given a flagless circuit and a target failure rate, [`tune`] searches for
//! the smallest flag count `f` and a multiplier `m` such that the flagged
//! circuit's post-selected failure rate matches the target within `epsilon`.
//! For each `f` (prefixes of the ranked candidate list) the search bisects
//! `m` over `(0, 1)`: the rate is non-decreasing in `m`, so an overshooting
//! midpoint moves the upper bound down and an undershooting one moves the
//! lower bound up. The bisection depth is `ceil(log2(M))` where `M` is the
//! requested resolution (maximum number of distinguishable leaves). When
//! every midpoint overshoots, the floor of the current window configuration
//! is probed once at `m = 0` (perfect flags) before moving to a larger `f`,
//! so each `f` costs at most `ceil(log2(M)) + 1` objective evaluations.
//!
//! Evaluations on a Monte Carlo objective are noisy; an estimate whose
//! standard error exceeds `epsilon / 2` is rerun with doubled shots (up to
//! 16x the configured baseline) before the comparison against the target is
//! trusted. Reruns extend the same counter-based shot stream, so they refine
//! rather than replace the earlier sample; they are folded into their
//! logical evaluation and do not count against the evaluation budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchgen::{gen_adder_like, AdderSpec};
use crate::circuit::Circuit;
use crate::flagger::{flag_circuit, FlagBudget};
use crate::montecarlo::{estimate, MonteCarloError, NoiseModel, SimConfig};

/// Which rate the search drives toward the target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneObjective {
    /// Post-selected failure rate (failures among flag-accepted shots).
    /// This is the operating mode of a post-selecting experiment and the
    /// default.
    #[default]
    Psfr,
    /// Raw failure rate, ignoring flag outcomes.
    Fr,
}

impl std::fmt::Display for TuneObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TuneObjective::Psfr => write!(f, "psfr"),
            TuneObjective::Fr => write!(f, "fr"),
        }
    }
}

impl std::str::FromStr for TuneObjective {
    type Err = TuneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psfr" => Ok(TuneObjective::Psfr),
            "fr" => Ok(TuneObjective::Fr),
            other => Err(TuneError::InvalidRequest(format!(
                "unknown objective {other:?}; expected \"psfr\" or \"fr\""
            ))),
        }
    }
}

/// Default tolerance on `|rate - target|`.
pub const DEFAULT_EPSILON: f64 = 5e-4;
/// Default resolution `M`: maximum number of binary-search leaves.
pub const DEFAULT_M_RESOLUTION: usize = 1024;
/// A noisy evaluation may double its shots until reaching this multiple of
/// the configured per-input baseline.
pub const SHOT_DOUBLING_CAP: u64 = 16;

/// Everything the tuner needs besides the circuit itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRequest {
    /// Failure rate to hit, in `[0, 1]`.
    pub fr_target: f64,
    /// Convergence tolerance on `|rate - target|`; must be positive.
    pub epsilon: f64,
    /// Largest flag count to try (further capped by the data-qubit count and
    /// by candidate availability).
    pub f_max: usize,
    /// Resolution `M >= 2`: the bisection runs `ceil(log2(M))` levels deep.
    pub m_resolution: usize,
    /// Baseline Monte Carlo configuration; `seed` seeds the whole search and
    /// `shots_per_input` is the starting point for the doubling control.
    pub sim: SimConfig,
    /// Base two-qubit depolarizing strength on body CNOTs.
    pub p_ncs: f64,
    /// Which rate to tune.
    pub objective: TuneObjective,
}

impl TuneRequest {
    /// A request with the default tolerance, resolution, and objective.
    pub fn new(fr_target: f64, f_max: usize, p_ncs: f64, sim: SimConfig) -> TuneRequest {
        TuneRequest {
            fr_target,
            epsilon: DEFAULT_EPSILON,
            f_max,
            m_resolution: DEFAULT_M_RESOLUTION,
            sim,
            p_ncs,
            objective: TuneObjective::default(),
        }
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        if !(0.0..=1.0).contains(&self.fr_target) || !self.fr_target.is_finite() {
            return Err(TuneError::InvalidRequest(format!(
                "fr_target must be in [0, 1], got {}",
                self.fr_target
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(TuneError::InvalidRequest(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.f_max < 1 {
            return Err(TuneError::InvalidRequest(
                "f_max must be at least 1".to_owned(),
            ));
        }
        if self.m_resolution < 2 {
            return Err(TuneError::InvalidRequest(format!(
                "m_resolution must be at least 2, got {}",
                self.m_resolution
            )));
        }
        Ok(())
    }

    /// Bisection depth: `ceil(log2(m_resolution))`.
    pub fn depth(&self) -> u32 {
        debug_assert!(self.m_resolution >= 2);
        usize::BITS - (self.m_resolution - 1).leading_zeros()
    }
}

/// One logical objective evaluation, in search order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Flag count in effect.
    pub f: usize,
    /// Multiplier evaluated.
    pub m: f64,
    /// Observed rate (per the request's objective).
    pub fr: f64,
    /// Standard error of `fr` after any shot doubling.
    pub se: f64,
    /// Shots per input the final (trusted) estimate used.
    pub shots_per_input: u64,
}

/// Outcome of a tuning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    /// Chosen multiplier.
    pub m: f64,
    /// Flag count used with `m`.
    pub f: usize,
    /// Rate observed at `(f, m)`.
    pub achieved_fr: f64,
    /// Standard error of `achieved_fr`.
    pub achieved_se: f64,
    /// True when `|achieved_fr - fr_target| <= epsilon`; false means the
    /// reported `(f, m)` is merely the closest point found.
    pub converged: bool,
    /// Logical objective evaluations performed (shot-doubling reruns fold
    /// into their evaluation).
    pub evaluations: u64,
    /// Full audit trail, one entry per logical evaluation.
    pub trace: Vec<TraceEntry>,
}

impl TuneResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tune result serializes")
    }
}

/// Flagless failure rate of the next-smaller family member, with its
/// standard error — the natural tuning target for size `n_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub fr_target: f64,
    pub se: f64,
}

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("invalid tune request: {0}")]
    InvalidRequest(String),
    #[error("tune expects a flagless circuit; strip flags first")]
    NotFlagless,
    #[error("circuit admits no flag candidates (empty or opaque body)")]
    NoCandidates,
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
}

/// SplitMix64 output for one index of the stream seeded by `seed`: each
/// logical evaluation gets its own well-separated Monte Carlo seed.
fn eval_seed(seed: u64, eval_idx: u64) -> u64 {
    let mut z = seed.wrapping_add(eval_idx.wrapping_add(1).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Tunes `(f, m)` for `c` against a Monte Carlo objective.
///
/// `c` must be flagless. For each `f` from 1 up to
/// `min(f_max, n_data, available candidates)` the circuit is compiled with
/// the top-`f` ranked flags (prefixes of one ranked list) and `m` is bisected
/// over `(0, 1)`. Returns the first `(f, m)` whose rate lands within
/// `epsilon` of the target; if none does, the closest point found is
/// returned with `converged = false` — when the target lies below even the
/// perfect-flag (`m = 0`) floor of the largest `f`, that floor is what gets
/// reported, as the achieved lower bound.
pub fn tune(c: &Circuit, req: &TuneRequest) -> Result<TuneResult, TuneError> {
    if c.n_flags() > 0 {
        return Err(TuneError::NotFlagless);
    }
    req.validate()?;
    NoiseModel::new(req.p_ncs, 0.0)?;

    let f_cap = req.f_max.min(c.n_data());
    let f_limit = flag_circuit(c, FlagBudget::Fixed(f_cap)).n_flags();
    if f_limit == 0 {
        return Err(TuneError::NoCandidates);
    }
    let circuits: Vec<Circuit> = (1..=f_limit)
        .map(|f| flag_circuit(c, FlagBudget::Fixed(f)))
        .collect();

    let p_ncs = req.p_ncs;
    let objective = req.objective;
    let base = req.sim.clone();
    tune_with_oracle(req, f_limit, move |f, m, shots_per_input, seed| {
        let noise = NoiseModel::new(p_ncs, m)?;
        let cfg = SimConfig {
            shots_per_input,
            seed,
            ..base.clone()
        };
        let report = estimate(c, &circuits[f - 1], &noise, &cfg)?;
        Ok(match objective {
            TuneObjective::Psfr => (report.psfr, report.se_psfr),
            TuneObjective::Fr => (report.fr, report.se_fr),
        })
    })
}

/// The search core behind [`tune`], driving an arbitrary objective oracle.
///
/// `oracle(f, m, shots_per_input, seed)` returns the observed rate and its
/// standard error. `f_limit` bounds the outer loop (callers cap it by
/// candidate availability). Public so the search can be exercised against
/// stub oracles with known roots.
pub fn tune_with_oracle<F>(
    req: &TuneRequest,
    f_limit: usize,
    mut oracle: F,
) -> Result<TuneResult, TuneError>
where
    F: FnMut(usize, f64, u64, u64) -> Result<(f64, f64), TuneError>,
{
    req.validate()?;
    if f_limit < 1 {
        return Err(TuneError::InvalidRequest(
            "f_limit must be at least 1".to_owned(),
        ));
    }
    if req.sim.shots_per_input == 0 {
        return Err(TuneError::InvalidRequest(
            "shots_per_input must be positive".to_owned(),
        ));
    }

    let target = req.fr_target;
    let eps = req.epsilon;
    let depth = req.depth();
    let base_shots = req.sim.shots_per_input;
    let shots_cap = base_shots.saturating_mul(SHOT_DOUBLING_CAP);

    let mut trace: Vec<TraceEntry> = Vec::new();
    // Closest point seen so far: (|fr - target|, trace index).
    let mut best: Option<(f64, usize)> = None;

    // One logical evaluation: run the oracle, doubling shots while the
    // estimate is too noisy to compare against the target, then record it.
    let mut evaluate = |f: usize,
                        m: f64,
                        shots: &mut u64,
                        trace: &mut Vec<TraceEntry>,
                        best: &mut Option<(f64, usize)>|
     -> Result<(f64, f64), TuneError> {
        let seed = eval_seed(req.sim.seed, trace.len() as u64);
        let (mut fr, mut se) = oracle(f, m, *shots, seed)?;
        while se > eps / 2.0 && *shots < shots_cap {
            *shots = shots.saturating_mul(2).min(shots_cap);
            (fr, se) = oracle(f, m, *shots, seed)?;
        }
        trace.push(TraceEntry {
            f,
            m,
            fr,
            se,
            shots_per_input: *shots,
        });
        let err = (fr - target).abs();
        if best.map_or(true, |(b, _)| err < b) {
            *best = Some((err, trace.len() - 1));
        }
        Ok((fr, se))
    };

    let result_at = |entry: &TraceEntry, converged: bool, trace: &Vec<TraceEntry>| TuneResult {
        m: entry.m,
        f: entry.f,
        achieved_fr: entry.fr,
        achieved_se: entry.se,
        converged,
        evaluations: trace.len() as u64,
        trace: trace.clone(),
    };

    for f in 1..=f_limit {
        let mut shots = base_shots;
        let (mut a, mut b) = (0.0_f64, 1.0_f64);
        // Stays true while every midpoint overshoots the target.
        let mut floor_suspect = true;
        for _ in 0..depth {
            let mid = 0.5 * (a + b);
            let (fr, _) = evaluate(f, mid, &mut shots, &mut trace, &mut best)?;
            if (fr - target).abs() <= eps {
                let entry = *trace.last().expect("just pushed");
                return Ok(result_at(&entry, true, &trace));
            }
            if fr > target {
                b = mid;
            } else {
                a = mid;
                floor_suspect = false;
            }
        }
        if floor_suspect {
            // The root, if any, sits below the resolution: probe the
            // perfect-flag floor of this window configuration directly.
            let (fr, _) = evaluate(f, 0.0, &mut shots, &mut trace, &mut best)?;
            if (fr - target).abs() <= eps {
                let entry = *trace.last().expect("just pushed");
                return Ok(result_at(&entry, true, &trace));
            }
        }
    }

    let (_, idx) = best.expect("depth >= 1 and f_limit >= 1 imply at least one evaluation");
    let entry = trace[idx];
    Ok(result_at(&entry, false, &trace))
}

/// Simulates the flagless adder-like circuit of size `n_bits - 1` and
/// returns its failure rate with standard error — the protocol where a
/// size-`N` circuit with flags is asked to perform like a flagless
/// size-`N-1` circuit.
pub fn target_from_smaller(
    n_bits: usize,
    p_ncs: f64,
    cfg: &SimConfig,
) -> Result<TargetEstimate, TuneError> {
    if n_bits < 2 {
        return Err(TuneError::InvalidRequest(format!(
            "family size must be at least 2 to have a smaller member, got {n_bits}"
        )));
    }
    let smaller = gen_adder_like(AdderSpec {
        n_bits: n_bits - 1,
    });
    let noise = NoiseModel::new(p_ncs, 0.0)?;
    let report = estimate(&smaller, &smaller, &noise, cfg)?;
    Ok(TargetEstimate {
        fr_target: report.fr,
        se: report.se_fr,
    })
}
