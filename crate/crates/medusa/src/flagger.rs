//! The compiler pass: enumerate flag candidates, rank them, insert the best.
//!
//! A candidate is one data qubit plus a maximal window of body gates it could
//! protect. X errors on a qubit copy forward through CNOTs where it is the
//! control, so the X candidate spans first-to-last control-role CNOT and its
//! weight counts them; Z errors copy backward through target-role CNOTs, so
//! the Z candidate is the dual. At most one flag per data qubit (uniqueness)
//! keeps flag qubits from flagging each other's gadgets.

use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Circuit, FlagType, GateKind};
use crate::frames::PauliString;

/// One possible flag insertion, before budgeting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlagCandidate {
    pub flag_type: FlagType,
    pub data_qubit: usize,
    /// Inclusive body-gate window.
    pub window_start: usize,
    pub window_end: usize,
    /// Number of protected CNOTs (control-role for X, target-role for Z).
    pub weight: usize,
}

/// How many flags to spend on a circuit with `n_data` qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlagBudget {
    /// `floor(c * log2(n_data))` flags.
    Logarithmic(f64),
    /// One flag per data qubit.
    Linear,
    /// Exactly `k` flags (before uniqueness clipping).
    Fixed(usize),
}

impl FlagBudget {
    /// Requested flag count for a circuit with `n_data` data qubits.
    pub fn resolve(self, n_data: usize) -> usize {
        match self {
            FlagBudget::Logarithmic(c) => {
                if n_data == 0 {
                    0
                } else {
                    (c * (n_data as f64).log2()).floor().max(0.0) as usize
                }
            }
            FlagBudget::Linear => n_data,
            FlagBudget::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Error)]
#[error("invalid budget `{0}`: expected log:<c>, linear, or fixed:<k>")]
pub struct BudgetParseError(String);

impl FromStr for FlagBudget {
    type Err = BudgetParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BudgetParseError(s.to_string());
        if s == "linear" {
            return Ok(FlagBudget::Linear);
        }
        if let Some(c) = s.strip_prefix("log:") {
            let c: f64 = c.parse().map_err(|_| bad())?;
            if !c.is_finite() || c < 0.0 {
                return Err(bad());
            }
            return Ok(FlagBudget::Logarithmic(c));
        }
        if let Some(k) = s.strip_prefix("fixed:") {
            return k.parse().map(FlagBudget::Fixed).map_err(|_| bad());
        }
        Err(bad())
    }
}

/// All unique flag candidates: per data qubit, at most one X (maximal
/// control-role window) and one Z (maximal target-role window), keeping only
/// transparent windows (see [`window_transparent`]; a flag whose window is
/// opaque fires noiselessly and would poison post-selection). Output order is
/// ascending qubit, X before Z.
pub fn enumerate_candidates(c: &Circuit) -> Vec<FlagCandidate> {
    assert!(c.flags().is_empty(), "candidate enumeration expects a flagless circuit");
    let body = c.body_cnots();
    let mut out = Vec::new();
    for q in 0..c.n_data() {
        let span = |role: FlagType| {
            let hits: Vec<usize> = body
                .iter()
                .enumerate()
                .filter(|&(_, &(control, target))| match role {
                    FlagType::X => control == q,
                    FlagType::Z => target == q,
                })
                .map(|(k, _)| k)
                .collect();
            hits.first().map(|&first| FlagCandidate {
                flag_type: role,
                data_qubit: q,
                window_start: first,
                window_end: *hits.last().unwrap(),
                weight: hits.len(),
            })
        };
        out.extend(span(FlagType::X).filter(|cand| window_transparent(c, cand)));
        out.extend(span(FlagType::Z).filter(|cand| window_transparent(c, cand)));
    }
    debug_assert!(out.len() <= 2 * c.n_data());
    out
}

/// Descending weight; ties by ascending data qubit, then X before Z.
pub fn rank_candidates(mut candidates: Vec<FlagCandidate>) -> Vec<FlagCandidate> {
    let type_rank = |t: FlagType| match t {
        FlagType::X => 0,
        FlagType::Z => 1,
    };
    candidates.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then(a.data_qubit.cmp(&b.data_qubit))
            .then(type_rank(a.flag_type).cmp(&type_rank(b.flag_type)))
    });
    candidates
}

/// Greedy insertion from the top of the ranking: skip qubits that already
/// carry a flag, stop at the budget. Returns the lowered flagged circuit.
pub fn insert_flags(c: &Circuit, ranked: &[FlagCandidate], budget: FlagBudget) -> Circuit {
    assert!(c.flags().is_empty(), "insertion expects a flagless circuit");
    let quota = budget.resolve(c.n_data());
    let mut taken = vec![false; c.n_data()];
    let mut specs = Vec::new();
    for cand in ranked {
        if specs.len() == quota {
            break;
        }
        if taken[cand.data_qubit] {
            continue;
        }
        debug_assert!(
            window_transparent(c, cand),
            "window [{}, {}] on qubit {} is not transparent",
            cand.window_start,
            cand.window_end,
            cand.data_qubit
        );
        taken[cand.data_qubit] = true;
        specs.push((cand.flag_type, cand.data_qubit, cand.window_start, cand.window_end));
    }
    c.with_flags(&specs).expect("greedy selection preserves circuit invariants")
}

/// Convenience pipeline: enumerate, rank, insert.
pub fn flag_circuit(c: &Circuit, budget: FlagBudget) -> Circuit {
    insert_flags(c, &rank_candidates(enumerate_candidates(c)), budget)
}

/// A window is transparent when the gadget's data-side coupling Pauli
/// commutes through it unchanged (`Z` on the data qubit for an X-flag, `X`
/// for a Z-flag). Then the noiseless gadget closes cleanly: the flag returns
/// to `|0>` and the data state is untouched. Maximal windows on this crate's
/// circuit families are transparent; windows that interleave with
/// opposite-role CNOTs on the same qubit need not be.
pub fn window_transparent(c: &Circuit, cand: &FlagCandidate) -> bool {
    let probe = match cand.flag_type {
        FlagType::X => PauliString::z(c.n_data(), cand.data_qubit),
        FlagType::Z => PauliString::x(c.n_data(), cand.data_qubit),
    };
    let mut conj = probe.clone();
    for (control, target) in &c.body_cnots()[cand.window_start..=cand.window_end] {
        conj.conjugate(GateKind::Cnot { control: *control, target: *target });
    }
    conj == probe
}
