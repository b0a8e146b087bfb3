//! Monte Carlo estimation of failure rates under depolarizing CNOT noise.
//!
//! Protocol per shot: every CNOT fails independently (body gates with
//! probability `p_ncs`, flag-gadget gates with `m * p_ncs`), a failing gate
//! draws one of the 15 non-identity two-qubit Paulis uniformly, the fault set
//! is pushed through the circuit as a Pauli frame, and the shot is classified
//! against the noiseless *flagless* reference stabilizers:
//!
//! * failure: any reference stabilizer measurement flips,
//! * flag raised: any flag qubit measures 1,
//!
//! giving the TP/FP/FN/TN confusion matrix, the failure rate
//! FR = (TP+FN)/total, the post-selected failure rate PSFR = FN/(FN+TN)
//! (failures that survive discarding flagged shots), and the acceptance rate
//! (FN+TN)/total. Inits, measurements, and gadget Hadamards are noiseless.
//!
//! Randomness is counter-based: each shot seeds its own ChaCha8 stream from
//! `(seed, input index, shot index, stream tag)`, so a report is bit-identical
//! for any worker count and any scheduling, and shots can be revisited
//! individually.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{input_label, Circuit, GateRole, InitBasis};
use crate::frames::{
    canonical_stabilizers, propagate_faults, FaultEvent, FrameError, FrameOutcome, StabilizerSet,
    TwoQubitPauli,
};

/// Depolarizing noise strengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-CNOT two-qubit depolarizing probability for body gates.
    pub p_ncs: f64,
    /// Flag error multiplier in [0, 1]: gadget CNOTs fail with `m * p_ncs`.
    pub m: f64,
}

impl NoiseModel {
    pub fn new(p_ncs: f64, m: f64) -> Result<NoiseModel, MonteCarloError> {
        let model = NoiseModel { p_ncs, m };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        if !(0.0..=1.0).contains(&self.p_ncs) || !self.p_ncs.is_finite() {
            return Err(MonteCarloError::InvalidNoise(format!(
                "p_ncs must be a probability, got {}",
                self.p_ncs
            )));
        }
        if !(0.0..=1.0).contains(&self.m) || !self.m.is_finite() {
            return Err(MonteCarloError::InvalidNoise(format!(
                "m must be in [0, 1], got {}",
                self.m
            )));
        }
        Ok(())
    }

    /// Effective strength for one gate given its role.
    pub fn gate_strength(&self, role: GateRole) -> f64 {
        match role {
            GateRole::Body => self.p_ncs,
            GateRole::FlagGadget => self.m * self.p_ncs,
        }
    }
}

/// Simulation shape and seeding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub shots_per_input: u64,
    /// Inputs are exhaustive when `2^n_data <= max_inputs`, else this many
    /// distinct random strings.
    pub max_inputs: usize,
    pub seed: u64,
    /// Check only this many randomly chosen reference stabilizers per input
    /// (`None` checks all).
    pub stabilizer_subsample_r: Option<usize>,
    /// Worker threads; results are identical for any value.
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            shots_per_input: 10_000,
            max_inputs: 100,
            seed: 0,
            stabilizer_subsample_r: None,
            workers: 1,
        }
    }
}

/// Confusion-matrix counts. Positive = flag raised, true = classification
/// matches whether a data failure occurred.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotTally {
    #[serde(rename = "tp")]
    pub true_pos: u64,
    #[serde(rename = "fp")]
    pub false_pos: u64,
    #[serde(rename = "fn")]
    pub false_neg: u64,
    #[serde(rename = "tn")]
    pub true_neg: u64,
}

impl ShotTally {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    /// Shots where the data state was corrupted, flagged or not.
    pub fn failures(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    /// Shots that survive post-selection (no flag raised).
    pub fn accepted(&self) -> u64 {
        self.false_neg + self.true_neg
    }

    pub fn fr(&self) -> f64 {
        ratio(self.failures(), self.total())
    }

    /// Failure rate among accepted shots; 0 when everything was rejected.
    pub fn psfr(&self) -> f64 {
        ratio(self.false_neg, self.accepted())
    }

    pub fn acceptance(&self) -> f64 {
        ratio(self.accepted(), self.total())
    }

    /// Binomial standard error of `fr`.
    pub fn se_fr(&self) -> f64 {
        binomial_se(self.fr(), self.total())
    }

    /// Binomial standard error of `psfr` over the accepted population.
    pub fn se_psfr(&self) -> f64 {
        binomial_se(self.psfr(), self.accepted())
    }

    pub fn merge(&mut self, other: &ShotTally) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.false_neg += other.false_neg;
        self.true_neg += other.true_neg;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerInputTally {
    /// Input label, one `0`/`+` per data qubit.
    pub input: String,
    pub tally: ShotTally,
}

/// Aggregated results of one estimation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Data-qubit count of the simulated circuit.
    pub n: usize,
    pub p_ncs: f64,
    pub m: f64,
    /// Flag count of the simulated circuit.
    pub flags: usize,
    /// Total shots across all inputs.
    pub shots: u64,
    pub tally: ShotTally,
    pub fr: f64,
    pub psfr: f64,
    pub acceptance_rate: f64,
    pub se_fr: f64,
    pub se_psfr: f64,
    /// True when every shot raised a flag, leaving psfr's denominator empty
    /// (psfr is then reported as 0).
    pub psfr_all_rejected: bool,
    pub per_input: Vec<PerInputTally>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

impl RunReport {
    /// Builds a report from per-input tallies, recomputing every derived rate.
    pub fn from_per_input(
        n: usize,
        p_ncs: f64,
        m: f64,
        flags: usize,
        per_input: Vec<PerInputTally>,
    ) -> RunReport {
        let mut tally = ShotTally::default();
        for entry in &per_input {
            tally.merge(&entry.tally);
        }
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            n,
            p_ncs,
            m,
            flags,
            shots: tally.total(),
            tally,
            fr: tally.fr(),
            psfr: tally.psfr(),
            acceptance_rate: tally.acceptance(),
            se_fr: tally.se_fr(),
            se_psfr: tally.se_psfr(),
            psfr_all_rejected: tally.accepted() == 0 && tally.total() > 0,
            per_input,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "n,p_ncs,m,flags,shots,tp,fp,fn,tn,fr,psfr,acceptance,se_fr,se_psfr"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.p_ncs,
            self.m,
            self.flags,
            self.shots,
            self.tally.true_pos,
            self.tally.false_pos,
            self.tally.false_neg,
            self.tally.true_neg,
            self.fr,
            self.psfr,
            self.acceptance_rate,
            self.se_fr,
            self.se_psfr
        )
    }
}

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error("flagged circuit body does not match the flagless circuit")]
    BodyMismatch,
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

const TAG_SHOT: [u8; 8] = *b"SHOT\0\0\0\0";
const TAG_INPUTS: [u8; 8] = *b"INPUTS\0\0";
const TAG_SUBSAMPLE: [u8; 8] = *b"SUBSAMPL";

/// Counter-based stream: one independent ChaCha8 generator per
/// (seed, input, shot, purpose) tuple.
fn stream_rng(seed: u64, input_idx: u64, shot_idx: u64, tag: [u8; 8]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&input_idx.to_le_bytes());
    key[16..24].copy_from_slice(&shot_idx.to_le_bytes());
    key[24..32].copy_from_slice(&tag);
    ChaCha8Rng::from_seed(key)
}

/// The input set to average over: exhaustive enumeration of `{0,+}^n_data`
/// when it fits in `max_inputs` (counting order, qubit 0 most significant),
/// else `max_inputs` distinct seeded random strings.
pub fn sample_inputs(c: &Circuit, cfg: &SimConfig) -> Vec<Vec<InitBasis>> {
    let n = c.n_data();
    let exhaustive = n < usize::BITS as usize && (1usize << n) <= cfg.max_inputs;
    if exhaustive {
        return (0..1usize << n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if (i >> (n - 1 - j)) & 1 == 1 {
                            InitBasis::Plus
                        } else {
                            InitBasis::Zero
                        }
                    })
                    .collect()
            })
            .collect();
    }
    let mut rng = stream_rng(cfg.seed, 0, 0, TAG_INPUTS);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(cfg.max_inputs);
    while out.len() < cfg.max_inputs {
        let input: Vec<InitBasis> = (0..n)
            .map(|_| if rng.random::<bool>() { InitBasis::Plus } else { InitBasis::Zero })
            .collect();
        if seen.insert(input_label(&input)) {
            out.push(input);
        }
    }
    out
}

/// Draws this shot's fault set: each CNOT fails with its role's strength and
/// contributes a uniform non-identity two-qubit Pauli.
///
/// Gates with zero effective strength consume no randomness, so a flagged
/// circuit at `m = 0` sees the *same* body-fault sequence as the flagless
/// circuit under the same stream: perfect flags change post-selection, never
/// the data errors.
pub fn draw_faults(c: &Circuit, noise: &NoiseModel, rng: &mut impl Rng) -> Vec<FaultEvent> {
    let mut out = Vec::new();
    for (location, gate) in c.gates().iter().enumerate() {
        if !matches!(gate.kind, crate::circuit::GateKind::Cnot { .. }) {
            continue;
        }
        let p = noise.gate_strength(gate.role);
        if p <= 0.0 {
            continue;
        }
        if rng.random::<f64>() < p {
            let index = rng.random_range(1u8..16);
            out.push(FaultEvent {
                location,
                pauli: TwoQubitPauli::from_index(index).expect("index in 1..16"),
            });
        }
    }
    out
}

/// One full shot against a self-computed flagless reference. This is the
/// single-shot contract; [`estimate`] is the batched equivalent that caches
/// the reference per input.
pub fn sample_shot(
    c: &Circuit,
    input: &[InitBasis],
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<FrameOutcome, FrameError> {
    let reference = canonical_stabilizers(&c.strip_flags(), input)?;
    let faults = draw_faults(c, noise, rng);
    propagate_faults(c, &faults, &reference)
}

fn validate_config(cfg: &SimConfig) -> Result<(), MonteCarloError> {
    if cfg.shots_per_input == 0 {
        return Err(MonteCarloError::InvalidConfig("shots_per_input must be >= 1".into()));
    }
    if cfg.max_inputs == 0 {
        return Err(MonteCarloError::InvalidConfig("max_inputs must be >= 1".into()));
    }
    Ok(())
}

/// `r` distinct generator indices for one input's reference set.
fn draw_subsample(seed: u64, input_idx: u64, r: usize, len: usize) -> Vec<usize> {
    let take = r.min(len);
    let mut rng = stream_rng(seed, input_idx, 0, TAG_SUBSAMPLE);
    let mut indices: Vec<usize> = (0..len).collect();
    for i in 0..take {
        let j = rng.random_range(i..len);
        indices.swap(i, j);
    }
    indices.truncate(take);
    indices.sort_unstable();
    indices
}

/// Shots are dealt to workers in fixed blocks so the unit list (and therefore
/// the tally layout) is independent of the worker count.
const SHOT_BLOCK: u64 = 4096;

#[derive(Clone, Copy)]
struct WorkUnit {
    input_idx: usize,
    shot_start: u64,
    shot_end: u64,
}

fn run_shots<F>(
    c: &Circuit,
    refs: &[StabilizerSet],
    subsamples: &[Option<Vec<usize>>],
    cfg: &SimConfig,
    draw: &F,
) -> Vec<ShotTally>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<FaultEvent> + Sync,
{
    let mut units = Vec::new();
    for input_idx in 0..refs.len() {
        let mut start = 0;
        while start < cfg.shots_per_input {
            let end = (start + SHOT_BLOCK).min(cfg.shots_per_input);
            units.push(WorkUnit { input_idx, shot_start: start, shot_end: end });
            start = end;
        }
    }

    let unit_tally = |unit: &WorkUnit| -> ShotTally {
        let mut tally = ShotTally::default();
        let reference = &refs[unit.input_idx];
        let subsample = &subsamples[unit.input_idx];
        for shot in unit.shot_start..unit.shot_end {
            let mut rng = stream_rng(cfg.seed, unit.input_idx as u64, shot, TAG_SHOT);
            let faults = draw(&mut rng);
            if faults.is_empty() {
                tally.true_neg += 1;
                continue;
            }
            let out = propagate_faults(c, &faults, reference)
                .expect("fault locations are drawn from the circuit's own gates");
            let failure = match subsample {
                None => out.stabilizer_flips.any(),
                Some(indices) => indices.iter().any(|&i| out.stabilizer_flips.get(i)),
            };
            match (failure, out.any_trigger()) {
                (true, true) => tally.true_pos += 1,
                (false, true) => tally.false_pos += 1,
                (true, false) => tally.false_neg += 1,
                (false, false) => tally.true_neg += 1,
            }
        }
        tally
    };

    let per_unit: Vec<ShotTally> = if cfg.workers <= 1 {
        units.iter().map(unit_tally).collect()
    } else {
        let next = AtomicUsize::new(0);
        let results = Mutex::new(vec![ShotTally::default(); units.len()]);
        std::thread::scope(|scope| {
            for _ in 0..cfg.workers {
                scope.spawn(|| loop {
                    let u = next.fetch_add(1, Ordering::Relaxed);
                    if u >= units.len() {
                        break;
                    }
                    let tally = unit_tally(&units[u]);
                    results.lock().expect("no panics hold the lock")[u] = tally;
                });
            }
        });
        results.into_inner().expect("all workers joined")
    };

    let mut per_input = vec![ShotTally::default(); refs.len()];
    for (unit, tally) in units.iter().zip(&per_unit) {
        per_input[unit.input_idx].merge(tally);
    }
    per_input
}

fn assemble_report(
    c: &Circuit,
    p_ncs: f64,
    m: f64,
    inputs: &[Vec<InitBasis>],
    tallies: Vec<ShotTally>,
) -> RunReport {
    let per_input = inputs
        .iter()
        .zip(tallies)
        .map(|(input, tally)| PerInputTally { input: input_label(input), tally })
        .collect();
    RunReport::from_per_input(c.n_data(), p_ncs, m, c.n_flags(), per_input)
}

/// Full estimation run: samples inputs, simulates `shots_per_input` noisy
/// shots of `c_flagged` per input, classifies each against the noiseless
/// `c_flagless` reference, and aggregates. `c_flagged` may be `c_flagless`
/// itself to measure the flagless failure rate.
pub fn estimate(
    c_flagless: &Circuit,
    c_flagged: &Circuit,
    noise: &NoiseModel,
    cfg: &SimConfig,
) -> Result<RunReport, MonteCarloError> {
    noise.validate()?;
    validate_config(cfg)?;
    if &c_flagged.strip_flags() != c_flagless {
        return Err(MonteCarloError::BodyMismatch);
    }

    let inputs = sample_inputs(c_flagless, cfg);
    let mut refs = Vec::with_capacity(inputs.len());
    let mut subsamples = Vec::with_capacity(inputs.len());
    for (idx, input) in inputs.iter().enumerate() {
        let reference = canonical_stabilizers(c_flagless, input)?;
        let subsample = cfg
            .stabilizer_subsample_r
            .map(|r| draw_subsample(cfg.seed, idx as u64, r, reference.len()));
        refs.push(reference);
        subsamples.push(subsample);
    }

    let draw = |rng: &mut ChaCha8Rng| draw_faults(c_flagged, noise, rng);
    let tallies = run_shots(c_flagged, &refs, &subsamples, cfg, &draw);
    Ok(assemble_report(c_flagged, noise.p_ncs, noise.m, &inputs, tallies))
}

/// Textbook-style experiment: inject exactly `fault` with probability `prob`
/// per shot, no other noise. The report carries `p_ncs = prob` and `m = 0`.
pub fn inject_error_experiment(
    c: &Circuit,
    fault: FaultEvent,
    prob: f64,
    cfg: &SimConfig,
) -> Result<RunReport, MonteCarloError> {
    if !(0.0..=1.0).contains(&prob) || !prob.is_finite() {
        return Err(MonteCarloError::InvalidNoise(format!(
            "injection probability must be in [0, 1], got {prob}"
        )));
    }
    validate_config(cfg)?;
    let flagless = c.strip_flags();

    let inputs = sample_inputs(&flagless, cfg);
    let mut refs = Vec::with_capacity(inputs.len());
    for input in &inputs {
        refs.push(canonical_stabilizers(&flagless, input)?);
    }
    // Validate the location once, up front, against the flagged circuit.
    propagate_faults(c, &[fault], &refs[0])?;
    let subsamples = vec![None; inputs.len()];

    let draw = |rng: &mut ChaCha8Rng| {
        if rng.random::<f64>() < prob {
            vec![fault]
        } else {
            Vec::new()
        }
    };
    let tallies = run_shots(c, &refs, &subsamples, cfg, &draw);
    Ok(assemble_report(c, prob, 0.0, &inputs, tallies))
}
