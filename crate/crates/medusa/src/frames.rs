//! Stabilizer bookkeeping: signed Pauli strings, canonical stabilizer sets,
//! Pauli-frame fault propagation, and an exact tableau-based oracle.
//!
//! Two independent fault analyses live here:
//!
//! * [`propagate_faults`]: pushes a signless Pauli frame through the lowered
//!   gate list and reads off which reference stabilizers anticommute with the
//!   final frame (those measurements flip) and which flag qubits carry an X
//!   component (those flags trigger). O(gates) per shot; the Monte Carlo
//!   engine runs on this.
//! * [`brute_force_state_check`]: evolves the full signed stabilizer tableau
//!   of both the noiseless and the faulty circuit, canonicalizes, and reads
//!   measurement signs off the group directly. Exponential-free but O(n^3)
//!   per call, so it is capped at 12 qubits and used as the ground truth the
//!   frame method is tested against.
//!
//! Faults are [`FaultEvent`]s: a two-qubit Pauli applied immediately after
//! one CNOT of the lowered gate list (depolarizing noise acts after gates).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::BitVec;
use crate::circuit::{Circuit, GateKind, InitBasis};

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("input gives {got} bases but the circuit has {want} data qubits")]
    InputLengthMismatch { got: usize, want: usize },
    #[error("fault location {location} is not a CNOT in the lowered gate list")]
    MalformedFaultLocation { location: usize },
    #[error("brute-force check supports at most {limit} qubits, circuit has {got}")]
    SizeLimitExceeded { got: usize, limit: usize },
    #[error("observable is not in the stabilizer group (residual {residual})")]
    NotInGroup { residual: String },
    #[error("generators are dependent (rank {rank} of {rows} rows)")]
    DependentGenerators { rank: usize, rows: usize },
    #[error("generators {a} and {b} anticommute")]
    NonCommuting { a: usize, b: usize },
    #[error("malformed Pauli literal `{0}`")]
    PauliParse(String),
}

fn pauli_char(x: bool, z: bool) -> char {
    match (x, z) {
        (false, false) => 'I',
        (true, false) => 'X',
        (true, true) => 'Y',
        (false, true) => 'Z',
    }
}

fn char_bits(ch: char) -> Option<(bool, bool)> {
    match ch {
        'I' => Some((false, false)),
        'X' => Some((true, false)),
        'Y' => Some((true, true)),
        'Z' => Some((false, true)),
        _ => None,
    }
}

/// A Pauli operator with a +/- sign, e.g. `-XIZ` (qubit 0 leftmost).
///
/// `Y` is stored as both bits set; the `i` factors of individual `Y`s are
/// folded into the convention that `negative` tracks a real +/-1 phase, which
/// is closed under products of *commuting* Paulis (the only products taken
/// here).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    negative: bool,
    xs: BitVec,
    zs: BitVec,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> PauliString {
        PauliString {
            negative: false,
            xs: BitVec::new(n_qubits),
            zs: BitVec::new(n_qubits),
        }
    }

    pub fn x(n_qubits: usize, qubit: usize) -> PauliString {
        let mut p = PauliString::identity(n_qubits);
        p.xs.set(qubit, true);
        p
    }

    pub fn y(n_qubits: usize, qubit: usize) -> PauliString {
        let mut p = PauliString::identity(n_qubits);
        p.xs.set(qubit, true);
        p.zs.set(qubit, true);
        p
    }

    pub fn z(n_qubits: usize, qubit: usize) -> PauliString {
        let mut p = PauliString::identity(n_qubits);
        p.zs.set(qubit, true);
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.xs.len()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_identity(&self) -> bool {
        !self.xs.any() && !self.zs.any()
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        self.xs.get(qubit)
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        self.zs.get(qubit)
    }

    pub fn xs(&self) -> &BitVec {
        &self.xs
    }

    pub fn zs(&self) -> &BitVec {
        &self.zs
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        (0..self.n_qubits()).filter(|&q| self.x_bit(q) || self.z_bit(q)).count()
    }

    /// Symplectic commutation test; shorter operand is identity-padded.
    pub fn commutes(&self, other: &PauliString) -> bool {
        !(self.xs.and_parity(&other.zs) ^ self.zs.and_parity(&other.xs))
    }

    /// `self = rhs * self`. Operands must commute (the product of
    /// anticommuting Paulis picks up a factor of i, which a signed string
    /// cannot represent).
    pub fn mul_assign(&mut self, rhs: &PauliString) {
        assert_eq!(self.n_qubits(), rhs.n_qubits(), "length mismatch in Pauli product");
        debug_assert!(self.commutes(rhs), "product of anticommuting Paulis");
        // Phase exponent of i, accumulated per qubit; for commuting operands
        // the total is 0 or 2 mod 4, i.e. a real sign.
        let mut phase: i32 = 0;
        for q in 0..self.n_qubits() {
            let (x1, z1) = (rhs.x_bit(q), rhs.z_bit(q));
            let (x2, z2) = (self.x_bit(q), self.z_bit(q));
            phase += match (x1, z1) {
                (false, false) => 0,
                (true, true) => z2 as i32 - x2 as i32,
                (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
                (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
            };
        }
        let total = (2 * self.negative as i32 + 2 * rhs.negative as i32 + phase).rem_euclid(4);
        debug_assert_eq!(total % 2, 0);
        self.negative = total == 2;
        self.xs.xor_with(&rhs.xs);
        self.zs.xor_with(&rhs.zs);
    }

    /// Heisenberg update `self -> U self U^dagger` for one gate.
    pub fn conjugate(&mut self, gate: GateKind) {
        match gate {
            GateKind::Cnot { control, target } => {
                let (xc, zc) = (self.x_bit(control), self.z_bit(control));
                let (xt, zt) = (self.x_bit(target), self.z_bit(target));
                if xc && zt && (xt == zc) {
                    self.negative = !self.negative;
                }
                self.xs.set(target, xt ^ xc);
                self.zs.set(control, zc ^ zt);
            }
            GateKind::H { target } => {
                let (x, z) = (self.x_bit(target), self.z_bit(target));
                if x && z {
                    self.negative = !self.negative;
                }
                self.xs.set(target, z);
                self.zs.set(target, x);
            }
        }
    }

    /// Identity-extends to `n_qubits` sites.
    pub fn padded(&self, n_qubits: usize) -> PauliString {
        PauliString {
            negative: self.negative,
            xs: self.xs.padded(n_qubits),
            zs: self.zs.padded(n_qubits),
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for q in 0..self.n_qubits() {
            write!(f, "{}", pauli_char(self.x_bit(q), self.z_bit(q)))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FrameError::PauliParse(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let mut p = PauliString::identity(body.chars().count());
        p.negative = negative;
        for (q, ch) in body.chars().enumerate() {
            let (x, z) = char_bits(ch).ok_or_else(bad)?;
            p.xs.set(q, x);
            p.zs.set(q, z);
        }
        Ok(p)
    }
}

/// A stabilizer group in canonical generator form.
///
/// Canonical means: Gaussian elimination over GF(2) picks X-block pivots in
/// ascending qubit order, then Z-block pivots, with full reduction (each
/// pivot bit is cleared from every other row, earlier pivot rows included).
/// Rows are stored in pivot order, so two sets generating the same group
/// compare equal, signs included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerSet {
    n_qubits: usize,
    gens: Vec<PauliString>,
    /// `(z_block, column)` per row, in row order.
    pivots: Vec<(bool, usize)>,
}

impl StabilizerSet {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gens(&self) -> &[PauliString] {
        &self.gens
    }

    /// Reduces `obs` over the canonical rows and reports the leftover sign.
    ///
    /// `Ok(false)` means `obs` is in the group exactly as signed; `Ok(true)`
    /// means `-obs` is. Anything outside the +/- group is [`FrameError::NotInGroup`].
    pub fn sign_of(&self, obs: &PauliString) -> Result<bool, FrameError> {
        assert_eq!(obs.n_qubits(), self.n_qubits, "observable length mismatch");
        let mut residual = obs.clone();
        for (row, &(z_block, col)) in self.gens.iter().zip(&self.pivots) {
            let hit = if z_block { residual.z_bit(col) } else { residual.x_bit(col) };
            if hit {
                if !residual.commutes(row) {
                    return Err(FrameError::NotInGroup { residual: residual.to_string() });
                }
                residual.mul_assign(row);
            }
        }
        if !residual.is_identity() {
            return Err(FrameError::NotInGroup { residual: residual.to_string() });
        }
        Ok(residual.is_negative())
    }
}

impl fmt::Display for StabilizerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Brings independent commuting generators into canonical form.
pub fn canonicalize(mut rows: Vec<PauliString>) -> Result<StabilizerSet, FrameError> {
    let n_qubits = rows.first().map_or(0, |r| r.n_qubits());
    assert!(
        rows.iter().all(|r| r.n_qubits() == n_qubits),
        "generators must share a qubit count"
    );
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            if !rows[a].commutes(&rows[b]) {
                return Err(FrameError::NonCommuting { a, b });
            }
        }
    }

    let mut pivots = Vec::with_capacity(rows.len());
    let mut rank = 0;
    for z_block in [false, true] {
        for col in 0..n_qubits {
            let bit = |row: &PauliString| if z_block { row.z_bit(col) } else { row.x_bit(col) };
            let Some(found) = (rank..rows.len()).find(|&i| bit(&rows[i])) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot_row = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && bit(row) {
                    row.mul_assign(&pivot_row);
                }
            }
            pivots.push((z_block, col));
            rank += 1;
        }
    }
    if rank < rows.len() {
        return Err(FrameError::DependentGenerators { rank, rows: rows.len() });
    }
    Ok(StabilizerSet { n_qubits, gens: rows, pivots })
}

/// A two-qubit Pauli on a CNOT's (control, target) pair, excluding identity.
///
/// The index runs 1..=15 with bits `(x_c, z_c, x_t, z_t)` from least
/// significant up, so a uniform draw over 1..16 is a uniform depolarizing
/// fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoQubitPauli(u8);

impl TwoQubitPauli {
    pub fn from_index(index: u8) -> Option<TwoQubitPauli> {
        (1..16).contains(&index).then_some(TwoQubitPauli(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn control_x(self) -> bool {
        self.0 & 1 != 0
    }

    pub fn control_z(self) -> bool {
        self.0 & 2 != 0
    }

    pub fn target_x(self) -> bool {
        self.0 & 4 != 0
    }

    pub fn target_z(self) -> bool {
        self.0 & 8 != 0
    }

    /// All 15 non-identity two-qubit Paulis, in index order.
    pub fn all() -> impl Iterator<Item = TwoQubitPauli> {
        (1..16).map(TwoQubitPauli)
    }

    /// Embeds into an `n_qubits`-site string at the given CNOT's qubits.
    pub fn embed(self, n_qubits: usize, control: usize, target: usize) -> PauliString {
        let mut p = PauliString::identity(n_qubits);
        p.xs.set(control, self.control_x());
        p.zs.set(control, self.control_z());
        p.xs.set(target, self.target_x());
        p.zs.set(target, self.target_z());
        p
    }
}

impl fmt::Display for TwoQubitPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            pauli_char(self.control_x(), self.control_z()),
            pauli_char(self.target_x(), self.target_z())
        )
    }
}

impl FromStr for TwoQubitPauli {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FrameError::PauliParse(s.to_string());
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 2 {
            return Err(bad());
        }
        let (xc, zc) = char_bits(chars[0]).ok_or_else(bad)?;
        let (xt, zt) = char_bits(chars[1]).ok_or_else(bad)?;
        let index = xc as u8 | (zc as u8) << 1 | (xt as u8) << 2 | (zt as u8) << 3;
        TwoQubitPauli::from_index(index).ok_or_else(bad)
    }
}

/// One fault: `pauli` applied right after the CNOT at `location` in the
/// lowered gate list ([`Circuit::gates`] indexing, not body indexing).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaultEvent {
    pub location: usize,
    pub pauli: TwoQubitPauli,
}

/// What a set of faults does to one shot's measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameOutcome {
    /// Bit per reference generator: measured sign differs from noiseless.
    pub stabilizer_flips: BitVec,
    /// Bit per flag (flag order): the flag measurement reads 1.
    pub flag_triggers: BitVec,
}

impl FrameOutcome {
    pub fn any_flip(&self) -> bool {
        self.stabilizer_flips.any()
    }

    pub fn any_trigger(&self) -> bool {
        self.flag_triggers.any()
    }
}

fn check_faults(c: &Circuit, faults: &[FaultEvent]) -> Result<(), FrameError> {
    for fault in faults {
        let ok = c
            .gates()
            .get(fault.location)
            .is_some_and(|g| matches!(g.kind, GateKind::Cnot { .. }));
        if !ok {
            return Err(FrameError::MalformedFaultLocation { location: fault.location });
        }
    }
    Ok(())
}

fn init_rows(c: &Circuit, input: &[InitBasis]) -> Result<Vec<PauliString>, FrameError> {
    if input.len() != c.n_data() {
        return Err(FrameError::InputLengthMismatch { got: input.len(), want: c.n_data() });
    }
    let n = c.n_qubits();
    Ok((0..n)
        .map(|q| match input.get(q) {
            Some(InitBasis::Plus) => PauliString::x(n, q),
            _ => PauliString::z(n, q), // |0> data and all flag qubits
        })
        .collect())
}

/// Canonical stabilizers of the circuit's output state on the given input.
pub fn canonical_stabilizers(c: &Circuit, input: &[InitBasis]) -> Result<StabilizerSet, FrameError> {
    canonical_stabilizers_with_faults(c, &[], input)
}

/// Canonical stabilizers of the *faulty* output state: each row's sign flips
/// when the interleaved fault Pauli anticommutes with it.
pub fn canonical_stabilizers_with_faults(
    c: &Circuit,
    faults: &[FaultEvent],
    input: &[InitBasis],
) -> Result<StabilizerSet, FrameError> {
    check_faults(c, faults)?;
    let mut rows = init_rows(c, input)?;
    for (i, gate) in c.gates().iter().enumerate() {
        for row in &mut rows {
            row.conjugate(gate.kind);
        }
        for fault in faults.iter().filter(|f| f.location == i) {
            let GateKind::Cnot { control, target } = gate.kind else { unreachable!() };
            let error = fault.pauli.embed(c.n_qubits(), control, target);
            for row in &mut rows {
                if !row.commutes(&error) {
                    row.negative = !row.negative;
                }
            }
        }
    }
    canonicalize(rows)
}

/// Pauli-frame fault propagation.
///
/// The frame method is signless: it tracks only the accumulated error `E`
/// pushed to the end of the circuit, then reports a flip for every reference
/// generator that anticommutes with `E` and a trigger for every flag qubit
/// where `E` has an X component at measurement time. `reference` generators
/// on fewer qubits (a flagless reference against a flagged circuit) are
/// identity-padded.
pub fn propagate_faults(
    c: &Circuit,
    faults: &[FaultEvent],
    reference: &StabilizerSet,
) -> Result<FrameOutcome, FrameError> {
    check_faults(c, faults)?;
    assert!(
        reference.n_qubits() <= c.n_qubits(),
        "reference has more qubits than the circuit"
    );

    let n = c.n_qubits();
    let mut fx = BitVec::new(n);
    let mut fz = BitVec::new(n);
    for (i, gate) in c.gates().iter().enumerate() {
        match gate.kind {
            GateKind::Cnot { control, target } => {
                if fx.get(control) {
                    fx.flip(target);
                }
                if fz.get(target) {
                    fz.flip(control);
                }
            }
            GateKind::H { target } => {
                let (x, z) = (fx.get(target), fz.get(target));
                fx.set(target, z);
                fz.set(target, x);
            }
        }
        for fault in faults.iter().filter(|f| f.location == i) {
            let GateKind::Cnot { control, target } = gate.kind else { unreachable!() };
            if fault.pauli.control_x() {
                fx.flip(control);
            }
            if fault.pauli.control_z() {
                fz.flip(control);
            }
            if fault.pauli.target_x() {
                fx.flip(target);
            }
            if fault.pauli.target_z() {
                fz.flip(target);
            }
        }
    }

    let mut stabilizer_flips = BitVec::new(reference.len());
    for (k, gen) in reference.gens().iter().enumerate() {
        stabilizer_flips.set(k, fx.and_parity(gen.zs()) ^ fz.and_parity(gen.xs()));
    }
    let mut flag_triggers = BitVec::new(c.n_flags());
    for (j, flag) in c.flags().iter().enumerate() {
        flag_triggers.set(j, fx.get(flag.flag_qubit));
    }
    Ok(FrameOutcome { stabilizer_flips, flag_triggers })
}

/// Exact oracle for [`propagate_faults`], via full signed tableaus.
///
/// Builds the canonical stabilizers of the noiseless and the faulty circuit
/// and compares the measured sign of every reference generator (plus `Z` on
/// every flag qubit) between the two groups. Capped at 12 qubits; intended
/// for tests and spot checks, not sampling.
pub fn brute_force_state_check(
    c: &Circuit,
    faults: &[FaultEvent],
    input: &[InitBasis],
    reference: &StabilizerSet,
) -> Result<FrameOutcome, FrameError> {
    const LIMIT: usize = 12;
    if c.n_qubits() > LIMIT {
        return Err(FrameError::SizeLimitExceeded { got: c.n_qubits(), limit: LIMIT });
    }
    let noiseless = canonical_stabilizers(c, input)?;
    let faulty = canonical_stabilizers_with_faults(c, faults, input)?;

    let mut stabilizer_flips = BitVec::new(reference.len());
    for (k, gen) in reference.gens().iter().enumerate() {
        let padded = gen.padded(c.n_qubits());
        let before = noiseless.sign_of(&padded)?;
        let after = faulty.sign_of(&padded)?;
        stabilizer_flips.set(k, before != after);
    }
    let mut flag_triggers = BitVec::new(c.n_flags());
    for (j, flag) in c.flags().iter().enumerate() {
        let z_flag = PauliString::z(c.n_qubits(), flag.flag_qubit);
        let before = noiseless.sign_of(&z_flag)?;
        debug_assert!(!before, "flag qubit {} fires noiselessly", flag.flag_qubit);
        flag_triggers.set(j, faulty.sign_of(&z_flag)?);
    }
    Ok(FrameOutcome { stabilizer_flips, flag_triggers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_input_label, FlagType};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn tq(s: &str) -> TwoQubitPauli {
        s.parse().unwrap()
    }

    #[test]
    fn pauli_parse_display_round_trip() {
        for s in ["+XIZ", "-YYI", "+I", "-Z", "+XYZI"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("XIZ").to_string(), "+XIZ");
        assert!("".parse::<PauliString>().is_err());
        assert!("+XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation_fixtures() {
        assert!(p("XI").commutes(&p("IX")));
        assert!(!p("XI").commutes(&p("ZI")));
        assert!(p("XX").commutes(&p("ZZ")));
        assert!(!p("Y").commutes(&p("X")));
        // Mixed lengths: shorter side is identity-padded.
        assert!(p("XI").commutes(&p("IXZ")));
        assert!(!p("X").commutes(&p("ZZZ")));
    }

    #[test]
    fn product_phase_fixtures() {
        // XX * ZZ = -YY (each site X*Z = -iY, two sites make the phase real).
        let mut q = p("ZZ");
        q.mul_assign(&p("XX"));
        assert_eq!(q, p("-YY"));

        let mut q = p("-YY");
        q.mul_assign(&p("XX"));
        assert_eq!(q, p("ZZ"));

        let mut q = p("Z");
        q.mul_assign(&p("Z"));
        assert_eq!(q, p("I"));

        // Sign bookkeeping: (-X)(-X) = +I, (+X)(-X) = -I is not a group
        // element but the phase rule still composes signs additively.
        let mut q = p("-X");
        q.mul_assign(&p("-X"));
        assert_eq!(q, p("I"));
    }

    #[test]
    fn conjugation_fixtures() {
        let cnot = GateKind::Cnot { control: 0, target: 1 };
        let cases = [
            ("XI", "XX"),
            ("IX", "IX"),
            ("ZI", "ZI"),
            ("IZ", "ZZ"),
            ("YY", "-XZ"),
            ("XX", "XI"),
            ("ZZ", "IZ"),
        ];
        for (before, after) in cases {
            let mut q = p(before);
            q.conjugate(cnot);
            assert_eq!(q, p(after), "CNOT conjugation of {before}");
        }

        let h = GateKind::H { target: 0 };
        for (before, after) in [("X", "Z"), ("Z", "X"), ("Y", "-Y"), ("I", "I")] {
            let mut q = p(before);
            q.conjugate(h);
            assert_eq!(q, p(after), "H conjugation of {before}");
        }
    }

    #[test]
    fn two_qubit_pauli_encoding() {
        assert_eq!(tq("XI").index(), 1);
        assert_eq!(tq("ZI").index(), 2);
        assert_eq!(tq("IX").index(), 4);
        assert_eq!(tq("IZ").index(), 8);
        assert_eq!(tq("YY").index(), 15);
        assert_eq!(TwoQubitPauli::all().count(), 15);
        for q in TwoQubitPauli::all() {
            assert_eq!(tq(&q.to_string()), q);
        }
        assert!("II".parse::<TwoQubitPauli>().is_err());
        assert!("X".parse::<TwoQubitPauli>().is_err());
        assert_eq!(tq("XZ").embed(4, 2, 0), p("ZIXI"));
    }

    #[test]
    fn canonicalize_is_generator_invariant() {
        let a = canonicalize(vec![p("XXX"), p("ZZI"), p("IZZ")]).unwrap();
        // Same group, different generators and order.
        let mut zxz = p("ZZI");
        zxz.mul_assign(&p("IZZ")); // ZIZ
        let mut big = p("XXX");
        big.mul_assign(&p("ZZI")); // -YYX
        let b = canonicalize(vec![zxz, p("IZZ"), big]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonicalize_rejects_bad_sets() {
        assert!(matches!(
            canonicalize(vec![p("XI"), p("ZI")]),
            Err(FrameError::NonCommuting { a: 0, b: 1 })
        ));
        assert!(matches!(
            canonicalize(vec![p("XX"), p("ZZ"), p("-YY")]),
            Err(FrameError::DependentGenerators { rank: 2, rows: 3 })
        ));
    }

    #[test]
    fn sign_of_reads_group_membership() {
        let set = canonicalize(vec![p("XXI"), p("ZZI"), p("IIZ")]).unwrap();
        assert!(!set.sign_of(&p("XXI")).unwrap());
        assert!(set.sign_of(&p("-XXI")).unwrap());
        assert!(!set.sign_of(&p("-YYI")).unwrap()); // XX*ZZ
        assert!(!set.sign_of(&p("III")).unwrap());
        assert!(matches!(set.sign_of(&p("XII")), Err(FrameError::NotInGroup { .. })));
        assert!(matches!(set.sign_of(&p("ZII")), Err(FrameError::NotInGroup { .. })));
    }

    /// The worked single-fault example: a three-qubit fan-out `CNOT(0,2);
    /// CNOT(0,1)` with an X fault on qubit 0 after the first CNOT, run bare
    /// and with an X-flag on qubit 0 spanning both body gates. Expected
    /// canonical stabilizer sets for every input and all four variants,
    /// compared as sets (canonical row order may differ from a presentation
    /// order).
    struct TruthRow {
        input: &'static str,
        flagless: &'static [&'static str],
        flagged: &'static [&'static str],
        flagless_faulty: &'static [&'static str],
        flagged_faulty: &'static [&'static str],
    }

    const TRUTH_TABLE: &[TruthRow] = &[
        TruthRow {
            input: "000",
            flagless: &["+ZII", "+IZI", "+IIZ"],
            flagged: &["+ZIII", "+IZII", "+IIZI", "+IIIZ"],
            flagless_faulty: &["-ZII", "-IZI", "+IIZ"],
            flagged_faulty: &["-ZIII", "-IZII", "+IIZI", "-IIIZ"],
        },
        TruthRow {
            input: "+00",
            flagless: &["+XXX", "+ZIZ", "+IZZ"],
            flagged: &["+XXXI", "+ZIZI", "+IZZI", "+IIIZ"],
            flagless_faulty: &["+XXX", "-ZIZ", "-IZZ"],
            flagged_faulty: &["+XXXI", "-ZIZI", "-IZZI", "-IIIZ"],
        },
        TruthRow {
            input: "++0",
            flagless: &["+XIX", "+ZIZ", "+IXI"],
            flagged: &["+XIXI", "+ZIZI", "+IXII", "+IIIZ"],
            flagless_faulty: &["+XIX", "-ZIZ", "+IXI"],
            flagged_faulty: &["+XIXI", "-ZIZI", "+IXII", "-IIIZ"],
        },
        TruthRow {
            input: "+0+",
            flagless: &["+XXI", "+ZZI", "+IIX"],
            flagged: &["+XXII", "+ZZII", "+IIXI", "+IIIZ"],
            // The fault is masked: the data state is unchanged.
            flagless_faulty: &["+XXI", "+ZZI", "+IIX"],
            flagged_faulty: &["+XXII", "+ZZII", "+IIXI", "-IIIZ"],
        },
        TruthRow {
            input: "0+0",
            flagless: &["+ZII", "+IXI", "+IIZ"],
            flagged: &["+ZIII", "+IXII", "+IIZI", "+IIIZ"],
            flagless_faulty: &["-ZII", "+IXI", "+IIZ"],
            flagged_faulty: &["-ZIII", "+IXII", "+IIZI", "-IIIZ"],
        },
        TruthRow {
            input: "0++",
            flagless: &["+ZII", "+IXI", "+IIX"],
            flagged: &["+ZIII", "+IXII", "+IIXI", "+IIIZ"],
            flagless_faulty: &["-ZII", "+IXI", "+IIX"],
            flagged_faulty: &["-ZIII", "+IXII", "+IIXI", "-IIIZ"],
        },
        TruthRow {
            input: "00+",
            flagless: &["+ZII", "+IZI", "+IIX"],
            flagged: &["+ZIII", "+IZII", "+IIXI", "+IIIZ"],
            flagless_faulty: &["-ZII", "-IZI", "+IIX"],
            flagged_faulty: &["-ZIII", "-IZII", "+IIXI", "-IIIZ"],
        },
        TruthRow {
            input: "+++",
            flagless: &["+XII", "+IXI", "+IIX"],
            flagged: &["+XIII", "+IXII", "+IIXI", "+IIIZ"],
            // Masked again: X on a |+> wire commutes with everything downstream.
            flagless_faulty: &["+XII", "+IXI", "+IIX"],
            flagged_faulty: &["+XIII", "+IXII", "+IIXI", "-IIIZ"],
        },
    ];

    fn fanout_circuits() -> (Circuit, Circuit) {
        let flagless = Circuit::new(
            vec![InitBasis::Zero; 3],
            vec![(0, 2), (0, 1)],
        )
        .unwrap();
        let flagged = flagless.with_flags(&[(FlagType::X, 0, 0, 1)]).unwrap();
        (flagless, flagged)
    }

    fn with_input(c: &Circuit, label: &str) -> Circuit {
        let inits = parse_input_label(label).unwrap();
        let flags: Vec<_> = c
            .flags()
            .iter()
            .map(|f| (f.flag_type, f.data_qubit, f.window_start, f.window_end))
            .collect();
        Circuit::new(inits, c.body_cnots()).unwrap().with_flags(&flags).unwrap()
    }

    fn gen_set(set: &StabilizerSet) -> BTreeSet<String> {
        set.gens().iter().map(|g| g.to_string()).collect()
    }

    fn expected_set(rows: &[&str]) -> BTreeSet<String> {
        rows.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn truth_table_canonical_sets() {
        let (flagless0, flagged0) = fanout_circuits();
        // X on the control right after the first body CNOT.
        let fault_flagless = [FaultEvent { location: 0, pauli: tq("XI") }];
        let fault_flagged =
            [FaultEvent { location: flagged0.body_to_gate_index(0), pauli: tq("XI") }];

        for row in TRUTH_TABLE {
            let input = parse_input_label(row.input).unwrap();
            let flagless = with_input(&flagless0, row.input);
            let flagged = with_input(&flagged0, row.input);

            let cases: [(&Circuit, &[FaultEvent], &[&str]); 4] = [
                (&flagless, &[], row.flagless),
                (&flagged, &[], row.flagged),
                (&flagless, &fault_flagless, row.flagless_faulty),
                (&flagged, &fault_flagged, row.flagged_faulty),
            ];
            for (circuit, faults, expected) in cases {
                let got = canonical_stabilizers_with_faults(circuit, faults, &input).unwrap();
                assert_eq!(
                    gen_set(&got),
                    expected_set(expected),
                    "input {} with {} faults on {} qubits",
                    row.input,
                    faults.len(),
                    circuit.n_qubits()
                );
            }
        }
    }

    #[test]
    fn truth_table_frame_flips_and_triggers() {
        let (flagless0, flagged0) = fanout_circuits();
        for row in TRUTH_TABLE {
            let input = parse_input_label(row.input).unwrap();
            let flagless = with_input(&flagless0, row.input);
            let flagged = with_input(&flagged0, row.input);
            let reference = canonical_stabilizers(&flagless, &input).unwrap();

            // Expected flips, derived from the table: a generator flips when
            // the same Pauli body carries opposite signs in the faultless and
            // faulty columns.
            let faulty_signs: std::collections::HashMap<String, bool> = row
                .flagless_faulty
                .iter()
                .map(|s| (s[1..].to_string(), s.starts_with('-')))
                .collect();
            let expected_flips: Vec<bool> = reference
                .gens()
                .iter()
                .map(|g| {
                    let body = g.to_string()[1..].to_string();
                    faulty_signs[&body] != g.is_negative()
                })
                .collect();

            let fault = [FaultEvent { location: 0, pauli: tq("XI") }];
            let bare = propagate_faults(&flagless, &fault, &reference).unwrap();
            let got_flips: Vec<bool> =
                (0..reference.len()).map(|k| bare.stabilizer_flips.get(k)).collect();
            assert_eq!(got_flips, expected_flips, "input {}", row.input);

            // Same fault inside the flagged circuit: same data flips, and the
            // flag must trigger on every input (the fault sits inside the
            // window on the flagged wire).
            let fault_flagged =
                [FaultEvent { location: flagged.body_to_gate_index(0), pauli: tq("XI") }];
            let dressed = propagate_faults(&flagged, &fault_flagged, &reference).unwrap();
            let dressed_flips: Vec<bool> =
                (0..reference.len()).map(|k| dressed.stabilizer_flips.get(k)).collect();
            assert_eq!(dressed_flips, expected_flips, "flagged, input {}", row.input);
            assert!(dressed.any_trigger(), "flag must catch the fault, input {}", row.input);
        }
    }

    #[test]
    fn brute_force_agrees_on_truth_table_fixture() {
        let (flagless0, flagged0) = fanout_circuits();
        for row in TRUTH_TABLE {
            let input = parse_input_label(row.input).unwrap();
            let flagless = with_input(&flagless0, row.input);
            let flagged = with_input(&flagged0, row.input);
            let reference = canonical_stabilizers(&flagless, &input).unwrap();

            for location in 0..flagged.gates().len() {
                for pauli in TwoQubitPauli::all() {
                    let faults = [FaultEvent { location, pauli }];
                    let fast = propagate_faults(&flagged, &faults, &reference).unwrap();
                    let exact =
                        brute_force_state_check(&flagged, &faults, &input, &reference).unwrap();
                    assert_eq!(fast, exact, "input {} loc {location} pauli {pauli}", row.input);
                }
            }
        }
    }

    #[test]
    fn brute_force_rejects_oversized_circuits() {
        let c = Circuit::new(vec![InitBasis::Zero; 13], vec![(0, 1)]).unwrap();
        let input = vec![InitBasis::Zero; 13];
        let reference = canonical_stabilizers(&c, &input).unwrap();
        assert!(matches!(
            brute_force_state_check(&c, &[], &input, &reference),
            Err(FrameError::SizeLimitExceeded { got: 13, limit: 12 })
        ));
    }

    #[test]
    fn fault_location_must_be_a_cnot() {
        let text = "QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 1 0\nFLAG Z 0 0 0\n";
        let c: Circuit = text.parse().unwrap();
        // Lowered: H(2), CNOT(2,0), CNOT(1,0), CNOT(2,0), H(2).
        let input = vec![InitBasis::Zero; 2];
        let reference = canonical_stabilizers(&c.strip_flags(), &input).unwrap();
        let on_h = [FaultEvent { location: 0, pauli: tq("XI") }];
        assert!(matches!(
            propagate_faults(&c, &on_h, &reference),
            Err(FrameError::MalformedFaultLocation { location: 0 })
        ));
        let past_end = [FaultEvent { location: 99, pauli: tq("XI") }];
        assert!(matches!(
            propagate_faults(&c, &past_end, &reference),
            Err(FrameError::MalformedFaultLocation { location: 99 })
        ));
        let on_gadget_cnot = [FaultEvent { location: 1, pauli: tq("XI") }];
        assert!(propagate_faults(&c, &on_gadget_cnot, &reference).is_ok());
    }

    #[test]
    fn z_flag_catches_phase_fault() {
        // Z-flag on qubit 0 over two body CNOTs targeting it; a Z fault on
        // the data wire inside the window anticommutes with the gadget's
        // X-type coupling, so the flag fires.
        let text = "QUBITS 3\nINPUT 0 0\nINPUT 1 0\nINPUT 2 0\nCNOT 1 0\nCNOT 2 0\nFLAG Z 0 0 1\n";
        let c: Circuit = text.parse().unwrap();
        let input = vec![InitBasis::Zero; 3];
        let reference = canonical_stabilizers(&c.strip_flags(), &input).unwrap();
        // Lowered: H(3), CNOT(3,0), CNOT(1,0) [body 0], CNOT(2,0) [body 1], CNOT(3,0), H(3).
        let z_fault = [FaultEvent { location: c.body_to_gate_index(0), pauli: tq("IZ") }];
        let out = propagate_faults(&c, &z_fault, &reference).unwrap();
        assert!(out.any_trigger(), "Z fault inside window must trigger the Z-flag");
        let exact = brute_force_state_check(&c, &z_fault, &input, &reference).unwrap();
        assert_eq!(out, exact);

        // An X fault on the same wire commutes with the coupling: no trigger.
        let x_fault = [FaultEvent { location: c.body_to_gate_index(0), pauli: tq("IX") }];
        let out = propagate_faults(&c, &x_fault, &reference).unwrap();
        assert!(!out.any_trigger(), "X fault must not trigger a Z-flag");
    }

    fn arb_faults(n_locations: usize) -> impl Strategy<Value = Vec<FaultEvent>> {
        proptest::collection::vec(
            (0..n_locations, 1u8..16).prop_map(|(location, index)| FaultEvent {
                location,
                pauli: TwoQubitPauli::from_index(index).unwrap(),
            }),
            0..5,
        )
    }

    fn chain_fixture() -> (Circuit, Vec<InitBasis>, StabilizerSet) {
        let text = "QUBITS 4\nINPUT 0 +\nINPUT 1 0\nINPUT 2 0\nINPUT 3 0\n\
                    CNOT 0 1\nCNOT 1 2\nCNOT 2 3\nCNOT 0 2\nFLAG X 0 0 3\nFLAG Z 3 1 2\n";
        let c: Circuit = text.parse().unwrap();
        let input = parse_input_label("+000").unwrap();
        let reference = canonical_stabilizers(&c.strip_flags(), &input).unwrap();
        (c, input, reference)
    }

    proptest! {
        /// Frames compose linearly over GF(2): outcomes of a fault union are
        /// the XOR of the outcomes of the parts.
        #[test]
        fn prop_frame_linearity(f1 in arb_faults(4), f2 in arb_faults(4)) {
            let (c, _input, reference) = chain_fixture();
            // Only CNOT locations are valid; the chain fixture's lowered list
            // mixes in H gates, so remap locations onto its CNOTs.
            let cnots: Vec<usize> = c
                .gates()
                .iter()
                .enumerate()
                .filter(|(_, g)| matches!(g.kind, GateKind::Cnot { .. }))
                .map(|(i, _)| i)
                .collect();
            let remap = |fs: &[FaultEvent]| -> Vec<FaultEvent> {
                fs.iter()
                    .map(|f| FaultEvent { location: cnots[f.location % cnots.len()], pauli: f.pauli })
                    .collect()
            };
            let f1 = remap(&f1);
            let f2 = remap(&f2);
            let both: Vec<FaultEvent> = f1.iter().chain(&f2).copied().collect();

            let a = propagate_faults(&c, &f1, &reference).unwrap();
            let b = propagate_faults(&c, &f2, &reference).unwrap();
            let ab = propagate_faults(&c, &both, &reference).unwrap();

            let mut want_flips = a.stabilizer_flips.clone();
            want_flips.xor_with(&b.stabilizer_flips);
            let mut want_triggers = a.flag_triggers.clone();
            want_triggers.xor_with(&b.flag_triggers);
            prop_assert_eq!(ab.stabilizer_flips, want_flips);
            prop_assert_eq!(ab.flag_triggers, want_triggers);
        }

        /// The frame shortcut matches the exact tableau oracle fault-for-fault.
        #[test]
        fn prop_frame_matches_brute_force(faults in arb_faults(4)) {
            let (c, input, reference) = chain_fixture();
            let cnots: Vec<usize> = c
                .gates()
                .iter()
                .enumerate()
                .filter(|(_, g)| matches!(g.kind, GateKind::Cnot { .. }))
                .map(|(i, _)| i)
                .collect();
            let faults: Vec<FaultEvent> = faults
                .iter()
                .map(|f| FaultEvent { location: cnots[f.location % cnots.len()], pauli: f.pauli })
                .collect();
            let fast = propagate_faults(&c, &faults, &reference).unwrap();
            let exact = brute_force_state_check(&c, &faults, &input, &reference).unwrap();
            prop_assert_eq!(fast, exact);
        }

        /// Canonical form is invariant under re-generation of the group:
        /// multiplying one generator into another and shuffling rows changes
        /// nothing.
        #[test]
        fn prop_canonical_form_is_unique(
            seed_rows in proptest::sample::select(vec!["+000", "++00", "0+0+", "++++"]),
            ops in proptest::collection::vec((0usize..4, 0usize..4), 0..6),
            shuffle in proptest::collection::vec(0usize..4, 4),
        ) {
            let (c, _, _) = chain_fixture();
            let input = parse_input_label(seed_rows).unwrap();
            let set = canonical_stabilizers(&c.strip_flags(), &input).unwrap();
            let mut rows: Vec<PauliString> = set.gens().to_vec();
            for (i, j) in ops {
                if i != j {
                    let rhs = rows[j].clone();
                    rows[i].mul_assign(&rhs);
                }
            }
            // A cheap deterministic shuffle driven by the sampled indices.
            for (a, &b) in shuffle.iter().enumerate() {
                rows.swap(a, b);
            }
            let again = canonicalize(rows).unwrap();
            prop_assert_eq!(again, set);
        }
    }
}
