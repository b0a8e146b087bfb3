//! Circuit intermediate representation, validation, and the line-oriented
//! text format (format v1).
//!
//! A [`Circuit`] is an ICM body (per-qubit initializations, ordered CNOTs,
//! terminal Z measurements on every qubit) plus flag annotations. Annotations
//! address *body-gate* positions, so they survive re-lowering; construction
//! lowers them to explicit gadget gates:
//!
//! * X-flag: `CNOT(data, flag)` before `window_start`, `CNOT(data, flag)`
//!   after `window_end`.
//! * Z-flag: `H(flag); CNOT(flag, data)` before `window_start`,
//!   `CNOT(flag, data); H(flag)` after `window_end`.
//!
//! Flag qubits are appended after the data qubits, initialized to `|0>`, and
//! measured in Z (the Z-flag's closing `H` restores its measurement basis).
//! When several flags open or close at the same body index they are lowered
//! in ascending flag-qubit order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Initialization basis of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InitBasis {
    /// `|0>`
    Zero,
    /// `|+>`
    Plus,
}

impl fmt::Display for InitBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitBasis::Zero => "0",
            InitBasis::Plus => "+",
        })
    }
}

/// Role of a qubit within a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitRole {
    Data,
    FlagX,
    FlagZ,
}

/// Gate kind. Bodies are CNOT-only; `H` occurs only inside Z-flag gadgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Cnot { control: usize, target: usize },
    H { target: usize },
}

/// Whether a gate belongs to the original body or to a lowered flag gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateRole {
    Body,
    FlagGadget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub role: GateRole,
}

/// Flag gadget type: X-flags detect bit flips, Z-flags detect phase flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlagType {
    X,
    Z,
}

impl fmt::Display for FlagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlagType::X => "X",
            FlagType::Z => "Z",
        })
    }
}

/// A flag attached to one data qubit, protecting a window of body gates.
///
/// `window_start`/`window_end` are inclusive body-gate indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlagAnnotation {
    pub flag_type: FlagType,
    pub data_qubit: usize,
    pub window_start: usize,
    pub window_end: usize,
    pub flag_qubit: usize,
}

/// A violated circuit invariant, as data rather than an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// CNOT with `control == target`.
    SelfLoop { gate: usize },
    /// Gate touches a qubit index `>= n_data + n_flags`.
    IndexOutOfRange { gate: usize },
    /// More than one flag annotation touches this data qubit.
    UniquenessViolated { qubit: usize },
    /// Window indices are not valid body-gate positions (`start <= end`).
    WindowInvalid { flag_qubit: usize },
    /// Flag annotation names a data qubit outside the data range.
    FlagDataOutOfRange { flag_qubit: usize },
    /// Flag qubits must be numbered `n_data, n_data+1, ...` in order.
    FlagQubitMisnumbered { flag_qubit: usize },
    /// `inits` must cover every qubit, with flag qubits at `|0>`.
    InitsMalformed,
    /// `H` outside a Z-flag gadget, or on a non-FlagZ qubit.
    HadamardOutsideGadget { gate: usize },
    /// Lowered gadget gates do not correspond to the annotations.
    GadgetMismatch,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { gate } => write!(f, "gate {gate}: CNOT control equals target"),
            Violation::IndexOutOfRange { gate } => write!(f, "gate {gate}: qubit index out of range"),
            Violation::UniquenessViolated { qubit } => {
                write!(f, "data qubit {qubit}: touched by more than one flag")
            }
            Violation::WindowInvalid { flag_qubit } => {
                write!(f, "flag qubit {flag_qubit}: window is not a valid body-gate range")
            }
            Violation::FlagDataOutOfRange { flag_qubit } => {
                write!(f, "flag qubit {flag_qubit}: data qubit out of range")
            }
            Violation::FlagQubitMisnumbered { flag_qubit } => {
                write!(f, "flag qubit {flag_qubit}: flags must be numbered n_data.. in order")
            }
            Violation::InitsMalformed => write!(f, "inits must cover all qubits with flags at |0>"),
            Violation::HadamardOutsideGadget { gate } => {
                write!(f, "gate {gate}: H allowed only in Z-flag gadgets")
            }
            Violation::GadgetMismatch => write!(f, "gadget gates do not match flag annotations"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("syntax error on line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("semantic error on line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error("invalid circuit: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// An ICM circuit with optional flags, stored in lowered form.
///
/// Immutable after construction; safe to share across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n_data: usize,
    /// One entry per qubit (`n_data + n_flags`); flag entries are `Zero`.
    inits: Vec<InitBasis>,
    /// Lowered gate list: body CNOTs interleaved with gadget gates.
    gates: Vec<Gate>,
    flags: Vec<FlagAnnotation>,
    /// `body_index[k]` is the position of body gate `k` in `gates`.
    body_index: Vec<usize>,
}

impl Circuit {
    /// Flagless circuit from data inits and body CNOTs. Validates invariants.
    pub fn new(
        data_inits: Vec<InitBasis>,
        body: Vec<(usize, usize)>,
    ) -> Result<Circuit, CircuitError> {
        let c = Circuit::from_parts(data_inits, body, Vec::new());
        let violations = c.validate();
        if violations.is_empty() {
            Ok(c)
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }

    /// Builds without validating; pair with [`Circuit::validate`].
    ///
    /// Flags with out-of-range windows contribute no gadget gates, so the
    /// resulting structural violations are reportable rather than fatal.
    pub fn from_parts(
        data_inits: Vec<InitBasis>,
        body: Vec<(usize, usize)>,
        flags: Vec<FlagAnnotation>,
    ) -> Circuit {
        let n_data = data_inits.len();
        let mut inits = data_inits;
        inits.extend(std::iter::repeat(InitBasis::Zero).take(flags.len()));
        let (gates, body_index) = lower(&body, &flags);
        Circuit {
            n_data,
            inits,
            gates,
            flags,
            body_index,
        }
    }

    /// Copy of this circuit with the given flags added (self must be
    /// flagless). Flag qubits are assigned `n_data, n_data+1, ...` in the
    /// order given.
    pub fn with_flags(
        &self,
        specs: &[(FlagType, usize, usize, usize)],
    ) -> Result<Circuit, CircuitError> {
        assert!(self.flags.is_empty(), "with_flags requires a flagless circuit");
        let flags = specs
            .iter()
            .enumerate()
            .map(|(i, &(flag_type, data_qubit, window_start, window_end))| FlagAnnotation {
                flag_type,
                data_qubit,
                window_start,
                window_end,
                flag_qubit: self.n_data + i,
            })
            .collect();
        let c = Circuit::from_parts(
            self.inits[..self.n_data].to_vec(),
            self.body_cnots(),
            flags,
        );
        let violations = c.validate();
        if violations.is_empty() {
            Ok(c)
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }

    /// The flagless circuit with the same body.
    pub fn strip_flags(&self) -> Circuit {
        Circuit::from_parts(self.inits[..self.n_data].to_vec(), self.body_cnots(), Vec::new())
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_flags(&self) -> usize {
        self.flags.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data + self.flags.len()
    }

    /// Initializations for all qubits (flag entries are `Zero`).
    pub fn inits(&self) -> &[InitBasis] {
        &self.inits
    }

    /// Lowered gate list.
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn flags(&self) -> &[FlagAnnotation] {
        &self.flags
    }

    pub fn body_gate_count(&self) -> usize {
        self.body_index.len()
    }

    /// Position of body gate `k` in the lowered gate list.
    pub fn body_to_gate_index(&self, k: usize) -> usize {
        self.body_index[k]
    }

    /// Body CNOTs as `(control, target)` pairs, in order.
    pub fn body_cnots(&self) -> Vec<(usize, usize)> {
        self.body_index
            .iter()
            .map(|&i| match self.gates[i].kind {
                GateKind::Cnot { control, target } => (control, target),
                GateKind::H { .. } => unreachable!("body gates are CNOTs"),
            })
            .collect()
    }

    pub fn qubit_role(&self, q: usize) -> QubitRole {
        assert!(q < self.n_qubits(), "qubit {q} out of range");
        if q < self.n_data {
            QubitRole::Data
        } else {
            match self.flags[q - self.n_data].flag_type {
                FlagType::X => QubitRole::FlagX,
                FlagType::Z => QubitRole::FlagZ,
            }
        }
    }

    /// Checks every structural invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n_qubits = self.n_qubits();

        if self.inits.len() != n_qubits
            || self.inits[self.n_data.min(self.inits.len())..]
                .iter()
                .any(|&b| b != InitBasis::Zero)
        {
            out.push(Violation::InitsMalformed);
        }

        for (i, gate) in self.gates.iter().enumerate() {
            match gate.kind {
                GateKind::Cnot { control, target } => {
                    if control == target {
                        out.push(Violation::SelfLoop { gate: i });
                    }
                    if control >= n_qubits || target >= n_qubits {
                        out.push(Violation::IndexOutOfRange { gate: i });
                    }
                }
                GateKind::H { target } => {
                    if target >= n_qubits {
                        out.push(Violation::IndexOutOfRange { gate: i });
                    } else if gate.role != GateRole::FlagGadget
                        || target < self.n_data
                        || self.flags[target - self.n_data].flag_type != FlagType::Z
                    {
                        out.push(Violation::HadamardOutsideGadget { gate: i });
                    }
                }
            }
        }

        let body_count = self.body_index.len();
        let mut flagged = vec![0usize; self.n_data];
        for (i, flag) in self.flags.iter().enumerate() {
            if flag.flag_qubit != self.n_data + i {
                out.push(Violation::FlagQubitMisnumbered { flag_qubit: flag.flag_qubit });
            }
            if flag.data_qubit >= self.n_data {
                out.push(Violation::FlagDataOutOfRange { flag_qubit: flag.flag_qubit });
                continue;
            }
            if flag.window_start > flag.window_end || flag.window_end >= body_count {
                out.push(Violation::WindowInvalid { flag_qubit: flag.flag_qubit });
            }
            flagged[flag.data_qubit] += 1;
        }
        for (q, &count) in flagged.iter().enumerate() {
            if count > 1 {
                out.push(Violation::UniquenessViolated { qubit: q });
            }
        }

        // Every gadget gate must come from re-lowering the annotations.
        let (expected, _) = lower(&self.body_cnots(), &self.flags);
        if expected != self.gates {
            out.push(Violation::GadgetMismatch);
        }

        out
    }

    /// Serializes to text format v1. Statement order: `QUBITS`, `INPUT`
    /// (ascending qubit), `CNOT` (body order), `FLAG` (flag-qubit order).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("QUBITS {}\n", self.n_data));
        for (q, init) in self.inits[..self.n_data].iter().enumerate() {
            out.push_str(&format!("INPUT {q} {init}\n"));
        }
        for (control, target) in self.body_cnots() {
            out.push_str(&format!("CNOT {control} {target}\n"));
        }
        for flag in &self.flags {
            out.push_str(&format!(
                "FLAG {} {} {} {}\n",
                flag.flag_type, flag.data_qubit, flag.window_start, flag.window_end
            ));
        }
        out
    }

    /// Parses text format v1 (see module docs and the README).
    pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
        let syntax = |line: usize, msg: String| CircuitError::Syntax { line, msg };
        let semantic = |line: usize, msg: String| CircuitError::Semantic { line, msg };

        let mut n_data: Option<usize> = None;
        let mut inits: Vec<Option<InitBasis>> = Vec::new();
        let mut input_lines: Vec<usize> = Vec::new();
        let mut body: Vec<(usize, usize)> = Vec::new();
        // (type, data qubit, start, end, source line)
        let mut flag_specs: Vec<(FlagType, usize, usize, usize, usize)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stmt = raw.split('#').next().unwrap_or("").trim();
            if stmt.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = stmt.split_whitespace().collect();
            let parse_usize = |tok: &str| {
                tok.parse::<usize>()
                    .map_err(|_| syntax(line, format!("expected a non-negative integer, got `{tok}`")))
            };

            match tokens[0] {
                "QUBITS" => {
                    if n_data.is_some() {
                        return Err(syntax(line, "duplicate QUBITS statement".into()));
                    }
                    if tokens.len() != 2 {
                        return Err(syntax(line, "usage: QUBITS <n_data>".into()));
                    }
                    let n = parse_usize(tokens[1])?;
                    inits = vec![None; n];
                    input_lines = vec![0; n];
                    n_data = Some(n);
                }
                "INPUT" => {
                    let n = n_data.ok_or_else(|| syntax(line, "QUBITS must come first".into()))?;
                    if tokens.len() != 3 {
                        return Err(syntax(line, "usage: INPUT <q> <0|+>".into()));
                    }
                    let q = parse_usize(tokens[1])?;
                    if q >= n {
                        return Err(semantic(line, format!("qubit {q} out of range (n_data = {n})")));
                    }
                    let basis = match tokens[2] {
                        "0" => InitBasis::Zero,
                        "+" => InitBasis::Plus,
                        other => return Err(syntax(line, format!("expected 0 or +, got `{other}`"))),
                    };
                    if inits[q].is_some() {
                        return Err(semantic(line, format!("duplicate INPUT for qubit {q}")));
                    }
                    inits[q] = Some(basis);
                    input_lines[q] = line;
                }
                "CNOT" => {
                    let n = n_data.ok_or_else(|| syntax(line, "QUBITS must come first".into()))?;
                    if tokens.len() != 3 {
                        return Err(syntax(line, "usage: CNOT <control> <target>".into()));
                    }
                    let control = parse_usize(tokens[1])?;
                    let target = parse_usize(tokens[2])?;
                    if control >= n || target >= n {
                        return Err(semantic(line, format!("qubit index out of range (n_data = {n})")));
                    }
                    if control == target {
                        return Err(semantic(line, "CNOT control equals target".into()));
                    }
                    body.push((control, target));
                }
                "FLAG" => {
                    let n = n_data.ok_or_else(|| syntax(line, "QUBITS must come first".into()))?;
                    if tokens.len() != 5 {
                        return Err(syntax(line, "usage: FLAG <X|Z> <data_qubit> <window_start> <window_end>".into()));
                    }
                    let flag_type = match tokens[1] {
                        "X" => FlagType::X,
                        "Z" => FlagType::Z,
                        other => return Err(syntax(line, format!("expected X or Z, got `{other}`"))),
                    };
                    let data_qubit = parse_usize(tokens[2])?;
                    if data_qubit >= n {
                        return Err(semantic(line, format!("data qubit {data_qubit} out of range")));
                    }
                    if flag_specs.iter().any(|f| f.1 == data_qubit) {
                        return Err(semantic(line, format!("data qubit {data_qubit} already has a flag")));
                    }
                    let start = parse_usize(tokens[3])?;
                    let end = parse_usize(tokens[4])?;
                    flag_specs.push((flag_type, data_qubit, start, end, line));
                }
                other => return Err(syntax(line, format!("unknown statement `{other}`"))),
            }
        }

        let n = n_data.ok_or_else(|| syntax(1, "missing QUBITS statement".into()))?;
        let mut resolved = Vec::with_capacity(n);
        for (q, init) in inits.into_iter().enumerate() {
            match init {
                Some(b) => resolved.push(b),
                None => return Err(semantic(0, format!("missing INPUT for qubit {q}"))),
            }
        }
        for &(_, _, start, end, line) in &flag_specs {
            if start > end || end >= body.len() {
                return Err(semantic(
                    line,
                    format!("window [{start}, {end}] is not a valid body-gate range (body has {} gates)", body.len()),
                ));
            }
        }

        let flags = flag_specs
            .iter()
            .enumerate()
            .map(|(i, &(flag_type, data_qubit, window_start, window_end, _))| FlagAnnotation {
                flag_type,
                data_qubit,
                window_start,
                window_end,
                flag_qubit: n + i,
            })
            .collect();
        let c = Circuit::from_parts(resolved, body, flags);
        debug_assert!(c.validate().is_empty(), "parser admitted an invalid circuit");
        Ok(c)
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Circuit::parse(s)
    }
}

/// Compact input label: one `0`/`+` per data qubit, qubit 0 leftmost.
pub fn input_label(bases: &[InitBasis]) -> String {
    bases.iter().map(|b| b.to_string()).collect()
}

/// Inverse of [`input_label`].
pub fn parse_input_label(label: &str) -> Result<Vec<InitBasis>, CircuitError> {
    label
        .chars()
        .map(|ch| match ch {
            '0' => Ok(InitBasis::Zero),
            '+' => Ok(InitBasis::Plus),
            other => Err(CircuitError::Syntax {
                line: 0,
                msg: format!("input label may contain only 0 and +, got `{other}`"),
            }),
        })
        .collect()
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Lowers body CNOTs plus annotations into the full gate list.
///
/// Gadgets open immediately before their `window_start` body gate and close
/// immediately after `window_end`; same-index ties resolve in ascending
/// flag-qubit order. Flags with invalid windows are skipped here (validation
/// reports them).
fn lower(body: &[(usize, usize)], flags: &[FlagAnnotation]) -> (Vec<Gate>, Vec<usize>) {
    let valid = |f: &&FlagAnnotation| f.window_start <= f.window_end && f.window_end < body.len();
    let mut gates = Vec::with_capacity(body.len() + 4 * flags.len());
    let mut body_index = Vec::with_capacity(body.len());

    for (k, &(control, target)) in body.iter().enumerate() {
        for flag in flags.iter().filter(valid).filter(|f| f.window_start == k) {
            emit_gadget(&mut gates, flag, GadgetHalf::Open);
        }
        body_index.push(gates.len());
        gates.push(Gate {
            kind: GateKind::Cnot { control, target },
            role: GateRole::Body,
        });
        for flag in flags.iter().filter(valid).filter(|f| f.window_end == k) {
            emit_gadget(&mut gates, flag, GadgetHalf::Close);
        }
    }
    (gates, body_index)
}

enum GadgetHalf {
    Open,
    Close,
}

fn emit_gadget(gates: &mut Vec<Gate>, flag: &FlagAnnotation, half: GadgetHalf) {
    let gadget = |kind| Gate {
        kind,
        role: GateRole::FlagGadget,
    };
    let coupling = match flag.flag_type {
        FlagType::X => GateKind::Cnot {
            control: flag.data_qubit,
            target: flag.flag_qubit,
        },
        FlagType::Z => GateKind::Cnot {
            control: flag.flag_qubit,
            target: flag.data_qubit,
        },
    };
    let h = GateKind::H {
        target: flag.flag_qubit,
    };
    match (flag.flag_type, half) {
        (FlagType::X, _) => gates.push(gadget(coupling)),
        (FlagType::Z, GadgetHalf::Open) => {
            gates.push(gadget(h));
            gates.push(gadget(coupling));
        }
        (FlagType::Z, GadgetHalf::Close) => {
            gates.push(gadget(coupling));
            gates.push(gadget(h));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cnot(control: usize, target: usize, role: GateRole) -> Gate {
        Gate {
            kind: GateKind::Cnot { control, target },
            role,
        }
    }

    fn h(target: usize) -> Gate {
        Gate {
            kind: GateKind::H { target },
            role: GateRole::FlagGadget,
        }
    }

    const DEMO: &str = "QUBITS 3\nINPUT 0 +\nINPUT 1 0\nINPUT 2 0\nCNOT 0 1\nCNOT 0 2\n";

    #[test]
    fn parses_demo_body() {
        let c = Circuit::parse(DEMO).unwrap();
        assert_eq!(c.n_data(), 3);
        assert_eq!(c.n_flags(), 0);
        assert_eq!(c.body_cnots(), vec![(0, 1), (0, 2)]);
        assert_eq!(c.inits(), &[InitBasis::Plus, InitBasis::Zero, InitBasis::Zero]);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn parses_single_qubit_identity() {
        let c = Circuit::parse("QUBITS 1\nINPUT 0 0\n").unwrap();
        assert_eq!(c.n_qubits(), 1);
        assert!(c.gates().is_empty());
        assert_eq!(c.to_text(), "QUBITS 1\nINPUT 0 0\n");
    }

    #[test]
    fn lowers_x_flag_around_window() {
        let text = format!("{DEMO}FLAG X 0 0 1\n");
        let c = Circuit::parse(&text).unwrap();
        assert_eq!(c.n_qubits(), 4);
        assert_eq!(
            c.gates(),
            &[
                cnot(0, 3, GateRole::FlagGadget),
                cnot(0, 1, GateRole::Body),
                cnot(0, 2, GateRole::Body),
                cnot(0, 3, GateRole::FlagGadget),
            ]
        );
        assert_eq!(c.body_to_gate_index(0), 1);
        assert_eq!(c.body_to_gate_index(1), 2);
    }

    #[test]
    fn lowers_z_flag_with_hadamards() {
        let text = "QUBITS 3\nINPUT 0 0\nINPUT 1 0\nINPUT 2 0\nCNOT 1 0\nCNOT 2 0\nFLAG Z 0 0 1\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(
            c.gates(),
            &[
                h(3),
                cnot(3, 0, GateRole::FlagGadget),
                cnot(1, 0, GateRole::Body),
                cnot(2, 0, GateRole::Body),
                cnot(3, 0, GateRole::FlagGadget),
                h(3),
            ]
        );
        assert_eq!(c.qubit_role(3), QubitRole::FlagZ);
    }

    #[test]
    fn same_index_flags_lower_in_flag_qubit_order() {
        let text = "QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 0 1\nFLAG X 0 0 0\nFLAG Z 1 0 0\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(
            c.gates(),
            &[
                cnot(0, 2, GateRole::FlagGadget), // flag qubit 2 opens first
                h(3),
                cnot(3, 1, GateRole::FlagGadget),
                cnot(0, 1, GateRole::Body),
                cnot(0, 2, GateRole::FlagGadget), // and closes first
                cnot(3, 1, GateRole::FlagGadget),
                h(3),
            ]
        );
    }

    #[test]
    fn round_trips_field_for_field() {
        for text in [
            DEMO.to_string(),
            format!("{DEMO}FLAG X 0 0 1\n"),
            "QUBITS 1\nINPUT 0 +\n".to_string(),
            "QUBITS 4\nINPUT 0 0\nINPUT 1 +\nINPUT 2 0\nINPUT 3 +\nCNOT 0 1\nCNOT 1 2\nCNOT 2 3\nFLAG Z 2 1 2\nFLAG X 1 1 1\n".to_string(),
        ] {
            let c = Circuit::parse(&text).unwrap();
            let again = Circuit::parse(&c.to_text()).unwrap();
            assert_eq!(c, again);
        }
    }

    #[test]
    fn serialization_reaches_fixpoint() {
        let noisy = "# adder demo\nQUBITS 3\n  INPUT 2 0 # trailing\nINPUT 0 +\nINPUT 1 0\n\nCNOT 0 1\nCNOT 0 2\nFLAG X 0 0 1\n";
        let once = Circuit::parse(noisy).unwrap().to_text();
        let twice = Circuit::parse(&once).unwrap().to_text();
        assert_eq!(once, twice);
    }

    #[test]
    fn strip_flags_recovers_body() {
        let text = format!("{DEMO}FLAG X 0 0 1\n");
        let flagged = Circuit::parse(&text).unwrap();
        let flagless = Circuit::parse(DEMO).unwrap();
        assert_eq!(flagged.strip_flags(), flagless);
    }

    #[test]
    fn rejects_malformed_input() {
        let cases: Vec<(&str, &str)> = vec![
            ("CNOT 0 1\n", "QUBITS must come first"),
            ("QUBITS 2\nQUBITS 2\n", "duplicate QUBITS"),
            ("QUBITS 1\nINPUT 0 0\nINPUT 0 +\n", "duplicate INPUT"),
            ("QUBITS 2\nINPUT 0 0\n", "missing INPUT for qubit 1"),
            ("QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 1 1\n", "control equals target"),
            ("QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 0 2\n", "out of range"),
            ("QUBITS 1\nINPUT 0 2\n", "expected 0 or +"),
            ("QUBITS 1\nINPUT 0 0\nWAT 1\n", "unknown statement"),
            ("QUBITS x\n", "non-negative integer"),
            (
                "QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 0 1\nFLAG X 0 0 1\n",
                "not a valid body-gate range",
            ),
            (
                "QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 0 1\nFLAG X 0 0 0\nFLAG Z 0 0 0\n",
                "already has a flag",
            ),
        ];
        for (text, needle) in cases {
            let err = Circuit::parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "error `{err}` should mention `{needle}`");
        }
    }

    #[test]
    fn input_labels_round_trip() {
        let bases = vec![InitBasis::Zero, InitBasis::Plus, InitBasis::Zero];
        assert_eq!(input_label(&bases), "0+0");
        assert_eq!(parse_input_label("0+0").unwrap(), bases);
        assert!(parse_input_label("01").is_err());
    }

    #[test]
    fn error_reports_line_number() {
        let err = Circuit::parse("QUBITS 2\nINPUT 0 0\nINPUT 1 0\nCNOT 2 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Semantic { line: 4, .. }), "got {err}");
    }

    #[test]
    fn validate_reports_uniqueness_violation() {
        let flags = vec![
            FlagAnnotation { flag_type: FlagType::X, data_qubit: 0, window_start: 0, window_end: 1, flag_qubit: 3 },
            FlagAnnotation { flag_type: FlagType::Z, data_qubit: 0, window_start: 0, window_end: 0, flag_qubit: 4 },
        ];
        let c = Circuit::from_parts(
            vec![InitBasis::Plus, InitBasis::Zero, InitBasis::Zero],
            vec![(0, 1), (0, 2)],
            flags,
        );
        assert!(c.validate().contains(&Violation::UniquenessViolated { qubit: 0 }));
    }

    #[test]
    fn validate_reports_self_loop_and_bad_window() {
        let c = Circuit::from_parts(
            vec![InitBasis::Zero, InitBasis::Zero],
            vec![(0, 0)],
            vec![FlagAnnotation { flag_type: FlagType::X, data_qubit: 0, window_start: 3, window_end: 2, flag_qubit: 2 }],
        );
        let violations = c.validate();
        assert!(violations.contains(&Violation::SelfLoop { gate: 0 }));
        assert!(violations.contains(&Violation::WindowInvalid { flag_qubit: 2 }));
    }

    #[test]
    fn validate_reports_hand_built_gadget_drift() {
        let mut c = Circuit::from_parts(
            vec![InitBasis::Zero, InitBasis::Zero],
            vec![(0, 1)],
            vec![FlagAnnotation { flag_type: FlagType::X, data_qubit: 0, window_start: 0, window_end: 0, flag_qubit: 2 }],
        );
        c.gates[0] = cnot(1, 2, GateRole::FlagGadget);
        assert!(c.validate().contains(&Violation::GadgetMismatch));
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (2usize..7)
            .prop_flat_map(|n_data| {
                let inits = proptest::collection::vec(
                    prop_oneof![Just(InitBasis::Zero), Just(InitBasis::Plus)],
                    n_data,
                );
                // Encode target as an offset from the control to avoid self-loops.
                let body = proptest::collection::vec(
                    (0..n_data, 1..n_data).prop_map(move |(c, off)| (c, (c + off) % n_data)),
                    0..10,
                );
                (Just(n_data), inits, body)
            })
            .prop_flat_map(|(n_data, inits, body)| {
                let n_body = body.len();
                let flags = if n_body == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    proptest::collection::vec(
                        (
                            prop_oneof![Just(FlagType::X), Just(FlagType::Z)],
                            0..n_data,
                            0..n_body,
                            0..n_body,
                        ),
                        0..=n_data.min(3),
                    )
                    .prop_map(|specs| {
                        let mut used = std::collections::HashSet::new();
                        specs
                            .into_iter()
                            .filter(|&(_, q, _, _)| used.insert(q))
                            .map(|(t, q, a, b)| (t, q, a.min(b), a.max(b)))
                            .collect::<Vec<_>>()
                    })
                    .boxed()
                };
                (Just(inits), Just(body), flags)
            })
            .prop_map(|(inits, body, flags)| {
                Circuit::new(inits, body).unwrap().with_flags(&flags).unwrap()
            })
    }

    proptest! {
        #[test]
        fn prop_round_trip(c in arb_circuit()) {
            let parsed = Circuit::parse(&c.to_text()).unwrap();
            prop_assert_eq!(parsed, c);
        }

        #[test]
        fn prop_lowered_gadget_gate_counts(c in arb_circuit()) {
            let gadget_gates = c.gates().iter().filter(|g| g.role == GateRole::FlagGadget).count();
            let expected: usize = c
                .flags()
                .iter()
                .map(|f| match f.flag_type { FlagType::X => 2, FlagType::Z => 4 })
                .sum();
            prop_assert_eq!(gadget_gates, expected);
            prop_assert!(c.validate().is_empty());
        }
    }
}
