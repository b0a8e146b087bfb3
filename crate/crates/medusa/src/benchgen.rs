//! Deterministic adder-like benchmark circuits.
//!
//! The family is the CNOT skeleton of a ripple-carry adder with the Toffolis
//! dropped: what matters for benchmarking is not arithmetic correctness but
//! that every size shares the same structure, so failure rates are comparable
//! across N. Qubit layout is `(c0, a_0..a_{N-1}, b_0..b_{N-1})`, giving
//! `n_data = 2N + 1` and exactly `4N` CNOTs.

use crate::circuit::{Circuit, InitBasis};

/// Size parameter of the adder-like family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdderSpec {
    /// Logical operand width N; the circuit has `2N + 1` data qubits.
    pub n_bits: usize,
}

/// Generates the size-N family member. All inits default to `|0>`; input
/// sampling overrides them per shot.
///
/// Forward pass (i ascending): `CNOT(a_i, b_i)`, `CNOT(a_i, carry_i)`;
/// backward pass (i descending): `CNOT(a_i, carry_i)`, `CNOT(carry_i, b_i)`;
/// where `carry_0 = c0` and `carry_i = a_{i-1}` afterwards.
///
/// # Panics
/// Rejects `n_bits = 0`.
pub fn gen_adder_like(spec: AdderSpec) -> Circuit {
    let n = spec.n_bits;
    assert!(n >= 1, "adder-like family starts at N = 1");
    let a = |i: usize| 1 + i;
    let b = |i: usize| 1 + n + i;
    let carry = |i: usize| if i == 0 { 0 } else { a(i - 1) };

    let mut body = Vec::with_capacity(4 * n);
    for i in 0..n {
        body.push((a(i), b(i)));
        body.push((a(i), carry(i)));
    }
    for i in (0..n).rev() {
        body.push((a(i), carry(i)));
        body.push((carry(i), b(i)));
    }
    Circuit::new(vec![InitBasis::Zero; 2 * n + 1], body)
        .expect("generator output is valid by construction")
}
