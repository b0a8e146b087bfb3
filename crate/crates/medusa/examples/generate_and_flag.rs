//! Generate an adder-like benchmark circuit and insert error-detecting
//! flags under a logarithmic budget.
//!
//! Run with: `cargo run --example generate_and_flag`

use medusa::flagger::{enumerate_candidates, flag_circuit, rank_candidates, FlagBudget};
use medusa::{gen_adder_like, AdderSpec};

fn main() {
    let circuit = gen_adder_like(AdderSpec { n_bits: 3 });
    println!("=== adder-like circuit, N = 3 (format v1) ===");
    print!("{}", circuit.to_text());

    let ranked = rank_candidates(enumerate_candidates(&circuit));
    println!("\n=== top flag candidates (weight = CNOTs guarded) ===");
    for cand in ranked.iter().take(6) {
        println!(
            "{:?}-flag on data qubit {} over body window [{}, {}], weight {}",
            cand.flag_type, cand.data_qubit, cand.window_start, cand.window_end, cand.weight
        );
    }

    let flagged = flag_circuit(&circuit, FlagBudget::Logarithmic(5.0));
    println!("\n=== flagged under budget log:5 ===");
    println!(
        "{} data qubits, {} flags, {} gates after lowering ({} body CNOTs)",
        flagged.n_data(),
        flagged.n_flags(),
        flagged.gates().len(),
        flagged.body_gate_count(),
    );
    print!("{}", flagged.to_text());
}
