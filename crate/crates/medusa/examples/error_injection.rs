//! The textbook injection experiment: one fixed fault, injected with
//! probability 0.1, 100 shots per input over all 8 inputs of the flagged
//! fan-out circuit.
//!
//! Two of the eight inputs mask the fault (the data state is unchanged), so
//! the expected failure rate is 0.1 * 6/8 = 0.075 while every injected shot
//! raises the flag — the post-selected failure rate is exactly 0.
//!
//! Run with: `cargo run --example error_injection`

use medusa::circuit::{Circuit, FlagType, InitBasis};
use medusa::frames::FaultEvent;
use medusa::montecarlo::{inject_error_experiment, SimConfig};

fn main() {
    let flagless = Circuit::new(vec![InitBasis::Zero; 3], vec![(0, 2), (0, 1)]).unwrap();
    let flagged = flagless.with_flags(&[(FlagType::X, 0, 0, 1)]).unwrap();

    let fault = FaultEvent {
        location: flagged.body_to_gate_index(0),
        pauli: "XI".parse().unwrap(),
    };
    let cfg = SimConfig {
        shots_per_input: 100,
        max_inputs: 100, // 2^3 = 8 inputs: enumerated exhaustively
        seed: 2026,
        stabilizer_subsample_r: None,
        workers: 1,
    };

    let report = inject_error_experiment(&flagged, fault, 0.1, &cfg).unwrap();

    println!("injected XI at body gate 0 with probability 0.1");
    println!(
        "{} inputs x {} shots = {} total shots\n",
        report.per_input.len(),
        cfg.shots_per_input,
        report.shots
    );
    println!("confusion matrix (flag raised vs. failure occurred):");
    println!("  true  positives (caught failures):   {:>4}", report.tally.true_pos);
    println!("  false positives (harmless triggers): {:>4}", report.tally.false_pos);
    println!("  false negatives (missed failures):   {:>4}", report.tally.false_neg);
    println!("  true  negatives (clean accepts):     {:>4}", report.tally.true_neg);
    println!();
    println!("failure rate           fr   = {:.4}  (expect ~0.075)", report.fr);
    println!("post-selected rate     psfr = {:.4}  (expect exactly 0)", report.psfr);
    println!("acceptance rate             = {:.4}", report.acceptance_rate);

    println!("\nper-input failures (masked inputs +0+ and +++ never fail):");
    for entry in &report.per_input {
        println!(
            "  input {}: {:>3} failures / {} shots",
            entry.input,
            entry.tally.failures(),
            entry.tally.total()
        );
    }
}
