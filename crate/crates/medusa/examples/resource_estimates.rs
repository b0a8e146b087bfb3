//! Surface-code resource estimates: code distance and physical qubit totals
//! needed to realize flags at a target logical error rate.
//!
//! The empirical fit p_f(p, d) = 0.08 * (p / 0.0053)^(0.58 d - 0.27) falls
//! with distance only below the pseudo-threshold p = 0.0053; the required
//! distance is the smallest odd d >= 3 meeting the target m * p.
//!
//! Run with: `cargo run --example resource_estimates`

use medusa::flagger::FlagBudget;
use medusa::resources::{
    estimate_total, flag_error_rate, required_distance, sweep_adder_family, sweep_csv_header,
};
use medusa::flagger::flag_circuit;
use medusa::{gen_adder_like, AdderSpec};

fn main() {
    let p = 1e-3;
    println!("flag logical error rate at p_ncs = {p}:");
    for d in [3u32, 5, 7, 9] {
        println!("  d = {d}: p_f = {:.3e}", flag_error_rate(p, d));
    }

    println!("\nrequired distances at p_ncs = {p}:");
    for m in [1.0, 0.1, 0.01] {
        let d = required_distance(p, m * p).unwrap();
        println!(
            "  m = {m:<5} -> target p_f <= {:.1e} -> d = {d} ({} physical qubits per flag)",
            m * p,
            medusa::qubits_per_flag(d)
        );
    }
    println!(
        "  above the pseudo-threshold: {:?}",
        required_distance(6e-3, 6e-3).unwrap_err().to_string()
    );

    println!("\nflagged adder-like circuits, budget log:5, m = 1:");
    for n in [4usize, 6, 8] {
        let flagged = flag_circuit(&gen_adder_like(AdderSpec { n_bits: n }), FlagBudget::Logarithmic(5.0));
        let est = estimate_total(&flagged, p, 1.0).unwrap();
        println!(
            "  N = {n}: {} data + {} flags at d = {} -> {} physical qubits total",
            flagged.n_data(),
            flagged.n_flags(),
            est.distance,
            est.total_physical_qubits
        );
    }

    println!("\nsweep table (CSV):");
    println!("{}", sweep_csv_header());
    for row in sweep_adder_family(&[4, 6, 8], &[1e-3], &[0.1, 1.0], FlagBudget::Logarithmic(5.0)) {
        println!("{}", row.to_csv_row());
    }
}
