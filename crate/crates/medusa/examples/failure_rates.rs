//! Failure rates of adder-like circuits under depolarizing CNOT noise:
//! flagless, flagged with perfect flags (m = 0), and flagged with flags as
//! noisy as the body (m = 1).
//!
//! Post-selection on perfect flags always helps. Noisy flags are a
//! trade-off: their gadget CNOTs add fault locations, and at low base noise
//! the added locations can cost more than detection wins back.
//!
//! Run with: `cargo run --example failure_rates`

use medusa::flagger::{flag_circuit, FlagBudget};
use medusa::montecarlo::{estimate, NoiseModel, SimConfig};
use medusa::{gen_adder_like, AdderSpec};

fn main() {
    let p = 3e-3;
    let cfg = SimConfig {
        shots_per_input: 2_000,
        max_inputs: 64,
        seed: 7,
        stabilizer_subsample_r: None,
        workers: 4,
    };

    println!("p_ncs = {p}, budget log:5, {} shots/input\n", cfg.shots_per_input);
    println!(
        "{:>2} {:>6} {:>10} {:>14} {:>14} {:>12}",
        "N", "flags", "flagless", "psfr (m=0)", "psfr (m=1)", "accept (m=1)"
    );

    for n in [2usize, 3, 4] {
        let circuit = gen_adder_like(AdderSpec { n_bits: n });
        let flagged = flag_circuit(&circuit, FlagBudget::Logarithmic(5.0));

        let flagless = estimate(&circuit, &circuit, &NoiseModel::new(p, 0.0).unwrap(), &cfg)
            .unwrap();
        let perfect = estimate(&circuit, &flagged, &NoiseModel::new(p, 0.0).unwrap(), &cfg)
            .unwrap();
        let noisy = estimate(&circuit, &flagged, &NoiseModel::new(p, 1.0).unwrap(), &cfg)
            .unwrap();

        println!(
            "{:>2} {:>6} {:>10.5} {:>14.5} {:>14.5} {:>12.4}",
            n,
            flagged.n_flags(),
            flagless.fr,
            perfect.psfr,
            noisy.psfr,
            noisy.acceptance_rate,
        );
    }

    println!("\nColumns: flagless raw failure rate; post-selected failure rate");
    println!("with perfect flags; with equally-noisy flags; acceptance at m = 1.");
}
