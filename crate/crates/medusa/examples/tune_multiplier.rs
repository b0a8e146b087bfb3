//! Tune the flag noise multiplier: how noisy may the flags be before the
//! size-3 circuit stops performing like a flagless size-2 circuit?
//!
//! The target failure rate comes from simulating the next-smaller family
//! member; the tuner then bisects m over (0, 1) for growing flag counts
//! until the post-selected failure rate lands within epsilon of it.
//!
//! Run with: `cargo run --example tune_multiplier`

use medusa::montecarlo::SimConfig;
use medusa::tuner::{target_from_smaller, tune, TuneObjective, TuneRequest};
use medusa::{gen_adder_like, AdderSpec};

fn main() {
    let n = 3;
    let p = 5e-3;
    let sim = SimConfig {
        shots_per_input: 2_000,
        max_inputs: 64,
        seed: 11,
        stabilizer_subsample_r: None,
        workers: 4,
    };

    let target = target_from_smaller(n, p, &sim).unwrap();
    println!(
        "target: flagless failure rate of the size-{} circuit = {:.5} (se {:.5})\n",
        n - 1,
        target.fr_target,
        target.se
    );

    let circuit = gen_adder_like(AdderSpec { n_bits: n });
    let req = TuneRequest {
        fr_target: target.fr_target,
        epsilon: 0.004,
        f_max: 5,
        m_resolution: 64,
        sim,
        p_ncs: p,
        objective: TuneObjective::Psfr,
    };
    let result = tune(&circuit, &req).unwrap();

    println!("search trace (one line per objective evaluation):");
    for step in &result.trace {
        println!(
            "  f = {}  m = {:<10.6} psfr = {:.5} +- {:.5}  ({} shots/input)",
            step.f, step.m, step.fr, step.se, step.shots_per_input
        );
    }
    println!();
    if result.converged {
        println!(
            "converged: f = {}, m = {:.6}, psfr = {:.5} (target {:.5} +- {})",
            result.f, result.m, result.achieved_fr, req.fr_target, req.epsilon
        );
    } else {
        println!(
            "did not converge; best point: f = {}, m = {:.6}, psfr = {:.5}",
            result.f, result.m, result.achieved_fr
        );
    }
    println!("{} logical evaluations", result.evaluations);
}
