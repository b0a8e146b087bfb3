//! Command-line front end for the medusa pipeline.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible or
//! non-converged result (with a JSON diagnostic on stdout). Every command is
//! deterministic given `--seed`; when `--seed` is absent the `MEDUSA_SEED`
//! environment variable is consulted, then 0.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use medusa::circuit::Circuit;
use medusa::flagger::{flag_circuit, FlagBudget};
use medusa::frames::{FaultEvent, TwoQubitPauli};
use medusa::montecarlo::{estimate, inject_error_experiment, NoiseModel, RunReport, SimConfig};
use medusa::resources::{
    estimate_from_counts, flag_error_rate, sweep_adder_family, sweep_csv_header, ResourceError,
};
use medusa::tuner::{target_from_smaller, tune, TuneObjective, TuneRequest};
use medusa::{gen_adder_like, AdderSpec};

#[derive(Parser)]
#[command(
    name = "medusa",
    version,
    about = "Flag-qubit insertion, failure-rate estimation, flag tuning, and \
             surface-code resource estimates for CNOT-only Clifford circuits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an adder-like benchmark circuit (format v1 text).
    Gen {
        /// Family size parameter N (data qubits = 2N + 1).
        #[arg(long)]
        size: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Insert ranked error-detecting flags into a flagless circuit.
    Flag {
        /// Input circuit file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Flag budget: "log:C" (floor(C log2 n_data)), "linear", or "fixed:K".
        #[arg(long, default_value = "log:5")]
        budget: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo failure-rate estimate under depolarizing CNOT noise.
    #[command(group(ArgGroup::new("fmt").args(["json", "csv"])))]
    Simulate {
        /// Flagless reference circuit.
        #[arg(long)]
        flagless: PathBuf,
        /// Flagged circuit to simulate; defaults to the flagless circuit
        /// itself (flagless failure rate).
        #[arg(long)]
        flagged: Option<PathBuf>,
        /// Base two-qubit depolarizing strength on body CNOTs.
        #[arg(long)]
        p: f64,
        /// Flag-gadget noise multiplier (gadget CNOTs run at m * p).
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Shots per input state.
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        /// Input states: exhaustive when 2^n fits, else this many random ones.
        #[arg(long, default_value_t = 100)]
        inputs: usize,
        /// RNG seed (fallback: MEDUSA_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the JSON report (default).
        #[arg(long)]
        json: bool,
        /// Emit the CSV projection instead of JSON.
        #[arg(long)]
        csv: bool,
        /// Worker threads; the report is identical for any value.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Check only this many randomly chosen reference stabilizers per
        /// input (default: all).
        #[arg(long)]
        subsample: Option<usize>,
    },
    /// Inject one fixed two-qubit Pauli fault with a given probability.
    #[command(group(ArgGroup::new("fmt").args(["json", "csv"])))]
    Inject {
        /// Input circuit file (may be flagged).
        #[arg(long = "in")]
        input: PathBuf,
        /// Body CNOT index (0-based, in body order) to fault.
        #[arg(long)]
        gate: usize,
        /// Two-qubit Pauli on (control, target), e.g. "XI", "ZZ", "YX".
        #[arg(long)]
        pauli: String,
        /// Probability of injecting the fault per shot.
        #[arg(long)]
        prob: f64,
        /// Shots per input state.
        #[arg(long, default_value_t = 100)]
        shots: u64,
        /// Input states: exhaustive when 2^n fits, else this many random ones.
        #[arg(long, default_value_t = 100)]
        inputs: usize,
        /// RNG seed (fallback: MEDUSA_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the JSON report (default).
        #[arg(long)]
        json: bool,
        /// Emit the CSV projection instead of JSON.
        #[arg(long)]
        csv: bool,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Search for the flag count f and multiplier m hitting a target
    /// failure rate. Exit code 2 when the search does not converge.
    #[command(group(
        ArgGroup::new("goal").required(true).args(["target", "target_from_smaller"])
    ))]
    Tune {
        /// Input flagless circuit file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Base two-qubit depolarizing strength on body CNOTs.
        #[arg(long)]
        p: f64,
        /// Target failure rate in [0, 1].
        #[arg(long)]
        target: Option<f64>,
        /// Derive the target from the next-smaller adder-like circuit
        /// (requires an adder-like input: n_data = 2N + 1).
        #[arg(long)]
        target_from_smaller: bool,
        /// Convergence tolerance on |rate - target|.
        #[arg(long, default_value_t = 5e-4)]
        eps: f64,
        /// Largest flag count to try.
        #[arg(long, default_value_t = 5)]
        fmax: usize,
        /// Bisection resolution M (depth = ceil(log2 M)).
        #[arg(long = "m-res", default_value_t = 1024)]
        m_res: usize,
        /// Rate to tune: "psfr" (post-selected, default) or "fr" (raw).
        #[arg(long, default_value = "psfr")]
        objective: String,
        /// Baseline shots per input (doubled up to 16x when estimates are
        /// too noisy to compare against the target).
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        /// Input states: exhaustive when 2^n fits, else this many random ones.
        #[arg(long, default_value_t = 100)]
        inputs: usize,
        /// RNG seed (fallback: MEDUSA_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads per evaluation.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Surface-code resource estimate from bare counts. Exit code 2 when no
    /// distance reaches the implied flag error target m * p.
    Resources {
        /// Base two-qubit depolarizing strength on body CNOTs.
        #[arg(long)]
        p: f64,
        /// Flag-gadget noise multiplier; the flag error target is m * p.
        #[arg(long)]
        m: f64,
        /// Number of flag qubits.
        #[arg(long)]
        flags: usize,
        /// Number of data qubits.
        #[arg(long)]
        data: usize,
    },
    /// Resource sweep over the adder-like family; emits a CSV table
    /// (header always included) or JSON with --json.
    Sweep {
        /// Sizes as an inclusive range "4..12" or a comma list "4,6,8".
        #[arg(long)]
        sizes: String,
        /// Comma-separated base noise strengths, e.g. "1e-3,2e-3".
        #[arg(long = "p-grid")]
        p_grid: String,
        /// Comma-separated multipliers, e.g. "0.1,1".
        #[arg(long = "m-grid")]
        m_grid: String,
        /// Flag budget applied to every size.
        #[arg(long, default_value = "log:5")]
        budget: String,
        /// Emit JSON instead of CSV.
        #[arg(long)]
        json: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's own exit code conventions differ; ours pins usage
            // errors to 1. --help/--version are successes.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<u8, String> {
    match cmd {
        Command::Gen { size, out } => {
            if size < 1 {
                return Err("--size must be at least 1".into());
            }
            let c = gen_adder_like(AdderSpec { n_bits: size });
            write_out(out.as_deref(), &c.to_text())?;
            Ok(0)
        }
        Command::Flag { input, budget, out } => {
            let c = read_circuit(&input)?;
            if c.n_flags() > 0 {
                return Err(format!(
                    "{} already contains flags; flag a flagless circuit",
                    input.display()
                ));
            }
            let budget: FlagBudget = budget.parse().map_err(|e| format!("{e}"))?;
            let flagged = flag_circuit(&c, budget);
            write_out(out.as_deref(), &flagged.to_text())?;
            Ok(0)
        }
        Command::Simulate {
            flagless,
            flagged,
            p,
            m,
            shots,
            inputs,
            seed,
            json: _,
            csv,
            workers,
            subsample,
        } => {
            let c_flagless = read_circuit(&flagless)?;
            let c_flagged = match &flagged {
                Some(path) => read_circuit(path)?,
                None => c_flagless.clone(),
            };
            let noise = NoiseModel::new(p, m).map_err(|e| e.to_string())?;
            let cfg = SimConfig {
                shots_per_input: shots,
                max_inputs: inputs,
                seed: resolve_seed(seed)?,
                stabilizer_subsample_r: subsample,
                workers,
            };
            let report =
                estimate(&c_flagless, &c_flagged, &noise, &cfg).map_err(|e| e.to_string())?;
            print_report(&report, csv);
            Ok(0)
        }
        Command::Inject {
            input,
            gate,
            pauli,
            prob,
            shots,
            inputs,
            seed,
            json: _,
            csv,
            workers,
        } => {
            let c = read_circuit(&input)?;
            if gate >= c.body_gate_count() {
                return Err(format!(
                    "--gate {gate} out of range: circuit has {} body CNOTs",
                    c.body_gate_count()
                ));
            }
            let pauli: TwoQubitPauli = pauli.parse().map_err(|e| format!("{e}"))?;
            let fault = FaultEvent {
                location: c.body_to_gate_index(gate),
                pauli,
            };
            let cfg = SimConfig {
                shots_per_input: shots,
                max_inputs: inputs,
                seed: resolve_seed(seed)?,
                stabilizer_subsample_r: None,
                workers,
            };
            let report =
                inject_error_experiment(&c, fault, prob, &cfg).map_err(|e| e.to_string())?;
            print_report(&report, csv);
            Ok(0)
        }
        Command::Tune {
            input,
            p,
            target,
            target_from_smaller: from_smaller,
            eps,
            fmax,
            m_res,
            objective,
            shots,
            inputs,
            seed,
            workers,
        } => {
            let c = read_circuit(&input)?;
            let objective: TuneObjective = objective.parse().map_err(|e| format!("{e}"))?;
            let sim = SimConfig {
                shots_per_input: shots,
                max_inputs: inputs,
                seed: resolve_seed(seed)?,
                stabilizer_subsample_r: None,
                workers,
            };
            let fr_target = match target {
                Some(t) => t,
                None => {
                    debug_assert!(from_smaller, "clap group guarantees one goal");
                    let n_data = c.n_data();
                    if n_data < 3 || n_data % 2 == 0 {
                        return Err(format!(
                            "--target-from-smaller assumes an adder-like circuit \
                             (n_data = 2N + 1); got n_data = {n_data}"
                        ));
                    }
                    let n = (n_data - 1) / 2;
                    let t = target_from_smaller(n, p, &sim).map_err(|e| e.to_string())?;
                    eprintln!(
                        "target from size {}: fr = {} (se = {})",
                        n - 1,
                        t.fr_target,
                        t.se
                    );
                    t.fr_target
                }
            };
            let req = TuneRequest {
                fr_target,
                epsilon: eps,
                f_max: fmax,
                m_resolution: m_res,
                sim,
                p_ncs: p,
                objective,
            };
            let result = tune(&c, &req).map_err(|e| e.to_string())?;
            println!("{}", result.to_json());
            Ok(if result.converged { 0 } else { 2 })
        }
        Command::Resources { p, m, flags, data } => {
            if flags == 0 {
                // Nothing to protect: report the bare data count, plus the
                // rate a d = 3 flag would have had, as context.
                if !(p > 0.0) || !p.is_finite() {
                    return Err(format!("--p must be positive and finite, got {p}"));
                }
                let floor = flag_error_rate(p, 3);
                let note = format!(
                    "no flags to protect; total is the bare data-qubit count. \
                     A d = 3 flag at this p_ncs would reach p_f = {floor}"
                );
                let doc = serde_json::json!({
                    "flags": 0,
                    "data": data,
                    "distance": null,
                    "qubits_per_flag": null,
                    "total_physical_qubits": data,
                    "p_f_floor": floor,
                    "note": note,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
                return Ok(0);
            }
            match estimate_from_counts(data, flags, p, m) {
                Ok(est) => {
                    println!("{}", est.to_json());
                    Ok(0)
                }
                Err(ResourceError::Infeasible {
                    p_ncs,
                    p_f_target,
                    floor,
                }) => {
                    let doc = serde_json::json!({
                        "infeasible": true,
                        "p_ncs": p_ncs,
                        "p_f_target": p_f_target,
                        "floor_at_d3": floor,
                        "note": "no surface-code distance reaches the target flag error rate",
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
                    Ok(2)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Sweep {
            sizes,
            p_grid,
            m_grid,
            budget,
            json,
            out,
        } => {
            let sizes = parse_sizes(&sizes)?;
            let p_grid = parse_grid(&p_grid, "--p-grid")?;
            let m_grid = parse_grid(&m_grid, "--m-grid")?;
            let budget: FlagBudget = budget.parse().map_err(|e| format!("{e}"))?;
            let rows = sweep_adder_family(&sizes, &p_grid, &m_grid, budget);
            let text = if json {
                let doc = serde_json::json!({ "schema_version": 1, "rows": rows });
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
            } else {
                let mut t = String::from(sweep_csv_header());
                t.push('\n');
                for row in &rows {
                    t.push_str(&row.to_csv_row());
                    t.push('\n');
                }
                t
            };
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("writing {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn read_circuit(path: &Path) -> Result<Circuit, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    text.parse()
        .map_err(|e| format!("parsing {}: {e}", path.display()))
}

fn write_out(path: Option<&Path>, content: &str) -> Result<(), String> {
    match path {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Seed precedence: --seed, then MEDUSA_SEED, then 0.
fn resolve_seed(cli_seed: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = cli_seed {
        return Ok(seed);
    }
    match std::env::var("MEDUSA_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|e| format!("MEDUSA_SEED={text:?} is not a u64: {e}")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(format!("MEDUSA_SEED: {e}")),
    }
}

fn print_report(report: &RunReport, csv: bool) {
    if csv {
        println!("{}", RunReport::csv_header());
        println!("{}", report.to_csv_row());
    } else {
        println!("{}", report.to_json());
    }
}

/// "A..B" (inclusive on both ends) or "a,b,c".
fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    let bad = |t: &str| format!("--sizes {t:?}: expected \"A..B\" or \"a,b,c\"");
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad(text))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad(text))?;
        if lo < 1 || hi < lo {
            return Err(bad(text));
        }
        return Ok((lo..=hi).collect());
    }
    let sizes: Vec<usize> = text
        .split(',')
        .map(|part| part.trim().parse().map_err(|_| bad(text)))
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() || sizes.iter().any(|&n| n < 1) {
        return Err(bad(text));
    }
    Ok(sizes)
}

fn parse_grid(text: &str, flag: &str) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| format!("{flag}: {part:?} is not a number"))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(format!("{flag} must list at least one value"));
    }
    Ok(values)
}
