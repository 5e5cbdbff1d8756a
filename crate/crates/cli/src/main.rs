//! `pmrac`: evaluate, optimize and certify 3-bit PMRAC strategies.
//!
//! Exit codes: 0 success, 1 a check failed (certify) or the two value
//! paths disagree (value), 2 invalid input, 3 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pmrac::certify::certify;
use pmrac::classical::best_classical_strategy;
use pmrac::game::{
    canonical_strategy, depolarized_state, success_direct, success_via_delta, Strategy,
};
use pmrac::seesaw::{multistart_all, multistart_fixed_state, pick_best, SeesawConfig};

#[derive(Parser)]
#[command(
    name = "pmrac",
    version,
    about = "3-bit variant prepare-measure random access code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact optimal success probability of a classical n→m code
    Classical {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
    },
    /// Success probability, Δ and ω_y of a strategy file
    Value { file: PathBuf },
    /// Seesaw multistart; writes the best strategy as JSON
    Optimize {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        starts: u64,
        #[arg(long)]
        out: PathBuf,
        /// CSV of S_Q per round for the best start
        #[arg(long)]
        history: Option<PathBuf>,
        /// Worker threads; output does not depend on this
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run every self-testing check on a strategy file
    Certify {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Print the report as JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Write the canonical optimal strategy
    Example {
        #[arg(long)]
        out: PathBuf,
    },
    /// S_Q of the canonical strategy under depolarizing noise
    Sweep {
        /// Comma-separated visibilities in [0, 1]
        #[arg(long, value_delimiter = ',', required = true)]
        etas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also reoptimize unitaries and observables for each noisy state
        #[arg(long)]
        reoptimize: bool,
        #[arg(long, default_value_t = 0, requires = "reoptimize")]
        seed: u64,
        #[arg(long, default_value_t = 5, requires = "reoptimize")]
        starts: usize,
    },
}

enum Failure {
    Check(String),
    Input(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Input(m) | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Ten significant digits, trailing zeros removed.
fn sig10(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fraction_line(p: u64, q: u64) -> String {
    if q == 1 {
        return p.to_string();
    }
    let mut rest = q;
    for f in [2, 5] {
        while rest.is_multiple_of(f) {
            rest /= f;
        }
    }
    let decimal = sig10(p as f64 / q as f64);
    // a terminating expansion that fits in ten digits is exact
    let exact = rest == 1 && decimal.len() < 12;
    format!("{p}/{q} {} {decimal}", if exact { "=" } else { "≈" })
}

fn read_strategy(path: &Path) -> Result<Strategy, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Strategy::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn classical(n: u32, m: u32) -> Outcome {
    let (_, score) = best_classical_strategy(n, m).map_err(|e| Failure::Input(e.to_string()))?;
    let (p, q) = score.reduced();
    println!("{}", fraction_line(p, q));
    Ok(())
}

fn value(file: &Path) -> Outcome {
    let s = read_strategy(file)?;
    let direct = success_direct(&s);
    let via = success_via_delta(&s);
    println!("S_Q (direct)    = {}", sig10(direct));
    println!("S_Q (via Delta) = {}", sig10(via.s_q));
    println!("Delta           = {}", sig10(via.delta));
    println!(
        "omega           = ({})",
        via.omegas
            .iter()
            .map(|w| sig10(*w))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let gap = (direct - via.s_q).abs();
    if gap > 1e-10 {
        return Err(Failure::Check(format!(
            "evaluation paths disagree by {gap:.3e}"
        )));
    }
    Ok(())
}

fn optimize(seed: u64, starts: u64, out: &Path, history: Option<&Path>, threads: usize) -> Outcome {
    let config = SeesawConfig {
        seed,
        num_starts: starts as usize,
        ..SeesawConfig::default()
    };
    let all = multistart_all(&config, threads.max(1)).map_err(|e| Failure::Input(e.to_string()))?;
    let near = all
        .iter()
        .filter(|r| (r.value - pmrac::game::optimal_success()).abs() <= 1e-6)
        .count();
    let best = pick_best(all).expect("at least one start");
    write(out, &best.strategy.to_json())?;
    if let Some(path) = history {
        let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
        w.write_record(["round", "s_q"])
            .map_err(|e| io_err(path, e))?;
        for (k, v) in best.history.iter().enumerate() {
            w.write_record([k.to_string(), v.to_string()])
                .map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))?;
    }
    println!("S_Q = {}", sig10(best.value));
    println!("best start seed {}, {} rounds", best.seed, best.rounds_used);
    println!("{near} of {starts} starts within 1e-6 of the optimum");
    Ok(())
}

fn certify_file(file: &Path, tol: f64, json: bool) -> Outcome {
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::Input(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let s = read_strategy(file)?;
    let report = certify(&s, tol);
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_table());
    }
    if report.overall {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} check(s) failed",
            report.failures().count()
        )))
    }
}

fn sweep(etas: &[f64], out: &Path, reoptimize: bool, seed: u64, starts: usize) -> Outcome {
    if let Some(bad) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Failure::Input(format!("eta {bad} outside [0, 1]")));
    }
    let canonical = canonical_strategy();
    let config = SeesawConfig {
        seed,
        num_starts: starts.max(1),
        ..SeesawConfig::default()
    };
    let mut w = csv::Writer::from_path(out).map_err(|e| io_err(out, e))?;
    let mut header = vec!["eta", "s_q_fixed_strategy"];
    if reoptimize {
        header.push("s_q_reoptimized");
    }
    w.write_record(&header).map_err(|e| io_err(out, e))?;
    for &eta in etas {
        let state = depolarized_state(eta).map_err(|e| Failure::Input(e.to_string()))?;
        let noisy = Strategy {
            state: state.clone(),
            ..canonical.clone()
        };
        let mut row = vec![eta.to_string(), success_direct(&noisy).to_string()];
        if reoptimize {
            let r = multistart_fixed_state(&config, &state, 1)
                .map_err(|e| Failure::Input(e.to_string()))?;
            row.push(r.value.to_string());
        }
        w.write_record(&row).map_err(|e| io_err(out, e))?;
    }
    w.flush().map_err(|e| io_err(out, e))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Classical { n, m } => classical(n, m),
        Command::Value { file } => value(&file),
        Command::Optimize {
            seed,
            starts,
            out,
            history,
            threads,
        } => optimize(seed, starts, &out, history.as_deref(), threads),
        Command::Certify { file, tol, json } => certify_file(&file, tol, json),
        Command::Example { out } => write(&out, &canonical_strategy().to_json()),
        Command::Sweep {
            etas,
            out,
            reoptimize,
            seed,
            starts,
        } => sweep(&etas, &out, reoptimize, seed, starts),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig10(0.75), "0.75");
        assert_eq!(sig10(0.5 + 1.0 / 6f64.sqrt()), "0.9082482905");
        assert_eq!(sig10(8.0 * 6f64.sqrt()), "19.59591794");
        assert_eq!(sig10(1.0), "1");
    }

    #[test]
    fn fractions() {
        assert_eq!(fraction_line(3, 4), "3/4 = 0.75");
        assert_eq!(fraction_line(5, 6), "5/6 ≈ 0.8333333333");
        assert_eq!(fraction_line(1, 1), "1");
    }
}
