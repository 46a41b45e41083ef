use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flsim::runner::{self, Overrides};
use flsim::scenario::load_scenario;

#[derive(Parser)]
#[command(name = "flsim", version, about = "Forward-looking sonar reverberation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected returns from the analytic model, one table per beam
    Null(Common),
    /// Ray-traced pings, one table per ping plus the mean over pings
    Sim(Common),
    /// Mean simulated return against the expected return; exits 2 on a failed check
    Compare(Common),
    /// Likelihood-ratio detection on simulated pings
    Detect(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rays: Option<usize>,
    #[arg(long)]
    pings: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    no_noise: bool,
}

fn run(cli: Cli) -> flsim::Result<u8> {
    let (name, c) = match &cli.command {
        Command::Null(c) => ("null", c),
        Command::Sim(c) => ("sim", c),
        Command::Compare(c) => ("compare", c),
        Command::Detect(c) => ("detect", c),
    };
    let overrides = Overrides {
        seed: c.seed,
        rays: c.rays,
        pings: c.pings,
        gamma: c.gamma,
        no_noise: c.no_noise,
    };
    let s = overrides.apply(&load_scenario(&c.scenario)?)?;
    let out = &c.out;
    match name {
        "null" => {
            let w = runner::run_null(&s, out)?;
            eprintln!("wrote {} tables to {}", w.tables.len(), out.display());
        }
        "sim" => {
            let w = runner::run_sim(&s, out)?;
            eprintln!("wrote {} tables to {}", w.tables.len(), out.display());
        }
        "compare" => {
            let (cmp, _) = runner::run_compare(&s, out)?;
            let verdict = if cmp.passed() { "pass" } else { "FAIL" };
            eprintln!(
                "{verdict}: {} bins checked, worst gap {:.2} dB, tolerance {} dB",
                cmp.checked_bins(),
                cmp.worst_gap_db(),
                cmp.tolerance_db
            );
            if !cmp.passed() {
                return Ok(2);
            }
        }
        _ => {
            let (results, _) = runner::run_detect(&s, out)?;
            for (p, ping) in results.iter().enumerate() {
                for r in ping {
                    let bins: Vec<_> = r.detections().map(|b| b.to_string()).collect();
                    eprintln!("ping {p} beam {}: detections at bins [{}]", r.beam_id, bins.join(", "));
                }
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    // clap's own usage status is 2, which is reserved for a failed comparison
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(runner::exit_code(&e) as u8)
        }
    }
}
