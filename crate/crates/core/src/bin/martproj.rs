use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use martproj::config::{parse_config, Command, Overrides};
use martproj::runner::run_experiment;

/// Path-transformation experiments: projection classification and
/// decoherence/information certification on simulated weight trajectories.
///
/// Every subcommand reads a JSON config, writes `report.json` plus any CSV
/// files into the output directory, and exits 0 iff all certifications
/// requested by the run passed. Config and I/O errors exit 2 with a JSON
/// error object on stderr. Reports are byte-identical across reruns with the
/// same config and seed.
#[derive(Parser)]
#[command(name = "martproj", version, about, verbatim_doc_comment)]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<u64>,
    /// Overrides the config's confidence multiplier (classify only).
    #[arg(long)]
    z: Option<f64>,
    /// Output directory for report.json and CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum CommandArg {
    /// Sine-plus-noise demo path and its piecewise transform.
    ///
    /// CSV outputs: demo_input.csv, demo_output.csv (columns: time,value).
    #[command(name = "demo-sine", verbatim_doc_comment)]
    DemoSine(RunArgs),
    /// Classify a multiplicative projection at a prefix.
    #[command(name = "classify")]
    Classify(RunArgs),
    /// Certify the one-step decoherence inequality (law mean <= 1).
    ///
    /// CSV output: offdiag_margins.csv
    /// (columns: i,j,estimate,std_error,reference,margin).
    #[command(name = "decohere", verbatim_doc_comment)]
    Decohere(RunArgs),
    /// Certify the one-step information-gain inequality (law mean >= 1).
    ///
    /// CSV output: information_margin.csv
    /// (columns: estimate,std_error,reference,margin).
    #[command(name = "inform", verbatim_doc_comment)]
    Inform(RunArgs),
    /// Certify both one-step inequalities for a unit-mean law.
    ///
    /// CSV outputs: offdiag_margins.csv, information_margin.csv.
    #[command(name = "martingale", verbatim_doc_comment)]
    Martingale(RunArgs),
    /// Simulate a weight trajectory and certify every step.
    ///
    /// CSV outputs: magnitudes.csv (time,mag_i_j...),
    /// information.csv (time,information), weights.csv (time,q,value).
    #[command(name = "trajectory", verbatim_doc_comment)]
    Trajectory(RunArgs),
    /// Compare the two application orders of a pair of transforms.
    #[command(name = "commute")]
    Commute(RunArgs),
    /// Kolmogorov-Smirnov check of a projection family against a process.
    #[command(name = "law-check")]
    LawCheck(RunArgs),
}

impl CommandArg {
    fn split(self) -> (Command, RunArgs) {
        match self {
            CommandArg::DemoSine(a) => (Command::DemoSine, a),
            CommandArg::Classify(a) => (Command::Classify, a),
            CommandArg::Decohere(a) => (Command::Decohere, a),
            CommandArg::Inform(a) => (Command::Inform, a),
            CommandArg::Martingale(a) => (Command::Martingale, a),
            CommandArg::Trajectory(a) => (Command::Trajectory, a),
            CommandArg::Commute(a) => (Command::Commute, a),
            CommandArg::LawCheck(a) => (Command::LawCheck, a),
        }
    }
}

fn run(command: Command, args: &RunArgs) -> Result<bool, martproj::Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = parse_config(command, &text)?;
    config.apply_overrides(&Overrides {
        seed: args.seed,
        samples: args.samples,
        z: args.z,
    });
    let outcome = run_experiment(&config)?;
    std::fs::create_dir_all(&args.out)?;
    for (name, contents) in &outcome.files {
        std::fs::write(args.out.join(name), contents)?;
    }
    std::fs::write(args.out.join("report.json"), outcome.report.to_json_string())?;
    println!(
        "{}: {} in {} ms (report.json{}{} -> {})",
        outcome.report.command,
        if outcome.report.passed { "pass" } else { "FAIL" },
        outcome.report.wall_clock_ms,
        if outcome.files.is_empty() { "" } else { ", " },
        outcome
            .files
            .iter()
            .map(|(n, _)| n.as_str())
            .collect::<Vec<_>>()
            .join(", "),
        args.out.display(),
    );
    Ok(outcome.report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    match run(command, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let payload = serde_json::json!({
                "error": {
                    "command": command.name(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{payload}");
            ExitCode::from(2)
        }
    }
}
