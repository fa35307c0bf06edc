//! `adrelight`: relight a banner into a frame, render synthetic fixtures,
//! inspect probe features and score results.
//!
//! Exit codes: 0 success, 2 invalid arguments or config, 3 I/O,
//! 4 backbone failure, 5 geometry.

mod error;
mod eval;
mod output;
mod probe;
mod relight;
mod settings;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "adrelight", version, about = "Training-free banner relighting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relight a banner and composite it into the frame
    Relight(relight::RelightArgs),
    /// Render a synthetic lamp-lit scene with its mask, quad and lamp maps
    Synth(synth::SynthArgs),
    /// Compute the differential illumination feature of a region
    Probe(probe::ProbeArgs),
    /// Score relit frames (or run the pipeline) over a case list
    Eval(eval::EvalArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Relight(a) => relight::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Probe(a) => probe::run(a),
        Command::Eval(a) => eval::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adrelight: {e}");
            e.exit_code()
        }
    }
}
