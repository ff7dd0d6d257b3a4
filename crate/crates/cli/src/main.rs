use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cqt_cli::{
    cmd_eval, cmd_fig1, cmd_fig2, cmd_optimize, cmd_table1, CliError, EvalArgs, Fig2Grid,
    OptimizeArgs,
};

/// Witness, fidelity and controller-power calculator for controlled
/// quantum teleportation.
#[derive(Debug, Parser)]
#[command(name = "cqt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Summary table for the maximal-slice and W_n states (CSV).
    Table1,
    /// Power lower bound of W1, W2, W3 against the witness parameter (CSV).
    Fig1 {
        #[arg(long, default_value_t = 0.001)]
        a_min: f64,
        #[arg(long, default_value_t = 0.18)]
        a_max: f64,
        #[arg(long, default_value_t = 180)]
        steps: usize,
    },
    /// Power lower bound of the amplitude- and phase-damped W state (CSV).
    Fig2 {
        #[arg(long, default_value_t = 0.0005)]
        a_min: f64,
        #[arg(long, default_value_t = 0.035)]
        a_max: f64,
        #[arg(long, default_value_t = 70)]
        a_steps: usize,
        #[arg(long, default_value_t = 0.5)]
        p_min: f64,
        #[arg(long, default_value_t = 0.9)]
        p_max: f64,
        #[arg(long, default_value_t = 41)]
        p_steps: usize,
    },
    /// Full report for one state, witness and controller outcome (JSON).
    Eval {
        /// e.g. ghz:lambda4=0.7, wn:n=2, w, iso:p=0.6, bell:phi+
        #[arg(long)]
        state: String,
        /// e.g. phi+:xy:a=0.01
        #[arg(long)]
        witness: String,
        /// e.g. ad:p=0.8 or pd:p=0.7, applied to the receiver's qubit
        #[arg(long)]
        channel: Option<String>,
        /// t,y1,y2,y3 or one of z, x, ghz-printed, ad-printed, pd-printed
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = 0)]
        outcome: usize,
        #[arg(long, env = "CQT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Search for the controller direction maximizing the conditioned fidelity (JSON).
    Optimize {
        #[arg(long)]
        state: String,
        #[arg(long)]
        channel: Option<String>,
        #[arg(long, default_value_t = 0)]
        outcome: usize,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        #[arg(long, env = "CQT_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Table1 => cmd_table1(),
        Command::Fig1 {
            a_min,
            a_max,
            steps,
        } => cmd_fig1(a_min, a_max, steps),
        Command::Fig2 {
            a_min,
            a_max,
            a_steps,
            p_min,
            p_max,
            p_steps,
        } => cmd_fig2(&Fig2Grid {
            a_min,
            a_max,
            a_steps,
            p_min,
            p_max,
            p_steps,
        }),
        Command::Eval {
            state,
            witness,
            channel,
            direction,
            outcome,
            seed,
        } => cmd_eval(&EvalArgs {
            state,
            witness,
            channel,
            direction,
            outcome,
            seed,
        }),
        Command::Optimize {
            state,
            channel,
            outcome,
            grid,
            seed,
        } => cmd_optimize(&OptimizeArgs {
            state,
            channel,
            outcome,
            grid,
            seed,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Physics(_) => eprintln!("{}", e.to_json()),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
