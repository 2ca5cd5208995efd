mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, EvalCmd};

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Train(c) => commands::train_cmd(c),
        Command::Encode(c) => commands::encode_cmd(c),
        Command::Decode(c) => commands::decode_cmd(c),
        Command::Eval(EvalCmd::Classify(c)) => commands::classify_cmd(c),
        Command::Eval(EvalCmd::Linkpred(c)) => commands::linkpred_cmd(c),
        Command::Eval(EvalCmd::DecodeSweep(c)) => commands::sweep_cmd(c),
        Command::Eval(EvalCmd::TheoremCheck(c)) => commands::theorem_cmd(c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e:#}", commands::error_code(&e));
            ExitCode::FAILURE
        }
    }
}
