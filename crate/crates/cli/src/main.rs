mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;
use qalpha_core::Error;

use args::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Gen(a) => run::gen(a),
        Command::Norm(a) => run::norm(a),
        Command::Decompose(a) => run::decompose(a),
        Command::Kernel(a) => run::kernel(a),
        Command::Verify(c) => run::verify(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_violations_exit_1_everything_else_2() {
        assert_eq!(exit_code(&Error::Invariant("x".into())), 1);
        assert_eq!(exit_code(&Error::config("x")), 2);
        assert_eq!(exit_code(&Error::DiagonalPair), 2);
        assert_eq!(exit_code(&Error::Unsupported("x".into())), 2);
    }
}
