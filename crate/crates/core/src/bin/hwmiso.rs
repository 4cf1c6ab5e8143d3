use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hwmiso::experiment::{run_with_threads, CliArgs};
use hwmiso::sweep::write_csv;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = CliArgs::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: &CliArgs) -> hwmiso::Result<()> {
    let cfg = args.resolve()?;
    let table = run_with_threads(&cfg, args.threads)?;
    match &cfg.out {
        Some(path) => write_csv(&table, path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_csv_to(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}
