use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use usadi::cli::{benchmark, load_config, run, RunError, RunOptions, EXIT_CONFIG};

/// Spectral Poisson solver on [-1,1]^2.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Problem file.
    #[arg(long)]
    config: PathBuf,
    /// Solve with the dense Kronecker reference (n <= 64).
    #[arg(long)]
    oracle: bool,
    /// Time fixed-size solves listed in the [benchmark] table.
    #[arg(long)]
    benchmark: bool,
    /// Verify the residual and boundary data and print the norms.
    #[arg(long)]
    check: bool,
    /// Only errors on stderr, nothing on stdout.
    #[arg(long)]
    quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let level = if args.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("cannot start {t} threads: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), RunError> {
    let cfg = load_config(&args.config)?;
    let opts = RunOptions { oracle: args.oracle, check: args.check, quiet: args.quiet };
    if args.benchmark {
        benchmark(&cfg, opts)?;
        return Ok(());
    }
    let report = run(&cfg, opts)?;
    if !args.quiet {
        let d = &report.driver;
        println!(
            "resolved at n = {} after {} level(s), {:.3} s",
            d.final_n,
            d.levels.len(),
            report.wall_time
        );
        if let Some(e) = report.max_grid_error {
            println!("max grid error: {e:e}");
        }
        println!("coefficients: {}", cfg.outputs.coefficients.display());
    }
    if let Some(c) = &report.check {
        if !args.quiet {
            println!(
                "check: relative residual {:e} (bound {:e}), boundary error {:e} (bound {:e}): {}",
                c.relative_residual,
                c.residual_bound,
                c.boundary_error,
                c.boundary_bound,
                if c.passed { "ok" } else { "FAILED" }
            );
        }
        if !c.passed {
            return Err(RunError::Solver(usadi::error::Error::InvalidArgument(
                "solution failed the residual/boundary check".into(),
            )));
        }
    }
    Ok(())
}
