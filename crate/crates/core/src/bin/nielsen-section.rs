use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nielsen_section::charts::MapKind;
use nielsen_section::cli::{cmd_dump, cmd_verify, DumpError, DumpRequest, DumpTarget, Format, RunConfig};
use nielsen_section::smooth::{BumpProfile, TwistProfile};

/// Verify the explicit section of Mod(M_n) → Out(F_n), or dump sampled data.
#[derive(Parser, Debug)]
#[command(name = "nielsen-section", version)]
struct Args {
    /// Rank of the free group.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// json or text.
    #[arg(long, default_value = "json")]
    format: String,
    /// Emit sampled data instead of verifying: psi, jacobian, matrixpath or loop.
    #[arg(long, value_name = "TARGET")]
    dump: Option<String>,
    /// Map for --dump, e.g. F1,2, G1 or T1.
    #[arg(long)]
    map: Option<String>,
    /// Generator index whose loop is dumped.
    #[arg(long)]
    generator: Option<usize>,
    /// With --dump loop, dump the image of the loop under the map.
    #[arg(long)]
    image: bool,
    /// Tolerance for analytic vs finite-difference Jacobians.
    #[arg(long, default_value_t = 1e-5)]
    tol_fd: f64,
    /// Polyline vertices per chart piece (power of two).
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Base grid of matrix paths (power of two).
    #[arg(long, default_value_t = 256)]
    path_grid: usize,
    /// Inner product below which the quaternion lift is refined.
    #[arg(long, default_value_t = 0.5)]
    continuity: f64,
    /// Tolerance deciding whether a lifted loop closes up.
    #[arg(long, default_value_t = 1e-6)]
    identity_tol: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    plateau_end: f64,
    #[arg(long, default_value_t = 0.6)]
    support_end: f64,
    #[arg(long, default_value_t = 1.0)]
    steepness: f64,
    #[arg(long, default_value_t = 0.1)]
    rise_start: f64,
    #[arg(long, default_value_t = 0.9)]
    rise_end: f64,
    /// Leave per-check runtimes out of the report.
    #[arg(long)]
    no_timing: bool,
}

fn config(args: &Args) -> Result<RunConfig, String> {
    Ok(RunConfig {
        n: args.n,
        seed: args.seed,
        format: args.format.parse::<Format>().map_err(|e| e.to_string())?,
        loop_samples: args.samples,
        path_grid: args.path_grid,
        tol_fd: args.tol_fd,
        continuity: args.continuity,
        identity_tol: args.identity_tol,
        bump: BumpProfile { plateau_end: args.plateau_end, support_end: args.support_end, steepness: args.steepness },
        twist: TwistProfile { rise_start: args.rise_start, rise_end: args.rise_end, steepness: args.steepness },
        timing: !args.no_timing,
    })
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match config(&args) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if let Some(target) = &args.dump {
        let target = match target.parse::<DumpTarget>() {
            Ok(t) => t,
            Err(e) => return config_error(e),
        };
        let map = match args.map.as_deref().map(str::parse::<MapKind>).transpose() {
            Ok(m) => m,
            Err(e) => return config_error(e),
        };
        let req = DumpRequest { target, map, generator: args.generator, image: args.image };
        let stdout = std::io::stdout();
        let mut out = std::io::BufWriter::new(stdout.lock());
        return match cmd_dump(&req, &cfg, &mut out).and_then(|()| out.flush().map_err(DumpError::from)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(DumpError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(DumpError::Compute(e)) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
            Err(e) => config_error(e),
        };
    }
    let report = match cmd_verify(&cfg) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    match cfg.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    ExitCode::from(report.exit_code() as u8)
}
