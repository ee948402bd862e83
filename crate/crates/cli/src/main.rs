//! Command-line front end: forge certificates, evaluate the transform,
//! locate zeros, run the verification suite, and export plot data.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric failure (including a
//! failing verification).

use clap::{Args, Parser, Subcommand};
use lapforge_core::series::DEFAULT_HORIZON;
use lapforge_core::zeros::with_zeros;
use lapforge_core::{
    find_zeros, forge, run_all_checks, AlternatingSeries, BumpFamily, Certificate, ForgeParams,
    PrecisionPolicy, Real, SignPattern,
};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lapforge",
    version,
    about = "Sign-alternation certificates for finite Laplace transforms of oscillating bump series"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a certificate: checkpoints with alternating certified margins
    Forge(ForgeArgs),
    /// Evaluate the scaled transform H over a grid and write a CSV
    Eval(EvalArgs),
    /// Locate the zeros forced by a certificate and append them to it
    Zeros(ZerosArgs),
    /// Re-derive every finitely checkable claim from a certificate
    Verify(VerifyArgs),
    /// Export (x, g(x)) and (τ, |G(iτ)|) samples for external plotting
    ExportPlot(ExportPlotArgs),
}

#[derive(Args)]
struct ForgeArgs {
    /// Alternation margin ω
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    /// Number of alternation pairs M (checkpoints b_2 … b_{2M+1})
    #[arg(long, default_value_t = 5)]
    pairs: usize,
    /// Polynomial bump order p
    #[arg(long, default_value_t = 2)]
    smoothness: u32,
    /// Support fraction σ of each partition interval
    #[arg(long, default_value_t = 0.9)]
    sigma: f64,
    /// Mantissa bits of the precision policy
    #[arg(long, default_value_t = 256)]
    bits: usize,
    /// Guard bits of the precision policy
    #[arg(long, default_value_t = 32)]
    guard: usize,
    /// Certificate output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Certificate input path
    #[arg(long = "in")]
    input: PathBuf,
    /// CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Grid spec start:stop:count[:log]
    #[arg(long, default_value = "0:100:21")]
    grid: String,
    /// Also evaluate at every certificate checkpoint
    #[arg(long, default_value_t = false)]
    include_checkpoints: bool,
    /// Truncation tolerance passed to the evaluator (H-units)
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Updated certificate output path (zeros filled in)
    #[arg(long)]
    out: PathBuf,
    /// Relative bracket width at exit
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Optional JSON report output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized sample points (recorded in the report)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportPlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output prefix: writes <out>.g.csv and <out>.spectrum.csv
    #[arg(long)]
    out: PathBuf,
    /// Rows per file
    #[arg(long, default_value_t = 512)]
    samples: usize,
}

enum CliError {
    Usage(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numeric(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Forge(a) => cmd_forge(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Zeros(a) => cmd_zeros(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::ExportPlot(a) => cmd_export_plot(a),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn load_certificate(path: &Path) -> Result<Certificate, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    Certificate::from_json(&text)
        .map_err(|e| CliError::Numeric(format!("invalid certificate {}: {e}", path.display())))
}

fn load_series(cert: &Certificate) -> Result<AlternatingSeries, CliError> {
    cert.series()
        .map_err(|e| CliError::Numeric(format!("certificate does not rebuild a series: {e}")))
}

fn cmd_forge(a: ForgeArgs) -> Result<(), CliError> {
    if !(a.omega > 0.0 && a.omega <= 100.0) {
        return Err(CliError::Usage(format!(
            "--omega must be in (0, 100], got {}",
            a.omega
        )));
    }
    if a.pairs < 1 || a.pairs > 16 {
        return Err(CliError::Usage(format!(
            "--pairs must be in 1..=16, got {}",
            a.pairs
        )));
    }
    if a.smoothness < 1 || a.smoothness > 8 {
        return Err(CliError::Usage(format!(
            "--smoothness must be in 1..=8, got {}",
            a.smoothness
        )));
    }
    if !(a.sigma > 0.0 && a.sigma < 1.0) {
        return Err(CliError::Usage(format!(
            "--sigma must be in (0, 1), got {}",
            a.sigma
        )));
    }
    if a.bits < 53 || a.bits > 16384 {
        return Err(CliError::Usage(format!(
            "--bits must be in 53..=16384, got {}",
            a.bits
        )));
    }
    if a.guard < 16 || a.guard > 256 || a.guard >= a.bits {
        return Err(CliError::Usage(format!(
            "--guard must be in 16..=256 and below --bits, got {}",
            a.guard
        )));
    }
    let policy =
        PrecisionPolicy::new(a.bits, a.guard).map_err(|e| CliError::Usage(e.to_string()))?;
    let family =
        BumpFamily::standard(a.sigma, a.smoothness).map_err(|e| CliError::Usage(e.to_string()))?;
    let series = AlternatingSeries::geometric(family, DEFAULT_HORIZON, SignPattern::Alternating)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let params = ForgeParams {
        omega: a.omega,
        pairs: a.pairs,
        policy,
        ..ForgeParams::default()
    };
    let outcome = forge(&series, &params).map_err(|e| CliError::Numeric(e.to_string()))?;
    write_file(&a.out, &outcome.certificate.to_json())?;
    println!(
        "forged {} checkpoints, b spans [{:e}, {:e}]",
        outcome.certificate.b.len(),
        outcome.certificate.b[0],
        outcome.certificate.b[outcome.certificate.b.len() - 1]
    );
    print!(
        "{}",
        lapforge_core::forge::render_erosion_report(&outcome.certificate)
    );
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "--grid must be start:stop:count[:log], got {spec:?}"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid start in {spec:?}")))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid stop in {spec:?}")))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid count in {spec:?}")))?;
    let log = match parts.get(3) {
        None => false,
        Some(&"log") => true,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "bad grid mode {other:?} in {spec:?}"
            )))
        }
    };
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(stop >= start) || (log && start <= 0.0) {
        return Err(CliError::Usage(format!("bad grid range in {spec:?}")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let k = if log {
            (start.ln() + t * (stop.ln() - start.ln())).exp()
        } else {
            start + t * (stop - start)
        };
        out.push(k);
    }
    Ok(out)
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let cert = load_certificate(&a.input)?;
    let series = load_series(&cert)?;
    let policy = cert.policy();
    let mut grid = parse_grid(&a.grid)?;
    if a.include_checkpoints {
        grid.extend(cert.b.iter().copied());
    }
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup();
    let mut csv = String::from("k,sign_h,log_abs_h,tail_bound\n");
    for &k in &grid {
        if k < 0.0 {
            return Err(CliError::Usage(format!(
                "eval grid must be nonnegative, got {k}"
            )));
        }
        let tv = series
            .eval_h(&Real::from_f64(k), a.tol, &policy)
            .map_err(|e| CliError::Numeric(format!("eval at k={k}: {e}")))?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            k,
            tv.value.sign(),
            tv.value.logmag_f64(),
            tv.tail_bound
        ));
    }
    write_file(&a.out, &csv)?;
    println!("wrote {} rows to {}", grid.len(), a.out.display());
    Ok(())
}

fn cmd_zeros(a: ZerosArgs) -> Result<(), CliError> {
    if !(a.tol > 0.0 && a.tol < 0.1) {
        return Err(CliError::Usage(format!(
            "--tol must be in (0, 0.1), got {}",
            a.tol
        )));
    }
    let cert = load_certificate(&a.input)?;
    let series = load_series(&cert)?;
    let policy = cert.policy();
    let zeros =
        find_zeros(&cert, &series, a.tol, &policy).map_err(|e| CliError::Numeric(e.to_string()))?;
    println!("located {} zeros:", zeros.len());
    for z in &zeros {
        println!(
            "  k = {:e}  (rel width {:e}, {} iterations)",
            z.k, z.rel_width, z.iterations
        );
    }
    let updated = with_zeros(&cert, zeros);
    write_file(&a.out, &updated.to_json())?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let cert = load_certificate(&a.input)?;
    let series = load_series(&cert)?;
    let policy = cert.policy();
    let report = run_all_checks(&cert, &series, &policy, a.seed)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    print!("{}", report.render_text());
    if let Some(out) = &a.out {
        write_file(out, &report.to_json())?;
    }
    if report.passing {
        Ok(())
    } else {
        Err(CliError::Numeric("verification failed".into()))
    }
}

fn cmd_export_plot(a: ExportPlotArgs) -> Result<(), CliError> {
    if a.samples == 0 || a.samples > 1_000_000 {
        return Err(CliError::Usage(format!(
            "--samples must be in 1..=1000000, got {}",
            a.samples
        )));
    }
    let cert = load_certificate(&a.input)?;
    let series = load_series(&cert)?;

    let mut g_csv = String::from("x,g\n");
    for i in 0..a.samples {
        let x = (i as f64 + 0.5) / a.samples as f64;
        g_csv.push_str(&format!("{},{}\n", x, series.eval_g(x)));
    }
    let g_path = a.out.with_extension("g.csv");
    write_file(&g_path, &g_csv)?;

    let mut s_csv = String::from("tau,abs_g\n");
    for i in 0..a.samples {
        let t = if a.samples == 1 {
            0.0
        } else {
            i as f64 / (a.samples - 1) as f64
        };
        let tau = (0.1f64.ln() + t * (1000f64.ln() - 0.1f64.ln())).exp();
        let g = series
            .eval_g_complex(Complex64::new(0.0, tau), 1e-12)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        s_csv.push_str(&format!("{},{}\n", tau, g.norm()));
    }
    let s_path = a.out.with_extension("spectrum.csv");
    write_file(&s_path, &s_csv)?;
    println!(
        "wrote {} samples each to {} and {}",
        a.samples,
        g_path.display(),
        s_path.display()
    );
    Ok(())
}
