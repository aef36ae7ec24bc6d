use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use rmls::engine::{
    error_vs_q_sweep, run_ensemble, EngineConfig, SweepResult, SweepRow, DEFAULT_KAPPA_CEILING,
};
use rmls::hamiltonian::{Embedding, EmbeddingMode, Variant};
use rmls::instance::{
    exact_solution_with_residual, generate_with_kappa, load_instance, save_instance,
    GeneratorConfig, QlspInstance,
};
use rmls::schedule::{
    build_schedule, build_schedule_with_steps, gate_cost_estimate, Schedule, DEFAULT_C_Q,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_PROPERTY: u8 = 2;
const EXIT_IO: u8 = 3;

/// Randomized eigenpath-traversal solvers for quantum linear systems.
#[derive(Parser)]
#[command(name = "rmls", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance post-selected on its condition number
    Gen(GenArgs),
    /// Run one ensemble and report its error
    Run(RunArgs),
    /// Run one ensemble per step count and write a CSV
    Sweep(SweepArgs),
    /// Verify spectral properties of the Hamiltonian families on an s-grid
    Check(CheckArgs),
    /// Solve the linear system classically
    SolveExact(SolveArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of system qubits (N = 2^n)
    #[arg(long)]
    n: u32,
    /// Maximum nonzeros per row of A
    #[arg(long)]
    d: usize,
    /// Target condition number
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 1e-3)]
    kappa_tol: f64,
    /// Nonzero amplitudes in b [default: min(d, N)]
    #[arg(long)]
    b_sparsity: Option<usize>,
    #[arg(long, default_value_t = 2_000_000)]
    max_attempts: usize,
    #[arg(long, env = "RMLS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "amplified")]
    variant: Variant,
    #[arg(long, default_value = "general")]
    mode: EmbeddingMode,
    #[arg(long, default_value_t = 50)]
    nrep: usize,
    #[arg(long, env = "RMLS_SEED", default_value_t = 0)]
    seed: u64,
    /// Refuse instances with a larger condition number
    #[arg(long, default_value_t = DEFAULT_KAPPA_CEILING)]
    kappa_ceiling: f64,
    /// Worker threads [default: all cores]; never changes results
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Number of schedule steps
    #[arg(long, conflicts_with = "epsilon", required_unless_present = "epsilon")]
    q: Option<usize>,
    /// Target precision; q = ceil(C_q L*^2 / epsilon)
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_C_Q)]
    c_q: f64,
    /// Also write the result row as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Comma-separated ascending step counts
    #[arg(long, value_delimiter = ',', required = true)]
    q_list: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a gnuplot script fitting 1/error against q
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of evenly spaced s values in [0, 1]
    #[arg(long, default_value_t = 101)]
    s_grid: usize,
    #[arg(long, default_value = "general")]
    mode: EmbeddingMode,
    /// Restrict to one variant [default: both]
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Property(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Property(_) => EXIT_PROPERTY,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<rmls::Error> for CliError {
    fn from(e: rmls::Error) -> Self {
        match e {
            rmls::Error::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn write_file(path: &Path, contents: &[u8]) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Fails early on an unwritable output path.
fn probe_writable(path: &Path) -> CliResult {
    fs::File::create(path)
        .map(drop)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn with_pool<T>(threads: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Check(args) => cmd_check(args),
        Command::SolveExact(args) => cmd_solve_exact(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Validation(m) | CliError::Property(m) | CliError::Io(m) => {
                    eprintln!("error: {m}")
                }
            }
            ExitCode::from(e.code())
        }
    }
}

fn cmd_gen(args: GenArgs) -> CliResult {
    let mut cfg = GeneratorConfig::new(args.n, args.d, args.kappa, args.seed);
    cfg.kappa_tol = args.kappa_tol;
    cfg.max_attempts = args.max_attempts;
    if let Some(b) = args.b_sparsity {
        cfg.b_sparsity = b;
    }
    let inst = generate_with_kappa(&cfg)?;
    save_instance(&inst, &args.out)?;
    println!(
        "kappa={:.16e} attempts={} path={}",
        inst.kappa(),
        inst.metadata().attempts.unwrap_or(0),
        args.out.display()
    );
    Ok(())
}

fn engine_config(args: &EngineArgs) -> CliResult<EngineConfig> {
    if args.kappa_ceiling.is_nan() || args.kappa_ceiling < 1.0 {
        return Err(CliError::Validation(format!(
            "kappa ceiling must be >= 1, got {}",
            args.kappa_ceiling
        )));
    }
    Ok(EngineConfig {
        mode: args.mode,
        kappa_ceiling: args.kappa_ceiling,
        keep_records: false,
    })
}

/// Configuration lines that, with the instance file, reproduce the output.
fn config_lines(args: &EngineArgs, inst: &QlspInstance, extra: &[String]) -> Vec<String> {
    let mut lines = vec![
        format!("rmls {}", env!("CARGO_PKG_VERSION")),
        format!("instance={}", args.instance.display()),
        format!(
            "instance_kappa={:.16e} n={} d={}",
            inst.kappa(),
            inst.n(),
            inst.d()
        ),
        format!(
            "variant={} mode={} nrep={} seed={} kappa_ceiling={:.16e}",
            args.variant, args.mode, args.nrep, args.seed, args.kappa_ceiling
        ),
    ];
    lines.extend_from_slice(extra);
    lines
}

fn schedule_line(sched: &Schedule) -> String {
    let c_q = sched
        .c_q
        .map_or_else(|| "none".to_string(), |c| format!("{c:.16e}"));
    format!(
        "q={} epsilon={:.16e} c_q={} delta={:.16e}",
        sched.q,
        sched.epsilon,
        c_q,
        sched.delta()
    )
}

fn cmd_run(args: RunArgs) -> CliResult {
    let inst = load_instance(&args.engine.instance)?;
    let cfg = engine_config(&args.engine)?;
    let variant = args.engine.variant;
    let sched = match (args.q, args.epsilon) {
        (Some(0), _) => return Err(CliError::Validation("--q must be at least 1".into())),
        (Some(q), _) => build_schedule_with_steps(inst.kappa(), variant, q)?,
        (None, Some(eps)) => build_schedule(inst.kappa(), eps, variant, args.c_q)?,
        (None, None) => unreachable!("clap requires --q or --epsilon"),
    };
    if let Some(out) = &args.out {
        probe_writable(out)?;
    }
    let config = config_lines(&args.engine, &inst, &[schedule_line(&sched)]);
    for line in &config {
        println!("# config: {line}");
    }

    let n_rep = args.engine.nrep;
    let seed = args.engine.seed;
    let start = Instant::now();
    let res = with_pool(args.engine.threads, || {
        Ok(run_ensemble(&inst, &sched, n_rep, seed, &cfg)?)
    })?;
    let wall = start.elapsed().as_secs_f64();

    println!(
        "error={:.16e} inv_error={:.16e} expected_time_T={:.16e} wall_time_s={:.3}",
        res.error,
        1.0 / res.error,
        res.total_expected_time,
        wall
    );
    println!(
        "full_space_fidelity={:.16e} max_leakage={:.3e}",
        res.full_space_fidelity, res.max_leakage
    );
    if sched.epsilon < 1.0 && res.total_expected_time >= 1.0 {
        let cost = gate_cost_estimate(res.total_expected_time, inst.d(), sched.epsilon)?;
        println!("gate_cost: {cost}");
    }

    if let Some(out) = &args.out {
        let row = SweepRow {
            q: sched.q,
            error: res.error,
            inv_error: 1.0 / res.error,
            expected_time_t: res.total_expected_time,
            variant,
            kappa: inst.kappa(),
            n: inst.n(),
            d: inst.d(),
            n_rep,
            master_seed: seed,
        };
        let mut buf = Vec::new();
        SweepResult { rows: vec![row] }
            .write_csv(&mut buf, &config)
            .map_err(|e| CliError::Io(e.to_string()))?;
        write_file(out, &buf)?;
    }
    Ok(())
}

fn gnuplot_script(csv: &Path) -> String {
    let csv = csv.display();
    format!(
        "set datafile separator ','\n\
         set xlabel 'q'\n\
         set ylabel '1/error'\n\
         f(x) = a*x + b\n\
         fit f(x) '{csv}' using 1:3 every ::1 via a, b\n\
         plot '{csv}' using 1:3 every ::1 with points title '1/error', f(x) title 'least-squares fit'\n"
    )
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    if args.q_list.is_empty() {
        return Err(CliError::Validation("--q-list must not be empty".into()));
    }
    if args.q_list.contains(&0) {
        return Err(CliError::Validation(
            "--q-list entries must be at least 1".into(),
        ));
    }
    let inst = load_instance(&args.engine.instance)?;
    let cfg = engine_config(&args.engine)?;
    probe_writable(&args.out)?;
    if let Some(script) = &args.gnuplot {
        probe_writable(script)?;
    }
    let q_text: Vec<String> = args.q_list.iter().map(ToString::to_string).collect();
    let config = config_lines(
        &args.engine,
        &inst,
        &[format!("q_list={}", q_text.join(","))],
    );

    let (variant, n_rep, seed) = (args.engine.variant, args.engine.nrep, args.engine.seed);
    let q_list = args.q_list.clone();
    let result = with_pool(args.engine.threads, || {
        Ok(error_vs_q_sweep(
            &inst, &q_list, variant, n_rep, seed, &cfg,
        )?)
    })?;

    let mut buf = Vec::new();
    result
        .write_csv(&mut buf, &config)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&args.out, &buf)?;
    if let Some(script) = &args.gnuplot {
        write_file(script, gnuplot_script(&args.out).as_bytes())?;
    }

    for row in &result.rows {
        println!(
            "q={} error={:.6e} inv_error={:.6e} expected_time_T={:.6e}",
            row.q, row.error, row.inv_error, row.expected_time_t
        );
    }
    match result.inverse_error_fit() {
        Some(fit) => println!(
            "fit: inv_error = {:.6e} * q + {:.6e}, r_squared = {:.6}",
            fit.slope, fit.intercept, fit.r_squared
        ),
        None => println!("fit: not enough points"),
    }
    Ok(())
}

/// Tolerances for `check`.
const PSD_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-8;
const BLOCK_SQUARE_TOL: f64 = 1e-9;
const NO_TRANSITION_TOL: f64 = 1e-10;
const NO_TRANSITION_GRID: usize = 11;

struct Violation {
    what: &'static str,
    s: String,
    observed: f64,
    bound: String,
}

fn grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            if i + 1 == points {
                1.0
            } else {
                i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn check_variant(
    emb: &Embedding<'_>,
    variant: Variant,
    s_grid: &[f64],
    out: &mut impl Write,
    violations: &mut Vec<Violation>,
) -> CliResult {
    let io = |e: io::Error| CliError::Io(e.to_string());
    writeln!(
        out,
        "{:<10} {:>8} {:>6} {:>14} {:>14} {:>11} {:>11}  status",
        "variant", "s", "kernel", "gap", "gap_bound", "defect", "spectrum"
    )
    .map_err(io)?;
    for &s in s_grid {
        let r = emb.spectral_report(s, variant)?;
        let mut ok = true;
        let mut flag = |what, observed: f64, bound: String, pass: bool| {
            if !pass {
                ok = false;
                violations.push(Violation {
                    what,
                    s: format!("{s:.6}"),
                    observed,
                    bound,
                });
            }
        };
        flag(
            "kernel dimension",
            r.kernel_dim as f64,
            r.expected_kernel_dim().to_string(),
            r.kernel_dim == r.expected_kernel_dim(),
        );
        flag(
            "gap",
            r.gap,
            format!(">= {:.6e}", r.gap_bound),
            r.gap_ok(GAP_TOL),
        );
        let (defect, spectrum) = match variant {
            Variant::GroundState => {
                flag(
                    "psd",
                    r.psd_defect,
                    format!("<= {PSD_TOL:e}"),
                    r.psd_defect <= PSD_TOL,
                );
                (r.psd_defect, 0.0)
            }
            Variant::GapAmplified => {
                let spectrum = emb.amplified_spectrum_defect(s)?;
                let square = emb.block_square_defect(s)?;
                flag(
                    "chiral symmetry",
                    r.symmetry_defect,
                    format!("<= {SYMMETRY_TOL:e}"),
                    r.symmetry_defect <= SYMMETRY_TOL,
                );
                flag(
                    "spectrum +-sqrt(gamma)",
                    spectrum,
                    format!("<= {SPECTRUM_TOL:e}"),
                    spectrum <= SPECTRUM_TOL,
                );
                flag(
                    "block square",
                    square,
                    format!("<= {BLOCK_SQUARE_TOL:e}"),
                    square <= BLOCK_SQUARE_TOL,
                );
                (r.symmetry_defect.max(square), spectrum)
            }
        };
        writeln!(
            out,
            "{:<10} {:>8.4} {:>6} {:>14.6e} {:>14.6e} {:>11.3e} {:>11.3e}  {}",
            variant.to_string(),
            s,
            r.kernel_dim,
            r.gap,
            r.gap_bound,
            defect,
            spectrum,
            if ok { "ok" } else { "FAIL" }
        )
        .map_err(io)?;
    }
    if variant == Variant::GapAmplified {
        let coarse = grid(NO_TRANSITION_GRID);
        let mut worst: f64 = 0.0;
        for &s in &coarse {
            for &sp in &coarse {
                let amp = emb.no_transition_amplitude(s, sp)?;
                worst = worst.max(amp);
                if amp > NO_TRANSITION_TOL {
                    violations.push(Violation {
                        what: "no transition",
                        s: format!("({s:.2}, {sp:.2})"),
                        observed: amp,
                        bound: format!("<= {NO_TRANSITION_TOL:e}"),
                    });
                }
            }
        }
        writeln!(
            out,
            "no-transition max |<0,x(s)|H'(s')|1,b>| on {n}x{n} grid = {worst:.3e}",
            n = NO_TRANSITION_GRID
        )
        .map_err(io)?;
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> CliResult {
    if args.s_grid < 2 {
        return Err(CliError::Validation("--s-grid must be at least 2".into()));
    }
    let inst = load_instance(&args.instance)?;
    let variants = match args.variant {
        Some(v) => vec![v],
        None => vec![Variant::GroundState, Variant::GapAmplified],
    };
    let s_grid = grid(args.s_grid);
    let violations = with_pool(args.threads, || {
        let emb = Embedding::new(&inst, args.mode)?;
        let stdout = io::stdout();
        let mut out = stdout.lock();
        let mut violations = Vec::new();
        writeln!(
            out,
            "instance={} kappa={:.16e} mode={}",
            args.instance.display(),
            inst.kappa(),
            args.mode
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        for &v in &variants {
            check_variant(&emb, v, &s_grid, &mut out, &mut violations)?;
        }
        Ok(violations)
    })?;
    if violations.is_empty() {
        println!("all checks passed");
        return Ok(());
    }
    for v in &violations {
        eprintln!(
            "violation: {} at s={} observed={:.6e} bound {}",
            v.what, v.s, v.observed, v.bound
        );
    }
    Err(CliError::Property(format!(
        "{} check(s) failed",
        violations.len()
    )))
}

fn cmd_solve_exact(args: SolveArgs) -> CliResult {
    let inst = load_instance(&args.instance)?;
    let (x, residual) = exact_solution_with_residual(&inst)?;
    let mut text = String::new();
    for (i, a) in x.amplitudes().iter().enumerate() {
        // adding 0.0 maps -0.0 to +0.0
        text.push_str(&format!("{i} {:.16e} {:.16e}\n", a.re + 0.0, a.im + 0.0));
    }
    print!("{text}");
    println!("residual={residual:.16e}");
    if let Some(out) = &args.out {
        write_file(out, text.as_bytes())?;
    }
    Ok(())
}
