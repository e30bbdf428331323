mod expr;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frame_extend::domain::{load_mask, mask_file_size, rasterize};
use frame_extend::experiments::{default_suite, run_experiment};
use frame_extend::solver::sample_on_mask;
use frame_extend::spectral::singular_profile;
use frame_extend::topology::{distance_layers, verify_layer_bound};
use frame_extend::{
    solve_algorithm1, DomainMask, Error, ExperimentConfig, ExperimentKind, FrameOperator, GridSpec,
    Shape, SolverConfig, TestFunction,
};
use serde_json::json;

use expr::Expr;

/// Fourier extension approximation on 2D domains.
///
/// Set FRAME_EXTEND_THREADS to cap the worker pool.
#[derive(Debug, Parser)]
#[command(name = "frame-extend", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximate a function on a domain; writes <out>.coeffs.csv and <out>.report.json.
    Approx(ApproxArgs),
    /// Singular values of the collocation matrix with plunge counts.
    Spectrum(SpectrumArgs),
    /// Components, holes and boundary layers of a rasterized domain.
    Topology(TopologyArgs),
    /// Run a study from a JSON configuration, or `suite` for the full default set.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// Builtin domain: square, diamond, disk, ring or star.
    #[arg(long, default_value = "disk", value_parser = parse_shape)]
    domain: Shape,
    /// Mask file (`MASK n n` then n rows of 0/1); overrides --domain.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Grid points per side [default: 4 * nlambda, or the mask size].
    #[arg(long)]
    nr: Option<usize>,
    /// Half-width of the bounding box [-T, T]^2.
    #[arg(long = "T", default_value_t = 2.0)]
    t: f64,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Frequencies per side.
    #[arg(long, default_value_t = 9)]
    nlambda: usize,
    /// Truncation threshold.
    #[arg(long, default_value = "1e-14")]
    eps: f64,
    /// Seed of the random sketch.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// exp_xy, pole, oscillatory, abs_xy, robust_sine or expr:<formula in x, y>.
    #[arg(long, default_value = "exp_xy")]
    function: String,
    /// Output prefix.
    #[arg(long, default_value = "approx")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Frequencies per side.
    #[arg(long, default_value_t = 9)]
    nlambda: usize,
    /// Plunge-region threshold.
    #[arg(long, default_value = "1e-14")]
    eps: f64,
    /// Accepted for uniformity; the spectrum is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TopologyArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Layer-size CSV (i,size) [default: not written].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// convergence, plunge, robustness, timing, spectrum, topology or suite.
    kind: String,
    /// JSON configuration [default: the builtin configuration of the kind].
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV, or directory for `suite` [default: config output, else stdout; `results` for suite].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failures mapped to exit codes: 2 bad input, 3 solver failure, 4 I/O.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solver(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::Io(_) => Failure::Io(m),
            Error::LengthMismatch { .. }
            | Error::FlatIndexOutOfRange { .. }
            | Error::DenseCapExceeded { .. }
            | Error::RankExceeded { .. }
            | Error::Linalg(_) => Failure::Solver(m),
            _ => Failure::Usage(m),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn build_mask(d: &DomainArgs, n_lambda: usize) -> Result<DomainMask, Failure> {
    match &d.mask {
        Some(path) => {
            let n_r = match d.nr {
                Some(n) => n,
                None => mask_file_size(path)?,
            };
            let spec = GridSpec::new(2, n_r, n_lambda, d.t)?;
            Ok(load_mask(path, &spec)?)
        }
        None => {
            let n_r = d.nr.unwrap_or(4 * n_lambda);
            let spec = GridSpec::new(2, n_r, n_lambda, d.t)?;
            Ok(rasterize(&d.domain.into(), &spec)?)
        }
    }
}

fn domain_label(d: &DomainArgs) -> String {
    match &d.mask {
        Some(p) => format!("mask:{}", p.display()),
        None => d.domain.to_string(),
    }
}

type Target = Box<dyn Fn(&[f64]) -> f64 + Sync>;

fn target(name: &str, n_lambda: usize) -> Result<Target, Failure> {
    if let Some(src) = name.strip_prefix("expr:") {
        let e =
            Expr::parse(src).map_err(|e| Failure::Usage(format!("bad expression `{src}`: {e}")))?;
        return Ok(Box::new(move |x: &[f64]| e.eval(x[0], x[1])));
    }
    let f: TestFunction = name.parse()?;
    Ok(Box::new(move |x: &[f64]| f.eval(x, n_lambda)))
}

fn cmd_approx(a: &ApproxArgs) -> Result<(), Failure> {
    let f = target(&a.function, a.nlambda)?;
    let cfg = SolverConfig {
        eps: a.eps,
        seed: a.seed,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let op = FrameOperator::new(build_mask(&a.domain, a.nlambda)?);
    let b = sample_on_mask(&op, &f);
    let (x, report) = solve_algorithm1(&op, &b, &cfg)?;

    let mut csv = String::from("l1,l2,re,im\n");
    for (l, c) in op.window().indices().iter().zip(x.iter()) {
        let k = l.components();
        let _ = writeln!(csv, "{},{},{:.16e},{:.16e}", k[0], k[1], c.re, c.im);
    }
    write_file(&with_suffix(&a.out, ".coeffs.csv"), &csv)?;

    let spec = op.spec();
    let doc = json!({
        "domain": domain_label(&a.domain),
        "function": a.function,
        "n_lambda": spec.n_lambda(),
        "n_r": spec.n_r(),
        "T": spec.half_width(),
        "eps": a.eps,
        "seed": a.seed,
        "n_omega": op.n_rows(),
        "residual": report.residual_norm,
        "rank": report.rank_used,
        "report": report,
    });
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    write_file(&with_suffix(&a.out, ".report.json"), &text)?;
    eprintln!(
        "residual {:.3e}, rank {}, {:.3}s",
        report.residual_norm, report.rank_used, report.timings.total
    );
    Ok(())
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<(), Failure> {
    if !(a.eps > 0.0 && a.eps < 0.5) {
        return Err(Failure::Usage(format!(
            "--eps must lie in (0, 1/2), got {}",
            a.eps
        )));
    }
    let op = FrameOperator::new(build_mask(&a.domain, a.nlambda)?);
    let profile = singular_profile(&op, a.eps)?;
    let spec = op.spec();
    let header = format!(
        "# domain={}, n_lambda={}, n_r={}, T={}, n_omega={}\n",
        domain_label(&a.domain),
        spec.n_lambda(),
        spec.n_r(),
        spec.half_width(),
        op.n_rows()
    );
    emit(a.out.as_deref(), &(header + &profile.to_csv()))
}

fn cmd_topology(a: &TopologyArgs) -> Result<(), Failure> {
    if a.domain.mask.is_none() && a.domain.nr.is_none() {
        return Err(Failure::Usage("topology needs --nr or --mask".into()));
    }
    // The frequency count plays no role in the raster.
    let mask = build_mask(&a.domain, 1)?;
    let layers = distance_layers(&mask)?;
    let bound = verify_layer_bound(&mask)?;
    println!(
        "domain={} n_r={} n_omega={} components={} holes={} boundary={} layers={} layer_bound={}",
        domain_label(&a.domain),
        mask.spec().n_r(),
        mask.n_omega(),
        layers.components(),
        layers.holes(),
        layers.n_boundary(),
        layers.n_layers(),
        if bound.holds() { "holds" } else { "violated" }
    );
    if let Some(out) = &a.out {
        write_file(out, &layers.to_csv())?;
    }
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<(), Failure> {
    if a.kind == "suite" {
        if a.config.is_some() {
            return Err(Failure::Usage("suite takes no --config".into()));
        }
        let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("results"));
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        for cfg in default_suite(a.seed.unwrap_or(0)) {
            let table = run_experiment(&cfg)?;
            let path = dir.join(format!("{}.csv", cfg.kind));
            write_file(&path, &table.to_csv())?;
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }
    let kind: ExperimentKind = a.kind.parse()?;
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.kind != kind {
                return Err(Failure::Usage(format!(
                    "config {} is a {} experiment, not {kind}",
                    path.display(),
                    cfg.kind
                )));
            }
            cfg
        }
        None => default_suite(0)
            .into_iter()
            .find(|c| c.kind == kind)
            .expect("suite covers every kind"),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let table = run_experiment(&cfg)?;
    let out = a.out.clone().or_else(|| cfg.output.clone());
    emit(out.as_deref(), &table.to_csv())
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("FRAME_EXTEND_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::Usage(format!(
                "FRAME_EXTEND_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Approx(a) => cmd_approx(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Topology(a) => cmd_topology(a),
        Command::Experiment(a) => cmd_experiment(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
