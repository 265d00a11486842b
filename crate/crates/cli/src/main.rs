//! Command-line front end: simulate index-1 DAE systems, certify contraction
//! via matrix measures of the generalized Jacobian, run observer experiments,
//! and export CSV/SVG artifacts.
//!
//! Exit codes: 0 = success (or Certified), 2 = NotCertified (certify
//! subcommands), 1 = any error.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use daecert_core::aux::MetricTransform;
use daecert_core::certify::{
    certify_box_reduced, certify_contraction, certify_with_gamma_ladder, gamma_lower_bound,
    BoxCoord, BoxSpec, Certificate, CertifyOptions, StateIndex,
};
use daecert_core::dae::{consistent_init, integrate, DaeSystem, DslDae, Trajectory};
use daecert_core::linalg::{matrix_measure, Matrix, NormKind};
use daecert_core::observer::{
    build_observer_dae, simulate_observer, MeasuredSignal, ObserverRun, PlantAsDae, PlantSignal,
};
use daecert_core::registry::{get_example, ExampleId, ExampleSystem, MetricSpec, NamedExample};

#[derive(Parser)]
#[command(
    name = "daecert",
    version,
    about = "Contraction certification for index-1 time-varying DAE systems"
)]
struct Cli {
    /// Worker threads for grid evaluation (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a system and export the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Certify contraction along trajectories from an initial set.
    Certify(CertifyArgs),
    /// Certify a time-invariant system over a state box (reduced Jacobian).
    CertifyBox(CertifyBoxArgs),
    /// Matrix measure of a matrix read from a headerless CSV file.
    Measure(MeasureArgs),
    /// Lower bound on gamma from growth-rate data.
    GammaBound(GammaBoundArgs),
    /// Simulate a plant/observer pair and export the error series.
    Observer(ObserverArgs),
    /// List the built-in example systems and their presets.
    ListExamples,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in example id (see list-examples).
    #[arg(long, conflicts_with = "model")]
    example: Option<String>,
    /// Path to a model file in the text format described in the README.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// End of the integration span (defaults to the example preset, or 10).
    #[arg(long)]
    t_end: Option<f64>,
    /// Fixed integrator step (defaults to the example preset, or 1e-3).
    #[arg(long)]
    step: Option<f64>,
    /// Initial state, comma separated (defaults to the example preset).
    #[arg(long)]
    w0: Option<String>,
    /// Initial guess for the algebraic variables, comma separated.
    #[arg(long)]
    z_guess: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write an SVG line chart of the trajectory.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Fixed gamma; omitted = example preset, or the ladder {0,1,2,4,8,16}.
    #[arg(long)]
    gamma: Option<f64>,
    /// Norm for the matrix measure: 1, 2 or inf.
    #[arg(long)]
    p: Option<String>,
    /// Metric: 'identity' or 'expscale:<sigma>'.
    #[arg(long)]
    metric: Option<String>,
    /// Required contraction margin; Certified iff mu_max <= -beta-min.
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Initial condition "w1,..,wn;zg1,..,zgm" (repeatable; defaults to the
    /// example preset).
    #[arg(long = "ic")]
    ics: Vec<String>,
    /// Reject metrics whose ||M||*||M^-1|| exceeds this on the grid.
    #[arg(long, default_value_t = 1e6)]
    metric_cap: f64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CertifyBoxArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Box interval "w<i>=lo:hi" or "z<j>=lo:hi" (repeatable; defaults to
    /// the example preset).
    #[arg(long = "box")]
    boxes: Vec<String>,
    /// Grid points per box axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    beta_min: Option<f64>,
    /// Base point "w1,..;z1,.." for coordinates not swept by the box.
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    /// Headerless CSV file holding a square matrix.
    #[arg(long)]
    input: PathBuf,
    /// Norm: 1, 2 or inf.
    #[arg(long, default_value = "1")]
    p: String,
}

#[derive(Args)]
struct GammaBoundArgs {
    #[arg(long)]
    alpha_bar: f64,
    #[arg(long)]
    lf: f64,
    #[arg(long)]
    lg: f64,
}

#[derive(Args)]
struct ObserverArgs {
    /// Built-in observer example id.
    #[arg(long)]
    example: String,
    /// Plant initial state (defaults to the example preset).
    #[arg(long)]
    w0: Option<String>,
    /// Observer initial state (defaults to the example preset).
    #[arg(long)]
    w_hat0: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write an SVG chart of the per-coordinate errors.
    #[arg(long)]
    plot: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };

    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        // Ignore "already initialized": only the first configuration wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.is_some() {
        eprintln!("warning: built without the 'parallel' feature; --threads is ignored");
    }

    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Certify(args) => cmd_certify(args),
        Command::CertifyBox(args) => cmd_certify_box(args),
        Command::Measure(args) => cmd_measure(args),
        Command::GammaBound(args) => {
            println!("{}", gamma_lower_bound(args.alpha_bar, args.lf, args.lg));
            Ok(0)
        }
        Command::Observer(args) => cmd_observer(args),
        Command::ListExamples => {
            for id in ExampleId::all() {
                let ex = get_example(id);
                println!("{:<14} {}", id.as_str(), ex.summary);
                println!(
                    "{:<14}   preset: gamma={}, p={}, metric={:?}, beta_min={}, t_span=({},{}), step={}",
                    "", ex.gamma, ex.p, ex.metric, ex.beta_min, ex.t_span.0, ex.t_span.1, ex.step
                );
            }
            Ok(0)
        }
    }
}

/// A resolved system source: a DAE plus, when it came from the registry,
/// the example presets.
struct Source {
    sys: Arc<dyn DaeSystem>,
    example: Option<NamedExample>,
}

fn resolve_source(source: &SourceArgs) -> Result<Source> {
    match (&source.example, &source.model) {
        (Some(id), None) => {
            let id: ExampleId = id.parse()?;
            let ex = get_example(id);
            let sys = match &ex.system {
                ExampleSystem::Dae(sys) => sys.clone(),
                ExampleSystem::Observer(spec) => {
                    // Certification and simulation of the observer example
                    // run against the plant's measured output from the
                    // preset plant initial state.
                    let (plant_ic, _) = ex
                        .observer_ics
                        .clone()
                        .ok_or_else(|| anyhow!("observer example without initial conditions"))?;
                    let plant_dae = PlantAsDae::new(spec.plant.clone());
                    let traj = integrate(
                        &plant_dae,
                        ex.t_span.0,
                        &plant_ic,
                        &[],
                        ex.t_span.1,
                        ex.step,
                    )?;
                    let signal = PlantSignal::new(spec.plant.clone(), traj)?;
                    Arc::new(build_observer_dae(
                        spec.clone(),
                        MeasuredSignal::Plant(Arc::new(signal)),
                    ))
                }
            };
            Ok(Source {
                sys,
                example: Some(ex),
            })
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading model file {}", path.display()))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "model".into());
            let sys = DslDae::parse(&text, name)?;
            Ok(Source {
                sys: Arc::new(sys),
                example: None,
            })
        }
        _ => bail!("exactly one of --example or --model is required"),
    }
}

fn parse_vec(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad number '{part}'"))
        })
        .collect()
}

/// "w1,..,wn;zg1,..,zgm" (the ';' and algebraic part may be omitted).
fn parse_ic(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    match text.split_once(';') {
        Some((w, z)) => Ok((parse_vec(w)?, parse_vec(z)?)),
        None => Ok((parse_vec(text)?, Vec::new())),
    }
}

fn parse_box_coord(text: &str) -> Result<BoxCoord> {
    let (name, range) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("box coordinate must look like z1=lo:hi, got '{text}'"))?;
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| anyhow!("box range must look like lo:hi, got '{range}'"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| anyhow!("bad number '{lo}'"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| anyhow!("bad number '{hi}'"))?;
    let name = name.trim();
    let index = if let Some(i) = name.strip_prefix('w') {
        StateIndex::W(
            i.parse::<usize>()
                .map_err(|_| anyhow!("bad index '{name}'"))?
                - 1,
        )
    } else if let Some(j) = name.strip_prefix('z') {
        StateIndex::Z(
            j.parse::<usize>()
                .map_err(|_| anyhow!("bad index '{name}'"))?
                - 1,
        )
    } else {
        bail!("box coordinate must start with w or z, got '{name}'");
    };
    Ok(BoxCoord { index, lo, hi })
}

fn parse_metric(text: &str) -> Result<MetricTransform> {
    Ok(text.parse::<MetricSpec>()?.to_transform())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).expect("csv into memory");
    buf
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    // The observer example simulates as a plant/observer pair.
    if args.source.example.as_deref() == Some("oex1_observer") {
        return cmd_observer(ObserverArgs {
            example: "oex1_observer".into(),
            w0: None,
            w_hat0: None,
            t0: args.t0,
            t_end: args.t_end,
            step: args.step,
            out_dir: args.out_dir,
            plot: args.plot,
        });
    }
    let source = resolve_source(&args.source)?;
    let preset = source.example.as_ref();
    let t_end = args.t_end.or(preset.map(|e| e.t_span.1)).unwrap_or(10.0);
    let step = args.step.or(preset.map(|e| e.step)).unwrap_or(1e-3);
    let (w0, z_guess) = match (&args.w0, preset) {
        (Some(w), _) => (
            parse_vec(w)?,
            args.z_guess
                .as_deref()
                .map(parse_vec)
                .transpose()?
                .unwrap_or_default(),
        ),
        (None, Some(ex)) => ex.default_ics[0].clone(),
        (None, None) => bail!("--w0 is required for model files"),
    };
    let mut z_guess = z_guess;
    z_guess.resize(source.sys.alg_dim(), 0.0);

    let z0 = consistent_init(source.sys.as_ref(), args.t0, &w0, &z_guess)?;
    let traj = integrate(source.sys.as_ref(), args.t0, &w0, &z0, t_end, step)?;
    if traj.nonfinite {
        eprintln!(
            "note: state left floating-point range at t = {:.6}; trajectory truncated",
            traj.t_end()
        );
    }
    println!(
        "simulated '{}' over [{}, {}]: {} samples, max |g| = {:.3e}",
        source.sys.name(),
        args.t0,
        traj.t_end(),
        traj.len(),
        traj.constraint_residual_max
    );

    fs::create_dir_all(&args.out_dir)?;
    write_file(&args.out_dir.join("trajectory.csv"), &trajectory_csv(&traj))?;
    if args.plot {
        let mut series = Vec::new();
        for i in 0..traj.state_dim() {
            let pts: Vec<(f64, f64)> = (0..traj.len()).map(|k| (traj.t(k), traj.w(k)[i])).collect();
            series.push((format!("w{}", i + 1), pts));
        }
        for j in 0..traj.alg_dim() {
            let pts: Vec<(f64, f64)> = (0..traj.len()).map(|k| (traj.t(k), traj.z(k)[j])).collect();
            series.push((format!("z{}", j + 1), pts));
        }
        let chart = svg::line_chart(&format!("{} trajectory", source.sys.name()), &series);
        write_file(&args.out_dir.join("trajectory.svg"), chart.as_bytes())?;
    }
    Ok(0)
}

fn emit_certificate(cert: &Certificate, out_dir: &Path) -> Result<i32> {
    let mut report = Vec::new();
    cert.write_report(&mut report)?;
    print!("{}", String::from_utf8_lossy(&report));
    fs::create_dir_all(out_dir)?;
    write_file(&out_dir.join("report.txt"), &report)?;
    let mut csv = Vec::new();
    cert.write_mu_csv(&mut csv)?;
    write_file(&out_dir.join("mu_samples.csv"), &csv)?;
    Ok(if cert.is_certified() { 0 } else { 2 })
}

fn cmd_certify(args: CertifyArgs) -> Result<i32> {
    let source = resolve_source(&args.source)?;
    let preset = source.example.as_ref();

    let p = match &args.p {
        Some(p) => p.parse::<NormKind>()?,
        None => preset.map(|e| e.p).unwrap_or(NormKind::One),
    };
    let metric = match &args.metric {
        Some(m) => parse_metric(m)?,
        None => preset
            .map(|e| e.metric.to_transform())
            .unwrap_or(MetricTransform::Identity),
    };
    let beta_min = args.beta_min.or(preset.map(|e| e.beta_min)).unwrap_or(0.5);
    let t_end = args.t_end.or(preset.map(|e| e.t_span.1)).unwrap_or(10.0);
    let step = args.step.or(preset.map(|e| e.step)).unwrap_or(1e-3);

    let ics: Vec<(Vec<f64>, Vec<f64>)> = if args.ics.is_empty() {
        match preset {
            Some(ex) => ex.default_ics.clone(),
            None => bail!("at least one --ic is required for model files"),
        }
    } else {
        args.ics
            .iter()
            .map(|s| parse_ic(s))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(|(w, mut z)| {
                z.resize(source.sys.alg_dim(), 0.0);
                (w, z)
            })
            .collect()
    };

    let mut opts = CertifyOptions {
        gamma: 0.0,
        p,
        metric,
        beta_min,
        t_span: (args.t0, t_end),
        step,
        metric_product_cap: args.metric_cap,
    };
    let cert = match args.gamma.or(preset.map(|e| e.gamma)) {
        Some(gamma) => {
            opts.gamma = gamma;
            certify_contraction(source.sys.as_ref(), &ics, &opts)?
        }
        None => certify_with_gamma_ladder(source.sys.as_ref(), &ics, &opts)?,
    };
    emit_certificate(&cert, &args.out_dir)
}

fn cmd_certify_box(args: CertifyBoxArgs) -> Result<i32> {
    let source = resolve_source(&args.source)?;
    let preset = source.example.as_ref();
    let box_preset = preset.and_then(|e| e.box_preset.as_ref());

    let spec = if args.boxes.is_empty() {
        box_preset
            .map(|b| b.spec.clone())
            .ok_or_else(|| anyhow!("--box is required (no box preset for this source)"))?
    } else {
        BoxSpec {
            coords: args
                .boxes
                .iter()
                .map(|s| parse_box_coord(s))
                .collect::<Result<Vec<_>>>()?,
        }
    };
    let grid = args.grid.or(box_preset.map(|b| b.grid)).unwrap_or(101);
    let base = match &args.base {
        Some(text) => {
            let (w, mut z) = parse_ic(text)?;
            z.resize(source.sys.alg_dim(), 0.0);
            (w, z)
        }
        None => box_preset.map(|b| b.base.clone()).unwrap_or((
            vec![0.0; source.sys.state_dim()],
            vec![0.0; source.sys.alg_dim()],
        )),
    };
    let p = match &args.p {
        Some(p) => p.parse::<NormKind>()?,
        None => preset.map(|e| e.p).unwrap_or(NormKind::One),
    };
    let metric = match &args.metric {
        Some(m) => parse_metric(m)?,
        None => MetricTransform::Identity,
    };
    let beta_min = args.beta_min.or(preset.map(|e| e.beta_min)).unwrap_or(0.5);

    let cert = certify_box_reduced(
        source.sys.as_ref(),
        &spec,
        (&base.0, &base.1),
        grid,
        p,
        &metric,
        beta_min,
    )?;
    emit_certificate(&cert, &args.out_dir)
}

fn cmd_measure(args: MeasureArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            line.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow!("bad matrix entry '{cell}'"))
                })
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let n = rows.len();
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != cols) {
        bail!("ragged matrix rows");
    }
    let matrix = Matrix::new(n, cols, rows.into_iter().flatten().collect())?;
    let p = args.p.parse::<NormKind>()?;
    println!("{}", matrix_measure(&matrix, p)?);
    Ok(0)
}

fn observer_error_chart(run: &ObserverRun) -> String {
    let n = run.plant.state_dim();
    let mut series = Vec::new();
    for i in 0..n {
        let pts: Vec<(f64, f64)> = run
            .error_norms
            .iter()
            .enumerate()
            .map(|(k, &(t, _))| (t, run.error_components[k][i]))
            .collect();
        series.push((format!("e{}", i + 1), pts));
    }
    svg::line_chart("observer estimation error", &series)
}

fn cmd_observer(args: ObserverArgs) -> Result<i32> {
    let id: ExampleId = args.example.parse()?;
    let ex = get_example(id);
    let spec = ex
        .observer_spec()
        .ok_or_else(|| anyhow!("'{}' is not an observer example", args.example))?;
    let (preset_w0, preset_what0) = ex
        .observer_ics
        .clone()
        .ok_or_else(|| anyhow!("observer example without preset initial conditions"))?;
    let w0 = args
        .w0
        .as_deref()
        .map(parse_vec)
        .transpose()?
        .unwrap_or(preset_w0);
    let w_hat0 = args
        .w_hat0
        .as_deref()
        .map(parse_vec)
        .transpose()?
        .unwrap_or(preset_what0);
    let t_end = args.t_end.unwrap_or(ex.t_span.1);
    let step = args.step.unwrap_or(ex.step);

    let run = simulate_observer(spec, &w0, &w_hat0, args.t0, t_end, step)?;
    let (tf, ef) = *run.error_norms.last().unwrap();
    println!(
        "observer '{}' over [{}, {tf}]: final error {ef:.6e}",
        args.example, args.t0
    );

    fs::create_dir_all(&args.out_dir)?;
    write_file(&args.out_dir.join("plant.csv"), &trajectory_csv(&run.plant))?;
    write_file(
        &args.out_dir.join("observer.csv"),
        &trajectory_csv(&run.observer),
    )?;
    let mut err_csv = Vec::new();
    run.write_error_csv(&mut err_csv)?;
    write_file(&args.out_dir.join("error.csv"), &err_csv)?;
    if args.plot {
        write_file(
            &args.out_dir.join("error.svg"),
            observer_error_chart(&run).as_bytes(),
        )?;
    }
    Ok(0)
}
