//! Command-line front end: problem files in, traces, energies, bounds and
//! convergence reports out.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beamstab_core::bounds::{self, BoundReport, DecayBound};
use beamstab_core::problem::{validate, Severity};
use beamstab_core::sweep::{self, SweepParameter};
use beamstab_core::verify::{self, ErrorReport, StudyKind};
use beamstab_core::{pipeline, stepper, BeamProblem, CurvatureMode, Error, Preset, Resolution, TimeStepRule};
use clap::{Args, Parser, Subcommand, ValueEnum};

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "beamstab", version, about = "Damped beam simulation and energy-decay verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem definition
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Run a simulation and write trace.csv, energy.csv and bounds.json
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Write every k-th time level to the trace
        #[arg(long, default_value_t = 1)]
        decimate: usize,
    },
    /// Compare against the exact solution (test_NE1 only)
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Refinement study with observed orders
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Defaults to temporal when an exact solution exists, identity otherwise
        #[arg(long, value_enum)]
        study: Option<Study>,
    },
    /// One simulation per parameter value, run concurrently
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = parse_parameter)]
        param: SweepParameter,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Decay constants and the penalty scan
    Bounds {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = bounds::REPORT_SCAN_POINTS)]
        scan: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in problem name
    #[arg(long)]
    preset: Option<String>,
    /// Problem JSON file
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Mesh node count, clamped end included
    #[arg(long, default_value_t = 41)]
    nodes: usize,
    /// Time step
    #[arg(long, conflicts_with = "ratio")]
    dt: Option<f64>,
    /// h_t = h_x / ratio
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Basis)]
    mode: Mode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Paper,
    Basis,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Temporal,
    Spatial,
    Identity,
}

const DEFAULT_RATIO: f64 = 40.0;
const DEFAULT_OUT: &str = "out";

fn parse_parameter(s: &str) -> Result<SweepParameter, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Source {
    fn load(&self) -> beamstab_core::Result<(BeamProblem, Option<Preset>)> {
        match (&self.preset, &self.problem) {
            (Some(name), _) => {
                let p: Preset = name.parse()?;
                Ok((p.problem(), Some(p)))
            }
            (None, Some(path)) => Ok((BeamProblem::load(path)?, None)),
            (None, None) => Err(Error::InvalidArgument("one of --preset or --problem is required".into())),
        }
    }
}

impl RunArgs {
    fn resolution(&self) -> beamstab_core::Result<Resolution> {
        if self.nodes < 3 {
            return Err(Error::InvalidArgument(format!("--nodes must be at least 3, got {}", self.nodes)));
        }
        let rule = match (self.dt, self.ratio) {
            (Some(h), _) if h > 0.0 => TimeStepRule::Fixed(h),
            (Some(h), _) => return Err(Error::InvalidArgument(format!("--dt must be positive, got {h}"))),
            (None, Some(r)) if r > 0.0 => TimeStepRule::Ratio(r),
            (None, Some(r)) => return Err(Error::InvalidArgument(format!("--ratio must be positive, got {r}"))),
            (None, None) => TimeStepRule::Ratio(DEFAULT_RATIO),
        };
        Ok(Resolution::new(self.nodes, rule))
    }

    fn mode(&self) -> CurvatureMode {
        match self.mode {
            Mode::Paper => CurvatureMode::Paper,
            Mode::Basis => CurvatureMode::Basis,
        }
    }
}

fn write_output(out: Option<&Path>, name: &str, contents: &str) -> beamstab_core::Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn cmd_validate(source: &Source) -> beamstab_core::Result<u8> {
    let (problem, _) = source.load()?;
    let report = validate(&problem);
    let mut stdout = io::stdout().lock();
    for issue in &report.issues {
        let tag = match issue.severity {
            Severity::Structural | Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        };
        writeln!(stdout, "{tag}: {}: {}", issue.field, issue.message)?;
    }
    if report.has_errors() {
        return Ok(1);
    }
    writeln!(stdout, "ok")?;
    Ok(0)
}

fn cmd_simulate(run: &RunArgs, decimate: usize) -> beamstab_core::Result<u8> {
    let (problem, _) = run.source.load()?;
    let sim = pipeline::simulate(&problem, &run.resolution()?, run.lambda, run.mode())?;
    let dir = run.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let paths = sim.write_outputs(&dir, decimate)?;
    let mut stdout = io::stdout().lock();
    for p in &paths {
        writeln!(stdout, "wrote {}", p.display())?;
    }
    match &sim.bound {
        Ok(b) => {
            let env = b.envelope.as_ref().expect("simulate attaches the envelope");
            writeln!(
                stdout,
                "regime {} lambda {:.6} M_d {:.6} sigma {:.6} envelope violations {}{}",
                b.regime,
                b.lambda,
                b.m_d,
                b.sigma,
                env.violations(),
                if env.informational { " (forced run: informational only)" } else { "" }
            )?;
        }
        Err(e) => eprintln!("warning: no decay estimate: {e}"),
    }
    Ok(0)
}

fn cmd_verify(run: &RunArgs) -> beamstab_core::Result<u8> {
    let (problem, preset) = run.source.load()?;
    let exact = preset.and_then(Preset::exact_solution).ok_or(Error::NoExactSolution)?;
    let report = verify::verify(&problem, &exact, &run.resolution()?)?;
    let csv = format!("{}\n{}\n", ErrorReport::CSV_HEADER, report.csv_row());
    print!("{csv}");
    write_output(run.out.as_deref(), "errors.csv", &csv)?;
    Ok(0)
}

fn cmd_convergence(run: &RunArgs, levels: usize, study: Option<Study>) -> beamstab_core::Result<u8> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("--levels must be at least 3, got {levels}")));
    }
    let (problem, preset) = run.source.load()?;
    let exact = preset.and_then(Preset::exact_solution);
    let kind = match study {
        Some(Study::Temporal) => StudyKind::Temporal,
        Some(Study::Spatial) => StudyKind::Spatial,
        Some(Study::Identity) => StudyKind::Identity,
        None if exact.is_some() => StudyKind::Temporal,
        None => StudyKind::Identity,
    };
    let table = sweep::with_thread_limit(sweep::thread_limit()?, || {
        verify::convergence(&problem, exact.as_ref(), kind, &run.resolution()?, levels, run.mode())
    })??;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    let csv = String::from_utf8(buf).expect("ascii csv");
    print!("{csv}");
    write_output(run.out.as_deref(), "convergence.csv", &csv)?;
    Ok(0)
}

fn cmd_sweep(run: &RunArgs, param: SweepParameter, values: &[f64]) -> beamstab_core::Result<u8> {
    let (problem, _) = run.source.load()?;
    let report = sweep::sweep(&problem, param, values, &run.resolution()?, run.mode(), sweep::thread_limit()?)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    let csv = String::from_utf8(buf).expect("ascii csv");
    print!("{csv}");
    write_output(run.out.as_deref(), "sweep.csv", &csv)?;
    Ok(0)
}

fn cmd_bounds(run: &RunArgs, scan: usize) -> beamstab_core::Result<u8> {
    let (problem, _) = run.source.load()?;
    problem.validate().into_result()?;
    // the end-damper window depends on the computed solution
    let trace = if problem.material_bounds().mu.0 > 0.0 {
        None
    } else {
        Some(stepper::run_at(&problem, &run.resolution()?)?)
    };
    let bound = DecayBound::compute(&problem, trace.as_ref(), run.lambda)?;
    let mut report = BoundReport::new(&bound, None)?;
    report.scan = bounds::scan_lambda(bound.beta0, bound.beta1, bound.lambda_max, scan)?;
    let json = report.to_json()?;
    print!("{json}");
    write_output(run.out.as_deref(), "bounds.json", &json)?;
    Ok(0)
}

fn dispatch(cli: &Cli) -> beamstab_core::Result<u8> {
    match &cli.command {
        Command::Validate { source } => cmd_validate(source),
        Command::Simulate { run, decimate } => cmd_simulate(run, *decimate),
        Command::Verify { run } => cmd_verify(run),
        Command::Convergence { run, levels, study } => cmd_convergence(run, *levels, *study),
        Command::Sweep { run, param, values } => cmd_sweep(run, *param, values),
        Command::Bounds { run, scan } => cmd_bounds(run, *scan),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_ERROR } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
