use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use subdiff::config::{Overrides, RunConfig};
use subdiff::cq::{generate_weights, Method};
use subdiff::experiments::{preset_problem, run_study, solve_final, to_csv, to_markdown, Preset, TimeGrid};
use subdiff::fem1d::Mesh1D;
use subdiff::stepper::Scheme;
use subdiff::{verify, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "subdiff", version, about = "BDF2 convolution quadrature for 1D subdiffusion")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print convolution quadrature weights b_0..b_n, one per line.
    Weights {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "bdf2")]
        method: Method,
        #[arg(short = 'n', long = "count")]
        n: usize,
    },
    /// Run one scheme and write the final state as `x,u` CSV.
    Solve {
        #[arg(long)]
        preset: Preset,
        #[arg(long, default_value = "corrected")]
        scheme: Scheme,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        cells: usize,
        /// Output file (default: standard output).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run convergence studies and write results.csv, tables.md, config.effective and metadata.toml.
    Study(StudyArgs),
    /// Run the self-check suites.
    Verify,
}

#[derive(Args)]
struct StudyArgs {
    /// TOML configuration file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    t_finals: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    reference_steps: Option<usize>,
    #[arg(long)]
    reference_scheme: Option<Scheme>,
    /// `steps_to_final` (N steps of size t_N/N) or `unit_step` (steps of size 1/N).
    #[arg(long, value_parser = parse_grid)]
    time_grid: Option<TimeGrid>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Repeat for more progress output.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    #[arg(short, long, conflicts_with = "verbose")]
    quiet: bool,
}

fn parse_grid(s: &str) -> Result<TimeGrid, String> {
    match s.replace('-', "_").as_str() {
        "steps_to_final" => Ok(TimeGrid::StepsToFinal),
        "unit_step" => Ok(TimeGrid::UnitStep),
        other => Err(format!("unknown time grid `{other}` (expected steps_to_final or unit_step)")),
    }
}

enum Failure {
    Lib(Error),
    Usage(String),
    Verify(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|source| {
        Failure::Lib(Error::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

fn weights(alpha: f64, method: Method, n: usize) -> Result<(), Failure> {
    let w = generate_weights(alpha, method, n)?;
    for b in w.as_slice() {
        println!("{b}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    preset: Preset,
    scheme: Scheme,
    alpha: f64,
    t_final: f64,
    steps: usize,
    cells: usize,
    output: Option<PathBuf>,
) -> Result<(), Failure> {
    let problem = preset_problem(preset).with_alpha(alpha)?.with_final_time(t_final)?;
    let mesh = Mesh1D::new(cells)?;
    let u = solve_final(&problem, &mesh, steps, scheme)?;
    let mut csv = String::from("x,u\n0,0\n");
    for (k, v) in u.iter().enumerate() {
        csv.push_str(&format!("{:?},{v:e}\n", mesh.node(k + 1)));
    }
    csv.push_str("1,0\n");
    match output {
        Some(path) => write_file(&path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn study(args: StudyArgs, jobs: Option<usize>) -> Result<(), Failure> {
    let overrides = Overrides {
        preset: args.preset,
        scheme: args.scheme,
        alphas: args.alphas,
        t_finals: args.t_finals,
        steps: args.steps,
        cells: args.cells,
        reference_steps: args.reference_steps,
        reference_scheme: args.reference_scheme,
        time_grid: args.time_grid,
        output_dir: args.output_dir,
        verbosity: if args.quiet {
            Some(0)
        } else if args.verbose > 0 {
            Some(1 + args.verbose)
        } else {
            None
        },
        jobs,
    };
    let cfg = match &args.config {
        Some(path) => RunConfig::load(path, &overrides)?,
        None => RunConfig::parse("", &overrides)?,
    };
    if args.config.is_none() && args.preset.is_none() {
        return Err(Failure::Usage("study needs --config or --preset".into()));
    }
    if let Some(n) = cfg.jobs {
        // a second initialization (e.g. a global --jobs already applied) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    fs::create_dir_all(&cfg.output_dir).map_err(|source| {
        Failure::Lib(Error::Io {
            path: cfg.output_dir.display().to_string(),
            source,
        })
    })?;
    let start = Instant::now();
    let mut csv = String::new();
    let mut tables = String::new();
    for (i, spec) in cfg.studies.iter().enumerate() {
        if cfg.verbosity > 0 {
            eprintln!(
                "study {}/{}: preset {}, {} scheme, {} runs",
                i + 1,
                cfg.studies.len(),
                spec.preset,
                spec.scheme,
                spec.alphas.len() * spec.t_finals.len() * (spec.steps.len() + 1)
            );
        }
        let t = Instant::now();
        let report = run_study(spec).map_err(|e| e.context(format!("study #{}", i + 1)))?;
        if cfg.verbosity > 1 {
            eprintln!("  done in {:.1} s", t.elapsed().as_secs_f64());
        }
        let part = to_csv(&report, spec.preset.name());
        if i == 0 {
            csv.push_str(&part);
        } else {
            csv.extend(part.lines().skip(1).map(|l| format!("{l}\n")));
        }
        if i > 0 {
            tables.push('\n');
        }
        tables.push_str(&to_markdown(&report, spec.preset.name()));
    }
    let elapsed = start.elapsed().as_secs_f64();

    let dir = &cfg.output_dir;
    write_file(&dir.join("results.csv"), &csv)?;
    write_file(&dir.join("tables.md"), &tables)?;
    write_file(&dir.join("config.effective"), &cfg.to_toml())?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let metadata = format!(
        "version = \"{}\"\nunix_time = {stamp}\nruntime_seconds = {elapsed:.3}\nthreads = {}\nstudies = {}\n",
        env!("CARGO_PKG_VERSION"),
        rayon::current_num_threads(),
        cfg.studies.len()
    );
    write_file(&dir.join("metadata.toml"), &metadata)?;
    if cfg.verbosity > 0 {
        print!("{tables}");
        eprintln!("wrote {} in {elapsed:.1} s", dir.display());
    }
    Ok(())
}

fn run_verify() -> Result<(), Failure> {
    let outcomes = verify::run_all();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        Err(Failure::Verify(failed))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(n) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Weights { alpha, method, n } => weights(alpha, method, n),
        Command::Solve {
            preset,
            scheme,
            alpha,
            t_final,
            steps,
            cells,
            output,
        } => solve(preset, scheme, alpha, t_final, steps, cells, output),
        Command::Study(args) => study(args, cli.jobs),
        Command::Verify => run_verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
        Err(Failure::Verify(n)) => {
            eprintln!("error: {n} check(s) failed");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
