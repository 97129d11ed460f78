use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oscilab::bounds::zero_count_bound;
use oscilab::counterexample::{
    build_system, closed_form, CounterexampleSpec, LinearSystem, NodeSet, NodeStrategy,
    DEFAULT_MARGIN,
};
use oscilab::experiment::{self, DemoOptions, StressOptions, DEFAULT_ZERO_TOL};
use oscilab::ode::{count_sign_changes, integrate_linear, IntegratorConfig};
use oscilab::{Error, Interval};

/// Bounded-coefficient linear systems with arbitrarily many zeros.
#[derive(Parser)]
#[command(name = "oscilab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and certify one counterexample system.
    Construct {
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        nodes: NodeArgs,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        /// Directory receiving spec.json and system.json (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of certified and numeric zero counts for d = 1..d-max.
    Demo {
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        #[arg(long, value_enum, default_value_t = Strategy::Chebyshev)]
        strategy: Strategy,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[command(flatten)]
        tol: TolArgs,
        /// CSV destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the scalar zero-count bound on random equations.
    Stress {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, env = "OSCILAB_SEED", default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        /// Per-trial CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print n - 1 + (n / ln 2) C (beta - alpha).
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long = "C", short = 'c')]
        c: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Counterexample whose coefficients are small on a complex neighborhood.
    Complex {
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        nodes: NodeArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        /// Directory receiving spec.json and system.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a system (or spec) JSON file and count zeros per component.
    Count {
        /// System or spec JSON.
        file: PathBuf,
        /// Initial state at the left end of the domain; specs default to
        /// their closed-form solution.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// 1-based component; all components if omitted.
        #[arg(long)]
        component: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
        zero_tol: f64,
        #[command(flatten)]
        tol: TolArgs,
        /// CSV file receiving the sampled trajectory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Chebyshev,
    Uniform,
    Explicit,
}

#[derive(Args)]
struct NodeArgs {
    #[arg(long, value_enum)]
    strategy: Option<Strategy>,
    /// Comma-separated node list (implies the explicit strategy).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    nodes: Option<Vec<f64>>,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
}

impl TolArgs {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig::with_tolerances(self.rtol, self.atol)
    }
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidBracket { .. }
            | Error::DimensionMismatch { .. }
            | Error::ZeroPolynomial
            | Error::Json(_)
            | Error::Io(_)
            | Error::Csv(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violated: {m}");
            ExitCode::from(1)
        }
    }
}

fn node_set(d: Option<usize>, args: &NodeArgs) -> Result<NodeSet, Failure> {
    let strategy = match (args.strategy, &args.nodes) {
        (Some(Strategy::Explicit) | None, Some(list)) => NodeStrategy::Explicit(list.clone()),
        (Some(Strategy::Explicit), None) => {
            return Err(Failure::Usage("the explicit strategy needs --nodes".into()))
        }
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "--nodes requires the explicit strategy".into(),
            ))
        }
        (Some(Strategy::Uniform), None) => NodeStrategy::Uniform,
        (Some(Strategy::Chebyshev) | None, None) => NodeStrategy::Chebyshev,
    };
    let d = match (&strategy, d) {
        (NodeStrategy::Explicit(list), Some(d)) if d != list.len() => {
            return Err(Failure::Usage(format!(
                "--d {d} does not match {} nodes",
                list.len()
            )))
        }
        (NodeStrategy::Explicit(list), _) => list.len(),
        (_, Some(d)) => d,
        (_, None) => return Err(Failure::Usage("--d is required".into())),
    };
    Ok(NodeSet::new(&strategy, d)?)
}

fn write_spec(spec: &CounterexampleSpec, out: Option<&Path>) -> Result<(), Failure> {
    let spec_json = spec.to_json()?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("spec.json"), spec_json + "\n")?;
            fs::write(
                dir.join("system.json"),
                build_system(spec).to_json()? + "\n",
            )?;
        }
        None => println!("{spec_json}"),
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Construct {
            d,
            nodes,
            margin,
            out,
        } => {
            let set = node_set(d, &nodes)?;
            let spec = CounterexampleSpec::construct(&set, margin)?;
            eprintln!(
                "d = {}  lambda = {}  sup(|a| + |a' + a^2|) in [{}, {}]",
                spec.d(),
                spec.lambda,
                spec.norm_certificate.lower,
                spec.norm_certificate.upper
            );
            write_spec(&spec, out.as_deref())
        }
        Command::Demo {
            d_max,
            strategy,
            margin,
            tol,
            out,
        } => {
            let strategy = match strategy {
                Strategy::Chebyshev => NodeStrategy::Chebyshev,
                Strategy::Uniform => NodeStrategy::Uniform,
                Strategy::Explicit => {
                    return Err(Failure::Usage("demo supports chebyshev or uniform".into()))
                }
            };
            let opts = DemoOptions {
                d_max,
                strategy,
                margin,
                config: tol.config(),
                ..Default::default()
            };
            let rows = experiment::run_demo(&opts)?;
            experiment::write_rows(output(out.as_deref())?, &rows)?;
            let problems: Vec<String> = rows.iter().flat_map(|r| r.violations()).collect();
            if problems.is_empty() {
                Ok(())
            } else {
                Err(Failure::Invariant(problems.join("; ")))
            }
        }
        Command::Stress {
            trials,
            n_max,
            seed,
            tol,
            out,
        } => {
            let opts = StressOptions {
                trials,
                n_max,
                seed,
                config: tol.config(),
                ..Default::default()
            };
            let (report, rows) = experiment::run_stress(&opts)?;
            if let Some(path) = out.as_deref() {
                experiment::write_rows(output(Some(path))?, &rows)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(Error::from)?
            );
            if report.violations == 0 {
                Ok(())
            } else {
                Err(Failure::Invariant(format!(
                    "{} bound violations",
                    report.violations
                )))
            }
        }
        Command::Bound { n, c, alpha, beta } => {
            println!("{}", zero_count_bound(n, c, alpha, beta)?);
            Ok(())
        }
        Command::Complex {
            d,
            nodes,
            epsilon,
            delta,
            out,
        } => {
            let set = node_set(d, &nodes)?;
            let (report, spec) = experiment::run_complex(&set, epsilon, delta)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(Error::from)?
            );
            if let Some(dir) = out.as_deref() {
                write_spec(&spec, Some(dir))?;
            }
            if report.zeros_certified == report.d && report.disk_upper <= delta {
                Ok(())
            } else {
                Err(Failure::Invariant(
                    "complex certificate does not hold".into(),
                ))
            }
        }
        Command::Count {
            file,
            x0,
            component,
            zero_tol,
            tol,
            out,
        } => {
            let text = fs::read_to_string(&file)?;
            let (system, default_x0) = match CounterexampleSpec::from_json(&text) {
                Ok(spec) => {
                    let s = closed_form(&spec, -1.0);
                    (build_system(&spec), Some(vec![s.phi1, s.phi2]))
                }
                Err(_) => (LinearSystem::from_json(&text)?, None),
            };
            let x0 = x0
                .or(default_x0)
                .ok_or_else(|| Failure::Usage("--x0 is required for a bare system".into()))?;
            let domain: Interval = system.domain();
            let sol = integrate_linear(&system, &x0, domain, &tol.config())?;
            if let Some(path) = out.as_deref() {
                sol.write_csv(output(Some(path))?, 1000)?;
            }
            let components: Vec<usize> = match component {
                Some(0) => return Err(Failure::Usage("components are numbered from 1".into())),
                Some(c) => vec![c - 1],
                None => (0..system.dim()).collect(),
            };
            let reports = components
                .into_iter()
                .map(|c| count_sign_changes(&sol, c, domain, zero_tol))
                .collect::<oscilab::Result<Vec<_>>>()?;
            println!(
                "{}",
                serde_json::to_string_pretty(&reports).map_err(Error::from)?
            );
            Ok(())
        }
    }
}
