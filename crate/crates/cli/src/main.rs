use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use trispec::counting::{counting_bounds, counting_function, BOUND_VALIDITY_MU};
use trispec::exact_spectra::{equilateral_spectrum, ratio_table, rectangle_spectrum, SymmetryClass};
use trispec::fem::{solve_extrapolated_with, solve_neumann_with, SolverOptions};
use trispec::geometry::triangle;
use trispec::mesh::Mesh;
use trispec::output::{render_svg, sweep_csv_string, write_spectrum_csv, write_table_csv};
use trispec::sweep::{minimize_mu4, sweep_aperture, sweep_rectangle, Family, SweepSolver, SweepSpec};
use trispec::verify::{verify_all, Config, REPORT_HEADER};
use trispec::Error;

const CONFIG_HELP: &str = "Config file keys (key = value, # comments):
  k                  0.967    constant K in the endpoint comparison
  b_star             2.14     endpoint height b*
  levels             5,6,7    refinement levels for the G solve
  max_level          9        largest mesh level allowed
  sweep_levels       4,5,6    refinement levels for aperture sweeps
  corollary_samples  34       apertures in the mu3 sweep (pi/3 is a node)
  stretch_triangles  20       random triangles in the stretching check
  stretch_level      4        mesh level in the stretching check
  grid               200      side of the (gamma, b) grid
  tail_max           1000000  largest index in the tail scan
  seed               2011     RNG seed

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 solver error.";

#[derive(Parser)]
#[command(name = "trispec", version, about = "Neumann eigenvalues of triangles and eigenvalue-sum checks", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    All,
    Symmetric,
    Antisymmetric,
}

impl From<Class> for SymmetryClass {
    fn from(c: Class) -> Self {
        match c {
            Class::All => SymmetryClass::All,
            Class::Symmetric => SymmetryClass::Symmetric,
            Class::Antisymmetric => SymmetryClass::Antisymmetric,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectrum of an equilateral triangle or a rectangle.
    Spectrum {
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Side length of the equilateral triangle.
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long, value_enum, default_value_t = Class::All)]
        class: Class,
        /// Width and height of a rectangle instead of the triangle.
        #[arg(long, num_args = 2, value_names = ["W", "H"])]
        rectangle: Option<Vec<f64>>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Counting function of the unit equilateral triangle and its bounds.
    Count {
        #[arg(long)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = Class::All)]
        class: Class,
    },
    /// Symmetric-to-full eigenvalue sum ratios.
    Ratios {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// FEM spectrum of T(a, b); three or more levels are extrapolated.
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_delimiter = ',', default_value = "5,6,7")]
        levels: Vec<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// mu_j D^2 across isosceles apertures.
    SweepAperture {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Highest eigenvalue index; indices 2..=count are reported.
        #[arg(long, default_value_t = 6)]
        count: usize,
        #[arg(long, value_delimiter = ',', default_value = "4,5,6")]
        levels: Vec<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// M_n D^2 of rectangles across aspect ratios.
    SweepRectangle {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Highest sum index; indices 2..=count are reported.
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Golden-section search for the smallest mu_4 D^2 over apertures.
    MinimizeMu4 {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "5,6,7")]
        levels: Vec<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every check; exit 0 only if all pass.
    VerifyAll {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
}

enum Failure {
    Verification,
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Range { .. } | Error::Config(_) | Error::Bracket(_) => Failure::Usage(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn options(seed: Option<u64>) -> SolverOptions {
    let mut o = SolverOptions::default();
    if let Some(s) = seed {
        o.seed = s;
    }
    o
}

fn pair(v: &Option<Vec<f64>>, default: [f64; 2]) -> [f64; 2] {
    v.as_ref().map_or(default, |v| [v[0], v[1]])
}

fn write_csv_and_svg(csv: &str, out_csv: &Option<PathBuf>, out_svg: &Option<PathBuf>, title: &str) -> Result<(), Failure> {
    sink(out_csv)?.write_all(csv.as_bytes())?;
    if let Some(p) = out_svg {
        std::fs::write(p, render_svg(csv, title)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum {
            count,
            side,
            class,
            rectangle,
            out_csv,
        } => {
            let s = match rectangle {
                Some(r) => rectangle_spectrum(r[0], r[1], count)?,
                None => equilateral_spectrum(count, side, class.into())?,
            };
            write_spectrum_csv(&s, sink(&out_csv)?)?;
        }
        Command::Count { mu, class } => {
            let c = counting_function(mu, class.into())?;
            println!("N({mu}) = {}", c.count);
            if c.near_ties > 0 {
                println!("warning: {} lattice values within rounding of mu", c.near_ties);
            }
            if mu > BOUND_VALIDITY_MU && !matches!(class, Class::Antisymmetric) {
                let b = counting_bounds(mu, class.into())?;
                if let Some(lo) = b.lower {
                    println!("lower bound {lo:.6}");
                }
                println!("upper bound {:.6}", b.upper);
            }
        }
        Command::Ratios { count, out_csv } => {
            let rows: Vec<Vec<String>> = ratio_table(count)?
                .iter()
                .map(|r| {
                    vec![
                        r.j.to_string(),
                        r.symmetric_sum.to_string(),
                        r.full_sum.to_string(),
                        r.ratio.to_string(),
                        r.bound.map_or_else(String::new, |b| format!("{}/{}", b.fraction().0, b.fraction().1)),
                        r.holds.to_string(),
                        r.equality.to_string(),
                    ]
                })
                .collect();
            write_table_csv(
                &["j", "symmetric_sum", "full_sum", "ratio", "bound", "holds", "equality"],
                &rows,
                sink(&out_csv)?,
            )?;
        }
        Command::Solve {
            a,
            b,
            count,
            levels,
            seed,
            out_csv,
        } => {
            let t = triangle(a, b)?;
            let opts = options(seed);
            let max_level = levels.iter().copied().max().unwrap_or(0).max(trispec::mesh::DEFAULT_MAX_LEVEL);
            let s = if levels.len() >= 3 {
                solve_extrapolated_with(&t, count, &levels, max_level, &opts)?.spectrum
            } else {
                let level = *levels.last().ok_or_else(|| Failure::Usage("no level given".into()))?;
                solve_neumann_with(&Mesh::uniform(&t, level, max_level)?, count, &opts)?.spectrum
            };
            write_spectrum_csv(&s, sink(&out_csv)?)?;
        }
        Command::SweepAperture {
            range,
            samples,
            count,
            levels,
            seed,
            out_csv,
            out_svg,
        } => {
            let spec = SweepSpec {
                family: Family::ApertureIsosceles,
                range: pair(&range, [PI / 7.0, 2.0 * PI / 3.0]),
                samples,
                n_values: (2..=count).collect(),
                solver: SweepSolver::Fem { levels },
            };
            let table = sweep_aperture(&spec, &options(seed))?;
            let csv = sweep_csv_string(&table)?;
            write_csv_and_svg(&csv, &out_csv, &out_svg, "normalized Neumann eigenvalues of isosceles triangles")?;
            if table.failures() > 0 {
                eprintln!("{} samples failed", table.failures());
                return Err(Failure::Solver("sweep incomplete".into()));
            }
        }
        Command::SweepRectangle {
            range,
            samples,
            count,
            out_csv,
            out_svg,
        } => {
            let spec = SweepSpec {
                family: Family::RectangleAspect,
                range: pair(&range, [1.0, 3.0]),
                samples,
                n_values: (2..=count).collect(),
                solver: SweepSolver::Exact,
            };
            let r = sweep_rectangle(&spec)?;
            let csv = sweep_csv_string(&r.table)?;
            write_csv_and_svg(&csv, &out_csv, &out_svg, "normalized eigenvalue sums of rectangles")?;
            eprintln!("square beaten for n in {:?}", r.beaten);
        }
        Command::MinimizeMu4 { bracket, levels, seed } => {
            let m = minimize_mu4(pair(&bracket, [0.45, 0.65]), &levels, &options(seed))?;
            println!("alpha* = {:.6}", m.alpha);
            println!("mu4 D^2 = {:.6}", m.value);
            println!("evaluations = {}", m.evaluations);
        }
        Command::VerifyAll { config, seed, out_csv } => {
            let mut cfg = match &config {
                Some(p) => Config::load(p)?,
                None => Config::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = verify_all(&cfg);
            print!("{}", report.summary());
            if let Some(p) = &out_csv {
                write_table_csv(&REPORT_HEADER, &report.csv_rows(), BufWriter::new(File::create(p)?))?;
            }
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
