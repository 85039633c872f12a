//! Command-line front end for `hh-core`.
//!
//! Every subcommand prints JSON (or CSV where noted) to stdout, or to the
//! file given by `--out`. Exit codes:
//!
//! * 0: success, every checked bound holds
//! * 1: some bound is violated beyond its error estimate
//! * 2: invalid input (flags, polygon file, grid too coarse)
//! * 3: the solver did not converge or its result is untrusted

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hh_core::experiments::{
    box_limit_check, box_limit_series, eta_sweep, rectangle_decay_sweep, rectangle_series_summary, shape_search,
    write_decay_csv_to, write_eta_csv_to, write_search_jsonl, RectangleOracle, SweepRow,
};
use hh_core::functionals::{hh_ratio_with_error, shipped_test_functions, verify_all_bounds_with_alphas};
use hh_core::geometry::{simplex_family, ConvexPolygon};
use hh_core::io::{format_f64, read_polygon, to_json_string};
use hh_core::solver::{refine_and_extrapolate, DEFAULT_LEVELS, DEFAULT_TOL};
use hh_core::{HhError, SolverConfig};
use log::info;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hh", version, about = "Torsion solver and Hermite-Hadamard constants on convex polygons")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the torsion problem and print the extrapolated summary.
    ///
    /// CSV columns (one row per grid level): h, unknowns, iterations,
    /// residual, u_max, grad_max.
    Solve {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve and check every inequality; exit 1 if any is violated.
    ///
    /// CSV columns: name, bound, attained, margin, error, pass.
    Verify {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Comma-separated exponents for c_{2,alpha}, each in [-4, 2].
        #[arg(long, value_delimiter = ',', value_parser = parse_alpha, default_value = "0,1,2")]
        alphas: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hermite-Hadamard ratios of the shipped subharmonic test functions.
    ///
    /// CSV columns: name, ratio, error, domain_integral, boundary_integral.
    HhRatio {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Triangles with base eta and height 1.
    ///
    /// CSV columns: eta, area, perimeter, inradius, diameter, umax, gradmax,
    /// c2, margin_c2_upper, margin_quant.
    SweepEta {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
        etas: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rectangles (-1,1) x (-R,R) and the fitted decay of c_{2,alpha}.
    ///
    /// CSV columns: R, c_alpha, D_over_r.
    SweepRect {
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
        rs: Vec<f64>,
        /// Exponent alpha in [-4, 2].
        #[arg(long, value_parser = parse_alpha, default_value = "0")]
        alpha: f64,
        #[arg(long, value_enum, default_value = "series")]
        oracle: OracleKind,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Normal derivative at the center of the long face of (0, 1-eps) x (-r, r).
    BoxLimit {
        #[arg(long, default_value = "0.1")]
        eps: f64,
        #[arg(long, default_value = "4")]
        r: f64,
        /// Also run the finite-difference solver.
        #[arg(long)]
        solve: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hill-climb c_{2,alpha} over convex n-gons of area 1.
    ///
    /// Prints the final state as JSON; `--history` writes accepted moves as
    /// JSON lines (iteration, vertex, objective, vertices).
    Search {
        #[arg(long, default_value = "6")]
        n: usize,
        #[arg(long, value_parser = parse_alpha, default_value = "1")]
        alpha: f64,
        #[arg(long, default_value = "500")]
        iters: usize,
        #[arg(long, default_value = "42")]
        seed: u64,
        #[arg(long)]
        history: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the solver with the rectangle series; exit 1 beyond --rel-tol.
    OracleCheck {
        #[arg(long, default_value = "0.5")]
        half_width: f64,
        #[arg(long, default_value = "0.5")]
        half_height: f64,
        #[arg(long, default_value = "1e-3")]
        rel_tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Regular n-gon of circumradius 1 (default n = 512).
    Disk,
    /// Unit square.
    Square,
    /// Rectangle (-1,1) x (-R,R).
    Rect,
    /// Triangle with base eta and height 1.
    Simplex,
    /// Regular n-gon of area 1 (default n = 6).
    RegularNgon,
}

#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    #[arg(long, value_enum, conflicts_with = "polygon", required_unless_present = "polygon")]
    pub family: Option<Family>,
    /// JSON file `{"vertices": [[x, y], ...]}`.
    #[arg(long)]
    pub polygon: Option<PathBuf>,
    /// Vertex count for `disk` and `regular-ngon`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-length R for `rect`.
    #[arg(long = "R", alias = "rect-r", default_value = "1")]
    pub rect_r: f64,
    #[arg(long, default_value = "8")]
    pub eta: f64,
}

impl DomainArgs {
    pub fn polygon(&self) -> hh_core::Result<ConvexPolygon> {
        if let Some(path) = &self.polygon {
            return read_polygon(path);
        }
        match self.family.expect("clap enforces family or polygon") {
            Family::Disk => ConvexPolygon::regular(self.n.unwrap_or(512), 1.0),
            Family::Square => Ok(ConvexPolygon::unit_square()),
            Family::Rect => ConvexPolygon::rectangle(1.0, self.rect_r),
            Family::Simplex => simplex_family(self.eta),
            Family::RegularNgon => ConvexPolygon::regular(self.n.unwrap_or(6), 1.0)?.area_normalized(),
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverArgs {
    /// Coarsest grid spacing (capped at r/12).
    #[arg(long = "h0", alias = "h", default_value = "0.015625")]
    pub h0: f64,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

impl SolverArgs {
    pub fn config(&self) -> hh_core::Result<SolverConfig> {
        let c = SolverConfig::new(self.h0, self.levels).with_tol(self.tol);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl OutputArgs {
    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn json<T: Serialize + ?Sized>(&self, value: &T) -> hh_core::Result<()> {
        let mut w = self.sink()?;
        writeln!(w, "{}", to_json_string(value)?)?;
        Ok(())
    }

    fn csv<R: IntoIterator<Item = Vec<String>>>(&self, header: &[&str], rows: R) -> hh_core::Result<()> {
        let mut w = csv::Writer::from_writer(self.sink()?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Series,
    Solver,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if (-4.0..=2.0).contains(&a) {
        Ok(a)
    } else {
        Err(format!("alpha must lie in [-4, 2], got {a}"))
    }
}

/// Maps a library error to the process exit code.
pub fn exit_code(e: &HhError) -> i32 {
    match e {
        HhError::NotConverged { .. } | HhError::StencilFailure { .. } | HhError::Untrusted(_) | HhError::LpFailure(_) => {
            EXIT_NOT_CONVERGED
        }
        _ => EXIT_INPUT,
    }
}

#[derive(Serialize)]
struct RatioRow {
    name: String,
    ratio: Option<f64>,
    error: f64,
    domain_integral: f64,
    boundary_integral: f64,
}

#[derive(Serialize)]
struct BoxLimitOutput {
    eps: f64,
    r: f64,
    series: f64,
    solver: Option<f64>,
}

#[derive(Serialize)]
struct OracleOutput {
    half_width: f64,
    half_height: f64,
    series_u_max: f64,
    series_grad_max: f64,
    solver_u_max: f64,
    solver_grad_max: f64,
    rel_err_u_max: f64,
    rel_err_grad_max: f64,
    observed_order: Option<f64>,
    pass: bool,
}

fn sweep_code(rows: &[SweepRow]) -> i32 {
    if rows.iter().any(|r| r.failure.is_none() && !r.all_pass) {
        EXIT_VIOLATION
    } else if rows.iter().any(|r| r.failure.is_some()) {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    }
}

fn execute(cmd: &Command) -> hh_core::Result<i32> {
    match cmd {
        Command::Solve { domain, solver, output } => {
            let p = domain.polygon()?;
            let s = refine_and_extrapolate(&p, &solver.config()?)?;
            match output.format {
                Format::Json => output.json(&s)?,
                Format::Csv => output.csv(
                    &["h", "unknowns", "iterations", "residual", "u_max", "grad_max"],
                    s.levels.iter().map(|l| {
                        vec![
                            format_f64(l.h),
                            l.unknowns.to_string(),
                            l.iterations.to_string(),
                            format_f64(l.residual),
                            format_f64(l.u_max),
                            format_f64(l.grad_max),
                        ]
                    }),
                )?,
            }
            Ok(if s.trusted { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
        Command::Verify {
            domain,
            solver,
            alphas,
            output,
        } => {
            let p = domain.polygon()?;
            let s = refine_and_extrapolate(&p, &solver.config()?)?;
            let report = verify_all_bounds_with_alphas(&p, &s, alphas)?;
            match output.format {
                Format::Json => output.json(&report)?,
                Format::Csv => output.csv(
                    &["name", "bound", "attained", "margin", "error", "pass"],
                    report.bound_margins.iter().map(|b| {
                        vec![
                            b.name.clone(),
                            format_f64(b.bound),
                            format_f64(b.attained),
                            format_f64(b.margin),
                            format_f64(b.error),
                            b.pass.to_string(),
                        ]
                    }),
                )?,
            }
            for f in report.failures() {
                log::warn!("{} violated: margin {} below -{}", f.name, f.margin, f.error);
            }
            Ok(if report.all_pass { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::HhRatio { domain, output } => {
            let p = domain.polygon()?;
            let mut rows = Vec::new();
            for f in shipped_test_functions(&p) {
                let r = hh_ratio_with_error(&p, &f)?;
                rows.push(RatioRow {
                    name: f.name.clone(),
                    ratio: r.ratio,
                    error: r.error,
                    domain_integral: r.domain_integral,
                    boundary_integral: r.boundary_integral,
                });
            }
            match output.format {
                Format::Json => output.json(&rows)?,
                Format::Csv => output.csv(
                    &["name", "ratio", "error", "domain_integral", "boundary_integral"],
                    rows.iter().map(|r| {
                        vec![
                            r.name.clone(),
                            format_f64(r.ratio.unwrap_or(f64::INFINITY)),
                            format_f64(r.error),
                            format_f64(r.domain_integral),
                            format_f64(r.boundary_integral),
                        ]
                    }),
                )?,
            }
            let violated = rows.iter().any(|r| r.ratio.is_some_and(|rho| rho > 2.0 + r.error));
            Ok(if violated { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::SweepEta { etas, solver, output } => {
            let rows = eta_sweep(etas, &solver.config()?)?;
            match output.format {
                Format::Json => output.json(&rows)?,
                Format::Csv => write_eta_csv_to(&rows, output.sink()?)?,
            }
            Ok(sweep_code(&rows))
        }
        Command::SweepRect {
            rs,
            alpha,
            oracle,
            solver,
            output,
        } => {
            let oracle = match oracle {
                OracleKind::Series => RectangleOracle::Series,
                OracleKind::Solver => RectangleOracle::Solver(solver.config()?),
            };
            let sweep = rectangle_decay_sweep(rs, *alpha, oracle)?;
            info!("fitted slope {} (expected {})", sweep.slope, sweep.expected_slope);
            match output.format {
                Format::Json => output.json(&sweep)?,
                Format::Csv => write_decay_csv_to(&sweep, output.sink()?)?,
            }
            Ok(sweep_code(&sweep.rows))
        }
        Command::BoxLimit {
            eps,
            r,
            solve,
            solver,
            output,
        } => {
            let series = box_limit_series(*eps, *r)?;
            let solved = if *solve {
                Some(box_limit_check(*eps, *r, &solver.config()?)?)
            } else {
                None
            };
            output.json(&BoxLimitOutput {
                eps: *eps,
                r: *r,
                series,
                solver: solved,
            })?;
            Ok(EXIT_OK)
        }
        Command::Search {
            n,
            alpha,
            iters,
            seed,
            history,
            solver,
            output,
        } => {
            let state = shape_search(*n, *alpha, *iters, *seed, &solver.config()?)?;
            if let Some(path) = history {
                write_search_jsonl(&state, path)?;
            }
            output.json(&state)?;
            Ok(EXIT_OK)
        }
        Command::OracleCheck {
            half_width,
            half_height,
            rel_tol,
            solver,
            output,
        } => {
            let series = rectangle_series_summary(*half_width, *half_height)?;
            let p = ConvexPolygon::rectangle(*half_width, *half_height)?;
            let s = refine_and_extrapolate(&p, &solver.config()?)?;
            let eu = (s.u_max - series.u_max).abs() / series.u_max;
            let eg = (s.grad_max - series.grad_max).abs() / series.grad_max;
            let pass = eu <= *rel_tol && eg <= *rel_tol;
            output.json(&OracleOutput {
                half_width: *half_width,
                half_height: *half_height,
                series_u_max: series.u_max,
                series_grad_max: series.grad_max,
                solver_u_max: s.u_max,
                solver_grad_max: s.grad_max,
                rel_err_u_max: eu,
                rel_err_grad_max: eg,
                observed_order: s.observed_order,
                pass,
            })?;
            Ok(if !s.trusted {
                EXIT_NOT_CONVERGED
            } else if pass {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_INPUT;
    }
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
