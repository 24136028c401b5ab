mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use convexpoly::bounds::{farkas_witness, radius_r, unboundedness_ray, BoundsError};
use convexpoly::lp::{lp_feasible_point, LpStatus, Polyhedron};
use convexpoly::polynomial::{parse_polynomial, SparsePolynomial};
use convexpoly::rat::{self, Rational};
use convexpoly::solver::{
    sampled_convexity_check, solve, ConvexityCheck, SolveError, SolveOptions, SolveStatus,
};
use convexpoly::structure::{structure_with_bound, SearchMode, StructureError, StructureWithBound};
use serde_json::Value;

const EXIT_SOLVED: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNBOUNDED: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_NOT_CONVEX: u8 = 4;

#[derive(Parser)]
#[command(name = "convexpoly", version, about = "Exact convex polynomial programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize f over P to within eps, or certify that f is unbounded below.
    Solve(SolveArgs),
    /// Print the decomposition f(x) = fhat(Ux) - <w,x> and its quadratic lower bound.
    Decompose(ProblemArgs),
    /// Print the radius of a ball known to contain a minimizer.
    Bound(ProblemArgs),
    /// Print an unboundedness ray, or a Farkas witness that none exists.
    CertifyUnbounded(ProblemArgs),
    /// Sample the Hessian for a convexity violation.
    CheckConvexity(ConvexityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Randomized,
    Exhaustive,
}

#[derive(Args)]
struct ProblemArgs {
    /// Polynomial JSON file.
    #[arg(long)]
    poly: PathBuf,
    /// Constraint JSON file {"A": [[..]], "b": [..]}; omitted means all of R^n.
    #[arg(long)]
    constraints: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search for a point with positive definite Hessian.
    #[arg(long, value_enum, default_value = "randomized")]
    mode: Mode,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Accuracy as a rational, e.g. "1/1000000" or "1e-6".
    #[arg(long, default_value = "1/1048576")]
    eps: String,
}

#[derive(Args)]
struct ConvexityArgs {
    #[arg(long)]
    poly: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ProblemArgs {
    fn search_mode(&self) -> SearchMode {
        match self.mode {
            Mode::Randomized => SearchMode::Auto { seed: self.seed },
            Mode::Exhaustive => SearchMode::Exhaustive,
        }
    }

    fn load(&self) -> Result<(SparsePolynomial, Polyhedron)> {
        let f = read_poly(&self.poly)?;
        let p = match &self.constraints {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Polyhedron::parse(&text, f.n_vars())
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => Polyhedron::whole_space(f.n_vars()),
        };
        Ok((f, p))
    }
}

fn read_poly(path: &Path) -> Result<SparsePolynomial> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_polynomial(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Accepts `p/q`, integers, and exact decimals such as `0.001` or `1e-6`.
fn parse_eps(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.contains('/') || !t.contains(['.', 'e', 'E']) {
        return rat::parse_rational(t).with_context(|| format!("invalid --eps {s:?}"));
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().with_context(|| format!("invalid --eps {s:?}"))?),
        None => (t, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let scale = exp - frac_part.len() as i64;
    let m = rat::parse_rational(&digits).with_context(|| format!("invalid --eps {s:?}"))?;
    let ten = rat::int(10);
    Ok(if scale >= 0 {
        m * rat::rat_pow(&ten, scale as u32)
    } else {
        m / rat::rat_pow(&ten, (-scale) as u32)
    })
}

/// Runs the structure step, writing the outcome for the two terminal cases.
fn structure_or_exit(
    f: &SparsePolynomial,
    args: &ProblemArgs,
) -> Result<std::result::Result<StructureWithBound, u8>> {
    match structure_with_bound(f, args.search_mode()) {
        Ok(s) => Ok(Ok(s)),
        Err(StructureError::NotConvexEvidence { .. }) => {
            emit(args.out.as_deref(), &report::status("NotConvexEvidence"))?;
            Ok(Err(EXIT_NOT_CONVEX))
        }
        Err(e) => Err(e.into()),
    }
}

fn empty_exit(args: &ProblemArgs) -> Result<u8> {
    emit(args.out.as_deref(), &report::status("EmptyPolyhedron"))?;
    Ok(EXIT_EMPTY)
}

fn run_solve(args: &SolveArgs) -> Result<u8> {
    let eps = parse_eps(&args.eps)?;
    let pa = &args.problem;
    let (f, p) = pa.load()?;
    let options = SolveOptions {
        mode: pa.search_mode(),
    };
    let out = match solve(&f, &p, &eps, &options) {
        Ok(o) => o,
        Err(SolveError::EmptyPolyhedron) => return empty_exit(pa),
        Err(e) => return Err(e.into()),
    };
    emit(pa.out.as_deref(), &report::solve_outcome(&out))?;
    Ok(match out.status {
        SolveStatus::Solved => EXIT_SOLVED,
        SolveStatus::Unbounded => EXIT_UNBOUNDED,
        SolveStatus::NotConvexEvidence => EXIT_NOT_CONVEX,
    })
}

fn run_decompose(args: &ProblemArgs) -> Result<u8> {
    let f = read_poly(&args.poly)?;
    let s = match structure_or_exit(&f, args)? {
        Ok(s) => s,
        Err(code) => return Ok(code),
    };
    emit(args.out.as_deref(), &report::structure(&s))?;
    Ok(EXIT_SOLVED)
}

fn run_bound(args: &ProblemArgs) -> Result<u8> {
    let (f, p) = args.load()?;
    let feas = lp_feasible_point(&p);
    if feas.status == LpStatus::Infeasible {
        return empty_exit(args);
    }
    let s = match structure_or_exit(&f, args)? {
        Ok(s) => s,
        Err(code) => return Ok(code),
    };
    if let Some(cert) = unboundedness_ray(&p, &s.decomposition) {
        let origin = feas.point.expect("feasible point");
        emit(args.out.as_deref(), &report::unbounded(&cert.ray, &origin))?;
        return Ok(EXIT_UNBOUNDED);
    }
    match radius_r(&f, &p, &s) {
        Ok(rb) => {
            emit(args.out.as_deref(), &report::radius(&rb))?;
            Ok(EXIT_SOLVED)
        }
        Err(BoundsError::EmptyPolyhedron) => empty_exit(args),
        Err(e) => Err(e.into()),
    }
}

fn run_certify(args: &ProblemArgs) -> Result<u8> {
    let (f, p) = args.load()?;
    let feas = lp_feasible_point(&p);
    if feas.status == LpStatus::Infeasible {
        return empty_exit(args);
    }
    let s = match structure_or_exit(&f, args)? {
        Ok(s) => s,
        Err(code) => return Ok(code),
    };
    if let Some(cert) = unboundedness_ray(&p, &s.decomposition) {
        let origin = feas.point.expect("feasible point");
        emit(args.out.as_deref(), &report::unbounded(&cert.ray, &origin))?;
        return Ok(EXIT_UNBOUNDED);
    }
    let w = farkas_witness(&p, &s.decomposition)?;
    emit(args.out.as_deref(), &report::witness(&w))?;
    Ok(EXIT_SOLVED)
}

fn run_convexity(args: &ConvexityArgs) -> Result<u8> {
    anyhow::ensure!(args.trials >= 1, "--trials must be at least 1");
    let f = read_poly(&args.poly)?;
    let c = sampled_convexity_check(&f, args.trials, args.seed);
    emit(args.out.as_deref(), &report::convexity(&c, args.trials))?;
    Ok(match c {
        ConvexityCheck::NoViolation => EXIT_SOLVED,
        ConvexityCheck::ViolationAt(_) => EXIT_NOT_CONVEX,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Decompose(a) => run_decompose(a),
        Command::Bound(a) => run_bound(a),
        Command::CertifyUnbounded(a) => run_certify(a),
        Command::CheckConvexity(a) => run_convexity(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
