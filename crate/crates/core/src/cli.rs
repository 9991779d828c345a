//! Command-line front end. [`run`] parses the arguments, dispatches and
//! returns the process exit code; output goes to the given writers.
//!
//! Exit codes: 0 success or optimal, 1 usage error, 2 infeasible,
//! 3 budget stopped, 4 I/O or parse error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cones::{cone_member, intersect_many, witness_bound};
use crate::error::Error;
use crate::format::{
    format_vector, parse_generator_sets, parse_instance, parse_matrix, parse_multisets, parse_vectors,
    serialize_instance, serialize_matrix, Instance,
};
use crate::generate::{random_tree, random_two_stage, TreeShape, TwoStageShape};
use crate::graver::{graver_basis, graver_norm_bound};
use crate::lowerbound::{analytic_witness, generate, min_first_coordinate, Family};
use crate::multistage::{solve_multistage, TreeInstance};
use crate::steinitz::{prefix_radius, steinitz_reorder};
use crate::subrep::{find_common_submultisets, subrep_size_bound};
use crate::twostage::{solve, HeadCap, SolveReport, SolveStatus, SolverConfig, DEFAULT_MAX_ITERATIONS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "blockgraver", version, about = "Graver-basis tools for block-structured integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a two-stage or tree instance by augmentation.
    Solve(SolveArgs),
    /// Graver basis of a small matrix.
    Graver {
        /// Matrix file.
        file: PathBuf,
        /// One-norm cap; defaults to the complete-basis bound.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Generating set of the intersection of integer cones, with witnesses.
    ConeIntersect {
        /// Generator-set files; their sets are pooled.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Reorder a zero-sum family so that all prefix sums stay small.
    Steinitz {
        /// Vector file.
        file: PathBuf,
    },
    /// Equal-sum submultisets of multisets with a common total.
    VerifyLemma1 {
        /// Multiset files; their multisets are pooled.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Lower-bound matrix with its certificate.
    LbGen {
        #[arg(long, value_parser = ["harmonic", "encoded"])]
        family: String,
        #[arg(long)]
        delta: u64,
        #[arg(long, default_value_t = 1)]
        s: u64,
    },
    /// Seeded random instance, feasible by construction.
    GenInstance(GenArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance file; may be omitted when --seed is given.
    file: Option<PathBuf>,
    /// Use the tree solver (two-stage files are lifted).
    #[arg(long)]
    tree: bool,
    /// Fixed head cap. Without a value the explicit Graver bound is used.
    #[arg(long = "exact-L", value_name = "L", num_args = 0..=1, default_missing_value = "bound")]
    exact_l: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iter: usize,
    /// Solve a generated instance instead of a file.
    #[arg(long)]
    seed: Option<u64>,
    /// Emit the full structured report.
    #[arg(long)]
    report: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    parallel_width: usize,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    /// Generate a tree instance; --branching gives children per level.
    #[arg(long)]
    tree: bool,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, default_value_t = 2)]
    delta: i64,
    #[arg(long, default_value_t = 3)]
    width: i64,
    #[arg(long, default_value_t = 3)]
    cost: i64,
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    branching: Vec<usize>,
    /// Columns per depth, root first; defaults to one per level.
    #[arg(long, value_delimiter = ',')]
    cols: Vec<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidInstance(_) | Error::Dimension(_) => EXIT_IO,
            Error::BudgetExceeded { .. } | Error::BoundTooLarge { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot read {}: {e}", path.display()) })
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_IO, message: format!("write failed: {e}") })
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Solve(args) => cmd_solve(args, out, err),
        Command::Graver { file, cap } => cmd_graver(&file, cap, out),
        Command::ConeIntersect { files } => cmd_cones(&files, out),
        Command::Steinitz { file } => cmd_steinitz(&file, out),
        Command::VerifyLemma1 { files } => cmd_lemma1(&files, out),
        Command::LbGen { family, delta, s } => cmd_lb_gen(&family, delta, s, out),
        Command::GenInstance(args) => cmd_gen(args, out),
    }
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let head_cap = match args.exact_l.as_deref() {
        None => HeadCap::Adaptive,
        Some("bound") => HeadCap::TheoremBound,
        Some(v) => match v.parse::<u64>() {
            Ok(l) if l >= 1 => HeadCap::Exact(l),
            _ => return Err(Failure { code: EXIT_USAGE, message: format!("--exact-L expects an integer >= 1, got {v}") }),
        },
    };
    if args.max_iter < 1 {
        return Err(Failure { code: EXIT_USAGE, message: "--max-iter must be at least 1".into() });
    }
    let config = SolverConfig {
        head_cap,
        max_iterations: args.max_iter,
        parallel_width: args.parallel_width,
        ..SolverConfig::default()
    };
    let instance = match (&args.file, args.seed) {
        (Some(path), _) => parse_instance(&read(path)?)?,
        (None, Some(seed)) => Instance::TwoStage(random_two_stage(seed, &TwoStageShape::default())?),
        (None, None) => return Err(Failure { code: EXIT_USAGE, message: "give an instance file or --seed".into() }),
    };
    let started = Instant::now();
    let report = match (&instance, args.tree) {
        (Instance::TwoStage(i), false) => solve(i, &config)?,
        (Instance::TwoStage(i), true) => solve_multistage(&TreeInstance::from_two_stage(i)?, &config)?,
        (Instance::Tree(t), _) => solve_multistage(t, &config)?,
    };
    let _ = writeln!(err, "wall time: {} ms", started.elapsed().as_millis());
    let text = if args.report { render_report(&report, &config, args.seed) } else { render_summary(&report) };
    emit(out, &text)?;
    if report.status == SolveStatus::BudgetStopped {
        let _ = writeln!(err, "note: stopped before optimality was certified (head cap {})", report.final_head_cap);
    }
    Ok(match report.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::BudgetStopped => EXIT_BUDGET,
    })
}

fn render_summary(report: &SolveReport) -> String {
    let mut s = format!("status = \"{}\"\n", report.status.as_str());
    if let (Some(v), Some(x)) = (report.objective_value, &report.solution) {
        let _ = writeln!(s, "objective = {v}");
        let _ = writeln!(s, "solution = {}", format_vector(x));
    }
    s
}

/// Deterministic report; timing goes to stderr.
pub fn render_report(report: &SolveReport, config: &SolverConfig, seed: Option<u64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[report]");
    let _ = writeln!(s, "status = \"{}\"", report.status.as_str());
    let mode = match config.head_cap {
        HeadCap::Adaptive => "adaptive".to_string(),
        HeadCap::Exact(l) => format!("exact {l}"),
        HeadCap::TheoremBound => "bound".to_string(),
    };
    let _ = writeln!(s, "head_cap_mode = \"{mode}\"");
    let _ = writeln!(s, "final_head_cap = {}", report.final_head_cap);
    if let Some(seed) = seed {
        let _ = writeln!(s, "seed = {seed}");
    }
    if let Some(v) = report.objective_value {
        let _ = writeln!(s, "objective = {v}");
    }
    if let Some(v) = report.initial_value {
        let _ = writeln!(s, "initial_objective = {v}");
    }
    let _ = writeln!(s, "iterations = {}", report.iterations);
    let _ = writeln!(s, "phase_one_iterations = {}", report.phase_one_iterations);
    if let Some(x) = &report.solution {
        let _ = writeln!(s, "solution = {}", format_vector(x));
    }
    for a in &report.augmentations {
        let _ = writeln!(s, "\n[[augmentation]]");
        let _ = writeln!(s, "head = {}", format_vector(&a.head));
        let _ = writeln!(s, "lambda = {}", a.lambda);
        let _ = writeln!(s, "gain = {}", a.gain);
        let _ = writeln!(s, "cycle = {}", format_vector(&a.cycle));
    }
    s
}

fn cmd_graver(file: &Path, cap: Option<u64>, out: &mut dyn Write) -> Result<i32, Failure> {
    let m = parse_matrix(&read(file)?)?;
    let bound = graver_norm_bound(m.rows().max(1) as u64, m.delta().max(1) as u64)?;
    let cap = match cap {
        Some(c) => c,
        None => u64::try_from(&bound).map_err(|_| Error::BoundTooLarge {
            log2_estimate: bound.bits() as f64,
            max_bits: 64,
        })?,
    };
    let basis = graver_basis(&m, cap)?;
    let mut s = String::new();
    let _ = writeln!(s, "bound = {bound}");
    let _ = writeln!(s, "cap = {cap}");
    let _ = writeln!(s, "max_norm = {}", basis.max_norm1());
    let _ = writeln!(s, "count = {}", basis.elements().len());
    let _ = writeln!(s, "truncated = {}", basis.is_truncated());
    let _ = writeln!(s, "elements = [");
    for g in basis.elements() {
        let _ = writeln!(s, "    {},", format_vector(&g));
    }
    let _ = writeln!(s, "]");
    emit(out, &s)?;
    Ok(EXIT_OK)
}

type Pooled<T> = (Vec<T>, Option<i64>);

fn pooled<T>(files: &[PathBuf], parse: fn(&str) -> crate::Result<Pooled<T>>) -> Result<Pooled<T>, Failure> {
    let mut all = Vec::new();
    let mut delta: Option<i64> = None;
    for f in files {
        let (items, d) = parse(&read(f)?)?;
        all.extend(items);
        delta = delta.max(d);
    }
    Ok((all, delta))
}

fn cmd_cones(files: &[PathBuf], out: &mut dyn Write) -> Result<i32, Failure> {
    let (sets, delta) = pooled(files, parse_generator_sets)?;
    let delta = delta.unwrap_or_else(|| sets.iter().map(|s| s.delta()).max().unwrap_or(1)).max(1);
    let result = intersect_many(&sets, delta)?;
    let d = sets.first().map_or(0, |s| s.dim());
    let mut s = String::new();
    let _ = writeln!(s, "dim = {d}");
    let _ = writeln!(s, "delta = {delta}");
    match witness_bound(d as u64, delta as u64, sets.len() as u64) {
        Ok(b) => {
            let _ = writeln!(s, "witness_bound = \"{b}\"");
        }
        Err(_) => {
            let _ = writeln!(s, "witness_bound = \"too large\"");
        }
    }
    let _ = writeln!(s, "count = {}", result.set.len());
    // Witnesses index the generators in this canonical order.
    for set in &sets {
        let gs: Vec<String> = set.generators().iter().map(|g| format_vector(g)).collect();
        let _ = writeln!(s, "\n[[cone]]\ngenerators = [{}]", gs.join(", "));
    }
    for (g, ws) in result.set.generators().iter().zip(&result.witnesses) {
        let _ = writeln!(s, "\n[[generator]]");
        let _ = writeln!(s, "vector = {}", format_vector(g));
        let ws: Vec<String> = ws.iter().map(|w| format_vector(w)).collect();
        let _ = writeln!(s, "witnesses = [{}]", ws.join(", "));
    }
    emit(out, &s)?;
    // Membership of each generator is re-derived independently.
    for g in result.set.generators() {
        for set in &sets {
            if cone_member(set, g)?.is_none() {
                return Err(Failure { code: EXIT_USAGE, message: format!("generator {g} failed re-verification") });
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_steinitz(file: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let (vectors, delta) = parse_vectors(&read(file)?)?;
    let delta = delta.unwrap_or_else(|| vectors.iter().filter_map(|v| v.norm_inf().ok()).max().unwrap_or(0));
    let perm = steinitz_reorder(&vectors, delta)?;
    let radius = prefix_radius(&vectors, &perm)?;
    let d = vectors.first().map_or(0, |v| v.len()) as i64;
    let bound = d * delta;
    let perm: Vec<i64> = perm.iter().map(|&i| i as i64).collect();
    let s = format!(
        "permutation = {}\nprefix_radius = {radius}\nbound = {bound}\nwithin_bound = {}\n",
        format_vector(&perm),
        radius <= bound
    );
    emit(out, &s)?;
    Ok(EXIT_OK)
}

fn cmd_lemma1(files: &[PathBuf], out: &mut dyn Write) -> Result<i32, Failure> {
    let (sets, delta) = pooled(files, parse_multisets)?;
    let delta = delta.unwrap_or_else(|| {
        sets.iter().flat_map(|s| s.entries().flat_map(|(v, _)| v.iter().map(|x| x.abs()).collect::<Vec<_>>())).max().unwrap_or(0)
    });
    let found = find_common_submultisets(&sets, delta)?;
    let d = sets.first().map_or(0, |s| s.dim());
    let largest = found.subsets.iter().map(|s| s.size()).max().unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "common_sum = {}", format_vector(&found.common_sum));
    let _ = writeln!(s, "largest_subset = {largest}");
    match subrep_size_bound(d.max(1) as u64, delta.max(1) as u64) {
        Ok(b) => {
            let _ = writeln!(s, "size_bound = \"{b}\"");
            let _ = writeln!(s, "bound_check = \"{}\"", if num_bigint::BigUint::from(largest) <= b { "pass" } else { "fail" });
        }
        Err(e) => {
            let _ = writeln!(s, "size_bound = \"unavailable: {e}\"");
            let _ = writeln!(s, "bound_check = \"skipped\"");
        }
    }
    for sub in &found.subsets {
        let vs: Vec<String> = sub.to_vec().iter().map(|v| format_vector(v)).collect();
        let _ = writeln!(s, "\n[[subset]]\nvectors = [{}]", vs.join(", "));
    }
    emit(out, &s)?;
    Ok(EXIT_OK)
}

fn cmd_lb_gen(family: &str, delta: u64, s: u64, out: &mut dyn Write) -> Result<i32, Failure> {
    let family: Family = family.parse()?;
    let m = generate(family, delta, s)?;
    let min = min_first_coordinate(&m, family, delta, s)?;
    let witness = analytic_witness(family, delta, s)?;
    let mut text = serialize_matrix(&m);
    let _ = writeln!(text, "\n# certificate");
    let _ = writeln!(text, "# family = {family}");
    let _ = writeln!(text, "# delta = {delta}");
    if family == Family::Encoded {
        let _ = writeln!(text, "# s = {s}");
    }
    let _ = writeln!(text, "# min_first_coordinate = {min}");
    let _ = writeln!(text, "# bit_length = {}", min.bits());
    let w: Vec<String> = witness.iter().map(ToString::to_string).collect();
    let _ = writeln!(text, "# witness = [{}]", w.join(", "));
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = if args.tree {
        let cols = if args.cols.is_empty() { vec![1; args.branching.len() + 1] } else { args.cols.clone() };
        let shape = TreeShape {
            branching: args.branching.clone(),
            cols,
            leaf_rows: args.r,
            delta: args.delta,
            max_width: args.width,
            max_cost: args.cost,
        };
        Instance::Tree(random_tree(args.seed, &shape)?)
    } else {
        let shape = TwoStageShape {
            n: args.n,
            r: args.r,
            s: args.s,
            t: args.t,
            delta: args.delta,
            max_width: args.width,
            max_cost: args.cost,
        };
        Instance::TwoStage(random_two_stage(args.seed, &shape)?)
    };
    let text = serialize_instance(&inst);
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot write {}: {e}", path.display()) })?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}
