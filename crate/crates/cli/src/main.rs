use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use freelip_cli::config::ExperimentConfig;
use freelip_cli::report::{write_csv, ReportRow};
use freelip_cli::suites::{bm4_samples, run_suite, Suite};
use freelip_core::decomposition::{kalton_check, orthogonal_union_check, separated_union_decompose, union2_check};
use freelip_core::free_norm::{free_norm_dual, free_norm_flow, LipFunction, NormSolver};
use freelip_core::io::{
    format_g17, load_freevector, load_operator, load_partition, load_space, load_values, space_to_json, values_to_json,
};
use freelip_core::lip_ops::{infconv_extend, nearest_point_extension, shepard_extension, LinearExtensionOperator};
use freelip_core::quotient::{metric_identification, quotient_pseudometric};
use freelip_core::rng::Rng;
use freelip_core::{sample, PointedMetricSpace};

#[derive(Parser)]
#[command(name = "freelip", version, about = "Lipschitz-free spaces over finite metric spaces")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a space file.
    Validate {
        space: PathBuf,
        /// Also reject distinct points at distance zero.
        #[arg(long)]
        strict: bool,
    },
    /// Free norm of a vector.
    Norm {
        space: PathBuf,
        vector: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverArg::Both)]
        solver: SolverArg,
        /// Write the optimal Lipschitz function as CSV (id,value).
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Write the optimal transport plan as CSV (from,to,amount).
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Quotient of a space by a partition, written as a space file.
    Quotient {
        space: PathBuf,
        partition: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Extend function values given on a subset to the whole space.
    Extend {
        space: PathBuf,
        /// Values on the subset, `{"values": {"id": v}}`; the base may be omitted.
        values: PathBuf,
        #[arg(long, value_enum, default_value_t = ExtendMethod::Infconv)]
        method: ExtendMethod,
        /// Exponent of the Shepard weights.
        #[arg(long, default_value_t = 2.0)]
        power: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Exact norm of a linear extension operator.
    Opnorm {
        space: PathBuf,
        operator: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverArg::Flow)]
        solver: SolverArg,
    },
    /// Split a vector into annular pieces and compare norms.
    Kalton { space: PathBuf, vector: PathBuf },
    /// Sandwich inequalities for pieces glued at the base.
    UnionCheck {
        space: PathBuf,
        /// Partition whose classes are the pieces.
        pieces: PathBuf,
        #[command(flatten)]
        tests: TestVectors,
    },
    /// Decomposition of a union of mutually separated pieces.
    Godard {
        space: PathBuf,
        /// Partition whose classes are the pieces.
        pieces: PathBuf,
        /// Separation bounds `A,B`; default: extreme cross distances.
        #[arg(long, value_parser = parse_pair)]
        bounds: Option<(f64, f64)>,
    },
    /// Distortion of the decomposition of a union of two subspaces.
    Union2 {
        space: PathBuf,
        /// Point ids of M, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<String>,
        /// Point ids of N, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<String>,
        /// Extension operator from the intersection; default: nearest point.
        #[arg(long)]
        operator: Option<PathBuf>,
    },
    /// Split random 1-Lipschitz functions on a radial net into class-constant parts.
    Bm4(Bm4Args),
    /// Run an experiment suite and write its CSV report.
    RunSuite {
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output; default: standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Omit the wall-time column.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Args)]
struct TestVectors {
    /// Number of random test vectors.
    #[arg(long, default_value_t = 10)]
    tests: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Bm4Args {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    norm_p: Option<f64>,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    radius_min_exp: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    radius_max_exp: Option<i32>,
    #[arg(long)]
    radius_step_exp: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Lp,
    Flow,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendMethod {
    Infconv,
    Nearest,
    Shepard,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected A,B")?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

/// A diagnostic with its exit status.
struct Failure(u8, String);

impl From<freelip_core::Error> for Failure {
    fn from(e: freelip_core::Error) -> Self {
        Failure(3, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(3, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure(3, e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("FREELIP_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: FREELIP_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let config = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: config {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    match run(cli.command, config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p).map_err(|e| Failure(3, format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn solver(arg: SolverArg) -> NormSolver {
    if arg == SolverArg::Lp {
        NormSolver::Lp
    } else {
        NormSolver::Flow
    }
}

fn pieces(space: &PointedMetricSpace, path: &Path) -> Result<Vec<Vec<usize>>, Failure> {
    Ok(load_partition(path, space.len())?.classes().to_vec())
}

fn ids_to_indices(space: &PointedMetricSpace, ids: &[String]) -> Result<Vec<usize>, Failure> {
    ids.iter()
        .map(|id| space.index_of(id).ok_or_else(|| Failure(3, format!("unknown point id {id}"))))
        .collect()
}

fn run(command: Command, config: ExperimentConfig) -> Outcome {
    match command {
        Command::Validate { space, strict } => {
            let s = load_space(&space)?;
            let report = freelip_core::metric::validate_metric(&s.to_rows(), strict);
            println!("{}: {} points, base {}", s.name(), s.len(), s.points()[s.base()].id);
            println!("{report}");
            Ok(report.is_valid())
        }
        Command::Norm { space, vector, solver: which, witness, plan } => {
            let s = load_space(&space)?;
            let mu = load_freevector(&vector, &s)?;
            let mut ok = true;
            let mut dual = None;
            let mut flow = None;
            if which != SolverArg::Flow || witness.is_some() {
                let (v, f) = free_norm_dual(&mu, &s)?;
                if which != SolverArg::Flow {
                    println!("lp {}", format_g17(v));
                }
                dual = Some((v, f));
            }
            if which != SolverArg::Lp || plan.is_some() {
                let (v, p) = free_norm_flow(&mu, &s);
                if which != SolverArg::Lp {
                    println!("flow {}", format_g17(v));
                }
                flow = Some((v, p));
            }
            if let (SolverArg::Both, Some((a, _)), Some((b, _))) = (which, &dual, &flow) {
                let gap = (a - b).abs();
                println!("gap {}", format_g17(gap));
                ok = gap <= config.gap_tolerance;
            }
            if let (Some(path), Some((_, f))) = (witness, &dual) {
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["id", "value"])?;
                for (p, v) in s.points().iter().zip(f.values()) {
                    w.write_record([p.id.as_str(), &format_g17(*v)])?;
                }
                w.flush()?;
            }
            if let (Some(path), Some((_, p))) = (plan, &flow) {
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["from", "to", "amount"])?;
                for &(a, b, m) in &p.flows {
                    w.write_record([s.points()[a].id.as_str(), s.points()[b].id.as_str(), &format_g17(m)])?;
                }
                w.flush()?;
            }
            Ok(ok)
        }
        Command::Quotient { space, partition, out } => {
            let s = load_space(&space)?;
            let part = load_partition(&partition, s.len())?;
            let (q, _) = metric_identification(&quotient_pseudometric(&s, &part));
            output(out.as_deref())?.write_all(space_to_json(&q).as_bytes())?;
            Ok(true)
        }
        Command::Extend { space, values, method, power, out } => {
            let s = load_space(&space)?;
            let mut given = load_values(&values, &s)?;
            if given.binary_search_by_key(&s.base(), |p| p.0).is_err() {
                given.push((s.base(), 0.0));
                given.sort_by_key(|p| p.0);
            }
            let subset: Vec<usize> = given.iter().map(|p| p.0).collect();
            let local_base = subset.iter().position(|&x| x == s.base()).expect("base added");
            let f = LipFunction::new(given.iter().map(|p| p.1).collect(), local_base);
            let ext = match method {
                ExtendMethod::Infconv => infconv_extend(&s, &subset, &f)?,
                ExtendMethod::Nearest => nearest_point_extension(&s, &subset)?.apply(&f)?,
                ExtendMethod::Shepard => shepard_extension(&s, &subset, power)?.apply(&f)?,
            };
            let all: Vec<(usize, f64)> = ext.values().iter().copied().enumerate().collect();
            output(out.as_deref())?.write_all(values_to_json(&all, &s).as_bytes())?;
            Ok(true)
        }
        Command::Opnorm { space, operator, solver: which } => {
            let s = load_space(&space)?;
            let e = load_operator(&operator, &s)?;
            let w = e.norm(solver(which))?;
            let ids = |x: usize| s.points()[x].id.clone();
            println!("norm {}", format_g17(w.value));
            println!("attained at {} {}", ids(w.pair.0), ids(w.pair.1));
            Ok(true)
        }
        Command::Kalton { space, vector } => {
            let s = load_space(&space)?;
            let mu = load_freevector(&vector, &s)?;
            let r = kalton_check(&mu, &s, NormSolver::Flow)?;
            println!("norm {}", format_g17(r.norm));
            println!("sum_of_norms {}", format_g17(r.sum_of_norms));
            println!("ratio {}", format_g17(r.ratio));
            println!("parts {}", r.parts);
            println!("exact_reconstruction {}", r.exact_reconstruction);
            Ok(r.exact_reconstruction && r.ratio <= freelip_core::decomposition::KALTON_CONSTANT)
        }
        Command::UnionCheck { space, pieces: path, tests } => {
            let s = load_space(&space)?;
            let p = pieces(&s, &path)?;
            let mut rng = Rng::new(tests.seed);
            let vs: Vec<_> =
                (0..tests.tests).map(|_| sample::random_free_vector(&mut rng, s.len(), 3.min(s.len()))).collect();
            let r = orthogonal_union_check(&s, &p, &vs, NormSolver::Flow)?;
            println!("c {}", format_g17(r.c));
            println!("concat_norm {}", format_g17(r.concat_norm));
            println!("restrict_norm {}", format_g17(r.restrict_norm));
            println!("min_slack {}", format_g17(r.min_slack()));
            Ok(r.min_slack() >= -config.gap_tolerance)
        }
        Command::Godard { space, pieces: path, bounds } => {
            let s = load_space(&space)?;
            let p = pieces(&s, &path)?;
            let r = separated_union_decompose(&s, &p, bounds, NormSolver::Flow)?;
            println!("scale {}", format_g17(r.scale));
            println!("a {} b {}", format_g17(r.a), format_g17(r.b));
            println!("phi {} bound {}", format_g17(r.max_phi), format_g17(r.phi_bound));
            println!("phi_inv {} bound {}", format_g17(r.max_phi_inv), format_g17(r.phi_inv_bound));
            println!("distortion {} bound {}", format_g17(r.distortion), format_g17(r.distortion_bound));
            let tol = config.gap_tolerance;
            Ok(r.max_phi <= r.phi_bound + tol && r.max_phi_inv <= r.phi_inv_bound + tol)
        }
        Command::Union2 { space, m, n, operator } => {
            let s = load_space(&space)?;
            let m = ids_to_indices(&s, &m)?;
            let n = ids_to_indices(&s, &n)?;
            let e: LinearExtensionOperator = match operator {
                Some(path) => load_operator(&path, &s)?,
                None => {
                    let f: Vec<usize> = m.iter().copied().filter(|x| n.contains(x)).collect();
                    nearest_point_extension(&s, &f)?
                }
            };
            let r = union2_check(&s, &m, &n, &e, NormSolver::Flow)?;
            println!("c {}", format_g17(r.c));
            println!("e_norm {}", format_g17(r.e_norm));
            println!("distortion {} bound {}", format_g17(r.distortion), format_g17(r.bound));
            Ok(r.distortion <= r.bound + config.gap_tolerance)
        }
        Command::Bm4(a) => {
            let mut cfg = config.bm4;
            cfg.dim = a.dim.unwrap_or(cfg.dim);
            cfg.norm_p = a.norm_p.unwrap_or(cfg.norm_p);
            cfg.directions = a.directions.unwrap_or(cfg.directions);
            cfg.radius_min_exp = a.radius_min_exp.unwrap_or(cfg.radius_min_exp);
            cfg.radius_max_exp = a.radius_max_exp.unwrap_or(cfg.radius_max_exp);
            cfg.radius_step_exp = a.radius_step_exp.unwrap_or(cfg.radius_step_exp);
            cfg.samples = a.samples.unwrap_or(cfg.samples);
            let epsilon = a.epsilon.unwrap_or(config.epsilon);
            if !(epsilon > 0.0) {
                return Err(Failure(2, format!("epsilon must be positive, got {epsilon}")));
            }
            let seed = a.seed.or(config.seed).ok_or_else(|| Failure(2, "bm4 needs --seed".into()))?;
            let samples = bm4_samples(&cfg, seed).map_err(|e| Failure(3, e))?;
            let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
            w.write_record(["h_id", "s_star", "bound", "slack"])?;
            let mut worst = 0.0f64;
            let mut ok = true;
            for smp in &samples {
                let bound = 2.0 * smp.h_lip;
                w.write_record([smp.h_id.to_string(), format_g17(smp.s_star), format_g17(bound), format_g17(bound - smp.s_star)])?;
                worst = worst.max(smp.s_star);
                ok &= 2.0 * smp.s_star <= 4.0 * smp.h_lip + epsilon;
            }
            w.flush()?;
            eprintln!(
                "bm4 summary: samples={} max_s_star={} max_product={} bound=4 epsilon={} {}",
                samples.len(),
                format_g17(worst),
                format_g17(2.0 * worst),
                epsilon,
                if ok { "PASS" } else { "FAIL" }
            );
            Ok(ok)
        }
        Command::RunSuite { suite, seed, out, no_timing } => {
            let mut cfg = config;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let outcome = run_suite(&cfg, suite).map_err(|e| Failure(if e.contains("seed") { 2 } else { 3 }, e))?;
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            let out = match (out, &cfg.out_dir) {
                (Some(p), _) => Some(p),
                (None, Some(d)) => {
                    std::fs::create_dir_all(d).map_err(|e| Failure(3, format!("{}: {e}", d.display())))?;
                    Some(d.join(format!("{suite}.csv")))
                }
                (None, None) => None,
            };
            write_csv(&outcome.rows, output(out.as_deref())?, !no_timing)?;
            let failed: Vec<&ReportRow> = outcome.failures().collect();
            eprintln!(
                "{suite}: {} rows, {} failing (tolerance {})",
                outcome.rows.len(),
                failed.len(),
                outcome.tolerance
            );
            for r in failed.iter().take(10) {
                eprintln!("  instance {} {}: measured {} bound {}", r.instance, r.quantity, format_g17(r.measured), format_g17(r.bound));
            }
            Ok(failed.is_empty())
        }
    }
}

