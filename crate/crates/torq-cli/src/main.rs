//! `torq`: command-line front end. Results go to stdout as JSON, or to
//! `--out` (JSON or CSV, chosen by extension).
//!
//! Exit codes: 0 success, 2 invalid input, 3 capacity or timeout,
//! 4 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use torq::board::{verify_matching, AttackMode, Interval, TorusGraph};
use torq::decomposition::{
    build_cascade, cover_leave, decompose_bounded, random_cascade_seed, random_configs, to_matching_pair,
};
use torq::greedy::{audit_trace, count_estimate, envelope_check, run_greedy, write_trace_csv};
use torq::hnf::hnf_oracle;
use torq::io::{
    from_json, to_json, CampaignDoc, CampaignRun, DecompositionDoc, MatchingPairDoc, PlacementDoc, SupportVectorDoc,
    WSetDoc, SCHEMA,
};
use torq::lattice::{in_lattice_queens, in_lattice_semiqueens, LatticeKind, SupportVector};
use torq::solvers::{
    build_wset, count_classical, count_semiqueens, count_toroidal, extend_classical, max_partial_toroidal,
    monsky_closed_form, Budget,
};
use torq::TorqError;

#[derive(Parser)]
#[command(name = "torq", version, about = "Toroidal n-queens toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMode {
    Classical,
    Toroidal,
    /// Toroidal semi-queens (rows, columns, sum diagonals).
    Semi,
    /// Semi-queens on the ordinary board.
    SemiClassical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    None,
    Hnf,
}

#[derive(Subcommand)]
enum Command {
    /// Exact solution counts by backtracking.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "classical")]
        mode: CountMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lattice membership.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Decompose a lattice vector into a signed edge multiset.
    Decompose {
        /// Target support vector (JSON).
        #[arg(long = "in")]
        input: PathBuf,
        /// Treat the target as a 0/1 leave and cover it within this radius.
        #[arg(long)]
        radius: Option<usize>,
        /// Also convert the result into a matching pair inside this region,
        /// written `S`, `square:S` or `box:S`.
        #[arg(long)]
        region: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random zero-sum configurations, or cascades with `--cascade`.
    Zsc {
        #[arg(long, default_value_t = 101)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of gadgets to build.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        cascade: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random greedy matching process on T(n).
    Greedy {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0.05)]
        b: f64,
        #[arg(long, default_value_t = 0.9)]
        stop: f64,
        /// `.json` for the campaign summary, `.csv` for the per-step trace
        /// (single seed only).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical placement from the W-set construction.
    Extend {
        #[arg(long)]
        n: usize,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest partial toroidal solution against the closed form.
    Monsky {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LatticeAction {
    /// Test a vector against the exact membership criteria.
    Check {
        #[arg(long)]
        n: Option<usize>,
        /// Use the all-ones vector on T(n).
        #[arg(long)]
        ones: bool,
        /// Support vector (JSON).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Cross-check with an independent oracle.
        #[arg(long, value_enum, default_value = "none")]
        oracle: Oracle,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error carrying its exit code.
struct Fail(u8, String);

impl From<TorqError> for Fail {
    fn from(e: TorqError) -> Self {
        let code = match e {
            TorqError::InvalidArgument(_) | TorqError::Unsupported(_) | TorqError::Precondition(_) => 2,
            TorqError::Capacity(_) | TorqError::Timeout(_) => 3,
            TorqError::Verification(_) => 4,
        };
        Fail(code, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn verification(msg: impl Into<String>) -> Fail {
    Fail(4, format!("verification failed: {}", msg.into()))
}

type Out = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("torq: {msg}");
            ExitCode::from(code)
        }
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn emit_json(doc: &impl serde::Serialize, out: Option<&Path>) -> Out {
    let text = to_json(doc);
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) if is_csv(p) => Err(invalid("CSV output is only available for greedy traces")),
        Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("cannot write {}: {e}", p.display()))),
    }
}

fn read_doc<T: serde::de::DeserializeOwned + torq::io::Versioned>(path: &Path) -> Result<T, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn run(cmd: Command) -> Out {
    match cmd {
        Command::Count { n, mode, out } => {
            let count = match mode {
                CountMode::Classical => count_classical(n)?,
                CountMode::Toroidal => count_toroidal(n)?,
                CountMode::Semi => count_semiqueens(n, AttackMode::Toroidal)?,
                CountMode::SemiClassical => count_semiqueens(n, AttackMode::Classical)?,
            };
            emit_json(&json!({"schema": SCHEMA, "n": n, "count": count}), out.as_deref())
        }
        Command::Lattice { action: LatticeAction::Check { n, ones, input, oracle, out } } => {
            lattice_check(n, ones, input, oracle, out.as_deref())
        }
        Command::Decompose { input, radius, region, out } => decompose(&input, radius, region, out.as_deref()),
        Command::Zsc { n, seed, seeds, cascade, out } => zsc(n, seed, seeds, cascade, out.as_deref()),
        Command::Greedy { n, seed, seeds, b, stop, out } => greedy(n, seed, seeds, b, stop, out.as_deref()),
        Command::Extend { n, timeout, seed, out } => {
            if timeout.is_nan() || timeout <= 0.0 {
                return Err(invalid("--timeout must be positive"));
            }
            let w = build_wset(n)?;
            let placement = extend_classical(&w, Budget { seconds: timeout, restarts: u64::MAX, seed })?;
            let mut doc = serde_json::to_value(PlacementDoc::from(&placement)).expect("serializable");
            doc["wset"] = serde_json::to_value(WSetDoc::from(&w)).expect("serializable");
            emit_json(&doc, out.as_deref())
        }
        Command::Monsky { n, out } => {
            let max = max_partial_toroidal(n)?;
            let closed = monsky_closed_form(n);
            if max != closed {
                return Err(verification(format!("n = {n}: search found {max}, closed form gives {closed}")));
            }
            emit_json(&json!({"schema": SCHEMA, "n": n, "max_partial": max, "closed_form": closed}), out.as_deref())
        }
    }
}

fn lattice_check(n: Option<usize>, ones: bool, input: Option<PathBuf>, oracle: Oracle, out: Option<&Path>) -> Out {
    let v = match (ones, input) {
        (true, None) => {
            let n = n.ok_or_else(|| invalid("--ones needs --n"))?;
            if n == 0 {
                return Err(invalid("n must be positive"));
            }
            let g = TorusGraph::queens(n)?;
            SupportVector::indicator(n, LatticeKind::Queens, g.vertices())
        }
        (false, Some(path)) => {
            let v = read_doc::<SupportVectorDoc>(&path)?.to_vector()?;
            if n.is_some_and(|n| n != v.n) {
                return Err(invalid(format!("--n disagrees with the vector's n = {}", v.n)));
            }
            v
        }
        _ => return Err(invalid("give exactly one of --ones and --in")),
    };
    let verdict = match v.kind {
        LatticeKind::Queens => in_lattice_queens(&v),
        LatticeKind::Semi => in_lattice_semiqueens(&v),
    };
    let mut doc = json!({
        "schema": SCHEMA,
        "n": v.n,
        "kind": v.kind,
        "in_lattice": verdict.holds(),
        "failed_condition": verdict.failed,
    });
    if let Oracle::Hnf = oracle {
        let o = hnf_oracle(v.n, v.kind, &v)?;
        if o != verdict.holds() {
            return Err(verification(format!("criteria say {} but the HNF oracle says {o}", verdict.holds())));
        }
        doc["oracle"] = json!({"name": "hnf", "in_lattice": o});
    }
    emit_json(&doc, out)
}

fn parse_region(s: &str) -> Result<Interval, Fail> {
    let (shape, size) = s.split_once(':').unwrap_or(("square", s));
    let size: usize = size.parse().map_err(|_| invalid(format!("bad --region size in {s:?}")))?;
    match shape {
        "square" => Ok(Interval::square(size)),
        "box" => Ok(Interval::boxed(size)),
        _ => Err(invalid(format!("--region shape must be square or box, got {shape:?}"))),
    }
}

fn decompose(input: &Path, radius: Option<usize>, region: Option<String>, out: Option<&Path>) -> Out {
    let target = read_doc::<SupportVectorDoc>(input)?.to_vector()?;
    let region = region.as_deref().map(parse_region).transpose()?;
    let result = match radius {
        Some(r) => cover_leave(&target, r)?,
        None => decompose_bounded(&target)?,
    };
    result.verify()?;
    let mut doc = serde_json::to_value(DecompositionDoc::from(&result)).expect("serializable");
    if let Some(region) = region {
        let pair = to_matching_pair(&result.phi, region)?;
        let g = TorusGraph::queens(target.n)?;
        if !verify_matching(&g, &pair.plus, false).valid || !verify_matching(&g, &pair.minus, false).valid {
            return Err(verification("matching pair side is not a matching"));
        }
        let mut diff = torq::lattice::SignedEdgeSet::new(target.n);
        pair.plus.edges.iter().for_each(|&e| diff.add(e, 1));
        pair.minus.edges.iter().for_each(|&e| diff.add(e, -1));
        if diff.shadow() != target {
            return Err(verification("matching pair has the wrong shadow difference"));
        }
        doc["matching_pair"] = serde_json::to_value(MatchingPairDoc::new(target.n, &pair)).expect("serializable");
    }
    emit_json(&doc, out)
}

fn zsc(n: usize, seed: u64, count: u64, cascade: bool, out: Option<&Path>) -> Out {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let items: Vec<Value> = if cascade {
        let g = TorusGraph::queens(n)?;
        (0..count)
            .map(|k| {
                let (e, t) = random_cascade_seed(n, seed.wrapping_add(k))?;
                let c = build_cascade(&g, e, t, &Default::default())?;
                Ok(json!({
                    "seed": seed.wrapping_add(k),
                    "e": [e.x, e.y],
                    "t": t.iter().map(|f| [f.x, f.y]).collect::<Vec<_>>(),
                    "matching1": c.matching1.edges.iter().map(|f| [f.x, f.y]).collect::<Vec<_>>(),
                    "matching2": c.matching2.edges.iter().map(|f| [f.x, f.y]).collect::<Vec<_>>(),
                }))
            })
            .collect::<Result<_, TorqError>>()?
    } else {
        let configs = random_configs(n, count as usize, seed);
        for z in &configs {
            if !z.signed_edges().shadow().is_zero() {
                return Err(verification(format!("configuration {:?} has nonzero shadow", z.params)));
            }
        }
        configs
            .iter()
            .map(|z| {
                json!({
                    "params": [z.params.0, z.params.1, z.params.2, z.params.3],
                    "d": z.d,
                    "valid": z.valid,
                    "positive": z.positive.iter().map(|f| [f.x, f.y]).collect::<Vec<_>>(),
                    "negative": z.negative.iter().map(|f| [f.x, f.y]).collect::<Vec<_>>(),
                })
            })
            .collect()
    };
    let key = if cascade { "cascades" } else { "configs" };
    emit_json(&json!({"schema": SCHEMA, "n": n, "seed": seed, key: items}), out)
}

fn greedy(n: usize, seed: u64, count: u64, b: f64, stop: f64, out: Option<&Path>) -> Out {
    if count == 0 {
        return Err(invalid("--seeds must be at least 1"));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid("--b must lie in (0, 1)"));
    }
    let g = TorusGraph::queens(n)?;
    let seeds: Vec<u64> = (0..count).map(|k| seed.wrapping_add(k)).collect();
    if let Some(path) = out.filter(|p| is_csv(p)) {
        if count != 1 {
            return Err(invalid("CSV traces need a single seed"));
        }
        let trace = run_greedy(&g, seed, stop)?;
        audit_trace(&trace)?;
        let file = std::fs::File::create(path).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
        write_trace_csv(&trace, b, std::io::BufWriter::new(file))?;
        return Ok(());
    }
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(seeds.len());
    let runs: Vec<Result<CampaignRun, TorqError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (g, seeds) = (&g, &seeds);
                scope.spawn(move || {
                    seeds
                        .iter()
                        .skip(w)
                        .step_by(workers)
                        .map(|&s| {
                            let trace = run_greedy(g, s, stop)?;
                            audit_trace(&trace)?;
                            let env = envelope_check(&trace, b);
                            let est = count_estimate(&trace);
                            Ok(CampaignRun {
                                seed: s,
                                steps: trace.steps.len(),
                                q_inside_fraction: env.q_inside_fraction,
                                d_inside_fraction: env.d_inside_fraction,
                                estimate_log: est.log_total,
                                estimate_normalized: est.normalized,
                            })
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    emit_json(&CampaignDoc::new(n, b, stop, runs), out)
}
