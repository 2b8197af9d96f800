//! `curvecx` command-line front end. Every command prints one JSON report (or CSV
//! rows where noted) on stdout; failures print a single JSON error object on stderr.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use curvecx::boundary::{self, BoundaryPoint, QuadraticIrrational};
use curvecx::busemann::{self, Horizon, MinSetConfig};
use curvecx::error::ErrorKind;
use curvecx::hypgraph::{Backend, FareyOracle, FiniteGraph, GraphOracle, RayOracle, Tree3, TreeEnd, TreeVertex};
use curvecx::mcg::{self, SL2Matrix};
use curvecx::propa::{self, PropaConstants, Truncation};
use curvecx::surfaces::{self, Enumeration, SurfaceType};
use curvecx::{farey, Error, Result, Slope};

const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a CSV column set changes.
const CSV_SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "curvecx", version, about = "Farey graph, Busemann and surface decomposition computations")]
struct Cli {
    #[command(flatten)]
    out: OutputOpts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct OutputOpts {
    /// Report format; csv is available for table-shaped reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Add decimal annotations next to exact rationals.
    #[arg(long, global = true)]
    decimal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Farey distance between two slopes.
    Distance { x: String, y: String },
    /// All geodesics between two slopes.
    Geodesics {
        x: String,
        y: String,
        /// Print at most this many paths (the count is always exact).
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Vertices meeting at least two separating edges.
    Pivots { x: String, y: String },
    /// Lexicographically extreme rays from x toward a boundary point.
    Ray {
        x: String,
        /// Continued fraction like "[1;~(1)]" or a quadratic irrational like "(1+sqrt5)/2".
        a: String,
        length: u64,
    },
    /// ||H(x,n) - H(y,n)||_1 over random adjacent pairs.
    PropaScan(PropaScanArgs),
    /// Busemann values alpha, beta at a boundary point.
    Busemann {
        a: String,
        x: String,
        y: String,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value_t = 4)]
        window: u64,
    },
    /// MIN set of an ideal triangle in the Farey graph.
    Minset {
        a: String,
        b: String,
        c: String,
        /// Window radius around the ideal center.
        #[arg(long, default_value_t = 4)]
        window: u64,
        /// "center" or a comma separated list of base slopes.
        #[arg(long, default_value = "center")]
        bases: String,
    },
    /// Nielsen-Thurston type of an SL(2,Z) matrix "[[a,b],[c,d]]".
    Classify {
        #[arg(allow_hyphen_values = true)]
        m: String,
    },
    /// Twist inequality and commutator checks on random instances.
    TwistCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        height: i64,
    },
    /// Decomposition types of a surface.
    DecompEnum {
        g: u32,
        p: u32,
        #[arg(long)]
        max_edges: Option<usize>,
        /// Give up once this many types have been found.
        #[arg(long, default_value_t = surfaces::DEFAULT_GRAPH_BUDGET)]
        budget: usize,
    },
    /// Exhaustive verification of the complexity and parity lemmas.
    VerifyLemmas {
        g: Option<u32>,
        p: Option<u32>,
        /// Run every surface with 0 <= kappa <= this value instead of one surface.
        #[arg(long)]
        kappa_max: Option<i64>,
    },
    /// Euler characteristic and l2-Betti numbers of the mapping class group.
    Invariants { g: u32, p: u32 },
}

#[derive(Args, Debug)]
struct PropaScanArgs {
    #[arg(long, value_enum)]
    graph: GraphArg,
    /// Edge list file for --graph file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// "a..b" (inclusive) or a comma separated list.
    #[arg(long, default_value = "16,25")]
    n_range: String,
    #[arg(long, default_value_t = 10)]
    pairs: usize,
    /// Initial height cutoff for Farey balls.
    #[arg(long = "D", default_value_t = 16)]
    d: u64,
    #[arg(long)]
    seed: u64,
    /// Boundary point (farey), end "01(20)" (tree3) or far vertex (file).
    #[arg(long)]
    end: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GraphArg {
    Farey,
    Tree3,
    File,
}

impl From<GraphArg> for Backend {
    fn from(g: GraphArg) -> Backend {
        match g {
            GraphArg::Farey => Backend::Farey,
            GraphArg::Tree3 => Backend::Tree3,
            GraphArg::File => Backend::File,
        }
    }
}

/// Output of one command.
enum Output {
    Json(Value),
    /// Header and rows; the JSON form uses the same columns.
    Table {
        meta: Value,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
}

/// A command result plus a flag for failed verifications (exit code 4).
struct Outcome {
    output: Output,
    failed: Option<String>,
}

impl Outcome {
    fn ok(output: Output) -> Self {
        Outcome { output, failed: None }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CURVECX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(outcome) => {
            if let Some(msg) = &outcome.failed {
                emit_error("invariant", msg, Some(render(&cli, &outcome.output)));
                return ExitCode::from(4);
            }
            let text = render(&cli, &outcome.output);
            if let Err(e) = write_out(&cli.out, &text) {
                emit_error("io", &e.to_string(), None);
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, code) = match e.kind() {
                ErrorKind::Precondition => ("precondition", 2),
                ErrorKind::Budget => ("budget", 3),
                ErrorKind::Invariant => ("invariant", 4),
            };
            emit_error(kind, &e.to_string(), None);
            ExitCode::from(code)
        }
    }
}

fn emit_error(kind: &str, message: &str, report: Option<String>) {
    let mut obj = json!({ "error": { "kind": kind, "message": message } });
    if let Some(r) = report {
        let parsed: Value = serde_json::from_str(&r).unwrap_or(Value::String(r));
        obj["error"]["report"] = parsed;
    }
    eprintln!("{}", serde_json::to_string(&obj).expect("json"));
}

fn write_out(opts: &OutputOpts, text: &str) -> std::io::Result<()> {
    match &opts.output {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn versions() -> Value {
    json!({ "curvecx": curvecx::VERSION, "curvecx-cli": CLI_VERSION })
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Distance { .. } => "distance",
        Cmd::Geodesics { .. } => "geodesics",
        Cmd::Pivots { .. } => "pivots",
        Cmd::Ray { .. } => "ray",
        Cmd::PropaScan(_) => "propa-scan",
        Cmd::Busemann { .. } => "busemann",
        Cmd::Minset { .. } => "minset",
        Cmd::Classify { .. } => "classify",
        Cmd::TwistCheck { .. } => "twist-check",
        Cmd::DecompEnum { .. } => "decomp-enum",
        Cmd::VerifyLemmas { .. } => "verify-lemmas",
        Cmd::Invariants { .. } => "invariants",
    }
}

fn render(cli: &Cli, out: &Output) -> String {
    let header = json!({
        "command": command_name(&cli.cmd),
        "parameters": parameters(&cli.cmd),
        "versions": versions(),
    });
    match (out, cli.out.format) {
        (Output::Json(v), _) => {
            let mut report = header;
            report["result"] = v.clone();
            serde_json::to_string_pretty(&report).expect("json") + "\n"
        }
        (Output::Table { meta, header: cols, rows }, Format::Json) => {
            let mut report = header;
            report["schema"] = json!(CSV_SCHEMA);
            report["meta"] = meta.clone();
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let m: serde_json::Map<String, Value> = cols
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.clone(), Value::String(v.clone())))
                        .collect();
                    Value::Object(m)
                })
                .collect();
            report["rows"] = Value::Array(objs);
            serde_json::to_string_pretty(&report).expect("json") + "\n"
        }
        (Output::Table { meta, header: cols, rows }, Format::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut meta_line = header.clone();
            meta_line["schema"] = json!(CSV_SCHEMA);
            meta_line["meta"] = meta.clone();
            w.write_record(cols).expect("csv");
            for r in rows {
                w.write_record(r).expect("csv");
            }
            let body = String::from_utf8(w.into_inner().expect("csv")).expect("utf8");
            format!("# {}\n{}", serde_json::to_string(&meta_line).expect("json"), body)
        }
    }
}

fn parameters(cmd: &Cmd) -> Value {
    match cmd {
        Cmd::Distance { x, y } | Cmd::Pivots { x, y } => json!({ "x": x, "y": y }),
        Cmd::Geodesics { x, y, limit } => json!({ "x": x, "y": y, "limit": limit }),
        Cmd::Ray { x, a, length } => json!({ "x": x, "a": a, "length": length }),
        Cmd::PropaScan(a) => json!({
            "graph": format!("{:?}", a.graph).to_lowercase(),
            "file": a.file.as_ref().map(|p| p.display().to_string()),
            "n_range": a.n_range, "pairs": a.pairs, "D": a.d, "seed": a.seed, "end": a.end,
        }),
        Cmd::Busemann { a, x, y, horizon, window } => {
            json!({ "a": a, "x": x, "y": y, "horizon": horizon, "window": window })
        }
        Cmd::Minset { a, b, c, window, bases } => {
            json!({ "a": a, "b": b, "c": c, "window": window, "bases": bases })
        }
        Cmd::Classify { m } => json!({ "matrix": m }),
        Cmd::TwistCheck { samples, seed, height } => {
            json!({ "samples": samples, "seed": seed, "height": height })
        }
        Cmd::DecompEnum { g, p, max_edges, budget } => {
            json!({ "g": g, "p": p, "max_edges": max_edges, "budget": budget })
        }
        Cmd::VerifyLemmas { g, p, kappa_max } => json!({ "g": g, "p": p, "kappa_max": kappa_max }),
        Cmd::Invariants { g, p } => json!({ "g": g, "p": p }),
    }
}

fn slope(s: &str) -> Result<Slope> {
    s.parse()
}

/// A boundary point from continued fraction text or a quadratic irrational.
fn boundary_point(s: &str) -> Result<BoundaryPoint> {
    match s.parse::<BoundaryPoint>() {
        Ok(b) => Ok(b),
        Err(e) => match s.parse::<QuadraticIrrational>() {
            Ok(q) => Ok(q.continued_fraction()),
            Err(_) => Err(e),
        },
    }
}

/// Exact "p/q" text, always with a denominator.
fn rat(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rat_json(r: &BigRational, decimal: bool) -> Value {
    if decimal {
        json!({ "exact": rat(r), "decimal": r.to_f64() })
    } else {
        json!(rat(r))
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: &Cli) -> Result<Outcome> {
    let decimal = cli.out.decimal;
    match &cli.cmd {
        Cmd::Distance { x, y } => {
            let (x, y) = (slope(x)?, slope(y)?);
            Ok(Outcome::ok(Output::Json(json!({ "distance": farey::distance(&x, &y) }))))
        }
        Cmd::Geodesics { x, y, limit } => {
            let g = farey::CrossingGraph::new(&slope(x)?, &slope(y)?);
            let paths: Vec<Vec<String>> = g
                .geodesics()
                .into_iter()
                .take(*limit)
                .map(|p| p.iter().map(|v| v.to_string()).collect())
                .collect();
            Ok(Outcome::ok(Output::Json(json!({
                "distance": g.distance(),
                "count": g.geodesic_count().to_string(),
                "complete": BigInt::from(paths.len()) == g.geodesic_count(),
                "geodesics": paths,
            }))))
        }
        Cmd::Pivots { x, y } => {
            let p = farey::pivots(&slope(x)?, &slope(y)?);
            Ok(Outcome::ok(Output::Json(json!({ "pivots": to_json(&p) }))))
        }
        Cmd::Ray { x, a, length } => {
            let (x, a) = (slope(x)?, boundary_point(a)?);
            let lo = boundary::ray(&x, &a, *length)?;
            let hi = boundary::ray_max(&x, &a, *length)?;
            Ok(Outcome::ok(Output::Json(json!({
                "target": a.to_string(),
                "ray": to_json(&lo.vertices),
                "ray_max": to_json(&hi.vertices),
                "stable_depth": lo.stable_depth.max(hi.stable_depth),
            }))))
        }
        Cmd::PropaScan(args) => propa_scan(args),
        Cmd::Busemann { a, x, y, horizon, window } => {
            let (a, x, y) = (boundary_point(a)?, slope(x)?, slope(y)?);
            let d = farey::distance(&x, &y);
            let h = Horizon {
                t: horizon.unwrap_or(d + 12),
                window: *window,
            };
            let r = busemann::busemann_pair(&FareyOracle, &a, &x, &y, &h)?;
            Ok(Outcome::ok(Output::Json(json!({
                "alpha": r.alpha, "beta": r.beta, "difference": (r.alpha - r.beta).abs(),
                "delta_hat": r.delta_hat.to_string(), "distance": r.distance, "horizon": to_json(&r.horizon),
                "exactness": "exact",
            }))))
        }
        Cmd::Minset { a, b, c, window, bases } => minset(a, b, c, *window, bases),
        Cmd::Classify { m } => {
            let m: SL2Matrix = m.parse()?;
            let class = mcg::classify(&m)?;
            let mut v = to_json(&class);
            v["matrix"] = json!(m.to_string());
            v["trace"] = json!(m.trace().to_string());
            Ok(Outcome::ok(Output::Json(v)))
        }
        Cmd::TwistCheck { samples, seed, height } => twist_check(*samples, *seed, *height),
        Cmd::DecompEnum { g, p, max_edges, budget } => {
            let s = SurfaceType::new(*g, *p);
            let graphs = surfaces::enumerate_with_budget(s, *max_edges, *budget)?;
            let rows = graphs
                .iter()
                .map(|d| {
                    let pieces: Vec<String> = d.piece_types().iter().map(|t| t.to_string()).collect();
                    vec![
                        d.certificate(),
                        d.vertices().len().to_string(),
                        d.edge_count().to_string(),
                        d.n_of().to_string(),
                        d.is_tree().to_string(),
                        pieces.join(" "),
                    ]
                })
                .collect();
            Ok(Outcome::ok(Output::Table {
                meta: json!({ "surface": s.to_string(), "kappa": s.complexity(), "types": graphs.len() }),
                header: ["certificate", "vertices", "edges", "n", "tree", "pieces"].map(String::from).to_vec(),
                rows,
            }))
        }
        Cmd::VerifyLemmas { g, p, kappa_max } => verify_lemmas(*g, *p, *kappa_max),
        Cmd::Invariants { g, p } => {
            let s = SurfaceType::new(*g, *p);
            let chi = surfaces::virtual_euler(s)?;
            let (idx, b) = surfaces::l2_betti(s)?;
            let chi2 = surfaces::l2_euler(s)?;
            let cost = (idx == 1).then(|| {
                let c = BigRational::from_integer(1.into()) + &b;
                json!({ "value": rat_json(&c, decimal), "note": "beta_0 = 0 and beta_1 is the only nonzero l2-Betti number, so the cost is 1 + beta_1 and the group has fixed price" })
            });
            Ok(Outcome::ok(Output::Json(json!({
                "surface": s.to_string(),
                "kappa": s.complexity(),
                "virtual_euler": rat_json(&chi, decimal),
                "l2_betti": { "index": idx, "value": rat_json(&b, decimal) },
                "l2_euler": rat_json(&chi2, decimal),
                "l2_euler_equals_virtual_euler": chi2 == chi,
                "cost": cost,
                "pants_mcg_order": surfaces::PANTS_MCG_ORDER,
            }))))
        }
    }
}

fn parse_n_range(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("bad n-range {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

#[derive(Serialize)]
struct ScanRow {
    n: u64,
    x: String,
    y: String,
    value: String,
    value_decimal: f64,
    bound_decimal: f64,
    within_bound: Option<bool>,
    exactness: String,
}

fn scan_rows<G: RayOracle>(
    g: &G,
    pairs: &[(G::Vertex, G::Vertex)],
    end: &G::End,
    ns: &[u64],
    consts: &PropaConstants,
    trunc: &Truncation,
) -> Result<Vec<ScanRow>> {
    let jobs: Vec<(u64, usize)> = ns.iter().flat_map(|&n| (0..pairs.len()).map(move |i| (n, i))).collect();
    jobs.par_iter()
        .map(|&(n, i)| {
            let (x, y) = &pairs[i];
            let d = propa::h_difference(g, x, y, end, n, consts, trunc)?;
            Ok(ScanRow {
                n,
                x: x.to_string(),
                y: y.to_string(),
                value: d.value.to_string(),
                value_decimal: d.value.to_f64(),
                bound_decimal: propa::difference_bound_f64(n, 1, consts),
                within_bound: consts
                    .trusted
                    .then(|| propa::within_difference_bound(&d.value, n, 1, consts)),
                exactness: d.exactness.to_string(),
            })
        })
        .collect()
}

fn propa_scan(args: &PropaScanArgs) -> Result<Outcome> {
    let ns = parse_n_range(&args.n_range)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let trunc = Truncation {
        start: BigInt::from(args.d),
        ..Truncation::default()
    };
    let (rows, consts) = match args.graph {
        GraphArg::Farey => {
            let end = boundary_point(args.end.as_deref().unwrap_or("[1;~(1)]"))?;
            let h = BigInt::from(20);
            let pairs: Vec<(Slope, Slope)> = (0..args.pairs)
                .map(|_| {
                    let x = farey::random_slope(&mut rng, 20);
                    let nb = farey::neighbors_bounded(&x, &h);
                    let y = nb[rng.gen_range(0..nb.len())].clone();
                    (x, y)
                })
                .collect();
            let c = PropaConstants::farey();
            (scan_rows(&FareyOracle, &pairs, &end, &ns, &c, &trunc)?, c)
        }
        GraphArg::Tree3 => {
            let end: TreeEnd = args.end.as_deref().unwrap_or("(01)").parse()?;
            let pairs: Vec<(TreeVertex, TreeVertex)> = (0..args.pairs)
                .map(|_| {
                    let mut x = TreeVertex::root();
                    for _ in 0..rng.gen_range(0..6) {
                        let nb = Tree3.neighbors(&x).expect("locally finite");
                        x = nb[rng.gen_range(0..nb.len())].clone();
                    }
                    let nb = Tree3.neighbors(&x).expect("locally finite");
                    let y = nb[rng.gen_range(0..nb.len())].clone();
                    (x, y)
                })
                .collect();
            let c = PropaConstants::tree();
            (scan_rows(&Tree3, &pairs, &end, &ns, &c, &trunc)?, c)
        }
        GraphArg::File => {
            let path = args
                .file
                .as_ref()
                .ok_or_else(|| Error::Precondition("--graph file needs --file".into()))?;
            let g = FiniteGraph::load(path)?;
            let end = args
                .end
                .clone()
                .ok_or_else(|| Error::Precondition("--graph file needs --end <vertex>".into()))?;
            if !g.contains(&end) {
                return Err(Error::Precondition(format!("{end} is not a vertex")));
            }
            let verts = g.vertices();
            let pairs: Vec<(String, String)> = (0..args.pairs)
                .map(|_| {
                    let x = verts[rng.gen_range(0..verts.len())].clone();
                    let nb = g.neighbors(&x).expect("finite graph");
                    let y = nb[rng.gen_range(0..nb.len())].clone();
                    (x, y)
                })
                .collect();
            let c = PropaConstants {
                delta0: 0,
                delta1: 1,
                p0: 1,
                p1: 1,
                trusted: false,
            };
            (scan_rows(&g, &pairs, &end, &ns, &c, &trunc)?, c)
        }
    };
    let header = ["n", "x", "y", "value", "value_decimal", "bound_decimal", "within_bound", "exactness"]
        .map(String::from)
        .to_vec();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.x.clone(),
                r.y.clone(),
                r.value.clone(),
                format!("{:.6}", r.value_decimal),
                format!("{:.6}", r.bound_decimal),
                r.within_bound.map_or("n/a".into(), |b| b.to_string()),
                r.exactness.clone(),
            ]
        })
        .collect();
    let failed = rows
        .iter()
        .find(|r| r.within_bound == Some(false))
        .map(|r| format!("difference bound violated at n = {} for {} {}", r.n, r.x, r.y));
    Ok(Outcome {
        output: Output::Table {
            meta: json!({ "backend": to_json(&Backend::from(args.graph)), "constants": {
                "delta0": consts.delta0, "delta1": consts.delta1, "p0": consts.p0, "p1": consts.p1, "trusted": consts.trusted,
            }}),
            header,
            rows: table,
        },
        failed,
    })
}

fn minset(a: &str, b: &str, c: &str, window: u64, bases: &str) -> Result<Outcome> {
    let (a, b, c) = (boundary_point(a)?, boundary_point(b)?, boundary_point(c)?);
    let cfg = MinSetConfig {
        radius: window,
        ..MinSetConfig::default()
    };
    let g = FareyOracle;
    let res = if bases == "center" {
        busemann::min_set(&g, &a, &b, &c, &cfg)?
    } else {
        let list: Vec<Slope> = bases.split(',').map(|s| slope(s.trim())).collect::<Result<_>>()?;
        let center = busemann::IdealGeometry::ideal_center(&g, &a, &b, &c)?;
        busemann::min_set_at(&g, [&a, &b, &c], &center, &list, window, &cfg)?
    };
    let strs = |v: &[Slope]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let per_base: Vec<Value> = res
        .bases
        .iter()
        .map(|m| {
            json!({ "base": m.base.to_string(), "min_value": m.min_value,
                    "argmin": strs(&m.argmin), "boundary_min": m.boundary_min })
        })
        .collect();
    Ok(Outcome::ok(Output::Json(json!({
        "triple": res.triple,
        "center": strs(&res.center),
        "radius": res.radius,
        "region_size": res.region.len(),
        "bases": per_base,
        "ms": strs(&res.ms),
        "ms_prime": strs(&res.ms_prime),
        "margin": res.margin,
        "delta_hat": res.delta_hat.to_string(),
        "certified": res.certified,
        "m0": res.m0,
        "max_height": busemann::max_height(&res.region).to_string(),
    }))))
}

fn twist_check(samples: usize, seed: u64, height: i64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures: Vec<Value> = Vec::new();
    let (mut holds, mut commutator_nontrivial, mut commutator_checked) = (0usize, 0usize, 0usize);
    for i in 0..samples {
        let alpha = farey::random_slope(&mut rng, height);
        let beta = farey::random_slope(&mut rng, height);
        let gamma = farey::random_slope(&mut rng, height);
        let mut n = 0;
        while n == 0 {
            n = rng.gen_range(-6i64..=6);
        }
        let t = mcg::twist_inequality_check(&[(alpha.clone(), n)], &beta, &gamma)?;
        if t.holds {
            holds += 1;
        } else {
            failures.push(json!({ "sample": i, "check": "inequality", "alpha": alpha.to_string(), "n": n,
                                  "beta": beta.to_string(), "gamma": gamma.to_string(), "report": to_json(&t) }));
        }
        if alpha != beta {
            let m = rng.gen_range(1i64..=6);
            let r = mcg::commuting_check(&alpha, &beta, n, m)?;
            commutator_checked += 1;
            if !r.commute {
                commutator_nontrivial += 1;
            }
            if !r.consistent() {
                failures.push(json!({ "sample": i, "check": "commutator", "alpha": alpha.to_string(),
                                      "beta": beta.to_string(), "n": n, "m": m }));
            }
        }
    }
    let failed = (!failures.is_empty()).then(|| format!("{} twist checks failed", failures.len()));
    Ok(Outcome {
        output: Output::Json(json!({
            "samples": samples,
            "inequality_holds": holds,
            "commutators_checked": commutator_checked,
            "commutators_nontrivial": commutator_nontrivial,
            "failures": failures,
            "verdict": if failed.is_none() { "PASS" } else { "FAIL" },
        })),
        failed,
    })
}

fn verify_lemmas(g: Option<u32>, p: Option<u32>, kappa_max: Option<i64>) -> Result<Outcome> {
    let list = match (g, p, kappa_max) {
        (Some(g), Some(p), None) => vec![SurfaceType::new(g, p)],
        (None, None, Some(k)) => surfaces::surfaces_up_to(k),
        _ => {
            return Err(Error::Precondition(
                "give either g and p, or --kappa-max alone".into(),
            ))
        }
    };
    let results: Vec<(surfaces::LemmaRow, Value)> = list
        .iter()
        .map(|&s| -> Result<_> {
            let e = Enumeration::new(s)?;
            let max = surfaces::verify_max_lemma(&e);
            let parity = surfaces::verify_parity_lemmas(&e);
            let ext = surfaces::extension_predicate_checks(&e);
            let detail = json!({
                "max": to_json(&max),
                "parity": to_json(&parity),
                "extension": to_json(&ext),
                "pants_count_violations": e.pants_count_violations(),
                "kappa_additivity_violations": e.kappa_additivity_violations(),
            });
            Ok((surfaces::lemma_row(&e), detail))
        })
        .collect::<Result<_>>()?;
    let header = ["g", "p", "kappa", "n_max", "types", "maximizers", "verdict"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|(r, _)| {
            vec![
                r.g.to_string(),
                r.p.to_string(),
                r.kappa.to_string(),
                r.n_max.to_string(),
                r.types.to_string(),
                r.maximizers.to_string(),
                r.verdict.clone(),
            ]
        })
        .collect();
    let failing: Vec<String> = results
        .iter()
        .filter(|(r, _)| r.verdict != "PASS")
        .map(|(r, _)| format!("({},{})", r.g, r.p))
        .collect();
    let details: BTreeMap<String, Value> = results
        .into_iter()
        .map(|(r, d)| (format!("({},{})", r.g, r.p), d))
        .collect();
    let verdict = if failing.is_empty() { "PASS" } else { "FAIL" };
    Ok(Outcome {
        output: Output::Table {
            meta: json!({ "verdict": verdict, "details": details }),
            header,
            rows,
        },
        failed: (!failing.is_empty()).then(|| format!("lemma checks failed for {}", failing.join(" "))),
    })
}
