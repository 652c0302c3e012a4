//! Command-line front end: ingest CSV/JSON spaces, run one operation, emit
//! a JSON report.  Exit code 0 on pass, 1 on fail-with-witness, 2 on input
//! error.

use std::f64::consts::PI;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::comparison::{
    cat_inf_kappa, cbb_sup_kappa, is_cat, is_cbb, one_plus_n_test, sturm_test, Verdict,
};
use crate::extension::{barycentric_point, kirszbraun_extend, web_compute, SimplexWeights};
use crate::flows::{
    develop_polyline, gradient_curve, radial_curve, self_contracting_check, ConvexDomain,
    ConvexDomainSpace, Objective,
};
use crate::io::{
    self, graph_to_json, metric_to_csv, parse_seed, polyline_svg, read_graph_json,
    read_metric_csv, GraphFile, IoError,
};
use crate::metric::{
    circle_metric, net_of_surface, pack_eps, sample_model_space, tripod_metric, FiniteMetric,
    SurfaceKind,
};
use crate::model::ModelPoint;
use crate::suite::verify_suite;
use crate::warped::{cone_space, doubling, suspension_space, warped_1d_distance, WarpSpec, WarpTag};

#[derive(Parser)]
#[command(name = "curvkit", about = "comparison-geometry toolkit", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report (or generated artifact) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Seed string; numerals parse directly, others hash.
    #[arg(long, global = true, default_value = "0xA1EX")]
    seed: String,
    /// Parallelism budget (default: CURVKIT_JOBS or all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct KappaTol {
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive lower-curvature-bound scan of a CSV metric.
    CheckCbb {
        input: String,
        #[command(flatten)]
        kt: KappaTol,
    },
    /// Exhaustive upper-curvature-bound scan of a CSV metric.
    CheckCat {
        input: String,
        #[command(flatten)]
        kt: KappaTol,
    },
    /// Locate the curvature threshold of a CSV metric.
    KappaRange {
        input: String,
        /// "cbb" for the supremal lower bound, "cat" for the infimal upper.
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        kappa_min: Option<f64>,
        #[arg(long)]
        kappa_max: Option<f64>,
    },
    /// (1+n)-point comparison at a basepoint of a CSV metric.
    OnePlusN {
        input: String,
        #[arg(long, default_value_t = 0)]
        p: usize,
        /// Comma-separated indices; default: all others.
        #[arg(long)]
        xs: Option<String>,
        #[command(flatten)]
        kt: KappaTol,
    },
    /// Distance-matrix copositivity test at a basepoint.
    Sturm {
        input: String,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long)]
        xs: Option<String>,
    },
    /// Short-map extension problem from a JSON file.
    Extend { input: String },
    /// Weighted barycenter of model-space anchors from a JSON file.
    Barycenter {
        input: String,
        #[arg(long)]
        plot: bool,
    },
    /// Pareto web of an anchor set in a CSV metric.
    Web {
        input: String,
        #[arg(long)]
        anchors: String,
        #[command(flatten)]
        kt: KappaTol,
    },
    /// Development of a polyline given radii and chords (JSON file).
    Develop {
        input: String,
        #[arg(long)]
        plot: bool,
    },
    /// Radial curve on a convex plane domain (JSON file).
    Radial {
        input: String,
        #[arg(long)]
        plot: bool,
    },
    /// Gradient ascent curve on a convex plane domain (JSON file).
    Gradflow { input: String },
    /// Cone over a CSV fiber metric.
    Cone {
        input: String,
        #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
        radii: String,
        #[command(flatten)]
        kt: KappaTol,
    },
    /// Spherical suspension over a CSV fiber metric.
    Suspend {
        input: String,
        /// Heights in [0, pi]; default: 7 evenly spaced.
        #[arg(long)]
        heights: Option<String>,
    },
    /// Double a JSON graph across a vertex subset.
    Double {
        input: String,
        #[arg(long)]
        set: String,
    },
    /// Distance in a warped product with one-dimensional base.
    WarpDist {
        #[arg(long, default_value = "id")]
        tag: String,
        #[arg(long, default_value_t = 0.0)]
        base_min: f64,
        #[arg(long, default_value_t = 1.0)]
        base_max: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        ell: f64,
    },
    /// Greedy maximal packing of a CSV metric.
    Pack {
        input: String,
        #[arg(long)]
        eps: f64,
    },
    /// Generate a corpus artifact (CSV metric or JSON graph).
    Gen {
        /// sphere | plane | hyperbolic | euclidean | tripod | circle |
        /// net-plane | net-sphere | net-cone
        kind: String,
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        #[arg(long, default_value_t = 30)]
        n: usize,
        /// Circle length, cone total angle, or net mesh, depending on kind.
        #[arg(long)]
        param: Option<f64>,
    },
    /// Run the verification battery.
    VerifySuite {
        /// Comma-separated criterion ids (default: all).
        #[arg(long)]
        criteria: Option<String>,
    },
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        std::env::set_var("CURVKIT_JOBS", j.to_string());
    }
    match run(&cli) {
        Ok((text, code)) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: {path}: {e}");
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Io(#[from] IoError),
    #[error("{0}")]
    Bad(String),
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Bad(msg.into())
}

fn parse_index_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| bad(format!("not an index: {t:?}")))
        })
        .collect()
}

fn parse_float_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("not a number: {t:?}")))
        })
        .collect()
}

fn verdict_value(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("verdict serialization")
}

fn wrap(command: &str, pass: bool, data: Value) -> (String, i32) {
    let report = json!({
        "schema": "curvkit/1",
        "command": command,
        "pass": pass,
        "data": data,
    });
    (
        serde_json::to_string_pretty(&report).expect("report") + "\n",
        if pass { 0 } else { 1 },
    )
}

#[derive(Deserialize)]
struct ExtendFile {
    matrix: Vec<Vec<f64>>,
    p: usize,
    xs: Vec<usize>,
    images: Vec<Vec<f64>>,
    #[serde(default)]
    kappa: f64,
    dim: usize,
}

#[derive(Deserialize)]
struct BarycenterFile {
    #[serde(default)]
    kappa: f64,
    anchors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct DevelopFile {
    #[serde(default)]
    kappa: f64,
    rho: Vec<f64>,
    chords: Vec<f64>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Deserialize)]
struct DomainFile {
    /// "full" | "half-plane" | "disk:<radius>"
    domain: String,
    #[serde(default)]
    kappa: f64,
}

fn parse_domain(s: &str) -> Result<ConvexDomainSpace, CliError> {
    let d = match s {
        "full" => ConvexDomain::Full,
        "half-plane" => ConvexDomain::HalfPlane,
        other => match other.strip_prefix("disk:") {
            Some(r) => ConvexDomain::Disk {
                radius: r
                    .parse()
                    .map_err(|_| bad(format!("bad disk radius {r:?}")))?,
            },
            None => return Err(bad(format!("unknown domain {other:?}"))),
        },
    };
    Ok(ConvexDomainSpace::new(2, d))
}

#[derive(Deserialize)]
struct RadialFile {
    #[serde(flatten)]
    dom: DomainFile,
    p: Vec<f64>,
    x: Vec<f64>,
    #[serde(default = "default_step")]
    step: f64,
    #[serde(default = "default_horizon")]
    s_max: f64,
}

#[derive(Deserialize)]
struct GradflowFile {
    #[serde(flatten)]
    dom: DomainFile,
    objective: Value,
    x0: Vec<f64>,
    #[serde(default = "default_step")]
    h: f64,
    #[serde(default = "default_horizon")]
    horizon: f64,
}

fn default_step() -> f64 {
    1e-3
}
fn default_horizon() -> f64 {
    2.0
}

fn parse_objective(v: &Value) -> Result<Objective, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| bad(format!("objective: {e}")))
}

fn load_metric(path: &str) -> Result<FiniteMetric, CliError> {
    Ok(read_metric_csv(path)?.1)
}

fn maybe_plot(cli_out: &Option<String>, plot: bool, svg: &str) -> Result<(), CliError> {
    if plot {
        let path = match cli_out {
            Some(p) => format!("{p}.svg"),
            None => "curvkit-plot.svg".to_string(),
        };
        std::fs::write(&path, svg).map_err(|e| bad(format!("{path}: {e}")))?;
        eprintln!("plot written to {path}");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(String, i32), CliError> {
    let seed = parse_seed(&cli.seed);
    match &cli.command {
        Command::CheckCbb { input, kt } => {
            let m = load_metric(input)?;
            let v = is_cbb(&m, kt.kappa, kt.tol);
            Ok(wrap("check-cbb", v.pass, verdict_value(&v)))
        }
        Command::CheckCat { input, kt } => {
            let m = load_metric(input)?;
            let v = is_cat(&m, kt.kappa, kt.tol);
            Ok(wrap("check-cat", v.pass, verdict_value(&v)))
        }
        Command::KappaRange {
            input,
            mode,
            tol,
            kappa_min,
            kappa_max,
        } => {
            if let (Some(lo), Some(hi)) = (kappa_min, kappa_max) {
                if lo > hi {
                    return Err(bad("kappa range lower bound exceeds upper bound"));
                }
            }
            let m = load_metric(input)?;
            let est = match mode.as_str() {
                "cbb" => cbb_sup_kappa(&m, *tol),
                "cat" => cat_inf_kappa(&m, *tol),
                other => return Err(bad(format!("mode must be cbb or cat, got {other:?}"))),
            };
            let pass = est.value.is_finite();
            Ok(wrap(
                "kappa-range",
                pass,
                serde_json::to_value(&est).expect("estimate"),
            ))
        }
        Command::OnePlusN { input, p, xs, kt } => {
            let m = load_metric(input)?;
            let xs = match xs {
                Some(s) => parse_index_list(s)?,
                None => (0..m.n).filter(|i| i != p).collect(),
            };
            let out = one_plus_n_test(&m, *p, &xs, kt.kappa).map_err(|e| bad(e.to_string()))?;
            let pass = out.verdict.pass;
            Ok(wrap(
                "one-plus-n",
                pass,
                json!({
                    "verdict": verdict_value(&out.verdict),
                    "residual": out.residual,
                }),
            ))
        }
        Command::Sturm { input, p, xs } => {
            let m = load_metric(input)?;
            let xs = match xs {
                Some(s) => parse_index_list(s)?,
                None => (0..m.n).filter(|i| i != p).collect(),
            };
            let v = sturm_test(&m, *p, &xs);
            Ok(wrap("sturm", v.pass, verdict_value(&v)))
        }
        Command::Extend { input } => {
            let f: ExtendFile = io::read_json(input)?;
            let m = crate::metric::validate_metric(&f.matrix).map_err(|e| bad(e.to_string()))?;
            let images: Vec<ModelPoint> =
                f.images.into_iter().map(ModelPoint::new).collect();
            let out = kirszbraun_extend(&m, f.p, &f.xs, &images, f.kappa, f.dim)
                .map_err(|e| bad(e.to_string()))?;
            let pass = out.point.is_some() && !out.soundness_fault;
            Ok(wrap(
                "extend",
                pass,
                json!({
                    "margin": out.margin,
                    "point": out.point.map(|p| p.coords),
                    "soundness_fault": out.soundness_fault,
                }),
            ))
        }
        Command::Barycenter { input, plot } => {
            let f: BarycenterFile = io::read_json(input)?;
            let anchors: Vec<ModelPoint> = f.anchors.into_iter().map(ModelPoint::new).collect();
            let w = SimplexWeights::new(f.weights).map_err(|e| bad(e.to_string()))?;
            let q = barycentric_point(f.kappa, &anchors, &w).map_err(|e| bad(e.to_string()))?;
            let pts: Vec<Vec<f64>> = anchors.iter().map(|a| a.coords.clone()).collect();
            maybe_plot(&cli.out, *plot, &polyline_svg(&pts, &[q.coords.clone()]))?;
            Ok(wrap("barycenter", true, json!({ "point": q.coords })))
        }
        Command::Web { input, anchors, kt } => {
            let m = load_metric(input)?;
            let idx = parse_index_list(anchors)?;
            let out = web_compute(&m, &idx, kt.kappa);
            Ok(wrap(
                "web",
                true,
                json!({ "web": out.web, "inner": out.inner }),
            ))
        }
        Command::Develop { input, plot } => {
            let f: DevelopFile = io::read_json(input)?;
            let dev =
                develop_polyline(f.kappa, &f.rho, &f.chords).map_err(|e| bad(e.to_string()))?;
            let mut dev = dev;
            if let Some(tol) = f.tol {
                dev.verdict.pass = dev.verdict.margin >= -tol;
            }
            let pts: Vec<Vec<f64>> = dev
                .rho
                .iter()
                .zip(&dev.theta)
                .map(|(&r, &t)| vec![r * t.cos(), r * t.sin()])
                .collect();
            maybe_plot(&cli.out, *plot, &polyline_svg(&pts, &[vec![0.0, 0.0]]))?;
            let pass = dev.verdict.pass;
            Ok(wrap(
                "develop",
                pass,
                json!({
                    "rho": dev.rho,
                    "theta": dev.theta,
                    "verdict": verdict_value(&dev.verdict),
                }),
            ))
        }
        Command::Radial { input, plot } => {
            let f: RadialFile = io::read_json(input)?;
            let sp = parse_domain(&f.dom.domain)?;
            let c = radial_curve(&sp, &f.p, &f.x, f.dom.kappa, f.step, f.s_max)
                .map_err(|e| bad(e.to_string()))?;
            maybe_plot(&cli.out, *plot, &polyline_svg(&c.points, &[f.p.clone()]))?;
            Ok(wrap(
                "radial",
                true,
                json!({ "params": c.params, "points": c.points }),
            ))
        }
        Command::Gradflow { input } => {
            let f: GradflowFile = io::read_json(input)?;
            let sp = parse_domain(&f.dom.domain)?;
            let obj = parse_objective(&f.objective)?;
            let c = gradient_curve(&sp, &obj, &f.x0, f.h, f.horizon)
                .map_err(|e| bad(e.to_string()))?;
            let v = self_contracting_check(&c, 4.0 * f.h, 150);
            let pass = v.pass;
            Ok(wrap(
                "gradflow",
                pass,
                json!({
                    "params": c.params,
                    "points": c.points,
                    "self_contracting": verdict_value(&v),
                }),
            ))
        }
        Command::Cone { input, radii, kt } => {
            let fiber = load_metric(input)?;
            let radii = parse_float_list(radii)?;
            let cone =
                cone_space(&fiber, &radii, kt.kappa).map_err(|e| bad(e.to_string()))?;
            Ok((metric_to_csv(&[], &cone.metric), 0))
        }
        Command::Suspend { input, heights } => {
            let fiber = load_metric(input)?;
            let heights = match heights {
                Some(s) => parse_float_list(s)?,
                None => (0..=6).map(|k| PI * k as f64 / 6.0).collect(),
            };
            let sus = suspension_space(&fiber, &heights).map_err(|e| bad(e.to_string()))?;
            Ok((metric_to_csv(&[], &sus.metric), 0))
        }
        Command::Double { input, set } => {
            let (_, s) = read_graph_json(input)?;
            let a = parse_index_list(set)?;
            let d = doubling(&s, &a).map_err(|e| bad(e.to_string()))?;
            let gf = GraphFile {
                vertices: (0..d.n).map(|i| format!("v{i}")).collect(),
                edges: d.edges.clone(),
                tags: d.tags.clone(),
            };
            Ok((graph_to_json(&gf) + "\n", 0))
        }
        Command::WarpDist {
            tag,
            base_min,
            base_max,
            p,
            q,
            ell,
        } => {
            let tag = match tag.as_str() {
                "id" => WarpTag::Id,
                "sin" => WarpTag::Sin,
                "sinh" => WarpTag::Sinh,
                "cosh" => WarpTag::Cosh,
                "exp" => WarpTag::Exp,
                "const-1" => WarpTag::ConstOne,
                other => return Err(bad(format!("unknown warp tag {other:?}"))),
            };
            let spec = WarpSpec {
                a: *base_min,
                b: *base_max,
                tag,
                fiber: circle_metric(4, 2.0 * PI),
            };
            let d = warped_1d_distance(&spec, *p, *q, *ell).map_err(|e| bad(e.to_string()))?;
            Ok(wrap("warp-dist", true, json!({ "distance": d })))
        }
        Command::Pack { input, eps } => {
            let m = load_metric(input)?;
            if *eps <= 0.0 {
                return Err(bad("eps must be positive"));
            }
            let (count, picked) = pack_eps(&m, *eps);
            Ok(wrap(
                "pack",
                true,
                json!({ "count": count, "packing": picked }),
            ))
        }
        Command::Gen {
            kind,
            kappa,
            n,
            param,
        } => {
            let text = match kind.as_str() {
                "sphere" => {
                    let k = if *kappa > 0.0 { *kappa } else { 1.0 };
                    metric_to_csv(&[], &sample_model_space(k, 2, *n, seed).0)
                }
                "hyperbolic" => {
                    let k = if *kappa < 0.0 { *kappa } else { -1.0 };
                    metric_to_csv(&[], &sample_model_space(k, 2, *n, seed).0)
                }
                "plane" => metric_to_csv(&[], &sample_model_space(0.0, 2, *n, seed).0),
                "euclidean" => metric_to_csv(&[], &sample_model_space(0.0, 3, *n, seed).0),
                "tripod" => metric_to_csv(&[], &tripod_metric()),
                "circle" => metric_to_csv(&[], &circle_metric(*n, param.unwrap_or(2.0 * PI))),
                "net-plane" | "net-sphere" | "net-cone" => {
                    let h = param.unwrap_or(0.1);
                    let kind = match kind.as_str() {
                        "net-plane" => SurfaceKind::Plane,
                        "net-sphere" => SurfaceKind::Sphere { kappa: 1.0 },
                        _ => SurfaceKind::Cone {
                            total_angle: 2.5 * PI,
                        },
                    };
                    let net = net_of_surface(kind, h).map_err(|e| bad(e.to_string()))?;
                    let gf = GraphFile {
                        vertices: (0..net.n).map(|i| format!("v{i}")).collect(),
                        edges: net.edges.clone(),
                        tags: net.tags.clone(),
                    };
                    graph_to_json(&gf) + "\n"
                }
                other => return Err(bad(format!("unknown generator {other:?}"))),
            };
            Ok((text, 0))
        }
        Command::VerifySuite { criteria } => {
            let only: Option<Vec<u32>> = match criteria {
                Some(s) => Some(
                    s.split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<u32>()
                                .map_err(|_| bad(format!("bad criterion id {t:?}")))
                        })
                        .collect::<Result<_, _>>()?,
                ),
                None => None,
            };
            let rep = verify_suite(seed, &cli.seed, only.as_deref());
            let pass = rep.pass;
            let text = serde_json::to_string_pretty(&rep).expect("report") + "\n";
            Ok((text, if pass { 0 } else { 1 }))
        }
    }
}
