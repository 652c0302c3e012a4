//! Four-point curvature comparison tests (below and above), curvature
//! threshold location, point-on-side and thin/fat triangle checks, and the
//! matrix-flavored criteria: Sturm's copositivity test and the (1+n)-point
//! feasibility test.

use crate::linalg;
use crate::metric::{FiniteMetric, SampledSpace, Witness};
use crate::model::{self, model_angle, model_side, Model, ModelError, ModelPoint, TriangleSides};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Base numeric tolerance for verdicts on exact finite metrics.  Sampled
/// spaces add their discretization budget on top.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bisection resolution for curvature thresholds.
pub const KAPPA_RESOLUTION: f64 = 1e-4;

/// Curvature ladder bound: searches do not look past +-this value.
pub const KAPPA_LADDER: f64 = 65536.0;

/// Outcome of a comparison decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// Signed slack of the binding inequality: pass iff margin >= -tolerance.
    pub margin: f64,
    pub witness: Option<Witness>,
    /// Sub-checks that passed only because a model angle was undefined.
    pub vacuous_count: usize,
    /// Total sub-checks examined.
    pub checked: usize,
    /// True when the decision procedure is a heuristic search.
    pub heuristic: bool,
    /// True when the procedure could not decide either way.
    pub inconclusive: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    pub(crate) fn new(pass: bool, margin: f64) -> Self {
        Verdict {
            pass,
            margin,
            witness: None,
            vacuous_count: 0,
            checked: 0,
            heuristic: false,
            inconclusive: false,
            notes: Vec::new(),
        }
    }

    pub fn fully_vacuous(&self) -> bool {
        self.checked > 0 && self.vacuous_count == self.checked
    }

    pub fn has_fault(&self) -> bool {
        self.notes.iter().any(|n| n.starts_with("internal-fault"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Cbb,
    Cat,
}

/// Comparison angle at `p` between `x` and `y` from a distance table.
#[inline]
pub fn comparison_angle(m: &FiniteMetric, kappa: f64, p: usize, x: usize, y: usize) -> Option<f64> {
    model_angle(kappa, m.get(x, y), m.get(p, x), m.get(p, y))
}

/// Four-point test for curvature bounded below: the three comparison angles
/// at `p` sum to at most 2*pi, vacuously satisfied when an angle is
/// undefined.
pub fn cbb_four_point(m: &FiniteMetric, p: usize, xs: [usize; 3], kappa: f64, tol: f64) -> Verdict {
    let [x1, x2, x3] = xs;
    assert!(p != x1 && p != x2 && p != x3 && x1 != x2 && x1 != x3 && x2 != x3);
    let angles = [
        comparison_angle(m, kappa, p, x1, x2),
        comparison_angle(m, kappa, p, x2, x3),
        comparison_angle(m, kappa, p, x3, x1),
    ];
    let mut v;
    if angles.iter().any(|a| a.is_none()) {
        v = Verdict::new(true, f64::INFINITY);
        v.vacuous_count = 1;
        v.notes.push("vacuous: undefined comparison angle".into());
    } else {
        let sum: f64 = angles.iter().map(|a| a.unwrap()).sum();
        let margin = 2.0 * PI - sum;
        v = Verdict::new(margin >= -tol, margin);
        if !v.pass {
            v.witness = Some(Witness {
                tuple: vec![p, x1, x2, x3],
                margin,
                note: format!("angle sum {sum} exceeds 2*pi"),
            });
        }
    }
    v.checked = 1;
    v
}

/// Minimize f over [lo, hi]: coarse grid then golden-section refinement.
fn minimize_scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    const GRID: usize = 32;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=GRID {
        let t = lo + (hi - lo) * i as f64 / GRID as f64;
        let v = f(t);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = lo + (hi - lo) * (best_i.saturating_sub(1)) as f64 / GRID as f64;
    let mut b = lo + (hi - lo) * ((best_i + 1).min(GRID)) as f64 / GRID as f64;
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t).min(best_v).min(fc).min(fd))
}

fn tangent2(kappa: f64, phi: f64, len: f64) -> Vec<f64> {
    let (e1, e2) = (phi.cos() * len, phi.sin() * len);
    if kappa == 0.0 {
        vec![e1, e2]
    } else {
        vec![0.0, e1, e2]
    }
}

/// The segment form of the CAT four-point condition: lay the two model
/// triangles on opposite sides of the common side [p1 p2] and minimize the
/// broken chain |x1 z| + |z x2| over z on the segment.  Returns the chain
/// slack min - |x1 x2|, or None when a needed model angle is undefined.
fn cat_segment_margin(
    m: &FiniteMetric,
    p1: usize,
    p2: usize,
    x1: usize,
    x2: usize,
    kappa: f64,
) -> Option<f64> {
    let b1 = comparison_angle(m, kappa, p1, p2, x1)?;
    let c1 = comparison_angle(m, kappa, p1, p2, x2)?;
    let d12 = m.get(p1, p2);
    if d12 <= 0.0 {
        return None;
    }
    let md = Model::new(kappa, 2);
    let pp1 = md.base();
    let pp2 = md.exp(&pp1, &tangent2(kappa, 0.0, d12));
    let xx1 = md.exp(&pp1, &tangent2(kappa, b1, m.get(p1, x1)));
    let xx2 = md.exp(&pp1, &tangent2(kappa, -c1, m.get(p1, x2)));
    let chain = |t: f64| -> f64 {
        match md.geodesic_point(&pp1, &pp2, t) {
            Ok(z) => md.distance(&xx1, &z) + md.distance(&z, &xx2),
            Err(_) => f64::INFINITY,
        }
    };
    let (_, min_chain) = minimize_scalar(chain, 0.0, 1.0, 1e-9);
    Some(min_chain - m.get(x1, x2))
}

/// Four-point test for curvature bounded above, in the angle form
/// (triangle inequality for comparison angles at p1 or at p2), cross-checked
/// against the segment form.  Disagreement between the two criteria beyond
/// the numeric band is recorded as an internal fault.
pub fn cat_four_point(m: &FiniteMetric, p1: usize, p2: usize, x1: usize, x2: usize, kappa: f64, tol: f64) -> Verdict {
    assert!(p1 != p2 && p1 != x1 && p1 != x2 && p2 != x1 && p2 != x2 && x1 != x2);
    let a1 = comparison_angle(m, kappa, p1, x1, x2);
    let b1 = comparison_angle(m, kappa, p1, p2, x1);
    let c1 = comparison_angle(m, kappa, p1, p2, x2);
    let a2 = comparison_angle(m, kappa, p2, x1, x2);
    let b2 = comparison_angle(m, kappa, p2, p1, x1);
    let c2 = comparison_angle(m, kappa, p2, p1, x2);
    let mut v;
    if [a1, b1, c1, a2, b2, c2].iter().any(|a| a.is_none()) {
        v = Verdict::new(true, f64::INFINITY);
        v.vacuous_count = 1;
        v.notes.push("vacuous: undefined comparison angle".into());
        v.checked = 1;
        return v;
    }
    let s1 = b1.unwrap() + c1.unwrap() - a1.unwrap();
    let s2 = b2.unwrap() + c2.unwrap() - a2.unwrap();
    let margin = s1.max(s2);
    v = Verdict::new(margin >= -tol, margin);
    if !v.pass {
        v.witness = Some(Witness {
            tuple: vec![p1, p2, x1, x2],
            margin,
            note: "angle triangle inequality fails at both p-vertices".into(),
        });
    }
    // cross-check with the segment form (length-valued slack)
    if let Some(seg) = cat_segment_margin(m, p1, p2, x1, x2, kappa) {
        let seg_pass = seg >= -tol - 1e-7;
        if seg_pass != v.pass && margin.abs() > 1e-6 && seg.abs() > 1e-6 {
            v.notes.push(format!(
                "internal-fault: angle form margin {margin} vs segment form margin {seg}"
            ));
        }
    }
    v.checked = 1;
    v
}

/// Flat table of comparison angles: entry [p][i][j]; NaN marks undefined.
fn angle_table(m: &FiniteMetric, kappa: f64) -> Vec<f64> {
    let n = m.n;
    let mut t = vec![f64::NAN; n * n * n];
    for p in 0..n {
        for i in 0..n {
            if i == p {
                continue;
            }
            for j in (i + 1)..n {
                if j == p {
                    continue;
                }
                let a = comparison_angle(m, kappa, p, i, j).unwrap_or(f64::NAN);
                t[(p * n + i) * n + j] = a;
                t[(p * n + j) * n + i] = a;
            }
        }
    }
    t
}

struct ScanAccum {
    min_margin: f64,
    witness: Option<Witness>,
    vacuous: usize,
    checked: usize,
}

fn merge_accums(chunks: Vec<ScanAccum>) -> ScanAccum {
    let mut out = ScanAccum {
        min_margin: f64::INFINITY,
        witness: None,
        vacuous: 0,
        checked: 0,
    };
    for c in chunks {
        if c.min_margin < out.min_margin {
            out.min_margin = c.min_margin;
        }
        if out.witness.is_none() {
            out.witness = c.witness;
        }
        out.vacuous += c.vacuous;
        out.checked += c.checked;
    }
    out
}

/// Parallelism budget: explicit request, else CURVKIT_JOBS, else 1.
pub fn effective_jobs(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var("CURVKIT_JOBS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

fn run_chunked(n_units: usize, jobs: usize, work: impl Fn(usize, usize) -> ScanAccum + Sync) -> ScanAccum {
    let jobs = jobs.min(n_units.max(1));
    if jobs <= 1 {
        return work(0, n_units);
    }
    let chunk = n_units.div_ceil(jobs);
    let mut results: Vec<ScanAccum> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|k| {
                let lo = k * chunk;
                let hi = ((k + 1) * chunk).min(n_units);
                let work = &work;
                scope.spawn(move || work(lo, hi))
            })
            .collect();
        // joined in spawn order, so the merge is schedule-independent
        results = handles.into_iter().map(|h| h.join().unwrap()).collect();
    });
    merge_accums(results)
}

fn is_cbb_with_jobs(m: &FiniteMetric, kappa: f64, tol: f64, jobs: usize) -> Verdict {
    let n = m.n;
    if n < 4 {
        let mut v = Verdict::new(true, f64::INFINITY);
        v.notes.push("vacuous: fewer than 4 points".into());
        return v;
    }
    let table = angle_table(m, kappa);
    let at = |p: usize, i: usize, j: usize| table[(p * n + i) * n + j];
    let acc = run_chunked(n, effective_jobs(Some(jobs)), |plo, phi| {
        let mut acc = ScanAccum {
            min_margin: f64::INFINITY,
            witness: None,
            vacuous: 0,
            checked: 0,
        };
        for p in plo..phi {
            for i in 0..n {
                if i == p {
                    continue;
                }
                for j in (i + 1)..n {
                    if j == p {
                        continue;
                    }
                    for k in (j + 1)..n {
                        if k == p {
                            continue;
                        }
                        acc.checked += 1;
                        let s = at(p, i, j) + at(p, i, k) + at(p, j, k);
                        if s.is_nan() {
                            acc.vacuous += 1;
                            continue;
                        }
                        let margin = 2.0 * PI - s;
                        if margin < acc.min_margin {
                            acc.min_margin = margin;
                        }
                        if margin < -tol && acc.witness.is_none() {
                            acc.witness = Some(Witness {
                                tuple: vec![p, i, j, k],
                                margin,
                                note: format!("angle sum {s} at vertex {p}"),
                            });
                        }
                    }
                }
            }
        }
        acc
    });
    let mut v = Verdict::new(acc.witness.is_none(), acc.min_margin);
    v.witness = acc.witness;
    v.vacuous_count = acc.vacuous;
    v.checked = acc.checked;
    v
}

/// Exhaustive four-point test for curvature bounded below over all
/// quadruples.  The witness is the first violating quadruple in scan order.
pub fn is_cbb(m: &FiniteMetric, kappa: f64, tol: f64) -> Verdict {
    is_cbb_with_jobs(m, kappa, tol, effective_jobs(None))
}

fn is_cat_with_jobs(m: &FiniteMetric, kappa: f64, tol: f64, jobs: usize) -> Verdict {
    let n = m.n;
    if n < 4 {
        let mut v = Verdict::new(true, f64::INFINITY);
        v.notes.push("vacuous: fewer than 4 points".into());
        return v;
    }
    let table = angle_table(m, kappa);
    let at = |p: usize, i: usize, j: usize| table[(p * n + i) * n + j];
    let acc = run_chunked(n, effective_jobs(Some(jobs)), |alo, ahi| {
        let mut acc = ScanAccum {
            min_margin: f64::INFINITY,
            witness: None,
            vacuous: 0,
            checked: 0,
        };
        for a in alo..ahi {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        acc.checked += 1;
                        let quad = [a, b, c, d];
                        let mut best = f64::NEG_INFINITY;
                        let mut vacuous_pass = false;
                        for l in 0..4 {
                            let p = quad[l];
                            let rest: Vec<usize> =
                                quad.iter().copied().filter(|&q| q != p).collect();
                            let (x, y, z) = (rest[0], rest[1], rest[2]);
                            let (al, be, ga) = (at(p, x, y), at(p, x, z), at(p, y, z));
                            if al.is_nan() || be.is_nan() || ga.is_nan() {
                                vacuous_pass = true;
                                continue;
                            }
                            let lm = (be + ga - al).min(al + ga - be).min(al + be - ga);
                            if lm > best {
                                best = lm;
                            }
                        }
                        if best >= -tol {
                            if best < acc.min_margin {
                                acc.min_margin = best;
                            }
                            continue;
                        }
                        if vacuous_pass {
                            acc.vacuous += 1;
                            continue;
                        }
                        if best < acc.min_margin {
                            acc.min_margin = best;
                        }
                        if acc.witness.is_none() {
                            acc.witness = Some(Witness {
                                tuple: quad.to_vec(),
                                margin: best,
                                note: "no labeling satisfies the angle triangle inequalities".into(),
                            });
                        }
                    }
                }
            }
        }
        acc
    });
    let mut v = Verdict::new(acc.witness.is_none(), acc.min_margin);
    v.witness = acc.witness;
    v.vacuous_count = acc.vacuous;
    v.checked = acc.checked;
    v
}

/// Exhaustive four-point test for curvature bounded above: a quadruple
/// passes when some labeling (p, x1, x2, x3) makes the three comparison
/// angles at p satisfy all triangle inequalities, or has an undefined angle.
pub fn is_cat(m: &FiniteMetric, kappa: f64, tol: f64) -> Verdict {
    is_cat_with_jobs(m, kappa, tol, effective_jobs(None))
}

/// Result of a curvature-threshold search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaEstimate {
    /// The located threshold; +-infinity when no informative pass exists
    /// inside the ladder.
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub note: String,
}

fn informative_cbb(m: &FiniteMetric, kappa: f64, tol: f64) -> bool {
    let v = is_cbb(m, kappa, tol);
    v.pass && !v.fully_vacuous()
}

fn informative_cat(m: &FiniteMetric, kappa: f64, tol: f64) -> bool {
    let v = is_cat(m, kappa, tol);
    v.pass && !v.fully_vacuous()
}

/// Largest curvature at which the whole table passes the lower-bound
/// four-point scan, located by ladder search and bisection.  Fully vacuous
/// passes (every quadruple undefined) are treated as uninformative.
pub fn cbb_sup_kappa(m: &FiniteMetric, tol: f64) -> KappaEstimate {
    threshold_search(m, tol, informative_cbb, true)
}

/// Smallest curvature at which the whole table passes the upper-bound
/// four-point scan.
pub fn cat_inf_kappa(m: &FiniteMetric, tol: f64) -> KappaEstimate {
    threshold_search(m, tol, informative_cat, false)
}

/// `upward_pass_region = true`: pass region is (-inf, k*], locate the sup.
/// Otherwise the pass region is [k*, +inf), locate the inf.
fn threshold_search(
    m: &FiniteMetric,
    tol: f64,
    ok: impl Fn(&FiniteMetric, f64, f64) -> bool,
    sup_mode: bool,
) -> KappaEstimate {
    // direction in which passing improves
    let toward_pass = if sup_mode { -1.0 } else { 1.0 };
    let at = |k: f64| ok(m, k, tol);
    let (mut pass_k, mut fail_k);
    if at(0.0) {
        pass_k = 0.0;
        // walk away from the pass region looking for a failure
        let mut k: f64 = -toward_pass;
        loop {
            if k.abs() > KAPPA_LADDER {
                return KappaEstimate {
                    value: -toward_pass * KAPPA_LADDER,
                    lo: if sup_mode { pass_k } else { -KAPPA_LADDER },
                    hi: if sup_mode { KAPPA_LADDER } else { pass_k },
                    note: "still passing at the ladder bound; reporting the bracket end".into(),
                };
            }
            if at(k) {
                pass_k = k;
                k *= 2.0;
            } else {
                fail_k = k;
                break;
            }
        }
    } else {
        fail_k = 0.0;
        let mut k: f64 = toward_pass;
        loop {
            if k.abs() > KAPPA_LADDER {
                let value = if sup_mode { f64::NEG_INFINITY } else { f64::INFINITY };
                return KappaEstimate {
                    value,
                    lo: value,
                    hi: value,
                    note: "no informative pass anywhere inside the ladder".into(),
                };
            }
            if at(k) {
                pass_k = k;
                break;
            } else {
                fail_k = k;
                k *= 2.0;
            }
        }
    }
    while (pass_k - fail_k).abs() > KAPPA_RESOLUTION {
        let mid = 0.5 * (pass_k + fail_k);
        if at(mid) {
            pass_k = mid;
        } else {
            fail_k = mid;
        }
    }
    KappaEstimate {
        value: pass_k,
        lo: pass_k.min(fail_k),
        hi: pass_k.max(fail_k),
        note: String::new(),
    }
}

/// Point-on-side comparison along a recovered geodesic: for every interior
/// vertex z of the graph geodesic [xy], the model distance from p-vertex to
/// the matching point on the model side is compared with |pz| (at most |pz|
/// for the lower bound, at least for the upper bound).
pub fn point_on_side_check(s: &SampledSpace, x: usize, y: usize, p: usize, kappa: f64, side: Side) -> Verdict {
    let m = &s.metric;
    let tol = DEFAULT_TOL + 4.0 * s.delta_h;
    let path = s.geodesic(x, y);
    let dxy = m.get(x, y);
    let phi = model_angle(kappa, m.get(p, y), m.get(p, x), dxy);
    let mut v;
    let degenerate = phi.is_none()
        || (m.get(x, p) + m.get(p, y) - dxy).abs() <= tol
        || path.contains(&p);
    if degenerate {
        v = Verdict::new(true, f64::INFINITY);
        v.vacuous_count = 1;
        v.checked = 1;
        v.notes.push("vacuous: degenerate configuration or undefined angle".into());
        return v;
    }
    let phi = phi.unwrap();
    v = Verdict::new(true, f64::INFINITY);
    for &z in &path[1..path.len().saturating_sub(1)] {
        let t = m.get(x, z);
        let model_pz = match model_side(kappa, phi, m.get(p, x), t) {
            Ok(d) => d,
            Err(_) => continue,
        };
        v.checked += 1;
        let margin = match side {
            Side::Cbb => m.get(p, z) - model_pz,
            Side::Cat => model_pz - m.get(p, z),
        };
        if margin < v.margin {
            v.margin = margin;
        }
        if margin < -tol && v.witness.is_none() {
            v.witness = Some(Witness {
                tuple: vec![x, y, p, z],
                margin,
                note: format!("model distance {model_pz} vs graph distance {}", m.get(p, z)),
            });
        }
    }
    v.pass = v.witness.is_none();
    v
}

/// Distortion margins of the natural side-to-side correspondence between a
/// triangle in a sampled space and its model triangle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThinFat {
    /// min over sampled cross-side pairs of (model distance - space distance);
    /// nonnegative when the triangle is thin for this curvature.
    pub thin_margin: f64,
    /// min over sampled cross-side pairs of (space distance - model distance);
    /// nonnegative when the triangle is fat.
    pub fat_margin: f64,
    pub pairs: usize,
}

/// Compare pairwise distances between points on the sides of the triangle
/// (x, y, z) with their images on the model triangle.  Samples are interior
/// geodesic vertices in the middle of each side (corner neighborhoods are
/// excluded, where the correspondence is trivially near-isometric).
pub fn thin_fat_triangle(s: &SampledSpace, x: usize, y: usize, z: usize, kappa: f64) -> Result<ThinFat, ModelError> {
    let m = &s.metric;
    let sides = TriangleSides::new(m.get(y, z), m.get(x, z), m.get(x, y));
    let tri = model::lay_triangle(kappa, sides)?;
    let md = Model::new(kappa, 2);
    // (endpoint indices, model endpoints) per side
    let layout = [
        ((x, y), (&tri[0], &tri[1])),
        ((x, z), (&tri[0], &tri[2])),
        ((y, z), (&tri[1], &tri[2])),
    ];
    let mut samples: Vec<(usize, usize, ModelPoint)> = Vec::new(); // (side, vertex, image)
    for (si, ((u, vtx), (mu, mv))) in layout.iter().enumerate() {
        let duv = m.get(*u, *vtx);
        if duv <= 0.0 {
            continue;
        }
        let path = s.geodesic(*u, *vtx);
        let inner: Vec<usize> = path
            .iter()
            .copied()
            .filter(|&w| {
                let f = m.get(*u, w) / duv;
                f >= 0.2 && f <= 0.8
            })
            .collect();
        let step = (inner.len() / 16).max(1);
        for &w in inner.iter().step_by(step) {
            let t = m.get(*u, w) / duv;
            let img = md.geodesic_point(mu, mv, t)?;
            samples.push((si, w, img));
        }
    }
    let mut thin = f64::INFINITY;
    let mut fat = f64::INFINITY;
    let mut pairs = 0;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            if samples[i].0 == samples[j].0 {
                continue;
            }
            let d_space = m.get(samples[i].1, samples[j].1);
            let d_model = md.distance(&samples[i].2, &samples[j].2);
            thin = thin.min(d_model - d_space);
            fat = fat.min(d_space - d_model);
            pairs += 1;
        }
    }
    Ok(ThinFat { thin_margin: thin, fat_margin: fat, pairs })
}

/// Squared-distance table of the chosen points.
pub fn decrypting_matrix(m: &FiniteMetric, pts: &[usize]) -> Vec<Vec<f64>> {
    pts.iter()
        .map(|&i| pts.iter().map(|&j| m.get(i, j).powi(2)).collect())
        .collect()
}

/// Sturm's matrix inequality: the Gram-style matrix
/// m_ij = (|x_i p|^2 + |x_j p|^2 - |x_i x_j|^2) / 2 must be copositive.
/// Exact by support enumeration for n <= 4; multistart heuristic beyond.
pub fn sturm_test(m: &FiniteMetric, p: usize, xs: &[usize]) -> Verdict {
    let n = xs.len();
    assert!(n >= 1);
    let mat: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    0.5 * (m.get(xs[i], p).powi(2) + m.get(xs[j], p).powi(2)
                        - m.get(xs[i], xs[j]).powi(2))
                })
                .collect()
        })
        .collect();
    let scale = mat
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let (min_val, s) = if n <= 4 {
        linalg::simplex_quadratic_min_exact(&mat)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5712);
        linalg::simplex_quadratic_min_multistart(&mat, 200, &mut rng)
    };
    let mut v = Verdict::new(min_val >= -DEFAULT_TOL * scale, min_val);
    v.checked = 1;
    v.heuristic = n > 4;
    if !v.pass {
        v.witness = Some(Witness {
            tuple: xs.to_vec(),
            margin: min_val,
            note: format!("negative form value at weights {s:?}"),
        });
    }
    v
}

/// Outcome of the (1+n)-point feasibility test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnePlusNOutcome {
    pub verdict: Verdict,
    /// Feasible Gram certificate (unit diagonal, PSD, entrywise below the
    /// angle cosines).
    pub gram: Option<Vec<Vec<f64>>>,
    /// Dual infeasibility certificate: nonnegative weights making the cosine
    /// matrix indefinite on the simplex.
    pub dual: Option<Vec<f64>>,
    /// Final alternating-projection gap.
    pub residual: f64,
    /// Realized model array when feasible: p-vertex image first.
    pub model_points: Option<Vec<ModelPoint>>,
}

fn frob_dist(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            acc += (x - y) * (x - y);
        }
    }
    acc.sqrt()
}

/// Existence of a model array around a p-vertex: points at the prescribed
/// radii whose pairwise distances dominate the originals.  Reduced to the
/// feasibility of a PSD matrix with unit diagonal bounded by the comparison
/// angle cosines, decided by alternating projections with a copositivity
/// dual certificate for infeasibility.
pub fn one_plus_n_test(m: &FiniteMetric, p: usize, xs: &[usize], kappa: f64) -> Result<OnePlusNOutcome, ModelError> {
    let n = xs.len();
    assert!(n >= 1);
    if kappa > 0.0 {
        let half = 0.5 * model::varpi(kappa);
        for &x in xs {
            if m.get(p, x) >= half {
                return Err(ModelError::OutOfDomain(format!(
                    "radius {} reaches varpi/2 = {half}",
                    m.get(p, x)
                )));
            }
        }
    }
    let mut cosines = vec![vec![1.0; n]; n];
    let mut vacuous = false;
    for i in 0..n {
        for j in (i + 1)..n {
            match comparison_angle(m, kappa, p, xs[i], xs[j]) {
                Some(th) => {
                    cosines[i][j] = th.cos();
                    cosines[j][i] = th.cos();
                }
                None => vacuous = true,
            }
        }
    }
    if vacuous {
        let mut v = Verdict::new(true, f64::INFINITY);
        v.vacuous_count = 1;
        v.checked = 1;
        v.notes.push("vacuous: undefined comparison angle".into());
        return Ok(OnePlusNOutcome {
            verdict: v,
            gram: None,
            dual: None,
            residual: 0.0,
            model_points: None,
        });
    }
    // dual certificate first: s >= 0 with s' C s < 0 proves infeasibility,
    // since any admissible G satisfies 0 <= s' G s <= s' C s
    let (copos_val, copos_s) = if n <= 4 {
        linalg::simplex_quadratic_min_exact(&cosines)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1493);
        linalg::simplex_quadratic_min_multistart(&cosines, 200, &mut rng)
    };
    if copos_val < -1e-7 {
        let mut v = Verdict::new(false, copos_val);
        v.checked = 1;
        v.heuristic = n > 4;
        v.witness = Some(Witness {
            tuple: xs.to_vec(),
            margin: copos_val,
            note: format!("dual certificate weights {copos_s:?}"),
        });
        return Ok(OnePlusNOutcome {
            verdict: v,
            gram: None,
            dual: Some(copos_s),
            residual: f64::INFINITY,
            model_points: None,
        });
    }
    // alternating projections (Dykstra) between the PSD cone and the box
    let box_project = |g: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut out = g.to_vec();
        for i in 0..n {
            out[i][i] = 1.0;
            for j in 0..n {
                if i != j {
                    out[i][j] = out[i][j].min(cosines[i][j]);
                }
            }
        }
        out
    };
    let add = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        a.iter()
            .zip(b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
            .collect()
    };
    let sub = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        a.iter()
            .zip(b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
            .collect()
    };
    let mut x = cosines.clone();
    let mut pc = vec![vec![0.0; n]; n];
    let mut qc = vec![vec![0.0; n]; n];
    let mut residual = f64::INFINITY;
    let mut psd_iter = x.clone();
    for _ in 0..2000 {
        let y = linalg::psd_project(&add(&x, &pc));
        pc = sub(&add(&x, &pc), &y);
        let x2 = box_project(&add(&y, &qc));
        qc = sub(&add(&y, &qc), &x2);
        residual = frob_dist(&y, &x2);
        x = x2;
        psd_iter = y;
        if residual < 1e-12 {
            break;
        }
    }
    let mut out = OnePlusNOutcome {
        verdict: Verdict::new(false, 0.0),
        gram: None,
        dual: None,
        residual,
        model_points: None,
    };
    if residual < 1e-7 {
        let gram = psd_iter;
        let mut v = Verdict::new(true, -residual);
        v.checked = 1;
        // realize the array in curvature kappa, dimension n
        let (vals, vecs) = linalg::jacobi_eigen(&gram);
        let model = Model::new(kappa, n.max(2));
        let base = model.base();
        let mut pts = vec![base.clone()];
        for (i, &xi) in xs.iter().enumerate() {
            let r = m.get(p, xi);
            // direction components: xi_i[k] = sqrt(lambda_k) * u_k[i]
            let mut dir = vec![0.0; n.max(2)];
            for (k, (lam, u)) in vals.iter().zip(&vecs).enumerate() {
                if *lam > 0.0 && k < dir.len() {
                    dir[k] = lam.sqrt() * u[i];
                }
            }
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let ambient: Vec<f64> = if kappa == 0.0 {
                dir.iter().map(|x| x * r / norm).collect()
            } else {
                let mut a = vec![0.0];
                a.extend(dir.iter().map(|x| x * r / norm));
                a
            };
            pts.push(model.exp(&base, &ambient));
        }
        out.verdict = v;
        out.gram = Some(gram);
        out.model_points = Some(pts);
    } else if residual <= 1e-4 {
        let mut v = Verdict::new(false, -residual);
        v.checked = 1;
        v.inconclusive = true;
        v.notes.push(format!("projection gap {residual} in the inconclusive band"));
        out.verdict = v;
    } else {
        let mut v = Verdict::new(false, -residual);
        v.checked = 1;
        v.inconclusive = true;
        v.heuristic = n > 4;
        v.notes.push(format!(
            "projection gap {residual} large but no dual certificate found"
        ));
        out.verdict = v;
    }
    Ok(out)
}

/// Every triple of a space with curvature bounded below by kappa > 0 has
/// perimeter at most twice the model diameter.
pub fn perimeter_bound_check(m: &FiniteMetric, kappa: f64, tol: f64) -> Verdict {
    assert!(kappa > 0.0);
    let bound = 2.0 * model::varpi(kappa);
    let n = m.n;
    let mut v = Verdict::new(true, f64::INFINITY);
    if n < 3 {
        v.notes.push("vacuous: fewer than 3 points".into());
        return v;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                v.checked += 1;
                let per = m.get(i, j) + m.get(j, k) + m.get(i, k);
                let margin = bound - per;
                if margin < v.margin {
                    v.margin = margin;
                }
                if margin < -tol && v.witness.is_none() {
                    v.witness = Some(Witness {
                        tuple: vec![i, j, k],
                        margin,
                        note: format!("perimeter {per} exceeds {bound}"),
                    });
                }
            }
        }
    }
    v.pass = v.witness.is_none();
    v
}

/// Model configuration for the chained four-point comparison: end points
/// x, y and n rungs (p_i, q_i) realized in three-dimensional model space,
/// together with the source distance table over [x, p_1..p_n, q_1..q_n, y].
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub kappa: f64,
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub p: Vec<ModelPoint>,
    pub q: Vec<ModelPoint>,
    pub source: FiniteMetric,
}

impl ChainConfig {
    fn src(&self) -> (usize, impl Fn(&str, usize) -> usize) {
        let n = self.p.len();
        (n, move |kind: &str, i: usize| match kind {
            "x" => 0,
            "p" => 1 + i,
            "q" => 1 + n + i,
            _ => 1 + 2 * n,
        })
    }

    /// Check the required distance matches between the model configuration
    /// and the source table (each rung, consecutive rungs minus one pair,
    /// and the end triangles).
    pub fn validate(&self, tol: f64) -> Result<(), MetricMismatch> {
        let n = self.p.len();
        if self.q.len() != n || self.source.n != 2 * n + 2 {
            return Err(MetricMismatch {
                what: "shape".into(),
                got: self.q.len() as f64,
                want: n as f64,
            });
        }
        let dim = 3;
        let model = Model::new(self.kappa, dim);
        let (_, idx) = self.src();
        let check = |a: &ModelPoint, b: &ModelPoint, i: usize, j: usize, what: &str| -> Result<(), MetricMismatch> {
            let got = model.distance(a, b);
            let want = self.source.get(i, j);
            if (got - want).abs() > tol {
                return Err(MetricMismatch { what: what.into(), got, want });
            }
            Ok(())
        };
        for i in 0..n {
            check(&self.p[i], &self.q[i], idx("p", i), idx("q", i), "rung")?;
            if i + 1 < n {
                check(&self.p[i], &self.p[i + 1], idx("p", i), idx("p", i + 1), "p-rail")?;
                check(&self.q[i], &self.q[i + 1], idx("q", i), idx("q", i + 1), "q-rail")?;
                check(&self.p[i], &self.q[i + 1], idx("p", i), idx("q", i + 1), "diagonal")?;
                check(&self.p[i + 1], &self.q[i], idx("p", i + 1), idx("q", i), "diagonal")?;
            }
        }
        if n > 0 {
            check(&self.x, &self.p[0], idx("x", 0), idx("p", 0), "end")?;
            check(&self.x, &self.q[0], idx("x", 0), idx("q", 0), "end")?;
            check(&self.y, &self.p[n - 1], idx("y", 0), idx("p", n - 1), "end")?;
            check(&self.y, &self.q[n - 1], idx("y", 0), idx("q", n - 1), "end")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("model configuration mismatch ({what}): model {got}, source {want}")]
pub struct MetricMismatch {
    pub what: String,
    pub got: f64,
    pub want: f64,
}

/// Minimize the broken chain through one point on each rung segment and
/// compare with the source end-to-end distance.
pub fn two_n_plus_two_check(cfg: &ChainConfig, tol: f64) -> Result<Verdict, MetricMismatch> {
    cfg.validate(1e-6)?;
    let n = cfg.p.len();
    let model = Model::new(cfg.kappa, 3);
    let (_, idx) = cfg.src();
    let dxy = cfg.source.get(idx("x", 0), idx("y", 0));
    if n == 0 {
        let margin = model.distance(&cfg.x, &cfg.y) - dxy;
        let mut v = Verdict::new(margin >= -tol, margin);
        v.checked = 1;
        return Ok(v);
    }
    let mut ts = vec![0.5; n];
    let zpt = |i: usize, t: f64| model.geodesic_point(&cfg.p[i], &cfg.q[i], t).unwrap();
    let chain_val = |ts: &[f64]| -> f64 {
        let mut zs: Vec<ModelPoint> = Vec::with_capacity(n);
        for i in 0..n {
            zs.push(zpt(i, ts[i]));
        }
        let mut acc = model.distance(&cfg.x, &zs[0]);
        for i in 0..(n - 1) {
            acc += model.distance(&zs[i], &zs[i + 1]);
        }
        acc + model.distance(&zs[n - 1], &cfg.y)
    };
    let mut val = chain_val(&ts);
    for _sweep in 0..200 {
        let before = val;
        for i in 0..n {
            let left = if i == 0 { cfg.x.clone() } else { zpt(i - 1, ts[i - 1]) };
            let right = if i + 1 == n { cfg.y.clone() } else { zpt(i + 1, ts[i + 1]) };
            let f = |t: f64| {
                let z = zpt(i, t);
                model.distance(&left, &z) + model.distance(&z, &right)
            };
            let (t, _) = minimize_scalar(f, 0.0, 1.0, 1e-8);
            ts[i] = t;
        }
        val = chain_val(&ts);
        if before - val < 1e-10 {
            break;
        }
    }
    let margin = val - dxy;
    let mut v = Verdict::new(margin >= -tol, margin);
    v.checked = 1;
    if !v.pass {
        v.witness = Some(Witness {
            tuple: Vec::new(),
            margin,
            note: format!("chain minimum {val} below end distance {dxy}; parameters {ts:?}"),
        });
    }
    Ok(v)
}
