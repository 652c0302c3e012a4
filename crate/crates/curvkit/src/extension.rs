//! Constructive short-map extension: ball-intersection feasibility, the
//! short-extension step for finite configurations, barycentric simplices and
//! their Lipschitz estimates, webs, and the quadrangle fold map.

use crate::comparison;
use crate::linalg;
use crate::metric::FiniteMetric;
use crate::model::{md, model_angle, sn, Model, ModelError, ModelPoint};
use serde::{Deserialize, Serialize};

/// A finite system of metric balls in a model space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallSystem {
    pub kappa: f64,
    pub dim: usize,
    pub centers: Vec<ModelPoint>,
    pub radii: Vec<f64>,
}

/// Result of the ball-intersection search.
#[derive(Debug, Clone)]
pub struct BallIntersection {
    /// The minimizer of the worst ball excess.
    pub point: ModelPoint,
    /// max_i (dist(center_i, point) - radius_i) at the minimizer: the system
    /// has a common point iff this is <= 0 (up to tolerance).
    pub margin: f64,
    pub feasible: bool,
    pub iterations: usize,
}

const FEASIBLE_TOL: f64 = 1e-6;

fn ambient_tangent_scale(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Find a point within all balls, or certify the least worst-ball excess.
/// Minimizes the strongly convex surrogate max_i (md(dist) - md(r_i)) by
/// minimum-norm subgradient descent with a backtracking line search; the
/// surrogate has the same feasibility sign as the plain excess.
pub fn ball_intersection(b: &BallSystem) -> BallIntersection {
    assert!(b.kappa <= 0.0, "intersection search is restricted to kappa <= 0");
    assert_eq!(b.centers.len(), b.radii.len());
    let m = Model::new(b.kappa, b.dim);
    if b.centers.is_empty() {
        return BallIntersection {
            point: m.base(),
            margin: f64::NEG_INFINITY,
            feasible: true,
            iterations: 0,
        };
    }
    let nd = b.centers[0].coords.len();
    // start at the normalized ambient mean of the centers
    let mut q = ModelPoint::new((0..nd).map(|i| {
        b.centers.iter().map(|c| c.coords[i]).sum::<f64>() / b.centers.len() as f64
    }).collect());
    m.renormalize(&mut q);
    if b.kappa < 0.0 && q.coords[0] <= 0.0 {
        q = b.centers[0].clone();
    }
    let value = |q: &ModelPoint| -> f64 {
        b.centers
            .iter()
            .zip(&b.radii)
            .map(|(c, &r)| md(b.kappa, m.distance(c, q)) - md(b.kappa, r))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut active_band = 1e-10;
    let mut iters = 0;
    for _outer in 0..4000 {
        iters += 1;
        let dists: Vec<f64> = b.centers.iter().map(|c| m.distance(c, &q)).collect();
        let vals: Vec<f64> = dists
            .iter()
            .zip(&b.radii)
            .map(|(&d, &r)| md(b.kappa, d) - md(b.kappa, r))
            .collect();
        let fval = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let active: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= fval - active_band).collect();
        // subgradients of the active pieces at q
        let grads: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| {
                let d = dists[i];
                if d < 1e-12 {
                    vec![0.0; nd]
                } else {
                    let lg = m.log(&q, &b.centers[i]);
                    ambient_tangent_scale(&lg, -sn(b.kappa, d) / d)
                }
            })
            .collect();
        // minimum-norm element of the convex hull of active subgradients
        let k = grads.len();
        let gram: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| m.inner(&grads[i], &grads[j])).collect())
            .collect();
        let (_, weights) = if k <= 4 {
            linalg::simplex_quadratic_min_exact(&gram)
        } else {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            linalg::simplex_quadratic_min_multistart(&gram, 40, &mut rng)
        };
        let dir: Vec<f64> = (0..nd)
            .map(|c| grads.iter().zip(&weights).map(|(g, &w)| w * g[c]).sum())
            .collect();
        let nn = m.inner(&dir, &dir).max(0.0).sqrt();
        if nn < 1e-8 {
            break;
        }
        // backtracking step along the negated min-norm direction
        let mut t = 1.0f64.min(1.0 / nn);
        let mut improved = false;
        while t > 1e-14 {
            let step = ambient_tangent_scale(&dir, -t);
            let trial = m.exp(&q, &step);
            if value(&trial) <= fval - 0.25 * t * nn * nn {
                q = trial;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            // the active set was too narrow at a kink; widen and retry
            active_band *= 10.0;
            if active_band > 1e-4 {
                break;
            }
        }
    }
    let margin = b
        .centers
        .iter()
        .zip(&b.radii)
        .map(|(c, &r)| m.distance(c, &q) - r)
        .fold(f64::NEG_INFINITY, f64::max);
    BallIntersection {
        point: q,
        margin,
        feasible: margin <= FEASIBLE_TOL,
        iterations: iters,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExtendError {
    #[error("input map is not short: |y{i} y{j}| exceeds |x{i} x{j}| by {excess}")]
    NotShort { i: usize, j: usize, excess: f64 },
    #[error("invalid input: {0}")]
    BadInput(String),
}

/// Result of one short-map extension step.
#[derive(Debug, Clone)]
pub struct ExtensionOutcome {
    /// Image for the extra point, present when the ball system intersects.
    pub point: Option<ModelPoint>,
    /// Worst ball excess of the best candidate.
    pub margin: f64,
    /// Set when the step is infeasible although the source table satisfies
    /// the lower curvature bound — which the extension theorem rules out.
    pub soundness_fault: bool,
}

/// Extend the short map x_i -> y_i (images in `Lob^dim kappa`, kappa <= 0)
/// to the extra source point `p`: find q with |y_i q| <= |x_i p| for all i.
pub fn kirszbraun_extend(
    source: &FiniteMetric,
    p: usize,
    xs: &[usize],
    images: &[ModelPoint],
    kappa: f64,
    dim: usize,
) -> Result<ExtensionOutcome, ExtendError> {
    if xs.len() != images.len() || xs.is_empty() {
        return Err(ExtendError::BadInput("point/image count mismatch".into()));
    }
    let m = Model::new(kappa, dim);
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let dy = m.distance(&images[i], &images[j]);
            let dx = source.get(xs[i], xs[j]);
            if dy > dx + 1e-9 {
                return Err(ExtendError::NotShort { i, j, excess: dy - dx });
            }
        }
    }
    let system = BallSystem {
        kappa,
        dim,
        centers: images.to_vec(),
        radii: xs.iter().map(|&x| source.get(x, p)).collect(),
    };
    let found = ball_intersection(&system);
    let mut fault = false;
    if !found.feasible {
        // the theorem guarantees feasibility when the source satisfies the
        // lower curvature bound
        let cbb = comparison::is_cbb(source, kappa, comparison::DEFAULT_TOL);
        if cbb.pass {
            fault = true;
        }
    }
    Ok(ExtensionOutcome {
        point: if found.feasible { Some(found.point) } else { None },
        margin: found.margin,
        soundness_fault: fault,
    })
}

/// A point of the standard simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(w: Vec<f64>) -> Result<Self, ModelError> {
        if w.is_empty() || w.iter().any(|&x| !(x >= -1e-12)) {
            return Err(ModelError::OutOfDomain("weights must be nonnegative".into()));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(ModelError::OutOfDomain(format!("weights sum to {s}, not 1")));
        }
        Ok(SimplexWeights(w))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn check_anchor_radius(m: &Model, anchors: &[ModelPoint]) -> Result<(), ModelError> {
    if m.kappa > 0.0 {
        let half = 0.5 * m.varpi();
        for (i, a) in anchors.iter().enumerate() {
            for b in anchors.iter().skip(i + 1) {
                if m.distance(a, b) >= half {
                    return Err(ModelError::OutOfDomain(
                        "anchors are not contained in a quarter-diameter ball".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// The weighted barycenter: unique minimizer of sum_i w_i * md(dist(a_i, q)),
/// located by gradient descent with backtracking to gradient norm < 1e-9.
pub fn barycentric_point(
    kappa: f64,
    anchors: &[ModelPoint],
    w: &SimplexWeights,
) -> Result<ModelPoint, ModelError> {
    assert_eq!(anchors.len(), w.values().len());
    assert!(!anchors.is_empty());
    let nd = anchors[0].coords.len();
    let dim = if kappa == 0.0 { nd } else { nd - 1 };
    let m = Model::new(kappa, dim);
    check_anchor_radius(&m, anchors)?;
    let mut q = ModelPoint::new(
        (0..nd)
            .map(|i| {
                anchors
                    .iter()
                    .zip(w.values())
                    .map(|(a, &wi)| wi * a.coords[i])
                    .sum()
            })
            .collect(),
    );
    m.renormalize(&mut q);
    if kappa != 0.0 && q.coords.iter().all(|&c| c.abs() < 1e-12) {
        q = anchors[0].clone();
    }
    let value = |q: &ModelPoint| -> f64 {
        anchors
            .iter()
            .zip(w.values())
            .map(|(a, &wi)| wi * md(kappa, m.distance(a, q)))
            .sum()
    };
    for _ in 0..4000 {
        let mut grad = vec![0.0; nd];
        for (a, &wi) in anchors.iter().zip(w.values()) {
            let d = m.distance(a, &q);
            if d < 1e-14 || wi == 0.0 {
                continue;
            }
            let lg = m.log(&q, a);
            let c = -wi * sn(kappa, d) / d;
            for (g, l) in grad.iter_mut().zip(&lg) {
                *g += c * l;
            }
        }
        let gn = m.inner(&grad, &grad).max(0.0).sqrt();
        if gn < 1e-9 {
            break;
        }
        let f0 = value(&q);
        let mut t = 1.0f64.min(1.0 / gn);
        loop {
            let trial = m.exp(&q, &ambient_tangent_scale(&grad, -t));
            if value(&trial) <= f0 - 0.25 * t * gn * gn {
                q = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-16 {
                return Ok(q);
            }
        }
    }
    Ok(q)
}

/// Empirical Lipschitz bound of the barycentric map on a simplex grid:
/// max over neighboring weight pairs of dist(image, image) / l1-distance.
pub fn barycentric_lipschitz_estimate(
    kappa: f64,
    anchors: &[ModelPoint],
    resolution: usize,
) -> Result<f64, ModelError> {
    let k = anchors.len();
    assert!(k >= 1 && resolution >= 1);
    if k == 1 {
        return Ok(0.0);
    }
    let nd = anchors[0].coords.len();
    let dim = if kappa == 0.0 { nd } else { nd - 1 };
    let m = Model::new(kappa, dim);
    // enumerate lattice weights (i_0..i_{k-1}) / resolution
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut stack = vec![(Vec::<usize>::new(), resolution)];
    while let Some((prefix, rest)) = stack.pop() {
        if prefix.len() == k - 1 {
            let mut c = prefix;
            c.push(rest);
            cells.push(c);
            continue;
        }
        for v in 0..=rest {
            let mut c = prefix.clone();
            c.push(v);
            stack.push((c, rest - v));
        }
    }
    cells.sort();
    let images: Vec<ModelPoint> = cells
        .iter()
        .map(|c| {
            let w = SimplexWeights::new(
                c.iter().map(|&v| v as f64 / resolution as f64).collect(),
            )?;
            barycentric_point(kappa, anchors, &w)
        })
        .collect::<Result<_, _>>()?;
    let index: std::collections::BTreeMap<Vec<usize>, usize> = cells
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let mut bound: f64 = 0.0;
    for (ci, cell) in cells.iter().enumerate() {
        for a in 0..k {
            for bb in 0..k {
                if a == bb || cell[a] == 0 {
                    continue;
                }
                let mut nb = cell.clone();
                nb[a] -= 1;
                nb[bb] += 1;
                if let Some(&cj) = index.get(&nb) {
                    if cj > ci {
                        let d = m.distance(&images[ci], &images[cj]);
                        bound = bound.max(d / (2.0 / resolution as f64));
                    }
                }
            }
        }
    }
    Ok(bound)
}

/// The web of an anchor array and its inner web.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WebOutcome {
    pub web: Vec<usize>,
    pub inner: Vec<usize>,
}

fn pareto_minimal(values: &[Vec<f64>]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    'cand: for v in 0..n {
        for u in 0..n {
            if u == v {
                continue;
            }
            let dominates = values[u]
                .iter()
                .zip(&values[v])
                .all(|(a, b)| *a <= *b + 1e-12)
                && values[u]
                    .iter()
                    .zip(&values[v])
                    .any(|(a, b)| *a < *b - 1e-12);
            if dominates {
                continue 'cand;
            }
        }
        out.push(v);
    }
    out
}

/// Vertices whose distance-vector to the anchors (through the md transform)
/// is minimal for the coordinatewise order; the inner web removes the webs
/// of all proper sub-arrays.
pub fn web_compute(m: &FiniteMetric, anchors: &[usize], kappa: f64) -> WebOutcome {
    let k = anchors.len();
    assert!(k >= 1 && k <= 12, "anchor count out of supported range");
    let field: Vec<Vec<f64>> = (0..m.n)
        .map(|v| anchors.iter().map(|&a| md(kappa, m.get(a, v))).collect())
        .collect();
    let web = pareto_minimal(&field);
    let mut removed = vec![false; m.n];
    for mask in 1u32..((1 << k) - 1) {
        let sub: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let subfield: Vec<Vec<f64>> = (0..m.n)
            .map(|v| sub.iter().map(|&i| field[v][i]).collect())
            .collect();
        for v in pareto_minimal(&subfield) {
            removed[v] = true;
        }
    }
    let inner = web.iter().copied().filter(|&v| !removed[v]).collect();
    WebOutcome { web, inner }
}

/// Planar chart with straight geodesics (identity for zero curvature,
/// central projection otherwise).
fn chart(m: &Model, p: &ModelPoint) -> Result<[f64; 2], ModelError> {
    if m.kappa == 0.0 {
        Ok([p.coords[0], p.coords[1]])
    } else {
        if p.coords[0] <= 1e-9 {
            return Err(ModelError::OutOfDomain(
                "point outside the projectable hemisphere".into(),
            ));
        }
        Ok([p.coords[1] / p.coords[0], p.coords[2] / p.coords[0]])
    }
}

fn unchart(m: &Model, uv: [f64; 2]) -> ModelPoint {
    if m.kappa == 0.0 {
        ModelPoint::new(vec![uv[0], uv[1]])
    } else {
        let mut p = ModelPoint::new(vec![1.0, uv[0], uv[1]]);
        m.renormalize(&mut p);
        p
    }
}

fn solve2(a: [f64; 2], b: [f64; 2], rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0] * b[1] - a[1] * b[0];
    if det.abs() < 1e-14 {
        return None;
    }
    Some([
        (rhs[0] * b[1] - rhs[1] * b[0]) / det,
        (a[0] * rhs[1] - a[1] * rhs[0]) / det,
    ])
}

fn in_cone(v: [f64; 2], a: [f64; 2], b: [f64; 2], w: [f64; 2], tol: f64) -> bool {
    match solve2(
        [a[0] - v[0], a[1] - v[1]],
        [b[0] - v[0], b[1] - v[1]],
        [w[0] - v[0], w[1] - v[1]],
    ) {
        Some([al, be]) => al >= -tol && be >= -tol,
        None => false,
    }
}

fn in_triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2], w: [f64; 2], tol: f64) -> bool {
    match solve2(
        [b[0] - a[0], b[1] - a[1]],
        [c[0] - a[0], c[1] - a[1]],
        [w[0] - a[0], w[1] - a[1]],
    ) {
        Some([al, be]) => al >= -tol && be >= -tol && al + be <= 1.0 + tol,
        None => false,
    }
}

/// Intersection of two model circles: the point at distance `ra` from `a`
/// and `rb` from `b`, on the side of the line [a b] containing `side_ref`.
fn trilaterate(
    m: &Model,
    a: &ModelPoint,
    b: &ModelPoint,
    ra: f64,
    rb: f64,
    side_ref: &ModelPoint,
) -> Result<ModelPoint, ModelError> {
    if ra < 1e-12 {
        return Ok(a.clone());
    }
    let dab = m.distance(a, b);
    // clamp hairline triangle-inequality violations from catastrophic
    // cancellation; genuine infeasibility still errors
    let band = 1e-9 * (1.0 + ra + rb + dab);
    let (lo, hi) = ((dab - ra).abs(), dab + ra);
    if rb < lo - band || rb > hi + band {
        return Err(ModelError::OutOfDomain(format!(
            "no circle intersection: ra={ra}, rb={rb}, |ab|={dab}"
        )));
    }
    let rb = rb.clamp(lo, hi);
    let phi = model_angle(m.kappa, rb, ra, dab).ok_or_else(|| {
        ModelError::OutOfDomain(format!("no circle intersection: ra={ra}, rb={rb}, |ab|={dab}"))
    })?;
    let t1 = {
        let lg = m.log(a, b);
        ambient_tangent_scale(&lg, 1.0 / dab)
    };
    let t2 = {
        let w = m.log(a, side_ref);
        let c = m.inner(&w, &t1);
        let raw: Vec<f64> = w.iter().zip(&t1).map(|(x, y)| x - c * y).collect();
        let n = m.inner(&raw, &raw).max(0.0).sqrt();
        if n < 1e-12 {
            return Err(ModelError::OutOfDomain("degenerate side reference".into()));
        }
        ambient_tangent_scale(&raw, 1.0 / n)
    };
    let dir: Vec<f64> = t1
        .iter()
        .zip(&t2)
        .map(|(x, y)| ra * (phi.cos() * x + phi.sin() * y))
        .collect();
    Ok(m.exp(a, &dir))
}

/// The quadrangle fold: a short map from the filled model triangle
/// (p, x, y) onto the folded target quadrangle with the p-to-z distance
/// shortened to `target_pz`.  Two triangle pieces move isometrically, three
/// circular sectors collapse onto the target sides, and the curvilinear core
/// collapses to the target z-vertex.
#[derive(Debug, Clone)]
pub struct FoldMap {
    m: Model,
    // source corners and auxiliary contact points
    p: ModelPoint,
    x: ModelPoint,
    y: ModelPoint,
    z: ModelPoint,
    zy: ModelPoint,
    zx: ModelPoint,
    // target corners
    tp: ModelPoint,
    tx: ModelPoint,
    ty: ModelPoint,
    tz: ModelPoint,
    d: f64,
    dxz: f64,
    dyz: f64,
}

/// Build the fold evaluator; errors when the shortened configuration is not
/// realizable.
pub fn reshetnyak_fold(
    kappa: f64,
    p: &ModelPoint,
    x: &ModelPoint,
    y: &ModelPoint,
    z: &ModelPoint,
    target_pz: f64,
) -> Result<FoldMap, ModelError> {
    let m = Model::new(kappa, 2);
    let dxy = m.distance(x, y);
    let dxz = m.distance(x, z);
    let dyz = m.distance(y, z);
    if (dxz + dyz - dxy).abs() > 1e-9 * (1.0 + dxy) {
        return Err(ModelError::OutOfDomain("z is not on the side [x y]".into()));
    }
    let dpz = m.distance(p, z);
    let d = target_pz;
    if !(d > 1e-12) || d > dpz + 1e-12 {
        return Err(ModelError::OutOfDomain(format!(
            "target distance {d} outside (0, |pz|={dpz}]"
        )));
    }
    let dpx = m.distance(p, x);
    let dpy = m.distance(p, y);
    // target layout: tp at the base, tz straight ahead, tx and ty on
    // opposite sides
    let tp = m.base();
    let e = |phi: f64, len: f64| -> Vec<f64> {
        let (c, s) = (phi.cos() * len, phi.sin() * len);
        if kappa == 0.0 {
            vec![c, s]
        } else {
            vec![0.0, c, s]
        }
    };
    let tz = m.exp(&tp, &e(0.0, d));
    let phix = model_angle(kappa, dxz, dpx, d)
        .ok_or_else(|| ModelError::OutOfDomain("target x-triangle is not realizable".into()))?;
    let phiy = model_angle(kappa, dyz, dpy, d)
        .ok_or_else(|| ModelError::OutOfDomain("target y-triangle is not realizable".into()))?;
    let tx = m.exp(&tp, &e(phix, dpx));
    let ty = m.exp(&tp, &e(-phiy, dpy));
    // contact points inside the source triangle: same distances as the
    // target triangles, placed against the sides [p x] and [p y]
    let zy = trilaterate(&m, p, x, d, dxz, z)?;
    let zx = trilaterate(&m, p, y, d, dyz, z)?;
    Ok(FoldMap {
        m,
        p: p.clone(),
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        zy,
        zx,
        tp,
        tx,
        ty,
        tz,
        d,
        dxz,
        dyz,
    })
}

impl FoldMap {
    pub fn target_corners(&self) -> (&ModelPoint, &ModelPoint, &ModelPoint, &ModelPoint) {
        (&self.tp, &self.tx, &self.ty, &self.tz)
    }

    /// Evaluate the fold at a point of the source triangle.
    pub fn eval(&self, w: &ModelPoint) -> Result<ModelPoint, ModelError> {
        let m = &self.m;
        let tol = 1e-9;
        let cw = chart(m, w)?;
        let cp = chart(m, &self.p)?;
        let cx = chart(m, &self.x)?;
        let cy = chart(m, &self.y)?;
        let cz = chart(m, &self.z)?;
        let czy = chart(m, &self.zy)?;
        let czx = chart(m, &self.zx)?;
        if in_triangle(cp, cx, czy, cw, tol) {
            // isometric copy of the x-side triangle
            return trilaterate(m, &self.tp, &self.tx, m.distance(&self.p, w), m.distance(&self.x, w), &self.tz);
        }
        if in_triangle(cp, cy, czx, cw, tol) {
            return trilaterate(m, &self.tp, &self.ty, m.distance(&self.p, w), m.distance(&self.y, w), &self.tz);
        }
        let dp = m.distance(&self.p, w);
        if dp <= self.d + tol && in_cone(cp, czy, czx, cw, tol) {
            return m.geodesic_point(&self.tp, &self.tz, (dp / self.d).min(1.0));
        }
        let dx = m.distance(&self.x, w);
        if dx <= self.dxz + tol && in_cone(cx, cz, czy, cw, tol) {
            return m.geodesic_point(&self.tx, &self.tz, (dx / self.dxz).min(1.0));
        }
        let dy = m.distance(&self.y, w);
        if dy <= self.dyz + tol && in_cone(cy, czx, cz, cw, tol) {
            return m.geodesic_point(&self.ty, &self.tz, (dy / self.dyz).min(1.0));
        }
        // the curvilinear core collapses to the target z-vertex
        Ok(self.tz.clone())
    }

    /// Sample a point of the source triangle from barycentric chart
    /// coordinates.
    pub fn sample(&self, u: f64, v: f64) -> Result<ModelPoint, ModelError> {
        let m = &self.m;
        let cp = chart(m, &self.p)?;
        let cx = chart(m, &self.x)?;
        let cy = chart(m, &self.y)?;
        let (a, b) = (u, v * (1.0 - u));
        let uv = [
            cp[0] + a * (cx[0] - cp[0]) + b * (cy[0] - cp[0]),
            cp[1] + a * (cx[1] - cp[1]) + b * (cy[1] - cp[1]),
        ];
        Ok(unchart(m, uv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{sample_model_space, tripod_metric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> ModelPoint {
        ModelPoint::new(v.to_vec())
    }

    #[test]
    fn ball_intersection_examples() {
        // equilateral triangle side sqrt(3), radii 1: circumcenter works
        let h = 3.0f64.sqrt();
        let sys = BallSystem {
            kappa: 0.0,
            dim: 2,
            centers: vec![
                pt(&[1.0, 0.0]),
                pt(&[-0.5, h / 2.0]),
                pt(&[-0.5, -h / 2.0]),
            ],
            radii: vec![1.0; 3],
        };
        let r = ball_intersection(&sys);
        assert!(r.feasible && r.margin.abs() < 1e-6, "margin {}", r.margin);
        assert!(r.point.coords.iter().all(|&c| c.abs() < 1e-5));
        // side 2: circumradius 2/sqrt(3) > 1, infeasible with known margin
        let s = 2.0 / h;
        let sys = BallSystem {
            kappa: 0.0,
            dim: 2,
            centers: vec![
                pt(&[s, 0.0]),
                pt(&[-s / 2.0, 1.0]),
                pt(&[-s / 2.0, -1.0]),
            ],
            radii: vec![1.0; 3],
        };
        let r = ball_intersection(&sys);
        assert!(!r.feasible);
        assert!((r.margin - (2.0 / h - 1.0)).abs() < 1e-5, "margin {}", r.margin);
        // single ball: its center
        let sys = BallSystem {
            kappa: 0.0,
            dim: 2,
            centers: vec![pt(&[2.0, 3.0])],
            radii: vec![0.5],
        };
        let r = ball_intersection(&sys);
        assert!(r.feasible && r.margin <= -0.5 + 1e-9);
        // hyperbolic sanity: two overlapping balls
        let m = Model::new(-1.0, 2);
        let a = m.base();
        let b = m.exp(&a, &[0.0, 1.0, 0.0]);
        let sys = BallSystem {
            kappa: -1.0,
            dim: 2,
            centers: vec![a, b],
            radii: vec![0.6, 0.6],
        };
        let r = ball_intersection(&sys);
        assert!(r.feasible, "margin {}", r.margin);
    }

    #[test]
    fn ball_intersection_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let k = rng.gen_range(2..5);
            let centers: Vec<ModelPoint> = (0..k)
                .map(|_| pt(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .collect();
            let radii: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..1.2)).collect();
            let sys = BallSystem { kappa: 0.0, dim: 2, centers: centers.clone(), radii: radii.clone() };
            let r = ball_intersection(&sys);
            // brute-force oracle on a 1e-3 grid over the inflated bounding box
            let rmax = radii.iter().cloned().fold(0.0, f64::max);
            let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
            for c in &centers {
                for a in 0..2 {
                    lo[a] = lo[a].min(c.coords[a] - rmax);
                    hi[a] = hi[a].max(c.coords[a] + rmax);
                }
            }
            let step = 1e-3;
            let mut best = f64::INFINITY;
            let nx = ((hi[0] - lo[0]) / step) as usize + 1;
            let ny = ((hi[1] - lo[1]) / step) as usize + 1;
            'grid: for i in 0..nx {
                for j in 0..ny {
                    let q = [lo[0] + i as f64 * step, lo[1] + j as f64 * step];
                    let worst = centers
                        .iter()
                        .zip(&radii)
                        .map(|(c, &rad)| {
                            ((q[0] - c.coords[0]).powi(2) + (q[1] - c.coords[1]).powi(2)).sqrt()
                                - rad
                        })
                        .fold(f64::NEG_INFINITY, f64::max);
                    best = best.min(worst);
                    if best < -2e-3 {
                        break 'grid;
                    }
                }
            }
            assert!(
                (r.margin - best).abs() < 3e-3 || r.feasible == (best <= 0.0),
                "optimizer margin {} vs grid {}",
                r.margin,
                best
            );
            if r.margin.abs() > 3e-3 {
                assert_eq!(r.feasible, best <= 0.0, "margin {} grid {}", r.margin, best);
            }
        }
    }

    #[test]
    fn kirszbraun_examples() {
        // tripod source (not CBB(0)): images at an equilateral triangle of
        // side 2 are short, but the radius-1 balls have no common point;
        // no fault because the hypothesis fails
        let t = tripod_metric();
        let h = 3.0f64.sqrt();
        let images = vec![
            pt(&[2.0 / h, 0.0]),
            pt(&[-1.0 / h, 1.0]),
            pt(&[-1.0 / h, -1.0]),
        ];
        let out = kirszbraun_extend(&t, 0, &[1, 2, 3], &images, 0.0, 2).unwrap();
        assert!(out.point.is_none() && !out.soundness_fault, "margin {}", out.margin);
        // projection of a spatial configuration is short and extendable
        let (fm, pts) = sample_model_space(0.0, 3, 5, 44);
        let images: Vec<ModelPoint> = (1..5)
            .map(|i| pt(&pts[i].coords[..2]))
            .collect();
        let out = kirszbraun_extend(&fm, 0, &[1, 2, 3, 4], &images, 0.0, 2).unwrap();
        assert!(out.point.is_some(), "margin {}", out.margin);
        // batch: identity images of lower-curvature-certified samples
        for seed in 0..20u64 {
            let (fm, pts) = sample_model_space(0.0, 2, 5, 600 + seed);
            let images: Vec<ModelPoint> = (1..5).map(|i| pts[i].clone()).collect();
            let out = kirszbraun_extend(&fm, 0, &[1, 2, 3, 4], &images, 0.0, 2).unwrap();
            assert!(!out.soundness_fault, "seed {seed} margin {}", out.margin);
            assert!(out.point.is_some(), "seed {seed} margin {}", out.margin);
        }
    }

    #[test]
    fn barycenter_examples() {
        let w = SimplexWeights::new(vec![0.5, 0.5]).unwrap();
        let q = barycentric_point(0.0, &[pt(&[0.0, 0.0]), pt(&[2.0, 0.0])], &w).unwrap();
        assert!((q.coords[0] - 1.0).abs() < 1e-7 && q.coords[1].abs() < 1e-7);
        // vertex weights reproduce the anchors
        let anchors = [pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0])];
        let w = SimplexWeights::new(vec![0.0, 1.0, 0.0]).unwrap();
        let q = barycentric_point(0.0, &anchors, &w).unwrap();
        assert!((q.coords[0] - 1.0).abs() < 1e-6 && q.coords[1].abs() < 1e-6);
        // uniform weights give the planar centroid
        let w = SimplexWeights::new(vec![1.0 / 3.0; 3]).unwrap();
        let q = barycentric_point(0.0, &anchors, &w).unwrap();
        assert!((q.coords[0] - 1.0 / 3.0).abs() < 1e-7);
        assert!((q.coords[1] - 1.0 / 3.0).abs() < 1e-7);
        // hull bound invariant
        let m = Model::new(1.0, 2);
        let b = m.base();
        let a1 = m.exp(&b, &[0.0, 0.4, 0.0]);
        let a2 = m.exp(&b, &[0.0, 0.0, 0.5]);
        let anchors = [b.clone(), a1, a2];
        let maxd = 0.7f64; // generous pairwise bound
        let w = SimplexWeights::new(vec![0.2, 0.5, 0.3]).unwrap();
        let q = barycentric_point(1.0, &anchors, &w).unwrap();
        for a in &anchors {
            assert!(m.distance(a, &q) <= maxd + 1e-6);
        }
        // invalid weights rejected
        assert!(SimplexWeights::new(vec![0.7, 0.7]).is_err());
    }

    #[test]
    fn barycentric_lipschitz_stable() {
        let anchors = [pt(&[0.0, 0.0]), pt(&[1.0, 0.2]), pt(&[0.3, 0.9])];
        let l1 = barycentric_lipschitz_estimate(0.0, &anchors, 6).unwrap();
        let l2 = barycentric_lipschitz_estimate(0.0, &anchors, 12).unwrap();
        assert!(l1.is_finite() && l1 > 0.0);
        assert!(l2 / l1 < 1.2 && l1 / l2 < 1.2, "l1={l1}, l2={l2}");
        // collinear anchors: the map stays on the segment, slope bounded by
        // the 1-D closed form (max pairwise distance / 2)
        let anchors = [pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[2.0, 0.0])];
        let l = barycentric_lipschitz_estimate(0.0, &anchors, 8).unwrap();
        assert!(l <= 1.0 + 1e-6, "l={l}");
        assert_eq!(barycentric_lipschitz_estimate(0.0, &anchors[..1], 4).unwrap(), 0.0);
    }

    #[test]
    fn web_examples() {
        // path graph, endpoint anchors: the web is the whole geodesic
        let path = crate::metric::shortest_metric(
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)],
        )
        .unwrap();
        let wo = web_compute(&path.metric, &[0, 4], 0.0);
        assert_eq!(wo.web, vec![0, 1, 2, 3, 4]);
        assert_eq!(wo.inner, vec![1, 2, 3]);
        // three anchors on a 3-point space: everything is in the web
        let tri = FiniteMetric::from_fn(3, |_, _| 1.0);
        let wo = web_compute(&tri, &[0, 1, 2], 0.0);
        assert_eq!(wo.web, vec![0, 1, 2]);
        // flat grid with 2 anchors: web hugs the segment
        let grid = crate::metric::net_of_surface(crate::metric::SurfaceKind::Plane, 0.25).unwrap();
        let (a, b) = (0, grid.n - 1);
        let wo = web_compute(&grid.metric, &[a, b], 0.0);
        for &v in &wo.web {
            let slack = grid.dist(a, v) + grid.dist(v, b) - grid.dist(a, b);
            assert!(slack <= 2.0 * grid.delta_h + 0.3, "vertex {v} slack {slack}");
        }
    }

    #[test]
    fn fold_degenerate_is_isometry() {
        let p = pt(&[0.0, 1.0]);
        let x = pt(&[-1.0, 0.0]);
        let y = pt(&[2.0, 0.0]);
        let z = pt(&[0.0, 0.0]);
        let f = reshetnyak_fold(0.0, &p, &x, &y, &z, 1.0).unwrap();
        let m = Model::new(0.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a = f.sample(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)).unwrap();
            let b = f.sample(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)).unwrap();
            let (fa, fb) = (f.eval(&a).unwrap(), f.eval(&b).unwrap());
            let (d0, d1) = (m.distance(&a, &b), m.distance(&fa, &fb));
            assert!((d1 - d0).abs() < 1e-7, "distortion {}", d1 - d0);
        }
    }

    #[test]
    fn fold_is_short_and_fixes_corners() {
        for (kappa, pull) in [(0.0, 0.1), (0.0, 0.35), (-1.0, 0.15)] {
            let m = Model::new(kappa, 2);
            let b = m.base();
            let p = m.exp(&b, &if kappa == 0.0 { vec![0.0, 1.2] } else { vec![0.0, 0.0, 1.2] });
            let x = m.exp(&b, &if kappa == 0.0 { vec![-0.9, 0.0] } else { vec![0.0, -0.9, 0.0] });
            let y = m.exp(&b, &if kappa == 0.0 { vec![1.4, 0.0] } else { vec![0.0, 1.4, 0.0] });
            let z = m.geodesic_point(&x, &y, 0.45).unwrap();
            let d = m.distance(&p, &z) - pull;
            let f = reshetnyak_fold(kappa, &p, &x, &y, &z, d).unwrap();
            // corner behavior
            let (tp, tx, ty, tz) = f.target_corners();
            assert!(m.distance(&f.eval(&p).unwrap(), tp) < 1e-9);
            assert!(m.distance(&f.eval(&x).unwrap(), tx) < 1e-9);
            assert!(m.distance(&f.eval(&y).unwrap(), ty) < 1e-9);
            assert!(m.distance(&f.eval(&z).unwrap(), tz) < 1e-9);
            assert!((m.distance(tp, tz) - d).abs() < 1e-9);
            // shortness on random pairs
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let mut worst: f64 = 0.0;
            for _ in 0..10_000 {
                let a = f.sample(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)).unwrap();
                let bpt = f.sample(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)).unwrap();
                let (fa, fb) = (f.eval(&a).unwrap(), f.eval(&bpt).unwrap());
                worst = worst.max(m.distance(&fa, &fb) - m.distance(&a, &bpt));
            }
            assert!(worst <= 1e-8, "kappa {kappa} pull {pull}: expansion {worst}");
        }
    }

    #[test]
    fn fold_core_maps_to_target_z() {
        let p = pt(&[0.0, 2.0]);
        let x = pt(&[-1.0, 0.0]);
        let y = pt(&[1.5, 0.0]);
        let z = pt(&[0.2, 0.0]);
        let m = Model::new(0.0, 2);
        let d = m.distance(&p, &z) - 0.5;
        let f = reshetnyak_fold(0.0, &p, &x, &y, &z, d).unwrap();
        let (_, _, _, tz) = f.target_corners();
        let tz = tz.clone();
        // points near z but inside the curvilinear pocket collapse
        let img = f.eval(&z).unwrap();
        assert!(m.distance(&img, &tz) < 1e-9);
        // infeasible configurations rejected
        assert!(reshetnyak_fold(0.0, &p, &x, &y, &z, m.distance(&p, &z) + 0.2).is_err());
        assert!(reshetnyak_fold(0.0, &p, &x, &y, &pt(&[5.0, 0.0]), 1.0).is_err());
    }
}
