//! Gradient curves, radial curves, the gradient exponent, and developments.
//!
//! Curves live either on convex domains of Euclidean space (where gradients
//! of the test objectives are explicit) or on sampled spaces (as vertex
//! paths).  Every integrator is explicit Euler with a fixed step, so each
//! certificate carries an O(h) budget that the checks make explicit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::Verdict;
use crate::metric::{SampledSpace, Witness};
use crate::model::{model_angle, model_side, tg, varpi, ModelError};

/// Default integrator step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("model-plane failure: {0}")]
    Model(#[from] ModelError),
    #[error("radius {0} outside (0, varpi) at sample {1}")]
    RadiusOutOfRange(f64, usize),
    #[error("curve needs at least {0} samples")]
    TooShort(usize),
    #[error("objective produced a non-finite value at step {0}")]
    NonFinite(usize),
    #[error("start point violates the precondition: {0}")]
    BadStart(String),
}

/// Closed convex subset of Euclidean m-space with an explicit closest-point
/// projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexDomain {
    /// All of Euclidean space.
    Full,
    /// Points with last coordinate >= 0.
    HalfPlane,
    /// Closed ball of the given radius about the origin.
    Disk { radius: f64 },
}

/// A convex Euclidean domain together with its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexDomainSpace {
    pub dim: usize,
    pub domain: ConvexDomain,
}

impl ConvexDomainSpace {
    pub fn new(dim: usize, domain: ConvexDomain) -> Self {
        ConvexDomainSpace { dim, domain }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.domain {
            ConvexDomain::Full => true,
            ConvexDomain::HalfPlane => x[self.dim - 1] >= -1e-12,
            ConvexDomain::Disk { radius } => norm(x) <= radius + 1e-12,
        }
    }

    /// Closest-point projection onto the domain.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        match &self.domain {
            ConvexDomain::Full => {}
            ConvexDomain::HalfPlane => {
                let m = self.dim - 1;
                if y[m] < 0.0 {
                    y[m] = 0.0;
                }
            }
            ConvexDomain::Disk { radius } => {
                let n = norm(&y);
                if n > *radius {
                    let s = radius / n;
                    for c in &mut y {
                        *c *= s;
                    }
                }
            }
        }
        y
    }

    /// Projects an ambient vector onto the wedge of directions that do not
    /// leave the domain at `x` (first order).  Interior points keep the
    /// vector unchanged.
    pub fn tangent_project(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        match &self.domain {
            ConvexDomain::Full => {}
            ConvexDomain::HalfPlane => {
                let m = self.dim - 1;
                if x[m] <= 1e-12 && w[m] < 0.0 {
                    w[m] = 0.0;
                }
            }
            ConvexDomain::Disk { radius } => {
                let n = norm(x);
                if n >= radius - 1e-12 && n > 0.0 {
                    let out = dot(&w, x) / (n * n);
                    if out > 0.0 {
                        for (wi, xi) in w.iter_mut().zip(x) {
                            *wi -= out * xi;
                        }
                    }
                }
            }
        }
        w
    }
}

/// A parametrized polyline: points of a convex-domain space together with
/// parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCurve {
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl DiscreteCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.points.last().expect("nonempty curve")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Concave test objectives with explicit gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    /// f(x) = (lambda/2) |x - center|^2 with lambda <= 0.
    Quadratic { center: Vec<f64>, lambda: f64 },
    /// f(x) = <grad, x>.
    Linear { grad: Vec<f64> },
    /// f(x) = -|x - p|; zero gradient at p itself (the curve stops).
    NegDistTo { p: Vec<f64> },
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Quadratic { center, lambda } => {
                let d = euclid(x, center);
                0.5 * lambda * d * d
            }
            Objective::Linear { grad } => dot(grad, x),
            Objective::NegDistTo { p } => -euclid(x, p),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Objective::Quadratic { center, lambda } => x
                .iter()
                .zip(center)
                .map(|(xi, ci)| lambda * (xi - ci))
                .collect(),
            Objective::Linear { grad } => grad.clone(),
            Objective::NegDistTo { p } => {
                let d = euclid(x, p);
                if d < 1e-12 {
                    vec![0.0; x.len()]
                } else {
                    x.iter().zip(p).map(|(xi, pi)| -(xi - pi) / d).collect()
                }
            }
        }
    }

    /// Concavity constant: f is lambda-concave.
    pub fn lambda(&self) -> f64 {
        match self {
            Objective::Quadratic { lambda, .. } => *lambda,
            Objective::Linear { .. } | Objective::NegDistTo { .. } => 0.0,
        }
    }
}

/// Projected explicit Euler for the ascent curve of `f`: on the boundary the
/// ambient gradient is replaced by its tangent-wedge projection before the
/// step, and the step lands back in the domain via closest-point projection.
pub fn gradient_curve(
    space: &ConvexDomainSpace,
    f: &Objective,
    x0: &[f64],
    h: f64,
    horizon: f64,
) -> Result<DiscreteCurve, FlowError> {
    if !space.contains(x0) {
        return Err(FlowError::BadStart("x0 outside the domain".into()));
    }
    let steps = (horizon / h).round() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    let mut params = Vec::with_capacity(steps + 1);
    let mut x = space.project(x0);
    points.push(x.clone());
    params.push(0.0);
    for k in 0..steps {
        if !f.value(&x).is_finite() {
            return Err(FlowError::NonFinite(k));
        }
        let g = space.tangent_project(&x, &f.gradient(&x));
        let next: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + h * gi).collect();
        x = space.project(&next);
        points.push(x.clone());
        params.push((k + 1) as f64 * h);
    }
    Ok(DiscreteCurve { params, points })
}

/// First distance estimate: two ascent curves of a lambda-concave objective
/// satisfy |x(t) y(t)| <= e^{lambda t} |x(0) y(0)|.  The verdict's margin is
/// the worst signed slack in units of the step, and passes when the
/// violation stays within `c_bound * h`.
pub fn contraction_check(
    space: &ConvexDomainSpace,
    f: &Objective,
    x0: &[f64],
    y0: &[f64],
    h: f64,
    horizon: f64,
    c_bound: f64,
) -> Result<Verdict, FlowError> {
    let a = gradient_curve(space, f, x0, h, horizon)?;
    let b = gradient_curve(space, f, y0, h, horizon)?;
    let lam = f.lambda();
    let d0 = euclid(&a.points[0], &b.points[0]);
    let mut worst = f64::INFINITY;
    let mut worst_k = 0usize;
    for k in 0..a.len() {
        let bound = (lam * a.params[k]).exp() * d0;
        let slack = bound - euclid(&a.points[k], &b.points[k]);
        if slack < worst {
            worst = slack;
            worst_k = k;
        }
    }
    let mut v = Verdict::new(worst >= -c_bound * h, worst);
    v.checked = a.len();
    let c_obs = if worst < 0.0 { -worst / h } else { 0.0 };
    v.notes
        .push(format!("observed C = {c_obs:.3} (bound {c_bound})"));
    if !v.pass {
        v.witness = Some(Witness {
            tuple: vec![worst_k],
            margin: worst,
            note: format!("contraction violated at t = {}", a.params[worst_k]),
        });
    }
    Ok(v)
}

/// Self-contracting property of ascent curves of 0-concave objectives:
/// |a(t1) a(t3)| >= |a(t2) a(t3)| for t1 <= t2 <= t3.  Exhaustive triple
/// scan on a subsample of at most `max_samples` vertices, with `slack`
/// absolute tolerance.
pub fn self_contracting_check(curve: &DiscreteCurve, slack: f64, max_samples: usize) -> Verdict {
    let n = curve.len();
    let stride = n.div_ceil(max_samples).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let m = idx.len();
    let mut worst = f64::INFINITY;
    let mut wit: Option<Witness> = None;
    let mut checked = 0usize;
    for c in 0..m {
        for b in 0..=c {
            for a in 0..=b {
                let d13 = euclid(&curve.points[idx[a]], &curve.points[idx[c]]);
                let d23 = euclid(&curve.points[idx[b]], &curve.points[idx[c]]);
                let margin = d13 - d23;
                checked += 1;
                if margin < worst {
                    worst = margin;
                    wit = Some(Witness {
                        tuple: vec![idx[a], idx[b], idx[c]],
                        margin,
                        note: "later point moved away".into(),
                    });
                }
            }
        }
    }
    let mut v = Verdict::new(worst >= -slack, worst);
    v.checked = checked;
    if stride > 1 {
        v.notes.push(format!("triple scan on stride {stride}"));
    }
    if !v.pass {
        v.witness = wit;
    }
    v
}

/// Radial curve from `p` through `x`: Euler integration of
/// sigma'(s) = (tg(kappa, |p sigma|) / tg(kappa, s)) * grad dist_p, where the
/// gradient is the tangent-wedge projection of the unit radial field.  The
/// parameter starts at s = |p x| and the curve terminates when s reaches
/// either `s_max` or varpi(kappa)/2.
pub fn radial_curve(
    space: &ConvexDomainSpace,
    p: &[f64],
    x: &[f64],
    kappa: f64,
    h: f64,
    s_max: f64,
) -> Result<DiscreteCurve, FlowError> {
    let s0 = euclid(p, x);
    let cap = 0.5 * varpi(kappa);
    if s0 <= 0.0 || s0 >= cap {
        return Err(FlowError::BadStart(format!(
            "|p x| = {s0} outside (0, {cap})"
        )));
    }
    if !space.contains(p) || !space.contains(x) {
        return Err(FlowError::BadStart("p or x outside the domain".into()));
    }
    let stop = s_max.min(cap - 1e-9);
    let mut points = vec![x.to_vec()];
    let mut params = vec![s0];
    let mut cur = x.to_vec();
    let mut s = s0;
    while s + h <= stop + 1e-12 {
        let r = euclid(p, &cur);
        let dir: Vec<f64> = if r < 1e-12 {
            vec![0.0; cur.len()]
        } else {
            cur.iter().zip(p).map(|(ci, pi)| (ci - pi) / r).collect()
        };
        let g = space.tangent_project(&cur, &dir);
        let factor = tg(kappa, r) / tg(kappa, s);
        let next: Vec<f64> = cur
            .iter()
            .zip(&g)
            .map(|(ci, gi)| ci + h * factor * gi)
            .collect();
        cur = space.project(&next);
        s += h;
        points.push(cur.clone());
        params.push(s);
    }
    Ok(DiscreteCurve { params, points })
}

/// Gradient exponent: endpoint of the radial curve from `p` in the
/// direction of `v` at parameter |v|.  On the full space and the half-plane
/// this is the closest-point projection of p + v (closed form, no
/// integration); on the disk it is integrated with step `h`.
pub fn gexp(
    space: &ConvexDomainSpace,
    p: &[f64],
    v: &[f64],
    kappa: f64,
    h: f64,
) -> Result<Vec<f64>, FlowError> {
    let len = norm(v);
    if len < 1e-15 {
        return Ok(p.to_vec());
    }
    match space.domain {
        ConvexDomain::Full | ConvexDomain::HalfPlane => {
            let target: Vec<f64> = p.iter().zip(v).map(|(pi, vi)| pi + vi).collect();
            Ok(space.project(&target))
        }
        ConvexDomain::Disk { .. } => {
            let eps = (1e-4 * len).min(1e-4);
            let start: Vec<f64> = p.iter().zip(v).map(|(pi, vi)| pi + eps * vi / len).collect();
            let start = space.project(&start);
            let curve = radial_curve(space, p, &start, kappa, h, len)?;
            Ok(curve.last().to_vec())
        }
    }
}

/// Radial comparison audit for two radial curves from the same basepoint:
/// with phi_min the comparison angle between the start points, checks
/// dist(rho(r), sigma(s)) <= model_side(kappa, phi_min, r, s) over the full
/// parameter grid, and that the comparison angle phi(r, s) is nonincreasing
/// in each parameter.  Tolerance `slack` is absolute.
pub fn radial_comparison_check(
    rho: &DiscreteCurve,
    sigma: &DiscreteCurve,
    _p: &[f64],
    kappa: f64,
    slack: f64,
) -> Result<Verdict, FlowError> {
    if rho.len() < 2 || sigma.len() < 2 {
        return Err(FlowError::TooShort(2));
    }
    let ell0 = euclid(&rho.points[0], &sigma.points[0]);
    let r0 = rho.params[0];
    let s0 = sigma.params[0];
    let phi_min = match model_angle(kappa, ell0, r0, s0) {
        Some(a) => a,
        None => {
            let mut v = Verdict::new(true, 0.0);
            v.vacuous_count = 1;
            v.checked = 1;
            v.notes.push("initial comparison angle undefined".into());
            return Ok(v);
        }
    };
    let nr = rho.len();
    let ns = sigma.len();
    let mut worst = f64::INFINITY;
    let mut wit: Option<Witness> = None;
    let mut vacuous = 0usize;
    let mut checked = 0usize;
    let mut phi = vec![f64::NAN; nr * ns];
    for i in 0..nr {
        for j in 0..ns {
            let r = rho.params[i];
            let s = sigma.params[j];
            let ell = euclid(&rho.points[i], &sigma.points[j]);
            let bound = model_side(kappa, phi_min, r, s)?;
            checked += 1;
            let margin = bound - ell;
            if margin < worst {
                worst = margin;
                wit = Some(Witness {
                    tuple: vec![i, j],
                    margin,
                    note: format!("side bound exceeded at (r, s) = ({r}, {s})"),
                });
            }
            match model_angle(kappa, ell, r, s) {
                Some(a) => phi[i * ns + j] = a,
                None => vacuous += 1,
            }
        }
    }
    // radial monotonicity: the comparison angle is nonincreasing along the
    // two boundary edges of the grid — in r at s = s_min (fixed point
    // sigma(s_min)) and in s at r = r_min
    let mut mono_worst = f64::INFINITY;
    let mut edges: Vec<(usize, usize, usize, usize)> = Vec::new();
    for i in 0..nr - 1 {
        edges.push((i, 0, i + 1, 0));
    }
    for j in 0..ns - 1 {
        edges.push((0, j, 0, j + 1));
    }
    for (i, j, pi, pj) in edges {
        let cur = phi[i * ns + j];
        let nxt = phi[pi * ns + pj];
        if !cur.is_finite() || !nxt.is_finite() {
            continue;
        }
        let m = cur - nxt;
        checked += 1;
        if m < mono_worst {
            mono_worst = m;
            if m < worst {
                worst = m;
                wit = Some(Witness {
                    tuple: vec![i, j, pi, pj],
                    margin: m,
                    note: "comparison angle increased".into(),
                });
            }
        }
    }
    let mut v = Verdict::new(worst >= -slack, worst);
    v.checked = checked;
    v.vacuous_count = vacuous;
    v.notes.push(format!(
        "phi_min = {phi_min:.6}, monotonicity margin = {mono_worst:.3e}"
    ));
    if !v.pass {
        v.witness = wit;
    }
    Ok(v)
}

/// Planar development of a curve around a basepoint, in polar coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Development {
    /// Radii |p gamma(t_i)|.
    pub rho: Vec<f64>,
    /// Accumulated polar angles.
    pub theta: Vec<f64>,
    /// Convexity with respect to the basepoint: margin is the minimum over
    /// interior vertices of pi minus the total vertex angle on the basepoint
    /// side.
    pub verdict: Verdict,
}

/// Develops a polyline given its radii `rho[i] = |p x_i|` and chord lengths
/// `chords[i] = |x_i x_{i+1}|` by chaining model triangles around the
/// basepoint, all turning the same way.
///
/// Convexity with respect to the basepoint demands the two triangle angles
/// meeting at each interior vertex to sum to at most pi.  The margin is
/// reported in length units via the equivalent straightening form: for each
/// interior vertex, lay the single model triangle with sides rho[i-1],
/// rho[i+1] and base chords[i-1] + chords[i]; the vertex is convex exactly
/// when rho[i] dominates the model distance from the basepoint to the point
/// splitting the base by chords[i-1].  Angle-form margins degrade like
/// (distance error)/(chord length); the length form stays commensurate with
/// the input error.
pub fn develop_polyline(kappa: f64, rho: &[f64], chords: &[f64]) -> Result<Development, FlowError> {
    let n = rho.len();
    if n < 2 || chords.len() != n - 1 {
        return Err(FlowError::TooShort(2));
    }
    let w = varpi(kappa);
    for (i, &r) in rho.iter().enumerate() {
        if r <= 0.0 || r >= w {
            return Err(FlowError::RadiusOutOfRange(r, i));
        }
    }
    let mut theta = vec![0.0; n];
    for i in 0..n - 1 {
        let (a, b, c) = (chords[i], rho[i], rho[i + 1]);
        let top = model_angle(kappa, a, b, c).ok_or_else(|| {
            ModelError::OutOfDomain(format!("degenerate triangle at segment {i}"))
        })?;
        theta[i + 1] = theta[i] + top;
    }
    let mut worst = f64::INFINITY;
    let mut wit: Option<Witness> = None;
    let mut vacuous = 0usize;
    for i in 1..n - 1 {
        let base = chords[i - 1] + chords[i];
        let split = (|| {
            let phi = model_angle(kappa, rho[i + 1], rho[i - 1], base)?;
            model_side(kappa, phi, rho[i - 1], chords[i - 1]).ok()
        })();
        let Some(pz) = split else {
            vacuous += 1;
            continue;
        };
        let margin = rho[i] - pz;
        if margin < worst {
            worst = margin;
            wit = Some(Witness {
                tuple: vec![i],
                margin,
                note: "development bends toward the basepoint".into(),
            });
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    let mut verdict = Verdict::new(worst >= -1e-9, worst);
    verdict.checked = n.saturating_sub(2);
    verdict.vacuous_count = vacuous;
    if !verdict.pass {
        verdict.witness = wit;
    }
    Ok(Development {
        rho: rho.to_vec(),
        theta,
        verdict,
    })
}

/// Calibrates the pass band for development convexity on a sampled net: runs
/// the straightening margin with exact surface distances (pure
/// geodesic-recovery wobble, no metric error) over probe triples
/// `(basepoint, start, end)` and adds a multiple of the net's metric budget.
pub fn development_budget(s: &SampledSpace, kappa: f64, probes: &[(usize, usize, usize)]) -> f64 {
    let d = |i: usize, j: usize| s.exact_distance(i, j).unwrap_or_else(|| s.dist(i, j));
    let mut worst: f64 = 0.0;
    for &(p, a, b) in probes {
        let path = s.geodesic(a, b);
        if path.len() < 3 || path.contains(&p) {
            continue;
        }
        for w in path.windows(3) {
            let (x0, x1, x2) = (w[0], w[1], w[2]);
            let (c1, c2) = (d(x0, x1), d(x1, x2));
            let (r0, r1, r2) = (d(p, x0), d(p, x1), d(p, x2));
            if let Some(phi) = model_angle(kappa, r2, r0, c1 + c2) {
                if let Ok(pz) = model_side(kappa, phi, r0, c1) {
                    worst = worst.max(pz - r1);
                }
            }
        }
    }
    // headroom over the sampled maximum: the probes only see a finite draw
    // from the wobble distribution
    1.5 * worst + 4.0 * s.delta_h
}

/// Development of a vertex path of a sampled space around vertex `p`, using
/// graph distances; `tol` widens the convexity pass band (use the space's
/// discretization budget).
pub fn develop_curve(
    s: &SampledSpace,
    p: usize,
    path: &[usize],
    kappa: f64,
    tol: f64,
) -> Result<Development, FlowError> {
    let rho: Vec<f64> = path.iter().map(|&v| s.dist(p, v)).collect();
    let chords: Vec<f64> = path.windows(2).map(|w| s.dist(w[0], w[1])).collect();
    let mut dev = develop_polyline(kappa, &rho, &chords)?;
    dev.verdict.pass = dev.verdict.margin >= -tol;
    if dev.verdict.pass {
        dev.verdict.witness = None;
    }
    Ok(dev)
}

/// Development of a Euclidean polyline around a basepoint.
pub fn develop_euclidean(
    kappa: f64,
    p: &[f64],
    points: &[Vec<f64>],
) -> Result<Development, FlowError> {
    let rho: Vec<f64> = points.iter().map(|x| euclid(p, x)).collect();
    let chords: Vec<f64> = points.windows(2).map(|w| euclid(&w[0], &w[1])).collect();
    develop_polyline(kappa, &rho, &chords)
}

/// Discrete convexity of t -> |gamma(t) sigma(t)| for two equally sampled
/// geodesics of a nonpositively curved sampled space: second differences of
/// the distance sequence stay above -tol.
pub fn geodesic_convexity_check(
    s: &SampledSpace,
    gamma: &[usize],
    sigma: &[usize],
    tol: f64,
) -> Result<Verdict, FlowError> {
    if gamma.len() != sigma.len() || gamma.len() < 3 {
        return Err(FlowError::TooShort(3));
    }
    let d: Vec<f64> = gamma
        .iter()
        .zip(sigma)
        .map(|(&g, &t)| s.dist(g, t))
        .collect();
    let mut worst = f64::INFINITY;
    let mut wit: Option<Witness> = None;
    for k in 1..d.len() - 1 {
        let second = d[k + 1] - 2.0 * d[k] + d[k - 1];
        if second < worst {
            worst = second;
            wit = Some(Witness {
                tuple: vec![k],
                margin: second,
                note: "distance function bulges upward".into(),
            });
        }
    }
    let mut v = Verdict::new(worst >= -tol, worst);
    v.checked = d.len() - 2;
    if !v.pass {
        v.witness = wit;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{net_of_surface, SurfaceKind};
    use std::f64::consts::PI;

    fn plane2() -> ConvexDomainSpace {
        ConvexDomainSpace::new(2, ConvexDomain::Full)
    }

    fn half2() -> ConvexDomainSpace {
        ConvexDomainSpace::new(2, ConvexDomain::HalfPlane)
    }

    #[test]
    fn quadratic_flow_matches_exponential() {
        let f = Objective::Quadratic {
            center: vec![0.0, 0.0],
            lambda: -1.0,
        };
        let c = gradient_curve(&plane2(), &f, &[1.0, 0.0], 1e-3, 2.0).unwrap();
        for k in (0..c.len()).step_by(200) {
            let t = c.params[k];
            let exact = (-t).exp();
            assert!((c.points[k][0] - exact).abs() < 3e-3, "t={t}");
            assert!(c.points[k][1].abs() < 1e-12);
        }
    }

    #[test]
    fn linear_flow_is_straight() {
        let f = Objective::Linear {
            grad: vec![3.0, 4.0],
        };
        let c = gradient_curve(&plane2(), &f, &[0.0, 0.0], 1e-3, 1.0).unwrap();
        let end = c.last();
        assert!((end[0] - 3.0).abs() < 1e-9 && (end[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn neg_dist_flow_stops_at_target() {
        let f = Objective::NegDistTo { p: vec![2.0, 0.0] };
        let c = gradient_curve(&plane2(), &f, &[0.0, 0.0], 1e-3, 3.0).unwrap();
        let end = c.last();
        assert!(euclid(end, &[2.0, 0.0]) < 2e-3);
        // straight approach: y stays zero
        for pt in &c.points {
            assert!(pt[1].abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_quadratic_and_linear() {
        let fq = Objective::Quadratic {
            center: vec![0.0, 0.0],
            lambda: -1.0,
        };
        let v = contraction_check(&plane2(), &fq, &[1.0, 0.0], &[0.0, 1.0], 1e-3, 2.0, 3.0)
            .unwrap();
        assert!(v.pass, "margin={}", v.margin);
        let fl = Objective::Linear {
            grad: vec![1.0, 2.0],
        };
        let v = contraction_check(&plane2(), &fl, &[0.0, 0.0], &[1.0, 1.0], 1e-3, 1.0, 1.0)
            .unwrap();
        assert!(v.pass && v.margin.abs() < 1e-9);
    }

    #[test]
    fn self_contracting_scan() {
        let fq = Objective::Quadratic {
            center: vec![0.5, -0.25],
            lambda: -1.0,
        };
        let c = gradient_curve(&plane2(), &fq, &[1.5, 2.0], 1e-3, 3.0).unwrap();
        let v = self_contracting_check(&c, 4e-3, 150);
        assert!(v.pass, "margin={}", v.margin);
        // a circular arc of more than a quarter turn moves away from its
        // start, violating the property
        let n = 120;
        let arc = DiscreteCurve {
            params: (0..n).map(|k| k as f64).collect(),
            points: (0..n)
                .map(|k| {
                    let t = 1.5 * PI * k as f64 / (n - 1) as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
        };
        let v = self_contracting_check(&arc, 1e-6, 200);
        assert!(!v.pass);
        assert!(v.witness.is_some());
    }

    #[test]
    fn radial_curve_full_plane_is_geodesic() {
        for kappa in [0.0, -1.0, 0.5] {
            let c = radial_curve(&plane2(), &[0.0, 0.0], &[0.1, 0.0], kappa, 1e-3, 1.2).unwrap();
            for k in 0..c.len() {
                let r = euclid(&c.points[k], &[0.0, 0.0]);
                assert!((r - c.params[k]).abs() < 5e-3, "kappa={kappa}");
                assert!(c.points[k][1].abs() < 1e-12);
            }
            if kappa > 0.0 {
                let cap = 0.5 * varpi(kappa);
                assert!(*c.params.last().unwrap() <= cap);
            }
        }
    }

    #[test]
    fn gexp_half_plane_closed_form() {
        let sp = half2();
        let p = [0.3, 0.2];
        for (vx, vy) in [(1.0, -0.8), (0.5, 0.1), (-1.2, -0.6), (0.0, -1.0)] {
            let got = gexp(&sp, &p, &[vx, vy], 0.0, 1e-3).unwrap();
            let want = sp.project(&[p[0] + vx, p[1] + vy]);
            assert!(euclid(&got, &want) < 1e-12);
        }
    }

    #[test]
    fn radial_curve_half_plane_tracks_projection() {
        // the radial curve from p through x in the half-plane follows the
        // projected straight ray; audit against proj(p + s * dir)
        let sp = half2();
        let p = [0.0, 0.5];
        let dir = [3.0f64, -4.0];
        let n = norm(&dir);
        let x = [p[0] + 0.05 * dir[0] / n, p[1] + 0.05 * dir[1] / n];
        let c = radial_curve(&sp, &p, &x, 0.0, 1e-4, 2.0).unwrap();
        for k in (0..c.len()).step_by(500) {
            let s = c.params[k];
            let want = sp.project(&[p[0] + s * dir[0] / n, p[1] + s * dir[1] / n]);
            assert!(euclid(&c.points[k], &want) < 5e-3, "s={s}");
        }
    }

    #[test]
    fn radial_curve_disk_stays_short() {
        let sp = ConvexDomainSpace::new(2, ConvexDomain::Disk { radius: 1.0 });
        let p = [0.0, 0.0];
        let x = [0.0, 0.9];
        let c = radial_curve(&sp, &p, &x, 0.0, 1e-3, 3.0).unwrap();
        for k in 0..c.len() {
            assert!(euclid(&c.points[k], &p) <= c.params[k] + 1e-9);
            assert!(norm(&c.points[k]) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn radial_comparison_grid() {
        // two radial geodesics in the plane: equality up to integrator error
        let sp = plane2();
        let p = [0.0, 0.0];
        let h = 1e-3;
        let a = radial_curve(&sp, &p, &[0.05, 0.0], 0.0, h, 1.0).unwrap();
        let b = radial_curve(&sp, &p, &[0.0, 0.05], 0.0, h, 1.0).unwrap();
        let v = radial_comparison_check(&sub(&a, 40), &sub(&b, 40), &p, 0.0, 10.0 * h).unwrap();
        assert!(v.pass, "plane margin={} notes={:?}", v.margin, v.notes);
        // half-plane pair with boundary sliding
        let sp = half2();
        let p = [0.0, 0.3];
        let a = radial_curve(&sp, &p, &[0.05, 0.27], 0.0, h, 1.5).unwrap();
        let b = radial_curve(&sp, &p, &[-0.04, 0.26], 0.0, h, 1.5).unwrap();
        let v = radial_comparison_check(&sub(&a, 40), &sub(&b, 40), &p, 0.0, 10.0 * h).unwrap();
        assert!(
            v.pass,
            "margin={} witness={:?} notes={:?}",
            v.margin, v.witness, v.notes
        );
    }

    fn sub(c: &DiscreteCurve, take: usize) -> DiscreteCurve {
        let stride = (c.len() / take).max(1);
        DiscreteCurve {
            params: c.params.iter().copied().step_by(stride).collect(),
            points: c.points.iter().cloned().step_by(stride).collect(),
        }
    }

    #[test]
    fn refinement_halves_slack() {
        // first-order integrator: halving h roughly halves the worst
        // violation in the contraction audit (quadratic objective)
        let f = Objective::Quadratic {
            center: vec![0.0, 0.0],
            lambda: -1.0,
        };
        let sp = plane2();
        let slack = |h: f64| -> f64 {
            let v = contraction_check(&sp, &f, &[1.0, 0.0], &[-1.0, 0.5], h, 1.0, 1e9).unwrap();
            (-v.margin).max(0.0)
        };
        let s1 = slack(4e-3);
        let s2 = slack(2e-3);
        if s1 > 1e-12 {
            assert!(s2 <= 0.6 * s1, "s1={s1}, s2={s2}");
        }
    }

    #[test]
    fn development_of_segment_and_circle() {
        // straight segment: development congruent, margin ~ 0
        let pts: Vec<Vec<f64>> = (0..=10).map(|k| vec![-1.0 + 0.2 * k as f64, 1.0]).collect();
        let dev = develop_euclidean(0.0, &[0.0, 0.0], &pts).unwrap();
        assert!(dev.verdict.margin.abs() < 1e-9);
        // lengths preserved: chord between consecutive developed points
        for i in 0..pts.len() - 1 {
            let (r1, t1) = (dev.rho[i], dev.theta[i]);
            let (r2, t2) = (dev.rho[i + 1], dev.theta[i + 1]);
            let d = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * (t2 - t1).cos()).sqrt();
            assert!((d - euclid(&pts[i], &pts[i + 1])).abs() < 1e-9);
        }
        // circle about the basepoint: strictly convex development
        let m = 24;
        let pts: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let t = PI * k as f64 / (m - 1) as f64;
                vec![0.7 * t.cos(), 0.7 * t.sin()]
            })
            .collect();
        let dev = develop_euclidean(0.0, &[0.0, 0.0], &pts).unwrap();
        assert!(dev.verdict.pass && dev.verdict.margin > 1e-3);
        for r in &dev.rho {
            assert!((r - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn development_on_cone_detects_negative_curvature() {
        // cone of total angle 5 pi / 2: a geodesic passing near the tip has
        // a non-convex development with respect to the tip
        let net = net_of_surface(
            SurfaceKind::Cone {
                total_angle: 2.5 * PI,
            },
            0.05,
        )
        .unwrap();
        // endpoints on flanks with angular gap 1.2 pi (the geodesic passes
        // through the tip region) and a basepoint deep in the complementary
        // 1.3-pi sector, where the two legs open by more than pi
        let (mut s, mut t, mut p) = (usize::MAX, usize::MAX, usize::MAX);
        for i in 1..net.n {
            let [r, phi] = [net.positions[i][0], net.positions[i][1]];
            if (r - 0.6).abs() < 0.03 {
                if phi < 0.05 {
                    s = i;
                }
                if (phi - 1.2 * PI).abs() < 0.1 && t == usize::MAX {
                    t = i;
                }
                if (phi - 1.85 * PI).abs() < 0.1 && p == usize::MAX {
                    p = i;
                }
            }
        }
        assert!(s != usize::MAX && t != usize::MAX && p != usize::MAX);
        let path = net.geodesic(s, t);
        assert!(path.len() >= 3 && !path.contains(&p));
        let dev = develop_curve(&net, p, &path, 0.0, 4.0 * net.delta_h).unwrap();
        assert!(!dev.verdict.pass, "margin={}", dev.verdict.margin);
        assert!(dev.verdict.margin < -0.01, "margin={}", dev.verdict.margin);
    }

    #[test]
    fn development_in_cbb_net_is_convex() {
        // geodesics in a flat-plane net develop convexly up to the
        // calibrated budget (metric error plus geodesic-recovery wobble)
        let net = net_of_surface(SurfaceKind::Plane, 0.08).unwrap();
        let probes = [(7, 25, 190), (14, 60, 170), (2, 40, 230)];
        let tol = development_budget(&net, 0.0, &probes);
        let mut checked = 0;
        for (p, s, t) in [(3, 20, 200), (10, 50, 150), (0, 30, 220)] {
            if p >= net.n || s >= net.n || t >= net.n {
                continue;
            }
            let path = net.geodesic(s, t);
            if path.len() < 3 || path.contains(&p) {
                continue;
            }
            let dev = develop_curve(&net, p, &path, 0.0, tol);
            if let Ok(dev) = dev {
                assert!(dev.verdict.pass, "margin={} tol={tol}", dev.verdict.margin);
                checked += 1;
            }
        }
        assert!(checked >= 2);
    }

    #[test]
    fn geodesic_convexity_in_flat_net() {
        let net = net_of_surface(SurfaceKind::Plane, 0.08).unwrap();
        // two geodesics from a shared region, equal vertex counts
        let a = net.geodesic(0, net.n - 1);
        let b = net.geodesic(0, net.n - 2);
        let m = a.len().min(b.len());
        if m >= 3 {
            let v = geodesic_convexity_check(&net, &a[..m], &b[..m], 6.0 * net.delta_h).unwrap();
            assert!(v.pass, "margin={}", v.margin);
        }
    }
}
