//! Warped products with one-dimensional base: cones, suspensions,
//! doublings, and grid-based warped distances feeding the comparison suite.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::Verdict;
use crate::metric::{shortest_metric, FiniteMetric, MetricError, SampledSpace, Witness};
use crate::model::{model_side, varpi, ModelError};

#[derive(Debug, Error)]
pub enum WarpError {
    #[error("model-plane failure: {0}")]
    Model(#[from] ModelError),
    #[error("metric failure: {0}")]
    Metric(#[from] MetricError),
    #[error("invalid warped-product input: {0}")]
    BadInput(String),
}

/// Distance in the kappa-cone over a fiber: between points at radii `s`, `t`
/// whose fiber distance is `phi`, the distance is the model side opposite
/// the angle min(pi, phi) in the hinge with arms `s`, `t`.  An angle of pi
/// or more routes through the tip, giving s + t.
pub fn cone_distance(kappa: f64, s: f64, t: f64, phi: f64) -> Result<f64, WarpError> {
    if s < 0.0 || t < 0.0 || phi < 0.0 {
        return Err(WarpError::BadInput(format!(
            "negative cone coordinate: s={s}, t={t}, phi={phi}"
        )));
    }
    if kappa > 0.0 {
        let w = varpi(kappa);
        if s > w || t > w {
            return Err(WarpError::BadInput(format!(
                "radius beyond the model diameter {w}"
            )));
        }
    }
    let alpha = phi.min(PI);
    Ok(model_side(kappa, alpha, s, t)?)
}

/// A product-grid sample of a warped space: each point is a (height, fiber
/// vertex) pair; apex points carry `usize::MAX` as fiber index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedSample {
    pub metric: FiniteMetric,
    /// (height, fiber index) per sample point; apexes use usize::MAX.
    pub coords: Vec<(f64, usize)>,
    /// Indices of deduplicated apex points (cone tip, suspension poles).
    pub apexes: Vec<usize>,
}

/// Sample of the kappa-cone over a finite fiber on a grid of radii.  Radius
/// zero contributes a single tip point (all fiber points at radius zero are
/// identified), placed first.
pub fn cone_space(fiber: &FiniteMetric, radii: &[f64], kappa: f64) -> Result<WarpedSample, WarpError> {
    let mut coords: Vec<(f64, usize)> = Vec::new();
    let mut apexes = Vec::new();
    if radii.iter().any(|&r| r == 0.0) {
        apexes.push(0);
        coords.push((0.0, usize::MAX));
    }
    for &r in radii {
        if r < 0.0 {
            return Err(WarpError::BadInput(format!("negative radius {r}")));
        }
        if r == 0.0 {
            continue;
        }
        for j in 0..fiber.n {
            coords.push((r, j));
        }
    }
    let mut err = None;
    let metric = FiniteMetric::from_fn(coords.len(), |i, j| {
        let (s, x) = coords[i];
        let (t, y) = coords[j];
        let phi = if x == usize::MAX || y == usize::MAX {
            0.0
        } else {
            fiber.get(x, y)
        };
        match cone_distance(kappa, s, t, phi) {
            Ok(d) => d,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(WarpedSample {
        metric,
        coords,
        apexes,
    })
}

/// Sample of the spherical suspension [0, pi] x_sin F on a grid of polar
/// angles.  Heights 0 and pi each contribute a single pole; distance between
/// (s, x) and (t, y) is the spherical side opposite min(pi, |xy|_F) in the
/// hinge with arms s, t.
pub fn suspension_space(fiber: &FiniteMetric, heights: &[f64]) -> Result<WarpedSample, WarpError> {
    let mut coords: Vec<(f64, usize)> = Vec::new();
    let mut apexes = Vec::new();
    if heights.iter().any(|&s| s == 0.0) {
        apexes.push(coords.len());
        coords.push((0.0, usize::MAX));
    }
    if heights.iter().any(|&s| s == PI) {
        apexes.push(coords.len());
        coords.push((PI, usize::MAX));
    }
    for &s in heights {
        if !(0.0..=PI).contains(&s) {
            return Err(WarpError::BadInput(format!("height {s} outside [0, pi]")));
        }
        if s == 0.0 || s == PI {
            continue;
        }
        for j in 0..fiber.n {
            coords.push((s, j));
        }
    }
    let mut err = None;
    let metric = FiniteMetric::from_fn(coords.len(), |i, j| {
        let (s, x) = coords[i];
        let (t, y) = coords[j];
        let phi = if x == usize::MAX || y == usize::MAX {
            0.0
        } else {
            fiber.get(x, y)
        };
        let alpha = phi.min(PI);
        // poles sit at the model diameter, outside the hinge domain
        if s == 0.0 {
            return t;
        }
        if t == 0.0 {
            return s;
        }
        if s == PI {
            return PI - t;
        }
        if t == PI {
            return PI - s;
        }
        match model_side(1.0, alpha, s, t) {
            Ok(d) => d,
            Err(_) => {
                err.get_or_insert(WarpError::BadInput(format!(
                    "suspension side undefined at heights ({s}, {t})"
                )));
                0.0
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(WarpedSample {
        metric,
        coords,
        apexes,
    })
}

/// Doubling of a sampled space across a vertex subset: two copies of the
/// graph share exactly the vertices of `a`, so every path between opposite
/// copies threads through the subset, realizing
/// |x' y| = inf over a of |x a| + |a y|.
pub fn doubling(s: &SampledSpace, a: &[usize]) -> Result<SampledSpace, WarpError> {
    if a.is_empty() {
        return Err(WarpError::BadInput("empty gluing set".into()));
    }
    let n = s.n;
    let shared = {
        let mut m = vec![false; n];
        for &v in a {
            if v >= n {
                return Err(WarpError::BadInput(format!("vertex {v} out of range")));
            }
            m[v] = true;
        }
        m
    };
    // map each original vertex to its mirror-copy index
    let mut mirror = vec![0usize; n];
    let mut next = n;
    for v in 0..n {
        mirror[v] = if shared[v] {
            v
        } else {
            next += 1;
            next - 1
        };
    }
    let total = next;
    let mut edges = s.edges.clone();
    for &(u, v, w) in &s.edges {
        let (mu, mv) = (mirror[u], mirror[v]);
        if mu != u || mv != v {
            edges.push((mu, mv, w));
        }
    }
    let mut out = shortest_metric(total, &edges)?;
    out.delta_h = s.delta_h;
    out.mesh = s.mesh;
    out.tags = s.tags.clone();
    out.tags.insert("seam".into(), a.to_vec());
    out.tags
        .insert("mirror".into(), (n..total).collect());
    Ok(out)
}

/// Warping-function tags over a one-dimensional base interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WarpTag {
    Id,
    Sin,
    Sinh,
    Cosh,
    Exp,
    ConstOne,
    /// Piecewise-linear sample (xs strictly increasing spanning the base)
    /// with a declared Lipschitz constant for the error budget.
    Custom {
        xs: Vec<f64>,
        ys: Vec<f64>,
        lipschitz: f64,
    },
}

/// A warped product with one-dimensional base [a, b] and a finite fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpSpec {
    pub a: f64,
    pub b: f64,
    pub tag: WarpTag,
    pub fiber: FiniteMetric,
}

impl WarpSpec {
    pub fn warp(&self, x: f64) -> f64 {
        match &self.tag {
            WarpTag::Id => x,
            WarpTag::Sin => x.sin(),
            WarpTag::Sinh => x.sinh(),
            WarpTag::Cosh => x.cosh(),
            WarpTag::Exp => x.exp(),
            WarpTag::ConstOne => 1.0,
            WarpTag::Custom { xs, ys, .. } => {
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= *xs.last().unwrap() {
                    return *ys.last().unwrap();
                }
                let k = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                ys[k] + t * (ys[k + 1] - ys[k])
            }
        }
    }

    pub fn validate(&self) -> Result<(), WarpError> {
        if !(self.a < self.b) {
            return Err(WarpError::BadInput("base interval is empty".into()));
        }
        let m = 200;
        for k in 0..=m {
            let x = self.a + (self.b - self.a) * k as f64 / m as f64;
            let f = self.warp(x);
            if f < 0.0 {
                return Err(WarpError::BadInput(format!(
                    "warping function negative at {x}"
                )));
            }
            if f == 0.0 && k != 0 && k != m {
                return Err(WarpError::BadInput(format!(
                    "warping function vanishes at interior point {x}"
                )));
            }
        }
        Ok(())
    }
}

/// Additive error budget of the grid computation in [`warped_1d_distance`]:
/// anisotropy of the 8-neighbor stencil plus the mesh term.
pub fn warp_grid_budget(length_scale: f64) -> f64 {
    0.09 * length_scale + 1e-3
}

/// Distance in the warped product between (p, phi) and (q, psi) with fiber
/// separation ell = |phi psi|: by fiber independence this reduces to the
/// two-dimensional strip [a, b] x [0, ell] with line element
/// sqrt(dx^2 + f(x)^2 dy^2).  Computed as a shortest path on an 8-neighbor
/// grid at two resolutions with Richardson extrapolation; accuracy is
/// [`warp_grid_budget`] of the path length.
pub fn warped_1d_distance(spec: &WarpSpec, p: f64, q: f64, ell: f64) -> Result<f64, WarpError> {
    spec.validate()?;
    if !(spec.a..=spec.b).contains(&p) || !(spec.a..=spec.b).contains(&q) {
        return Err(WarpError::BadInput("base coordinate outside [a, b]".into()));
    }
    if ell < 0.0 {
        return Err(WarpError::BadInput("negative fiber separation".into()));
    }
    if ell == 0.0 {
        return Ok((p - q).abs());
    }
    let coarse = strip_distance(spec, p, q, ell, 60)?;
    let fine = strip_distance(spec, p, q, ell, 120)?;
    // first-order Richardson in the mesh
    Ok(fine + (fine - coarse))
}

fn strip_distance(spec: &WarpSpec, p: f64, q: f64, ell: f64, ny: usize) -> Result<f64, WarpError> {
    let (a, b) = (spec.a, spec.b);
    let nx = (((b - a) / ell * ny as f64).round() as usize).clamp(8, 400);
    let hx = (b - a) / nx as f64;
    let hy = ell / ny as f64;
    let cols = nx + 1;
    let rows = ny + 1;
    let id = |i: usize, j: usize| j * cols + i;
    // snap the endpoints onto grid columns by remapping the two nearest
    // columns exactly onto p and q
    let xs: Vec<f64> = (0..cols).map(|i| a + hx * i as f64).collect();
    let col_of = |x: f64| (((x - a) / hx).round() as usize).min(nx);
    let (ci, cj) = (col_of(p), col_of(q));
    let mut xs = xs;
    xs[ci] = p;
    xs[cj] = q;
    let seg = |x0: f64, y0: f64, x1: f64, y1: f64| -> f64 {
        // two-point quadrature of sqrt(dx^2 + f^2 dy^2) along the segment
        let dx = x1 - x0;
        let dy = y1 - y0;
        let f0 = spec.warp(x0 + 0.2113248654051871 * dx);
        let f1 = spec.warp(x0 + 0.7886751345948129 * dx);
        0.5 * ((dx * dx + f0 * f0 * dy * dy).sqrt() + (dx * dx + f1 * f1 * dy * dy).sqrt())
    };
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..rows {
        let y = hy * j as f64;
        for i in 0..cols {
            let x = xs[i];
            if i + 1 < cols {
                let w = seg(x, y, xs[i + 1], y);
                if w > 0.0 {
                    edges.push((id(i, j), id(i + 1, j), w));
                }
            }
            if j + 1 < rows {
                let w = seg(x, y, x, y + hy);
                if w > 0.0 {
                    edges.push((id(i, j), id(i, j + 1), w));
                }
                if i + 1 < cols {
                    let w = seg(x, y, xs[i + 1], y + hy);
                    if w > 0.0 {
                        edges.push((id(i, j), id(i + 1, j + 1), w));
                    }
                    let w = seg(xs[i + 1], y, x, y + hy);
                    if w > 0.0 {
                        edges.push((id(i + 1, j), id(i, j + 1), w));
                    }
                }
            }
        }
    }
    let (src, dst) = (id(ci, 0), id(cj, ny));
    dijkstra_pair(cols * rows, &edges, src, dst)
        .ok_or_else(|| WarpError::BadInput("strip grid disconnected".into()))
}

fn dijkstra_pair(n: usize, edges: &[(usize, usize, f64)], src: usize, dst: usize) -> Option<f64> {
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(i, j, w) in edges {
        adj[i].push((j as u32, w));
        adj[j].push((i as u32, w));
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[src] = 0.0;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((ordered(0.0), src as u32)));
    while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
        let u = u as usize;
        let du = f64::from_bits(d.0);
        if du > dist[u] {
            continue;
        }
        if u == dst {
            return Some(du);
        }
        for &(v, w) in &adj[u] {
            let v = v as usize;
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(std::cmp::Reverse((ordered(nd), v as u32)));
            }
        }
    }
    dist[dst].is_finite().then_some(dist[dst])
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct OrderedBits(u64);

fn ordered(x: f64) -> OrderedBits {
    // monotone bijection from nonnegative floats to ordered integers
    OrderedBits(x.to_bits())
}

/// For warping functions f <= g over the same base, distances in the
/// f-product never exceed distances in the g-product (up to the grid
/// budget).  Samples are (p, q, ell) triples.
pub fn warp_monotone_check(
    lo: &WarpSpec,
    hi: &WarpSpec,
    samples: &[(f64, f64, f64)],
) -> Result<Verdict, WarpError> {
    let mut worst = f64::INFINITY;
    let mut wit = None;
    let mut scale: f64 = 0.0;
    for (k, &(p, q, ell)) in samples.iter().enumerate() {
        let dl = warped_1d_distance(lo, p, q, ell)?;
        let dh = warped_1d_distance(hi, p, q, ell)?;
        scale = scale.max(dl.max(dh));
        let m = dh - dl;
        if m < worst {
            worst = m;
            wit = Some(Witness {
                tuple: vec![k],
                margin: m,
                note: format!("d_lo = {dl:.6} exceeds d_hi = {dh:.6}"),
            });
        }
    }
    let tol = 2.0 * warp_grid_budget(scale);
    let mut v = Verdict::new(worst >= -tol, worst);
    v.checked = samples.len();
    if !v.pass {
        v.witness = wit;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::{is_cat, is_cbb};
    use crate::metric::circle_metric;

    #[test]
    fn cone_distance_examples() {
        // through the tip
        let d = cone_distance(0.0, 1.25, 2.5, PI).unwrap();
        assert!((d - 3.75).abs() < 1e-12);
        let d = cone_distance(0.0, 1.25, 2.5, 4.0).unwrap();
        assert!((d - 3.75).abs() < 1e-12);
        // right angle
        let d = cone_distance(0.0, 3.0, 4.0, PI / 2.0).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
        // cone over a 2 pi circle is the flat plane
        let fib = circle_metric(16, 2.0 * PI);
        for (i, j, s, t) in [(0usize, 3usize, 0.5, 1.2), (2, 9, 1.0, 1.0), (1, 8, 0.25, 2.0)] {
            let phi = fib.get(i, j);
            let d = cone_distance(0.0, s, t, phi).unwrap();
            let chord = (s * s + t * t - 2.0 * s * t * phi.cos()).sqrt();
            assert!((d - chord).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_over_point_is_ray() {
        let fib = FiniteMetric::from_fn(1, |_, _| 0.0);
        let cone = cone_space(&fib, &[0.0, 0.5, 1.0, 1.5], 0.0).unwrap();
        assert_eq!(cone.metric.n, 4);
        assert_eq!(cone.apexes, vec![0]);
        for i in 0..4 {
            for j in 0..4 {
                let (s, t) = (cone.coords[i].0, cone.coords[j].0);
                assert!((cone.metric.get(i, j) - (s - t).abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn suspension_of_antipodal_pair_is_great_circle() {
        let fib = FiniteMetric::from_fn(2, |i, j| if i == j { 0.0 } else { PI });
        let sus = suspension_space(&fib, &[0.0, PI / 2.0, PI]).unwrap();
        // poles plus two equatorial points: a 4-point great circle
        assert_eq!(sus.metric.n, 4);
        let n = sus.metric.n;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = sus.metric.get(i, j);
                    assert!(
                        (d - PI / 2.0).abs() < 1e-12 || (d - PI).abs() < 1e-12,
                        "d={d}"
                    );
                }
            }
        }
        // antipodal pairs: pole-pole and the two equatorial points
        let far = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| (sus.metric.get(i, j) - PI).abs() < 1e-12)
            .count();
        assert_eq!(far, 4, "two antipodal pairs, counted both ways");
    }

    #[test]
    fn suspension_of_circle_is_sphere() {
        let m = 12;
        let fib = circle_metric(m, 2.0 * PI);
        let heights: Vec<f64> = (0..=6).map(|k| PI * k as f64 / 6.0).collect();
        let sus = suspension_space(&fib, &heights).unwrap();
        // compare with great-circle distances of the standard embedding
        let embed = |&(s, j): &(f64, usize)| -> [f64; 3] {
            if j == usize::MAX {
                return [0.0, 0.0, if s == 0.0 { 1.0 } else { -1.0 }];
            }
            let phi = 2.0 * PI * j as f64 / m as f64;
            [s.sin() * phi.cos(), s.sin() * phi.sin(), s.cos()]
        };
        for i in 0..sus.metric.n {
            for j in 0..sus.metric.n {
                let (u, v) = (embed(&sus.coords[i]), embed(&sus.coords[j]));
                let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
                // acos near +-1 loses half the digits; 1e-7 absorbs that
                assert!(
                    (sus.metric.get(i, j) - dot.acos()).abs() < 1e-7,
                    "({i},{j})"
                );
            }
        }
        let v = is_cbb(&sus.metric, 1.0, 1e-6);
        assert!(v.pass, "margin={}", v.margin);
    }

    #[test]
    fn cone_over_short_circle_is_cbb() {
        let fib = circle_metric(10, 1.5 * PI);
        let radii: Vec<f64> = (0..=4).map(|k| 0.15 * k as f64).collect();
        let cone = cone_space(&fib, &radii, 0.0).unwrap();
        let v = is_cbb(&cone.metric, 0.0, 1e-6);
        assert!(v.pass, "margin={}", v.margin);
    }

    #[test]
    fn cone_over_long_circle_fails_cbb_near_tip() {
        let fib = circle_metric(10, 2.5 * PI);
        let radii: Vec<f64> = (0..=4).map(|k| 0.12 * k as f64).collect();
        let cone = cone_space(&fib, &radii, 0.0).unwrap();
        let v = is_cbb(&cone.metric, 0.0, 1e-6);
        assert!(!v.pass);
        let w = v.witness.expect("violating quadruple");
        for &i in &w.tuple {
            assert!(cone.metric.get(0, i) <= 0.5, "witness far from the tip");
        }
    }

    #[test]
    fn doubling_segment_and_half_grid() {
        // segment doubled across one endpoint: a segment of doubled length
        let n = 6;
        let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 0.5)).collect();
        let seg = shortest_metric(n, &edges).unwrap();
        let dbl = doubling(&seg, &[0]).unwrap();
        assert_eq!(dbl.n, 2 * n - 1);
        // the two far endpoints are 2 * 2.5 apart
        let far_mirror = dbl.tags["mirror"][n - 2];
        assert!((dbl.dist(n - 1, far_mirror) - 5.0).abs() < 1e-12);
        // half-plane strip doubled along its boundary line: flat distances
        let (w, hgt) = (5usize, 3usize);
        let id = |i: usize, j: usize| j * w + i;
        let mut edges = Vec::new();
        for j in 0..hgt {
            for i in 0..w {
                if i + 1 < w {
                    edges.push((id(i, j), id(i + 1, j), 1.0));
                }
                if j + 1 < hgt {
                    edges.push((id(i, j), id(i, j + 1), 1.0));
                    if i + 1 < w {
                        edges.push((id(i, j), id(i + 1, j + 1), std::f64::consts::SQRT_2));
                        edges.push((id(i + 1, j), id(i, j + 1), std::f64::consts::SQRT_2));
                    }
                }
            }
        }
        let half = shortest_metric(w * hgt, &edges).unwrap();
        let boundary: Vec<usize> = (0..w).collect();
        let dbl = doubling(&half, &boundary).unwrap();
        // crossing distance: vertex (i, j) to mirrored (i, j) is 2 j
        for j in 1..hgt {
            let v = id(2, j);
            let mv = dbl.tags["mirror"][v - w];
            assert!((dbl.dist(v, mv) - 2.0 * j as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn doubling_along_nonconvex_set_fails_cat() {
        // L-shaped gluing set inside a flat grid: the doubled space has a
        // branch witness
        let (w, hgt) = (4usize, 4usize);
        let id = |i: usize, j: usize| j * w + i;
        let mut edges = Vec::new();
        for j in 0..hgt {
            for i in 0..w {
                if i + 1 < w {
                    edges.push((id(i, j), id(i + 1, j), 1.0));
                }
                if j + 1 < hgt {
                    edges.push((id(i, j), id(i, j + 1), 1.0));
                    if i + 1 < w {
                        edges.push((id(i, j), id(i + 1, j + 1), std::f64::consts::SQRT_2));
                        edges.push((id(i + 1, j), id(i, j + 1), std::f64::consts::SQRT_2));
                    }
                }
            }
        }
        let grid = shortest_metric(w * hgt, &edges).unwrap();
        // two isolated gluing vertices: a maximally non-convex set
        let a = vec![id(0, 0), id(3, 3)];
        let dbl = doubling(&grid, &a).unwrap();
        let v = is_cat(&dbl.metric, 0.0, 1e-9);
        assert!(!v.pass);
        assert!(v.witness.is_some());
    }

    #[test]
    fn warped_product_examples() {
        // f = id: the flat cone, 3-4-5 at a right angle
        let spec = WarpSpec {
            a: 0.0,
            b: 5.0,
            tag: WarpTag::Id,
            fiber: circle_metric(4, 2.0 * PI),
        };
        let d = warped_1d_distance(&spec, 3.0, 4.0, PI / 2.0).unwrap();
        assert!((d - 5.0).abs() < warp_grid_budget(5.0), "d={d}");
        // f = 1: direct product
        let spec = WarpSpec {
            a: 0.0,
            b: 2.0,
            tag: WarpTag::ConstOne,
            fiber: circle_metric(4, 2.0 * PI),
        };
        let d = warped_1d_distance(&spec, 0.25, 1.75, 2.0).unwrap();
        let want = (1.5f64 * 1.5 + 4.0).sqrt();
        assert!((d - want).abs() < warp_grid_budget(want), "d={d}, want={want}");
        // f = sin on [0, pi]: the unit sphere
        let spec = WarpSpec {
            a: 0.0,
            b: PI,
            tag: WarpTag::Sin,
            fiber: circle_metric(4, 2.0 * PI),
        };
        for (s, t, ell) in [(1.0, 2.0, 1.0), (0.5, 2.4, 2.0), (1.2, 1.2, 3.0)] {
            let d = warped_1d_distance(&spec, s, t, ell).unwrap();
            let want = model_side(1.0, ell.min(PI), s, t).unwrap();
            assert!(
                (d - want).abs() < warp_grid_budget(want.max(1.0)),
                "d={d}, want={want}"
            );
        }
    }

    #[test]
    fn warp_monotonicity() {
        let fiber = circle_metric(4, 2.0 * PI);
        let mk = |tag: WarpTag, a: f64, b: f64| WarpSpec {
            a,
            b,
            tag,
            fiber: fiber.clone(),
        };
        let samples = [(0.2, 0.9, 0.8), (0.5, 0.5, 1.5), (0.1, 0.95, 2.5)];
        // f = g: equality within budget
        let v = warp_monotone_check(
            &mk(WarpTag::Id, 0.0, 1.0),
            &mk(WarpTag::Id, 0.0, 1.0),
            &samples,
        )
        .unwrap();
        assert!(v.pass && v.margin.abs() < 1e-9);
        // id <= sinh on [0, 1]
        let v = warp_monotone_check(
            &mk(WarpTag::Id, 0.0, 1.0),
            &mk(WarpTag::Sinh, 0.0, 1.0),
            &samples,
        )
        .unwrap();
        assert!(v.pass, "margin={}", v.margin);
        // const 0.5 <= const 1 via a custom tag
        let half = WarpTag::Custom {
            xs: vec![0.0, 1.0],
            ys: vec![0.5, 0.5],
            lipschitz: 0.0,
        };
        let v = warp_monotone_check(&mk(half, 0.0, 1.0), &mk(WarpTag::ConstOne, 0.0, 1.0), &samples)
            .unwrap();
        assert!(v.pass, "margin={}", v.margin);
    }

    #[test]
    fn cone_scalar_product_identity() {
        // <v, w> = (|v|^2 + |w|^2 - |vw|^2) / 2 equals |v||w| cos(alpha)
        for (s, t, phi) in [(1.0, 2.0, 0.7), (0.5, 0.5, 2.0), (3.0, 1.5, PI)] {
            let d = cone_distance(0.0, s, t, phi).unwrap();
            let inner = 0.5 * (s * s + t * t - d * d);
            let want = s * t * phi.min(PI).cos();
            assert!((inner - want).abs() < 1e-9);
        }
    }
}
