//! Finite metric spaces, sampled (graph) spaces with shortest-path metrics
//! and geodesic recovery, generators of test corpora, and epsilon-packing.

use crate::model::{self, Model, ModelPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricError {
    #[error("table is not square: row {0} has length {1}, expected {2}")]
    NotSquare(usize, usize, usize),
    #[error("asymmetric entries at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("negative distance at ({0}, {1})")]
    Negative(usize, usize),
    #[error("nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality violated for ({0}, {1}, {2})")]
    Triangle(usize, usize, usize),
    #[error("graph is disconnected (vertex {0} unreachable)")]
    Disconnected(usize),
    #[error("invalid surface spec: {0}")]
    InvalidSpec(String),
}

/// A validated symmetric distance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetric {
    pub n: usize,
    d: Vec<f64>,
}

impl FiniteMetric {
    /// Build without validation (for internally constructed tables that are
    /// symmetric by construction).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        FiniteMetric { n, d }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.d[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    /// Check the metric axioms on an already-built table.
    pub fn validate(&self) -> Result<(), MetricError> {
        validate_table(&self.rows()).map(|_| ())
    }
}

/// Validate a raw table against the metric axioms (symmetry, nonnegativity,
/// zero diagonal, triangle inequality with 1e-12 relative slack) and wrap it.
pub fn validate_metric(table: &[Vec<f64>]) -> Result<FiniteMetric, MetricError> {
    validate_table(table)
}

fn validate_table(table: &[Vec<f64>]) -> Result<FiniteMetric, MetricError> {
    let n = table.len();
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(MetricError::NotSquare(i, row.len(), n));
        }
    }
    let mut scale: f64 = 1.0;
    for row in table {
        for &v in row {
            if v.is_finite() {
                scale = scale.max(v.abs());
            }
        }
    }
    let slack = 1e-12 * scale;
    for i in 0..n {
        if table[i][i].abs() > slack {
            return Err(MetricError::NonzeroDiagonal(i));
        }
        for j in 0..n {
            let v = table[i][j];
            if !v.is_finite() || v < -slack {
                return Err(MetricError::Negative(i, j));
            }
            if (v - table[j][i]).abs() > slack {
                return Err(MetricError::Asymmetric(i, j));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if table[i][k] > table[i][j] + table[j][k] + slack {
                    return Err(MetricError::Triangle(i, j, k));
                }
            }
        }
    }
    Ok(FiniteMetric {
        n,
        d: table.iter().flat_map(|r| r.iter().cloned()).collect(),
    })
}

/// A violating or certifying tuple attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub tuple: Vec<usize>,
    pub margin: f64,
    pub note: String,
}

/// Known underlying geometry of a sampled space, enabling exact distance
/// evaluation for calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurfaceGeom {
    None,
    Plane,
    Sphere { kappa: f64 },
    Hyperbolic { kappa: f64 },
    /// Flat cone; positions are (r, phi) with phi in [0, total_angle).
    Cone { total_angle: f64 },
    /// Two half-planes glued along y = 0; positions are (copy, x, y).
    GluedHalfPlanes,
}

/// A weighted undirected graph with its shortest-path metric, predecessor
/// structure for geodesic recovery, optional vertex tags, and a recorded
/// discretization budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledSpace {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub metric: FiniteMetric,
    /// pred[s][v]: predecessor of v on the recovered geodesic from s.
    pred: Vec<Vec<u32>>,
    pub tags: BTreeMap<String, Vec<usize>>,
    /// Discretization budget delta(h) = C * h, measured against exact
    /// distances where the underlying geometry is known; 0 for abstract
    /// graphs.
    pub delta_h: f64,
    /// Mesh size used to build the net (0 for abstract graphs).
    pub mesh: f64,
    pub geom: SurfaceGeom,
    /// Per-vertex positions in the chart used by `geom`.
    pub positions: Vec<Vec<f64>>,
}

impl SampledSpace {
    /// Recovered geodesic from s to t as a vertex sequence (inclusive).
    pub fn geodesic(&self, s: usize, t: usize) -> Vec<usize> {
        let mut path = vec![t];
        let mut v = t;
        while v != s {
            v = self.pred[s][v] as usize;
            path.push(v);
        }
        path.reverse();
        path
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.get(i, j)
    }

    /// Exact underlying-surface distance, when the geometry is known.
    pub fn exact_distance(&self, i: usize, j: usize) -> Option<f64> {
        exact_surface_distance(&self.geom, &self.positions[i], &self.positions[j])
    }
}

fn exact_surface_distance(geom: &SurfaceGeom, p: &[f64], q: &[f64]) -> Option<f64> {
    match geom {
        SurfaceGeom::None => None,
        SurfaceGeom::Plane => {
            Some(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
        }
        SurfaceGeom::Sphere { kappa } => {
            let m = Model::new(*kappa, 2);
            Some(m.distance(&ModelPoint::new(p.to_vec()), &ModelPoint::new(q.to_vec())))
        }
        SurfaceGeom::Hyperbolic { kappa } => {
            let m = Model::new(*kappa, 2);
            Some(m.distance(&ModelPoint::new(p.to_vec()), &ModelPoint::new(q.to_vec())))
        }
        SurfaceGeom::Cone { total_angle } => {
            let (r1, f1) = (p[0], p[1]);
            let (r2, f2) = (q[0], q[1]);
            let raw = (f1 - f2).abs();
            let sep = raw.min(total_angle - raw);
            let alpha = sep.min(PI);
            Some((r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * alpha.cos()).max(0.0).sqrt())
        }
        SurfaceGeom::GluedHalfPlanes => {
            let (c1, x1, y1) = (p[0], p[1], p[2]);
            let (c2, x2, y2) = (q[0], q[1], q[2]);
            let dy = if c1 == c2 { y1 - y2 } else { y1 + y2 };
            Some(((x1 - x2).powi(2) + dy * dy).sqrt())
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    v: u32,
}
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap via reversed comparison; ties broken by vertex index so
        // the scan order is schedule-independent
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap()
            .then_with(|| other.v.cmp(&self.v))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Build the all-pairs shortest-path metric of a connected weighted graph,
/// with deterministic lexicographic tie-breaking for geodesic recovery.
pub fn shortest_metric(n: usize, edges: &[(usize, usize, f64)]) -> Result<SampledSpace, MetricError> {
    assert!(edges.iter().all(|&(i, j, w)| i < n && j < n && w > 0.0), "edge weights must be positive");
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(i, j, w) in edges {
        adj[i].push((j as u32, w));
        adj[j].push((i as u32, w));
    }
    for a in &mut adj {
        a.sort_by(|x, y| x.0.cmp(&y.0));
    }
    let mut dmat = vec![0.0; n * n];
    let mut pred = Vec::with_capacity(n);
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![u32::MAX; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        prev[s] = s as u32;
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(HeapItem { dist: 0.0, v: s as u32 });
        while let Some(HeapItem { dist: du, v: u }) = heap.pop() {
            let u = u as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, w) in &adj[u] {
                let v = v as usize;
                if done[v] {
                    continue;
                }
                let nd = du + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u as u32;
                    heap.push(HeapItem { dist: nd, v: v as u32 });
                } else if nd == dist[v] && (u as u32) < prev[v] {
                    prev[v] = u as u32;
                }
            }
        }
        if let Some(unreached) = dist.iter().position(|d| !d.is_finite()) {
            return Err(MetricError::Disconnected(unreached));
        }
        dmat[s * n..(s + 1) * n].copy_from_slice(&dist);
        pred.push(prev);
    }
    // Symmetrize exactly: floating summation order may differ per direction.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dmat[i * n + j].min(dmat[j * n + i]);
            dmat[i * n + j] = v;
            dmat[j * n + i] = v;
        }
    }
    Ok(SampledSpace {
        n,
        edges: edges.to_vec(),
        metric: FiniteMetric { n, d: dmat },
        pred,
        tags: BTreeMap::new(),
        delta_h: 0.0,
        mesh: 0.0,
        geom: SurfaceGeom::None,
        positions: vec![Vec::new(); n],
    })
}

/// Seeded sample of `n` points from `Lob^m kappa` with exact pairwise
/// distances.  For positive curvature points stay in a ball of radius
/// `0.45 * varpi` around the base point.
pub fn sample_model_space(kappa: f64, m: usize, n: usize, seed: u64) -> (FiniteMetric, Vec<ModelPoint>) {
    let model = Model::new(kappa, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rmax = if kappa > 0.0 { 0.45 * model.varpi() } else { 1.0 };
    let base = model.base();
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        // uniform-ish in the ball: random direction, radius ~ u^(1/m)
        let mut dir: Vec<f64> = (0..m).map(|_| {
            // Box-Muller from two uniforms keeps the dependency surface small
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        }).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let r = rmax * rng.gen_range(0.0..1.0f64).powf(1.0 / m as f64);
        for x in &mut dir {
            *x *= r / norm;
        }
        let v = if kappa == 0.0 {
            dir
        } else {
            let mut v = vec![0.0];
            v.extend(dir);
            v
        };
        pts.push(model.exp(&base, &v));
    }
    let fm = FiniteMetric::from_fn(n, |i, j| model.distance(&pts[i], &pts[j]));
    (fm, pts)
}

/// The tripod: a center joined to three leaves at distance 1 (leaf-to-leaf
/// distance 2).  Vertex 0 is the center.
pub fn tripod_metric() -> FiniteMetric {
    FiniteMetric::from_fn(4, |i, j| if i == 0 || j == 0 { 1.0 } else { 2.0 })
}

/// Intrinsic metric of `n` evenly spaced points on a circle of the given
/// total length.
pub fn circle_metric(n: usize, length: f64) -> FiniteMetric {
    FiniteMetric::from_fn(n, |i, j| {
        let k = (j - i) as f64;
        let arc = k * length / n as f64;
        arc.min(length - arc)
    })
}

/// Kinds of structured nets.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Plane,
    Sphere { kappa: f64 },
    Hyperbolic { kappa: f64 },
    Cone { total_angle: f64 },
    GluedHalfPlanes,
}

/// Build an h-net of a model surface as a radius graph with exact surface
/// distances as edge weights, compute its shortest-path metric, and measure
/// the discretization budget delta(h) against the exact distances on seeded
/// probe pairs.
pub fn net_of_surface(kind: SurfaceKind, h: f64) -> Result<SampledSpace, MetricError> {
    if !(h > 0.0) || h > 0.7 {
        return Err(MetricError::InvalidSpec(format!("mesh size {h} out of range")));
    }
    // connection radius: long enough that chained edges stay nearly aligned
    let rc = (2.0 * h.sqrt()).max(3.0 * h);
    let (geom, positions, mut tags): (SurfaceGeom, Vec<Vec<f64>>, BTreeMap<String, Vec<usize>>) = match kind {
        SurfaceKind::Plane => {
            let mut pos = Vec::new();
            let steps = (2.0 / h).ceil() as i64;
            for i in 0..=steps {
                for j in 0..=steps {
                    pos.push(vec![-1.0 + 2.0 * i as f64 / steps as f64, -1.0 + 2.0 * j as f64 / steps as f64]);
                }
            }
            (SurfaceGeom::Plane, pos, BTreeMap::new())
        }
        SurfaceKind::Sphere { kappa } => {
            if kappa <= 0.0 {
                return Err(MetricError::InvalidSpec("sphere needs kappa > 0".into()));
            }
            let r = 1.0 / kappa.sqrt();
            let count = ((4.0 * PI * r * r) / (h * h) * 1.3).ceil() as usize;
            let mut pos = Vec::with_capacity(count);
            // Fibonacci lattice
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let th = 2.0 * PI * (i as f64 / golden).fract();
                pos.push(vec![r * rho * th.cos(), r * rho * th.sin(), r * z]);
            }
            (SurfaceGeom::Sphere { kappa }, pos, BTreeMap::new())
        }
        SurfaceKind::Hyperbolic { kappa } => {
            if kappa >= 0.0 {
                return Err(MetricError::InvalidSpec("hyperbolic needs kappa < 0".into()));
            }
            let m = Model::new(kappa, 2);
            let rmax = 1.2;
            let na = ((2.0 * PI * model::sn(kappa, rmax)) / h).ceil().max(8.0) as usize;
            let nr = (rmax / h).ceil() as usize;
            let mut pos = vec![m.base().coords];
            for i in 1..=nr {
                let r = rmax * i as f64 / nr as f64;
                for j in 0..na {
                    let phi = 2.0 * PI * j as f64 / na as f64;
                    let v = vec![0.0, r * phi.cos(), r * phi.sin()];
                    pos.push(m.exp(&m.base(), &v).coords);
                }
            }
            (SurfaceGeom::Hyperbolic { kappa }, pos, BTreeMap::new())
        }
        SurfaceKind::Cone { total_angle } => {
            if !(total_angle > 0.0) {
                return Err(MetricError::InvalidSpec("cone needs a positive total angle".into()));
            }
            let rmax = 1.0;
            // fixed angular positions on every ring keep radial chains exact
            let na = ((total_angle * rmax) / h).ceil().max(8.0) as usize;
            let nr = (rmax / h).ceil() as usize;
            let mut pos = vec![vec![0.0, 0.0]]; // the tip
            let mut tags = BTreeMap::new();
            tags.insert("tip".to_string(), vec![0usize]);
            for i in 1..=nr {
                let r = rmax * i as f64 / nr as f64;
                for j in 0..na {
                    pos.push(vec![r, total_angle * j as f64 / na as f64]);
                }
            }
            (SurfaceGeom::Cone { total_angle }, pos, tags)
        }
        SurfaceKind::GluedHalfPlanes => {
            let steps = (1.0 / h).ceil() as i64;
            let mut pos = Vec::new();
            let mut boundary = Vec::new();
            // copy 0 includes the shared boundary line y = 0
            for copy in 0..2 {
                for i in 0..=(2 * steps) {
                    let jstart = if copy == 0 { 0 } else { 1 };
                    for j in jstart..=steps {
                        let x = -1.0 + i as f64 / steps as f64;
                        let y = j as f64 / steps as f64;
                        if copy == 0 && j == 0 {
                            boundary.push(pos.len());
                        }
                        pos.push(vec![copy as f64, x, y]);
                    }
                }
            }
            let mut tags = BTreeMap::new();
            tags.insert("boundary".to_string(), boundary);
            (SurfaceGeom::GluedHalfPlanes, pos, tags)
        }
    };

    let n = positions.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = exact_surface_distance(&geom, &positions[i], &positions[j]).unwrap();
            let connect = match &geom {
                // glued copies only talk through the boundary; the exact
                // cross-copy formula would tunnel through the gluing line
                SurfaceGeom::GluedHalfPlanes => {
                    let same = positions[i][0] == positions[j][0]
                        || positions[i][2] == 0.0
                        || positions[j][2] == 0.0;
                    same && d <= rc
                }
                _ => d <= rc,
            };
            if connect && d > 0.0 {
                edges.push((i, j, d));
            }
        }
    }
    let mut space = shortest_metric(n, &edges)?;
    space.tags = tags.clone();
    space.geom = geom;
    space.positions = positions;
    space.mesh = h;

    // Calibrate the budget on seeded probe pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA11B);
    let mut delta: f64 = 0.0;
    for _ in 0..400 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let exact = space.exact_distance(i, j).unwrap();
        let err = space.dist(i, j) - exact;
        delta = delta.max(err);
    }
    space.delta_h = delta.max(1e-9);
    std::mem::swap(&mut space.tags, &mut tags);
    space.tags = tags;
    Ok(space)
}

/// Greedy maximal packing: points pairwise more than eps apart.
pub fn pack_eps(m: &FiniteMetric, eps: f64) -> (usize, Vec<usize>) {
    assert!(eps > 0.0);
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..m.n {
        if chosen.iter().all(|&j| m.get(i, j) > eps) {
            chosen.push(i);
        }
    }
    (chosen.len(), chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        assert!(validate_metric(&[vec![0.0]]).is_ok());
        let t = tripod_metric();
        assert!(t.validate().is_ok());
        let bad = vec![
            vec![0.0, 5.0, 1.0],
            vec![5.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert_eq!(validate_metric(&bad), Err(MetricError::Triangle(0, 2, 1)));
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(validate_metric(&asym), Err(MetricError::Asymmetric(_, _))));
    }

    #[test]
    fn shortest_path_examples() {
        // path of 3 unit edges
        let s = shortest_metric(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(s.dist(0, 3), 3.0);
        assert_eq!(s.geodesic(0, 3), vec![0, 1, 2, 3]);
        // 4-cycle of unit edges
        let s = shortest_metric(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        // disconnected
        assert!(matches!(shortest_metric(3, &[(0, 1, 1.0)]), Err(MetricError::Disconnected(2))));
    }

    #[test]
    fn tie_breaking_is_lexicographic() {
        // two equal-length routes 0-1-3 and 0-2-3: the recovered geodesic
        // must take the smaller middle vertex
        let s = shortest_metric(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(s.geodesic(0, 3), vec![0, 1, 3]);
    }

    #[test]
    fn model_samples_are_metric() {
        for &(kappa, m) in &[(0.0, 3usize), (1.0, 2), (-1.0, 2)] {
            let (fm, pts) = sample_model_space(kappa, m, 20, 7);
            assert_eq!(pts.len(), 20);
            fm.validate().unwrap();
            if kappa == 1.0 {
                assert!(fm.max_distance() <= PI);
            }
        }
        // E^3 samples reproduce Euclidean norms
        let (fm, pts) = sample_model_space(0.0, 3, 10, 3);
        for i in 0..10 {
            for j in 0..10 {
                let e: f64 = pts[i]
                    .coords
                    .iter()
                    .zip(&pts[j].coords)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!((fm.get(i, j) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nets_have_small_budget() {
        let mut prev = f64::INFINITY;
        for &h in &[0.4, 0.25, 0.15] {
            let net = net_of_surface(SurfaceKind::Sphere { kappa: 1.0 }, h).unwrap();
            net.metric.validate().unwrap();
            assert!(net.delta_h < prev + 1e-9, "budget should shrink with h");
            assert!(net.delta_h < 0.5 * h.sqrt(), "h={h}, delta={}", net.delta_h);
            prev = net.delta_h;
        }
    }

    #[test]
    fn cone_full_angle_is_flat() {
        let net = net_of_surface(SurfaceKind::Cone { total_angle: 2.0 * PI }, 0.2).unwrap();
        // distances agree with the planar chord formula (exact evaluator)
        for (i, j) in [(1usize, 5usize), (3, 17), (0, 9)] {
            let e = net.exact_distance(i, j).unwrap();
            assert!(net.dist(i, j) >= e - 1e-12);
            assert!(net.dist(i, j) <= e + net.delta_h + 1e-9);
        }
        assert_eq!(net.tags["tip"], vec![0]);
    }

    #[test]
    fn glued_half_planes_match_plane() {
        let net = net_of_surface(SurfaceKind::GluedHalfPlanes, 0.25).unwrap();
        let mut max_err: f64 = 0.0;
        for i in (0..net.n).step_by(7) {
            for j in (0..net.n).step_by(11) {
                let e = net.exact_distance(i, j).unwrap();
                max_err = max_err.max(net.dist(i, j) - e);
                assert!(net.dist(i, j) >= e - 1e-12);
            }
        }
        assert!(max_err <= net.delta_h + 0.05, "max_err={max_err}, delta={}", net.delta_h);
    }

    #[test]
    fn pack_examples() {
        let two = FiniteMetric::from_fn(2, |_, _| 1.0);
        assert_eq!(pack_eps(&two, 0.5).0, 2);
        let (sphere, _) = sample_model_space(1.0, 2, 100, 5);
        assert_eq!(pack_eps(&sphere, PI).0, 1);
        // packing count is antitone in eps
        let (fm, _) = sample_model_space(0.0, 2, 200, 9);
        let mut last = usize::MAX;
        for &e in &[0.05, 0.1, 0.2, 0.4, 0.8] {
            let (c, _) = pack_eps(&fm, e);
            assert!(c <= last);
            last = c;
        }
    }

    #[test]
    fn plane_packing_dimension_slope() {
        // log pack_eps vs log 1/eps slope ~ 2 on a planar sample
        let (fm, _) = sample_model_space(0.0, 2, 500, 21);
        let es = [0.08, 0.16, 0.32];
        let counts: Vec<f64> = es.iter().map(|&e| pack_eps(&fm, e).0 as f64).collect();
        let slope = (counts[0].ln() - counts[2].ln()) / ((1.0 / es[0]).ln() - (1.0 / es[2]).ln());
        assert!(slope > 1.4 && slope < 2.6, "slope={slope}");
    }
}
