//! Numerical kernel for the model space of constant curvature `kappa`:
//! generalized trigonometric functions, cosine laws, model angles and sides,
//! explicit model points in ambient coordinates, and the hemisphere test.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Kernel-wide length tolerance.
pub const LENGTH_TOL: f64 = 1e-10;
/// Kernel-wide angle tolerance.
pub const ANGLE_TOL: f64 = 1e-9;
/// Triangles whose perimeter comes within this band of `2*varpi` are treated
/// as undefined; comparison definitions treat undefined angles as vacuous, so
/// being conservative here never produces a spurious failure.
pub const DEFINED_BAND: f64 = 1e-8;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("side out of domain: {0}")]
    OutOfDomain(String),
    #[error("model triangle with sides ({0}, {1}, {2}) is undefined at kappa={3}")]
    UndefinedTriangle(f64, f64, f64, f64),
    #[error("geodesic endpoint at or beyond the uniqueness radius (dist={0}, varpi={1})")]
    AntipodalGuard(f64, f64),
    #[error("closed curve longer than 2*varpi: length={0}")]
    CurveTooLong(f64),
    #[error("non-finite input")]
    NonFinite,
}

/// Diameter of the model space: `pi/sqrt(kappa)` for positive curvature,
/// infinite otherwise.
pub fn varpi(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

/// A curvature value together with its derived diameter bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub kappa: f64,
}

impl Curvature {
    pub fn new(kappa: f64) -> Self {
        assert!(kappa.is_finite(), "curvature must be finite");
        Curvature { kappa }
    }
    pub fn varpi(&self) -> f64 {
        varpi(self.kappa)
    }
}

/// Generalized sine: solution of `y'' + kappa*y = 0`, `y(0)=0`, `y'(0)=1`.
pub fn sn(kappa: f64, x: f64) -> f64 {
    debug_assert!(!x.is_nan() && !kappa.is_nan());
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (x * s).sin() / s
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        (x * s).sinh() / s
    } else {
        x
    }
}

/// Generalized cosine: solution of `y'' + kappa*y = 0`, `y(0)=1`, `y'(0)=0`.
pub fn cs(kappa: f64, x: f64) -> f64 {
    debug_assert!(!x.is_nan() && !kappa.is_nan());
    if kappa > 0.0 {
        (x * kappa.sqrt()).cos()
    } else if kappa < 0.0 {
        (x * (-kappa).sqrt()).cosh()
    } else {
        1.0
    }
}

/// Modified distance: solution of `y'' + kappa*y = 1`, `y(0)=y'(0)=0`,
/// continued by the constant `2/kappa` past `varpi` when `kappa > 0`.
pub fn md(kappa: f64, x: f64) -> f64 {
    debug_assert!(!x.is_nan() && !kappa.is_nan());
    debug_assert!(x >= 0.0, "md takes nonnegative arguments");
    if kappa > 0.0 {
        if x > varpi(kappa) {
            2.0 / kappa
        } else {
            (1.0 - cs(kappa, x)) / kappa
        }
    } else if kappa < 0.0 {
        (1.0 - cs(kappa, x)) / kappa
    } else {
        x * x / 2.0
    }
}

/// Generalized tangent `sn/cs`.
pub fn tg(kappa: f64, x: f64) -> f64 {
    sn(kappa, x) / cs(kappa, x)
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// Model angle: the angle opposite side `a` in the model triangle with sides
/// `a, b, c`, i.e. the angle between the sides of lengths `b` and `c`.
/// `None` when the triangle is undefined (triangle inequality fails, or for
/// positive curvature the perimeter reaches `2*varpi` or a hinge side reaches
/// `varpi`).
pub fn model_angle(kappa: f64, a: f64, b: f64, c: f64) -> Option<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return None;
    }
    if a < 0.0 || b <= 0.0 || c <= 0.0 {
        return None;
    }
    if a > b + c || b > c + a || c > a + b {
        return None;
    }
    if kappa > 0.0 {
        let w = varpi(kappa);
        if b >= w || c >= w {
            return None;
        }
        if a + b + c >= 2.0 * w - DEFINED_BAND {
            return None;
        }
    }
    let cos_phi = if kappa == 0.0 {
        (b * b + c * c - a * a) / (2.0 * b * c)
    } else {
        (cs(kappa, a) - cs(kappa, b) * cs(kappa, c)) / (kappa * sn(kappa, b) * sn(kappa, c))
    };
    Some(clamp(cos_phi, -1.0, 1.0).acos())
}

/// Model side: the side opposite the angle `phi` in the hinge with sides
/// `b, c` and angle `phi` between them.  Negative `b` or `c` are interpreted
/// by the sign extension `side{phi; b, -c} = side{pi - phi; b, c}`.  At
/// `phi = pi` with `b + c >= varpi` (positive curvature) the value is the
/// continuous extension `2*varpi - (b + c)`.
pub fn model_side(kappa: f64, phi: f64, b: f64, c: f64) -> Result<f64, ModelError> {
    if !(phi.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    if c < 0.0 {
        return model_side(kappa, PI - phi, b, -c);
    }
    if b < 0.0 {
        return model_side(kappa, PI - phi, -b, c);
    }
    if phi < -ANGLE_TOL || phi > PI + ANGLE_TOL {
        return Err(ModelError::OutOfDomain(format!("angle {phi} outside [0, pi]")));
    }
    let phi = clamp(phi, 0.0, PI);
    if kappa > 0.0 {
        let w = varpi(kappa);
        if b >= w || c >= w {
            return Err(ModelError::OutOfDomain(format!(
                "hinge side not below varpi: b={b}, c={c}, varpi={w}"
            )));
        }
    }
    let a = if kappa == 0.0 {
        (b * b + c * c - 2.0 * b * c * phi.cos()).max(0.0).sqrt()
    } else if kappa > 0.0 {
        let v = cs(kappa, b) * cs(kappa, c) + kappa * sn(kappa, b) * sn(kappa, c) * phi.cos();
        // acos of the clamped value realizes the continuous extension at
        // phi = pi, b + c >= varpi, where it returns 2*varpi - (b + c).
        clamp(v, -1.0, 1.0).acos() / kappa.sqrt()
    } else {
        let v = cs(kappa, b) * cs(kappa, c) + kappa * sn(kappa, b) * sn(kappa, c) * phi.cos();
        let s = (-kappa).sqrt();
        v.max(1.0).acosh() / s
    };
    Ok(a)
}

/// Extended model angle for `kappa > 0`: the supremum of model angles over
/// curvatures `K <= kappa`.  Rules: the model angle when it is defined; zero
/// in the degenerate cases `a + b = c` or `a + c = b`; `pi` otherwise.
pub fn extended_model_angle(kappa: f64, a: f64, b: f64, c: f64) -> f64 {
    assert!(kappa > 0.0, "extended model angle is for positive curvature");
    if let Some(phi) = model_angle(kappa, a, b, c) {
        return phi;
    }
    let scale = 1.0_f64.max(a.abs()).max(b.abs()).max(c.abs());
    if (a + b - c).abs() <= 1e-9 * scale || (a + c - b).abs() <= 1e-9 * scale {
        return 0.0;
    }
    PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64, tol: f64) -> Sign {
        if x > tol {
            Sign::Positive
        } else if x < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("sign test self-check failed: expr1={expr1}, expr2={expr2}")]
pub struct SignConsistencyFault {
    pub expr1: f64,
    pub expr2: f64,
}

/// Common sign of the two expressions
/// `angle{a; b, x} + angle{a'; b', x} - pi` and
/// `angle{a'; b + b', a} - angle{x; a, b}`,
/// which agree whenever both are defined.  `Ok(None)` when some needed model
/// angle is undefined; an error when the two computed signs disagree beyond
/// tolerance (an internal self-test).
pub fn alexandrov_sign(
    kappa: f64,
    a: f64,
    b: f64,
    a2: f64,
    b2: f64,
    x: f64,
) -> Result<Option<Sign>, SignConsistencyFault> {
    const TOL: f64 = 1e-8;
    let (t1, t2, t3, t4) = match (
        model_angle(kappa, a, b, x),
        model_angle(kappa, a2, b2, x),
        model_angle(kappa, a2, b + b2, a),
        model_angle(kappa, x, a, b),
    ) {
        (Some(t1), Some(t2), Some(t3), Some(t4)) => (t1, t2, t3, t4),
        _ => return Ok(None),
    };
    let e1 = t1 + t2 - PI;
    let e2 = t3 - t4;
    let s1 = Sign::of(e1, TOL);
    let s2 = Sign::of(e2, TOL);
    if (s1 == Sign::Positive && s2 == Sign::Negative)
        || (s1 == Sign::Negative && s2 == Sign::Positive)
    {
        return Err(SignConsistencyFault { expr1: e1, expr2: e2 });
    }
    // When one expression sits in the zero band, report the more decisive one.
    Ok(Some(if s1 == Sign::Zero { s2 } else { s1 }))
}

/// Sides of a triangle to be laid out in the model space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSides {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TriangleSides {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        TriangleSides { a, b, c }
    }
    /// Triangle inequality, and the perimeter bound for positive curvature.
    pub fn is_defined(&self, kappa: f64) -> bool {
        let TriangleSides { a, b, c } = *self;
        if a < 0.0 || b < 0.0 || c < 0.0 {
            return false;
        }
        if a > b + c || b > c + a || c > a + b {
            return false;
        }
        if kappa > 0.0 && a + b + c >= 2.0 * varpi(kappa) - DEFINED_BAND {
            return false;
        }
        true
    }
}

/// A point of the `dim`-dimensional model space of curvature `kappa`, stored
/// in ambient coordinates: a plain vector for zero curvature, a point of the
/// sphere of radius `1/sqrt(kappa)` in one more dimension for positive
/// curvature, and a future vector on the hyperboloid (Minkowski form with
/// signature `(-,+,..,+)`, first coordinate timelike) for negative curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub coords: Vec<f64>,
}

impl ModelPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        ModelPoint { coords }
    }
}

/// The model space `Lob^dim kappa` with exact ambient-coordinate operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub kappa: f64,
    pub dim: usize,
}

impl Model {
    pub fn new(kappa: f64, dim: usize) -> Self {
        assert!(kappa.is_finite());
        assert!(dim >= 1);
        Model { kappa, dim }
    }

    pub fn varpi(&self) -> f64 {
        varpi(self.kappa)
    }

    pub fn ambient_dim(&self) -> usize {
        if self.kappa == 0.0 {
            self.dim
        } else {
            self.dim + 1
        }
    }

    /// Curvature scale radius `1/sqrt(|kappa|)`.
    fn radius(&self) -> f64 {
        1.0 / self.kappa.abs().sqrt()
    }

    /// Base point: the origin, or the "pole" `(R, 0, ..., 0)`.
    pub fn base(&self) -> ModelPoint {
        let mut c = vec![0.0; self.ambient_dim()];
        if self.kappa != 0.0 {
            c[0] = self.radius();
        }
        ModelPoint::new(c)
    }

    fn dot(u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Ambient bilinear form: Euclidean, or Minkowski for negative curvature.
    fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = Self::dot(u, v);
        if self.kappa < 0.0 {
            d - 2.0 * u[0] * v[0]
        } else {
            d
        }
    }

    /// Public accessor for the ambient form (used for tangent-space frames).
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.form(u, v)
    }

    /// Restore the quadratic-form constraint after ambient arithmetic.
    pub fn renormalize(&self, p: &mut ModelPoint) {
        if self.kappa == 0.0 {
            return;
        }
        let r = self.radius();
        if self.kappa > 0.0 {
            let n = Self::dot(&p.coords, &p.coords).sqrt();
            if n > 0.0 {
                for x in &mut p.coords {
                    *x *= r / n;
                }
            }
        } else {
            let q = p.coords[0] * p.coords[0] - Self::dot(&p.coords[1..], &p.coords[1..]);
            if q > 0.0 {
                let f = r / q.sqrt();
                for x in &mut p.coords {
                    *x *= f;
                }
                if p.coords[0] < 0.0 {
                    for x in &mut p.coords {
                        *x = -*x;
                    }
                }
            }
        }
    }

    /// Exact distance between two model points.
    pub fn distance(&self, p: &ModelPoint, q: &ModelPoint) -> f64 {
        let diff: Vec<f64> = p.coords.iter().zip(&q.coords).map(|(a, b)| a - b).collect();
        if self.kappa == 0.0 {
            Self::dot(&diff, &diff).sqrt()
        } else if self.kappa > 0.0 {
            // Chordal formula |p - q| = 2 R sin(theta/2): accurate at both
            // ends of [0, pi].
            let r = self.radius();
            let chord = Self::dot(&diff, &diff).sqrt();
            2.0 * r * clamp(chord / (2.0 * r), 0.0, 1.0).asin()
        } else {
            // Minkowski chordal formula: <p-q, p-q> = 2 R^2 (cosh(d/R) - 1).
            let r = self.radius();
            let q2 = self.form(&diff, &diff).max(0.0);
            2.0 * r * (q2.sqrt() / (2.0 * r)).asinh()
        }
    }

    /// Tangent vector at `p` pointing toward `q`, with norm `dist(p, q)`.
    pub fn log(&self, p: &ModelPoint, q: &ModelPoint) -> Vec<f64> {
        let d = self.distance(p, q);
        let n = p.coords.len();
        if self.kappa == 0.0 {
            return (0..n).map(|i| q.coords[i] - p.coords[i]).collect();
        }
        let r = self.radius();
        // Remove the p-component of q with respect to the ambient form.
        let coef = if self.kappa > 0.0 {
            Self::dot(&q.coords, &p.coords) / (r * r)
        } else {
            -self.form(&q.coords, &p.coords) / (r * r)
        };
        let u: Vec<f64> = (0..n).map(|i| q.coords[i] - coef * p.coords[i]).collect();
        let un = self.form(&u, &u).max(0.0).sqrt();
        if un < 1e-300 {
            return vec![0.0; n];
        }
        u.iter().map(|x| x * d / un).collect()
    }

    /// Geodesic starting at `p` with initial (ambient-tangent) vector `v`,
    /// evaluated at arc length `|v|`.
    pub fn exp(&self, p: &ModelPoint, v: &[f64]) -> ModelPoint {
        let n = p.coords.len();
        if self.kappa == 0.0 {
            return ModelPoint::new((0..n).map(|i| p.coords[i] + v[i]).collect());
        }
        let r = self.radius();
        let len = self.form(v, v).max(0.0).sqrt();
        if len < 1e-300 {
            return p.clone();
        }
        let t = len / r;
        let (cp, cv) = if self.kappa > 0.0 {
            (t.cos(), r * t.sin() / len)
        } else {
            (t.cosh(), r * t.sinh() / len)
        };
        let mut out = ModelPoint::new((0..n).map(|i| cp * p.coords[i] + cv * v[i]).collect());
        self.renormalize(&mut out);
        out
    }

    /// Arc-length-proportional interpolation along the unique geodesic.
    pub fn geodesic_point(&self, p: &ModelPoint, q: &ModelPoint, t: f64) -> Result<ModelPoint, ModelError> {
        let d = self.distance(p, q);
        if self.kappa > 0.0 && d >= self.varpi() * (1.0 - 1e-12) {
            return Err(ModelError::AntipodalGuard(d, self.varpi()));
        }
        if d < 1e-300 {
            return Ok(p.clone());
        }
        let n = p.coords.len();
        if self.kappa == 0.0 {
            return Ok(ModelPoint::new(
                (0..n).map(|i| (1.0 - t) * p.coords[i] + t * q.coords[i]).collect(),
            ));
        }
        let r = self.radius();
        let th = d / r;
        let (wp, wq) = if self.kappa > 0.0 {
            let s = th.sin();
            ((((1.0 - t) * th).sin()) / s, ((t * th).sin()) / s)
        } else {
            let s = th.sinh();
            ((((1.0 - t) * th).sinh()) / s, ((t * th).sinh()) / s)
        };
        let mut out = ModelPoint::new((0..n).map(|i| wp * p.coords[i] + wq * q.coords[i]).collect());
        self.renormalize(&mut out);
        Ok(out)
    }
}

/// Realize the triangle with the given sides in `Lob^2 kappa`: the first
/// vertex at the base point, the second at distance `c` along the first
/// tangent axis, the third at distance `b` making the model angle with it.
pub fn lay_triangle(kappa: f64, sides: TriangleSides) -> Result<Vec<ModelPoint>, ModelError> {
    if !sides.is_defined(kappa) {
        return Err(ModelError::UndefinedTriangle(sides.a, sides.b, sides.c, kappa));
    }
    let m = Model::new(kappa, 2);
    let p0 = m.base();
    let tangent = |phi: f64, len: f64| -> Vec<f64> {
        let (e1, e2) = (phi.cos() * len, phi.sin() * len);
        if kappa == 0.0 {
            vec![e1, e2]
        } else {
            vec![0.0, e1, e2]
        }
    };
    let p1 = m.exp(&p0, &tangent(0.0, sides.c));
    let phi = if sides.b == 0.0 || sides.c == 0.0 {
        0.0
    } else {
        model_angle(kappa, sides.a, sides.b, sides.c)
            .ok_or(ModelError::UndefinedTriangle(sides.a, sides.b, sides.c, kappa))?
    };
    let p2 = m.exp(&p0, &tangent(phi, sides.b));
    Ok(vec![p0, p1, p2])
}

/// Outcome of the hemisphere test for a closed spherical polyline.
#[derive(Debug, Clone)]
pub struct HemisphereOutcome {
    /// Candidate hemisphere center (a model point on the sphere).
    pub center: ModelPoint,
    /// Minimum of `cos(dist(center, .)/R)` over sampled curve points:
    /// positive means the open hemisphere contains the curve.
    pub margin: f64,
    /// A sampled curve point on or beyond the boundary circle when the open
    /// containment fails.
    pub witness: Option<ModelPoint>,
}

impl HemisphereOutcome {
    pub fn open(&self) -> bool {
        self.margin > 0.0
    }
}

/// For a closed polyline on the model sphere of curvature `kappa > 0` with
/// length below `2*varpi`, produce a center whose open hemisphere contains
/// it: walk to the half-length point and take the midpoint of the connecting
/// geodesic.  Curves of length exactly `2*varpi` (great circles) only get
/// closed-hemisphere containment.
pub fn hemisphere_check(kappa: f64, polyline: &[ModelPoint]) -> Result<HemisphereOutcome, ModelError> {
    assert!(kappa > 0.0, "hemisphere test needs positive curvature");
    let m = Model::new(kappa, 2);
    let w = varpi(kappa);
    let mut verts: Vec<ModelPoint> = polyline.to_vec();
    if verts.len() >= 2 && m.distance(&verts[0], verts.last().unwrap()) < 1e-12 {
        verts.pop();
    }
    assert!(verts.len() >= 2, "need at least two distinct vertices");
    let nv = verts.len();
    let edge = |i: usize| -> (&ModelPoint, &ModelPoint) { (&verts[i], &verts[(i + 1) % nv]) };
    let mut elen = Vec::with_capacity(nv);
    for i in 0..nv {
        let (u, v) = edge(i);
        elen.push(m.distance(u, v));
    }
    let total: f64 = elen.iter().sum();
    if total > 2.0 * w + 1e-12 {
        return Err(ModelError::CurveTooLong(total));
    }
    // Point q at arc length total/2 from vertex 0 along the curve.
    let half = total / 2.0;
    let mut acc = 0.0;
    let mut q = verts[0].clone();
    for i in 0..nv {
        if acc + elen[i] >= half {
            let t = if elen[i] > 0.0 { (half - acc) / elen[i] } else { 0.0 };
            let (u, v) = edge(i);
            q = m.geodesic_point(u, v, t)?;
            break;
        }
        acc += elen[i];
    }
    let p = &verts[0];
    let dpq = m.distance(p, &q);
    let center = if dpq >= w * (1.0 - 1e-9) {
        // Antipodal split points (a great circle): take a pole of the plane
        // spanned by p and a quarter-length point.
        let mut acc = 0.0;
        let quarter = total / 4.0;
        let mut r = verts[1].clone();
        for i in 0..nv {
            if acc + elen[i] >= quarter {
                let t = if elen[i] > 0.0 { (quarter - acc) / elen[i] } else { 0.0 };
                let (u, v) = edge(i);
                r = m.geodesic_point(u, v, t)?;
                break;
            }
            acc += elen[i];
        }
        let (a, b) = (&p.coords, &r.coords);
        let mut c = ModelPoint::new(vec![
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]);
        m.renormalize(&mut c);
        c
    } else {
        m.geodesic_point(p, &q, 0.5)?
    };
    // Audit vertices and sampled edge points.
    let r2 = 1.0 / kappa; // R^2
    let mut margin = f64::INFINITY;
    let mut witness = None;
    const EDGE_SAMPLES: usize = 16;
    for i in 0..nv {
        let (u, v) = edge(i);
        for k in 0..=EDGE_SAMPLES {
            let t = k as f64 / EDGE_SAMPLES as f64;
            let pt = m.geodesic_point(u, v, t)?;
            let c = Model::dot(&center.coords, &pt.coords) / r2;
            if c < margin {
                margin = c;
                if c <= 1e-12 {
                    witness = Some(pt);
                }
            }
        }
    }
    Ok(HemisphereOutcome { center, margin, witness })
}
