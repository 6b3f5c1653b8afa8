//! Model compact manifolds with exact isometric actions.
//!
//! Points are floating-point coordinate vectors: unit vectors in `R^d` for
//! the sphere `S^{d-1}`, angle vectors in `[0, 2π)^d` for the flat torus
//! `T^d`, and unit quaternions `[w, x, y, z]` for `SO(3)`. Every model carries
//! its invariant probability measure, so "volume" below is always normalized.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{verify_special_orthogonal, RationalMatrix};
use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ManifoldModel {
    /// The unit sphere in `R^d`, of dimension `d - 1`.
    Sphere(usize),
    /// The flat torus `R^d / 2πZ^d`.
    Torus(usize),
    /// `SO(3)` with the bi-invariant metric in which the distance to the
    /// identity is the rotation angle.
    RotationGroup,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldModel::Sphere(d) => write!(f, "sphere:{d}"),
            ManifoldModel::Torus(d) => write!(f, "torus:{d}"),
            ManifoldModel::RotationGroup => write!(f, "so3"),
        }
    }
}

impl FromStr for ManifoldModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "so3" {
            return Ok(ManifoldModel::RotationGroup);
        }
        let bad = || Error::Input(format!("unknown manifold model {s:?} (expected sphere:d, torus:d or so3)"));
        let (kind, d) = s.split_once(':').ok_or_else(bad)?;
        let d: usize = d.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "sphere" if d >= 2 => Ok(ManifoldModel::Sphere(d)),
            "sphere" => Err(Error::Input(format!("sphere:{d} needs d >= 2"))),
            "torus" if d >= 1 => Ok(ManifoldModel::Torus(d)),
            "torus" => Err(Error::Input("torus:0 is not a manifold".into())),
            _ => Err(bad()),
        }
    }
}

#[inline]
pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

#[inline]
fn wrap_angle(x: f64) -> f64 {
    let y = num_traits::Euclid::rem_euclid(&x, &TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Angle between unit vectors, accurate at both ends of `[0, π]`.
#[inline]
pub(crate) fn unit_angle(p: &[f64], q: &[f64]) -> f64 {
    let mut dm = 0.0;
    let mut dp = 0.0;
    for (a, b) in p.iter().zip(q) {
        dm += (a - b) * (a - b);
        dp += (a + b) * (a + b);
    }
    2.0 * libm::atan2(libm::sqrt(dm), libm::sqrt(dp))
}

impl ManifoldModel {
    /// Manifold dimension `m`.
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldModel::Sphere(d) => d - 1,
            ManifoldModel::Torus(d) => d,
            ManifoldModel::RotationGroup => 3,
        }
    }

    /// Length of a point's coordinate vector.
    pub fn coord_len(&self) -> usize {
        match *self {
            ManifoldModel::Sphere(d) | ManifoldModel::Torus(d) => d,
            ManifoldModel::RotationGroup => 4,
        }
    }

    /// Size of the matrices that act on this model.
    pub fn action_dim(&self) -> usize {
        match *self {
            ManifoldModel::Sphere(d) | ManifoldModel::Torus(d) => d,
            ManifoldModel::RotationGroup => 3,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            ManifoldModel::Sphere(_) | ManifoldModel::RotationGroup => PI,
            ManifoldModel::Torus(d) => PI * libm::sqrt(d as f64),
        }
    }

    /// Unnormalized Riemannian volume of the whole manifold.
    pub fn riemannian_volume(&self) -> f64 {
        match *self {
            ManifoldModel::Sphere(d) => {
                let h = d as f64 / 2.0;
                2.0 * libm::pow(PI, h) / libm::tgamma(h)
            }
            ManifoldModel::Torus(d) => libm::pow(TAU, d as f64),
            ManifoldModel::RotationGroup => 8.0 * PI * PI,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.0.len() != self.coord_len() {
            return Err(Error::Input(format!(
                "point has {} coordinates, model {self} expects {}",
                p.0.len(),
                self.coord_len()
            )));
        }
        match self {
            ManifoldModel::Torus(_) => {
                if p.0.iter().any(|&a| !(0.0..TAU).contains(&a)) {
                    return Err(Error::Input("torus angles must lie in [0, 2π)".into()));
                }
            }
            _ => {
                if (norm(&p.0) - 1.0).abs() > 1e-9 {
                    return Err(Error::Input(format!("point is not a unit vector (norm {})", norm(&p.0))));
                }
            }
        }
        Ok(())
    }

    /// Geodesic distance without validation.
    #[inline]
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            ManifoldModel::Sphere(_) => unit_angle(p, q),
            ManifoldModel::Torus(_) => {
                let mut s = 0.0;
                for (a, b) in p.iter().zip(q) {
                    let mut d = (a - b).abs();
                    if d > PI {
                        d = TAU - d;
                    }
                    s += d * d;
                }
                libm::sqrt(s)
            }
            ManifoldModel::RotationGroup => {
                let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
                if dot >= 0.0 {
                    2.0 * unit_angle(p, q)
                } else {
                    let neg: [f64; 4] = [-q[0], -q[1], -q[2], -q[3]];
                    2.0 * unit_angle(p, &neg)
                }
            }
        }
    }

    /// Applies a row-major `action_dim × action_dim` floating-point matrix
    /// without validation.
    pub fn apply_f64(&self, g: &[f64], p: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.coord_len()];
        self.apply_op(&self.isometry_op(g), p, &mut out);
        out
    }

    /// Compact form of an isometry for repeated application: the matrix
    /// itself, or its unit quaternion on `SO(3)`.
    pub fn isometry_op(&self, g: &[f64]) -> Vec<f64> {
        match self {
            ManifoldModel::RotationGroup => matrix_to_quaternion(g).to_vec(),
            _ => g.to_vec(),
        }
    }

    /// Applies an operator from [`ManifoldModel::isometry_op`], writing the
    /// image of `p` into `out`.
    #[inline]
    pub fn apply_op(&self, op: &[f64], p: &[f64], out: &mut [f64]) {
        match *self {
            ManifoldModel::Sphere(d) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..d).map(|j| op[i * d + j] * p[j]).sum();
                }
                let n = norm(out);
                out.iter_mut().for_each(|x| *x /= n);
            }
            ManifoldModel::Torus(d) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = wrap_angle((0..d).map(|j| op[i * d + j] * p[j]).sum());
                }
            }
            ManifoldModel::RotationGroup => {
                let q = quat_mul(op, p);
                let n = norm(&q);
                for (o, x) in out.iter_mut().zip(q) {
                    *o = x / n;
                }
            }
        }
    }

    /// Whether `g` acts on this model by isometries: exact special
    /// orthogonality, and on the torus additionally integer entries (signed
    /// permutations, which preserve the lattice `2πZ^d`).
    pub fn acts_isometrically(&self, g: &RationalMatrix) -> bool {
        if g.dim() != self.action_dim() || !verify_special_orthogonal(g) {
            return false;
        }
        match self {
            ManifoldModel::Torus(_) => g.exponent() == 0,
            _ => true,
        }
    }

    /// Invariant probability measure of a ball of radius `r` (any center).
    pub fn ball_volume(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.diameter() {
            return 1.0;
        }
        match *self {
            ManifoldModel::Sphere(d) => sphere_cap_fraction(d - 1, r),
            ManifoldModel::Torus(d) => torus_ball_fraction(d, r),
            ManifoldModel::RotationGroup => (r - libm::sin(r)) / PI,
        }
    }
}

/// Normalized volume of a geodesic cap of radius `r` on `S^m`.
fn sphere_cap_fraction(m: usize, r: f64) -> f64 {
    match m {
        1 => r / PI,
        2 => (1.0 - libm::cos(r)) / 2.0,
        _ => {
            let f = |x: f64| libm::pow(libm::sin(x), (m - 1) as f64);
            simpson(f, 0.0, r, 4096) / simpson(f, 0.0, PI, 4096)
        }
    }
}

/// Normalized volume of a ball of radius `r` in the flat torus `[-π, π]^d`.
fn torus_ball_fraction(d: usize, r: f64) -> f64 {
    // Volume of {x in [-π, π]^d : |x| <= r}, by recursion on the last coordinate.
    fn clipped(d: usize, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if d == 1 {
            return 2.0 * r.min(PI);
        }
        if r <= PI {
            let h = d as f64 / 2.0;
            return libm::pow(PI, h) / libm::tgamma(h + 1.0) * libm::pow(r, d as f64);
        }
        // x = r sin θ removes the square-root singularity at x = r.
        let lim = libm::asin((PI / r).min(1.0));
        2.0 * simpson(|th| r * libm::cos(th) * clipped(d - 1, r * libm::cos(th)), 0.0, lim, 512)
    }
    clipped(d, r) / libm::pow(TAU, d as f64)
}

pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Unit quaternion `[w, x, y, z]` of a row-major rotation matrix.
pub fn matrix_to_quaternion(m: &[f64]) -> [f64; 4] {
    let (m00, m01, m02) = (m[0], m[1], m[2]);
    let (m10, m11, m12) = (m[3], m[4], m[5]);
    let (m20, m21, m22) = (m[6], m[7], m[8]);
    let tr = m00 + m11 + m22;
    let q = if tr > 0.0 {
        let s = libm::sqrt(tr + 1.0) * 2.0;
        [0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s]
    } else if m00 > m11 && m00 > m22 {
        let s = libm::sqrt(1.0 + m00 - m11 - m22) * 2.0;
        [(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s]
    } else if m11 > m22 {
        let s = libm::sqrt(1.0 + m11 - m00 - m22) * 2.0;
        [(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s]
    } else {
        let s = libm::sqrt(1.0 + m22 - m00 - m11) * 2.0;
        [(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s]
    };
    let n = norm(&q);
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

pub fn quat_mul(a: &[f64], b: &[f64]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Geodesic distance, validating both points against the model.
pub fn geo_dist(model: &ManifoldModel, p: &Point, q: &Point) -> Result<f64> {
    model.check_point(p)?;
    model.check_point(q)?;
    Ok(model.dist(&p.0, &q.0))
}

/// Image of `p` under the isometry `g`.
pub fn apply(g: &RationalMatrix, p: &Point, model: &ManifoldModel) -> Result<Point> {
    model.check_point(p)?;
    if g.dim() != model.action_dim() {
        return Err(Error::Input(format!(
            "matrix of size {} cannot act on {model} (needs {})",
            g.dim(),
            model.action_dim()
        )));
    }
    if !model.acts_isometrically(g) {
        return Err(Error::Input(format!("matrix is not an isometry of {model}")));
    }
    Ok(Point(model.apply_f64(&g.to_f64(), &p.0)))
}

/// Deterministic stream of draws from the invariant probability measure.
pub struct HaarSampler {
    model: ManifoldModel,
    rng: ChaCha8Rng,
}

impl HaarSampler {
    pub fn new(model: ManifoldModel, seed: u64) -> Self {
        HaarSampler {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> Point {
        match self.model {
            ManifoldModel::Torus(d) => Point((0..d).map(|_| wrap_angle(self.rng.random::<f64>() * TAU)).collect()),
            _ => loop {
                let v: Vec<f64> = (0..self.model.coord_len())
                    .map(|_| self.rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let n = norm(&v);
                if n > 1e-12 {
                    break Point(v.into_iter().map(|x| x / n).collect());
                }
            },
        }
    }
}

pub fn haar_sample(model: &ManifoldModel, n: usize, seed: u64) -> Vec<Point> {
    let mut s = HaarSampler::new(*model, seed);
    (0..n).map(|_| s.sample()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeBounds {
    pub radius: f64,
    /// `v_M(r)`: smallest normalized volume of an `r`-ball.
    pub v_lower: f64,
    /// `V_M(r)`: largest normalized volume of an `r`-ball.
    pub v_upper: f64,
    pub kappa: f64,
    /// `C(κ)` with `V_M(κr) <= C(κ)·v_M(r)`.
    pub comparison_constant: f64,
    /// Set when `r` is at least the diameter.
    pub degenerate: bool,
}

/// Ball-volume bounds for the (homogeneous) model manifolds, where
/// `v_M = V_M` and `C(κ) = V_M(κr) / v_M(r)`.
pub fn ball_volume_bounds(model: &ManifoldModel, r: f64, kappa: f64) -> Result<VolumeBounds> {
    if !(r > 0.0) {
        return Err(Error::Input(format!("radius must be positive, got {r}")));
    }
    if !(kappa >= 1.0) {
        return Err(Error::Input(format!("kappa must be >= 1, got {kappa}")));
    }
    let degenerate = r >= model.diameter();
    let v = model.ball_volume(r);
    let big = model.ball_volume(kappa * r);
    Ok(VolumeBounds {
        radius: r,
        v_lower: v,
        v_upper: v,
        kappa,
        comparison_constant: big / v,
        degenerate,
    })
}

/// Human-readable name used in reports.
pub fn model_name(model: &ManifoldModel) -> String {
    alloc::string::ToString::to_string(model)
}
