//! Quaternion algebra under the `ij = k` convention, unit quaternions as
//! points of S³, unit imaginary quaternions as points of S², and the
//! adjoint projection `p ↦ p̄Xp`.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::GeomError;

/// Tolerance within which a quaternion is renormalized rather than rejected.
pub const UNIT_REPAIR_TOL: f64 = 1e-9;

pub type Vec3 = [f64; 3];

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn scale3(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// A real quaternion `w + x i + y j + z k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn imaginary(v: Vec3) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn vector(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean inner product on ℍ ≅ ℝ⁴.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.w, s * self.x, s * self.y, s * self.z)
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        (self - other)
            .to_array()
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Hamilton product with `i·j = k`.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Self) -> Self {
        qmul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// A point of S³ ⊂ ℍ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const ONE: Self = Self(Quaternion::ONE);

    /// Accepts `q` if its norm is within [`UNIT_REPAIR_TOL`] of one, renormalizing it.
    pub fn new(q: Quaternion) -> Result<Self, GeomError> {
        let n = q.norm();
        if (n - 1.0).abs() > UNIT_REPAIR_TOL || !n.is_finite() {
            return Err(GeomError::NotUnit { norm: n });
        }
        Ok(Self(q.scale(1.0 / n)))
    }

    /// Normalizes any nonzero quaternion.
    pub fn normalize(q: Quaternion) -> Result<Self, GeomError> {
        let n = q.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(GeomError::NotUnit { norm: n });
        }
        Ok(Self(q.scale(1.0 / n)))
    }

    pub fn quat(self) -> Quaternion {
        self.0
    }

    /// Inverse of a unit quaternion, i.e. its conjugate.
    pub fn inv(self) -> Self {
        Self(self.0.conj())
    }

    pub fn neg(self) -> Self {
        Self(-self.0)
    }

    /// Group product on S³; renormalized so iterated products do not drift.
    pub fn compose(self, other: Self) -> Self {
        let q = self.0 * other.0;
        Self(q.scale(1.0 / q.norm()))
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, rhs: Self) -> Self {
        self.compose(rhs)
    }
}

/// A unit imaginary quaternion, i.e. a point of S² ⊂ Im ℍ.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ImaginaryUnit(Vec3);

impl ImaginaryUnit {
    pub const I: Self = Self([1.0, 0.0, 0.0]);
    pub const J: Self = Self([0.0, 1.0, 0.0]);
    pub const K: Self = Self([0.0, 0.0, 1.0]);

    pub fn new(v: Vec3) -> Result<Self, GeomError> {
        let n = norm3(v);
        if (n - 1.0).abs() > UNIT_REPAIR_TOL || !n.is_finite() {
            return Err(GeomError::NotUnit { norm: n });
        }
        Ok(Self(scale3(1.0 / n, v)))
    }

    pub fn normalize(v: Vec3) -> Result<Self, GeomError> {
        let n = norm3(v);
        if !(n > 1e-300) || !n.is_finite() {
            return Err(GeomError::NotUnit { norm: n });
        }
        Ok(Self(scale3(1.0 / n, v)))
    }

    pub fn vector(self) -> Vec3 {
        self.0
    }

    pub fn quat(self) -> Quaternion {
        Quaternion::imaginary(self.0)
    }

    pub fn dot(self, other: Self) -> f64 {
        dot3(self.0, other.0)
    }

    pub fn neg(self) -> Self {
        Self(scale3(-1.0, self.0))
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        (0..3).fold(0.0_f64, |m, k| m.max((self.0[k] - other.0[k]).abs()))
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: Vec3 = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Ok(u) = Self::normalize(v) {
                return u;
            }
        }
    }
}

/// `p̄ X p`. For unit `p` this is a rotation of Im ℍ, so the result is again a unit
/// imaginary quaternion; the real part vanishes identically and is discarded.
pub fn adjoint(p: UnitQuaternion, x: ImaginaryUnit) -> ImaginaryUnit {
    let r = p.quat().conj() * x.quat() * p.quat();
    let v = r.vector();
    ImaginaryUnit(scale3(1.0 / norm3(v), v))
}

/// `e^{At} = cos t + A sin t`.
pub fn exp_im(a: ImaginaryUnit, t: f64) -> UnitQuaternion {
    let (s, c) = t.sin_cos();
    let v = a.vector();
    UnitQuaternion(Quaternion::new(c, s * v[0], s * v[1], s * v[2]))
}

/// Exponential of an arbitrary imaginary quaternion `v` (not necessarily unit).
pub fn exp_imag(v: Vec3) -> UnitQuaternion {
    let theta = norm3(v);
    if theta < 1e-300 {
        return UnitQuaternion::ONE;
    }
    let (s, c) = theta.sin_cos();
    let k = s / theta;
    let q = Quaternion::new(c, k * v[0], k * v[1], k * v[2]);
    UnitQuaternion(q.scale(1.0 / q.norm()))
}

/// Haar-uniform point of S³ from a normalized 4-D Gaussian.
pub fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Ok(u) = UnitQuaternion::normalize(q) {
            return u;
        }
    }
}

/// Determinant of the 3×3 matrix with columns `x, y, z`.
pub fn triple_det(x: ImaginaryUnit, y: ImaginaryUnit, z: ImaginaryUnit) -> f64 {
    dot3(x.vector(), cross3(y.vector(), z.vector()))
}
