//! The multi-moment map `ν(p, q) = ((p̄Ap)·(q̄Bq), (p̄Ap)·C, (q̄Bq)·C)`.
//!
//! Coordinates are taken against `(√3/4)(K₁∧K₂, K₃∧K₁, K₂∧K₃)` in Λ²𝔱, and the
//! integration constant is zero. Because ω is antisymmetric, the ordering
//! `K₁∧K₃` flips the sign of the second coordinate; [`omega_pairing_ascending`]
//! evaluates that ordering.

use nalgebra::SMatrix;

use crate::differential::{fd_directional, FdParams};
use crate::error::GeomError;
use crate::frame::{omega_eval, ConfigPoint, TangentVector};
use crate::quaternion::{adjoint, ImaginaryUnit};
use crate::torus::{killing_fields, TorusSpec};

/// Singular values below `RANK_REL_TOL · σ_max` count as zero.
pub const RANK_REL_TOL: f64 = 1e-7;
/// Singular values below this absolute floor count as zero. FD Jacobians carry
/// noise of order `h²` and `ε/h`, about 1e-10 at the default step.
pub const RANK_ABS_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentValue {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MomentValue {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.x, s * self.y, s * self.z)
    }

    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
            self.z + t * (other.z - self.z),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// `ν̄(x, y) = (x·y, x·C, y·C)`.
pub fn nu_bar(x: ImaginaryUnit, y: ImaginaryUnit, c: ImaginaryUnit) -> MomentValue {
    MomentValue::new(x.dot(y), x.dot(c), y.dot(c))
}

/// `(π_A(p), π_B(q))`.
pub fn project_pair(spec: &TorusSpec, cfg: &ConfigPoint) -> (ImaginaryUnit, ImaginaryUnit) {
    (adjoint(cfg.p, spec.a), adjoint(cfg.q, spec.b))
}

pub fn nu(spec: &TorusSpec, cfg: &ConfigPoint) -> MomentValue {
    let (x, y) = project_pair(spec, cfg);
    nu_bar(x, y, spec.c)
}

/// Index pairs of the Λ²𝔱 basis the coordinates of ν refer to.
pub const PAIRING_BASIS: [(usize, usize); 3] = [(0, 1), (2, 0), (1, 2)];
/// The pairs `n < m` in lexicographic order.
pub const ASCENDING_BASIS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn pairing_in(basis: [(usize, usize); 3], spec: &TorusSpec, cfg: &ConfigPoint) -> MomentValue {
    let k = killing_fields(spec, cfg).fields;
    let s = 3f64.sqrt() / 4.0;
    let w = |(a, b): (usize, usize)| s * omega_eval(&k[a], &k[b]).expect("shared anchor");
    MomentValue::new(w(basis[0]), w(basis[1]), w(basis[2]))
}

/// `(√3/4)(ω(K₁,K₂), ω(K₃,K₁), ω(K₂,K₃))` from the frame forms of the Killing fields.
pub fn omega_pairing(spec: &TorusSpec, cfg: &ConfigPoint) -> MomentValue {
    pairing_in(PAIRING_BASIS, spec, cfg)
}

/// `(√3/4)(ω(K₁,K₂), ω(K₁,K₃), ω(K₂,K₃))`, equal to `(X, −Y, Z)`.
pub fn omega_pairing_ascending(spec: &TorusSpec, cfg: &ConfigPoint) -> MomentValue {
    pairing_in(ASCENDING_BASIS, spec, cfg)
}

/// A 3×6 Jacobian with respect to the frame directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    pub rows: [[f64; 6]; 3],
}

impl Jacobian {
    pub fn singular_values(&self) -> [f64; 3] {
        let m = SMatrix::<f64, 3, 6>::from_fn(|r, c| self.rows[r][c]);
        let sv = m.singular_values();
        let mut s = [sv[0], sv[1], sv[2]];
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.singular_values())
    }

    pub fn apply(&self, v: &[f64; 6]) -> [f64; 3] {
        std::array::from_fn(|r| (0..6).map(|c| self.rows[r][c] * v[c]).sum())
    }
}

/// Rank from descending singular values with the thresholds above.
pub fn numerical_rank(sv: &[f64]) -> usize {
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let cut = (RANK_REL_TOL * top).max(RANK_ABS_FLOOR);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Finite-difference Jacobian of any moment-valued map along the six frame directions.
pub fn fd_jacobian(
    f: impl Fn(&ConfigPoint) -> MomentValue,
    cfg: &ConfigPoint,
    fd: &FdParams,
) -> Result<Jacobian, GeomError> {
    let mut rows = [[0.0; 6]; 3];
    for n in 0..6 {
        let v = TangentVector::basis(*cfg, n + 1);
        for (r, row) in rows.iter_mut().enumerate() {
            row[n] = fd_directional(|x| f(x).to_array()[r], cfg, &v, fd)?;
        }
    }
    Ok(Jacobian { rows })
}

pub fn nu_jacobian(spec: &TorusSpec, cfg: &ConfigPoint, fd: &FdParams) -> Result<Jacobian, GeomError> {
    fd_jacobian(|x| nu(spec, x), cfg, fd)
}

/// Exact `dν` from `dω`: row `(n, m)` of [`PAIRING_BASIS`] applied to `v` is
/// `(√3/4)·dω(Kₙ, Kₘ, v)`.
pub fn nu_differential_from_d_omega(spec: &TorusSpec, cfg: &ConfigPoint) -> Jacobian {
    let k = killing_fields(spec, cfg).fields.map(|k| k.coeffs);
    let s = 3f64.sqrt() / 4.0;
    let row = |(a, b): (usize, usize)| -> [f64; 6] {
        std::array::from_fn(|n| {
            let mut e = [0.0; 6];
            e[n] = 1.0;
            s * crate::differential::d_omega_coeffs(&k[a], &k[b], &e)
        })
    };
    Jacobian {
        rows: PAIRING_BASIS.map(row),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::hopf_lift;
    use crate::quaternion::UnitQuaternion;
    use crate::torus::{torus_act, TorusElement};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nu_examples() {
        let spec = TorusSpec::lagrangian_example();
        let o = ConfigPoint::IDENTITY;
        assert!(nu(&spec, &o).max_abs_diff(&MomentValue::new(1.0, 0.0, 0.0)) < 1e-15);
        let q = hopf_lift(ImaginaryUnit::I, ImaginaryUnit::K);
        let v = nu(&spec, &ConfigPoint::new(UnitQuaternion::ONE, q));
        assert!(v.max_abs_diff(&MomentValue::new(0.0, 0.0, 0.0)) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = TorusSpec::sample(&mut rng);
        let cfg = ConfigPoint::new(hopf_lift(spec.a, spec.c), hopf_lift(spec.b, spec.c));
        assert!(nu(&spec, &cfg).max_abs_diff(&MomentValue::new(1.0, 1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn nu_bar_examples() {
        let c = ImaginaryUnit::normalize([0.2, -0.4, 0.9]).unwrap();
        assert!(nu_bar(c, c, c).max_abs_diff(&MomentValue::new(1.0, 1.0, 1.0)) < 1e-15);
        assert!(nu_bar(c, c.neg(), c).max_abs_diff(&MomentValue::new(-1.0, 1.0, -1.0)) < 1e-15);
        let v = nu_bar(ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::K);
        assert_eq!(v, MomentValue::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn pairing_matches_closed_form() {
        let spec = TorusSpec::lagrangian_example();
        let o = ConfigPoint::IDENTITY;
        assert!(omega_pairing(&spec, &o).max_abs_diff(&MomentValue::new(1.0, 0.0, 0.0)) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let spec = TorusSpec::sample(&mut rng);
            let cfg = ConfigPoint::sample(&mut rng);
            let v = nu(&spec, &cfg);
            assert!(omega_pairing(&spec, &cfg).max_abs_diff(&v) < 1e-12);
            let flipped = MomentValue::new(v.x, -v.y, v.z);
            assert!(omega_pairing_ascending(&spec, &cfg).max_abs_diff(&flipped) < 1e-12);
            for c in v.to_array() {
                assert!(c.abs() <= 1.0 + 1e-15);
            }
            let el = TorusElement::new(rng.gen(), rng.gen(), rng.gen());
            let moved = torus_act(&spec, &el, &cfg);
            assert!(omega_pairing(&spec, &moved).max_abs_diff(&v) < 1e-12);
            assert!(nu(&spec, &moved).max_abs_diff(&v) < 1e-12);
        }
    }

    #[test]
    fn jacobian_rank_and_d_omega_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fd = FdParams::default();
        for _ in 0..50 {
            let spec = TorusSpec::sample(&mut rng);
            let cfg = ConfigPoint::sample(&mut rng);
            let j = nu_jacobian(&spec, &cfg, &fd).unwrap();
            let exact = nu_differential_from_d_omega(&spec, &cfg);
            for r in 0..3 {
                for c in 0..6 {
                    assert!((j.rows[r][c] - exact.rows[r][c]).abs() < 1e-6);
                }
            }
        }
        let spec = TorusSpec::sample(&mut rng);
        let vertex = ConfigPoint::new(hopf_lift(spec.a, spec.c), hopf_lift(spec.b, spec.c));
        assert_eq!(nu_jacobian(&spec, &vertex, &fd).unwrap().rank(), 0);
    }

    #[test]
    fn rank_thresholds() {
        assert_eq!(numerical_rank(&[1.0, 0.5, 1e-9]), 2);
        assert_eq!(numerical_rank(&[1e-9, 1e-10, 0.0]), 0);
        assert_eq!(numerical_rank(&[1e3, 1e-3, 1e-5]), 2);
    }
}
