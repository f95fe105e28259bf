//! The global frame `E₁, E₂, E₃, F₁, F₂, F₃` on S³×S³ together with the
//! almost complex structure, the metrics and the 2-form ω, all expressed as
//! constant matrices in frame coordinates.
//!
//! Frame coordinates are ordered `(E₁, E₂, E₃, F₁, F₂, F₃)`. The frame fields
//! are left translates of the imaginary units `(i, j, −k)` on each factor.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::GeomError;
use crate::quaternion::{sample_unit, Quaternion, UnitQuaternion, Vec3};

/// Ambient tangency tolerance for [`ambient_to_frame`].
pub const TANGENCY_TOL: f64 = 1e-9;

pub type Coeffs = [f64; 6];
pub type Matrix6 = [[f64; 6]; 6];

/// Imaginary quaternions that generate the frame on either factor.
pub const FRAME_UNITS: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigPoint {
    pub p: UnitQuaternion,
    pub q: UnitQuaternion,
}

impl ConfigPoint {
    pub const IDENTITY: Self = Self {
        p: UnitQuaternion::ONE,
        q: UnitQuaternion::ONE,
    };

    pub fn new(p: UnitQuaternion, q: UnitQuaternion) -> Self {
        Self { p, q }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(sample_unit(rng), sample_unit(rng))
    }

    pub fn to_array(&self) -> [f64; 8] {
        AmbientVector::new(self.p.quat(), self.q.quat()).to_array()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .quat()
            .max_abs_diff(other.p.quat())
            .max(self.q.quat().max_abs_diff(other.q.quat()))
    }
}

/// A vector of ℍ² = ℍ ⊕ ℍ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmbientVector {
    pub p: Quaternion,
    pub q: Quaternion,
}

impl AmbientVector {
    pub const ZERO: Self = Self {
        p: Quaternion::ZERO,
        q: Quaternion::ZERO,
    };

    pub fn new(p: Quaternion, q: Quaternion) -> Self {
        Self { p, q }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.p.dot(other.p) + self.q.dot(other.q)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.p + other.p, self.q + other.q)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.p - other.p, self.q - other.q)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.p.scale(s), self.q.scale(s))
    }

    pub fn to_array(&self) -> [f64; 8] {
        let (p, q) = (self.p.to_array(), self.q.to_array());
        [p[0], p[1], p[2], p[3], q[0], q[1], q[2], q[3]]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p.max_abs_diff(other.p).max(self.q.max_abs_diff(other.q))
    }
}

/// Tangent vector at `anchor`, stored by its frame coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub coeffs: Coeffs,
    pub anchor: ConfigPoint,
}

impl TangentVector {
    pub fn new(anchor: ConfigPoint, coeffs: Coeffs) -> Self {
        Self { coeffs, anchor }
    }

    /// The frame vector with 1-based index `n` (1..=3 are `E`, 4..=6 are `F`).
    pub fn basis(anchor: ConfigPoint, n: usize) -> Self {
        let mut c = [0.0; 6];
        c[n - 1] = 1.0;
        Self::new(anchor, c)
    }

    /// Gaussian frame coefficients.
    pub fn sample<R: Rng + ?Sized>(anchor: ConfigPoint, rng: &mut R) -> Self {
        let mut c = [0.0; 6];
        for x in &mut c {
            *x = rng.sample(StandardNormal);
        }
        Self::new(anchor, c)
    }

    /// Rescaled to unit length in the metric of the given kind.
    pub fn unit_in(&self, kind: MetricKind) -> Self {
        let g = metric_matrix(kind, AlmostComplex::ADOPTED);
        let n = bilinear(&g, &self.coeffs, &self.coeffs).sqrt();
        self.with_coeffs(self.coeffs.map(|c| c / n))
    }

    pub fn to_ambient(&self) -> AmbientVector {
        frame_to_ambient(&self.anchor, &self.coeffs)
    }

    pub fn with_coeffs(&self, coeffs: Coeffs) -> Self {
        Self::new(self.anchor, coeffs)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff6(&self.coeffs, &other.coeffs)
    }
}

pub fn max_abs_diff6(a: &Coeffs, b: &Coeffs) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn imag_combination(c: &[f64]) -> Quaternion {
    let mut v = [0.0; 3];
    for (n, unit) in FRAME_UNITS.iter().enumerate() {
        for k in 0..3 {
            v[k] += c[n] * unit[k];
        }
    }
    Quaternion::imaginary(v)
}

/// Imaginary quaternions `(a, b)` with `(p a, q b)` equal to the vector with these
/// frame coefficients.
pub fn coeffs_to_left_imag(c: &Coeffs) -> (Quaternion, Quaternion) {
    (imag_combination(&c[0..3]), imag_combination(&c[3..6]))
}

pub fn frame_to_ambient(cfg: &ConfigPoint, c: &Coeffs) -> AmbientVector {
    let (a, b) = coeffs_to_left_imag(c);
    AmbientVector::new(cfg.p.quat() * a, cfg.q.quat() * b)
}

/// The six frame vectors at a point, as vectors of ℍ².
#[derive(Debug, Clone, Copy)]
pub struct FrameBasis {
    pub vectors: [AmbientVector; 6],
}

pub fn frame_at(cfg: &ConfigPoint) -> FrameBasis {
    let vectors = std::array::from_fn(|n| TangentVector::basis(*cfg, n + 1).to_ambient());
    FrameBasis { vectors }
}

/// Frame coefficients of an ambient vector tangent at `cfg`. Normal components up
/// to [`TANGENCY_TOL`] are projected away; larger ones are an error.
pub fn ambient_to_frame(cfg: &ConfigPoint, w: &AmbientVector) -> Result<TangentVector, GeomError> {
    let normal = w.p.dot(cfg.p.quat()).abs().max(w.q.dot(cfg.q.quat()).abs());
    if normal > TANGENCY_TOL || !normal.is_finite() {
        return Err(GeomError::NotTangent { normal });
    }
    Ok(project_to_frame(cfg, w))
}

/// Orthogonal projection onto the tangent space, in frame coefficients. Never fails.
pub fn project_to_frame(cfg: &ConfigPoint, w: &AmbientVector) -> TangentVector {
    let basis = frame_at(cfg);
    let coeffs = std::array::from_fn(|n| basis.vectors[n].dot(w));
    TangentVector::new(*cfg, coeffs)
}

pub fn mat_vec(m: &Matrix6, v: &Coeffs) -> Coeffs {
    std::array::from_fn(|r| (0..6).map(|c| m[r][c] * v[c]).sum())
}

pub fn bilinear(m: &Matrix6, u: &Coeffs, v: &Coeffs) -> f64 {
    let mv = mat_vec(m, v);
    u.iter().zip(mv).map(|(a, b)| a * b).sum()
}

fn transpose(m: &Matrix6) -> Matrix6 {
    std::array::from_fn(|r| std::array::from_fn(|c| m[c][r]))
}

fn mat_mul(a: &Matrix6, b: &Matrix6) -> Matrix6 {
    std::array::from_fn(|r| std::array::from_fn(|c| (0..6).map(|k| a[r][k] * b[k][c]).sum()))
}

/// Almost complex structure `J E_n = (−E_n + 2σF_n)/√3`, `J F_n = (F_n − 2σE_n)/√3`.
///
/// `σ = +1` is the structure as written in the frame-tensor display; `σ = −1` is
/// the one selected by the nearly Kähler defect oracle (see
/// [`crate::conventions`]) and used everywhere by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmostComplex {
    pub off_diagonal_sign: f64,
}

impl AlmostComplex {
    pub const DISPLAYED: Self = Self {
        off_diagonal_sign: 1.0,
    };
    pub const ADOPTED: Self = Self {
        off_diagonal_sign: -1.0,
    };

    pub fn matrix(&self) -> Matrix6 {
        let s = 1.0 / 3f64.sqrt();
        let sig = self.off_diagonal_sign;
        let mut m = [[0.0; 6]; 6];
        for n in 0..3 {
            // column n is J E_n, column n + 3 is J F_n
            m[n][n] = -s;
            m[n + 3][n] = 2.0 * sig * s;
            m[n + 3][n + 3] = s;
            m[n][n + 3] = -2.0 * sig * s;
        }
        m
    }

    pub fn apply(&self, v: &TangentVector) -> TangentVector {
        v.with_coeffs(mat_vec(&self.matrix(), &v.coeffs))
    }
}

impl Default for AlmostComplex {
    fn default() -> Self {
        Self::ADOPTED
    }
}

/// `J v` for the adopted structure.
pub fn j_apply(v: &TangentVector) -> TangentVector {
    AlmostComplex::ADOPTED.apply(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum MetricKind {
    /// Restriction of the flat metric of ℍ².
    Flat,
    /// `½(g_flat + g_flat(J·, J·))`.
    NKAveraged,
    /// `4/3 Σ((Eⁿ)² − EⁿFⁿ + (Fⁿ)²)` with `ef = ½(e⊗f + f⊗e)`.
    NKDisplayed,
}

pub fn metric_matrix(kind: MetricKind, j: AlmostComplex) -> Matrix6 {
    let mut id = [[0.0; 6]; 6];
    for (n, row) in id.iter_mut().enumerate() {
        row[n] = 1.0;
    }
    match kind {
        MetricKind::Flat => id,
        MetricKind::NKAveraged => {
            let jm = j.matrix();
            let jtj = mat_mul(&transpose(&jm), &jm);
            std::array::from_fn(|r| std::array::from_fn(|c| 0.5 * (id[r][c] + jtj[r][c])))
        }
        MetricKind::NKDisplayed => {
            let mut m = [[0.0; 6]; 6];
            for n in 0..3 {
                m[n][n] = 4.0 / 3.0;
                m[n + 3][n + 3] = 4.0 / 3.0;
                m[n][n + 3] = -2.0 / 3.0;
                m[n + 3][n] = -2.0 / 3.0;
            }
            m
        }
    }
}

/// Metric of the adopted nearly Kähler structure.
pub fn nk_metric() -> Matrix6 {
    metric_matrix(MetricKind::NKAveraged, AlmostComplex::ADOPTED)
}

pub fn metric_eval(u: &TangentVector, v: &TangentVector, kind: MetricKind) -> Result<f64, GeomError> {
    metric_eval_with(u, v, kind, AlmostComplex::ADOPTED)
}

pub fn metric_eval_with(
    u: &TangentVector,
    v: &TangentVector,
    kind: MetricKind,
    j: AlmostComplex,
) -> Result<f64, GeomError> {
    if u.anchor != v.anchor {
        return Err(GeomError::AnchorMismatch);
    }
    Ok(bilinear(&metric_matrix(kind, j), &u.coeffs, &v.coeffs))
}

/// `ω = 4/√3 Σ Eⁿ∧Fⁿ` with `e∧f(u, v) = e(u)f(v) − e(v)f(u)`.
pub fn omega_matrix() -> Matrix6 {
    let c = 4.0 / 3f64.sqrt();
    let mut m = [[0.0; 6]; 6];
    for n in 0..3 {
        m[n][n + 3] = c;
        m[n + 3][n] = -c;
    }
    m
}

pub fn omega_coeffs(u: &Coeffs, v: &Coeffs) -> f64 {
    bilinear(&omega_matrix(), u, v)
}

pub fn omega_eval(u: &TangentVector, v: &TangentVector) -> Result<f64, GeomError> {
    if u.anchor != v.anchor {
        return Err(GeomError::AnchorMismatch);
    }
    Ok(omega_coeffs(&u.coeffs, &v.coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-12;

    #[test]
    fn frame_at_identity() {
        let b = frame_at(&ConfigPoint::IDENTITY);
        assert_eq!(b.vectors[0], AmbientVector::new(Quaternion::I, Quaternion::ZERO));
        assert_eq!(b.vectors[2], AmbientVector::new(-Quaternion::K, Quaternion::ZERO));
        assert_eq!(b.vectors[5], AmbientVector::new(Quaternion::ZERO, -Quaternion::K));
    }

    #[test]
    fn frame_is_flat_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let cfg = ConfigPoint::sample(&mut rng);
            let b = frame_at(&cfg);
            assert!(b.vectors[4].max_abs_diff(&AmbientVector::new(
                Quaternion::ZERO,
                cfg.q.quat() * Quaternion::J
            )) < EPS);
            for r in 0..6 {
                for s in 0..6 {
                    let e = if r == s { 1.0 } else { 0.0 };
                    assert!((b.vectors[r].dot(&b.vectors[s]) - e).abs() < EPS);
                }
                assert!(b.vectors[r].p.dot(cfg.p.quat()).abs() < EPS);
                assert!(b.vectors[r].q.dot(cfg.q.quat()).abs() < EPS);
            }
        }
    }

    #[test]
    fn displayed_j_on_basis() {
        let s = 1.0 / 3f64.sqrt();
        let o = ConfigPoint::IDENTITY;
        let je1 = AlmostComplex::DISPLAYED.apply(&TangentVector::basis(o, 1));
        assert!(max_abs_diff6(&je1.coeffs, &[-s, 0.0, 0.0, 2.0 * s, 0.0, 0.0]) < EPS);
        let jf1 = AlmostComplex::DISPLAYED.apply(&TangentVector::basis(o, 4));
        assert!(max_abs_diff6(&jf1.coeffs, &[-2.0 * s, 0.0, 0.0, s, 0.0, 0.0]) < EPS);
        let je1 = j_apply(&TangentVector::basis(o, 1));
        assert!(max_abs_diff6(&je1.coeffs, &[-s, 0.0, 0.0, -2.0 * s, 0.0, 0.0]) < EPS);
    }

    #[test]
    fn j_squares_to_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for j in [AlmostComplex::DISPLAYED, AlmostComplex::ADOPTED] {
            for _ in 0..10_000 {
                let v = TangentVector::sample(ConfigPoint::IDENTITY, &mut rng);
                let jj = j.apply(&j.apply(&v));
                let resid = jj.coeffs.iter().zip(v.coeffs).fold(0.0_f64, |m, (a, b)| m.max((a + b).abs()));
                assert!(resid < EPS);
            }
        }
    }

    #[test]
    fn metric_values() {
        let o = ConfigPoint::IDENTITY;
        let e1 = TangentVector::basis(o, 1);
        let f1 = TangentVector::basis(o, 4);
        assert!((metric_eval(&e1, &e1, MetricKind::Flat).unwrap() - 1.0).abs() < EPS);
        assert!((metric_eval(&e1, &e1, MetricKind::NKAveraged).unwrap() - 4.0 / 3.0).abs() < EPS);
        for j in [AlmostComplex::DISPLAYED, AlmostComplex::ADOPTED] {
            let g = metric_eval_with(&e1, &f1, MetricKind::NKAveraged, j).unwrap();
            assert!((g.abs() - 2.0 / 3.0).abs() < EPS);
        }
        // the displayed J averages to +2/3, the adopted one to the displayed -2/3
        let gd = metric_eval_with(&e1, &f1, MetricKind::NKAveraged, AlmostComplex::DISPLAYED).unwrap();
        assert!((gd - 2.0 / 3.0).abs() < EPS);
        let ga = metric_eval(&e1, &f1, MetricKind::NKAveraged).unwrap();
        let gdisp = metric_eval(&e1, &f1, MetricKind::NKDisplayed).unwrap();
        assert!((ga - gdisp).abs() < EPS);
        let other = TangentVector::basis(ConfigPoint::sample(&mut ChaCha8Rng::seed_from_u64(0)), 1);
        assert_eq!(metric_eval(&e1, &other, MetricKind::Flat), Err(GeomError::AnchorMismatch));
        assert_eq!(omega_eval(&e1, &other), Err(GeomError::AnchorMismatch));
    }

    #[test]
    fn averaged_metric_is_j_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let cfg = ConfigPoint::sample(&mut rng);
            let u = TangentVector::sample(cfg, &mut rng);
            let v = TangentVector::sample(cfg, &mut rng);
            let a = metric_eval(&u, &v, MetricKind::NKAveraged).unwrap();
            let b = metric_eval(&j_apply(&u), &j_apply(&v), MetricKind::NKAveraged).unwrap();
            assert!((a - b).abs() < EPS * (1.0 + a.abs()) * 10.0);
        }
    }

    #[test]
    fn omega_values() {
        let o = ConfigPoint::IDENTITY;
        let om = omega_eval(&TangentVector::basis(o, 1), &TangentVector::basis(o, 4)).unwrap();
        assert!((om - 4.0 / 3f64.sqrt()).abs() < EPS);
        assert_eq!(omega_eval(&TangentVector::basis(o, 1), &TangentVector::basis(o, 2)).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let u = TangentVector::sample(o, &mut rng);
            assert!(omega_eval(&u, &u).unwrap().abs() < EPS);
        }
    }

    #[test]
    fn omega_is_a_constant_multiple_of_fundamental_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = nk_metric();
        let mut lambda = None;
        for _ in 0..10_000 {
            let cfg = ConfigPoint::sample(&mut rng);
            let u = TangentVector::sample(cfg, &mut rng);
            let v = TangentVector::sample(cfg, &mut rng);
            let gj = bilinear(&g, &j_apply(&u).coeffs, &v.coeffs);
            if gj.abs() < 1e-3 {
                continue;
            }
            let l = omega_eval(&u, &v).unwrap() / gj;
            let l0 = *lambda.get_or_insert(l);
            assert!((l - l0).abs() < 1e-9, "{l} vs {l0}");
        }
    }

    #[test]
    fn ambient_frame_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = ConfigPoint::sample(&mut rng);
        let e1 = AmbientVector::new(cfg.p.quat() * Quaternion::I, Quaternion::ZERO);
        let t = ambient_to_frame(&cfg, &e1).unwrap();
        assert!(max_abs_diff6(&t.coeffs, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]) < EPS);
        let f3 = AmbientVector::new(Quaternion::ZERO, -(cfg.q.quat() * Quaternion::K));
        let t = ambient_to_frame(&cfg, &f3).unwrap();
        assert!(max_abs_diff6(&t.coeffs, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]) < EPS);
        let normal = AmbientVector::new(cfg.p.quat(), Quaternion::ZERO);
        assert!(matches!(ambient_to_frame(&cfg, &normal), Err(GeomError::NotTangent { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ambient_round_trip(seed in any::<u64>(), c in prop::array::uniform6(-5.0..5.0f64)) {
                let cfg = ConfigPoint::sample(&mut ChaCha8Rng::seed_from_u64(seed));
                let v = TangentVector::new(cfg, c);
                let w = v.to_ambient();
                let back = ambient_to_frame(&cfg, &w).unwrap();
                prop_assert!(back.max_abs_diff(&v) < 1e-12);
                prop_assert!(back.to_ambient().max_abs_diff(&w) < 1e-12);
            }
        }
    }
}
