//! Brackets of frame fields, the Levi-Civita connection, `dω`, Lie derivatives
//! and a finite-difference engine used to cross-check all of them.
//!
//! Every frame field is left-invariant on its factor, so brackets have constant
//! coefficients and any tensor with constant frame coefficients has vanishing
//! frame derivatives. The Koszul formula and the invariant formula for `dω`
//! then reduce to their bracket terms.

use nalgebra::SMatrix;

use crate::error::GeomError;
use crate::frame::{
    bilinear, coeffs_to_left_imag, frame_to_ambient, mat_vec, metric_matrix, omega_coeffs,
    project_to_frame, AlmostComplex, AmbientVector, Coeffs, ConfigPoint, Matrix6, MetricKind,
    TangentVector, FRAME_UNITS,
};
use crate::quaternion::{dot3, exp_imag, Quaternion, UnitQuaternion};

/// 1-based frame index: 1..=3 for `E`, 4..=6 for `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameIndex(usize);

impl FrameIndex {
    pub fn new(n: usize) -> Result<Self, GeomError> {
        if (1..=6).contains(&n) {
            Ok(Self(n))
        } else {
            Err(GeomError::FrameIndex(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn all() -> impl Iterator<Item = FrameIndex> {
        (1..=6).map(FrameIndex)
    }

    pub fn unit(self) -> Coeffs {
        let mut c = [0.0; 6];
        c[self.0 - 1] = 1.0;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdParams {
    step: f64,
    richardson: bool,
}

impl FdParams {
    pub const MIN_STEP: f64 = 1e-7;
    pub const MAX_STEP: f64 = 1e-2;

    pub fn new(step: f64, richardson: bool) -> Result<Self, GeomError> {
        if !(Self::MIN_STEP..=Self::MAX_STEP).contains(&step) {
            return Err(GeomError::StepOutOfRange { step });
        }
        Ok(Self { step, richardson })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }
}

impl Default for FdParams {
    fn default() -> Self {
        Self {
            step: 1e-5,
            richardson: false,
        }
    }
}

/// Second-order central difference of `g` at 0, optionally Richardson-extrapolated.
pub fn central_difference<const N: usize>(g: impl Fn(f64) -> [f64; N], fd: &FdParams) -> [f64; N] {
    let d = |h: f64| -> [f64; N] {
        let (a, b) = (g(h), g(-h));
        std::array::from_fn(|k| (a[k] - b[k]) / (2.0 * h))
    };
    let coarse = d(fd.step);
    if !fd.richardson {
        return coarse;
    }
    let fine = d(0.5 * fd.step);
    std::array::from_fn(|k| (4.0 * fine[k] - coarse[k]) / 3.0)
}

fn quat_to_frame3(v: Quaternion) -> [f64; 3] {
    std::array::from_fn(|n| dot3(v.vector(), FRAME_UNITS[n]))
}

/// `[X_a, X_b] = X_{ab − ba}` for left-invariant fields, expanded back in the frame.
fn bracket_table() -> [[Coeffs; 6]; 6] {
    let mut t = [[[0.0; 6]; 6]; 6];
    for a in 0..3 {
        for b in 0..3 {
            let ua = Quaternion::imaginary(FRAME_UNITS[a]);
            let ub = Quaternion::imaginary(FRAME_UNITS[b]);
            let c = quat_to_frame3(ua * ub - ub * ua);
            for off in [0, 3] {
                for k in 0..3 {
                    t[a + off][b + off][k + off] = c[k];
                }
            }
        }
    }
    t
}

pub fn frame_bracket(n: FrameIndex, m: FrameIndex) -> Coeffs {
    bracket_table()[n.0 - 1][m.0 - 1]
}

/// Bracket of the constant-coefficient extensions of `u` and `v`.
pub fn bracket_coeffs(u: &Coeffs, v: &Coeffs) -> Coeffs {
    let t = bracket_table();
    let mut out = [0.0; 6];
    for a in 0..6 {
        for b in 0..6 {
            let w = u[a] * v[b];
            if w != 0.0 {
                for k in 0..6 {
                    out[k] += w * t[a][b][k];
                }
            }
        }
    }
    out
}

/// Levi-Civita connection of a left-invariant metric, by the Koszul formula.
#[derive(Debug, Clone)]
pub struct Connection {
    metric: Matrix6,
    inverse: Matrix6,
}

impl Connection {
    pub fn new(metric: Matrix6) -> Self {
        let m = SMatrix::<f64, 6, 6>::from_fn(|r, c| metric[r][c]);
        let inv = m.try_inverse().expect("metric matrix must be invertible");
        let inverse = std::array::from_fn(|r| std::array::from_fn(|c| inv[(r, c)]));
        Self { metric, inverse }
    }

    pub fn of(kind: MetricKind, j: AlmostComplex) -> Self {
        Self::new(metric_matrix(kind, j))
    }

    pub fn metric(&self) -> &Matrix6 {
        &self.metric
    }

    /// `∇_U V` for constant-coefficient `U`, `V`:
    /// `2g(∇_U V, W) = g([U,V],W) − g([V,W],U) + g([W,U],V)`.
    pub fn nabla(&self, u: &Coeffs, v: &Coeffs) -> Coeffs {
        let g = &self.metric;
        let uv = bracket_coeffs(u, v);
        let rhs: Coeffs = std::array::from_fn(|w| {
            let mut e = [0.0; 6];
            e[w] = 1.0;
            0.5 * (bilinear(g, &uv, &e) - bilinear(g, &bracket_coeffs(v, &e), u)
                + bilinear(g, &bracket_coeffs(&e, u), v))
        });
        mat_vec(&self.inverse, &rhs)
    }

    /// `(∇_U J)V = ∇_U(JV) − J∇_U V`.
    pub fn nabla_j(&self, j: AlmostComplex, u: &Coeffs, v: &Coeffs) -> Coeffs {
        let jm = j.matrix();
        let a = self.nabla(u, &mat_vec(&jm, v));
        let b = mat_vec(&jm, &self.nabla(u, v));
        std::array::from_fn(|k| a[k] - b[k])
    }

    pub fn norm(&self, v: &Coeffs) -> f64 {
        bilinear(&self.metric, v, v).max(0.0).sqrt()
    }
}

pub fn adopted_connection() -> Connection {
    Connection::of(MetricKind::NKAveraged, AlmostComplex::ADOPTED)
}

pub fn levi_civita(n: FrameIndex, m: FrameIndex) -> Coeffs {
    adopted_connection().nabla(&n.unit(), &m.unit())
}

/// `‖(∇_u J)u‖` for the adopted structure.
pub fn nabla_j_defect(u: &TangentVector) -> f64 {
    nabla_j_defect_with(u, MetricKind::NKAveraged, AlmostComplex::ADOPTED)
}

/// Nearly Kähler defect of a candidate `(g, J)`, measured in the candidate metric.
pub fn nabla_j_defect_with(u: &TangentVector, kind: MetricKind, j: AlmostComplex) -> f64 {
    let conn = Connection::of(kind, j);
    conn.norm(&conn.nabla_j(j, &u.coeffs, &u.coeffs))
}

/// `dω(U,V,W) = −ω([U,V],W) − ω([V,W],U) − ω([W,U],V)`; trilinear in frame coefficients.
pub fn d_omega_coeffs(u: &Coeffs, v: &Coeffs, w: &Coeffs) -> f64 {
    -omega_coeffs(&bracket_coeffs(u, v), w)
        - omega_coeffs(&bracket_coeffs(v, w), u)
        - omega_coeffs(&bracket_coeffs(w, u), v)
}

pub fn d_omega(n: FrameIndex, m: FrameIndex, l: FrameIndex) -> f64 {
    d_omega_coeffs(&n.unit(), &m.unit(), &l.unit())
}

pub fn d_omega_eval(u: &TangentVector, v: &TangentVector, w: &TangentVector) -> Result<f64, GeomError> {
    if u.anchor != v.anchor || u.anchor != w.anchor {
        return Err(GeomError::AnchorMismatch);
    }
    Ok(d_omega_coeffs(&u.coeffs, &v.coeffs, &w.coeffs))
}

/// `t ↦ (p·exp(t a), q·exp(t b))`, the curve through `v.anchor` with velocity `v`
/// whose frame coefficients stay constant.
pub fn frame_curve(v: &TangentVector, t: f64) -> ConfigPoint {
    let (a, b) = coeffs_to_left_imag(&v.coeffs);
    ConfigPoint::new(
        v.anchor.p * exp_imag(a.scale(t).vector()),
        v.anchor.q * exp_imag(b.scale(t).vector()),
    )
}

/// Directional derivative of a scalar function along `v`.
pub fn fd_directional(
    f: impl Fn(&ConfigPoint) -> f64,
    cfg: &ConfigPoint,
    v: &TangentVector,
    fd: &FdParams,
) -> Result<f64, GeomError> {
    if v.anchor != *cfg {
        return Err(GeomError::AnchorMismatch);
    }
    Ok(central_difference(|t| [f(&frame_curve(v, t))], fd)[0])
}

/// A vector field on S³×S³ given by its ambient values.
pub trait VectorField {
    fn at(&self, cfg: &ConfigPoint) -> AmbientVector;
}

impl<F: Fn(&ConfigPoint) -> AmbientVector> VectorField for F {
    fn at(&self, cfg: &ConfigPoint) -> AmbientVector {
        self(cfg)
    }
}

/// Flat derivative `D_v K` of the ambient field `K` along `v`.
pub fn ambient_derivative(
    field: &dyn VectorField,
    v: &TangentVector,
    fd: &FdParams,
) -> AmbientVector {
    let d = central_difference(|t| field.at(&frame_curve(v, t)).to_array(), fd);
    AmbientVector::new(
        Quaternion::new(d[0], d[1], d[2], d[3]),
        Quaternion::new(d[4], d[5], d[6], d[7]),
    )
}

/// `[K, L]` at `cfg` as `D_K L − D_L K`, both by finite differences.
pub fn lie_bracket_fd(
    k: &dyn VectorField,
    l: &dyn VectorField,
    cfg: &ConfigPoint,
    fd: &FdParams,
) -> TangentVector {
    let kv = project_to_frame(cfg, &k.at(cfg));
    let lv = project_to_frame(cfg, &l.at(cfg));
    let w = ambient_derivative(l, &kv, fd).sub(&ambient_derivative(k, &lv, fd));
    project_to_frame(cfg, &w)
}

/// `[K, U]` where `U` is the constant-coefficient extension of `u`; `D_K U` is exact.
fn bracket_with_frame_field(
    k: &dyn VectorField,
    u: &TangentVector,
    fd: &FdParams,
) -> TangentVector {
    let kv = k.at(&u.anchor);
    let (a, b) = coeffs_to_left_imag(&u.coeffs);
    let dk_u = AmbientVector::new(kv.p * a, kv.q * b);
    let du_k = ambient_derivative(k, u, fd);
    project_to_frame(&u.anchor, &dk_u.sub(&du_k))
}

/// `(ℒ_K g)(u, v) = −g([K,U],V) − g(U,[K,V])` for constant-coefficient `U`, `V`.
pub fn lie_derivative_metric(
    k: &dyn VectorField,
    cfg: &ConfigPoint,
    u: &TangentVector,
    v: &TangentVector,
    fd: &FdParams,
) -> Result<f64, GeomError> {
    if u.anchor != *cfg || v.anchor != *cfg {
        return Err(GeomError::AnchorMismatch);
    }
    let g = metric_matrix(MetricKind::NKAveraged, AlmostComplex::ADOPTED);
    let ku = bracket_with_frame_field(k, u, fd);
    let kv = bracket_with_frame_field(k, v, fd);
    Ok(-bilinear(&g, &ku.coeffs, &v.coeffs) - bilinear(&g, &u.coeffs, &kv.coeffs))
}

/// `(ℒ_K J)u = [K, JU] − J[K, U]`.
pub fn lie_derivative_j(
    k: &dyn VectorField,
    cfg: &ConfigPoint,
    u: &TangentVector,
    fd: &FdParams,
) -> Result<TangentVector, GeomError> {
    if u.anchor != *cfg {
        return Err(GeomError::AnchorMismatch);
    }
    let j = AlmostComplex::ADOPTED;
    let a = bracket_with_frame_field(k, &j.apply(u), fd);
    let b = j.apply(&bracket_with_frame_field(k, u, fd));
    Ok(u.with_coeffs(std::array::from_fn(|n| a.coeffs[n] - b.coeffs[n])))
}

/// A flow by maps that are restrictions of linear maps of ℍ².
pub trait LinearFlow {
    fn flow(&self, t: f64, cfg: &ConfigPoint) -> ConfigPoint;
    /// Differential of the time-`t` map applied to an ambient vector.
    fn push(&self, t: f64, w: &AmbientVector) -> AmbientVector;
}

/// `(ℒ_K g)(u, v) = d/dt g(dφ_t u, dφ_t v)` at `t = 0`, using the exact flow.
pub fn lie_derivative_metric_flow(
    flow: &dyn LinearFlow,
    u: &TangentVector,
    v: &TangentVector,
    fd: &FdParams,
) -> Result<f64, GeomError> {
    if u.anchor != v.anchor {
        return Err(GeomError::AnchorMismatch);
    }
    let g = metric_matrix(MetricKind::NKAveraged, AlmostComplex::ADOPTED);
    let (uw, vw) = (u.to_ambient(), v.to_ambient());
    let d = central_difference(
        |t| {
            let x = flow.flow(t, &u.anchor);
            let pu = project_to_frame(&x, &flow.push(t, &uw));
            let pv = project_to_frame(&x, &flow.push(t, &vw));
            [bilinear(&g, &pu.coeffs, &pv.coeffs)]
        },
        fd,
    );
    Ok(d[0])
}

/// `(ℒ_K J)u = d/dt dφ_{−t} J dφ_t u` at `t = 0`, using the exact flow.
pub fn lie_derivative_j_flow(
    flow: &dyn LinearFlow,
    u: &TangentVector,
    fd: &FdParams,
) -> TangentVector {
    let j = AlmostComplex::ADOPTED;
    let uw = u.to_ambient();
    let d = central_difference(
        |t| {
            let x = flow.flow(t, &u.anchor);
            let pushed = project_to_frame(&x, &flow.push(t, &uw));
            let back = flow.push(-t, &j.apply(&pushed).to_ambient());
            project_to_frame(&u.anchor, &back).coeffs
        },
        fd,
    );
    u.with_coeffs(d)
}

/// Coordinate chart `s ↦ (p e^{s₁e₁}e^{s₂e₂}e^{s₃e₃}, q e^{s₄e₁}e^{s₅e₂}e^{s₆e₃})`
/// around `cfg`, with `eₙ` the frame units. Its coordinate fields at `s = 0` are
/// the frame vectors.
pub fn chart_point(cfg: &ConfigPoint, s: &Coeffs) -> ConfigPoint {
    let factor = |base: UnitQuaternion, s: &[f64]| {
        (0..3).fold(base, |acc, n| {
            acc * exp_imag(std::array::from_fn(|k| s[n] * FRAME_UNITS[n][k]))
        })
    };
    ConfigPoint::new(factor(cfg.p, &s[0..3]), factor(cfg.q, &s[3..6]))
}

/// Exact coordinate vector fields of [`chart_point`], as tangent vectors at the image.
pub fn chart_tangents(cfg: &ConfigPoint, s: &Coeffs) -> (ConfigPoint, [TangentVector; 6]) {
    let x = chart_point(cfg, s);
    let tangents = std::array::from_fn(|i| {
        let (base, off) = if i < 3 { (cfg.p, 0) } else { (cfg.q, 3) };
        let n = i - off;
        let exps: [Quaternion; 3] = std::array::from_fn(|m| {
            exp_imag(std::array::from_fn(|k| s[off + m] * FRAME_UNITS[m][k])).quat()
        });
        let mut w = base.quat();
        for (m, e) in exps.iter().enumerate() {
            w = w * *e;
            if m == n {
                w = w * Quaternion::imaginary(FRAME_UNITS[n]);
            }
        }
        let amb = if i < 3 {
            AmbientVector::new(w, Quaternion::ZERO)
        } else {
            AmbientVector::new(Quaternion::ZERO, w)
        };
        project_to_frame(&x, &amb)
    });
    (x, tangents)
}

/// Exterior derivative of a `k`-form evaluated on the coordinate fields
/// `∂_{i₀}, …, ∂_{i_k}` of the chart at `cfg`, by differencing the pulled-back
/// components: `dθ(∂_{i₀},…) = Σₐ (−1)ᵃ ∂_{iₐ} θ(…, ∂̂_{iₐ}, …)`.
/// Indices are 0-based.
pub fn fd_exterior_derivative(
    form: &dyn Fn(&[TangentVector]) -> f64,
    cfg: &ConfigPoint,
    indices: &[usize],
    fd: &FdParams,
) -> f64 {
    let mut total = 0.0;
    for (a, &ia) in indices.iter().enumerate() {
        let rest: Vec<usize> = indices
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, &i)| i)
            .collect();
        let component = central_difference(
            |t| {
                let mut s = [0.0; 6];
                s[ia] = t;
                let (_, tangents) = chart_tangents(cfg, &s);
                let args: Vec<TangentVector> = rest.iter().map(|&i| tangents[i]).collect();
                [form(&args)]
            },
            fd,
        )[0];
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * component;
    }
    total
}

/// Constant-coefficient frame field as a [`VectorField`].
#[derive(Debug, Clone, Copy)]
pub struct FrameField(pub Coeffs);

impl VectorField for FrameField {
    fn at(&self, cfg: &ConfigPoint) -> AmbientVector {
        frame_to_ambient(cfg, &self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{max_abs_diff6, omega_eval};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn idx(n: usize) -> FrameIndex {
        FrameIndex::new(n).unwrap()
    }

    fn scaled(n: usize, s: f64) -> Coeffs {
        let mut c = [0.0; 6];
        c[n - 1] = s;
        c
    }

    #[test]
    fn frame_index_range() {
        assert!(FrameIndex::new(0).is_err());
        assert!(FrameIndex::new(7).is_err());
        assert_eq!(FrameIndex::new(6).unwrap().get(), 6);
    }

    #[test]
    fn fd_params_validate_step() {
        assert!(FdParams::new(1e-8, false).is_err());
        assert!(FdParams::new(0.1, false).is_err());
        assert_eq!(FdParams::default().step(), 1e-5);
    }

    #[test]
    fn bracket_examples() {
        assert!(max_abs_diff6(&frame_bracket(idx(1), idx(2)), &scaled(3, -2.0)) < 1e-15);
        assert_eq!(frame_bracket(idx(1), idx(4)), [0.0; 6]);
        assert!(max_abs_diff6(&frame_bracket(idx(2), idx(3)), &scaled(1, -2.0)) < 1e-15);
        assert!(max_abs_diff6(&frame_bracket(idx(4), idx(5)), &scaled(6, -2.0)) < 1e-15);
    }

    #[test]
    fn bracket_matches_vector_field_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fd = FdParams::default();
        for _ in 0..20 {
            let cfg = ConfigPoint::sample(&mut rng);
            let u = TangentVector::sample(cfg, &mut rng);
            let v = TangentVector::sample(cfg, &mut rng);
            let b = lie_bracket_fd(&FrameField(u.coeffs), &FrameField(v.coeffs), &cfg, &fd);
            assert!(max_abs_diff6(&b.coeffs, &bracket_coeffs(&u.coeffs, &v.coeffs)) < 1e-8);
        }
    }

    #[test]
    fn levi_civita_properties() {
        assert!(levi_civita(idx(1), idx(1)).iter().all(|c| c.abs() < 1e-14));
        let a = levi_civita(idx(1), idx(2));
        let b = levi_civita(idx(2), idx(1));
        let torsion: Coeffs = std::array::from_fn(|k| a[k] - b[k]);
        assert!(max_abs_diff6(&torsion, &scaled(3, -2.0)) < 1e-12);
        let conn = adopted_connection();
        let g = conn.metric();
        for n in FrameIndex::all() {
            for m in FrameIndex::all() {
                let t: Coeffs = std::array::from_fn(|k| {
                    levi_civita(n, m)[k] - levi_civita(m, n)[k] - frame_bracket(n, m)[k]
                });
                assert!(t.iter().all(|c| c.abs() < 1e-12));
                for l in FrameIndex::all() {
                    let compat = bilinear(g, &levi_civita(n, m), &l.unit())
                        + bilinear(g, &m.unit(), &levi_civita(n, l));
                    assert!(compat.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nearly_kahler_defect() {
        let o = ConfigPoint::IDENTITY;
        assert!(nabla_j_defect(&TangentVector::basis(o, 1)) < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut worst_flat = f64::INFINITY;
        for _ in 0..1000 {
            let u = TangentVector::sample(o, &mut rng);
            assert!(nabla_j_defect(&u) < 1e-10);
            let flat = nabla_j_defect_with(&u, MetricKind::Flat, AlmostComplex::ADOPTED);
            worst_flat = worst_flat.min(flat / u.coeffs.iter().map(|c| c * c).sum::<f64>());
        }
        assert!(worst_flat > 0.0);
        let u = TangentVector::new(o, [0.3, -0.2, 0.5, 0.1, 0.7, -0.4]);
        assert!(nabla_j_defect_with(&u, MetricKind::Flat, AlmostComplex::ADOPTED) > 0.1);
    }

    #[test]
    fn d_omega_examples() {
        assert!(d_omega(idx(1), idx(2), idx(3)).abs() < 1e-14);
        assert!((d_omega(idx(1), idx(2), idx(6)) - 8.0 / 3f64.sqrt()).abs() < 1e-12);
        let base = d_omega(idx(1), idx(4), idx(5));
        assert!((d_omega(idx(4), idx(1), idx(5)) + base).abs() < 1e-14);
        assert!((d_omega(idx(1), idx(5), idx(4)) + base).abs() < 1e-14);
        assert!((d_omega(idx(5), idx(4), idx(1)) + base).abs() < 1e-14);
    }

    #[test]
    fn fd_directional_examples() {
        let o = ConfigPoint::IDENTITY;
        let fd = FdParams::default();
        let e1 = TangentVector::basis(o, 1);
        assert_eq!(fd_directional(|_| 3.0, &o, &e1, &fd).unwrap(), 0.0);
        let d = fd_directional(|c| c.p.quat().w, &o, &e1, &fd).unwrap();
        assert!(d.abs() < 1e-12);
        // d/dt Re(i-component) along E1 is cos(0) = 1
        let d = fd_directional(|c| c.p.quat().x, &o, &e1, &fd).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let elsewhere = ConfigPoint::sample(&mut ChaCha8Rng::seed_from_u64(1));
        assert!(fd_directional(|_| 0.0, &elsewhere, &e1, &fd).is_err());
    }

    #[test]
    fn richardson_improves_accuracy() {
        let o = ConfigPoint::IDENTITY;
        let e1 = TangentVector::basis(o, 1);
        let f = |c: &ConfigPoint| (3.0 * c.p.quat().x).sin();
        let plain = fd_directional(f, &o, &e1, &FdParams::new(1e-2, false).unwrap()).unwrap();
        let rich = fd_directional(f, &o, &e1, &FdParams::new(1e-2, true).unwrap()).unwrap();
        assert!((rich - 3.0).abs() < (plain - 3.0).abs());
    }

    #[test]
    fn d_omega_matches_fd_exterior_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let fd = FdParams::new(1e-4, false).unwrap();
        let omega = |a: &[TangentVector]| omega_eval(&a[0], &a[1]).unwrap();
        for _ in 0..10 {
            let cfg = ConfigPoint::sample(&mut rng);
            for (i, j, k) in [(0, 1, 5), (0, 3, 4), (1, 2, 3), (0, 1, 2), (2, 4, 5)] {
                let numeric = fd_exterior_derivative(&omega, &cfg, &[i, j, k], &fd);
                let exact = d_omega(idx(i + 1), idx(j + 1), idx(k + 1));
                assert!((numeric - exact).abs() < 1e-6, "{numeric} vs {exact}");
            }
        }
    }

    #[test]
    fn tensorial_quantities_ignore_the_extension() {
        // dω evaluated with a rescaled, non-constant extension of the first argument
        // through the full invariant formula gives the same value.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let fd = FdParams::default();
        for _ in 0..10 {
            let cfg = ConfigPoint::sample(&mut rng);
            let u = TangentVector::sample(cfg, &mut rng);
            let v = TangentVector::sample(cfg, &mut rng);
            let w = TangentVector::sample(cfg, &mut rng);
            let p0 = cfg.p.quat();
            let bump = move |x: &ConfigPoint| 1.0 + (x.p.quat() - p0).norm_sqr() + (x.p.quat().x - p0.x);
            let bu = u.coeffs;
            let big_u = move |x: &ConfigPoint| frame_to_ambient(x, &bu).scale(bump(x));
            let omega_at = |a: &dyn VectorField, b: &dyn VectorField, x: &ConfigPoint| {
                omega_coeffs(&project_to_frame(x, &a.at(x)).coeffs, &project_to_frame(x, &b.at(x)).coeffs)
            };
            let (fv, fw) = (FrameField(v.coeffs), FrameField(w.coeffs));
            let deriv = |dir: &TangentVector, a: &dyn VectorField, b: &dyn VectorField| {
                fd_directional(|x| omega_at(a, b, x), &cfg, dir, &fd).unwrap()
            };
            let uvec = project_to_frame(&cfg, &big_u.at(&cfg));
            let br = |a: &dyn VectorField, b: &dyn VectorField| lie_bracket_fd(a, b, &cfg, &fd).coeffs;
            let full = deriv(&uvec, &fv, &fw) - deriv(&v, &big_u, &fw) + deriv(&w, &big_u, &fv)
                - omega_coeffs(&br(&big_u, &fv), &w.coeffs)
                + omega_coeffs(&br(&big_u, &fw), &v.coeffs)
                - omega_coeffs(&br(&fv, &fw), &uvec.coeffs);
            let exact = d_omega_coeffs(&u.coeffs, &v.coeffs, &w.coeffs);
            assert!((full - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{full} vs {exact}");
        }
    }

    #[test]
    fn metric_lie_derivative_detects_non_killing_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let fd = FdParams::default();
        let field = |x: &ConfigPoint| frame_to_ambient(x, &scaled(1, 1.0)).scale(x.p.quat().w);
        let cfg = ConfigPoint::sample(&mut rng);
        let u = TangentVector::sample(cfg, &mut rng);
        let v = TangentVector::sample(cfg, &mut rng);
        let l = lie_derivative_metric(&field, &cfg, &u, &v, &fd).unwrap();
        assert!(l.abs() > 1e-3, "{l}");
        assert!(lie_derivative_metric(&field, &ConfigPoint::IDENTITY, &u, &v, &fd).is_err());
    }

    #[test]
    fn chart_tangents_are_frame_at_origin() {
        let cfg = ConfigPoint::sample(&mut ChaCha8Rng::seed_from_u64(24));
        let (x, t) = chart_tangents(&cfg, &[0.0; 6]);
        assert!(x.max_abs_diff(&cfg) < 1e-15);
        for (n, v) in t.iter().enumerate() {
            assert!(max_abs_diff6(&v.coeffs, &TangentVector::basis(cfg, n + 1).coeffs) < 1e-14);
        }
    }

    #[test]
    fn d_d_omega_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let fd = FdParams::new(1e-4, false).unwrap();
        let form = |a: &[TangentVector]| d_omega_eval(&a[0], &a[1], &a[2]).unwrap();
        for _ in 0..5 {
            let cfg = ConfigPoint::sample(&mut rng);
            for quad in [[0, 1, 2, 3], [0, 1, 4, 5], [1, 2, 3, 5], [0, 2, 3, 4]] {
                assert!(fd_exterior_derivative(&form, &cfg, &quad, &fd).abs() < 1e-5);
            }
        }
    }
}
