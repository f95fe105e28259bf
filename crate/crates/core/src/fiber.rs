//! Fibers of `ν̄ : S²×S² → Δ` and of `ν`.
//!
//! For `τ = (X, Y, Z)` the x-coordinate of a preimage lies on the circle
//! `x·C = Y`. For each such x the admissible y satisfy `y·x = X`, `y·C = Z`, so
//! they are the intersection of two circles on S², generically two points
//! exchanged by a reflection through the plane of x and C. Following the two
//! intersection points around gives the two components of the fiber, told apart
//! by the sign of `det{x, y, C}`. Over ∂Δ the two points coincide, and over V the
//! circle of x collapses too.

use nalgebra::SMatrix;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::GeomError;
use crate::frame::ConfigPoint;
use crate::image::{delta_classify, DeltaClass};
use crate::moment::{nu, nu_bar, numerical_rank, MomentValue};
use crate::quaternion::{
    add3, adjoint, cross3, dot3, exp_im, norm3, scale3, triple_det, ImaginaryUnit, Quaternion,
    UnitQuaternion, Vec3,
};
use crate::torus::{killing_fields, TorusSpec};

/// `γ²` at or below this magnitude counts as a tangency of the two circles.
pub const GAMMA_SQ_TOL: f64 = 1e-10;
/// Tolerance on `x·C = τ₂` accepted by [`fiber_solve`].
pub const ON_CIRCLE_TOL: f64 = 1e-10;
/// `1 − τ₂²` below this is treated as the collapsed circle `x = ±C`.
pub const DEGENERATE_GRAM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum FiberTag {
    Empty,
    VertexPoint,
    OneCircle,
    TwoCircles,
}

impl FiberTag {
    pub fn components(self) -> usize {
        match self {
            FiberTag::Empty => 0,
            FiberTag::VertexPoint | FiberTag::OneCircle => 1,
            FiberTag::TwoCircles => 2,
        }
    }

    /// Dimension of the torus orbits making up the ν-fiber.
    pub fn orbit_dimension(self) -> Option<usize> {
        match self {
            FiberTag::Empty => None,
            FiberTag::VertexPoint => Some(2),
            FiberTag::OneCircle | FiberTag::TwoCircles => Some(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Witness {
    pub x: ImaginaryUnit,
    pub y: ImaginaryUnit,
}

impl Witness {
    pub fn det(&self, c: ImaginaryUnit) -> f64 {
        triple_det(self.x, self.y, c)
    }
}

/// One representative per component; for two components the first has `det > 0`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FiberClass {
    pub tag: FiberTag,
    pub witnesses: Vec<Witness>,
}

/// Orthonormal `(u, v)` spanning `C^⊥`, with `u` built from the standard basis
/// vector least aligned with `C` (first one on ties) and `v = C × u`.
pub fn circle_frame(c: ImaginaryUnit) -> (Vec3, Vec3) {
    let cv = c.vector();
    let mut best = 0;
    for k in 1..3 {
        if cv[k].abs() < cv[best].abs() {
            best = k;
        }
    }
    let mut e = [0.0; 3];
    e[best] = 1.0;
    let u = add3(e, scale3(-cv[best], cv));
    let u = scale3(1.0 / norm3(u), u);
    (u, cross3(cv, u))
}

/// Angle on the circle `{x ∈ S² : x·C = h}`, measured from the `u` axis of
/// [`circle_frame`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePoint {
    pub theta: f64,
}

impl CirclePoint {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    pub fn point(&self, c: ImaginaryUnit, h: f64) -> ImaginaryUnit {
        let h = h.clamp(-1.0, 1.0);
        let r = (1.0 - h * h).sqrt();
        let (u, v) = circle_frame(c);
        let w = add3(
            scale3(h, c.vector()),
            add3(scale3(r * self.theta.cos(), u), scale3(r * self.theta.sin(), v)),
        );
        ImaginaryUnit::normalize(w).expect("circle point is nonzero")
    }
}

/// The unit vectors `y` with `y·x = τ₁` and `y·C = τ₃`, for `x` on `x·C = τ₂`.
///
/// Returns two points ordered by the sign of `γ` (first `+γ`), one point at a
/// tangency and none when the circles miss.
pub fn fiber_solve(
    tau: &MomentValue,
    c: ImaginaryUnit,
    x: ImaginaryUnit,
) -> Result<Vec<ImaginaryUnit>, GeomError> {
    let h = x.dot(c);
    let residual = (h - tau.y).abs();
    if residual > ON_CIRCLE_TOL {
        return Err(GeomError::NotOnCircle { residual });
    }
    let det = 1.0 - h * h;
    if det < DEGENERATE_GRAM_TOL {
        return Err(GeomError::DegenerateGram);
    }
    let alpha = (tau.x - h * tau.z) / det;
    let beta = (tau.z - h * tau.x) / det;
    let gamma_sq = 1.0 - (alpha * alpha + beta * beta + 2.0 * alpha * beta * h);
    let base = add3(scale3(alpha, x.vector()), scale3(beta, c.vector()));
    if gamma_sq < -GAMMA_SQ_TOL {
        return Ok(Vec::new());
    }
    let n = cross3(x.vector(), c.vector());
    let n = scale3(1.0 / norm3(n), n);
    if gamma_sq <= GAMMA_SQ_TOL {
        return Ok(vec![ImaginaryUnit::normalize(base)?]);
    }
    let g = gamma_sq.sqrt();
    Ok(vec![
        ImaginaryUnit::normalize(add3(base, scale3(g, n)))?,
        ImaginaryUnit::normalize(add3(base, scale3(-g, n)))?,
    ])
}

/// Preimage witnesses when `x = ±C` is forced: `y` starts on the circle `y·C = τ₃`.
fn collapsed_x_witness(tau: &MomentValue, c: ImaginaryUnit) -> Witness {
    let x = if tau.y > 0.0 { c } else { c.neg() };
    Witness {
        x,
        y: CirclePoint::new(0.0).point(c, tau.z),
    }
}

fn vertex_witness(v: &MomentValue, c: ImaginaryUnit) -> Witness {
    let signed = |s: f64| if s > 0.0 { c } else { c.neg() };
    Witness {
        x: signed(v.y),
        y: signed(v.z),
    }
}

pub fn fiber_classify(tau: &MomentValue, c: ImaginaryUnit, tol: f64) -> FiberClass {
    let empty = FiberClass {
        tag: FiberTag::Empty,
        witnesses: Vec::new(),
    };
    match delta_classify(tau, tol) {
        DeltaClass::Outside => return empty,
        DeltaClass::Vertex { index } => {
            return FiberClass {
                tag: FiberTag::VertexPoint,
                witnesses: vec![vertex_witness(&crate::image::VERTICES[index], c)],
            }
        }
        _ => {}
    }
    let x = CirclePoint::new(0.0).point(c, tau.y);
    let ys = match fiber_solve(tau, c, x) {
        Ok(ys) => ys,
        Err(_) => {
            return FiberClass {
                tag: FiberTag::OneCircle,
                witnesses: vec![collapsed_x_witness(tau, c)],
            }
        }
    };
    let mut witnesses: Vec<Witness> = ys.into_iter().map(|y| Witness { x, y }).collect();
    witnesses.sort_by(|a, b| b.det(c).total_cmp(&a.det(c)));
    let tag = match witnesses.len() {
        0 => return empty,
        1 => FiberTag::OneCircle,
        _ => FiberTag::TwoCircles,
    };
    FiberClass { tag, witnesses }
}

/// Rotation `r` with `r u r̄ = v`, taking the shorter arc. Antipodal inputs turn
/// by π about the first of `j, k` not parallel to `u`, made orthogonal to `u`.
fn rotation_taking(u: ImaginaryUnit, v: ImaginaryUnit) -> UnitQuaternion {
    let (uv, vv) = (u.vector(), v.vector());
    let w = 1.0 + dot3(uv, vv);
    if w < 1e-10 {
        let e = if uv[1].abs() > 1.0 - 1e-9 { [0.0, 0.0, 1.0] } else { [0.0, 1.0, 0.0] };
        let axis = add3(e, scale3(-dot3(e, uv), uv));
        let axis = scale3(1.0 / norm3(axis), axis);
        return UnitQuaternion::normalize(Quaternion::imaginary(axis)).expect("nonzero axis");
    }
    let a = cross3(uv, vv);
    UnitQuaternion::normalize(Quaternion::new(w, a[0], a[1], a[2])).expect("nonzero rotation")
}

/// A point `p ∈ S³` with `p̄ A p = x`.
pub fn hopf_lift(a: ImaginaryUnit, x: ImaginaryUnit) -> UnitQuaternion {
    let p = rotation_taking(x, a);
    // one correction step removes the cancellation error near antipodal inputs
    let got = adjoint(p, a);
    if got.max_abs_diff(x) == 0.0 {
        return p;
    }
    p * rotation_taking(x, got)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSample {
    pub cfg: ConfigPoint,
    /// Index of the witness component the sample belongs to.
    pub component: usize,
    pub residual: f64,
}

/// Points of `ν⁻¹(τ)`: the first ones are lifts of the witnesses, the rest move
/// along each component with random circle angles and random fiber phases
/// `e^{As}p`, `e^{Bt}q`.
pub fn fiber_sample<R: Rng + ?Sized>(
    tau: &MomentValue,
    spec: &TorusSpec,
    n: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Vec<FiberSample>, GeomError> {
    let class = fiber_classify(tau, spec.c, tol);
    if class.tag == FiberTag::Empty {
        return Err(GeomError::OutsideImage);
    }
    let k = class.witnesses.len();
    let lift = |w: &Witness, s: f64, t: f64, component: usize| {
        let p = exp_im(spec.a, s) * hopf_lift(spec.a, w.x);
        let q = exp_im(spec.b, t) * hopf_lift(spec.b, w.y);
        let cfg = ConfigPoint::new(p, q);
        FiberSample {
            cfg,
            component,
            residual: nu(spec, &cfg).max_abs_diff(tau),
        }
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let component = i % k;
        if i < k {
            out.push(lift(&class.witnesses[i], 0.0, 0.0, component));
            continue;
        }
        let w = move_along(tau, spec.c, &class, component, rng.gen_range(0.0..TAU));
        out.push(lift(&w, rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), component));
    }
    Ok(out)
}

/// The point of component `component` of the ν̄-fiber over circle angle `theta`.
/// The vertex fiber is a single point and is returned unchanged.
pub fn move_along(tau: &MomentValue, c: ImaginaryUnit, class: &FiberClass, component: usize, theta: f64) -> Witness {
    let w0 = class.witnesses[component];
    match class.tag {
        FiberTag::VertexPoint | FiberTag::Empty => w0,
        _ => {
            if 1.0 - tau.y * tau.y < DEGENERATE_GRAM_TOL {
                return Witness {
                    x: w0.x,
                    y: CirclePoint::new(theta).point(c, tau.z),
                };
            }
            let x = CirclePoint::new(theta).point(c, tau.y);
            let ys = fiber_solve(tau, c, x).unwrap_or_default();
            let sign = w0.det(c);
            let y = ys
                .iter()
                .copied()
                .min_by(|a, b| {
                    let da = (triple_det(x, *a, c) - sign).abs();
                    let db = (triple_det(x, *b, c) - sign).abs();
                    da.total_cmp(&db)
                })
                .unwrap_or(w0.y);
            Witness { x, y }
        }
    }
}

/// Dimension of the torus orbit through `cfg`, the rank of `{K₁, K₂, K₃}`.
pub fn orbit_dimension(spec: &TorusSpec, cfg: &ConfigPoint) -> usize {
    let k = killing_fields(spec, cfg).fields;
    let m = SMatrix::<f64, 3, 6>::from_fn(|r, c| k[r].coeffs[c]);
    let sv = m.singular_values();
    let mut s = [sv[0], sv[1], sv[2]];
    s.sort_by(|a, b| b.total_cmp(a));
    numerical_rank(&s)
}

/// Fiber component counting by dense sampling, independent of [`fiber_solve`].
pub mod oracle {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[derive(Debug, Clone)]
    pub struct PairCloud {
        pairs: Vec<(Vec3, Vec3)>,
        values: Vec<[f64; 3]>,
        pub c: ImaginaryUnit,
    }

    /// `count` Haar-random pairs `(x, y) ∈ S²×S²` and their ν̄ values, drawn in
    /// parallel chunks with seeds derived from `seed`.
    pub fn pair_cloud(c: ImaginaryUnit, count: usize, seed: u64) -> PairCloud {
        const CHUNK: usize = 1 << 14;
        let chunks: Vec<Vec<(Vec3, Vec3)>> = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let len = CHUNK.min(count - k * CHUNK);
                (0..len)
                    .map(|_| (ImaginaryUnit::sample(&mut rng).vector(), ImaginaryUnit::sample(&mut rng).vector()))
                    .collect()
            })
            .collect();
        let pairs: Vec<(Vec3, Vec3)> = chunks.into_iter().flatten().collect();
        let values = pairs
            .par_iter()
            .map(|(x, y)| [dot3(*x, *y), dot3(*x, c.vector()), dot3(*y, c.vector())])
            .collect();
        PairCloud { pairs, values, c }
    }

    /// Newton iteration for `ν̄(x, y) = τ`, `|x| = |y| = 1` in ℝ⁶ with minimal-norm
    /// steps. Returns the converged pair, if any.
    pub fn project_to_fiber(start: [f64; 6], tau: &MomentValue, c: ImaginaryUnit) -> Option<[f64; 6]> {
        let cv = c.vector();
        let t = tau.to_array();
        let mut z = start;
        for _ in 0..30 {
            let (x, y) = ([z[0], z[1], z[2]], [z[3], z[4], z[5]]);
            let f = nalgebra::SVector::<f64, 5>::from([
                dot3(x, y) - t[0],
                dot3(x, cv) - t[1],
                dot3(y, cv) - t[2],
                0.5 * (dot3(x, x) - 1.0),
                0.5 * (dot3(y, y) - 1.0),
            ]);
            if f.amax() < 1e-13 {
                return Some(z);
            }
            let j = SMatrix::<f64, 5, 6>::from_row_slice(&[
                y[0], y[1], y[2], x[0], x[1], x[2], //
                cv[0], cv[1], cv[2], 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, cv[0], cv[1], cv[2], //
                x[0], x[1], x[2], 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, y[0], y[1], y[2],
            ]);
            let step = j.transpose() * (j * j.transpose()).try_inverse()? * f;
            for k in 0..6 {
                z[k] -= step[k];
            }
        }
        None
    }

    /// Number of clusters among the pairs with `|ν̄ − τ|∞ < window`, each first
    /// pushed onto the fiber by [`project_to_fiber`], linking pairs closer than
    /// `link` in ℝ⁶.
    pub fn count_components(cloud: &PairCloud, tau: &MomentValue, window: f64, link: f64) -> usize {
        let t = tau.to_array();
        let hits: Vec<[f64; 6]> = cloud
            .values
            .par_iter()
            .zip(&cloud.pairs)
            .filter(|(v, _)| (0..3).all(|k| (v[k] - t[k]).abs() < window))
            .filter_map(|(_, (x, y))| project_to_fiber([x[0], x[1], x[2], y[0], y[1], y[2]], tau, cloud.c))
            .collect();
        let mut parent: Vec<usize> = (0..hits.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let link_sq = link * link;
        for i in 0..hits.len() {
            for j in i + 1..hits.len() {
                let d: f64 = (0..6).map(|k| (hits[i][k] - hits[j][k]).powi(2)).sum();
                if d < link_sq {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        (0..hits.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Smallest ℝ⁶ distance between the two ν̄-preimage circles, written as orbits
    /// of the rotation about C through the closed-form intersection points. Zero
    /// when the circles touch or the fiber is not of circle type. This is the
    /// scale the sampler must resolve.
    pub fn component_separation(tau: &MomentValue, c: ImaginaryUnit) -> f64 {
        let h = tau.y;
        let det = 1.0 - h * h;
        if det <= DEGENERATE_GRAM_TOL {
            return 0.0;
        }
        let alpha = (tau.x - h * tau.z) / det;
        let beta = (tau.z - h * tau.x) / det;
        let g_sq = 1.0 - (alpha * alpha + beta * beta + 2.0 * alpha * beta * h);
        if g_sq <= 0.0 {
            return 0.0;
        }
        let x = CirclePoint::new(0.0).point(c, h).vector();
        let n = cross3(x, c.vector());
        let n = scale3(1.0 / norm3(n), n);
        let base = add3(scale3(alpha, x), scale3(beta, c.vector()));
        let (yp, ym) = (add3(base, scale3(g_sq.sqrt(), n)), add3(base, scale3(-g_sq.sqrt(), n)));
        let rotate = |v: Vec3, d: f64| adjoint(exp_im(c, d), ImaginaryUnit::normalize(v).expect("unit")).vector();
        (0..2048)
            .map(|k| {
                let d = TAU * k as f64 / 2048.0;
                let dx = add3(x, scale3(-1.0, rotate(x, d)));
                let dy = add3(yp, scale3(-1.0, rotate(ym, d)));
                (dot3(dx, dx) + dot3(dy, dy)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// A τ drawn as ν̄ of a random pair.
    pub fn random_tau<R: Rng + ?Sized>(c: ImaginaryUnit, rng: &mut R) -> MomentValue {
        nu_bar(ImaginaryUnit::sample(rng), ImaginaryUnit::sample(rng), c)
    }
}
