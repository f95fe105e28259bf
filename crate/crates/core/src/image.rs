//! The image Δ of the multi-moment map: the body between the graph sheets
//! `X = f±(Y, Z)`, its boundary variety, curvature of the sheets, the
//! tetrahedron on the singular set `V`, and a triangulated boundary mesh.

use crate::differential::FdParams;
use crate::error::GeomError;
use crate::moment::MomentValue;

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Singular points of ∂Δ.
pub const VERTICES: [MomentValue; 4] = [
    MomentValue::new(1.0, 1.0, 1.0),
    MomentValue::new(1.0, -1.0, -1.0),
    MomentValue::new(-1.0, 1.0, -1.0),
    MomentValue::new(-1.0, -1.0, 1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Sheet {
    Upper,
    Lower,
}

impl Sheet {
    fn sign(self) -> f64 {
        match self {
            Sheet::Upper => 1.0,
            Sheet::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum DeltaClass {
    Interior,
    BoundarySmooth { sheet: Sheet },
    /// Index into [`VERTICES`].
    Vertex { index: usize },
    Outside,
}

impl DeltaClass {
    pub fn label(&self) -> &'static str {
        match self {
            DeltaClass::Interior => "interior",
            DeltaClass::BoundarySmooth { .. } => "boundary",
            DeltaClass::Vertex { .. } => "vertex",
            DeltaClass::Outside => "outside",
        }
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, DeltaClass::Outside)
    }
}

/// `f±(Y, Z) = YZ ± √(1−Y²)√(1−Z²)`.
pub fn f_bound(sheet: Sheet, y: f64, z: f64) -> Result<f64, GeomError> {
    if !(y.abs() <= 1.0 && z.abs() <= 1.0) {
        return Err(GeomError::Domain { y, z });
    }
    Ok(sheet_value(sheet, y, z))
}

fn sheet_value(sheet: Sheet, y: f64, z: f64) -> f64 {
    let root = (1.0 - y * y).max(0.0).sqrt() * (1.0 - z * z).max(0.0).sqrt();
    y * z + sheet.sign() * root
}

pub fn delta_classify(tau: &MomentValue, tol: f64) -> DeltaClass {
    for (index, v) in VERTICES.iter().enumerate() {
        if tau.max_abs_diff(v) <= tol {
            return DeltaClass::Vertex { index };
        }
    }
    if tau.y.abs() > 1.0 + tol || tau.z.abs() > 1.0 + tol {
        return DeltaClass::Outside;
    }
    let (y, z) = (tau.y.clamp(-1.0, 1.0), tau.z.clamp(-1.0, 1.0));
    let upper = sheet_value(Sheet::Upper, y, z);
    let lower = sheet_value(Sheet::Lower, y, z);
    if tau.x > upper + tol || tau.x < lower - tol {
        return DeltaClass::Outside;
    }
    if (tau.x - upper).abs() <= tol {
        DeltaClass::BoundarySmooth { sheet: Sheet::Upper }
    } else if (tau.x - lower).abs() <= tol {
        DeltaClass::BoundarySmooth { sheet: Sheet::Lower }
    } else {
        DeltaClass::Interior
    }
}

/// `F(X, Y, Z) = 2XYZ − X² − Y² − Z² + 1`.
pub fn variety_f(tau: &MomentValue) -> f64 {
    let (x, y, z) = (tau.x, tau.y, tau.z);
    2.0 * x * y * z - x * x - y * y - z * z + 1.0
}

/// `det Hess f±(Y, Z) = ((Y√(1−Z²) ∓ Z√(1−Y²)) / (√(1−Y²)√(1−Z²)))²`.
pub fn hessian_det_closed(sheet: Sheet, y: f64, z: f64) -> Result<f64, GeomError> {
    if !(y.abs() < 1.0 && z.abs() < 1.0) {
        return Err(GeomError::SheetEdge);
    }
    let s = (1.0 - y * y).sqrt();
    let r = (1.0 - z * z).sqrt();
    let t = (y * r - sheet.sign() * z * s) / (s * r);
    Ok(t * t)
}

/// Determinant of the central-difference Hessian of `f±`, Richardson-extrapolated
/// from steps `h` and `h/2` with `h = max(fd step, 1e-3)`. Second differences
/// need the larger step to keep cancellation error near 1e-10.
pub fn hessian_det_numeric(sheet: Sheet, y: f64, z: f64, fd: &FdParams) -> Result<f64, GeomError> {
    let h = fd.step().max(1e-3);
    if !(y.abs() + h < 1.0 && z.abs() + h < 1.0) {
        return Err(GeomError::SheetEdge);
    }
    let f = |a: f64, b: f64| sheet_value(sheet, a, b);
    let second = |h: f64| {
        let f0 = f(y, z);
        let fyy = (f(y + h, z) - 2.0 * f0 + f(y - h, z)) / (h * h);
        let fzz = (f(y, z + h) - 2.0 * f0 + f(y, z - h)) / (h * h);
        let fyz = (f(y + h, z + h) - f(y + h, z - h) - f(y - h, z + h) + f(y - h, z - h)) / (4.0 * h * h);
        [fyy, fzz, fyz]
    };
    let (coarse, fine) = (second(h), second(0.5 * h));
    let [fyy, fzz, fyz]: [f64; 3] = std::array::from_fn(|k| (4.0 * fine[k] - coarse[k]) / 3.0);
    Ok(fyy * fzz - fyz * fyz)
}

/// Closed-form and finite-difference Hessian determinants of a sheet.
pub fn hessian_det_f(sheet: Sheet, y: f64, z: f64, fd: &FdParams) -> Result<(f64, f64), GeomError> {
    Ok((hessian_det_closed(sheet, y, z)?, hessian_det_numeric(sheet, y, z, fd)?))
}

/// The expression `((X√(1−Y²)+Y√(1−X²))/(√(1−X²)√(1−Y²)))²` with its two
/// variables bound to the sheet arguments `(Y, Z)`.
pub fn hessian_det_as_displayed(y: f64, z: f64) -> f64 {
    let (a, b) = (y, z);
    let t = (a * (1.0 - b * b).sqrt() + b * (1.0 - a * a).sqrt()) / ((1.0 - a * a).sqrt() * (1.0 - b * b).sqrt());
    t * t
}

/// `f̃±(X, Y, Z) = f±(Y, Z) − X`.
pub fn f_tilde(sheet: Sheet, tau: &MomentValue) -> Result<f64, GeomError> {
    Ok(f_bound(sheet, tau.y, tau.z)? - tau.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub point: MomentValue,
    pub f_tilde_upper: f64,
    pub f_tilde_lower: f64,
}

impl EdgePoint {
    /// Boundary criterion: `f̃₊ = 0 ≥ f̃₋` or `f̃₊ ≥ 0 = f̃₋`.
    pub fn on_boundary(&self, tol: f64) -> bool {
        (self.f_tilde_upper.abs() <= tol && self.f_tilde_lower <= tol)
            || (self.f_tilde_lower.abs() <= tol && self.f_tilde_upper >= -tol)
    }
}

/// Point `((1+t)/2)·v₁ + ((1−t)/2)·v₂` on the segment between two vertices of `V`
/// (indices into [`VERTICES`]), with both `f̃` values.
pub fn edge_check(v1: usize, v2: usize, t: f64) -> Result<EdgePoint, GeomError> {
    if v1 == v2 || v1 >= 4 || v2 >= 4 {
        return Err(GeomError::BadEdge);
    }
    let t = t.clamp(-1.0, 1.0);
    let point = VERTICES[v2].lerp(&VERTICES[v1], 0.5 * (1.0 + t));
    let point = MomentValue::new(
        point.x.clamp(-1.0, 1.0),
        point.y.clamp(-1.0, 1.0),
        point.z.clamp(-1.0, 1.0),
    );
    Ok(EdgePoint {
        point,
        f_tilde_upper: f_tilde(Sheet::Upper, &point)?,
        f_tilde_lower: f_tilde(Sheet::Lower, &point)?,
    })
}

/// All six vertex pairs `(v₁, v₂)`, `v₁ < v₂`.
pub fn edges() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

/// A face of the tetrahedron on `V` as the half-space `n·τ ≤ offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: [f64; 3],
    pub offset: f64,
    pub vertices: [usize; 3],
}

/// Face half-spaces of the tetrahedron on `V`, oriented so the opposite vertex is inside.
pub fn tetrahedron_faces() -> [HalfSpace; 4] {
    std::array::from_fn(|opposite| {
        let idx: Vec<usize> = (0..4).filter(|&k| k != opposite).collect();
        let [a, b, c] = [idx[0], idx[1], idx[2]].map(|k| VERTICES[k].to_array());
        let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let mut n = crate::quaternion::cross3(e1, e2);
        let mut off = crate::quaternion::dot3(n, a);
        if crate::quaternion::dot3(n, VERTICES[opposite].to_array()) > off {
            n = [-n[0], -n[1], -n[2]];
            off = -off;
        }
        HalfSpace {
            normal: n,
            offset: off,
            vertices: [idx[0], idx[1], idx[2]],
        }
    })
}

pub fn in_tetrahedron(tau: &MomentValue, tol: f64) -> bool {
    tetrahedron_faces()
        .iter()
        .all(|f| crate::quaternion::dot3(f.normal, tau.to_array()) <= f.offset + tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<MomentValue>,
    /// 0-based vertex indices.
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Vertex count of [`boundary_mesh`] at resolution `n` after merging the seam:
    /// `2n² − 4(n − 1)`.
    pub fn expected_vertex_count(n: usize) -> usize {
        2 * n * n - 4 * (n - 1)
    }

    /// `4(n − 1)²` triangles, half on each sheet.
    pub fn expected_triangle_count(n: usize) -> usize {
        4 * (n - 1) * (n - 1)
    }
}

/// Both sheets over an `n × n` grid on `[−1, 1]²`. Grid points on `|Y| = 1` or
/// `|Z| = 1`, where the sheets meet, are shared by both sheets. The upper sheet
/// splits each cell along the diagonal joining the `X = YZ`-maximal corners and
/// the lower sheet along the other one, so resolution 2 gives the tetrahedron.
pub fn boundary_mesh(resolution: usize) -> Result<Mesh, GeomError> {
    let n = resolution;
    if n < 2 {
        return Err(GeomError::Resolution(n));
    }
    let coord = |k: usize| {
        if k == 0 {
            -1.0
        } else if k == n - 1 {
            1.0
        } else {
            -1.0 + 2.0 * k as f64 / (n - 1) as f64
        }
    };
    let on_seam = |a: usize, b: usize| a == 0 || b == 0 || a == n - 1 || b == n - 1;
    let mut vertices = Vec::with_capacity(Mesh::expected_vertex_count(n));
    let mut index = [vec![usize::MAX; n * n], vec![usize::MAX; n * n]];
    for (s, sheet) in [Sheet::Upper, Sheet::Lower].into_iter().enumerate() {
        for a in 0..n {
            for b in 0..n {
                let cell = a * n + b;
                if s == 1 && on_seam(a, b) {
                    index[1][cell] = index[0][cell];
                    continue;
                }
                let (y, z) = (coord(a), coord(b));
                index[s][cell] = vertices.len();
                vertices.push(MomentValue::new(sheet_value(sheet, y, z), y, z));
            }
        }
    }
    let mut triangles = Vec::with_capacity(Mesh::expected_triangle_count(n));
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            let c = |s: usize, da: usize, db: usize| index[s][(a + da) * n + b + db];
            // upper: diagonal (a,b)-(a+1,b+1); lower: (a+1,b)-(a,b+1)
            triangles.push([c(0, 0, 0), c(0, 1, 0), c(0, 1, 1)]);
            triangles.push([c(0, 0, 0), c(0, 1, 1), c(0, 0, 1)]);
            triangles.push([c(1, 0, 0), c(1, 0, 1), c(1, 1, 0)]);
            triangles.push([c(1, 1, 0), c(1, 0, 1), c(1, 1, 1)]);
        }
    }
    Ok(Mesh { vertices, triangles })
}
