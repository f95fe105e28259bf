//! The isometries `F_{a,b,c}(p, q) = (a p c⁻¹, b q c⁻¹)`, the maximal torus
//! `(e^{At₁}, e^{Bt₂}, e^{Ct₃})` and its Killing fields.
//!
//! Each `Kₙ` is the velocity of the `tₙ` flow, so `K₃ = (−pC, −qC)` and its frame
//! expansion is `−(C·i)(E₁+F₁) − (C·j)(E₂+F₂) + (C·k)(E₃+F₃)`.

use std::f64::consts::TAU;

use rand::Rng;

use crate::differential::{LinearFlow, VectorField};
use crate::frame::{ambient_to_frame, AmbientVector, ConfigPoint, TangentVector};
use crate::quaternion::{adjoint, exp_im, sample_unit, ImaginaryUnit, Quaternion, UnitQuaternion};

/// `F_{a,b,c}(p, q) = (a p c⁻¹, b q c⁻¹)`.
pub fn act(a: UnitQuaternion, b: UnitQuaternion, c: UnitQuaternion, cfg: &ConfigPoint) -> ConfigPoint {
    let ci = c.inv();
    ConfigPoint::new(a * cfg.p * ci, b * cfg.q * ci)
}

/// Differential of `F_{a,b,c}`, which is the restriction of a linear map of ℍ².
pub fn act_push(a: UnitQuaternion, b: UnitQuaternion, c: UnitQuaternion, w: &AmbientVector) -> AmbientVector {
    let ci = c.inv().quat();
    AmbientVector::new(a.quat() * w.p * ci, b.quat() * w.q * ci)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSpec {
    pub a: ImaginaryUnit,
    pub b: ImaginaryUnit,
    pub c: ImaginaryUnit,
}

impl TorusSpec {
    pub fn new(a: ImaginaryUnit, b: ImaginaryUnit, c: ImaginaryUnit) -> Self {
        Self { a, b, c }
    }

    /// `A = B = i`, `C = j`, the torus with a Lagrangian orbit through `(1, 1)`.
    pub fn lagrangian_example() -> Self {
        Self::new(ImaginaryUnit::I, ImaginaryUnit::I, ImaginaryUnit::J)
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(
            ImaginaryUnit::sample(rng),
            ImaginaryUnit::sample(rng),
            ImaginaryUnit::sample(rng),
        )
    }

    pub fn axis(&self, n: usize) -> ImaginaryUnit {
        [self.a, self.b, self.c][n]
    }
}

/// Angles reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusElement {
    t: [f64; 3],
}

fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl TorusElement {
    pub const IDENTITY: Self = Self { t: [0.0; 3] };

    pub fn new(t1: f64, t2: f64, t3: f64) -> Self {
        Self {
            t: [reduce_angle(t1), reduce_angle(t2), reduce_angle(t3)],
        }
    }

    pub fn angles(&self) -> [f64; 3] {
        self.t
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.t[0] + other.t[0], self.t[1] + other.t[1], self.t[2] + other.t[2])
    }
}

pub fn torus_act(spec: &TorusSpec, el: &TorusElement, cfg: &ConfigPoint) -> ConfigPoint {
    let [t1, t2, t3] = el.t;
    act(exp_im(spec.a, t1), exp_im(spec.b, t2), exp_im(spec.c, t3), cfg)
}

/// Velocity at `cfg` of the one-parameter subgroup `t ↦ tₙ = t` (0-based `n`):
/// `(Ap, 0)`, `(0, Bq)`, `(−pC, −qC)`.
pub fn generator_velocity(spec: &TorusSpec, n: usize, cfg: &ConfigPoint) -> AmbientVector {
    let (p, q) = (cfg.p.quat(), cfg.q.quat());
    match n {
        0 => AmbientVector::new(spec.a.quat() * p, Quaternion::ZERO),
        1 => AmbientVector::new(Quaternion::ZERO, spec.b.quat() * q),
        2 => AmbientVector::new(p * spec.c.quat(), q * spec.c.quat()).scale(-1.0),
        _ => panic!("torus generator index {n} out of range"),
    }
}

/// The Killing field `Kₙ` (0-based) as a vector field and as a flow.
#[derive(Debug, Clone, Copy)]
pub struct KillingField {
    pub spec: TorusSpec,
    pub index: usize,
}

impl KillingField {
    pub fn new(spec: TorusSpec, index: usize) -> Self {
        assert!(index < 3);
        Self { spec, index }
    }

    /// `(a, b, c)` of the time-`t` map.
    fn group_element(&self, t: f64) -> (UnitQuaternion, UnitQuaternion, UnitQuaternion) {
        let one = UnitQuaternion::ONE;
        match self.index {
            0 => (exp_im(self.spec.a, t), one, one),
            1 => (one, exp_im(self.spec.b, t), one),
            _ => (one, one, exp_im(self.spec.c, t)),
        }
    }
}

impl VectorField for KillingField {
    fn at(&self, cfg: &ConfigPoint) -> AmbientVector {
        generator_velocity(&self.spec, self.index, cfg)
    }
}

impl LinearFlow for KillingField {
    fn flow(&self, t: f64, cfg: &ConfigPoint) -> ConfigPoint {
        let (a, b, c) = self.group_element(t);
        act(a, b, c, cfg)
    }

    fn push(&self, t: f64, w: &AmbientVector) -> AmbientVector {
        let (a, b, c) = self.group_element(t);
        act_push(a, b, c, w)
    }
}

/// Frame and ambient forms of `K₁, K₂, K₃` at one point.
#[derive(Debug, Clone, Copy)]
pub struct KillingTriple {
    pub fields: [TangentVector; 3],
    pub ambient: [AmbientVector; 3],
}

fn frame_expansion(x: ImaginaryUnit) -> [f64; 3] {
    let v = x.vector();
    [v[0], v[1], -v[2]]
}

pub fn killing_fields(spec: &TorusSpec, cfg: &ConfigPoint) -> KillingTriple {
    let x = frame_expansion(adjoint(cfg.p, spec.a));
    let y = frame_expansion(adjoint(cfg.q, spec.b));
    let c = frame_expansion(spec.c);
    let k1 = [x[0], x[1], x[2], 0.0, 0.0, 0.0];
    let k2 = [0.0, 0.0, 0.0, y[0], y[1], y[2]];
    let k3 = [-c[0], -c[1], -c[2], -c[0], -c[1], -c[2]];
    let ambient = std::array::from_fn(|n| KillingField::new(*spec, n).at(cfg));
    KillingTriple {
        fields: [k1, k2, k3].map(|k| TangentVector::new(*cfg, k)),
        ambient,
    }
}

/// Agreement of the two forms of a [`KillingTriple`] through `ambient_to_frame`.
pub fn killing_form_residual(triple: &KillingTriple) -> f64 {
    (0..3)
        .map(|n| {
            let t = ambient_to_frame(&triple.fields[n].anchor, &triple.ambient[n])
                .expect("Killing fields are tangent");
            t.max_abs_diff(&triple.fields[n])
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HomomorphismReport {
    pub trials: usize,
    pub max_composition_residual: f64,
    /// Sign triples `(s_a, s_b, s_c)` acting trivially on every probe point.
    pub kernel_sign_triples: Vec<[i8; 3]>,
    /// Random probes `(a, a, a)`, `a ≠ ±1`, that fixed every probe point.
    pub random_kernel_hits: usize,
    pub random_probes: usize,
    /// `F_{a,b,c}(1, 1)` against the formula `(ac⁻¹, bc⁻¹)` on random triples.
    pub max_identity_image_residual: f64,
}

pub fn verify_homomorphism<R: Rng + ?Sized>(samples: usize, rng: &mut R) -> HomomorphismReport {
    let mut worst: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    for _ in 0..samples {
        let [a, b, c, a2, b2, c2] = std::array::from_fn(|_| sample_unit(rng));
        let cfg = ConfigPoint::sample(rng);
        let lhs = act(a, b, c, &act(a2, b2, c2, &cfg));
        let rhs = act(a * a2, b * b2, c * c2, &cfg);
        worst = worst.max(lhs.max_abs_diff(&rhs));
        let id = act(a, b, c, &ConfigPoint::IDENTITY);
        let expect = ConfigPoint::new(a * c.inv(), b * c.inv());
        worst_id = worst_id.max(id.max_abs_diff(&expect));
    }

    let probes: Vec<ConfigPoint> = (0..20).map(|_| ConfigPoint::sample(rng)).collect();
    let fixes_all = |a: UnitQuaternion, b: UnitQuaternion, c: UnitQuaternion| {
        probes.iter().all(|x| act(a, b, c, x).max_abs_diff(x) < 1e-12)
    };
    let sign = |s: i8| {
        if s > 0 {
            UnitQuaternion::ONE
        } else {
            UnitQuaternion::ONE.neg()
        }
    };
    let mut kernel = Vec::new();
    for sa in [1i8, -1] {
        for sb in [1i8, -1] {
            for sc in [1i8, -1] {
                if fixes_all(sign(sa), sign(sb), sign(sc)) {
                    kernel.push([sa, sb, sc]);
                }
            }
        }
    }
    let random_probes = 100;
    let random_kernel_hits = (0..random_probes)
        .filter(|_| {
            let a = sample_unit(rng);
            fixes_all(a, a, a)
        })
        .count();

    HomomorphismReport {
        trials: samples,
        max_composition_residual: worst,
        kernel_sign_triples: kernel,
        random_kernel_hits,
        random_probes,
        max_identity_image_residual: worst_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differential::{
        central_difference, lie_bracket_fd, lie_derivative_j, lie_derivative_j_flow,
        lie_derivative_metric, lie_derivative_metric_flow, FdParams,
    };
    use crate::frame::max_abs_diff6;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn act_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = ConfigPoint::sample(&mut rng);
        let one = UnitQuaternion::ONE;
        assert!(act(one, one, one, &cfg).max_abs_diff(&cfg) < 1e-15);
        let m = one.neg();
        assert!(act(m, m, m, &cfg).max_abs_diff(&cfg) < 1e-15);
        let [a, b, c] = std::array::from_fn(|_| sample_unit(&mut rng));
        let id = act(a, b, c, &ConfigPoint::IDENTITY);
        assert!(id.max_abs_diff(&ConfigPoint::new(a * c.inv(), b * c.inv())) < 1e-12);
        // the second component is not a b^{-1} in general
        assert!(id.q.quat().max_abs_diff((a * b.inv()).quat()) > 1e-3);
    }

    #[test]
    fn torus_composition_and_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = TorusSpec::sample(&mut rng);
        let cfg = ConfigPoint::sample(&mut rng);
        assert!(torus_act(&spec, &TorusElement::IDENTITY, &cfg).max_abs_diff(&cfg) < 1e-15);
        for _ in 0..100 {
            let e1 = TorusElement::new(rng.gen_range(-20.0..20.0), rng.gen(), rng.gen_range(0.0..7.0));
            let e2 = TorusElement::new(rng.gen(), rng.gen_range(-9.0..9.0), rng.gen());
            let lhs = torus_act(&spec, &e1, &torus_act(&spec, &e2, &cfg));
            let rhs = torus_act(&spec, &e1.compose(&e2), &cfg);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
        let near = TorusElement::new(TAU - 1e-13, -1e-17, TAU);
        for t in near.angles() {
            assert!((0.0..TAU).contains(&t));
        }
        let wrapped = TorusElement::new(TAU - 1e-3, 0.0, 0.0).compose(&TorusElement::new(2e-3, 0.0, 0.0));
        assert!((wrapped.angles()[0] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn killing_examples() {
        let spec = TorusSpec::new(ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::J);
        let o = ConfigPoint::IDENTITY;
        let kt = killing_fields(&spec, &o);
        assert_eq!(kt.ambient[0], AmbientVector::new(Quaternion::I, Quaternion::ZERO));
        assert!(max_abs_diff6(&kt.fields[0].coeffs, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]) < 1e-15);
        assert!(max_abs_diff6(&kt.fields[2].coeffs, &[0.0, -1.0, 0.0, 0.0, -1.0, 0.0]) < 1e-15);
        let v3 = ambient_to_frame(&o, &generator_velocity(&spec, 2, &o)).unwrap();
        assert!(max_abs_diff6(&v3.coeffs, &[0.0, -1.0, 0.0, 0.0, -1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn generator_velocities_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fd = FdParams::default();
        for _ in 0..50 {
            let spec = TorusSpec::sample(&mut rng);
            let cfg = ConfigPoint::sample(&mut rng);
            for n in 0..3 {
                let d = central_difference(
                    |t| {
                        let mut a = [0.0; 3];
                        a[n] = t;
                        torus_act(&spec, &TorusElement::new(a[0], a[1], a[2]), &cfg).to_array()
                    },
                    &fd,
                );
                let want = generator_velocity(&spec, n, &cfg).to_array();
                let resid = d.iter().zip(want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(resid < 1e-8, "generator {n}: {resid}");
            }
        }
    }

    #[test]
    fn frame_and_ambient_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let spec = TorusSpec::sample(&mut rng);
            let cfg = ConfigPoint::sample(&mut rng);
            assert!(killing_form_residual(&killing_fields(&spec, &cfg)) < 1e-12);
        }
    }

    #[test]
    fn killing_fields_are_holomorphic_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fd = FdParams::default();
        for _ in 0..100 {
            let spec = TorusSpec::sample(&mut rng);
            let cfg = ConfigPoint::sample(&mut rng);
            let u = TangentVector::sample(cfg, &mut rng);
            let v = TangentVector::sample(cfg, &mut rng);
            for n in 0..3 {
                let k = KillingField::new(spec, n);
                assert!(lie_derivative_metric(&k, &cfg, &u, &v, &fd).unwrap().abs() < 1e-6);
                assert!(lie_derivative_metric_flow(&k, &u, &v, &fd).unwrap().abs() < 1e-6);
                let lj = lie_derivative_j(&k, &cfg, &u, &fd).unwrap();
                assert!(lj.coeffs.iter().all(|c| c.abs() < 1e-6));
                let lj = lie_derivative_j_flow(&k, &u, &fd);
                assert!(lj.coeffs.iter().all(|c| c.abs() < 1e-6));
            }
        }
    }

    #[test]
    fn killing_fields_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fd = FdParams::default();
        for _ in 0..50 {
            let spec = TorusSpec::sample(&mut rng);
            let cfg = ConfigPoint::sample(&mut rng);
            for (m, n) in [(0, 1), (0, 2), (1, 2)] {
                let b = lie_bracket_fd(&KillingField::new(spec, m), &KillingField::new(spec, n), &cfg, &fd);
                assert!(b.coeffs.iter().all(|c| c.abs() < 1e-8));
            }
        }
    }

    #[test]
    fn homomorphism_and_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = verify_homomorphism(1000, &mut rng);
        assert!(r.max_composition_residual < 1e-12);
        assert_eq!(r.kernel_sign_triples, vec![[1, 1, 1], [-1, -1, -1]]);
        assert_eq!(r.random_kernel_hits, 0);
        assert!(r.max_identity_image_residual < 1e-12);
    }
}
