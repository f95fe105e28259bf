//! Sign and normalization conventions, each fixed by a numerical oracle rather
//! than by reading a formula off a display.
//!
//! * `J`: of the two off-diagonal signs, only `σ = −1` together with the
//!   averaged metric gives a nearly Kähler pair. With it the averaged metric has
//!   cross terms `−2/3`, identical to the displayed metric.
//! * `λ`: `ω = λ g(J·,·)` with `λ = −2` for `ω = (4/√3) Σ Eⁿ∧Fⁿ` (full wedge).
//! * `K₃ = (−pC, −qC)` is the velocity of the third circle. Its pairing with ω
//!   reproduces `(p̄Ap)·C` as `(√3/4)ω(K₃, K₁)`; in the order `K₁, K₃` the sign flips.
//! * The action has kernel `{±(1,1,1)}` and sends `(1,1)` to `(ac⁻¹, bc⁻¹)`.
//! * Five of the six segments between points of V lie on the upper sheet. The
//!   segment from `(−1,1,−1)` to `(−1,−1,1)` lies on the lower one, where
//!   `f̃₋ = 0 ≤ f̃₊`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::differential::nabla_j_defect_with;
use crate::frame::{metric_matrix, omega_matrix, AlmostComplex, ConfigPoint, MetricKind, TangentVector};
use crate::image::{edge_check, edges, hessian_det_as_displayed, hessian_det_closed, Sheet};
use crate::torus::{killing_fields, verify_homomorphism, TorusSpec};

#[derive(Debug, Clone, serde::Serialize)]
pub struct CandidateDefect {
    pub off_diagonal_sign: f64,
    pub metric: MetricKind,
    /// Worst `‖(∇_u J)u‖` over unit probes.
    pub defect: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EdgeNote {
    pub edge: [usize; 2],
    pub max_abs_f_tilde_upper: f64,
    pub max_abs_f_tilde_lower: f64,
    pub max_f_tilde_lower: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConventionsReport {
    pub candidates: Vec<CandidateDefect>,
    pub adopted_off_diagonal_sign: f64,
    pub adopted_metric: MetricKind,
    pub lambda: f64,
    pub lambda_residual: f64,
    /// `g(Eₙ, Fₙ)` in the adopted metric.
    pub metric_cross_term: f64,
    pub metric_cross_sign: i8,
    /// Adopted metric minus displayed metric.
    pub displayed_metric_gap: f64,
    pub kernel: Vec<[i8; 3]>,
    pub kernel_is_trivial: bool,
    pub identity_image: &'static str,
    pub identity_image_residual: f64,
    pub third_killing_field: &'static str,
    /// `(√3/4)ω(K₃,K₁)` minus `(p̄Ap)·C`, worst over probes.
    pub third_killing_field_residual: f64,
    /// Worst `|(√3/4)ω(K₁,K₃) + (p̄Ap)·C|` over probes.
    pub ascending_order_flip_residual: f64,
    /// Worst gap between the printed Hessian determinant and `det Hess f₋`.
    pub hessian_display_gap_lower: f64,
    pub hessian_display_gap_upper: f64,
    pub edges: Vec<EdgeNote>,
}

fn candidate_defect(j: AlmostComplex, kind: MetricKind, probes: &[TangentVector]) -> f64 {
    let g = metric_matrix(kind, j);
    probes
        .iter()
        .map(|u| {
            let n = crate::frame::bilinear(&g, &u.coeffs, &u.coeffs).sqrt();
            nabla_j_defect_with(&u.with_coeffs(u.coeffs.map(|c| c / n)), kind, j)
        })
        .fold(0.0, f64::max)
}

/// Least-squares `λ` with `ω ≈ λ Jᵀg` and the max entry residual.
fn lambda_fit(j: AlmostComplex) -> (f64, f64) {
    let g = metric_matrix(MetricKind::NKAveraged, j);
    let jm = j.matrix();
    let w = omega_matrix();
    // g(Ju, v) = uᵀ Jᵀ g v
    let jtg: [[f64; 6]; 6] =
        std::array::from_fn(|r| std::array::from_fn(|c| (0..6).map(|k| jm[k][r] * g[k][c]).sum()));
    let (mut num, mut den) = (0.0, 0.0);
    for r in 0..6 {
        for c in 0..6 {
            num += w[r][c] * jtg[r][c];
            den += jtg[r][c] * jtg[r][c];
        }
    }
    let lambda = num / den;
    let mut residual: f64 = 0.0;
    for r in 0..6 {
        for c in 0..6 {
            residual = residual.max((w[r][c] - lambda * jtg[r][c]).abs());
        }
    }
    (lambda, residual)
}

pub fn conventions_report(seed: u64, probes: usize) -> ConventionsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = ConfigPoint::IDENTITY;
    let unit: Vec<TangentVector> = (0..probes.max(1))
        .map(|_| TangentVector::sample(anchor, &mut rng))
        .collect();
    let mut candidates = Vec::new();
    for j in [AlmostComplex::DISPLAYED, AlmostComplex::ADOPTED] {
        for kind in [MetricKind::NKAveraged, MetricKind::NKDisplayed, MetricKind::Flat] {
            candidates.push(CandidateDefect {
                off_diagonal_sign: j.off_diagonal_sign,
                metric: kind,
                defect: candidate_defect(j, kind, &unit),
            });
        }
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.defect.total_cmp(&b.defect))
        .expect("nonempty");
    let adopted = AlmostComplex {
        off_diagonal_sign: best.off_diagonal_sign,
    };
    let adopted_metric = best.metric;
    let (lambda, lambda_residual) = lambda_fit(adopted);
    let g = metric_matrix(MetricKind::NKAveraged, adopted);
    let shown = metric_matrix(MetricKind::NKDisplayed, adopted);
    let displayed_metric_gap = (0..36)
        .map(|k| (g[k / 6][k % 6] - shown[k / 6][k % 6]).abs())
        .fold(0.0, f64::max);
    let cross = g[0][3];

    let hom = verify_homomorphism(probes.max(1), &mut rng);
    let (mut k3_residual, mut flip_residual): (f64, f64) = (0.0, 0.0);
    for _ in 0..probes.max(1) {
        let spec = TorusSpec::sample(&mut rng);
        let cfg = ConfigPoint::sample(&mut rng);
        let [k1, _, k3] = killing_fields(&spec, &cfg).fields;
        let pair = 3f64.sqrt() / 4.0 * crate::frame::omega_coeffs(&k3.coeffs, &k1.coeffs);
        let (x, _) = crate::moment::project_pair(&spec, &cfg);
        k3_residual = k3_residual.max((pair - x.dot(spec.c)).abs());
        let ascending = 3f64.sqrt() / 4.0 * crate::frame::omega_coeffs(&k1.coeffs, &k3.coeffs);
        flip_residual = flip_residual.max((ascending + x.dot(spec.c)).abs());
    }

    let (mut gap_lower, mut gap_upper): (f64, f64) = (0.0, 0.0);
    for a in -9..=9 {
        for b in -9..=9 {
            let (y, z) = (a as f64 / 10.0, b as f64 / 10.0);
            let shown = hessian_det_as_displayed(y, z);
            gap_lower = gap_lower.max((shown - hessian_det_closed(Sheet::Lower, y, z).unwrap()).abs());
            gap_upper = gap_upper.max((shown - hessian_det_closed(Sheet::Upper, y, z).unwrap()).abs());
        }
    }

    let edges = edges()
        .iter()
        .map(|&(a, b)| {
            let mut note = EdgeNote {
                edge: [a, b],
                max_abs_f_tilde_upper: 0.0,
                max_abs_f_tilde_lower: 0.0,
                max_f_tilde_lower: f64::NEG_INFINITY,
            };
            for k in 0..=100 {
                let e = edge_check(a, b, -1.0 + k as f64 / 50.0).expect("valid edge");
                note.max_abs_f_tilde_upper = note.max_abs_f_tilde_upper.max(e.f_tilde_upper.abs());
                note.max_abs_f_tilde_lower = note.max_abs_f_tilde_lower.max(e.f_tilde_lower.abs());
                note.max_f_tilde_lower = note.max_f_tilde_lower.max(e.f_tilde_lower);
            }
            note
        })
        .collect();

    ConventionsReport {
        candidates,
        adopted_off_diagonal_sign: adopted.off_diagonal_sign,
        adopted_metric,
        lambda,
        lambda_residual,
        metric_cross_term: cross,
        metric_cross_sign: if cross < 0.0 { -1 } else { 1 },
        displayed_metric_gap,
        kernel_is_trivial: hom.kernel_sign_triples.len() == 1,
        kernel: hom.kernel_sign_triples,
        identity_image: "F_{a,b,c}(1,1) = (a c^-1, b c^-1)",
        identity_image_residual: hom.max_identity_image_residual,
        third_killing_field: "K3 = (-pC, -qC)",
        third_killing_field_residual: k3_residual,
        ascending_order_flip_residual: flip_residual,
        hessian_display_gap_lower: gap_lower,
        hessian_display_gap_upper: gap_upper,
        edges,
    }
}
